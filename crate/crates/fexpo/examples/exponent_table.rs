//! Symbolic first and second exponents for the graph-sum functionals of the
//! quadratic-variation expansion, printed next to their closed forms.
//!
//! Run: `cargo run -p fexpo --example exponent_table`

use fexpo::exponent::HurstParam;
use fexpo::regression::exponent_table;

fn main() {
    let h = HurstParam::new(0.6).unwrap();
    println!("{:<42} {:<28} {:>12}", "functional", "exponent", "value@H=0.6");
    println!("{}", "-".repeat(84));
    for case in exponent_table() {
        let status = if case.passes() { "" } else { "  <- MISMATCH" };
        println!(
            "{:<42} {:<28} {:>12.6}{status}",
            case.name,
            format!("{}", case.computed),
            case.computed.eval(h),
        );
    }
    let total = exponent_table().len();
    let ok = exponent_table().iter().filter(|c| c.passes()).count();
    println!("{}", "-".repeat(84));
    println!("{ok}/{total} closed forms reproduced exactly");
}
