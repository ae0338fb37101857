//! The full expansion pipeline: simulate Z_n, build the expansion density
//! p_hat_n from the exact fOU random-symbol coefficient, and show that it
//! beats the plain Gaussian in Kolmogorov distance with bootstrap
//! confidence.
//!
//! Run: `cargo run -p fexpo --example edgeworth_density --release`

use fexpo::expansion::{
    bootstrap_ks_improvement, fou_symbol_coefficient_exact, fou_symbol_coefficient_mc,
    g_infinity_fou, kolmogorov_distance, ExpansionDensity,
};
use fexpo::exponent::HurstParam;
use fexpo::fbm::{fou_qv_ensemble, FouParams, SampleMethod};

fn main() {
    let h = HurstParam::new(0.6).unwrap();
    let (b, sigma, x0, t) = (1.0, 1.0, 0.0, 1.0);
    let paths = 30_000;

    let g_inf = g_infinity_fou(sigma, t, h);
    let symbol = fou_symbol_coefficient_exact(b, sigma, x0, h, t).unwrap();
    println!("G = {g_inf:.6}");
    println!("exact symbol coefficient c1 = {:.6}", symbol.value(1));
    let mc = fou_symbol_coefficient_mc(b, sigma, x0, h, t, 5_000, 11).unwrap();
    let c = mc.coefficient(1).unwrap();
    println!(
        "Monte Carlo c1 = {:.6} (std error {:.6}) -- {:.2} standard errors away",
        c.value,
        c.std_error,
        (c.value - symbol.value(1)).abs() / c.std_error
    );
    println!();

    let gauss = ExpansionDensity::gaussian(g_inf).unwrap();
    println!(
        "{:>5} {:>8} {:>12} {:>12} {:>24}",
        "n", "r_n", "KS(p_hat)", "KS(gauss)", "improvement CI95"
    );
    for n in [64usize, 128, 256] {
        let params = FouParams {
            h,
            b,
            sigma,
            x0,
            t,
            n,
            substeps: 8,
        };
        let z: Vec<f64> = fou_qv_ensemble(&params, paths, 13, SampleMethod::Circulant)
            .unwrap()
            .iter()
            .map(|r| r.z_n)
            .collect();
        let r_n = (n as f64).powf(2.0 * h.h() - 1.5);
        let density = ExpansionDensity::new(g_inf, r_n, symbol.clone()).unwrap();
        let d_exp = kolmogorov_distance(&z, &density).unwrap();
        let d_gauss = kolmogorov_distance(&z, &gauss).unwrap();
        let ci = bootstrap_ks_improvement(&z, &density, &gauss, 200, 3).unwrap();
        println!(
            "{n:>5} {r_n:>8.4} {d_exp:>12.5} {d_gauss:>12.5} {:>24}",
            format!("[{:.5}, {:.5}]", ci.lo, ci.hi)
        );
    }
    println!();
    println!("a slice of the density around the origin (n = 256):");
    let r_n = 256f64.powf(2.0 * h.h() - 1.5);
    let density = ExpansionDensity::new(g_inf, r_n, symbol).unwrap();
    for i in 0..9 {
        let z = -2.0 + i as f64 * 0.5;
        println!(
            "  z = {z:>5.2}   p_hat = {:>9.6}   gaussian = {:>9.6}",
            density.density(z),
            gauss.density(z)
        );
    }
}
