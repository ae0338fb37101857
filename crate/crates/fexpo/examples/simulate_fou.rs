//! Monte Carlo of the fOU quadratic variation: the rescaled error Z_n is
//! simulated from exact-in-law fBm paths and its moments are compared with
//! the limit variance G = 2 c_H^2 sigma^4 T^{4H}.
//!
//! Run: `cargo run -p fexpo --example simulate_fou --release`

use fexpo::expansion::g_infinity_fou;
use fexpo::exponent::HurstParam;
use fexpo::fbm::{fou_qv_ensemble, FouParams, SampleMethod};

fn main() {
    let h = HurstParam::new(0.6).unwrap();
    let (b, sigma, x0, t) = (1.0, 1.0, 0.0, 1.0);
    let paths = 20_000;
    let g_inf = g_infinity_fou(sigma, t, h);

    println!("fOU: b={b} sigma={sigma} x0={x0} T={t} H={}", h.h());
    println!("v_inf = sigma^2 T^(2H) = {}", sigma * sigma * t.powf(2.0 * h.h()));
    println!("G = 2 c_H^2 sigma^4 T^(4H) = {g_inf:.6}");
    println!();
    println!(
        "{:>5} {:>12} {:>12} {:>12} {:>10}",
        "n", "mean V_n", "mean Z_n", "var Z_n", "var/G"
    );
    for n in [32usize, 64, 128, 256] {
        let params = FouParams {
            h,
            b,
            sigma,
            x0,
            t,
            n,
            substeps: 8,
        };
        let reports = fou_qv_ensemble(&params, paths, 7, SampleMethod::Circulant).unwrap();
        let nf = reports.len() as f64;
        let mean_v = reports.iter().map(|r| r.v_n).sum::<f64>() / nf;
        let mean_z = reports.iter().map(|r| r.z_n).sum::<f64>() / nf;
        let var_z =
            reports.iter().map(|r| (r.z_n - mean_z).powi(2)).sum::<f64>() / (nf - 1.0);
        println!(
            "{n:>5} {mean_v:>12.6} {mean_z:>12.6} {var_z:>12.6} {:>10.4}",
            var_z / g_inf
        );
    }
    println!();
    println!("mean V_n drifts to v_inf and var Z_n approaches G as n grows;");
    println!("the residual mean of Z_n is the r_n-order effect the expansion captures.");
}
