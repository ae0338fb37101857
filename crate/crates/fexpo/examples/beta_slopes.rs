//! Numerical verification of the predicted orders: deterministic beta-sums
//! over trees and cycles are evaluated on a dyadic grid of n and their
//! log-log slopes are compared with the symbolic exponents.
//!
//! Run: `cargo run -p fexpo --example beta_slopes --release`

use fexpo::exponent::HurstParam;
use fexpo::graph::WeightedGraph;
use fexpo::oracle::{cycle_sum, fit_order, graph_beta_sum};

fn main() {
    let grid: Vec<usize> = vec![256, 512, 1024, 2048];
    let t = 1.0;
    println!(
        "{:<24} {:>6} {:>10} {:>10} {:>8}",
        "family", "H", "slope", "predicted", "r^2"
    );
    println!("{}", "-".repeat(64));
    for hv in [0.55, 0.6, 0.7] {
        let h = HurstParam::new(hv).unwrap();

        for i in [2usize, 3, 4] {
            let vs: Vec<i64> = (1..=i as i64).collect();
            let es: Vec<(i64, i64, u32)> = (1..i as i64).map(|v| (v, v + 1, 1)).collect();
            let tree = WeightedGraph::new(vs, es, []).unwrap();
            let vals: Vec<f64> = grid
                .iter()
                .map(|&n| graph_beta_sum(&tree, n, h, t).unwrap())
                .collect();
            let fit = fit_order(&grid, &vals).unwrap();
            println!(
                "{:<24} {:>6} {:>10.4} {:>10.4} {:>8.5}",
                format!("tree path I={i}"),
                hv,
                fit.slope,
                2.0 - i as f64,
                fit.r_squared
            );
        }

        for k in [2usize, 3] {
            let vals: Vec<f64> = grid
                .iter()
                .map(|&n| cycle_sum(n, k, h, t).unwrap())
                .collect();
            let fit = fit_order(&grid, &vals).unwrap();
            let critical = 0.5 * (1.0 + 1.0 / k as f64);
            let predicted = if hv < critical {
                1.0 - 2.0 * k as f64 * hv
            } else {
                -(k as f64)
            };
            let near_critical = (hv - critical).abs() < 0.02;
            println!(
                "{:<24} {:>6} {:>10.4} {:>10.4} {:>8.5}{}",
                format!("cycle k={k}"),
                hv,
                fit.slope,
                predicted,
                fit.r_squared,
                if near_critical { "  (near critical H(k): log factor)" } else { "" }
            );
        }
    }
}
