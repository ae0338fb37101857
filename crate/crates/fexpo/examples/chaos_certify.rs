//! Certification of the Wiener chaos product constants: the contraction
//! expansion of a product of multiple integrals must reproduce the Isserlis
//! (pairing) expectation for every configuration.
//!
//! Run: `cargo run -p fexpo --example chaos_certify`

use fexpo::cli::random_chaos_config;
use fexpo::oracle::{chaos_expectation_via_contractions, gaussian_moment_oracle, ChaosConfig};
use fexpo::rewrite::chaos_product_expand;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;

fn main() {
    // a worked example: I_2(f^(x2)) I_2(g^(x2)) expanded term by term
    println!("contraction terms of I_2(f^(x2)) I_2(g^(x2)):");
    let q = BTreeMap::from([(1, 2u32), (2, 2u32)]);
    for term in chaos_product_expand(&q) {
        println!(
            "  pi = {:?}  constant = {}  residual orders = {:?}",
            term.pi, term.constant, term.residual_orders
        );
    }
    let gram = vec![vec![1.0, 0.35], vec![0.35, 2.0]];
    let cfg = ChaosConfig::new(&[1, 2], &[2, 2], &gram).unwrap();
    println!(
        "E[I_2 I_2] expansion = {}   oracle = {}   (2<f,g>^2 = {})",
        chaos_expectation_via_contractions(&cfg),
        gaussian_moment_oracle(&cfg).unwrap(),
        2.0 * 0.35f64.powi(2)
    );
    println!();

    // random certification sweep
    let mut rng = ChaCha12Rng::seed_from_u64(0);
    let trials = 500;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let cfg = random_chaos_config(&mut rng);
        let lhs = chaos_expectation_via_contractions(&cfg);
        let rhs = gaussian_moment_oracle(&cfg).unwrap();
        let err = if rhs == 0.0 {
            lhs.abs()
        } else {
            (lhs - rhs).abs() / rhs.abs()
        };
        worst = worst.max(err);
    }
    println!("{trials} random configurations: worst relative error {worst:.3e}");
}
