//! Derivative and duality rewrites in action: how the directional
//! derivative splits a graph-sum functional into a family, how the family
//! maximum obeys the exponent law in both regimes, the squared-norm
//! doubling, and an integration-by-parts cascade down to weightless graphs.
//!
//! Run: `cargo run -p fexpo --example rewrite_families`

use fexpo::exponent::{rat, ExponentExpr};
use fexpo::graph::{vee, WeightedGraph};
use fexpo::rewrite::{
    derivative_norm_graph, du_rewrite_first, du_rewrite_second, ibp_reduce, GraphSumSpec,
};
use std::collections::{BTreeMap, BTreeSet};

fn banner(title: &str) {
    println!();
    println!("== {title} ==");
}

fn main() {
    // the N(1,0) functional: a single unit-weight vertex at alpha = 0
    banner("directional derivative, first exponent");
    let spec = GraphSumSpec::first(ExponentExpr::zero(), WeightedGraph::singleton(1, 1), "a(t)");
    let fam = du_rewrite_first(&spec).unwrap();
    println!("input exponent: {}", spec.exponent().unwrap());
    println!("case {:?}, family max: {}", fam.case_tag, fam.max_exponent);
    for (i, item) in fam.items.iter().enumerate() {
        println!(
            "  item {i}: alpha {}  graph {}  exponent {}",
            item.alpha,
            item.graph,
            item.exponent().unwrap()
        );
    }

    banner("directional derivative, second exponent with a tensored path");
    let path = WeightedGraph::new([1, 2, 3], [(1, 2, 1), (2, 3, 1)], [(1, 1), (3, 1)]).unwrap();
    let t: BTreeSet<i64> = [1].into();
    let spec = GraphSumSpec::second(ExponentExpr::zero(), path, t, "a(t)").unwrap();
    let fam = du_rewrite_second(&spec).unwrap();
    println!("input exponent: {}", spec.exponent().unwrap());
    println!("case {:?}, family max: {}", fam.case_tag, fam.max_exponent);
    println!(
        "items max recomputed: {}",
        fam.items_max_exponent().unwrap()
    );
    for (i, item) in fam.items.iter().enumerate() {
        println!(
            "  item {i}: alpha {}  graph {}  tset {:?}",
            item.alpha,
            item.graph,
            item.t_set.iter().collect::<Vec<_>>()
        );
    }

    banner("squared derivative norm doubles the exponent");
    let graph = WeightedGraph::new([1, 2], [(1, 2, 1)], [(1, 1), (2, 1)]).unwrap();
    let spec = GraphSumSpec::first(ExponentExpr::affine(rat(-1, 1), rat(4, 1)), graph, "a");
    let out = derivative_norm_graph(&spec, &BTreeMap::from([(1, 1)])).unwrap();
    println!("input:  {}  exponent {}", spec.graph, spec.exponent().unwrap());
    println!("output: {}  exponent {}", out.graph, out.exponent().unwrap());

    banner("integration-by-parts cascade");
    let graph = vee([
        &WeightedGraph::new([1, 2], [(1, 2, 1)], [(1, 1), (2, 1)]).unwrap(),
        &WeightedGraph::singleton(10, 2),
    ])
    .unwrap();
    let mut spec = GraphSumSpec::first(ExponentExpr::affine(rat(-1, 1), rat(4, 1)), graph, "a");
    let mut level = 0;
    while spec.graph.q_bar() > 0 {
        let target = spec
            .graph
            .components()
            .into_iter()
            .find(|c| c.q_bar() > 0)
            .unwrap()
            .min_vertex();
        let outs = ibp_reduce(&spec, target).unwrap();
        println!(
            "level {level}: exponent {}  total weight {}  family of {}",
            spec.exponent().unwrap(),
            spec.graph.q_bar(),
            outs.len()
        );
        spec = outs.into_iter().next().unwrap();
        level += 1;
    }
    println!(
        "level {level}: exponent {}  total weight 0 -- fully reduced to {}",
        spec.exponent().unwrap(),
        spec.graph
    );
}
