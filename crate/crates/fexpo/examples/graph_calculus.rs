//! A tour of the weighted-graph calculus: the DSL, components and their
//! statistics, classification under both taxonomies, and the structural
//! actions (disjoint union, relabeling, vertex contraction, edge
//! augmentation).
//!
//! Run: `cargo run -p fexpo --example graph_calculus`

use fexpo::graph::{parse_dsl, vee, Taxonomy, WeightedGraph};
use std::collections::BTreeMap;

fn main() {
    let text = "\
# a path with weighted ends, a 3-cycle, and a heavy singleton
v 1 1
v 2 0
v 3 1
e 1 2 1
e 2 3 1
v 10 0
v 11 0
v 12 0
e 10 11 1
e 11 12 1
e 10 12 1
v 20 2
";
    let g = parse_dsl(text).expect("valid DSL");
    println!("parsed graph: {g}");
    println!();

    for c in g.components() {
        let st = c.stats().unwrap();
        let first = c.classify(Taxonomy::First).unwrap();
        let second = c.classify(Taxonomy::Second).unwrap();
        println!("component {c}");
        println!(
            "  I={} theta_bar={} q_bar={} s={}",
            st.i, st.theta_bar, st.q_bar, st.s
        );
        println!(
            "  first: {:?}  second: {:?}  cycle={} path_weighted_ends={}",
            first.tag, second.tag, second.is_cycle, second.is_path_weighted_ends
        );
    }
    println!();
    println!(
        "graph satisfies the second-exponent assumption: {}",
        g.satisfies_assumption_graph()
    );

    // structural actions
    let a = WeightedGraph::singleton(1, 1);
    let b = WeightedGraph::singleton(2, 1);
    let joined = vee([&a, &b]).unwrap();
    println!();
    println!("singleton(1,q=1) v singleton(2,q=1) = {joined}");
    let edged = joined
        .edge_augment(&BTreeMap::from([((1, 2), 1)]))
        .unwrap();
    println!("after [[1,2]]_1 (pairing both weights): {edged}");
    let contracted = WeightedGraph::singleton(7, 2)
        .vertex_contract(&BTreeMap::from([(7, -1)]))
        .unwrap();
    println!("<7>_-1 singleton(7,q=2) = {contracted}");
    println!("shift by +5: {}", edged.shift(5));
}
