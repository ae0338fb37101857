//! The exponent regression table: every graph-sum functional appearing in
//! the quadratic-variation expansion, paired with the closed-form exponent
//! it must reproduce symbolically.

use crate::exponent::{first_exponent, rat, second_exponent, ExponentExpr};
use crate::graph::{Vertex, WeightedGraph};
use std::collections::BTreeSet;

/// One table row: a named exponent computation and its expected value.
pub struct RegressionCase {
    pub name: &'static str,
    pub computed: ExponentExpr,
    pub expected: ExponentExpr,
}

impl RegressionCase {
    pub fn passes(&self) -> bool {
        self.computed.sym_eq(&self.expected)
    }
}

fn g(vs: &[Vertex], es: &[(Vertex, Vertex, u32)], qs: &[(Vertex, u32)]) -> WeightedGraph {
    WeightedGraph::new(vs.iter().copied(), es.iter().copied(), qs.iter().copied())
        .expect("table graphs are valid")
}

fn aff(a: (i64, i64), b: (i64, i64)) -> ExponentExpr {
    ExponentExpr::affine(rat(a.0, a.1), rat(b.0, b.1))
}

fn first(alpha: ExponentExpr, graph: &WeightedGraph) -> ExponentExpr {
    first_exponent(&alpha, graph).expect("valid graph")
}

fn second(alpha: ExponentExpr, graph: &WeightedGraph, t_ids: &[Vertex]) -> ExponentExpr {
    let t: BTreeSet<Vertex> = t_ids.iter().copied().collect();
    second_exponent(&alpha, graph, &t).expect("graph satisfies the assumption")
}

/// Builds the full regression table.
pub fn exponent_table() -> Vec<RegressionCase> {
    let m20_1 = g(&[1, 2], &[(1, 2, 1)], &[(1, 1), (2, 1)]);
    let m20_11 = g(&[1, 2], &[(1, 2, 2)], &[]);
    let m20_2 = g(&[1, 2], &[], &[(1, 2), (2, 1)]);
    let m20_3 = g(&[1, 2], &[], &[(1, 1), (2, 1)]);
    let m20_4 = g(&[1, 2], &[(1, 2, 1)], &[(2, 1)]);
    let m30_1 = g(&[1, 2, 3], &[(1, 2, 1)], &[(1, 1), (2, 1), (3, 1)]);
    let m30_2 = g(&[1, 2, 3], &[(1, 2, 1), (1, 3, 1)], &[(2, 1), (3, 1)]);
    let m30_3 = g(&[1, 2, 3], &[], &[(1, 2), (2, 1), (3, 1)]);
    let m30_5 = g(&[1, 2, 3], &[(2, 3, 1)], &[(1, 2), (3, 1)]);
    let m20_23 = g(&[1, 2], &[(1, 2, 1)], &[(1, 1)]);
    let n10_1 = WeightedGraph::singleton(1, 1);
    let n20_2 = crate::graph::vee([&WeightedGraph::singleton(1, 0), &WeightedGraph::singleton(2, 1)])
        .expect("disjoint");
    let cubic = WeightedGraph::singleton(1, 3);

    vec![
        RegressionCase {
            name: "e(4H-1, G^M(2,0)_1)",
            computed: first(aff((-1, 1), (4, 1)), &m20_1),
            expected: ExponentExpr::zero(),
        },
        RegressionCase {
            name: "e(4H-1, G^M(2,0)_1,1)",
            computed: first(aff((-1, 1), (4, 1)), &m20_11),
            expected: ExponentExpr::zero(),
        },
        RegressionCase {
            name: "e(4H-2, G^M(2,0)_2)",
            computed: first(aff((-2, 1), (4, 1)), &m20_2),
            expected: aff((-3, 2), (2, 1)),
        },
        RegressionCase {
            name: "e(4H-3, G^M(2,0)_3)",
            computed: first(aff((-3, 1), (4, 1)), &m20_3),
            expected: aff((-3, 1), (4, 1)),
        },
        RegressionCase {
            name: "e(4H-2, G^M(2,0)_4)",
            computed: first(aff((-2, 1), (4, 1)), &m20_4),
            expected: aff((-3, 1), (4, 1)),
        },
        RegressionCase {
            name: "e2(4H-1, G^M(2,0)_1, {G^M(2,0)_1})",
            computed: second(aff((-1, 1), (4, 1)), &m20_1, &[1]),
            expected: ExponentExpr::max([aff((-1, 2), (0, 1)), aff((-3, 1), (4, 1))]),
        },
        RegressionCase {
            name: "e(6H-5/2, G^M(3,0)_1)",
            computed: first(aff((-5, 2), (6, 1)), &m30_1),
            expected: aff((-3, 2), (2, 1)),
        },
        RegressionCase {
            name: "e(6H-3/2, G^M(3,0)_2)",
            computed: first(aff((-3, 2), (6, 1)), &m30_2),
            expected: aff((-3, 2), (2, 1)),
        },
        RegressionCase {
            name: "e2(6H-3/2, G^M(3,0)_2, {})",
            computed: second(aff((-3, 2), (6, 1)), &m30_2, &[]),
            expected: ExponentExpr::max([aff((-1, 2), (0, 1)), aff((-9, 2), (6, 1))]),
        },
        RegressionCase {
            name: "e(6H-7/2, G^M(3,0)_3)",
            computed: first(aff((-7, 2), (6, 1)), &m30_3),
            expected: aff((-3, 1), (4, 1)),
        },
        RegressionCase {
            name: "e(6H-5/2, G^M(3,0)_5)",
            computed: first(aff((-5, 2), (6, 1)), &m30_5),
            expected: aff((-3, 1), (4, 1)),
        },
        RegressionCase {
            name: "e2(6H-5/2, G^M(3,0)_1, {G^M(3,0)_1|12})",
            computed: second(aff((-5, 2), (6, 1)), &m30_1, &[1]),
            expected: ExponentExpr::max([aff((-2, 1), (2, 1)), aff((-9, 2), (6, 1))]),
        },
        RegressionCase {
            name: "e(0, G^N(1,0)_1)",
            computed: first(ExponentExpr::zero(), &n10_1),
            expected: ExponentExpr::zero(),
        },
        RegressionCase {
            name: "e(-1, G^N(1,0)_2)",
            computed: first(ExponentExpr::constant(rat(-1, 1)), &WeightedGraph::singleton(1, 0)),
            expected: ExponentExpr::zero(),
        },
        RegressionCase {
            name: "e(2H-3/2, single q=1)",
            computed: first(aff((-3, 2), (2, 1)), &n10_1),
            expected: aff((-3, 2), (2, 1)),
        },
        RegressionCase {
            name: "e(2H-5/2, G^N(2,0)_2)",
            computed: first(aff((-5, 2), (2, 1)), &n20_2),
            expected: aff((-3, 2), (2, 1)),
        },
        RegressionCase {
            name: "e(4H-3, G^M(2,0)_2,1)",
            computed: first(aff((-3, 1), (4, 1)), &m20_3),
            expected: aff((-3, 1), (4, 1)),
        },
        RegressionCase {
            name: "e(4H-2, G^M(2,0)_2,3)",
            computed: first(aff((-2, 1), (4, 1)), &m20_23),
            expected: aff((-3, 1), (4, 1)),
        },
        RegressionCase {
            name: "e(1, single q=3)",
            computed: first(ExponentExpr::constant(rat(1, 1)), &cubic),
            expected: aff((3, 2), (-3, 1)),
        },
    ]
}
