//! Constructive graph rewrites: the action of directional derivatives on
//! graph-sum functionals, the squared-derivative-norm doubling, the Wiener
//! chaos product expansion and the duality (integration-by-parts) reduction.
//!
//! A rewrite consumes a [`GraphSumSpec`] and produces the family of specs the
//! functional decomposes into, together with the exact law satisfied by the
//! maximal exponent of the family.

use crate::exponent::{
    delta_h, first_exponent, second_exponent, t_set_candidates, ExponentExpr, ExponentError,
};
use crate::graph::{
    pair, vee, ClassTag, GraphError, Taxonomy, Vertex, VertexPair, WeightedGraph,
};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RewriteError {
    #[error("operation expects the {0:?} taxonomy")]
    TaxonomyMismatch(Taxonomy),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error("lambda exceeds the vertex weight at {0}")]
    WeightUnderflow(Vertex),
    #[error("target component {0} carries no vertex weight")]
    ComponentHasNoWeight(Vertex),
    #[error("no component with id {0}")]
    UnknownComponent(Vertex),
}

/// A graph-sum functional family, identified up to kernel and weight
/// families: a scaling exponent `alpha`, a weighted graph, the t-set of
/// tensor-contracted components (second taxonomy only) and the taxonomy.
///
/// The random weight family is carried as an opaque provenance string for
/// audit output; the exponent calculus does not depend on it.
#[derive(Clone, Debug)]
pub struct GraphSumSpec {
    pub alpha: ExponentExpr,
    pub graph: WeightedGraph,
    pub t_set: BTreeSet<Vertex>,
    pub taxonomy: Taxonomy,
    pub provenance: String,
}

impl GraphSumSpec {
    /// First-taxonomy spec; the t-set is empty by construction.
    pub fn first(alpha: ExponentExpr, graph: WeightedGraph, provenance: impl Into<String>) -> Self {
        Self {
            alpha,
            graph,
            t_set: BTreeSet::new(),
            taxonomy: Taxonomy::First,
            provenance: provenance.into(),
        }
    }

    /// Second-taxonomy spec; validates the structural assumption and the
    /// t-set (component ids are minimal vertex labels).
    pub fn second(
        alpha: ExponentExpr,
        graph: WeightedGraph,
        t_set: BTreeSet<Vertex>,
        provenance: impl Into<String>,
    ) -> Result<Self, RewriteError> {
        if !graph.satisfies_assumption_graph() {
            return Err(ExponentError::AssumptionViolated.into());
        }
        let candidates = t_set_candidates(&graph)?;
        for &id in &t_set {
            if !candidates.contains(&id) {
                return Err(ExponentError::TSetInvalid(id).into());
            }
        }
        Ok(Self {
            alpha,
            graph,
            t_set,
            taxonomy: Taxonomy::Second,
            provenance: provenance.into(),
        })
    }

    /// The exponent of this spec under its taxonomy.
    pub fn exponent(&self) -> Result<ExponentExpr, ExponentError> {
        match self.taxonomy {
            Taxonomy::First => first_exponent(&self.alpha, &self.graph),
            Taxonomy::Second => second_exponent(&self.alpha, &self.graph, &self.t_set),
        }
    }
}

/// Which branch of the max-exponent law applies.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CaseTag {
    /// The family max sits `2H - 3/2` below-or-at the input exponent shift.
    A,
    /// The obstructing component classes are present.
    B,
}

/// The family produced by a directional-derivative rewrite, with the exact
/// value of `max_lambda e(alpha^lambda, G^lambda)` and the case tag.
#[derive(Clone, Debug)]
pub struct RewriteFamily {
    pub items: Vec<GraphSumSpec>,
    pub max_exponent: ExponentExpr,
    pub case_tag: CaseTag,
}

impl RewriteFamily {
    /// Recomputes the max exponent from the items (used to verify the law).
    pub fn items_max_exponent(&self) -> Result<ExponentExpr, ExponentError> {
        let exps: Result<Vec<_>, _> = self.items.iter().map(|s| s.exponent()).collect();
        Ok(ExponentExpr::max(exps?))
    }
}

fn shift_2h_3_2() -> ExponentExpr {
    ExponentExpr::affine(crate::exponent::rat(-3, 2), crate::exponent::rat(2, 1))
}

fn shift_2h_1_2() -> ExponentExpr {
    ExponentExpr::affine(crate::exponent::rat(-1, 2), crate::exponent::rat(2, 1))
}

/// Directional-derivative rewrite in the first-exponent regime.
///
/// Produces one item for the derivative hitting the weight family (a fresh
/// `q = 1` singleton joins the graph at exponent shift `2H - 3/2`) and one
/// item per weighted vertex `v` (a fresh `q = 2` singleton pairs with `v` at
/// shift `2H - 1/2`). The family max is `e + 2H - 3/2` unless some component
/// has positive even `q_bar` with `max q = q_bar/2 + 1`, in which case it
/// is `e` itself.
pub fn du_rewrite_first(spec: &GraphSumSpec) -> Result<RewriteFamily, RewriteError> {
    if spec.taxonomy != Taxonomy::First {
        return Err(RewriteError::TaxonomyMismatch(Taxonomy::First));
    }
    let g = &spec.graph;
    let fresh = g.max_vertex() + 1;
    let mut items = Vec::new();

    items.push(GraphSumSpec::first(
        spec.alpha.clone().add(shift_2h_3_2()),
        vee([g, &WeightedGraph::singleton(fresh, 1)])?,
        format!("n D_(1_j{fresh}) [{}] A'", spec.provenance),
    ));

    for v in g.weighted_vertices().collect::<Vec<_>>() {
        let base = vee([g, &WeightedGraph::singleton(fresh, 2)])?;
        let joined = base.edge_augment(&BTreeMap::from([(pair(v, fresh), 1u32)]))?;
        items.push(GraphSumSpec::first(
            spec.alpha.clone().add(shift_2h_1_2()),
            joined,
            format!("q({v}) [{}] A'", spec.provenance),
        ));
    }

    let has_pe1 = g
        .components()
        .iter()
        .map(|c| c.classify(Taxonomy::First))
        .collect::<Result<Vec<_>, _>>()?
        .iter()
        .any(|cls| cls.tag == ClassTag::C2PlusPosEvenMax1);
    let e = first_exponent(&spec.alpha, g)?;
    let (case_tag, max_exponent) = if has_pe1 {
        (CaseTag::B, e)
    } else {
        (CaseTag::A, e.add(shift_2h_3_2()))
    };
    Ok(RewriteFamily {
        items,
        max_exponent,
        case_tag,
    })
}

/// Directional-derivative rewrite in the second-exponent regime.
///
/// Besides the weight-derivative item, every `s = 1` component and every
/// `C^2_2` component end contributes an item; a t-set member hit by the
/// derivative leaves the t-set. With `C_II = C^2_{2,1} + C_T`, the family
/// max is `e2 + 2H - 3/2` when `C_II` is empty and `e2 + delta_H(I_min)`
/// otherwise, where `I_min` is the smallest vertex count in `C_II`.
pub fn du_rewrite_second(spec: &GraphSumSpec) -> Result<RewriteFamily, RewriteError> {
    if spec.taxonomy != Taxonomy::Second {
        return Err(RewriteError::TaxonomyMismatch(Taxonomy::Second));
    }
    let g = &spec.graph;
    let fresh = g.max_vertex() + 1;
    let mut items = Vec::new();

    items.push(GraphSumSpec::second(
        spec.alpha.clone().add(shift_2h_3_2()),
        vee([g, &WeightedGraph::singleton(fresh, 1)])?,
        spec.t_set.clone(),
        format!("n D_(1_j{fresh}) [{}] A'", spec.provenance),
    )?);

    let mut c_ii_min_i: Option<u32> = None;
    for comp in g.components() {
        let cls = comp.classify(Taxonomy::Second)?;
        let id = comp.min_vertex();
        match cls.tag {
            ClassTag::C1 => {
                let v = comp
                    .weighted_vertices()
                    .next()
                    .expect("C1 has a weighted vertex");
                let base = vee([g, &WeightedGraph::singleton(fresh, 2)])?;
                let joined = base.edge_augment(&BTreeMap::from([(pair(v, fresh), 1u32)]))?;
                items.push(GraphSumSpec::second(
                    spec.alpha.clone().add(shift_2h_1_2()),
                    joined,
                    spec.t_set.clone(),
                    format!("[{}] A' (C1 at {id})", spec.provenance),
                )?);
            }
            ClassTag::C2TwoI1 | ClassTag::C2TwoI2Plus => {
                let in_t = spec.t_set.contains(&id);
                if cls.tag == ClassTag::C2TwoI1 || in_t {
                    let st = comp.stats()?;
                    c_ii_min_i = Some(c_ii_min_i.map_or(st.i, |m| m.min(st.i)));
                }
                for end in comp.weighted_ends() {
                    let base = vee([g, &WeightedGraph::singleton(fresh, 2)])?;
                    let joined = base.edge_augment(&BTreeMap::from([(pair(end, fresh), 1u32)]))?;
                    let mut t_new = spec.t_set.clone();
                    if in_t {
                        t_new.remove(&id);
                    }
                    items.push(GraphSumSpec::second(
                        spec.alpha.clone().add(shift_2h_1_2()),
                        joined,
                        t_new,
                        format!("[{}] A' (C2_2 at {id}, end {end})", spec.provenance),
                    )?);
                }
            }
            _ => {}
        }
    }

    let e2 = second_exponent(&spec.alpha, g, &spec.t_set)?;
    let (case_tag, max_exponent) = match c_ii_min_i {
        None => (CaseTag::A, e2.add(shift_2h_3_2())),
        Some(i_min) => (CaseTag::B, e2.add(delta_h(i_min)?)),
    };
    Ok(RewriteFamily {
        items,
        max_exponent,
        case_tag,
    })
}

/// Doubling construction for the squared norm of the `i`-th Malliavin
/// derivative: the graph is joined with a shifted copy of itself and each
/// vertex `v` with `lambda_v > 0` is paired with its copy by `lambda_v`
/// new edges. The resulting exponent is at most twice the input exponent.
pub fn derivative_norm_graph(
    spec: &GraphSumSpec,
    lambda: &BTreeMap<Vertex, u32>,
) -> Result<GraphSumSpec, RewriteError> {
    let g = &spec.graph;
    for (&v, &l) in lambda {
        if !g.contains_vertex(v) {
            return Err(GraphError::UnknownVertex(v).into());
        }
        if l > g.q(v) {
            return Err(RewriteError::WeightUnderflow(v));
        }
    }
    let m = g.max_vertex() - g.min_vertex() + 1;
    let doubled = vee([g, &g.shift(m)])?;
    let tau: BTreeMap<VertexPair, u32> = lambda
        .iter()
        .filter(|(_, &l)| l > 0)
        .map(|(&v, &l)| (pair(v, v + m), l))
        .collect();
    let joined = doubled.edge_augment(&tau)?;
    let alpha2 = spec.alpha.clone().scale(crate::exponent::rat(2, 1));
    let provenance = format!("c_lambda^2 <D^l [{0}], D^l [{0}]>", spec.provenance);
    match spec.taxonomy {
        Taxonomy::First => Ok(GraphSumSpec::first(alpha2, joined, provenance)),
        Taxonomy::Second => {
            // components fully untouched by lambda keep their t-membership,
            // in both the original and the shifted copy
            let mut t_new = BTreeSet::new();
            for comp in g.components() {
                let id = comp.min_vertex();
                if !spec.t_set.contains(&id) {
                    continue;
                }
                let touched = comp.vertices().any(|v| lambda.get(&v).copied().unwrap_or(0) > 0);
                if !touched {
                    t_new.insert(id);
                    t_new.insert(id + m);
                }
            }
            Ok(GraphSumSpec::second(alpha2, joined, t_new, provenance)?)
        }
    }
}

/// One contraction pattern in the product formula for multiple Wiener
/// integrals: pairing multiplicities on vertex pairs, the integer constant,
/// and the residual integral orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionTerm {
    pub pi: BTreeMap<VertexPair, u32>,
    pub constant: u64,
    pub residual_orders: BTreeMap<Vertex, u32>,
}

impl ContractionTerm {
    pub fn pi_bar(&self) -> u32 {
        self.pi.values().sum()
    }

    pub fn residual_total(&self) -> u32 {
        self.residual_orders.values().sum()
    }

    /// True when the pattern contracts every kernel slot (`q_bar = 2 pi_bar`).
    pub fn is_complete(&self) -> bool {
        self.residual_total() == 0
    }
}

fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

/// Expands a product of multiple Wiener integrals `prod_v I_{q_v}(f_v^{x q_v})`
/// into contraction terms over all admissible pairing patterns.
///
/// The combinatorial constant counts slot assignments:
/// `c(pi) = prod_v q_v!/(q_v - pi_v)! / prod_e pi_e!`.
pub fn chaos_product_expand(q_weights: &BTreeMap<Vertex, u32>) -> Vec<ContractionTerm> {
    assert!(!q_weights.is_empty(), "at least one vertex required");
    let vertices: Vec<Vertex> = q_weights.keys().copied().collect();
    let mut edges: Vec<VertexPair> = Vec::new();
    for (i, &v1) in vertices.iter().enumerate() {
        for &v2 in &vertices[i + 1..] {
            edges.push(pair(v1, v2));
        }
    }
    let mut out = Vec::new();
    let mut pi: Vec<u32> = vec![0; edges.len()];
    let mut capacity: BTreeMap<Vertex, u32> = q_weights.clone();
    enumerate_patterns(q_weights, &edges, 0, &mut pi, &mut capacity, &mut out);
    out
}

fn enumerate_patterns(
    q: &BTreeMap<Vertex, u32>,
    edges: &[VertexPair],
    idx: usize,
    pi: &mut Vec<u32>,
    capacity: &mut BTreeMap<Vertex, u32>,
    out: &mut Vec<ContractionTerm>,
) {
    if idx == edges.len() {
        let pi_map: BTreeMap<VertexPair, u32> = edges
            .iter()
            .zip(pi.iter())
            .filter(|(_, &w)| w > 0)
            .map(|(&e, &w)| (e, w))
            .collect();
        let mut constant = 1u64;
        for (&v, &qv) in q {
            let pv = qv - capacity[&v];
            constant *= factorial(qv) / factorial(qv - pv);
        }
        for &w in pi_map.values() {
            constant /= factorial(w);
        }
        let residual: BTreeMap<Vertex, u32> = capacity.clone();
        out.push(ContractionTerm {
            pi: pi_map,
            constant,
            residual_orders: residual,
        });
        return;
    }
    let (v1, v2) = edges[idx];
    let cap = capacity[&v1].min(capacity[&v2]);
    for w in 0..=cap {
        pi[idx] = w;
        *capacity.get_mut(&v1).unwrap() -= w;
        *capacity.get_mut(&v2).unwrap() -= w;
        enumerate_patterns(q, edges, idx + 1, pi, capacity, out);
        *capacity.get_mut(&v1).unwrap() += w;
        *capacity.get_mut(&v2).unwrap() += w;
        pi[idx] = 0;
    }
}

/// Duality (integration-by-parts) reduction of the target component.
///
/// Every kernel slot of the target is either contracted inside the target
/// (`pi`), absorbed by the weight family (`i(v, 0)`, shifting `alpha` down),
/// or paired with a slot of another weighted component (`tau`). The target's
/// vertex weights all drop to zero in each output, so repeated application
/// strictly decreases the total vertex weight.
pub fn ibp_reduce(
    spec: &GraphSumSpec,
    target: Vertex,
) -> Result<Vec<GraphSumSpec>, RewriteError> {
    if spec.taxonomy != Taxonomy::First {
        return Err(RewriteError::TaxonomyMismatch(Taxonomy::First));
    }
    let comps = spec.graph.components();
    let target_comp = comps
        .iter()
        .find(|c| c.min_vertex() == target)
        .ok_or(RewriteError::UnknownComponent(target))?;
    if target_comp.q_bar() == 0 {
        return Err(RewriteError::ComponentHasNoWeight(target));
    }
    let target_vertices: Vec<Vertex> = target_comp.vertices().collect();
    let other_weighted: Vec<Vertex> = comps
        .iter()
        .filter(|c| c.min_vertex() != target && c.q_bar() > 0)
        .flat_map(|c| c.vertices().collect::<Vec<_>>())
        .filter(|&v| spec.graph.q(v) > 0)
        .collect();

    let q_target: BTreeMap<Vertex, u32> = target_vertices
        .iter()
        .map(|&v| (v, spec.graph.q(v)))
        .collect();

    let mut out = Vec::new();
    for term in chaos_product_expand(&q_target) {
        // after contracting pi inside the target, distribute the residual
        // slots of each target vertex between the weight family (column 0)
        // and the other weighted components' vertices
        let residual: Vec<(Vertex, u32)> = target_vertices
            .iter()
            .map(|&v| (v, term.residual_orders[&v]))
            .collect();
        let mut assignment: BTreeMap<(Vertex, Vertex), u32> = BTreeMap::new();
        let mut capacity: BTreeMap<Vertex, u32> =
            other_weighted.iter().map(|&v| (v, spec.graph.q(v))).collect();
        distribute_slots(
            spec,
            &term,
            &residual,
            0,
            &other_weighted,
            &mut assignment,
            &mut capacity,
            0,
            &mut out,
        )?;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn distribute_slots(
    spec: &GraphSumSpec,
    term: &ContractionTerm,
    residual: &[(Vertex, u32)],
    vi: usize,
    other_weighted: &[Vertex],
    assignment: &mut BTreeMap<(Vertex, Vertex), u32>,
    capacity: &mut BTreeMap<Vertex, u32>,
    i0: u32,
    out: &mut Vec<GraphSumSpec>,
) -> Result<(), RewriteError> {
    if vi == residual.len() {
        // realize this (pi, i): contract pi inside the target, drop i0 slots
        // into the weight family, pair the rest across components
        let mut g = spec.graph.edge_augment(&term.pi)?;
        let sigma: BTreeMap<Vertex, i64> = assignment
            .iter()
            .filter(|(&(_, v2), &w)| v2 == i64::MIN && w > 0)
            .map(|(&(v1, _), &w)| (v1, -(w as i64)))
            .collect();
        g = g.vertex_contract(&sigma)?;
        let tau: BTreeMap<VertexPair, u32> = assignment
            .iter()
            .filter(|(&(_, v2), &w)| v2 != i64::MIN && w > 0)
            .map(|(&(v1, v2), &w)| (pair(v1, v2), w))
            .collect();
        g = g.edge_augment(&tau)?;
        let alpha = spec
            .alpha
            .clone()
            .add(ExponentExpr::constant(crate::exponent::Rat::from(-(i0 as i64))));
        out.push(GraphSumSpec::first(
            alpha,
            g,
            format!(
                "C(i) C(q,i) c(pi)={} n^{} D^{} [{}]",
                term.constant, i0, i0, spec.provenance
            ),
        ));
        return Ok(());
    }
    let (v, r) = residual[vi];
    // choose how many of v's r slots go to the weight family (i(v,0) = k)
    // and how to spread the remainder over the other weighted vertices
    fn spread(
        spec: &GraphSumSpec,
        term: &ContractionTerm,
        residual: &[(Vertex, u32)],
        vi: usize,
        v: Vertex,
        remaining: u32,
        wi: usize,
        other_weighted: &[Vertex],
        assignment: &mut BTreeMap<(Vertex, Vertex), u32>,
        capacity: &mut BTreeMap<Vertex, u32>,
        i0: u32,
        out: &mut Vec<GraphSumSpec>,
    ) -> Result<(), RewriteError> {
        if wi == other_weighted.len() {
            if remaining == 0 {
                return distribute_slots(
                    spec,
                    term,
                    residual,
                    vi + 1,
                    other_weighted,
                    assignment,
                    capacity,
                    i0,
                    out,
                );
            }
            return Ok(());
        }
        let w_vertex = other_weighted[wi];
        let cap = capacity[&w_vertex].min(remaining);
        for k in 0..=cap {
            if k > 0 {
                assignment.insert((v, w_vertex), k);
                *capacity.get_mut(&w_vertex).unwrap() -= k;
            }
            spread(
                spec,
                term,
                residual,
                vi,
                v,
                remaining - k,
                wi + 1,
                other_weighted,
                assignment,
                capacity,
                i0,
                out,
            )?;
            if k > 0 {
                assignment.remove(&(v, w_vertex));
                *capacity.get_mut(&w_vertex).unwrap() += k;
            }
        }
        Ok(())
    }
    for k in 0..=r {
        if k > 0 {
            assignment.insert((v, i64::MIN), k);
        }
        spread(
            spec,
            term,
            residual,
            vi,
            v,
            r - k,
            0,
            other_weighted,
            assignment,
            capacity,
            i0 + k,
            out,
        )?;
        if k > 0 {
            assignment.remove(&(v, i64::MIN));
        }
    }
    Ok(())
}
