//! Edge-vertex-weighted graphs and their structural operations.
//!
//! A weighted graph is a triplet `(V, theta, q)`: integer-labeled vertices,
//! symmetric nonnegative integer edge weights and nonnegative integer vertex
//! weights. Graphs are immutable values; every operation returns a new graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Vertex label. Labels are integers so that [`WeightedGraph::shift`] and
/// disjointness checks are well defined.
pub type Vertex = i64;

/// Unordered pair of distinct vertices, stored as `(min, max)`.
pub type VertexPair = (Vertex, Vertex);

/// Normalizes an unordered pair key.
pub fn pair(v1: Vertex, v2: Vertex) -> VertexPair {
    if v1 <= v2 {
        (v1, v2)
    } else {
        (v2, v1)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex set must be nonempty")]
    EmptyVertexSet,
    #[error("duplicate vertex {0}")]
    DuplicateVertex(Vertex),
    #[error("unknown vertex {0}")]
    UnknownVertex(Vertex),
    #[error("self loop on vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge {0:?}")]
    DuplicateEdge(VertexPair),
    #[error("operation requires a connected graph")]
    ComponentRequired,
    #[error("vertex sets are not disjoint (shared label {0})")]
    DisjointnessViolated(Vertex),
    #[error("vertex weight would become negative at {0}")]
    WeightUnderflow(Vertex),
    #[error("graph DSL parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// The paper-style triplet `G = (V, theta, q)`.
///
/// Only strictly positive edge weights are stored; a missing pair means
/// `theta = 0`. Vertex weights are stored for every vertex, including zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightedGraph {
    vertices: BTreeSet<Vertex>,
    theta: BTreeMap<VertexPair, u32>,
    q: BTreeMap<Vertex, u32>,
}

/// Per-component counts `(I, theta_bar, q_bar)` and the deficiency
/// `s = 2(theta_bar - (I - 1)) + q_bar`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ComponentStats {
    pub i: u32,
    pub theta_bar: u32,
    pub q_bar: u32,
    pub s: u32,
}

/// Which component taxonomy a classification refers to.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Taxonomy {
    /// The coarse taxonomy used with the first exponent.
    First,
    /// The restricted taxonomy used with the second exponent.
    Second,
}

/// Structural class tag of a connected component.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ClassTag {
    /// `s = 0` (a tree with all vertex weights zero).
    C0,
    /// `s = 1` (a tree carrying total vertex weight one).
    C1,
    /// `q_bar = 0` with `s >= 2`; under the second taxonomy this is the
    /// `s = 2` cycle class.
    C2Zero,
    /// Second taxonomy: `s = 2`, `q_bar = 2`, single vertex.
    C2TwoI1,
    /// Second taxonomy: `s = 2`, `q_bar = 2`, at least two vertices.
    C2TwoI2Plus,
    /// First taxonomy: `s >= 2` and `q_bar` odd.
    C2PlusOdd,
    /// First taxonomy: `s >= 2`, `q_bar` positive even, `max q <= q_bar/2`.
    C2PlusPosEvenMax0,
    /// First taxonomy: `s >= 2`, `q_bar` positive even, `max q = q_bar/2 + 1`.
    C2PlusPosEvenMax1,
    /// First taxonomy: `s >= 2`, `q_bar` positive even, `max q >= q_bar/2 + 2`.
    C2PlusPosEvenMax2,
    /// Fallback for components outside the second-taxonomy assumptions.
    General,
}

/// Classification result: the tag plus the two structural shape flags.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ComponentClass {
    pub tag: ClassTag,
    pub is_cycle: bool,
    pub is_path_weighted_ends: bool,
}

impl WeightedGraph {
    /// Builds a graph from vertex, edge and weight lists, validating all
    /// structural invariants.
    pub fn new(
        vertices: impl IntoIterator<Item = Vertex>,
        edges: impl IntoIterator<Item = (Vertex, Vertex, u32)>,
        weights: impl IntoIterator<Item = (Vertex, u32)>,
    ) -> Result<Self, GraphError> {
        let mut vs = BTreeSet::new();
        for v in vertices {
            if !vs.insert(v) {
                return Err(GraphError::DuplicateVertex(v));
            }
        }
        if vs.is_empty() {
            return Err(GraphError::EmptyVertexSet);
        }
        let mut theta = BTreeMap::new();
        let mut declared = BTreeSet::new();
        for (v1, v2, w) in edges {
            if v1 == v2 {
                return Err(GraphError::SelfLoop(v1));
            }
            for v in [v1, v2] {
                if !vs.contains(&v) {
                    return Err(GraphError::UnknownVertex(v));
                }
            }
            let key = pair(v1, v2);
            if !declared.insert(key) {
                return Err(GraphError::DuplicateEdge(key));
            }
            if w > 0 {
                theta.insert(key, w);
            }
        }
        let mut q: BTreeMap<Vertex, u32> = vs.iter().map(|&v| (v, 0)).collect();
        for (v, w) in weights {
            match q.get_mut(&v) {
                Some(slot) => *slot = w,
                None => return Err(GraphError::UnknownVertex(v)),
            }
        }
        Ok(Self {
            vertices: vs,
            theta,
            q,
        })
    }

    /// One vertex `label` with weight `q` and no edges.
    pub fn singleton(label: Vertex, q: u32) -> Self {
        Self::new([label], [], [(label, q)]).expect("singleton is always valid")
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.vertices.iter().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        self.vertices.contains(&v)
    }

    pub fn min_vertex(&self) -> Vertex {
        *self.vertices.iter().next().expect("nonempty")
    }

    pub fn max_vertex(&self) -> Vertex {
        *self.vertices.iter().next_back().expect("nonempty")
    }

    /// Edge weight, zero when no edge is stored.
    pub fn theta(&self, v1: Vertex, v2: Vertex) -> u32 {
        if v1 == v2 {
            return 0;
        }
        self.theta.get(&pair(v1, v2)).copied().unwrap_or(0)
    }

    /// Iterates over the strictly positive edges.
    pub fn edges(&self) -> impl Iterator<Item = (VertexPair, u32)> + '_ {
        self.theta.iter().map(|(&k, &w)| (k, w))
    }

    pub fn q(&self, v: Vertex) -> u32 {
        self.q.get(&v).copied().unwrap_or(0)
    }

    pub fn theta_bar(&self) -> u32 {
        self.theta.values().sum()
    }

    pub fn q_bar(&self) -> u32 {
        self.q.values().sum()
    }

    pub fn max_q(&self) -> u32 {
        self.q.values().copied().max().unwrap_or(0)
    }

    /// Vertices carrying strictly positive weight.
    pub fn weighted_vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.q.iter().filter(|(_, &w)| w > 0).map(|(&v, _)| v)
    }

    /// Positive-edge degree of a vertex (number of incident positive edges,
    /// not counting multiplicities).
    fn degree(&self, v: Vertex) -> usize {
        self.theta.keys().filter(|&&(a, b)| a == v || b == v).count()
    }

    fn neighbors(&self, v: Vertex) -> Vec<Vertex> {
        self.theta
            .keys()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Restriction of the graph to a vertex subset.
    pub fn restrict(&self, subset: &BTreeSet<Vertex>) -> Result<Self, GraphError> {
        for &v in subset {
            if !self.vertices.contains(&v) {
                return Err(GraphError::UnknownVertex(v));
            }
        }
        if subset.is_empty() {
            return Err(GraphError::EmptyVertexSet);
        }
        Ok(Self {
            vertices: subset.clone(),
            theta: self
                .theta
                .iter()
                .filter(|((a, b), _)| subset.contains(a) && subset.contains(b))
                .map(|(&k, &w)| (k, w))
                .collect(),
            q: self
                .q
                .iter()
                .filter(|(v, _)| subset.contains(v))
                .map(|(&v, &w)| (v, w))
                .collect(),
        })
    }

    /// Connected components induced by positive-theta edges, ordered by their
    /// minimal vertex label. Their vertex sets partition `V`.
    pub fn components(&self) -> Vec<WeightedGraph> {
        let mut seen: BTreeSet<Vertex> = BTreeSet::new();
        let mut out = Vec::new();
        for &start in &self.vertices {
            if seen.contains(&start) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                if !comp.insert(v) {
                    continue;
                }
                for w in self.neighbors(v) {
                    if !comp.contains(&w) {
                        stack.push(w);
                    }
                }
            }
            seen.extend(comp.iter().copied());
            out.push(self.restrict(&comp).expect("component subset is valid"));
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// `(I, theta_bar, q_bar, s)` of a connected graph.
    pub fn stats(&self) -> Result<ComponentStats, GraphError> {
        if !self.is_connected() {
            return Err(GraphError::ComponentRequired);
        }
        let i = self.vertex_count() as u32;
        let theta_bar = self.theta_bar();
        let q_bar = self.q_bar();
        // Connectivity forces theta_bar >= I - 1, so s is nonnegative.
        let s = 2 * (theta_bar - (i - 1)) + q_bar;
        Ok(ComponentStats {
            i,
            theta_bar,
            q_bar,
            s,
        })
    }

    /// Relabels every vertex `v` as `v + k`, preserving weights.
    pub fn shift(&self, k: i64) -> WeightedGraph {
        WeightedGraph {
            vertices: self.vertices.iter().map(|&v| v + k).collect(),
            theta: self
                .theta
                .iter()
                .map(|(&(a, b), &w)| ((a + k, b + k), w))
                .collect(),
            q: self.q.iter().map(|(&v, &w)| (v + k, w)).collect(),
        }
    }

    /// The action `<sigma>`: decreases vertex weights by `|sigma|`,
    /// leaving edges untouched. `sigma` values must be nonpositive.
    pub fn vertex_contract(&self, sigma: &BTreeMap<Vertex, i64>) -> Result<Self, GraphError> {
        let mut q = self.q.clone();
        for (&v, &s) in sigma {
            let slot = q.get_mut(&v).ok_or(GraphError::UnknownVertex(v))?;
            let new = *slot as i64 + s;
            if s > 0 || new < 0 {
                return Err(GraphError::WeightUnderflow(v));
            }
            *slot = new as u32;
        }
        Ok(Self {
            vertices: self.vertices.clone(),
            theta: self.theta.clone(),
            q,
        })
    }

    /// The action `[[tau]]`: adds `tau` to the edge weights and subtracts the
    /// incident totals `tau_v` from the vertex weights.
    pub fn edge_augment(&self, tau: &BTreeMap<VertexPair, u32>) -> Result<Self, GraphError> {
        let mut theta = self.theta.clone();
        let mut q = self.q.clone();
        for (&(v1, v2), &w) in tau {
            if v1 == v2 {
                return Err(GraphError::SelfLoop(v1));
            }
            for v in [v1, v2] {
                if !self.vertices.contains(&v) {
                    return Err(GraphError::UnknownVertex(v));
                }
            }
            if w == 0 {
                continue;
            }
            *theta.entry(pair(v1, v2)).or_insert(0) += w;
            for v in [v1, v2] {
                let slot = q.get_mut(&v).expect("validated above");
                if *slot < w {
                    return Err(GraphError::WeightUnderflow(v));
                }
                *slot -= w;
            }
        }
        Ok(Self {
            vertices: self.vertices.clone(),
            theta,
            q,
        })
    }

    /// True when the graph is a cycle graph: all vertex weights zero and the
    /// positive edges form a single cycle (`theta = 2` on one edge for two
    /// vertices, a simple cycle of unit weights otherwise).
    pub fn is_cycle_graph(&self) -> bool {
        if self.q.values().any(|&w| w > 0) {
            return false;
        }
        let i = self.vertex_count();
        if i < 2 || !self.is_connected() {
            return false;
        }
        if i == 2 {
            return self.theta.len() == 1 && self.theta.values().all(|&w| w == 2);
        }
        self.theta.len() == i
            && self.theta.values().all(|&w| w == 1)
            && self.vertices().all(|v| self.degree(v) == 2)
    }

    /// True when the graph is a path graph with weighted ends: unit edge
    /// weights along a simple path, weight one on the two end vertices and
    /// zero elsewhere.
    pub fn is_path_weighted_ends(&self) -> bool {
        let i = self.vertex_count();
        if i < 2 || !self.is_connected() {
            return false;
        }
        if self.theta.len() != i - 1 || self.theta.values().any(|&w| w != 1) {
            return false;
        }
        let mut end_count = 0;
        for v in self.vertices() {
            match self.degree(v) {
                1 => {
                    if self.q(v) != 1 {
                        return false;
                    }
                    end_count += 1;
                }
                2 => {
                    if self.q(v) != 0 {
                        return false;
                    }
                }
                _ => return false,
            }
        }
        end_count == 2
    }

    /// End vertices of a path graph with weighted ends (the two `q = 1`
    /// vertices), or of a single-vertex `q = 2` component (the vertex twice).
    pub fn weighted_ends(&self) -> Vec<Vertex> {
        if self.vertex_count() == 1 {
            let v = self.min_vertex();
            return vec![v, v];
        }
        self.weighted_vertices().collect()
    }

    /// Classifies a connected graph under the requested taxonomy.
    pub fn classify(&self, taxonomy: Taxonomy) -> Result<ComponentClass, GraphError> {
        let stats = self.stats()?;
        let is_cycle = self.is_cycle_graph();
        let is_path = self.is_path_weighted_ends();
        let tag = match taxonomy {
            Taxonomy::First => match stats.s {
                0 => ClassTag::C0,
                1 => ClassTag::C1,
                _ => {
                    if stats.q_bar == 0 {
                        ClassTag::C2Zero
                    } else if stats.q_bar % 2 == 1 {
                        ClassTag::C2PlusOdd
                    } else {
                        let half = stats.q_bar / 2;
                        let max_q = self.max_q();
                        if max_q <= half {
                            ClassTag::C2PlusPosEvenMax0
                        } else if max_q == half + 1 {
                            ClassTag::C2PlusPosEvenMax1
                        } else {
                            ClassTag::C2PlusPosEvenMax2
                        }
                    }
                }
            },
            Taxonomy::Second => match stats.s {
                0 => ClassTag::C0,
                1 => ClassTag::C1,
                2 => {
                    if stats.i == 1 {
                        ClassTag::C2TwoI1
                    } else if stats.q_bar == 0 && is_cycle {
                        ClassTag::C2Zero
                    } else if stats.q_bar == 2 && is_path {
                        ClassTag::C2TwoI2Plus
                    } else {
                        ClassTag::General
                    }
                }
                _ => ClassTag::General,
            },
        };
        Ok(ComponentClass {
            tag,
            is_cycle,
            is_path_weighted_ends: is_path,
        })
    }

    /// The per-component structural assumption behind the second exponent:
    /// `s <= 2`, and the `s = 2` multi-vertex shapes are exactly cycles
    /// (`q_bar = 0`) and paths with weighted ends (`q_bar = 2`).
    pub fn satisfies_assumption_connected(&self) -> Result<bool, GraphError> {
        let stats = self.stats()?;
        Ok(match stats.s {
            0 | 1 => true,
            2 => {
                if stats.i == 1 {
                    true
                } else if stats.q_bar == 0 {
                    self.is_cycle_graph()
                } else {
                    self.is_path_weighted_ends()
                }
            }
            _ => false,
        })
    }

    /// True when every component satisfies the connected-graph assumption.
    pub fn satisfies_assumption_graph(&self) -> bool {
        self.components()
            .iter()
            .all(|c| c.satisfies_assumption_connected().unwrap_or(false))
    }

    /// Renders the graph in the text DSL (one declaration per line).
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for &v in &self.vertices {
            out.push_str(&format!("v {} {}\n", v, self.q(v)));
        }
        for (&(a, b), &w) in &self.theta {
            out.push_str(&format!("e {} {} {}\n", a, b, w));
        }
        out
    }
}

/// Disjoint union of weighted graphs; cross-family edge weights are zero.
pub fn vee<'a>(graphs: impl IntoIterator<Item = &'a WeightedGraph>) -> Result<WeightedGraph, GraphError> {
    let mut vertices = BTreeSet::new();
    let mut theta = BTreeMap::new();
    let mut q = BTreeMap::new();
    let mut any = false;
    for g in graphs {
        any = true;
        for v in g.vertices() {
            if !vertices.insert(v) {
                return Err(GraphError::DisjointnessViolated(v));
            }
        }
        theta.extend(g.theta.iter().map(|(&k, &w)| (k, w)));
        q.extend(g.q.iter().map(|(&v, &w)| (v, w)));
    }
    if !any {
        return Err(GraphError::EmptyVertexSet);
    }
    Ok(WeightedGraph { vertices, theta, q })
}

/// Parses the graph DSL: `v <label> <q>`, `e <v1> <v2> <theta>`, `#` comments.
pub fn parse_dsl(text: &str) -> Result<WeightedGraph, GraphError> {
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut edges: Vec<(Vertex, Vertex, u32)> = Vec::new();
    let mut weights: Vec<(Vertex, u32)> = Vec::new();
    let mut seen_v = BTreeSet::new();
    let mut seen_e = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let parse_int = |s: &str| -> Result<i64, GraphError> {
            s.parse().map_err(|_| GraphError::Parse {
                line,
                msg: format!("invalid integer `{s}`"),
            })
        };
        let parse_weight = |s: &str| -> Result<u32, GraphError> {
            s.parse().map_err(|_| GraphError::Parse {
                line,
                msg: format!("invalid nonnegative weight `{s}`"),
            })
        };
        match fields.as_slice() {
            ["v", label, qw] => {
                let v = parse_int(label)?;
                if !seen_v.insert(v) {
                    return Err(GraphError::Parse {
                        line,
                        msg: format!("duplicate vertex {v}"),
                    });
                }
                vertices.push(v);
                weights.push((v, parse_weight(qw)?));
            }
            ["e", l1, l2, tw] => {
                let v1 = parse_int(l1)?;
                let v2 = parse_int(l2)?;
                if v1 == v2 {
                    return Err(GraphError::Parse {
                        line,
                        msg: format!("self loop on vertex {v1}"),
                    });
                }
                if !seen_e.insert(pair(v1, v2)) {
                    return Err(GraphError::Parse {
                        line,
                        msg: format!("duplicate edge {v1} {v2}"),
                    });
                }
                edges.push((v1, v2, parse_weight(tw)?));
            }
            _ => {
                return Err(GraphError::Parse {
                    line,
                    msg: format!("expected `v <label> <q>` or `e <v1> <v2> <theta>`, got `{content}`"),
                })
            }
        }
    }
    WeightedGraph::new(vertices, edges, weights)
}

impl fmt::Display for WeightedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.vertices().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}({})", v, self.q(v))?;
        }
        write!(f, "; ")?;
        for (i, ((a, b), w)) in self.edges().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}-{b}:{w}")?;
        }
        write!(f, "}}")
    }
}
