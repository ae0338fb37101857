//! Symbolic exponents: piecewise-affine functions of the Hurst parameter.
//!
//! Exponents are expression trees over affine leaves `a + b*H` with rational
//! coefficients, combined by sum, max and min. Canonicalization flattens a
//! tree into an exact piecewise-affine function on the open interval
//! `(1/2, 3/4)`, which makes symbolic equality decidable.

use crate::graph::{GraphError, Taxonomy, Vertex, WeightedGraph};
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

pub type Rat = Rational64;

/// Shorthand rational constructor.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num, den)
}

fn h_lo() -> Rat {
    rat(1, 2)
}

fn h_hi() -> Rat {
    rat(3, 4)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExponentError {
    #[error("argument out of domain: {0}")]
    DomainError(String),
    #[error("Hurst parameter must lie in (1/2, 3/4), got {0}")]
    HurstOutOfRange(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("t-set entry {0} is not a C^2_{{2,2+}} component id")]
    TSetInvalid(Vertex),
    #[error("graph violates the second-exponent structural assumption")]
    AssumptionViolated,
    #[error("cannot parse exponent expression `{0}`")]
    ParseError(String),
}

/// Hurst parameter restricted to the open interval `(1/2, 3/4)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HurstParam {
    h: f64,
}

impl HurstParam {
    pub fn new(h: f64) -> Result<Self, ExponentError> {
        if h > 0.5 && h < 0.75 {
            Ok(Self { h })
        } else {
            Err(ExponentError::HurstOutOfRange(format!("{h}")))
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `alpha_H = H(2H - 1)`.
    pub fn alpha(&self) -> f64 {
        self.h * (2.0 * self.h - 1.0)
    }
}

/// An affine function `a + b*H` of the Hurst parameter.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Affine {
    pub a: Rat,
    pub b: Rat,
}

impl Affine {
    pub fn new(a: Rat, b: Rat) -> Self {
        Self { a, b }
    }

    pub fn constant(a: Rat) -> Self {
        Self { a, b: Rat::zero() }
    }

    pub fn eval(&self, h: f64) -> f64 {
        to_f64(self.a) + to_f64(self.b) * h
    }

    pub fn eval_rat(&self, h: Rat) -> Rat {
        self.a + self.b * h
    }

    fn add(&self, other: &Affine) -> Affine {
        Affine::new(self.a + other.a, self.b + other.b)
    }

    fn neg(&self) -> Affine {
        Affine::new(-self.a, -self.b)
    }

    fn scale(&self, c: Rat) -> Affine {
        Affine::new(self.a * c, self.b * c)
    }
}

fn to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn fmt_rat(r: Rat) -> String {
    if r.denom() == &1 {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", fmt_rat(self.a));
        }
        let h_term = if self.b == Rat::from(1) {
            "H".to_string()
        } else if self.b == Rat::from(-1) {
            "-H".to_string()
        } else {
            format!("{}H", fmt_rat(self.b))
        };
        if self.a.is_zero() {
            write!(f, "{h_term}")
        } else if self.b.is_positive() {
            // e.g. 4H-3, 2H-3/2
            if self.a.is_negative() {
                write!(f, "{}-{}", h_term, fmt_rat(-self.a))
            } else {
                write!(f, "{}+{}", h_term, fmt_rat(self.a))
            }
        } else {
            // e.g. 1-4H, -1/2-2H
            write!(f, "{}{}", fmt_rat(self.a), {
                let mag = -self.b;
                if mag == Rat::from(1) {
                    "-H".to_string()
                } else {
                    format!("-{}H", fmt_rat(mag))
                }
            })
        }
    }
}

/// Symbolic exponent expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum ExponentExpr {
    Affine(Affine),
    Sum(Vec<ExponentExpr>),
    Max(Vec<ExponentExpr>),
    Min(Vec<ExponentExpr>),
}

impl From<Affine> for ExponentExpr {
    fn from(a: Affine) -> Self {
        ExponentExpr::Affine(a)
    }
}

impl ExponentExpr {
    /// The affine leaf `a + b*H`.
    pub fn affine(a: Rat, b: Rat) -> Self {
        Affine::new(a, b).into()
    }

    pub fn constant(a: Rat) -> Self {
        Affine::constant(a).into()
    }

    pub fn zero() -> Self {
        Self::constant(Rat::zero())
    }

    pub fn sum(items: impl IntoIterator<Item = ExponentExpr>) -> Self {
        ExponentExpr::Sum(items.into_iter().collect())
    }

    pub fn max(items: impl IntoIterator<Item = ExponentExpr>) -> Self {
        ExponentExpr::Max(items.into_iter().collect())
    }

    pub fn min(items: impl IntoIterator<Item = ExponentExpr>) -> Self {
        ExponentExpr::Min(items.into_iter().collect())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: ExponentExpr) -> Self {
        ExponentExpr::Sum(vec![self, other])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: ExponentExpr) -> Self {
        ExponentExpr::Sum(vec![self, other.neg()])
    }

    /// Negation, pushed through the tree (swapping max and min).
    pub fn neg(&self) -> Self {
        match self {
            ExponentExpr::Affine(a) => a.neg().into(),
            ExponentExpr::Sum(items) => ExponentExpr::Sum(items.iter().map(|e| e.neg()).collect()),
            ExponentExpr::Max(items) => ExponentExpr::Min(items.iter().map(|e| e.neg()).collect()),
            ExponentExpr::Min(items) => ExponentExpr::Max(items.iter().map(|e| e.neg()).collect()),
        }
    }

    /// Multiplication by a rational constant, pushed through the tree.
    pub fn scale(&self, c: Rat) -> Self {
        if c.is_negative() {
            return self.neg().scale(-c);
        }
        match self {
            ExponentExpr::Affine(a) => a.scale(c).into(),
            ExponentExpr::Sum(items) => {
                ExponentExpr::Sum(items.iter().map(|e| e.scale(c)).collect())
            }
            ExponentExpr::Max(items) => {
                ExponentExpr::Max(items.iter().map(|e| e.scale(c)).collect())
            }
            ExponentExpr::Min(items) => {
                ExponentExpr::Min(items.iter().map(|e| e.scale(c)).collect())
            }
        }
    }

    pub fn eval(&self, h: HurstParam) -> f64 {
        self.canonical().eval(h.h())
    }

    /// Canonical piecewise-affine form on `(1/2, 3/4)`.
    pub fn canonical(&self) -> Piecewise {
        match self {
            ExponentExpr::Affine(a) => Piecewise::from_affine(*a),
            ExponentExpr::Sum(items) => items
                .iter()
                .map(|e| e.canonical())
                .reduce(|a, b| a.add(&b))
                .unwrap_or_else(|| Piecewise::from_affine(Affine::constant(Rat::zero()))),
            ExponentExpr::Max(items) => items
                .iter()
                .map(|e| e.canonical())
                .reduce(|a, b| a.max(&b))
                .expect("max of an empty list is undefined"),
            ExponentExpr::Min(items) => items
                .iter()
                .map(|e| e.canonical())
                .reduce(|a, b| a.min(&b))
                .expect("min of an empty list is undefined"),
        }
    }

    /// Exact symbolic equality on `(1/2, 3/4)`.
    pub fn sym_eq(&self, other: &ExponentExpr) -> bool {
        self.canonical() == other.canonical()
    }

    /// Pointwise `self <= other` on the whole open interval.
    pub fn le_pointwise(&self, other: &ExponentExpr) -> bool {
        self.canonical().le(&other.canonical())
    }

    /// Parses an affine expression such as `4H-1`, `-1/2`, `6H-3/2` or `0`.
    pub fn parse_affine(text: &str) -> Result<Self, ExponentError> {
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(ExponentError::ParseError(text.to_string()));
        }
        let mut a = Rat::zero();
        let mut b = Rat::zero();
        let mut term = String::new();
        let mut terms: Vec<String> = Vec::new();
        for (i, c) in cleaned.chars().enumerate() {
            if (c == '+' || c == '-') && i > 0 {
                terms.push(term.clone());
                term.clear();
            }
            term.push(c);
        }
        terms.push(term);
        for t in terms {
            let (sign, body) = match t.strip_prefix('-') {
                Some(rest) => (-Rat::from(1), rest),
                None => (Rat::from(1), t.strip_prefix('+').unwrap_or(&t)),
            };
            if body.is_empty() {
                return Err(ExponentError::ParseError(text.to_string()));
            }
            let (coef_str, is_h) = match body.strip_suffix('H').or_else(|| body.strip_suffix('h')) {
                Some(rest) => (rest.trim_end_matches('*'), true),
                None => (body, false),
            };
            let coef = if coef_str.is_empty() {
                Rat::from(1)
            } else if let Some((n, d)) = coef_str.split_once('/') {
                let n: i64 = n.parse().map_err(|_| ExponentError::ParseError(text.into()))?;
                let d: i64 = d.parse().map_err(|_| ExponentError::ParseError(text.into()))?;
                if d == 0 {
                    return Err(ExponentError::ParseError(text.to_string()));
                }
                Rat::new(n, d)
            } else {
                let n: i64 = coef_str
                    .parse()
                    .map_err(|_| ExponentError::ParseError(text.into()))?;
                Rat::from(n)
            };
            if is_h {
                b += sign * coef;
            } else {
                a += sign * coef;
            }
        }
        Ok(ExponentExpr::affine(a, b))
    }
}

impl fmt::Display for ExponentExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical())
    }
}

/// A continuous piecewise-affine function on the open interval `(1/2, 3/4)`.
///
/// `cuts` are the strictly increasing interior breakpoints; `pieces` has one
/// more entry than `cuts` and adjacent pieces always differ, so the
/// representation is canonical and `==` decides symbolic equality.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Piecewise {
    cuts: Vec<Rat>,
    pieces: Vec<Affine>,
}

impl Piecewise {
    pub fn from_affine(a: Affine) -> Self {
        Self {
            cuts: Vec::new(),
            pieces: vec![a],
        }
    }

    pub fn pieces(&self) -> &[Affine] {
        &self.pieces
    }

    pub fn cuts(&self) -> &[Rat] {
        &self.cuts
    }

    pub fn is_affine(&self) -> bool {
        self.pieces.len() == 1
    }

    fn normalize(mut self) -> Self {
        let mut cuts = Vec::new();
        let mut pieces = vec![self.pieces[0]];
        for (i, &cut) in self.cuts.iter().enumerate() {
            let next = self.pieces[i + 1];
            if next != *pieces.last().expect("nonempty") {
                debug_assert_eq!(
                    pieces.last().unwrap().eval_rat(cut),
                    next.eval_rat(cut),
                    "pieces must agree at interior cuts"
                );
                cuts.push(cut);
                pieces.push(next);
            }
        }
        self.cuts = cuts;
        self.pieces = pieces;
        self
    }

    /// Pairs each subinterval of the merged cut grid with the two active
    /// affine pieces and lets `emit` append output segments.
    fn zip_with<F>(&self, other: &Piecewise, mut emit: F) -> Piecewise
    where
        F: FnMut(Rat, Rat, Affine, Affine, &mut Vec<(Rat, Affine)>),
    {
        let mut grid: Vec<Rat> = Vec::with_capacity(self.cuts.len() + other.cuts.len() + 2);
        grid.push(h_lo());
        let mut ia = 0;
        let mut ib = 0;
        while ia < self.cuts.len() || ib < other.cuts.len() {
            let next = match (self.cuts.get(ia), other.cuts.get(ib)) {
                (Some(&a), Some(&b)) => {
                    if a <= b {
                        ia += 1;
                        if a == b {
                            ib += 1;
                        }
                        a
                    } else {
                        ib += 1;
                        b
                    }
                }
                (Some(&a), None) => {
                    ia += 1;
                    a
                }
                (None, Some(&b)) => {
                    ib += 1;
                    b
                }
                (None, None) => unreachable!(),
            };
            grid.push(next);
        }
        grid.push(h_hi());

        // segments: (upper bound of segment, piece); last upper bound is h_hi.
        let mut segments: Vec<(Rat, Affine)> = Vec::new();
        for w in grid.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let fa = self.piece_at_mid(lo, hi);
            let fb = other.piece_at_mid(lo, hi);
            emit(lo, hi, fa, fb, &mut segments);
        }
        let mut cuts = Vec::new();
        let mut pieces = Vec::new();
        for (i, &(hi, piece)) in segments.iter().enumerate() {
            pieces.push(piece);
            if i + 1 < segments.len() {
                cuts.push(hi);
            }
        }
        Piecewise { cuts, pieces }.normalize()
    }

    fn piece_at_mid(&self, lo: Rat, hi: Rat) -> Affine {
        let mid = (lo + hi) / Rat::from(2);
        self.piece_at(mid)
    }

    fn piece_at(&self, h: Rat) -> Affine {
        let mut idx = 0;
        while idx < self.cuts.len() && h >= self.cuts[idx] {
            idx += 1;
        }
        self.pieces[idx]
    }

    pub fn add(&self, other: &Piecewise) -> Piecewise {
        self.zip_with(other, |_lo, hi, fa, fb, out| {
            out.push((hi, fa.add(&fb)));
        })
    }

    pub fn max(&self, other: &Piecewise) -> Piecewise {
        self.combine_extremum(other, true)
    }

    pub fn min(&self, other: &Piecewise) -> Piecewise {
        self.combine_extremum(other, false)
    }

    fn combine_extremum(&self, other: &Piecewise, want_max: bool) -> Piecewise {
        self.zip_with(other, |lo, hi, fa, fb, out| {
            if fa == fb {
                out.push((hi, fa));
                return;
            }
            let d = fa.add(&fb.neg());
            let d_lo = d.eval_rat(lo);
            let d_hi = d.eval_rat(hi);
            let pick = |positive: bool| if positive == want_max { fa } else { fb };
            if d_lo.is_zero() && d_hi.is_zero() {
                out.push((hi, fa));
            } else if !d_lo.is_negative() && !d_hi.is_negative() {
                out.push((hi, pick(true)));
            } else if !d_lo.is_positive() && !d_hi.is_positive() {
                out.push((hi, pick(false)));
            } else {
                // strict sign change inside (lo, hi): split at the crossing
                let cross = -d.a / d.b;
                debug_assert!(lo < cross && cross < hi);
                out.push((cross, pick(d_lo.is_positive())));
                out.push((hi, pick(d_hi.is_positive())));
            }
        })
    }

    pub fn eval(&self, h: f64) -> f64 {
        let mut idx = 0;
        while idx < self.cuts.len() && h >= to_f64(self.cuts[idx]) {
            idx += 1;
        }
        self.pieces[idx].eval(h)
    }

    pub fn eval_rat(&self, h: Rat) -> Rat {
        self.piece_at(h).eval_rat(h)
    }

    /// Pointwise `self <= other` everywhere on `(1/2, 3/4)`.
    pub fn le(&self, other: &Piecewise) -> bool {
        &self.max(other) == other
    }
}

impl fmt::Display for Piecewise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.len() == 1 {
            return write!(f, "{}", self.pieces[0]);
        }
        let distinct: Vec<Affine> = {
            let set: BTreeSet<Affine> = self.pieces.iter().copied().collect();
            set.into_iter().collect()
        };
        let of = |extremum_max: bool| -> Piecewise {
            distinct
                .iter()
                .map(|&a| Piecewise::from_affine(a))
                .reduce(|x, y| if extremum_max { x.max(&y) } else { x.min(&y) })
                .expect("nonempty")
        };
        if of(true) == *self {
            write!(f, "max(")?;
            for (i, p) in self.pieces.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{p}")?;
            }
            return write!(f, ")");
        }
        if of(false) == *self {
            write!(f, "min(")?;
            for (i, p) in self.pieces.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{p}")?;
            }
            return write!(f, ")");
        }
        write!(f, "piecewise[")?;
        for i in 0..self.pieces.len() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let lo = if i == 0 { h_lo() } else { self.cuts[i - 1] };
            let hi = if i == self.pieces.len() - 1 {
                h_hi()
            } else {
                self.cuts[i]
            };
            write!(f, "({},{}): {}", fmt_rat(lo), fmt_rat(hi), self.pieces[i])?;
        }
        write!(f, "]")
    }
}

/// `phi_H(I) = -1/2 + ((1/2 - H) I) v (-1/2)` for `I >= 2`.
pub fn phi_h(i: u32) -> Result<ExponentExpr, ExponentError> {
    if i < 2 {
        return Err(ExponentError::DomainError(format!("phi_H needs I >= 2, got {i}")));
    }
    let i = i as i64;
    Ok(ExponentExpr::max([
        ExponentExpr::affine(rat(i - 1, 2), Rat::from(-i)),
        ExponentExpr::constant(Rat::from(-1)),
    ]))
}

/// `e2_plus(I) = (2 - I) + 2 phi_H(I)`, equal to `(1 - 2IH) v (-I)`, `I >= 2`.
pub fn e2_plus(i: u32) -> Result<ExponentExpr, ExponentError> {
    if i < 2 {
        return Err(ExponentError::DomainError(format!("e2_plus needs I >= 2, got {i}")));
    }
    Ok(ExponentExpr::constant(Rat::from(2 - i as i64)).add(phi_h(i)?.scale(Rat::from(2))))
}

/// `e2_minus(I) = (2 - I) - 1 + phi_H(2I)` for `I >= 1`.
pub fn e2_minus(i: u32) -> Result<ExponentExpr, ExponentError> {
    if i < 1 {
        return Err(ExponentError::DomainError(format!("e2_minus needs I >= 1, got {i}")));
    }
    Ok(ExponentExpr::constant(Rat::from(1 - i as i64)).add(phi_h(2 * i)?))
}

/// `delta_H(k) = 2 phi_H(k+1) - (phi_H(2k) + phi_H(2))` for `k >= 1`.
pub fn delta_h(k: u32) -> Result<ExponentExpr, ExponentError> {
    if k < 1 {
        return Err(ExponentError::DomainError(format!("delta_H needs k >= 1, got {k}")));
    }
    let lead = phi_h(k + 1)?.scale(Rat::from(2));
    Ok(lead.sub(phi_h(2 * k)?.add(phi_h(2)?)))
}

/// The explicit three-piece closed form of `delta_H(k)`, used as an oracle.
pub fn delta_h_closed(k: u32) -> Result<Piecewise, ExponentError> {
    if k < 1 {
        return Err(ExponentError::DomainError(format!("delta_H needs k >= 1, got {k}")));
    }
    let k = k as i64;
    // Breakpoints in H: H1 where k = 1/(2(2H-1)), H2 where k = (2-2H)/(2H-1).
    let h1 = rat(2 * k + 1, 4 * k);
    let h2 = rat(k + 2, 2 * k + 2);
    let zero = Affine::constant(Rat::zero());
    let middle = Affine::new(rat(1, 2) + Rat::from(k), Rat::from(-2 * k));
    let last = Affine::new(rat(-3, 2), Rat::from(2));
    let mut cuts = Vec::new();
    let mut pieces = Vec::new();
    pieces.push(zero);
    if h1 > h_lo() && h1 < h_hi() {
        cuts.push(h1);
        pieces.push(middle);
        if h2 > h1 && h2 < h_hi() {
            cuts.push(h2);
            pieces.push(last);
        }
    }
    Ok(Piecewise { cuts, pieces }.normalize())
}

/// First exponent of a connected component.
///
/// `e(C) = 2 - I - s` for `s <= 1`; for `s >= 2` the value depends on the
/// parity of `q_bar` and the maximal vertex weight.
pub fn first_exponent_component(c: &WeightedGraph) -> Result<ExponentExpr, ExponentError> {
    let st = c.stats()?;
    let i = st.i as i64;
    let s = st.s as i64;
    if st.s <= 1 {
        return Ok(ExponentExpr::constant(Rat::from(2 - i - s)));
    }
    let case_a = st.q_bar % 2 == 1 || c.max_q() > st.q_bar / 2;
    if case_a {
        // (2-I) - 1 + (1/2 - 2H) - H(s-2) = (3/2 - I) - sH
        Ok(ExponentExpr::affine(rat(3, 2) - Rat::from(i), Rat::from(-s)))
    } else {
        // (2-I) + 2(1/2 - 2H) - H(s-2) = (3 - I) - (s+2)H
        Ok(ExponentExpr::affine(Rat::from(3 - i), Rat::from(-(s + 2))))
    }
}

/// `e(alpha, G) = alpha + sum over components of e(C)`.
pub fn first_exponent(alpha: &ExponentExpr, g: &WeightedGraph) -> Result<ExponentExpr, ExponentError> {
    let mut items = vec![alpha.clone()];
    for c in g.components() {
        items.push(first_exponent_component(&c)?);
    }
    Ok(ExponentExpr::sum(items))
}

/// Second exponent of a connected component satisfying the structural
/// assumption (`s <= 2` with cycle / weighted-end-path shapes at `s = 2`).
pub fn second_exponent_component(c: &WeightedGraph) -> Result<ExponentExpr, ExponentError> {
    if !c.satisfies_assumption_connected()? {
        return Err(ExponentError::AssumptionViolated);
    }
    let st = c.stats()?;
    if st.s <= 1 {
        return Ok(ExponentExpr::constant(Rat::from(2 - st.i as i64 - st.s as i64)));
    }
    if st.i == 1 {
        e2_minus(1)
    } else {
        e2_plus(st.i)
    }
}

/// `e_T(C) = e2_minus(I(C))` for a path-with-weighted-ends component.
pub fn tensor_exponent_component(c: &WeightedGraph) -> Result<ExponentExpr, ExponentError> {
    let st = c.stats()?;
    e2_minus(st.i)
}

/// Component ids are minimal vertex labels; this returns the ids of the
/// `C^2_{2,2+}` components (the admissible t-set members).
pub fn t_set_candidates(g: &WeightedGraph) -> Result<BTreeSet<Vertex>, ExponentError> {
    let mut out = BTreeSet::new();
    for c in g.components() {
        if c.classify(Taxonomy::Second)?.tag == crate::graph::ClassTag::C2TwoI2Plus {
            out.insert(c.min_vertex());
        }
    }
    Ok(out)
}

/// `e2(alpha, G, C_T) = alpha + sum_{C not in T} e2(C) + sum_{C in T} e_T(C)`.
///
/// `t_set` holds component ids (minimal vertex labels) and must be a subset
/// of the `C^2_{2,2+}` components.
pub fn second_exponent(
    alpha: &ExponentExpr,
    g: &WeightedGraph,
    t_set: &BTreeSet<Vertex>,
) -> Result<ExponentExpr, ExponentError> {
    if !g.satisfies_assumption_graph() {
        return Err(ExponentError::AssumptionViolated);
    }
    let candidates = t_set_candidates(g)?;
    for &id in t_set {
        if !candidates.contains(&id) {
            return Err(ExponentError::TSetInvalid(id));
        }
    }
    let mut items = vec![alpha.clone()];
    for c in g.components() {
        if t_set.contains(&c.min_vertex()) {
            items.push(tensor_exponent_component(&c)?);
        } else {
            items.push(second_exponent_component(&c)?);
        }
    }
    Ok(ExponentExpr::sum(items))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::vee;

    fn g(
        vs: &[Vertex],
        es: &[(Vertex, Vertex, u32)],
        qs: &[(Vertex, u32)],
    ) -> WeightedGraph {
        WeightedGraph::new(vs.iter().copied(), es.iter().copied(), qs.iter().copied()).unwrap()
    }

    fn aff(a: Rat, b: Rat) -> ExponentExpr {
        ExponentExpr::affine(a, b)
    }

    #[test]
    fn canonical_max_prunes_dominated() {
        // max(1-4H, -2) = 1-4H on (1/2, 3/4)
        let e = ExponentExpr::max([aff(rat(1, 1), rat(-4, 1)), ExponentExpr::constant(rat(-2, 1))]);
        let c = e.canonical();
        assert!(c.is_affine());
        assert_eq!(c.pieces()[0], Affine::new(rat(1, 1), rat(-4, 1)));
        assert_eq!(format!("{e}"), "1-4H");
    }

    #[test]
    fn canonical_max_keeps_crossing() {
        // max(1-6H, -3): crossing at H = 2/3 inside the interval
        let e = ExponentExpr::max([aff(rat(1, 1), rat(-6, 1)), ExponentExpr::constant(rat(-3, 1))]);
        let c = e.canonical();
        assert_eq!(c.cuts(), &[rat(2, 3)]);
        assert_eq!(c.pieces().len(), 2);
        assert_eq!(format!("{e}"), "max(1-6H, -3)");
        assert!((e.eval(HurstParam::new(0.6).unwrap()) - (1.0 - 3.6)).abs() < 1e-12);
        assert!((e.eval(HurstParam::new(0.7).unwrap()) + 3.0).abs() < 1e-12);
    }

    #[test]
    fn canonicalization_idempotent_and_matches_tree() {
        let e = ExponentExpr::sum([
            ExponentExpr::max([aff(rat(1, 2), rat(-2, 1)), ExponentExpr::constant(rat(-1, 1))]),
            ExponentExpr::min([aff(rat(0, 1), rat(1, 1)), ExponentExpr::constant(rat(2, 3))]),
            aff(rat(-1, 3), rat(5, 1)),
        ]);
        let c = e.canonical();
        // evaluating the canonical form matches naive tree evaluation on a grid
        for k in 1..200 {
            let h = 0.5 + 0.25 * (k as f64) / 200.0;
            let naive = {
                let m1 = (0.5 - 2.0 * h).max(-1.0);
                let m2 = h.min(2.0 / 3.0);
                m1 + m2 + (-1.0 / 3.0 + 5.0 * h)
            };
            assert!((c.eval(h) - naive).abs() < 1e-12, "h={h}");
        }
        // idempotence: rebuilding from the pieces yields the same object
        let rebuilt = c.clone().normalize();
        assert_eq!(rebuilt, c);
    }

    #[test]
    fn phi_and_e2_functions() {
        assert!(phi_h(1).is_err());
        // e2_plus(I) = (1-2IH) v (-I)
        for i in 2..8 {
            let direct = ExponentExpr::max([
                aff(rat(1, 1), rat(-2 * i as i64, 1)),
                ExponentExpr::constant(rat(-(i as i64), 1)),
            ]);
            assert!(e2_plus(i).unwrap().sym_eq(&direct), "I={i}");
        }
        // e2_minus(1) = 1/2 - 2H
        assert!(e2_minus(1).unwrap().sym_eq(&aff(rat(1, 2), rat(-2, 1))));
        // e2_plus(2) = 1 - 4H on the whole interval
        assert!(e2_plus(2).unwrap().sym_eq(&aff(rat(1, 1), rat(-4, 1))));
    }

    #[test]
    fn delta_h_matches_closed_form() {
        for k in 1..12 {
            let sym = delta_h(k).unwrap().canonical();
            let closed = delta_h_closed(k).unwrap();
            assert_eq!(sym, closed, "k={k}");
        }
        // delta_H(1) = 0
        assert!(delta_h(1).unwrap().sym_eq(&ExponentExpr::zero()));
    }

    #[test]
    fn delta_h_monotone_and_bounded() {
        let lo = ExponentExpr::affine(rat(-3, 2), rat(2, 1));
        for k in 1..10 {
            let d = delta_h(k).unwrap();
            assert!(d.le_pointwise(&ExponentExpr::zero()), "delta <= 0 at k={k}");
            assert!(lo.le_pointwise(&d), "delta >= 2H-3/2 at k={k}");
            let d_next = delta_h(k + 1).unwrap();
            assert!(d_next.le_pointwise(&d), "monotone at k={k}");
        }
    }

    #[test]
    fn first_exponent_components() {
        // singleton q=1 -> 0
        assert!(first_exponent_component(&WeightedGraph::singleton(1, 1))
            .unwrap()
            .sym_eq(&ExponentExpr::zero()));
        // singleton q=3 -> 1/2 - 3H
        assert!(first_exponent_component(&WeightedGraph::singleton(1, 3))
            .unwrap()
            .sym_eq(&aff(rat(1, 2), rat(-3, 1))));
        // two vertices theta=2, q=0 -> 1 - 4H
        let c = g(&[1, 2], &[(1, 2, 2)], &[]);
        assert!(first_exponent_component(&c)
            .unwrap()
            .sym_eq(&aff(rat(1, 1), rat(-4, 1))));
    }

    #[test]
    fn first_exponent_graph_sums() {
        // alpha = 4H-1 over the weighted path graph gives 0
        let path = g(&[1, 2], &[(1, 2, 1)], &[(1, 1), (2, 1)]);
        let e = first_exponent(&aff(rat(-1, 1), rat(4, 1)), &path).unwrap();
        assert!(e.sym_eq(&ExponentExpr::zero()));

        // alpha = 6H-3/2 over the 3-vertex star with end weights gives 2H-3/2
        let star = g(&[1, 2, 3], &[(1, 2, 1), (1, 3, 1)], &[(2, 1), (3, 1)]);
        let e = first_exponent(&aff(rat(-3, 2), rat(6, 1)), &star).unwrap();
        assert!(e.sym_eq(&aff(rat(-3, 2), rat(2, 1))));

        // alpha = 6H-7/2 over q=(2,1,1) with no edges gives 4H-3
        let loose = g(&[1, 2, 3], &[], &[(1, 2), (2, 1), (3, 1)]);
        let e = first_exponent(&aff(rat(-7, 2), rat(6, 1)), &loose).unwrap();
        assert!(e.sym_eq(&aff(rat(-3, 1), rat(4, 1))));
    }

    #[test]
    fn first_exponent_lower_bound_and_sandwich() {
        let samples = [
            WeightedGraph::singleton(1, 0),
            WeightedGraph::singleton(1, 1),
            WeightedGraph::singleton(1, 2),
            WeightedGraph::singleton(1, 4),
            g(&[1, 2], &[(1, 2, 2)], &[]),
            g(&[1, 2], &[(1, 2, 1)], &[(1, 1), (2, 1)]),
            g(&[1, 2, 3], &[(1, 2, 2), (2, 3, 1)], &[(3, 2)]),
        ];
        for c in &samples {
            let st = c.stats().unwrap();
            let e = first_exponent_component(c).unwrap();
            let floor = ExponentExpr::constant(Rat::from(2 - st.i as i64 - st.s as i64));
            assert!(floor.le_pointwise(&e), "floor for {c}");
            if st.s >= 2 {
                let i = st.i as i64;
                let s = st.s as i64;
                let low = aff(rat(3, 2) - Rat::from(i), Rat::from(-s));
                let high = aff(Rat::from(3 - i), Rat::from(-(s + 2)));
                assert!(low.le_pointwise(&e), "sandwich low for {c}");
                assert!(e.le_pointwise(&high), "sandwich high for {c}");
            }
        }
    }

    #[test]
    fn e2_bounds() {
        for i in 2..8 {
            let plus = e2_plus(i).unwrap();
            let minus = e2_minus(i).unwrap();
            assert!(minus.le_pointwise(&plus), "I={i}");
            let floor = ExponentExpr::constant(Rat::from(-(i as i64)));
            assert!(floor.le_pointwise(&minus), "I={i}");
        }
        // phi monotonicity: phi(I1) >= phi(I2) for I1 < I2; -H > phi(I) >= -1
        let neg_h = aff(rat(0, 1), rat(-1, 1));
        for i in 2u32..8 {
            let cur = phi_h(i).unwrap();
            let next = phi_h(i + 1).unwrap();
            assert!(next.le_pointwise(&cur));
            assert!(cur.le_pointwise(&neg_h));
            assert!(ExponentExpr::constant(rat(-1, 1)).le_pointwise(&cur));
        }
    }

    #[test]
    fn phi_subadditivity() {
        for k1 in 1u32..6 {
            for k2 in 1u32..6 {
                let lhs = phi_h(k1 + k2).unwrap().scale(rat(2, 1));
                let rhs = phi_h(2 * k1).unwrap().add(phi_h(2 * k2).unwrap());
                assert!(lhs.le_pointwise(&rhs), "k1={k1} k2={k2}");
            }
        }
    }

    #[test]
    fn second_exponent_examples() {
        // path with weighted ends, I=2, in the t-set: 4H-1 + e_T = max(-1/2, 4H-3)
        let path = g(&[1, 2], &[(1, 2, 1)], &[(1, 1), (2, 1)]);
        let t: BTreeSet<Vertex> = [1].into();
        let e = second_exponent(&aff(rat(-1, 1), rat(4, 1)), &path, &t).unwrap();
        let expect = ExponentExpr::max([ExponentExpr::constant(rat(-1, 2)), aff(rat(-3, 1), rat(4, 1))]);
        assert!(e.sym_eq(&expect));
        assert_eq!(format!("{e}"), "max(-1/2, 4H-3)");

        // star, empty t-set: 6H-3/2 + e2+(3) = max(-1/2, 6H-9/2)
        let star = g(&[1, 2, 3], &[(1, 2, 1), (1, 3, 1)], &[(2, 1), (3, 1)]);
        let e = second_exponent(&aff(rat(-3, 2), rat(6, 1)), &star, &BTreeSet::new()).unwrap();
        let expect = ExponentExpr::max([ExponentExpr::constant(rat(-1, 2)), aff(rat(-9, 2), rat(6, 1))]);
        assert!(e.sym_eq(&expect));

        // all components with s <= 1: e2 equals first exponent
        let simple = vee([&WeightedGraph::singleton(1, 1), &WeightedGraph::singleton(2, 0)]).unwrap();
        let alpha = aff(rat(1, 4), rat(2, 1));
        let e2 = second_exponent(&alpha, &simple, &BTreeSet::new()).unwrap();
        let e1 = first_exponent(&alpha, &simple).unwrap();
        assert!(e2.sym_eq(&e1));
    }

    #[test]
    fn second_exponent_validation() {
        let bad = WeightedGraph::singleton(1, 3);
        assert!(matches!(
            second_exponent(&ExponentExpr::zero(), &bad, &BTreeSet::new()),
            Err(ExponentError::AssumptionViolated)
        ));
        let path = g(&[1, 2], &[(1, 2, 1)], &[(1, 1), (2, 1)]);
        let t: BTreeSet<Vertex> = [2].into(); // 2 is not a component id
        assert!(matches!(
            second_exponent(&ExponentExpr::zero(), &path, &t),
            Err(ExponentError::TSetInvalid(2))
        ));
        // a singleton q=2 is C^2_{2,1}, not admissible in the t-set
        let single = WeightedGraph::singleton(5, 2);
        let t: BTreeSet<Vertex> = [5].into();
        assert!(matches!(
            second_exponent(&ExponentExpr::zero(), &single, &t),
            Err(ExponentError::TSetInvalid(5))
        ));
    }

    #[test]
    fn parse_affine_strings() {
        for (s, a, b) in [
            ("4H-1", rat(-1, 1), rat(4, 1)),
            ("6H-3/2", rat(-3, 2), rat(6, 1)),
            ("-1/2", rat(-1, 2), rat(0, 1)),
            ("0", rat(0, 1), rat(0, 1)),
            ("2H - 3/2", rat(-3, 2), rat(2, 1)),
            ("-H", rat(0, 1), rat(-1, 1)),
            ("1-4H", rat(1, 1), rat(-4, 1)),
        ] {
            let e = ExponentExpr::parse_affine(s).unwrap();
            assert!(e.sym_eq(&aff(a, b)), "{s}");
        }
        assert!(ExponentExpr::parse_affine("").is_err());
        assert!(ExponentExpr::parse_affine("two H").is_err());
    }

    #[test]
    fn display_roundtrip_examples() {
        assert_eq!(format!("{}", aff(rat(-3, 1), rat(4, 1))), "4H-3");
        assert_eq!(format!("{}", aff(rat(1, 1), rat(-4, 1))), "1-4H");
        assert_eq!(format!("{}", aff(rat(-3, 2), rat(2, 1))), "2H-3/2");
        assert_eq!(format!("{}", ExponentExpr::zero()), "0");
        // a genuinely non-convex piecewise function renders as piecewise[...]
        let d = delta_h(3).unwrap();
        let shown = format!("{d}");
        assert!(shown.starts_with("piecewise["), "{shown}");
    }
}
