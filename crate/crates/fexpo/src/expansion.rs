//! The asymptotic expansion layer: random-symbol coefficients (exact
//! quadrature oracles and Monte Carlo estimators for the fOU case, plus a
//! general evaluator over user-supplied kernels), the expansion density
//! `p_hat_n(z)` with its Hermite closed form, and Kolmogorov-distance
//! diagnostics against empirical laws.

use crate::exponent::HurstParam;
use crate::fbm::{solve_fou, FbmError, FbmSampler, SampleMethod, SdeCoefficients};
use crate::oracle::{c_h_squared, OracleError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use statrs::function::erf::erfc;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpansionError {
    #[error("quadrature failed to converge (depth {0})")]
    QuadratureFailure(usize),
    #[error("kernel field is missing the second-derivative kernel required by a nonzero a'")]
    KernelMissing,
    #[error("need at least {0} samples, got {1}")]
    TooFewSamples(usize, usize),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Fbm(#[from] FbmError),
}

// ---------------------------------------------------------------------------
// quadrature

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64, ExpansionError> {
    if depth > 40 {
        return Err(ExpansionError::QuadratureFailure(depth));
    }
    let m = 0.5 * (a + b);
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    if (left + right - whole).abs() <= 15.0 * tol {
        Ok(left + right + (left + right - whole) / 15.0)
    } else {
        let half = 0.5 * tol;
        Ok(adaptive_step(f, a, m, left, half, depth + 1)?
            + adaptive_step(f, m, b, right, half, depth + 1)?)
    }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, ExpansionError> {
    if a == b {
        return Ok(0.0);
    }
    adaptive_step(&f, a, b, simpson(&f, a, b), tol.max(1e-15), 0)
}

/// `K(x) = int_0^x e^{-bu} u^{2H-2} du`, with the endpoint singularity
/// removed by the substitution `u = w^{1/(2H-1)}`.
fn kernel_k(x: f64, b: f64, h: HurstParam, tol: f64) -> Result<f64, ExpansionError> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    let gamma = 2.0 * h.h() - 1.0;
    let upper = x.powf(gamma);
    let val = integrate(
        |w| (-b * w.powf(1.0 / gamma)).exp(),
        0.0,
        upper,
        tol * gamma,
    )?;
    Ok(val / gamma)
}

/// `K+(x) = int_0^x e^{+bu} u^{2H-2} du`, same substitution.
fn kernel_k_plus(x: f64, b: f64, h: HurstParam, tol: f64) -> Result<f64, ExpansionError> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    let gamma = 2.0 * h.h() - 1.0;
    let upper = x.powf(gamma);
    let val = integrate(
        |w| (b * w.powf(1.0 / gamma)).exp(),
        0.0,
        upper,
        tol * gamma,
    )?;
    Ok(val / gamma)
}

/// `(1 - e^{-2bx}) / (2b)`, stable in the `b -> 0` limit.
fn expm1_ratio(b: f64, x: f64) -> f64 {
    if b.abs() < 1e-14 {
        x * (1.0 - b * x)
    } else {
        -(-2.0 * b * x).exp_m1() / (2.0 * b)
    }
}

/// The fOU diagonal kernel
/// `d_dot(tau, tau) = sigma alpha_H T int_0^tau e^{-bu} u^{2H-2} du`.
pub fn d_dot_fou(
    tau: f64,
    b: f64,
    sigma: f64,
    h: HurstParam,
    t: f64,
    tol: f64,
) -> Result<f64, ExpansionError> {
    if !(0.0..=t).contains(&tau) {
        return Err(ExpansionError::BadParameter(format!("tau = {tau} outside [0, {t}]")));
    }
    Ok(sigma * h.alpha() * t * kernel_k(tau, b, h, tol)?)
}

/// The full fOU kernel `d_dot(tau, t') = int_0^T D_s X_{t'} rho_tau(s) ds`
/// with `D_s X_t = sigma 1_{[0,t]}(s) e^{-b(t-s)}`.
pub fn d_dot_fou_full(
    tau: f64,
    tp: f64,
    b: f64,
    sigma: f64,
    h: HurstParam,
    t: f64,
    tol: f64,
) -> Result<f64, ExpansionError> {
    let scale = sigma * h.alpha() * t;
    if tp <= tau {
        // s runs below tau only
        let val = kernel_k(tau, b, h, tol)? - kernel_k(tau - tp, b, h, tol)?;
        Ok(scale * (b * (tau - tp)).exp() * val)
    } else {
        let val = kernel_k(tau, b, h, tol)? + kernel_k_plus(tp - tau, b, h, tol)?;
        Ok(scale * (-b * (tp - tau)).exp() * val)
    }
}

// ---------------------------------------------------------------------------
// random-symbol polynomials

/// One polynomial coefficient: a (possibly Monte Carlo) expectation and the
/// standard error of the estimate (zero for exact values).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficient {
    pub value: f64,
    pub std_error: f64,
}

/// A polynomial random symbol reduced to the expectations of its
/// coefficients, keyed by degree in the dummy frequency variable.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymbolPolynomial {
    coefficients: BTreeMap<u32, Coefficient>,
}

impl SymbolPolynomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, degree: u32, value: f64, std_error: f64) -> Self {
        self.coefficients.insert(degree, Coefficient { value, std_error });
        self
    }

    pub fn set(&mut self, degree: u32, value: f64, std_error: f64) {
        self.coefficients.insert(degree, Coefficient { value, std_error });
    }

    pub fn coefficient(&self, degree: u32) -> Option<Coefficient> {
        self.coefficients.get(&degree).copied()
    }

    pub fn value(&self, degree: u32) -> f64 {
        self.coefficients.get(&degree).map_or(0.0, |c| c.value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Coefficient)> + '_ {
        self.coefficients.iter().map(|(&d, &c)| (d, c))
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Coefficient-wise mean of per-path evaluations, with standard errors.
    pub fn mean_of(polys: &[SymbolPolynomial]) -> SymbolPolynomial {
        let mut degrees: Vec<u32> = Vec::new();
        for p in polys {
            for (d, _) in p.iter() {
                if !degrees.contains(&d) {
                    degrees.push(d);
                }
            }
        }
        let mut out = SymbolPolynomial::new();
        let n = polys.len() as f64;
        for d in degrees {
            let vals: Vec<f64> = polys.iter().map(|p| p.value(d)).collect();
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
            out.set(d, mean, (var / n).sqrt());
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Gaussian density machinery

fn norm_pdf(z: f64, var: f64) -> f64 {
    (-(z * z) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

fn norm_cdf_std(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Probabilists' Hermite polynomial `He_n(x)`.
pub fn hermite(n: u32, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let mut prev = 1.0;
            let mut cur = x;
            for k in 1..n {
                let next = x * cur - k as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// The expansion density `p_hat_n(z) = phi(z; 0, G) (1 + r_n * correction)`
/// for deterministic limit variance `G` and a polynomial random symbol.
#[derive(Clone, Debug)]
pub struct ExpansionDensity {
    pub g_inf: f64,
    pub r_n: f64,
    pub symbol: SymbolPolynomial,
}

impl ExpansionDensity {
    pub fn new(g_inf: f64, r_n: f64, symbol: SymbolPolynomial) -> Result<Self, ExpansionError> {
        if !g_inf.is_finite() || g_inf <= 0.0 {
            return Err(ExpansionError::BadParameter(format!("G must be positive, got {g_inf}")));
        }
        Ok(Self { g_inf, r_n, symbol })
    }

    /// The plain limit Gaussian (empty correction).
    pub fn gaussian(g_inf: f64) -> Result<Self, ExpansionError> {
        Self::new(g_inf, 0.0, SymbolPolynomial::new())
    }

    /// Pointwise density: `(-d/dz)^a phi` contributes a Hermite factor
    /// `He_a(z/sqrt(G)) G^{-a/2}`.
    pub fn density(&self, z: f64) -> f64 {
        let x = z / self.g_inf.sqrt();
        let mut corr = 0.0;
        for (deg, c) in self.symbol.iter() {
            corr += c.value * hermite(deg, x) * self.g_inf.powf(-(deg as f64) / 2.0);
        }
        norm_pdf(z, self.g_inf) * (1.0 + self.r_n * corr)
    }

    /// Closed-form CDF: the degree-`a` correction integrates to
    /// `-He_{a-1}(z/sqrt(G)) G^{-(a-1)/2} phi(z; 0, G)` for `a >= 1`.
    pub fn cdf(&self, z: f64) -> f64 {
        let x = z / self.g_inf.sqrt();
        let mut out = norm_cdf_std(x);
        for (deg, c) in self.symbol.iter() {
            if deg == 0 {
                out += self.r_n * c.value * norm_cdf_std(x);
            } else {
                out -= self.r_n
                    * c.value
                    * hermite(deg - 1, x)
                    * self.g_inf.powf(-((deg - 1) as f64) / 2.0)
                    * norm_pdf(z, self.g_inf);
            }
        }
        out
    }
}

/// Free-function form of the density evaluation.
pub fn expansion_density(d: &ExpansionDensity, z: f64) -> f64 {
    d.density(z)
}

/// `G_infinity = 2 c_H^2 sigma^4 T^{4H}` for the fOU process.
pub fn g_infinity_fou(sigma: f64, t: f64, h: HurstParam) -> f64 {
    let c2 = c_h_squared(h, 1e-10).expect("c_H^2 is computable at 1e-10 for H in (1/2, 3/4)");
    2.0 * c2 * sigma.powi(4) * t.powf(4.0 * h.h())
}

const QUAD_TOL: f64 = 1e-11;

/// The deterministic part of the fOU degree-one coefficient:
/// `-2 b sigma int_0^T d_dot(tau, tau) dtau`, reduced by Fubini to a single
/// singular-endpoint integral.
fn fou_symbol_det_part(b: f64, sigma: f64, h: HurstParam, t: f64) -> Result<f64, ExpansionError> {
    // int_0^T K(tau) dtau = int_0^T e^{-bu} u^{2H-2} (T - u) du
    let gamma = 2.0 * h.h() - 1.0;
    let upper = t.powf(gamma);
    let l = integrate(
        |w| {
            let u = w.powf(1.0 / gamma);
            (-b * u).exp() * (t - u)
        },
        0.0,
        upper,
        QUAD_TOL * gamma,
    )? / gamma;
    Ok(-2.0 * b * sigma * (sigma * h.alpha() * t) * l)
}

/// Exact oracle for the fOU random-symbol coefficient (degree one):
/// deterministic quadrature of
/// `-2 b sigma int d_dot(tau,tau) dtau + T b^2 int E[X_tau^2] dtau`.
pub fn fou_symbol_coefficient_exact(
    b: f64,
    sigma: f64,
    x0: f64,
    h: HurstParam,
    t: f64,
) -> Result<SymbolPolynomial, ExpansionError> {
    let det1 = fou_symbol_det_part(b, sigma, h, t)?;
    // int_0^T E[X_tau^2] dtau = x0^2 (1-e^{-2bT})/(2b)
    //   + sigma^2 (alpha_H / b) int_0^T e^{-bu} u^{2H-2} G(u) du  (b > 0)
    // where G(u) = (T-u) - (1-e^{-2b(T-u)})/(2b); for b -> 0 the variance
    // part reduces to int tau^{2H} dtau.
    let x0_part = x0 * x0 * expm1_ratio(b, t);
    let var_part = if b.abs() < 1e-12 {
        sigma * sigma * t.powf(2.0 * h.h() + 1.0) / (2.0 * h.h() + 1.0)
    } else {
        let gamma = 2.0 * h.h() - 1.0;
        let upper = t.powf(gamma);
        let m = integrate(
            |w| {
                let u = w.powf(1.0 / gamma);
                (-b * u).exp() * ((t - u) - expm1_ratio(b, t - u))
            },
            0.0,
            upper,
            QUAD_TOL * gamma,
        )? / gamma;
        sigma * sigma * (h.alpha() / b) * m
    };
    let c1 = det1 + t * b * b * (x0_part + var_part);
    Ok(SymbolPolynomial::new().with(1, c1, 0.0))
}

/// Monte Carlo estimator of the same coefficient: the deterministic kernel
/// integral plus a path-sampled `T b^2 E[int X_tau^2 dtau]`, with the
/// standard error of the estimate.
pub fn fou_symbol_coefficient_mc(
    b: f64,
    sigma: f64,
    x0: f64,
    h: HurstParam,
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<SymbolPolynomial, ExpansionError> {
    if n_paths < 2 {
        return Err(ExpansionError::BadParameter("need at least 2 paths".into()));
    }
    let det1 = fou_symbol_det_part(b, sigma, h, t)?;
    const FINE: usize = 1024;
    let sampler = FbmSampler::new(FINE, h, t, SampleMethod::Circulant)?;
    let integrals: Result<Vec<f64>, FbmError> = (0..n_paths)
        .into_par_iter()
        .map(|idx| {
            let path = sampler.sample(seed, idx as u64);
            let x = solve_fou(&path, b, sigma, x0, 1)?;
            // trapezoid of X^2 over [0, T]
            let hstep = t / FINE as f64;
            let mut acc = 0.5 * (x[0] * x[0] + x[FINE] * x[FINE]);
            for v in x.iter().take(FINE).skip(1) {
                acc += v * v;
            }
            Ok(acc * hstep)
        })
        .collect();
    let integrals = integrals?;
    let n = n_paths as f64;
    let mean = integrals.iter().sum::<f64>() / n;
    let var = integrals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let factor = t * b * b;
    Ok(SymbolPolynomial::new().with(1, det1 + factor * mean, factor * (var / n).sqrt()))
}

// ---------------------------------------------------------------------------
// general random-symbol evaluator

/// Malliavin kernel functions `d_dot(tau, t)` and `d_ddot(tau, t)`.
/// A missing `d_ddot` means the caller could not supply it; it is only
/// required when `a'` is not identically zero on the path.
pub struct KernelField {
    pub d_dot: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub d_ddot: Option<Box<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
}

impl KernelField {
    /// The explicit fOU kernels: `d_dot` from the exponential Malliavin
    /// derivative, `d_ddot` identically zero (the second derivative of the
    /// solution map vanishes).
    pub fn fou(b: f64, sigma: f64, h: HurstParam, t: f64) -> Self {
        Self {
            d_dot: Box::new(move |tau, tp| {
                d_dot_fou_full(tau, tp, b, sigma, h, t, 1e-9).unwrap_or(f64::NAN)
            }),
            d_ddot: Some(Box::new(|_, _| 0.0)),
        }
    }
}

/// Scalar coefficient fields entering the limit random symbols:
/// `a = V1^2` with two derivatives, `g = 2 c_H^2 T^{4H-1} V1^4` with its
/// derivative, and the drift products `V21 = V2 V1`, `V22 = V2^2`,
/// `V211 = (V2 V1)'`.
pub struct SymbolCoefficients {
    pub a: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub a_d1: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub a_d2: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub g: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub g_d1: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub v21: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub v22: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub v211: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl SymbolCoefficients {
    /// Derives all coefficient fields from SDE coefficients.
    pub fn from_sde(coeffs: SdeCoefficients, h: HurstParam, t: f64) -> Self {
        use std::sync::Arc;
        let c2 = c_h_squared(h, 1e-10).expect("c_H^2 computable");
        let gscale = 2.0 * c2 * t.powf(4.0 * h.h() - 1.0);
        let v1: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::from(coeffs.v1);
        let v1d: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::from(coeffs.v1_d1);
        let v1dd: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::from(coeffs.v1_d2);
        let v2: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::from(coeffs.v2);
        let v2d: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::from(coeffs.v2_d1);
        SymbolCoefficients {
            a: {
                let v1 = v1.clone();
                Box::new(move |x| v1(x) * v1(x))
            },
            a_d1: {
                let (v1, v1d) = (v1.clone(), v1d.clone());
                Box::new(move |x| 2.0 * v1(x) * v1d(x))
            },
            a_d2: {
                let (v1, v1d, v1dd) = (v1.clone(), v1d.clone(), v1dd);
                Box::new(move |x| 2.0 * (v1d(x) * v1d(x) + v1(x) * v1dd(x)))
            },
            g: {
                let v1 = v1.clone();
                Box::new(move |x| gscale * v1(x).powi(4))
            },
            g_d1: {
                let (v1, v1d) = (v1.clone(), v1d.clone());
                Box::new(move |x| 4.0 * gscale * v1(x).powi(3) * v1d(x))
            },
            v21: {
                let (v1, v2) = (v1.clone(), v2.clone());
                Box::new(move |x| v2(x) * v1(x))
            },
            v22: {
                let v2 = v2.clone();
                Box::new(move |x| v2(x) * v2(x))
            },
            v211: Box::new(move |x| v2d(x) * v1(x) + v2(x) * v1d(x)),
        }
    }
}

/// Per-path evaluation of the limit random symbols over one observed path:
/// quadrature of the integral formulas for the degree-5, degree-3 and
/// degree-1 coefficients. The caller averages the returned polynomials over
/// paths.
pub fn general_symbols_evaluate(
    x_grid: &[f64],
    h: HurstParam,
    t: f64,
    kernels: &KernelField,
    coeffs: &SymbolCoefficients,
) -> Result<SymbolPolynomial, ExpansionError> {
    let n = x_grid.len().checked_sub(1).filter(|&n| n >= 2).ok_or_else(|| {
        ExpansionError::BadParameter("need at least three grid points".into())
    })?;
    let hstep = t / n as f64;
    let w = |i: usize| if i == 0 || i == n { 0.5 * hstep } else { hstep };

    let a: Vec<f64> = x_grid.iter().map(|&x| (coeffs.a)(x)).collect();
    let a1: Vec<f64> = x_grid.iter().map(|&x| (coeffs.a_d1)(x)).collect();
    let a2: Vec<f64> = x_grid.iter().map(|&x| (coeffs.a_d2)(x)).collect();
    let g1: Vec<f64> = x_grid.iter().map(|&x| (coeffs.g_d1)(x)).collect();
    let v21: Vec<f64> = x_grid.iter().map(|&x| (coeffs.v21)(x)).collect();
    let v22: Vec<f64> = x_grid.iter().map(|&x| (coeffs.v22)(x)).collect();
    let v211: Vec<f64> = x_grid.iter().map(|&x| (coeffs.v211)(x)).collect();

    let need_ddot = a1.iter().any(|&v| v != 0.0);
    if need_ddot && kernels.d_ddot.is_none() {
        return Err(ExpansionError::KernelMissing);
    }

    let tau = |i: usize| i as f64 * hstep;
    let dd: Vec<Vec<f64>> = (0..=n)
        .map(|i| (0..=n).map(|j| (kernels.d_dot)(tau(i), tau(j))).collect())
        .collect();
    let ddd: Option<Vec<Vec<f64>>> = kernels.d_ddot.as_ref().map(|f| {
        (0..=n)
            .map(|i| (0..=n).map(|j| f(tau(i), tau(j))).collect())
            .collect()
    });
    let zero_row = vec![0.0; n + 1];

    // inner_g1[i] = int g'(X_t) d_dot(tau_i, t) dt
    let inner_g1: Vec<f64> = (0..=n)
        .map(|i| (0..=n).map(|j| w(j) * g1[j] * dd[i][j]).sum())
        .collect();

    // degree 5: S^{(3,0)}_1 = 1/(4T) int (inner_g1)^2 a_tau dtau
    let s31: f64 = (0..=n)
        .map(|i| w(i) * inner_g1[i] * inner_g1[i] * a[i])
        .sum::<f64>()
        / (4.0 * t);

    // degree 3, quasi-torsion part
    let c2 = c_h_squared(h, 1e-10)?;
    let pref = 2.0 * t.powf(4.0 * h.h() - 2.0) * c2;
    let mut s32 = 0.0;
    for i in 0..=n {
        let dddrow = ddd.as_ref().map_or(&zero_row, |m| &m[i]);
        let inner1: f64 = (0..=n)
            .map(|j| w(j) * (a2[j] * dd[i][j] * dd[i][j] + a1[j] * dddrow[j]) * a[j])
            .sum();
        let inner2: f64 = (0..=n).map(|j| w(j) * a1[j] * dd[i][j] * a[j]).sum();
        let inner3: f64 = (0..=n).map(|j| w(j) * (a1[j] * dd[i][j]).powi(2)).sum();
        s32 += w(i) * (inner1 * a[i] + inner2 * (a1[i] * dd[i][i]) + inner3 * a[i]);
    }
    s32 *= pref;

    // degree 3, quasi-tangent-free part of S^{(1,0)}
    let s11: f64 = (0..=n)
        .map(|i| w(i) * inner_g1[i] * (0.5 / t * a1[i] * dd[i][i] + v21[i]))
        .sum();

    // degree 1
    let s12: f64 = (0..=n)
        .map(|i| {
            let dddii = ddd.as_ref().map_or(0.0, |m| m[i][i]);
            w(i)
                * ((a2[i] * dd[i][i] * dd[i][i] + a1[i] * dddii) / t
                    + 2.0 * v211[i] * dd[i][i]
                    + t * v22[i])
        })
        .sum();

    Ok(SymbolPolynomial::new()
        .with(5, s31, 0.0)
        .with(3, s32 + s11, 0.0)
        .with(1, s12, 0.0))
}

// ---------------------------------------------------------------------------
// distributional distances

const MIN_SAMPLES: usize = 1000;

/// Kolmogorov distance between the empirical law of `samples` and the model
/// CDF of `density`.
pub fn kolmogorov_distance(
    samples: &[f64],
    density: &ExpansionDensity,
) -> Result<f64, ExpansionError> {
    if samples.len() < MIN_SAMPLES {
        return Err(ExpansionError::TooFewSamples(MIN_SAMPLES, samples.len()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = density.cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    Ok(d)
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn two_sample_ks(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), ExpansionError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(ExpansionError::BadParameter("empty sample".into()));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let t = a[i].min(b[j]);
        while i < n && a[i] <= t {
            i += 1;
        }
        while j < m && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let lambda = ne.sqrt() * d;
    Ok((d, ks_survival(lambda)))
}

/// `Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)`.
fn ks_survival(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut acc = 0.0;
    for k in 1..200 {
        let term = 2.0 * (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        if term < 1e-16 {
            break;
        }
        acc += if k % 2 == 1 { term } else { -term };
    }
    acc.clamp(0.0, 1.0)
}

/// Percentile bootstrap confidence interval of the Kolmogorov-distance
/// difference `D(samples, reference) - D(samples, model)`; positive values
/// mean `model` fits strictly better than `reference`.
#[derive(Clone, Copy, Debug)]
pub struct BootstrapCi {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
}

pub fn bootstrap_ks_improvement(
    samples: &[f64],
    model: &ExpansionDensity,
    reference: &ExpansionDensity,
    n_boot: usize,
    seed: u64,
) -> Result<BootstrapCi, ExpansionError> {
    if samples.len() < MIN_SAMPLES {
        return Err(ExpansionError::TooFewSamples(MIN_SAMPLES, samples.len()));
    }
    if n_boot < 40 {
        return Err(ExpansionError::BadParameter("need at least 40 bootstrap resamples".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = xs.len();
    let f_model: Vec<f64> = xs.iter().map(|&x| model.cdf(x)).collect();
    let f_ref: Vec<f64> = xs.iter().map(|&x| reference.cdf(x)).collect();

    let point = {
        let d_model = ks_from_cdf(&f_model, None);
        let d_ref = ks_from_cdf(&f_ref, None);
        d_ref - d_model
    };

    let diffs: Vec<f64> = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(b as u64 + 1);
            let mut counts = vec![0u32; n];
            for _ in 0..n {
                counts[rng.gen_range(0..n)] += 1;
            }
            let d_model = ks_from_cdf(&f_model, Some(&counts));
            let d_ref = ks_from_cdf(&f_ref, Some(&counts));
            d_ref - d_model
        })
        .collect();
    let mut sorted = diffs;
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let q = |p: f64| -> f64 {
        let idx = ((sorted.len() as f64 - 1.0) * p).round() as usize;
        sorted[idx]
    };
    Ok(BootstrapCi {
        point,
        lo: q(0.025),
        hi: q(0.975),
    })
}

/// KS statistic from precomputed model CDF values at the sorted sample
/// points, optionally reweighted by bootstrap multiplicities.
fn ks_from_cdf(f_vals: &[f64], counts: Option<&[u32]>) -> f64 {
    let n = f_vals.len();
    let total: f64 = match counts {
        Some(c) => c.iter().map(|&x| x as f64).sum(),
        None => n as f64,
    };
    let mut cum = 0.0;
    let mut d: f64 = 0.0;
    for i in 0..n {
        let step = match counts {
            Some(c) => c[i] as f64,
            None => 1.0,
        };
        let before = cum / total;
        cum += step;
        let after = cum / total;
        d = d.max((f_vals[i] - before).abs());
        d = d.max((f_vals[i] - after).abs());
    }
    d
}
