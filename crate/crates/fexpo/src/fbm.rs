//! Exact-in-law fractional Brownian motion on uniform grids, fractional
//! SDE path solving and the rescaled quadratic-variation statistic.
//!
//! Sampling is exact: either a Cholesky factorization of the increment
//! covariance or circulant embedding of the stationary increment sequence.
//! Paths are reproducible from `(seed, stream)` pairs so that ensembles are
//! order-independent under parallelism.

use crate::exponent::HurstParam;
use crate::oracle::rho_h;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FbmError {
    #[error("grid size must be positive")]
    EmptyGrid,
    #[error("circulant embedding has a negative eigenvalue ({0:.3e})")]
    CirculantEmbeddingFailure(f64),
    #[error("Cholesky sampling capped at N = {cap}, requested {n}")]
    CholeskyCapExceeded { n: usize, cap: usize },
    #[error("Cholesky factorization failed at pivot {0}")]
    CholeskyFailure(usize),
    #[error("path resolution {n_fine} is not a multiple of {substeps} substeps")]
    ResolutionMismatch { n_fine: usize, substeps: usize },
    #[error("observation grid has length {got}, expected {expect}")]
    LengthMismatch { got: usize, expect: usize },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// A uniform-grid fBm sample: `values[j]` is `B` at `t_j = j T / N`.
#[derive(Clone, Debug)]
pub struct FbmPath {
    pub h: HurstParam,
    pub t: f64,
    pub n: usize,
    pub values: Vec<f64>,
}

/// `E[B_s B_t] = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2`.
pub fn fbm_covariance(s: f64, t: f64, h: HurstParam) -> f64 {
    let two_h = 2.0 * h.h();
    0.5 * (s.abs().powf(two_h) + t.abs().powf(two_h) - (t - s).abs().powf(two_h))
}

/// Sampling method selection.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SampleMethod {
    Cholesky,
    Circulant,
    /// Cholesky for `N <= 2048`, circulant embedding above, falling back to
    /// Cholesky when the embedding fails.
    Auto,
}

const CHOLESKY_AUTO_MAX: usize = 2048;
const CHOLESKY_CAP: usize = 4096;

enum Factorization {
    Cholesky {
        // lower-triangular factor of the increment covariance, row-major
        l: Vec<f64>,
    },
    Circulant {
        lambda_sqrt: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
}

/// A reusable sampler: the covariance factorization is built once and shared
/// read-only across paths.
pub struct FbmSampler {
    n: usize,
    h: HurstParam,
    t: f64,
    fact: Factorization,
}

impl FbmSampler {
    pub fn new(n: usize, h: HurstParam, t: f64, method: SampleMethod) -> Result<Self, FbmError> {
        if n == 0 {
            return Err(FbmError::EmptyGrid);
        }
        if !t.is_finite() || t <= 0.0 {
            return Err(FbmError::BadParameter(format!("T must be positive, got {t}")));
        }
        let fact = match method {
            SampleMethod::Cholesky => Self::cholesky(n, h, t)?,
            SampleMethod::Circulant => Self::circulant(n, h, t)?,
            SampleMethod::Auto => {
                if n <= CHOLESKY_AUTO_MAX {
                    Self::cholesky(n, h, t)?
                } else {
                    match Self::circulant(n, h, t) {
                        Ok(f) => f,
                        Err(FbmError::CirculantEmbeddingFailure(_)) => Self::cholesky(n, h, t)?,
                        Err(e) => return Err(e),
                    }
                }
            }
        };
        Ok(Self { n, h, t, fact })
    }

    /// Autocovariance of the increment sequence at lag `k`.
    fn increment_autocov(n: usize, h: HurstParam, t: f64, k: usize) -> f64 {
        (t / n as f64).powf(2.0 * h.h()) * rho_h(k as i64, h)
    }

    fn cholesky(n: usize, h: HurstParam, t: f64) -> Result<Factorization, FbmError> {
        if n > CHOLESKY_CAP {
            return Err(FbmError::CholeskyCapExceeded { n, cap: CHOLESKY_CAP });
        }
        let cov: Vec<f64> = (0..n).map(|k| Self::increment_autocov(n, h, t, k)).collect();
        let mut l = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = cov[i - j];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return Err(FbmError::CholeskyFailure(i));
                    }
                    l[i * n + j] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(Factorization::Cholesky { l })
    }

    fn circulant(n: usize, h: HurstParam, t: f64) -> Result<Factorization, FbmError> {
        let m = 2 * n;
        let mut row: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); m];
        for (k, slot) in row.iter_mut().enumerate().take(n + 1) {
            slot.re = Self::increment_autocov(n, h, t, k);
        }
        for k in 1..n {
            row[m - k].re = row[k].re;
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);
        let max_ev = row.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        let min_ev = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        if min_ev < -1e-9 * max_ev.max(1e-300) {
            return Err(FbmError::CirculantEmbeddingFailure(min_ev));
        }
        let lambda_sqrt: Vec<f64> = row.iter().map(|c| c.re.max(0.0).sqrt()).collect();
        Ok(Factorization::Circulant { lambda_sqrt, fft })
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    /// Draws one path. Streams derived from `(seed, stream)` are independent,
    /// and the same pair always reproduces the same path bit for bit.
    pub fn sample(&self, seed: u64, stream: u64) -> FbmPath {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let increments = match &self.fact {
            Factorization::Cholesky { l } => {
                let n = self.n;
                let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let mut inc = vec![0.0f64; n];
                for i in 0..n {
                    let mut acc = 0.0;
                    for (k, &zk) in z.iter().enumerate().take(i + 1) {
                        acc += l[i * n + k] * zk;
                    }
                    inc[i] = acc;
                }
                inc
            }
            Factorization::Circulant { lambda_sqrt, fft } => {
                let n = self.n;
                let m = 2 * n;
                let scale = 1.0 / (m as f64).sqrt();
                let mut z: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); m];
                let g0: f64 = StandardNormal.sample(&mut rng);
                z[0] = Complex::new(lambda_sqrt[0] * g0, 0.0);
                for k in 1..n {
                    let u: f64 = StandardNormal.sample(&mut rng);
                    let v: f64 = StandardNormal.sample(&mut rng);
                    let amp = lambda_sqrt[k] / 2f64.sqrt();
                    z[k] = Complex::new(amp * u, amp * v);
                    z[m - k] = z[k].conj();
                }
                let gn: f64 = StandardNormal.sample(&mut rng);
                z[n] = Complex::new(lambda_sqrt[n] * gn, 0.0);
                fft.process(&mut z);
                z.iter().take(n).map(|c| c.re * scale).collect()
            }
        };
        let mut values = Vec::with_capacity(self.n + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for inc in increments {
            acc += inc;
            values.push(acc);
        }
        FbmPath {
            h: self.h,
            t: self.t,
            n: self.n,
            values,
        }
    }
}

/// One-shot convenience sampler (stream 0).
pub fn sample_fbm(
    n: usize,
    h: HurstParam,
    t: f64,
    seed: u64,
    method: SampleMethod,
) -> Result<FbmPath, FbmError> {
    Ok(FbmSampler::new(n, h, t, method)?.sample(seed, 0))
}

/// Scalar SDE coefficient fields `V1` (diffusion, with two derivatives) and
/// `V2` (drift, with one derivative), plus the initial value.
pub struct SdeCoefficients {
    pub v1: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub v1_d1: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub v1_d2: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub v2: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub v2_d1: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub x0: f64,
}

impl SdeCoefficients {
    /// The linear-drift, constant-diffusion coefficients of the fOU equation.
    pub fn fou(b: f64, sigma: f64, x0: f64) -> Self {
        Self {
            v1: Box::new(move |_| sigma),
            v1_d1: Box::new(|_| 0.0),
            v1_d2: Box::new(|_| 0.0),
            v2: Box::new(move |x| -b * x),
            v2_d1: Box::new(move |_| -b),
            x0,
        }
    }
}

/// Solves the fOU equation `X_t = x0 - b int X ds + sigma B_t` on the
/// observation grid (every `substeps`-th point of the fine path), using the
/// integration-by-parts representation
/// `X_t = x0 e^{-bt} + sigma (B_t - b int_0^t e^{-b(t-s)} B_s ds)`
/// with trapezoid quadrature of the Riemann integral on the fine grid.
pub fn solve_fou(
    path: &FbmPath,
    b: f64,
    sigma: f64,
    x0: f64,
    substeps: usize,
) -> Result<Vec<f64>, FbmError> {
    if substeps == 0 || !path.n.is_multiple_of(substeps) {
        return Err(FbmError::ResolutionMismatch {
            n_fine: path.n,
            substeps,
        });
    }
    if b < 0.0 {
        return Err(FbmError::BadParameter(format!("b must be nonnegative, got {b}")));
    }
    let n_fine = path.n;
    let h_step = path.t / n_fine as f64;
    let decay = (-b * h_step).exp();
    let mut j = 0.0f64; // running integral int_0^{t_i} e^{-b(t_i - s)} B_s ds
    let n_obs = n_fine / substeps;
    let mut out = Vec::with_capacity(n_obs + 1);
    out.push(x0);
    for i in 0..n_fine {
        j = decay * j + 0.5 * h_step * (decay * path.values[i] + path.values[i + 1]);
        if (i + 1) % substeps == 0 {
            let t = (i + 1) as f64 * h_step;
            out.push(x0 * (-b * t).exp() + sigma * (path.values[i + 1] - b * j));
        }
    }
    Ok(out)
}

/// First-order Euler scheme for the pathwise Young SDE
/// `X_{k+1} = X_k + V2(X_k) dt + V1(X_k) dB` on the fine grid; a
/// demonstrator, not a certified solver.
pub fn solve_sde_young(
    path: &FbmPath,
    coeffs: &SdeCoefficients,
    substeps: usize,
) -> Result<Vec<f64>, FbmError> {
    if substeps == 0 || !path.n.is_multiple_of(substeps) {
        return Err(FbmError::ResolutionMismatch {
            n_fine: path.n,
            substeps,
        });
    }
    let n_fine = path.n;
    let dt = path.t / n_fine as f64;
    let mut x = coeffs.x0;
    let mut out = Vec::with_capacity(n_fine / substeps + 1);
    out.push(x);
    for i in 0..n_fine {
        let db = path.values[i + 1] - path.values[i];
        x += (coeffs.v2)(x) * dt + (coeffs.v1)(x) * db;
        if (i + 1) % substeps == 0 {
            out.push(x);
        }
    }
    Ok(out)
}

/// Quadratic variation report for one observed path.
#[derive(Clone, Copy, Debug)]
pub struct QvReport {
    pub n: usize,
    pub v_n: f64,
    pub v_inf: f64,
    pub z_n: f64,
    pub r_n: f64,
}

/// `v_n = n^{2H-1} sum (Delta_j X)^2`, `z_n = sqrt(n) (v_n - v_inf)` and
/// `r_n = n^{2H-3/2}`. The limit `v_inf` is supplied by the caller
/// (`sigma^2 T^{2H}` for the fOU case).
pub fn quadratic_variation(
    x_grid: &[f64],
    n: usize,
    h: HurstParam,
    v_inf: f64,
) -> Result<QvReport, FbmError> {
    if x_grid.len() != n + 1 {
        return Err(FbmError::LengthMismatch {
            got: x_grid.len(),
            expect: n + 1,
        });
    }
    let nf = n as f64;
    let sum_sq: f64 = x_grid.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    let v_n = nf.powf(2.0 * h.h() - 1.0) * sum_sq;
    Ok(QvReport {
        n,
        v_n,
        v_inf,
        z_n: nf.sqrt() * (v_n - v_inf),
        r_n: nf.powf(2.0 * h.h() - 1.5),
    })
}

/// Parameters of an fOU quadratic-variation Monte Carlo run.
#[derive(Clone, Copy, Debug)]
pub struct FouParams {
    pub h: HurstParam,
    pub b: f64,
    pub sigma: f64,
    pub x0: f64,
    pub t: f64,
    /// number of quadratic-variation observations
    pub n: usize,
    /// fine steps per observation interval
    pub substeps: usize,
}

impl FouParams {
    pub fn v_inf(&self) -> f64 {
        self.sigma * self.sigma * self.t.powf(2.0 * self.h.h())
    }
}

/// Simulates `n_paths` independent fOU paths and reports the quadratic
/// variation of each. Path `i` uses RNG stream `(seed, i)`, so the ensemble
/// is deterministic and independent of the parallel schedule.
pub fn fou_qv_ensemble(
    params: &FouParams,
    n_paths: usize,
    seed: u64,
    method: SampleMethod,
) -> Result<Vec<QvReport>, FbmError> {
    let n_fine = params.n * params.substeps;
    let sampler = FbmSampler::new(n_fine, params.h, params.t, method)?;
    let v_inf = params.v_inf();
    (0..n_paths)
        .into_par_iter()
        .map(|idx| {
            let path = sampler.sample(seed, idx as u64);
            let x = solve_fou(&path, params.b, params.sigma, params.x0, params.substeps)?;
            quadratic_variation(&x, params.n, params.h, v_inf)
        })
        .collect()
}
