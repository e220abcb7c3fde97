//! Finite-size sampling of the two-level covariance Wishart ensemble and
//! the rescaled statistics whose limits the curve and kernel modules
//! predict.
//!
//! A trial draws an M x N matrix X of i.i.d. standard complex Gaussians
//! (each part variance 1/2), scales column j by sqrt(sigma_j) where sigma is
//! N - N1 ones followed by N1 copies of a, and takes the eigenvalues of
//! (1/M) X^H X with the scaling folded in. Each trial owns an independent
//! counter-based RNG stream keyed by (seed, trial), so results do not depend
//! on execution order; trials run in parallel.
//!
//! Normal variates come from Box-Muller rather than a ziggurat so that every
//! entry consumes exactly two uniforms: the draw count per trial is fixed,
//! which keeps streams reproducible and makes the pre-eigensolve matrices
//! bit-identical across runs.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::density::{edge_constants, SpectralCdf};
use crate::error::{Error, Result};
use crate::model::{effective_params, FiniteSize, ModelParams};
use crate::spectral_curve::{self, quartic_roots};

/// Eigenvalues of a batch of sampled matrices, one sorted-descending row per
/// trial.
#[derive(Clone, Debug)]
pub struct EnsembleRun {
    pub fs: FiniteSize,
    pub a: f64,
    pub seed: u64,
    /// trials x N, each row sorted descending
    pub eigenvalues: Vec<Vec<f64>>,
}

impl EnsembleRun {
    pub fn trials(&self) -> usize {
        self.eigenvalues.len()
    }

    /// All eigenvalues of all trials in one vector (unsorted across trials).
    pub fn pooled(&self) -> Vec<f64> {
        self.eigenvalues.iter().flatten().copied().collect()
    }
}

/// One standard complex Gaussian entry (each part mean 0, variance 1/2) by
/// Box-Muller; consumes exactly two uniforms.
fn standard_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    let r = (-u1.ln()).sqrt();
    let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
    Complex64::new(r * c, r * s)
}

/// Column-major fill of the M x N data matrix.
fn data_matrix(fs: &FiniteSize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let mut x = DMatrix::zeros(fs.m, fs.n);
    for j in 0..fs.n {
        for i in 0..fs.m {
            x[(i, j)] = standard_complex(rng);
        }
    }
    x
}

/// (1/m) D X^H X D for D = diag(sqrt(sigma)); only the upper triangle is
/// computed, the rest is filled by Hermitian symmetry and the diagonal is
/// forced real.
fn covariance_gram(x: &DMatrix<Complex64>, sigma: &[f64], m_norm: f64) -> DMatrix<Complex64> {
    let n = x.ncols();
    debug_assert_eq!(sigma.len(), n);
    let mut b = DMatrix::zeros(n, n);
    for k in 0..n {
        for j in 0..=k {
            let scale = (sigma[j] * sigma[k]).sqrt() / m_norm;
            let d = x.column(j).dotc(&x.column(k)) * scale;
            if j == k {
                b[(j, j)] = Complex64::new(d.re, 0.0);
            } else {
                b[(j, k)] = d;
                b[(k, j)] = d.conj();
            }
        }
    }
    b
}

fn sigma_vector(fs: &FiniteSize, a: f64) -> Vec<f64> {
    let mut s = vec![1.0; fs.n];
    for v in s.iter_mut().skip(fs.n0()) {
        *v = a;
    }
    s
}

fn trial_eigenvalues(fs: &FiniteSize, a: f64, seed: u64, trial: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let x = data_matrix(fs, &mut rng);
    let b = covariance_gram(&x, &sigma_vector(fs, a), fs.m as f64);
    let eig = SymmetricEigen::try_new(b, f64::EPSILON, 100_000).ok_or_else(|| {
        Error::RootSolve(format!(
            "hermitian eigensolver did not converge on trial {trial} (seed {seed})"
        ))
    })?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_unstable_by(|p, q| q.total_cmp(p));
    Ok(vals)
}

/// Samples `trials` matrices and returns all spectra. Trial t is fully
/// determined by (fs, a, seed, t).
pub fn sample_eigenvalues(fs: &FiniteSize, a: f64, seed: u64, trials: usize) -> Result<EnsembleRun> {
    fs.validate()?;
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let eigenvalues: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| trial_eigenvalues(fs, a, seed, t))
        .collect::<Result<_>>()?;
    Ok(EnsembleRun { fs: *fs, a, seed, eigenvalues })
}

/// Top support edge and its square-root coefficient. Two-cut parameters use
/// the full branch-point machinery; one-cut parameters fall back to the real
/// roots of the branch quartic so that the top edge is still well defined.
fn top_edge(params: &ModelParams) -> Result<(f64, f64)> {
    match quartic_roots(params) {
        Ok(bp) => Ok((bp.lambda[3], edge_constants(params)?[3])),
        Err(Error::NotTwoCut { .. }) => {
            let q = spectral_curve::quartic_coefficients(params);
            let desc: Vec<f64> = q.iter().rev().copied().collect();
            let roots = crate::poly::roots(&desc)?;
            let mut best: Option<(f64, f64)> = None;
            for r in roots {
                if r.im.abs() > 1e-7 * (1.0 + r.re.abs()) {
                    continue;
                }
                let lambda = spectral_curve::lambda_of_gamma(r.re, params)?;
                if best.map_or(true, |(l, _)| lambda > l) {
                    best = Some((lambda, r.re));
                }
            }
            let (lambda, gamma) = best.ok_or_else(|| {
                Error::BranchTracking("no real branch point for the top edge".into())
            })?;
            let zpp = spectral_curve::z_map_second_derivative(gamma, params);
            if zpp.abs() < 1e-10 {
                return Err(Error::InvalidParameter(
                    "degenerate top edge: |z''| < 1e-10".into(),
                ));
            }
            Ok((lambda, (2.0 / zpp.abs()).sqrt()))
        }
        Err(e) => Err(e),
    }
}

/// Per-trial rescaled top eigenvalues (y1 - lambda_top)(M rho_top)^(2/3),
/// centered on the finite-N curve obtained from the sampled (N/M, N1/N)
/// ratios rather than the limiting parameters.
pub fn edge_rescale(run: &EnsembleRun, params: &ModelParams) -> Result<Vec<f64>> {
    params.validate()?;
    if (params.a - run.a).abs() > 1e-12 * run.a.abs() {
        return Err(Error::InvalidParameter(format!(
            "parameter a = {} does not match the sampled a = {}",
            params.a, run.a
        )));
    }
    // the limiting regime must have a well-defined top edge at all
    top_edge(params)?;
    let eff = effective_params(&run.fs, run.a)?;
    let (lambda_top, rho_top) = top_edge(&eff)?;
    let scale = (run.fs.m as f64 * rho_top).powf(2.0 / 3.0);
    Ok(run
        .eigenvalues
        .iter()
        .map(|ev| (ev[0] - lambda_top) * scale)
        .collect())
}

/// Pooled consecutive spacings of the unfolded eigenvalues
/// u = M int_{x0}^{y} rho inside [x0 - window, x0 + window].
pub fn bulk_unfold(
    run: &EnsembleRun,
    params: &ModelParams,
    x0: f64,
    window: f64,
) -> Result<Vec<f64>> {
    params.validate()?;
    if (params.a - run.a).abs() > 1e-12 * run.a.abs() {
        return Err(Error::InvalidParameter(format!(
            "parameter a = {} does not match the sampled a = {}",
            params.a, run.a
        )));
    }
    if !(window.is_finite() && window > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "window must be positive, got {window}"
        )));
    }
    let eff = effective_params(&run.fs, run.a)?;
    let bp = quartic_roots(&eff)?;
    let interval = [
        (bp.lambda[0], bp.lambda[1]),
        (bp.lambda[2], bp.lambda[3]),
    ]
    .into_iter()
    .find(|&(lo, hi)| x0 > lo && x0 < hi)
    .ok_or(Error::OffSupport { z: x0 })?;
    if x0 - window <= interval.0 || x0 + window >= interval.1 {
        return Err(Error::InvalidParameter(format!(
            "window [{}, {}] leaves the support interval ({}, {})",
            x0 - window,
            x0 + window,
            interval.0,
            interval.1
        )));
    }
    let cdf = SpectralCdf::new(&eff)?;
    let n_scale = run.fs.m as f64 * eff.c; // M * c = N at the sampled ratio
    let u0 = cdf.eval(x0);
    let mut spacings = Vec::new();
    for ev in &run.eigenvalues {
        // rows are descending; collect window hits in ascending order
        let mut unfolded: Vec<f64> = ev
            .iter()
            .rev()
            .filter(|&&y| (y - x0).abs() <= window)
            .map(|&y| n_scale * (cdf.eval(y) - u0))
            .collect();
        unfolded.sort_unstable_by(f64::total_cmp);
        for w in unfolded.windows(2) {
            spacings.push(w[1] - w[0]);
        }
    }
    if spacings.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no spacings collected: window {window} around {x0} caught fewer than two eigenvalues in every trial"
        )));
    }
    Ok(spacings)
}

/// Right-continuous step function of a sample.
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter("empty sample".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("sample contains non-finite values".into()));
        }
        samples.sort_unstable_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of the sample <= x.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.sorted.partition_point(|&v| v <= x);
        k as f64 / self.sorted.len() as f64
    }
}

/// Kolmogorov-Smirnov sup-distance between a sample and a CDF callable.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    Ok(d)
}
