//! Model parameters for the two-level covariance Wishart ensemble.
//!
//! The population covariance is diagonal with N - N1 eigenvalues equal to 1
//! and N1 equal to `a`.  Limiting regime: N/M -> c, N1/N -> beta with
//! 0 < c, beta < 1.  `FiniteSize` holds a concrete (M, N, N1) triple and
//! `effective_params` maps it back to the limiting triple (a, N1/N, N/M),
//! which is what the finite-size-corrected endpoint and edge-constant
//! computations consume.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Second covariance eigenvalue (the first is fixed at 1).
    pub a: f64,
    /// Limiting fraction N1/N of covariance eigenvalues equal to `a`.
    pub beta: f64,
    /// Limiting dimension ratio N/M.
    pub c: f64,
}

impl ModelParams {
    pub fn new(a: f64, beta: f64, c: f64) -> Result<Self> {
        ModelParams { a, beta, c }.validate()
    }

    /// Returns self if (a, beta, c) lies in the admissible open domain.
    pub fn validate(self) -> Result<Self> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "a must be positive, got {}",
                self.a
            )));
        }
        if !(self.beta.is_finite() && self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must lie in (0,1), got {}",
                self.beta
            )));
        }
        if !(self.c.is_finite() && self.c > 0.0 && self.c < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "c must lie in (0,1), got {}",
                self.c
            )));
        }
        Ok(self)
    }

    /// a = 1 collapses both covariance levels; spectra follow the one-level
    /// law and the two-cut analysis does not apply.
    pub fn is_degenerate(&self) -> bool {
        self.a == 1.0
    }

    /// The mirrored parameterization: scaling the matrix by 1/a swaps the
    /// roles of the two covariance levels.
    pub fn mirrored(&self) -> ModelParams {
        ModelParams { a: 1.0 / self.a, beta: 1.0 - self.beta, c: self.c }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteSize {
    /// Degrees of freedom (columns of the data matrix are M-dimensional).
    pub m: usize,
    /// Matrix dimension N.
    pub n: usize,
    /// Count of covariance eigenvalues equal to `a`.
    pub n1: usize,
}

impl FiniteSize {
    pub fn new(m: usize, n: usize, n1: usize) -> Result<Self> {
        let fs = FiniteSize { m, n, n1 };
        fs.validate()?;
        Ok(fs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n >= self.m {
            return Err(Error::InvalidParameter(format!(
                "need 2 <= N < M, got N = {}, M = {}",
                self.n, self.m
            )));
        }
        if self.n1 < 1 || self.n1 > self.n - 1 {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= N1 <= N-1, got N1 = {}, N = {}",
                self.n1, self.n
            )));
        }
        Ok(())
    }

    pub fn n0(&self) -> usize {
        self.n - self.n1
    }

    pub fn c_n(&self) -> f64 {
        self.n as f64 / self.m as f64
    }

    pub fn beta_n(&self) -> f64 {
        self.n1 as f64 / self.n as f64
    }
}

/// Rounds the limiting ratios to a concrete size at given M.  Nearest
/// integer with ties to even keeps |cM - N| and |beta N - N1| at most 1/2.
pub fn finite_size(params: &ModelParams, m: usize) -> Result<FiniteSize> {
    params.validate()?;
    if m < 2 {
        return Err(Error::InvalidParameter(format!("M must be at least 2, got {m}")));
    }
    let n = (params.c * m as f64).round_ties_even();
    if n < 2.0 || n >= m as f64 {
        return Err(Error::InvalidParameter(format!(
            "c = {} at M = {m} rounds to N = {n}, outside [2, M-1]",
            params.c
        )));
    }
    let n = n as usize;
    let n1 = (params.beta * n as f64).round_ties_even() as i64;
    let n1 = n1.clamp(1, n as i64 - 1) as usize;
    FiniteSize::new(m, n, n1)
}

/// The finite-N parameter triple (a, N1/N, N/M).  Feeding these through the
/// limiting formulas yields the finite-size-corrected endpoints and edge
/// constants used for Monte Carlo centering.
pub fn effective_params(fs: &FiniteSize, a: f64) -> Result<ModelParams> {
    fs.validate()?;
    ModelParams::new(a, fs.beta_n(), fs.c_n())
}
