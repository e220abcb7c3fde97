//! Sine-kernel gap probability and nearest-neighbor spacing law at unit
//! mean density.
//!
//! E(s) = det(I - K_sine on (0, s)) is evaluated by the shared Nystrom
//! machinery. The spacing density is p(s) = E''(s), taken by 5-point central
//! differences on a cached E-grid of step 0.01; near s = 0 the stencil is
//! replaced by the exact small-gap expansion E''(s) = (pi^2/3) s^2 (1 + O(s^2)),
//! since E is only defined for s >= 0. The spacing CDF is the cumulative
//! trapezoid of p.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::kernels::{fredholm_det, KernelSpec};

/// E-grid step and extents: E is tabulated to 5.2 so that the second
/// difference stencil covers spacing arguments up to 5.0.
const STEP: f64 = 0.01;
const E_MAX: f64 = 5.2;
const S_MAX: f64 = 5.0;

/// Probability that an interval of length s contains no points.
pub fn sine_gap_probability(s: f64) -> Result<f64> {
    if !s.is_finite() || !(s > 0.0 && s <= S_MAX) {
        return Err(Error::InvalidParameter(format!(
            "gap length must lie in (0, {S_MAX}], got {s}"
        )));
    }
    fredholm_det(KernelSpec::SineGap { s }, 80)
}

/// Spacing CDF at one point, from the shared table.
pub fn sine_spacing_cdf(s: f64) -> Result<f64> {
    if !s.is_finite() || !(s > 0.0 && s <= S_MAX) {
        return Err(Error::InvalidParameter(format!(
            "spacing argument must lie in (0, {S_MAX}], got {s}"
        )));
    }
    Ok(SpacingTable::shared()?.cdf_clamped(s))
}

/// Cached E(s) grid with the derived spacing density and CDF.
pub struct SpacingTable {
    /// E at s_i = i * STEP, i = 0 ..= E_MAX/STEP
    pub e: Vec<f64>,
    /// spacing density at s_i, i = 0 ..= S_MAX/STEP
    pub pdf: Vec<f64>,
    /// cumulative trapezoid of pdf
    pub cdf: Vec<f64>,
    /// integral of pdf over [0, S_MAX]
    pub norm: f64,
    /// integral of s * pdf
    pub mean: f64,
}

impl SpacingTable {
    pub fn build() -> Result<Self> {
        let ne = (E_MAX / STEP).round() as usize;
        let np = (S_MAX / STEP).round() as usize;
        let mut e = Vec::with_capacity(ne + 1);
        e.push(1.0);
        for i in 1..=ne {
            e.push(fredholm_det(KernelSpec::SineGap { s: STEP * i as f64 }, 80)?);
        }

        let mut pdf = Vec::with_capacity(np + 1);
        for i in 0..=np {
            let s = STEP * i as f64;
            let p = if i < 2 {
                // small-gap expansion; the stencil would need E at s < 0
                std::f64::consts::PI.powi(2) / 3.0 * s * s
            } else {
                (-e[i - 2] + 16.0 * e[i - 1] - 30.0 * e[i] + 16.0 * e[i + 1] - e[i + 2])
                    / (12.0 * STEP * STEP)
            };
            if p < -1e-5 {
                return Err(Error::Quadrature(format!(
                    "spacing density came out {p} at s = {s}"
                )));
            }
            pdf.push(p.max(0.0));
        }

        let mut cdf = Vec::with_capacity(np + 1);
        let mut acc = 0.0f64;
        let mut mean = 0.0f64;
        cdf.push(0.0);
        for i in 1..=np {
            let sl = STEP * (i - 1) as f64;
            let sr = STEP * i as f64;
            acc += 0.5 * STEP * (pdf[i - 1] + pdf[i]);
            mean += 0.5 * STEP * (sl * pdf[i - 1] + sr * pdf[i]);
            cdf.push(acc);
        }
        let norm = acc;
        if (norm - 1.0).abs() >= 1e-3 {
            return Err(Error::Quadrature(format!(
                "spacing density integrates to {norm}, expected 1 within 1e-3"
            )));
        }
        Ok(Self { e, pdf, cdf, norm, mean })
    }

    pub fn shared() -> Result<&'static SpacingTable> {
        static TABLE: OnceLock<SpacingTable> = OnceLock::new();
        if let Some(t) = TABLE.get() {
            return Ok(t);
        }
        let built = Self::build()?;
        Ok(TABLE.get_or_init(|| built))
    }

    pub fn gap_at(&self, i: usize) -> f64 {
        self.e[i]
    }

    /// Linear interpolation of the CDF, clamped to [0, 1] and defined on all
    /// of the real line (0 below, 1 above the grid) for KS comparisons.
    pub fn cdf_clamped(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= S_MAX {
            return 1.0;
        }
        let idx = ((s / STEP) as usize).min(self.cdf.len() - 2);
        let t = (s - STEP * idx as f64) / STEP;
        (self.cdf[idx] * (1.0 - t) + self.cdf[idx + 1] * t).clamp(0.0, 1.0)
    }
}
