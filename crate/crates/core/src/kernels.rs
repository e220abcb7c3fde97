//! Limiting-process kernels and their derived laws: the Airy function, the
//! sine and Airy kernels, Fredholm determinants by Nystrom quadrature, the
//! Tracy-Widom edge law, and the sine-kernel gap/spacing laws.
//!
//! Everything here is deterministic and self-contained; the Monte Carlo
//! comparisons elsewhere treat these values as ground truth, so each number
//! has two evaluation paths (series vs asymptotics, determinant vs
//! Painleve, quadrature at n vs 2n) and the paths are cross-checked in
//! tests rather than trusted individually.

pub mod airy;
pub mod fredholm;
pub mod sine;
pub mod tracy_widom;

pub use airy::airy;
pub use fredholm::{fredholm_det, KernelSpec};
pub use sine::{sine_gap_probability, sine_spacing_cdf, SpacingTable};
pub use tracy_widom::{tw_cdf, two_path_divergence, PainleveCdf, TwTable};

use crate::error::Result;

/// sin(pi (u - v)) / (pi (u - v)), diagonal 1; the series branch keeps the
/// removable singularity smooth.
pub fn sine_kernel(u: f64, v: f64) -> f64 {
    let d = std::f64::consts::PI * (u - v);
    if d.abs() < 1e-6 * std::f64::consts::PI {
        let d2 = d * d;
        1.0 - d2 / 6.0 + d2 * d2 / 120.0
    } else {
        d.sin() / d
    }
}

/// (Ai(u) Ai'(v) - Ai'(u) Ai(v)) / (u - v), with the diagonal and
/// near-diagonal handled by the Taylor form around the midpoint.
pub fn airy_kernel(u: f64, v: f64) -> Result<f64> {
    let (ai_u, aip_u) = airy(u)?;
    let (ai_v, aip_v) = airy(v)?;
    Ok(airy_kernel_from_values(u, v, ai_u, aip_u, ai_v, aip_v))
}

/// Kernel entry from precomputed Airy values; lets the Nystrom assembly
/// evaluate Ai once per node instead of once per matrix entry.
pub(crate) fn airy_kernel_from_values(
    u: f64,
    v: f64,
    ai_u: f64,
    aip_u: f64,
    ai_v: f64,
    aip_v: f64,
) -> f64 {
    let h = u - v;
    if h.abs() < 1e-6 {
        // expansion at the midpoint m: K = Ai'(m)^2 - m Ai(m)^2
        //   + h^2/12 (Ai Ai' + 2 m Ai'^2 - 2 m^2 Ai^2), using Ai'' = m Ai
        let m = 0.5 * (u + v);
        let (ai, aip) = airy(m).expect("midpoint within range of its endpoints");
        let diag = aip * aip - m * ai * ai;
        diag + h * h / 12.0 * (ai * aip + 2.0 * m * aip * aip - 2.0 * m * m * ai * ai)
    } else {
        (ai_u * aip_v - aip_u * ai_v) / h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_kernel_diagonal_and_symmetry() {
        assert_eq!(sine_kernel(0.3, 0.3), 1.0);
        assert_eq!(sine_kernel(-2.0, -2.0), 1.0);
        for (u, v) in [(0.1, 0.7), (1.0, -0.4), (3.3, 3.9)] {
            assert!((sine_kernel(u, v) - sine_kernel(v, u)).abs() < 1e-15);
        }
        // sin(pi/2)/(pi/2)
        let expect = 2.0 / std::f64::consts::PI;
        assert!((sine_kernel(0.75, 0.25) - expect).abs() < 1e-15);
    }

    #[test]
    fn sine_kernel_series_matches_direct_quotient() {
        // the two evaluation paths must agree at the scale where either
        // could be used
        for u in [-1.3, 0.0, 2.7] {
            let d = 1e-4;
            let direct = (std::f64::consts::PI * d).sin() / (std::f64::consts::PI * d);
            let dd = std::f64::consts::PI * d;
            let series = 1.0 - dd * dd / 6.0 + dd.powi(4) / 120.0;
            assert!((direct - series).abs() < 1e-8);
            assert!((sine_kernel(u, u + d) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn airy_kernel_diagonal_and_symmetry() {
        for u in [-3.0, -0.5, 0.0, 1.0, 4.0] {
            let (ai, aip) = airy(u).unwrap();
            let diag = airy_kernel(u, u).unwrap();
            assert!((diag - (aip * aip - u * ai * ai)).abs() < 1e-14);
            for v in [-2.0, 0.3, 2.5] {
                let k_uv = airy_kernel(u, v).unwrap();
                let k_vu = airy_kernel(v, u).unwrap();
                assert!((k_uv - k_vu).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn airy_kernel_series_matches_direct_quotient() {
        // at |u - v| = 1e-4 both the Taylor form and the raw quotient are
        // reliable; they must agree to 1e-8
        for u in [-4.0, -1.0, 0.0, 1.5, 3.0] {
            let v = u + 1e-4;
            let (ai_u, aip_u) = airy(u).unwrap();
            let (ai_v, aip_v) = airy(v).unwrap();
            let direct = (ai_u * aip_v - aip_u * ai_v) / (u - v);
            let m = 0.5 * (u + v);
            let (ai, aip) = airy(m).unwrap();
            let h = u - v;
            let series = aip * aip - m * ai * ai
                + h * h / 12.0 * (ai * aip + 2.0 * m * aip * aip - 2.0 * m * m * ai * ai);
            assert!(
                (direct - series).abs() < 1e-8,
                "u = {u}: direct {direct:e} vs series {series:e}"
            );
        }
    }

    #[test]
    fn airy_kernel_positive_on_the_diagonal() {
        // diagonal of a positive kernel
        for u in [-6.0, -2.0, 0.0, 3.0] {
            assert!(airy_kernel(u, u).unwrap() > 0.0);
        }
    }
}
