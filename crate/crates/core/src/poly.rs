//! Real-coefficient polynomial utilities: evaluation, roots via the companion
//! matrix with Newton polish, and the Sylvester resultant / discriminant.
//!
//! Coefficients are stored in ascending order: `c[k]` multiplies `x^k`.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Horner evaluation at a real point.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Horner evaluation at a complex point.
pub fn eval_c(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Coefficients of the derivative.
pub fn deriv(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

/// All complex roots: companion-matrix eigenvalues followed by a few Newton
/// steps on the original polynomial.  The leading coefficient must be nonzero.
pub fn roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::RootSolve("leading coefficient is zero or non-finite".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -coeffs[i] / lead;
    }
    let eig = companion.complex_eigenvalues();
    let dcoeffs = deriv(coeffs);
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut out = Vec::with_capacity(n);
    for &r0 in eig.iter() {
        out.push(polish_root(coeffs, &dcoeffs, r0, scale)?);
    }
    Ok(out)
}

fn polish_root(
    coeffs: &[f64],
    dcoeffs: &[f64],
    mut z: Complex64,
    scale: f64,
) -> Result<Complex64> {
    for _ in 0..8 {
        let f = eval_c(coeffs, z);
        let df = eval_c(dcoeffs, z);
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        z -= step;
        if step.norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    // Residual contract relative to the monomial magnitudes at the root.
    let mag = coeffs
        .iter()
        .enumerate()
        .fold(0.0f64, |m, (k, &c)| m.max((c * z.norm().powi(k as i32)).abs()))
        .max(scale * f64::EPSILON);
    let res = eval_c(coeffs, z).norm();
    if res > 1e-8 * mag {
        return Err(Error::RootSolve(format!(
            "polished root {z} has residual {res:.3e} vs scale {mag:.3e}"
        )));
    }
    Ok(z)
}

/// Resultant Res(p, q) via the Sylvester matrix determinant.
pub fn resultant(p: &[f64], q: &[f64]) -> f64 {
    let m = p.len() - 1;
    let n = q.len() - 1;
    assert!(m > 0 && n > 0, "resultant needs two nonconstant polynomials");
    let size = m + n;
    let mut s = DMatrix::<f64>::zeros(size, size);
    // n rows of p's coefficients (descending), then m rows of q's.
    for row in 0..n {
        for (k, &c) in p.iter().rev().enumerate() {
            s[(row, row + k)] = c;
        }
    }
    for row in 0..m {
        for (k, &c) in q.iter().rev().enumerate() {
            s[(n + row, row + k)] = c;
        }
    }
    s.lu().determinant()
}

/// Discriminant of a quartic: Res(p, p') / lead (the sign factor for degree 4
/// is +1).  Positive exactly when the quartic has four distinct real roots or
/// two distinct conjugate pairs; the sign split against the real-root count is
/// done by the caller.
pub fn quartic_discriminant(coeffs: &[f64]) -> f64 {
    assert_eq!(coeffs.len(), 5, "quartic expected");
    resultant(coeffs, &deriv(coeffs)) / coeffs[4]
}
