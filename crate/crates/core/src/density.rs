//! Limiting eigenvalue density, interval masses, CDF, and edge constants.
//!
//! On the support the density of the transformed law (the one whose Stieltjes
//! transform is the first branch) has the closed form
//!
//! ```text
//! rho(z) = sqrt(3)/(2 pi) * | cbrt(u+) - cbrt(u-) |
//! u(+-)  = ( r(z) +- sqrt( -D3(z) / (27 a^4 z^4) ) ) / 2
//! ```
//!
//! with real cube roots and `r` an explicit cubic polynomial in 1/z. The
//! independent cross-check is the imaginary part of the labeled cubic root:
//! `rho(z) = |Im xi_1,+(z)| / pi`. Both are exposed; the closed form refuses
//! off-support input while the root-based oracle returns 0 there.
//!
//! Eigenvalue-law quantities differ by the factor c: `density_f = rho / c`,
//! and the interval masses of rho are c(1-beta) and c*beta, distributed by
//! the sheet assignment.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quad::{self, GaussLegendre};
use crate::spectral_curve::{
    self, label_branches, quartic_roots, solve_cubic_at, BranchPoints,
};

const PI: f64 = std::f64::consts::PI;

/// r(z): the shifted cubic's constant term, a polynomial in 1/z.
fn r_value(z: f64, params: &ModelParams) -> f64 {
    let a = params.a;
    let k = spectral_curve::curve_coefficients(params);
    let (a2, b1, b2) = (k.a2, k.b1, k.b2);
    let aa = a * a;
    let aaa = aa * a;
    let t0 = 9.0 * a2 / aa - 2.0 * a2.powi(3) / aaa;
    let t1 = 9.0 * b2 / aa + 9.0 * b1 * a2 / aa - 27.0 / a - 6.0 * a2 * a2 * b2 / aaa;
    let t2 = 9.0 * b1 * b2 / aa - 6.0 * a2 * b2 * b2 / aaa;
    let t3 = -2.0 * b2.powi(3) / aaa;
    let w = 1.0 / z;
    (t0 + w * (t1 + w * (t2 + w * t3))) / 27.0
}

/// Closed form without the support gate; returns 0 where the curve
/// discriminant is nonnegative. Rounding can push the radicand a hair below
/// zero right at the edges, so it is clamped.
fn rho_unchecked(z: f64, params: &ModelParams) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let d3 = spectral_curve::d3(z, params);
    if d3 >= 0.0 {
        return 0.0;
    }
    let a = params.a;
    let rad = (-d3 / (27.0 * a.powi(4) * z.powi(4))).max(0.0);
    let s = rad.sqrt();
    let r = r_value(z, params);
    let u_plus = 0.5 * (r + s);
    let u_minus = 0.5 * (r - s);
    3f64.sqrt() / (2.0 * PI) * (u_plus.cbrt() - u_minus.cbrt()).abs()
}

/// Density at a point strictly inside the support, two-cut regime only.
pub fn rho_closed_form(z: f64, params: &ModelParams) -> Result<f64> {
    quartic_roots(params)?;
    if !(z > 0.0) || spectral_curve::d3(z, params) >= 0.0 {
        return Err(Error::OffSupport { z });
    }
    Ok(rho_unchecked(z, params))
}

/// Brute-force density: |Im| of the complex cubic root at z over pi, 0 when
/// all roots are real. Valid in either regime.
pub fn rho_oracle(z: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if z <= 0.0 {
        return Ok(0.0);
    }
    let roots = solve_cubic_at(Complex64::new(z, 0.0), params)?;
    let max_im = roots.iter().map(|r| r.im.abs()).fold(0.0, f64::max);
    let scale = roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    if max_im <= 1e-9 * (1.0 + scale) {
        return Ok(0.0);
    }
    Ok(max_im / PI)
}

/// Square-root coefficients at the four support endpoints:
/// rho(z) ~ (rho_k / pi) sqrt(|z - lambda_k|) with rho_k = sqrt(2/|z''(gamma_k)|).
pub fn edge_constants(params: &ModelParams) -> Result<[f64; 4]> {
    let bp = quartic_roots(params)?;
    let mut out = [0.0f64; 4];
    for (o, &g) in out.iter_mut().zip(&bp.gamma) {
        let zpp = spectral_curve::z_map_second_derivative(g, params);
        if zpp.abs() < 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "degenerate edge: |z''| < 1e-10 at gamma = {g}"
            )));
        }
        *o = (2.0 / zpp.abs()).sqrt();
    }
    Ok(out)
}

/// Integral of rho over one cut with the substitution z = edge +- t^2 from
/// both ends, which turns the square-root edge behavior into a smooth
/// integrand.
fn cut_integral(params: &ModelParams, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let mid = 0.5 * (lo + hi);
    let left = quad::adaptive_gk(
        |t| 2.0 * t * rho_unchecked(lo + t * t, params),
        0.0,
        (mid - lo).sqrt(),
        0.5 * tol,
    )?;
    let right = quad::adaptive_gk(
        |t| 2.0 * t * rho_unchecked(hi - t * t, params),
        0.0,
        (hi - mid).sqrt(),
        0.5 * tol,
    )?;
    Ok(left + right)
}

/// Masses of the two support intervals, in interval order (lower, upper).
/// They equal {c(1-beta), c*beta} as distributed by the sheet assignment and
/// sum to c.
pub fn interval_masses(params: &ModelParams) -> Result<(f64, f64)> {
    let bp = quartic_roots(params)?;
    let left = cut_integral(params, bp.lambda[0], bp.lambda[1], 1e-9)?;
    let right = cut_integral(params, bp.lambda[2], bp.lambda[3], 1e-9)?;
    Ok((left, right))
}

/// Density of the eigenvalue law itself: rho / c on the support, 0 off it.
pub fn density_f(z: f64, params: &ModelParams) -> Result<f64> {
    let bp = quartic_roots(params)?;
    let inside = (z > bp.lambda[0] && z < bp.lambda[1])
        || (z > bp.lambda[2] && z < bp.lambda[3]);
    if !inside {
        return Ok(0.0);
    }
    Ok(rho_unchecked(z, params) / params.c)
}

/// CDF of the eigenvalue law at one point. Builds the quadrature table each
/// call; batch evaluation should go through [`SpectralCdf`].
pub fn cdf_f(z: f64, params: &ModelParams) -> Result<f64> {
    Ok(SpectralCdf::new(params)?.eval(z))
}

/// Residual of the Stieltjes fixed-point equation for a candidate transform
/// value m at z.
pub fn fixed_point_residual(z: Complex64, m: Complex64, params: &ModelParams) -> f64 {
    let ModelParams { a, beta, c } = *params;
    let denom = z - c * ((1.0 - beta) / (1.0 + m) + a * beta / (1.0 + a * m));
    (m + 1.0 / denom).norm()
}

/// Residual of the fixed-point equation under the labeled first branch;
/// should be at rounding level everywhere in the open upper half plane.
pub fn self_consistency_residual(z: Complex64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if !(z.im > 0.0) {
        return Err(Error::InvalidParameter(
            "self-consistency residual needs Im z > 0".into(),
        ));
    }
    let t = label_branches(z, params)?;
    Ok(fixed_point_residual(z, t.xi1, params))
}

/// Cumulative mass from one edge of a cut toward its midpoint, tabulated in
/// the square-root variable t (z = edge +- t^2) where the integrand is
/// smooth. Panel integrals by fixed Gauss-Legendre, evaluation by cubic
/// Hermite with the exact derivative 2 t rho.
struct HalfCdf {
    t_max: f64,
    /// cumulative mass at t_i = t_max * i / n
    m: Vec<f64>,
    /// d(mass)/dt at the same nodes
    dm: Vec<f64>,
}

impl HalfCdf {
    const PANELS: usize = 128;

    fn build(params: &ModelParams, edge: f64, sign: f64, t_max: f64) -> Self {
        let gl = GaussLegendre::new(16);
        let n = Self::PANELS;
        let f = |t: f64| 2.0 * t * rho_unchecked(edge + sign * t * t, params);
        let mut m = Vec::with_capacity(n + 1);
        let mut dm = Vec::with_capacity(n + 1);
        let mut acc = 0.0f64;
        m.push(0.0);
        dm.push(0.0);
        for i in 0..n {
            let a = t_max * i as f64 / n as f64;
            let b = t_max * (i + 1) as f64 / n as f64;
            acc += gl.integrate(a, b, f);
            m.push(acc);
            dm.push(f(b));
        }
        Self { t_max, m, dm }
    }

    fn total(&self) -> f64 {
        *self.m.last().unwrap()
    }

    fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.t_max);
        let n = Self::PANELS;
        let h = self.t_max / n as f64;
        let i = ((t / h) as usize).min(n - 1);
        let t0 = h * i as f64;
        let s = (t - t0) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (d0, d1) = (self.dm[i] * h, self.dm[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        m0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + d0 * (s3 - 2.0 * s2 + s)
            + m1 * (-2.0 * s3 + 3.0 * s2)
            + d1 * (s3 - s2)
    }
}

struct CutCdf {
    lo: f64,
    hi: f64,
    mid: f64,
    left: HalfCdf,
    right: HalfCdf,
}

impl CutCdf {
    fn build(params: &ModelParams, lo: f64, hi: f64) -> Self {
        let mid = 0.5 * (lo + hi);
        Self {
            lo,
            hi,
            mid,
            left: HalfCdf::build(params, lo, 1.0, (mid - lo).sqrt()),
            right: HalfCdf::build(params, hi, -1.0, (hi - mid).sqrt()),
        }
    }

    fn mass(&self) -> f64 {
        self.left.total() + self.right.total()
    }

    /// Mass of this cut below x, for x anywhere.
    fn below(&self, x: f64) -> f64 {
        if x <= self.lo {
            0.0
        } else if x >= self.hi {
            self.mass()
        } else if x <= self.mid {
            self.left.eval((x - self.lo).sqrt())
        } else {
            self.mass() - self.right.eval((self.hi - x).sqrt())
        }
    }
}

/// Precomputed CDF of the eigenvalue law, O(1) per evaluation.
pub struct SpectralCdf {
    bp: BranchPoints,
    c: f64,
    cuts: [CutCdf; 2],
}

impl SpectralCdf {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let bp = quartic_roots(params)?;
        let cuts = [
            CutCdf::build(params, bp.lambda[0], bp.lambda[1]),
            CutCdf::build(params, bp.lambda[2], bp.lambda[3]),
        ];
        Ok(Self { bp, c: params.c, cuts })
    }

    pub fn branch_points(&self) -> &BranchPoints {
        &self.bp
    }

    /// Interval masses of rho as integrated by the table.
    pub fn masses(&self) -> (f64, f64) {
        (self.cuts[0].mass(), self.cuts[1].mass())
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x >= self.bp.lambda[3] {
            return 1.0;
        }
        ((self.cuts[0].below(x) + self.cuts[1].below(x)) / self.c).clamp(0.0, 1.0)
    }

    pub fn eval_sorted(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

/// Aggregate view used by the command-line output: support, a density grid,
/// edge constants, and interval masses.
#[derive(Clone, Debug, Serialize)]
pub struct DensityProfile {
    pub support: [[f64; 2]; 2],
    pub rho_grid: Vec<(f64, f64)>,
    pub edge_constants: [f64; 4],
    pub masses: (f64, f64),
}

impl DensityProfile {
    pub fn compute(params: &ModelParams, grid: &[f64]) -> Result<Self> {
        let bp = quartic_roots(params)?;
        let rho_grid = grid
            .iter()
            .map(|&z| (z, params.c * density_f_unchecked(z, &bp, params)))
            .collect();
        Ok(Self {
            support: [
                [bp.lambda[0], bp.lambda[1]],
                [bp.lambda[2], bp.lambda[3]],
            ],
            rho_grid,
            edge_constants: edge_constants(params)?,
            masses: interval_masses(params)?,
        })
    }
}

fn density_f_unchecked(z: f64, bp: &BranchPoints, params: &ModelParams) -> f64 {
    let inside = (z > bp.lambda[0] && z < bp.lambda[1])
        || (z > bp.lambda[2] && z < bp.lambda[3]);
    if inside {
        rho_unchecked(z, params) / params.c
    } else {
        0.0
    }
}
