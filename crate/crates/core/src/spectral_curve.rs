//! Branch structure of the cubic spectral curve.
//!
//! For parameters (a, beta, c) the Stieltjes transform of the limiting
//! spectral measure satisfies a cubic in `xi` with polynomial coefficients in
//! `z`:
//!
//! ```text
//! a z xi^3 + (A2 z + B2) xi^2 + (z + B1) xi + 1 = 0
//! ```
//!
//! with `A2 = 1 + a`, `B2 = a (1 - c)`, `B1 = 1 - c(1-beta) + a (1 - c beta)`.
//! The three solutions are labeled by their large-|z| behaviour:
//!
//! ```text
//! xi1 ~ -1/z          xi2 ~ -1 + c(1-beta)/z          xi3 ~ -1/a + c beta/z
//! ```
//!
//! and extended to the upper half plane by path tracking. Branch points are
//! the images of the real quartic roots gamma_1 < .. < gamma_4 under the
//! rational map `z(xi)`; their images 0 < lambda_1 < .. < lambda_4 bound the
//! support. The support splits into two intervals exactly when the quartic
//! discriminant is positive; a guard band around zero refuses to classify
//! parameter points too close to the merging transition.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::poly;

mod theta;

pub use theta::{check_theta_orderings, OrderingViolation, ThetaEvaluator, ThetaOrderingReport};

/// Relative guard band on the quartic discriminant: |delta| below
/// `GUARD * scale^4` (scale = largest coefficient magnitude) is treated as
/// too close to the one-cut/two-cut transition to classify.
pub const TRANSITION_GUARD: f64 = 1e-12;

/// Coefficients of the curve cubic other than the leading `a z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveCoefficients {
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

pub fn curve_coefficients(params: &ModelParams) -> CurveCoefficients {
    let ModelParams { a, beta, c } = *params;
    CurveCoefficients {
        a2: 1.0 + a,
        b1: 1.0 - c * (1.0 - beta) + a * (1.0 - c * beta),
        b2: a * (1.0 - c),
    }
}

/// Ascending coefficients of the cubic in xi at fixed z.
fn cubic_at(z: Complex64, k: &CurveCoefficients, a: f64) -> [Complex64; 4] {
    [
        Complex64::new(1.0, 0.0),
        z + k.b1,
        k.a2 * z + k.b2,
        a * z,
    ]
}

fn horner(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// All three solutions of the curve cubic at `z`, in no particular order.
pub fn solve_cubic_at(z: Complex64, params: &ModelParams) -> Result<[Complex64; 3]> {
    params.validate()?;
    solve_cubic(z, &curve_coefficients(params), params.a)
}

fn solve_cubic(z: Complex64, k: &CurveCoefficients, a: f64) -> Result<[Complex64; 3]> {
    if z.norm() == 0.0 {
        return Err(Error::InvalidParameter(
            "curve cubic degenerates at z = 0 (leading coefficient vanishes)".into(),
        ));
    }
    let c = cubic_at(z, k, a);
    let p2 = c[2] / c[3];
    let p1 = c[1] / c[3];
    let p0 = c[0] / c[3];
    let shift = p2 / 3.0;
    // depressed form t^3 + p t + q, xi = t - p2/3
    let p = p1 - p2 * p2 / 3.0;
    let q = p2 * (2.0 * p2 * p2 / 9.0 - p1) / 3.0 + p0;
    let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let cand_a = -q / 2.0 + s;
    let cand_b = -q / 2.0 - s;
    // larger branch avoids cancellation in u^3
    let u3 = if cand_a.norm() >= cand_b.norm() { cand_a } else { cand_b };
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    if u3.norm() == 0.0 {
        for r in roots.iter_mut() {
            *r = -shift;
        }
    } else {
        let u = u3.cbrt();
        let omega = Complex64::new(-0.5, 0.75f64.sqrt());
        let mut w = Complex64::new(1.0, 0.0);
        for r in roots.iter_mut() {
            let uk = u * w;
            *r = uk - p / (3.0 * uk) - shift;
            w *= omega;
        }
    }
    let dc = [c[1], 2.0 * c[2], 3.0 * c[3]];
    for r in roots.iter_mut() {
        // Cardano can lose several digits to cancellation when |z| is far
        // from 1; Newton from a rough start needs a few extra iterations
        for _ in 0..8 {
            let f = horner(&c, *r);
            let df = horner(&dc, *r);
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            *r -= step;
            if step.norm() <= 1e-16 * (1.0 + r.norm()) {
                break;
            }
        }
    }
    for &r in &roots {
        let scale = monomial_scale(&c, r);
        if horner(&c, r).norm() > 1e-10 * scale {
            return Err(Error::RootSolve(format!(
                "cubic solve at z = {z} left residual above 1e-10 relative at xi = {r}"
            )));
        }
    }
    debug_assert!(vieta_ok(&roots, &c), "cubic root symmetric functions drifted at z = {z}");
    Ok(roots)
}

fn monomial_scale(coeffs: &[Complex64], x: Complex64) -> f64 {
    let mut m: f64 = 0.0;
    let mut xp = 1.0;
    for c in coeffs {
        m = m.max(c.norm() * xp);
        xp *= x.norm();
    }
    m.max(f64::MIN_POSITIVE)
}

fn vieta_ok(r: &[Complex64; 3], c: &[Complex64; 4]) -> bool {
    let e1 = r[0] + r[1] + r[2];
    let e2 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
    let e3 = r[0] * r[1] * r[2];
    let t1 = -c[2] / c[3];
    let t2 = c[1] / c[3];
    let t3 = -c[0] / c[3];
    let big = r.iter().map(|x| x.norm()).fold(1.0f64, f64::max);
    // near a double root each polished root is only good to sqrt(eps), so
    // symmetric functions drift accordingly; widen by the collision
    // conditioning instead of letting the check fire at branch points
    let sep = min_separation(r).max(f64::MIN_POSITIVE);
    let cond = 1.0 + big / sep;
    let tol = 1e-10 * cond;
    (e1 - t1).norm() <= tol * (t1.norm() + big)
        && (e2 - t2).norm() <= tol * (t2.norm() + big * big)
        && (e3 - t3).norm() <= tol * (t3.norm() + big * big * big)
}

/// Branch values at one point, labeled by large-|z| asymptotics.
#[derive(Clone, Copy, Debug)]
pub struct XiTriple {
    pub xi1: Complex64,
    pub xi2: Complex64,
    pub xi3: Complex64,
}

impl XiTriple {
    pub fn as_array(&self) -> [Complex64; 3] {
        [self.xi1, self.xi2, self.xi3]
    }

    /// Branch by 1-based label.
    pub fn branch(&self, j: usize) -> Complex64 {
        match j {
            1 => self.xi1,
            2 => self.xi2,
            3 => self.xi3,
            _ => panic!("branch label must be 1, 2 or 3"),
        }
    }
}

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Total-distance-minimizing assignment of new roots to previous values;
/// returns the permutation and the largest single move it implies.
fn match_roots(prev: &[Complex64; 3], next: &[Complex64; 3]) -> ([usize; 3], f64) {
    let mut best = PERMS[0];
    let mut best_total = f64::INFINITY;
    for perm in PERMS {
        let total: f64 = (0..3).map(|i| (next[perm[i]] - prev[i]).norm()).sum();
        if total < best_total {
            best_total = total;
            best = perm;
        }
    }
    let max_move = (0..3)
        .map(|i| (next[best[i]] - prev[i]).norm())
        .fold(0.0, f64::max);
    (best, max_move)
}

fn min_separation(xs: &[Complex64; 3]) -> f64 {
    let d01 = (xs[0] - xs[1]).norm();
    let d02 = (xs[0] - xs[2]).norm();
    let d12 = (xs[1] - xs[2]).norm();
    d01.min(d02).min(d12)
}

/// Path continuation of the labeled triple. Steps are accepted only when the
/// largest root movement is at most a third of the minimal root separation at
/// both ends of the step, so labels cannot silently exchange.
pub(crate) struct BranchTracker {
    k: CurveCoefficients,
    a: f64,
    pub(crate) z: Complex64,
    pub(crate) xi: [Complex64; 3],
}

impl BranchTracker {
    /// Start on the imaginary axis high enough that the asymptotic labels
    /// identify the roots unambiguously.
    pub(crate) fn start(
        params: &ModelParams,
        target_scale: f64,
        upper_edge: Option<f64>,
    ) -> Result<Self> {
        let ModelParams { a, beta, c } = *params;
        let k = curve_coefficients(params);
        let edge = upper_edge.unwrap_or_else(|| a.max(1.0) * (1.0 + c.sqrt()).powi(2));
        let height = target_scale.abs().max(1.0);
        let mut t = 10f64.max(10.0 * edge);
        for _ in 0..46 {
            let z0 = Complex64::new(0.0, t * height);
            let roots = solve_cubic(z0, &k, a)?;
            let labels = [
                -1.0 / z0,
                Complex64::new(-1.0, 0.0) + c * (1.0 - beta) / z0,
                Complex64::new(-1.0 / a, 0.0) + c * beta / z0,
            ];
            let (assign, max_move) = match_roots(&labels, &roots);
            if 3.0 * max_move <= min_separation(&labels) {
                let xi = [roots[assign[0]], roots[assign[1]], roots[assign[2]]];
                return Ok(Self { k, a, z: z0, xi });
            }
            t *= 2.0;
        }
        Err(Error::BranchTracking(
            "asymptotic labels failed to separate at large |z|".into(),
        ))
    }

    /// Resume from a point whose labeled triple is already known.
    pub(crate) fn resume(params: &ModelParams, z: Complex64, xi: [Complex64; 3]) -> Self {
        Self {
            k: curve_coefficients(params),
            a: params.a,
            z,
            xi,
        }
    }

    pub(crate) fn advance_to(&mut self, w: Complex64) -> Result<()> {
        const MAX_STEPS: usize = 200_000;
        let mut steps = 0usize;
        while self.z != w {
            let mut target = w;
            loop {
                steps += 1;
                if steps > MAX_STEPS {
                    return Err(Error::BranchTracking(
                        "path tracking exceeded its step budget".into(),
                    ));
                }
                let roots = solve_cubic(target, &self.k, self.a)?;
                let (assign, max_move) = match_roots(&self.xi, &roots);
                let cand = [roots[assign[0]], roots[assign[1]], roots[assign[2]]];
                let sep = min_separation(&self.xi).min(min_separation(&cand));
                if 3.0 * max_move <= sep || max_move == 0.0 {
                    self.xi = cand;
                    self.z = target;
                    break;
                }
                let next = self.z + (target - self.z) * 0.5;
                if (next - self.z).norm() < 1e-13 * (1.0 + self.z.norm() + w.norm()) {
                    return Err(Error::BranchTracking(format!(
                        "continuation step underflow near z = {target}"
                    )));
                }
                target = next;
            }
        }
        Ok(())
    }

    pub(crate) fn triple(&self) -> XiTriple {
        XiTriple {
            xi1: self.xi[0],
            xi2: self.xi[1],
            xi3: self.xi[2],
        }
    }
}

/// Labeled branch values at `z` in the closed upper half plane, continued
/// from the asymptotic labels along a straight path from the imaginary axis.
/// Real `z` yields the boundary values from above; the lower half plane
/// follows by conjugation and is rejected here.
pub fn label_branches(z: Complex64, params: &ModelParams) -> Result<XiTriple> {
    params.validate()?;
    if z.im < 0.0 {
        return Err(Error::InvalidParameter(
            "branch labels are continued through the upper half plane; conjugate for Im z < 0"
                .into(),
        ));
    }
    if z.norm() == 0.0 {
        return Err(Error::InvalidParameter(
            "branch labels are undefined at z = 0".into(),
        ));
    }
    let upper = quartic_roots(params).ok().map(|bp| bp.lambda[3]);
    let mut tracker = BranchTracker::start(params, z.norm(), upper)?;
    tracker.advance_to(z)?;
    Ok(tracker.triple())
}

/// Upper boundary value of the first branch at real x: the cubic root with
/// positive imaginary part. Errors off the support, where all roots are real.
pub fn xi1_plus(x: f64, params: &ModelParams) -> Result<Complex64> {
    params.validate()?;
    if !(x > 0.0) {
        return Err(Error::OffSupport { z: x });
    }
    let roots = solve_cubic_at(Complex64::new(x, 0.0), params)?;
    let mut best = roots[0];
    for r in roots {
        if r.im > best.im {
            best = r;
        }
    }
    if best.im <= 1e-9 * (1.0 + best.norm()) {
        return Err(Error::OffSupport { z: x });
    }
    Ok(best)
}

/// Ascending coefficients of the branch-point quartic in gamma.
pub fn quartic_coefficients(params: &ModelParams) -> [f64; 5] {
    let ModelParams { a, beta, c } = *params;
    [
        1.0,
        2.0 * (1.0 + a),
        1.0 - c * (1.0 - beta) + a * a * (1.0 - c * beta) + 4.0 * a,
        2.0 * (a * a * (1.0 - c * beta) + a * (1.0 - c * (1.0 - beta))),
        a * a * (1.0 - c),
    ]
}

fn guarded_discriminant(params: &ModelParams) -> Result<f64> {
    let q = quartic_coefficients(params);
    let scale = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let delta = poly::quartic_discriminant(&q);
    let band = TRANSITION_GUARD * scale.powi(4);
    if delta.abs() < band {
        return Err(Error::NearTransition { delta, band });
    }
    Ok(delta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    OneCut,
    TwoCut,
}

/// Support topology from the sign of the quartic discriminant. `a = 1` is a
/// scalar covariance, always one cut; otherwise a positive discriminant means
/// two intervals, with a guard band refusing calls too close to the merge.
pub fn classify(params: &ModelParams) -> Result<Regime> {
    params.validate()?;
    if params.is_degenerate() {
        return Ok(Regime::OneCut);
    }
    let delta = guarded_discriminant(params)?;
    Ok(if delta > 0.0 { Regime::TwoCut } else { Regime::OneCut })
}

/// Branch points of the curve in both planes, two-cut regime only.
#[derive(Clone, Copy, Debug)]
pub struct BranchPoints {
    /// Quartic roots in the xi plane, ascending; all negative.
    pub gamma: [f64; 4],
    /// Support endpoints, 0 < lambda[0] < lambda[1] < lambda[2] < lambda[3];
    /// the support is the union of the first and last pair.
    pub lambda: [f64; 4],
    /// Quartic discriminant, positive here.
    pub delta: f64,
}

pub fn quartic_roots(params: &ModelParams) -> Result<BranchPoints> {
    params.validate()?;
    if params.is_degenerate() {
        return Err(Error::DegenerateCovariance);
    }
    let delta = guarded_discriminant(params)?;
    if delta < 0.0 {
        return Err(Error::NotTwoCut { delta });
    }
    let q = quartic_coefficients(params);
    let roots = poly::roots(&q)?;
    let mut gamma = [0.0f64; 4];
    for (g, r) in gamma.iter_mut().zip(&roots) {
        if r.im.abs() > 1e-7 * (1.0 + r.re.abs()) {
            return Err(Error::RootSolve(format!(
                "branch-point quartic has a non-real root {r} despite a positive discriminant"
            )));
        }
        *g = r.re;
    }
    gamma.sort_by(f64::total_cmp);
    if gamma[3] >= 0.0 {
        return Err(Error::RootSolve(
            "branch-point quartic produced a non-negative root".into(),
        ));
    }
    let mut lambda = [0.0f64; 4];
    for (l, &g) in lambda.iter_mut().zip(&gamma) {
        *l = lambda_of_gamma(g, params)?;
    }
    if lambda[0] <= 0.0 || lambda.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::RootSolve(
            "support endpoints failed to come out positive and increasing".into(),
        ));
    }
    Ok(BranchPoints { gamma, lambda, delta })
}

/// The rational map z(xi) at a real point away from its poles {0, -1, -1/a}.
pub fn lambda_of_gamma(g: f64, params: &ModelParams) -> Result<f64> {
    let guard = 1e-12 * (1.0 + g.abs());
    if g.abs() < guard || (1.0 + g).abs() < guard || (1.0 + params.a * g).abs() < guard {
        return Err(Error::InvalidParameter(format!(
            "z map has a pole at xi = {g}"
        )));
    }
    Ok(z_map(g, params))
}

/// z(xi) = -1/xi + c(1-beta)/(1+xi) + c a beta/(1+a xi); poles are the
/// caller's concern.
pub fn z_map(xi: f64, params: &ModelParams) -> f64 {
    let ModelParams { a, beta, c } = *params;
    -1.0 / xi + c * (1.0 - beta) / (1.0 + xi) + c * a * beta / (1.0 + a * xi)
}

pub fn z_map_second_derivative(xi: f64, params: &ModelParams) -> f64 {
    let ModelParams { a, beta, c } = *params;
    -2.0 / xi.powi(3)
        + 2.0 * c * (1.0 - beta) / (1.0 + xi).powi(3)
        + 2.0 * c * a.powi(3) * beta / (1.0 + a * xi).powi(3)
}

/// Which support interval each of the two non-principal sheets closes on:
/// sheet 2 meets sheet 1 on the cut ending at lambda_{k2}, sheet 3 on the cut
/// ending at lambda_{k3}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SheetAssignment {
    pub k2: usize,
    pub k3: usize,
}

pub fn sheet_assignment(a: f64) -> Result<SheetAssignment> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter("a must be positive".into()));
    }
    if a == 1.0 {
        return Err(Error::DegenerateCovariance);
    }
    Ok(if a > 1.0 {
        SheetAssignment { k2: 2, k3: 4 }
    } else {
        SheetAssignment { k2: 4, k3: 2 }
    })
}

/// Ascending coefficients of the curve discriminant in z, a real quartic
/// whose roots are the support endpoints: it equals
/// `(1-a)^2 (z-lambda_1)..(z-lambda_4)` and is negative exactly on the open
/// support.
pub fn d3_coefficients(params: &ModelParams) -> [f64; 5] {
    let a = params.a;
    let CurveCoefficients { a2, b1, b2 } = curve_coefficients(params);
    let c0 = b1 * b1 * b2 * b2 - 4.0 * b2.powi(3);
    let c1 = 2.0 * b1 * b2 * b2 + 2.0 * a2 * b2 * b1 * b1 - 12.0 * a2 * b2 * b2
        - 4.0 * a * b1.powi(3)
        + 18.0 * a * b1 * b2;
    let c2 = b2 * b2 + a2 * a2 * b1 * b1 + 4.0 * a2 * b1 * b2 - 12.0 * a2 * a2 * b2
        - 12.0 * a * b1 * b1
        + 18.0 * a * b2
        + 18.0 * a * a2 * b1
        - 27.0 * a * a;
    let c3 = 2.0 * a2 * a2 * b1 + 2.0 * a2 * b2 - 4.0 * a2.powi(3) - 12.0 * a * b1
        + 18.0 * a * a2;
    let c4 = (1.0 - a) * (1.0 - a);
    [c0, c1, c2, c3, c4]
}

pub fn d3(z: f64, params: &ModelParams) -> f64 {
    poly::eval(&d3_coefficients(params), z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const P_HEAVY: ModelParams = ModelParams { a: 10.0, beta: 0.5, c: 0.5 };
    const P_SPARSE: ModelParams = ModelParams { a: 10.0, beta: 0.5, c: 0.05 };
    const P_MID: ModelParams = ModelParams { a: 4.0, beta: 0.3, c: 0.2 };

    const GAMMA_HEAVY: [f64; 4] = [
        -2.4156489350816944,
        -0.61607161778278869,
        -0.20162695689193535,
        -0.066652490243581518,
    ];
    const LAMBDA_HEAVY: [f64; 4] = [
        0.12940888475156376,
        1.7899221307505851,
        2.8128138756690181,
        22.767855108828833,
    ];
    const LAMBDA_SPARSE: [f64; 4] = [
        0.68582589604509869,
        1.3084415580091832,
        7.1160922108475901,
        13.439640335098128,
    ];
    const GAMMA_MID: [f64; 4] = [
        -1.64159863944246,
        -0.71222509566552304,
        -0.33304006682240537,
        -0.20063619806961155,
    ];

    #[test]
    fn coefficients_match_hand_values() {
        let k = curve_coefficients(&P_MID);
        assert_relative_eq!(k.a2, 5.0, max_relative = 1e-15);
        assert_relative_eq!(k.b2, 3.2, max_relative = 1e-15);
        assert_relative_eq!(k.b1, 4.62, max_relative = 1e-15);
        let q = quartic_coefficients(&P_HEAVY);
        let expect = [1.0, 22.0, 115.75, 165.0, 50.0];
        for (have, want) in q.iter().zip(&expect) {
            assert_relative_eq!(have, want, max_relative = 1e-15);
        }
    }

    #[test]
    fn cubic_roots_match_reference_point() {
        let z = Complex64::new(1.0, 0.5);
        let roots = solve_cubic_at(z, &P_HEAVY).unwrap();
        let expect = [
            Complex64::new(-0.13775955983756694, -0.0041337432349930569),
            Complex64::new(-0.89051227105122193, -0.30021716134662862),
            Complex64::new(-0.47172816911121113, 0.50435090458162168),
        ];
        for e in expect {
            let nearest = roots
                .iter()
                .map(|r| (r - e).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-12, "no root near {e}: {roots:?}");
        }
    }

    #[test]
    fn cubic_solve_handles_tiny_z() {
        for z in [Complex64::new(1e-8, 0.0), Complex64::new(0.0, 1e-8)] {
            let roots = solve_cubic_at(z, &P_MID).unwrap();
            // one root is huge (~ -B2/(a z)); Vieta product fixes its scale
            let prod: Complex64 = roots.iter().product();
            let want = -1.0 / (P_MID.a * z);
            assert!((prod - want).norm() <= 1e-8 * want.norm());
        }
        assert!(solve_cubic_at(Complex64::new(0.0, 0.0), &P_MID).is_err());
    }

    #[test]
    fn cubic_roots_collide_at_branch_point() {
        let z = Complex64::new(LAMBDA_HEAVY[1], 0.0);
        let roots = solve_cubic_at(z, &P_HEAVY).unwrap();
        let near: Vec<_> = roots
            .iter()
            .filter(|r| (*r - Complex64::new(GAMMA_HEAVY[1], 0.0)).norm() < 1e-6)
            .collect();
        assert_eq!(near.len(), 2, "expected a double root at gamma_2: {roots:?}");
    }

    #[test]
    fn labels_match_tracked_reference() {
        let t = label_branches(Complex64::new(1.0, 0.5), &P_HEAVY).unwrap();
        let e1 = Complex64::new(-0.47172816911121113, 0.50435090458162168);
        let e2 = Complex64::new(-0.89051227105122193, -0.30021716134662862);
        let e3 = Complex64::new(-0.13775955983756694, -0.0041337432349930569);
        assert!((t.xi1 - e1).norm() < 1e-9);
        assert!((t.xi2 - e2).norm() < 1e-9);
        assert!((t.xi3 - e3).norm() < 1e-9);
    }

    #[test]
    fn labels_order_on_real_axis_beyond_support() {
        let t = label_branches(Complex64::new(25.0, 0.0), &P_HEAVY).unwrap();
        for xi in t.as_array() {
            assert!(xi.im.abs() < 1e-10);
        }
        // a > 1: xi1 > xi3 > xi2 to the right of the support
        assert!(t.xi1.re > t.xi3.re && t.xi3.re > t.xi2.re);
        assert_relative_eq!(t.xi1.re, -0.05090504535257718, max_relative = 1e-9);
        assert_relative_eq!(t.xi2.re, -0.9896994658568636, max_relative = 1e-9);
        assert_relative_eq!(t.xi3.re, -0.0793954887905596, max_relative = 1e-9);
    }

    #[test]
    fn sheets_glue_across_the_lower_cut() {
        // interior of [lambda_1, lambda_2]: xi1 and xi2 are a conjugate pair
        // (a > 1), xi3 stays real
        let x = 0.95966550775107442;
        let t = label_branches(Complex64::new(x, 0.0), &P_HEAVY).unwrap();
        assert!(t.xi1.im > 0.0);
        assert!((t.xi2 - t.xi1.conj()).norm() < 1e-9);
        assert!(t.xi3.im.abs() < 1e-10);
        // boundary value from above matches the frozen density reference
        let xi = xi1_plus(x, &P_HEAVY).unwrap();
        assert_relative_eq!(
            xi.im,
            std::f64::consts::PI * 0.14418213731555314,
            max_relative = 1e-9
        );
    }

    #[test]
    fn labels_reject_lower_half_plane() {
        assert!(label_branches(Complex64::new(1.0, -0.5), &P_HEAVY).is_err());
    }

    #[test]
    fn xi1_plus_errors_off_support() {
        for x in [0.05, 2.3, LAMBDA_HEAVY[3] + 1.0] {
            match xi1_plus(x, &P_HEAVY) {
                Err(Error::OffSupport { .. }) => {}
                other => panic!("expected off-support error at {x}, got {other:?}"),
            }
        }
        assert!(xi1_plus(0.95966550775107442, &P_HEAVY).is_ok());
    }

    #[test]
    fn quartic_roots_match_reference() {
        let bp = quartic_roots(&P_HEAVY).unwrap();
        for (have, want) in bp.gamma.iter().zip(&GAMMA_HEAVY) {
            assert_relative_eq!(have, want, max_relative = 1e-9);
        }
        for (have, want) in bp.lambda.iter().zip(&LAMBDA_HEAVY) {
            assert_relative_eq!(have, want, max_relative = 1e-9);
        }
        assert_relative_eq!(bp.delta, 1292806448.4375, max_relative = 1e-9);

        let bp = quartic_roots(&P_SPARSE).unwrap();
        for (have, want) in bp.lambda.iter().zip(&LAMBDA_SPARSE) {
            assert_relative_eq!(have, want, max_relative = 1e-9);
        }
        assert_relative_eq!(bp.delta, 39134171.189671875, max_relative = 1e-9);

        let bp = quartic_roots(&P_MID).unwrap();
        for (have, want) in bp.gamma.iter().zip(&GAMMA_MID) {
            assert_relative_eq!(have, want, max_relative = 1e-9);
        }
        assert_relative_eq!(bp.delta, 8910.00649728, max_relative = 1e-9);
    }

    #[test]
    fn classify_known_instances() {
        assert_eq!(classify(&P_HEAVY).unwrap(), Regime::TwoCut);
        assert_eq!(classify(&P_SPARSE).unwrap(), Regime::TwoCut);
        assert_eq!(classify(&P_MID).unwrap(), Regime::TwoCut);
        let near_scalar = ModelParams::new(1.05, 0.5, 0.5).unwrap();
        assert_eq!(classify(&near_scalar).unwrap(), Regime::OneCut);
        let scalar = ModelParams::new(1.0, 0.3, 0.25).unwrap();
        assert_eq!(classify(&scalar).unwrap(), Regime::OneCut);
        assert!(matches!(
            quartic_roots(&scalar),
            Err(Error::DegenerateCovariance)
        ));
        assert!(matches!(
            quartic_roots(&near_scalar),
            Err(Error::NotTwoCut { .. })
        ));
    }

    #[test]
    fn classify_is_mirror_symmetric() {
        for p in [P_HEAVY, P_SPARSE, P_MID] {
            assert_eq!(classify(&p).unwrap(), classify(&p.mirrored()).unwrap());
        }
    }

    #[test]
    fn guard_band_fires_at_the_transition() {
        // bisect a between a one-cut and a two-cut instance until the
        // discriminant lands inside the guard band
        let mut lo = 1.05f64;
        let mut hi = 4.0f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let p = ModelParams::new(mid, 0.3, 0.2).unwrap();
            match classify(&p) {
                Ok(Regime::OneCut) => lo = mid,
                Ok(Regime::TwoCut) => hi = mid,
                Err(Error::NearTransition { delta, band }) => {
                    assert!(delta.abs() < band);
                    return;
                }
                Err(e) => panic!("unexpected error at a = {mid}: {e}"),
            }
            if hi - lo < f64::EPSILON {
                break;
            }
        }
        panic!("bisection never entered the guard band");
    }

    #[test]
    fn discriminant_curve_matches_hand_values() {
        let coeffs = d3_coefficients(&P_HEAVY);
        let expect = [1201.5625, -10436.25, 9183.0625, -2227.5, 81.0];
        for (have, want) in coeffs.iter().zip(&expect) {
            assert_relative_eq!(have, want, max_relative = 1e-12);
        }
        // constant term identity a^2 (1-c)^2 (B1^2 - 4 B2) > 0
        let k = curve_coefficients(&P_HEAVY);
        let d2 = k.b1 * k.b1 - 4.0 * k.b2;
        assert_relative_eq!(
            d3(0.0, &P_HEAVY),
            P_HEAVY.a.powi(2) * (1.0 - P_HEAVY.c).powi(2) * d2,
            max_relative = 1e-12
        );
        assert!(d3(0.0, &P_HEAVY) > 0.0);
    }

    #[test]
    fn discriminant_curve_agrees_with_factored_form() {
        let bp = quartic_roots(&P_HEAVY).unwrap();
        for z in [1.0, 0.5, 2.3, 5.0, 30.0] {
            let factored: f64 = (1.0 - P_HEAVY.a).powi(2)
                * bp.lambda.iter().map(|l| z - l).product::<f64>();
            assert_relative_eq!(d3(z, &P_HEAVY), factored, max_relative = 1e-8);
        }
        assert_relative_eq!(d3(1.0, &P_HEAVY), -2198.125, max_relative = 1e-10);
    }

    #[test]
    fn discriminant_curve_sign_tracks_support() {
        let bp = quartic_roots(&P_HEAVY).unwrap();
        let scale: f64 = d3_coefficients(&P_HEAVY)
            .iter()
            .map(|c| c.abs())
            .fold(0.0, f64::max);
        for k in 0..4 {
            assert!(d3(bp.lambda[k], &P_HEAVY).abs() <= 1e-8 * scale * bp.lambda[k].powi(4).max(1.0));
        }
        // negative inside the cuts
        assert!(d3(0.5 * (bp.lambda[0] + bp.lambda[1]), &P_HEAVY) < 0.0);
        assert!(d3(0.5 * (bp.lambda[2] + bp.lambda[3]), &P_HEAVY) < 0.0);
        // positive in the gap and outside
        assert!(d3(0.5 * (bp.lambda[1] + bp.lambda[2]), &P_HEAVY) > 0.0);
        assert!(d3(0.5 * bp.lambda[0], &P_HEAVY) > 0.0);
        assert!(d3(bp.lambda[3] + 1.0, &P_HEAVY) > 0.0);
    }

    #[test]
    fn branch_points_scale_under_mirror() {
        for p in [P_HEAVY, P_MID, ModelParams::new(10.0, 0.3, 0.5).unwrap()] {
            let bp = quartic_roots(&p).unwrap();
            let bm = quartic_roots(&p.mirrored()).unwrap();
            for k in 0..4 {
                assert_relative_eq!(bm.gamma[k], p.a * bp.gamma[k], max_relative = 1e-9);
                assert_relative_eq!(bm.lambda[k], bp.lambda[k] / p.a, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn sheet_assignment_follows_a() {
        assert_eq!(
            sheet_assignment(4.0).unwrap(),
            SheetAssignment { k2: 2, k3: 4 }
        );
        assert_eq!(
            sheet_assignment(0.25).unwrap(),
            SheetAssignment { k2: 4, k3: 2 }
        );
        assert!(matches!(
            sheet_assignment(1.0),
            Err(Error::DegenerateCovariance)
        ));
        for a in [0.3, 2.5, 7.0] {
            assert_eq!(
                sheet_assignment(a).unwrap().k2,
                sheet_assignment(1.0 / a).unwrap().k3
            );
        }
    }

    #[test]
    fn z_map_second_derivative_matches_finite_differences() {
        let bp = quartic_roots(&P_HEAVY).unwrap();
        for &g in &bp.gamma {
            let h = 1e-5 * (1.0 + g.abs());
            let fd = (z_map(g + h, &P_HEAVY) - 2.0 * z_map(g, &P_HEAVY)
                + z_map(g - h, &P_HEAVY))
                / (h * h);
            assert_relative_eq!(
                z_map_second_derivative(g, &P_HEAVY),
                fd,
                max_relative = 1e-5
            );
        }
    }

    #[test]
    fn z_map_pole_guard() {
        assert!(lambda_of_gamma(0.0, &P_MID).is_err());
        assert!(lambda_of_gamma(-1.0, &P_MID).is_err());
        assert!(lambda_of_gamma(-0.25, &P_MID).is_err());
        assert!(lambda_of_gamma(-0.5, &P_MID).is_ok());
    }
}
