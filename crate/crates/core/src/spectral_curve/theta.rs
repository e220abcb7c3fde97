//! Antiderivatives of the labeled branches.
//!
//! `theta_j(z)` integrates the branch `xi_j` from its anchor (`lambda_4` for
//! j = 1, `lambda_{k_j}` for j = 2, 3) to `z` along a polyline that detours
//! through the upper half plane at height `h = lambda_1 / 10`:
//! anchor -> anchor + ih -> Re z + ih -> z. Each `theta_j` is real on the
//! real axis to the right of its anchor, so values in the lower half plane
//! and on the lower edge of the cuts follow by conjugation.
//!
//! Branch values along the legs come from the same path continuation as
//! `label_branches`; values on the horizontal line Im z = h are cached and
//! shared across calls, so scans over many evaluation points only ever extend
//! the line cache instead of restarting from the asymptotic regime.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quad;

use super::{
    quartic_roots, sheet_assignment, BranchPoints, BranchTracker, SheetAssignment,
};

/// Total absolute quadrature tolerance for one theta evaluation, split evenly
/// over the three legs of the path.
const THETA_TOL: f64 = 1e-9;
const LEG_TOL: f64 = THETA_TOL / 3.0;

/// f64 key with total ordering, for the continuation caches.
#[derive(Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn nearest<'a>(
    map: &'a BTreeMap<Key, [Complex64; 3]>,
    t: f64,
) -> Option<(f64, &'a [Complex64; 3])> {
    let below = map.range(..=Key(t)).next_back();
    let above = map.range(Key(t)..).next();
    match (below, above) {
        (Some((kb, vb)), Some((ka, va))) => Some(if (t - kb.0).abs() <= (ka.0 - t).abs() {
            (kb.0, vb)
        } else {
            (ka.0, va)
        }),
        (Some((k, v)), None) | (None, Some((k, v))) => Some((k.0, v)),
        (None, None) => None,
    }
}

/// Labeled branch values along one straight leg, keyed by the leg parameter;
/// each lookup continues from the nearest already-known point on the leg.
struct SegmentCache {
    p: Complex64,
    q: Complex64,
    map: BTreeMap<Key, [Complex64; 3]>,
}

impl SegmentCache {
    fn new(p: Complex64, q: Complex64, t0: f64, xi0: [Complex64; 3]) -> Self {
        let mut map = BTreeMap::new();
        map.insert(Key(t0), xi0);
        Self { p, q, map }
    }

    fn point(&self, t: f64) -> Complex64 {
        self.p + (self.q - self.p) * t
    }

    fn xi(&mut self, t: f64, params: &ModelParams) -> Result<[Complex64; 3]> {
        if let Some(v) = self.map.get(&Key(t)) {
            return Ok(*v);
        }
        let (t0, xi0) = nearest(&self.map, t).expect("segment cache is seeded");
        let mut tracker = BranchTracker::resume(params, self.point(t0), *xi0);
        tracker.advance_to(self.point(t))?;
        self.map.insert(Key(t), tracker.xi);
        Ok(tracker.xi)
    }
}

/// Runs one leg integral, catching continuation failures raised inside the
/// quadrature callback.
fn run_leg(
    mut f: impl FnMut(f64) -> Result<Complex64>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Complex64> {
    if lo == hi {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let caught: RefCell<Option<Error>> = RefCell::new(None);
    let val = quad::adaptive_gk(
        |t| match f(t) {
            Ok(v) => v,
            Err(e) => {
                caught.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        lo,
        hi,
        tol,
    );
    if let Some(e) = caught.into_inner() {
        return Err(e);
    }
    val
}

pub struct ThetaEvaluator {
    params: ModelParams,
    bp: BranchPoints,
    sheets: SheetAssignment,
    h: f64,
    line: RefCell<BTreeMap<Key, [Complex64; 3]>>,
    anchor_memo: RefCell<[Option<Complex64>; 3]>,
}

impl ThetaEvaluator {
    /// Two-cut instances only; the branch points fix the anchors and the
    /// detour height.
    pub fn new(params: &ModelParams) -> Result<Self> {
        let p = params.validate()?;
        let bp = quartic_roots(&p)?;
        let sheets = sheet_assignment(p.a)?;
        Ok(Self {
            params: p,
            bp,
            sheets,
            h: bp.lambda[0] / 10.0,
            line: RefCell::new(BTreeMap::new()),
            anchor_memo: RefCell::new([None; 3]),
        })
    }

    pub fn branch_points(&self) -> &BranchPoints {
        &self.bp
    }

    pub fn sheets(&self) -> SheetAssignment {
        self.sheets
    }

    /// Lower integration endpoint of theta_j.
    pub fn anchor(&self, j: usize) -> f64 {
        match j {
            1 => self.bp.lambda[3],
            2 => self.bp.lambda[self.sheets.k2 - 1],
            3 => self.bp.lambda[self.sheets.k3 - 1],
            _ => panic!("branch label must be 1, 2 or 3"),
        }
    }

    /// Labeled branch values at x + ih from the shared line cache.
    fn line_point(&self, x: f64) -> Result<[Complex64; 3]> {
        if let Some(v) = self.line.borrow().get(&Key(x)) {
            return Ok(*v);
        }
        let target = Complex64::new(x, self.h);
        let seed = nearest(&self.line.borrow(), x).map(|(x0, xi0)| (x0, *xi0));
        let xi = match seed {
            Some((x0, xi0)) => {
                let mut tr = BranchTracker::resume(&self.params, Complex64::new(x0, self.h), xi0);
                tr.advance_to(target)?;
                tr.xi
            }
            None => {
                let mut tr = BranchTracker::start(
                    &self.params,
                    x.abs().max(self.bp.lambda[3]),
                    Some(self.bp.lambda[3]),
                )?;
                tr.advance_to(target)?;
                tr.xi
            }
        };
        self.line.borrow_mut().insert(Key(x), xi);
        Ok(xi)
    }

    /// Integral of xi_j up the vertical leg from the anchor to anchor + ih;
    /// depends only on j, so it is computed once.
    fn anchor_leg(&self, j: usize) -> Result<Complex64> {
        if let Some(v) = self.anchor_memo.borrow()[j - 1] {
            return Ok(v);
        }
        let ax = self.anchor(j);
        let p = Complex64::new(ax, 0.0);
        let q = Complex64::new(ax, self.h);
        let seed = self.line_point(ax)?;
        let mut cache = SegmentCache::new(p, q, 1.0, seed);
        let dz = q - p;
        let params = self.params;
        let idx = j - 1;
        let val = run_leg(|t| Ok(cache.xi(t, &params)?[idx] * dz), 0.0, 1.0, LEG_TOL)?;
        self.anchor_memo.borrow_mut()[j - 1] = Some(val);
        Ok(val)
    }

    fn horizontal_leg(&self, j: usize, from_x: f64, to_x: f64) -> Result<Complex64> {
        if from_x == to_x {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let (lo, hi, sign) = if to_x >= from_x {
            (from_x, to_x, 1.0)
        } else {
            (to_x, from_x, -1.0)
        };
        let idx = j - 1;
        let val = run_leg(|x| Ok(self.line_point(x)?[idx]), lo, hi, LEG_TOL)?;
        Ok(sign * val)
    }

    fn vertical_leg(&self, j: usize, z: Complex64) -> Result<Complex64> {
        let p = Complex64::new(z.re, self.h);
        if z == p {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let seed = self.line_point(z.re)?;
        let mut cache = SegmentCache::new(p, z, 0.0, seed);
        let dz = z - p;
        let params = self.params;
        let idx = j - 1;
        run_leg(|t| Ok(cache.xi(t, &params)?[idx] * dz), 0.0, 1.0, LEG_TOL)
    }

    /// theta_j at any z != 0. Real z gives the boundary value from above;
    /// Im z < 0 is reached by reflection.
    pub fn theta(&self, j: usize, z: Complex64) -> Result<Complex64> {
        if !(1..=3).contains(&j) {
            return Err(Error::InvalidParameter(
                "branch label must be 1, 2 or 3".into(),
            ));
        }
        if z.norm() == 0.0 {
            return Err(Error::InvalidParameter(
                "theta is undefined at z = 0".into(),
            ));
        }
        if z.im < 0.0 {
            return Ok(self.theta(j, z.conj())?.conj());
        }
        let i1 = self.anchor_leg(j)?;
        let i2 = self.horizontal_leg(j, self.anchor(j), z.re)?;
        let i3 = self.vertical_leg(j, z)?;
        Ok(i1 + i2 + i3)
    }

    /// Boundary value from the upper half plane at real x.
    pub fn theta_plus(&self, j: usize, x: f64) -> Result<Complex64> {
        self.theta(j, Complex64::new(x, 0.0))
    }

    /// Boundary value from below: the conjugate, since each theta_j is real
    /// on the axis right of its anchor.
    pub fn theta_minus(&self, j: usize, x: f64) -> Result<Complex64> {
        Ok(self.theta_plus(j, x)?.conj())
    }

    /// theta_{j,+}(x) - theta_{j,-}(x) = 2i Im theta_{j,+}(x).
    pub fn jump(&self, j: usize, x: f64) -> Result<Complex64> {
        let plus = self.theta_plus(j, x)?;
        Ok(Complex64::new(0.0, 2.0 * plus.im))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OrderingViolation {
    pub j: usize,
    pub x: f64,
    pub margin: f64,
}

#[derive(Clone, Debug)]
pub struct ThetaOrderingReport {
    /// Smallest margin Re theta_1(x) - Re theta_1(lambda_{k_j}) - Re theta_j(x)
    /// seen over the grid.
    pub min_margin: f64,
    /// Grid points actually tested (those off the closed cut intervals).
    pub checked: usize,
    pub violations: Vec<OrderingViolation>,
}

impl ThetaOrderingReport {
    pub fn all_positive(&self) -> bool {
        self.checked > 0 && self.violations.is_empty()
    }
}

/// Verifies that on the positive axis away from the cut of sheet j, the real
/// part of theta_1 relative to its value at the cut edge dominates theta_j.
/// Grid points inside the closed cut interval are skipped: there the margin
/// is identically zero.
pub fn check_theta_orderings(params: &ModelParams, grid: &[f64]) -> Result<ThetaOrderingReport> {
    let ev = ThetaEvaluator::new(params)?;
    let bp = *ev.branch_points();
    let sheets = ev.sheets();
    let mut report = ThetaOrderingReport {
        min_margin: f64::INFINITY,
        checked: 0,
        violations: Vec::new(),
    };
    let pad = 1e-9 * bp.lambda[3];
    let mut theta1: Vec<(f64, f64)> = Vec::with_capacity(grid.len());
    for &x in grid {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ordering grid points must be positive reals, got {x}"
            )));
        }
        theta1.push((x, ev.theta_plus(1, x)?.re));
    }
    for (j, k) in [(2usize, sheets.k2), (3usize, sheets.k3)] {
        let cut_lo = bp.lambda[k - 2];
        let cut_hi = bp.lambda[k - 1];
        let base = ev.theta_plus(1, cut_hi)?.re;
        for &(x, t1) in &theta1 {
            if x >= cut_lo - pad && x <= cut_hi + pad {
                continue;
            }
            let margin = t1 - base - ev.theta_plus(j, x)?.re;
            report.checked += 1;
            if margin < report.min_margin {
                report.min_margin = margin;
            }
            if margin <= 0.0 {
                report.violations.push(OrderingViolation { j, x, margin });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const P_HEAVY: ModelParams = ModelParams { a: 10.0, beta: 0.5, c: 0.5 };
    const P_ASYM: ModelParams = ModelParams { a: 10.0, beta: 0.3, c: 0.5 };

    #[test]
    fn theta1_vanishes_at_its_anchor() {
        let ev = ThetaEvaluator::new(&P_HEAVY).unwrap();
        let lam4 = ev.branch_points().lambda[3];
        let v = ev.theta_plus(1, lam4).unwrap();
        assert!(v.norm() < 5e-9, "theta1(lambda4) = {v}");
    }

    #[test]
    fn jumps_match_the_interval_masses() {
        // c(1-beta) = 0.35 and c beta = 0.15 are distinct here, so a sheet
        // mix-up cannot cancel out
        let ev = ThetaEvaluator::new(&P_ASYM).unwrap();
        let lam = ev.branch_points().lambda;
        let want2 = Complex64::new(0.0, 2.0 * PI * 0.35);
        let want3 = Complex64::new(0.0, 2.0 * PI * 0.15);
        // theta_2 jumps below lambda_{k2 - 1} = lambda_1
        for x in [0.3 * lam[0], 0.5 * lam[0]] {
            let have = ev.jump(2, x).unwrap();
            assert!((have - want2).norm() < 1e-8, "theta2 jump at {x}: {have}");
        }
        // theta_3 jumps below lambda_{k3 - 1} = lambda_3, including points
        // under lambda_1 and inside the lower cut
        for x in [
            0.5 * lam[0],
            0.5 * (lam[0] + lam[1]),
            0.5 * (lam[1] + lam[2]),
        ] {
            let have = ev.jump(3, x).unwrap();
            assert!((have - want3).norm() < 1e-8, "theta3 jump at {x}: {have}");
        }
    }

    #[test]
    fn boundary_values_match_independent_integration() {
        // dense trapezoid references, good to ~1e-8
        let ev = ThetaEvaluator::new(&P_ASYM).unwrap();
        let lam = ev.branch_points().lambda;
        let t2 = ev.theta_plus(2, 0.5 * lam[0]).unwrap();
        let want2 = Complex64::new(1.9199137737306624, 1.0995574282515335);
        assert!((t2 - want2).norm() < 1e-6, "theta2: {t2} vs {want2}");
        let t3 = ev.theta_plus(3, 0.5 * (lam[1] + lam[2])).unwrap();
        let want3 = Complex64::new(1.598995215734736, 0.4712388975463721);
        assert!((t3 - want3).norm() < 1e-6, "theta3: {t3} vs {want3}");
    }

    #[test]
    fn mirrored_parameters_reproduce_theta_up_to_sheet_swap() {
        // a -> 1/a, beta -> 1-beta rescales z by 1/a and exchanges the roles
        // of sheets 2 and 3; theta is invariant under the substitution
        let ev = ThetaEvaluator::new(&P_ASYM).unwrap();
        let em = ThetaEvaluator::new(&P_ASYM.mirrored()).unwrap();
        let a = P_ASYM.a;
        for z in [Complex64::new(1.0, 0.5), Complex64::new(0.96, 0.0)] {
            let zm = z / a;
            assert!((ev.theta(1, z).unwrap() - em.theta(1, zm).unwrap()).norm() < 5e-9);
            assert!((ev.theta(2, z).unwrap() - em.theta(3, zm).unwrap()).norm() < 5e-9);
            assert!((ev.theta(3, z).unwrap() - em.theta(2, zm).unwrap()).norm() < 5e-9);
        }
    }

    #[test]
    fn real_part_equality_holds_on_the_cuts() {
        let ev = ThetaEvaluator::new(&P_HEAVY).unwrap();
        let lam = ev.branch_points().lambda;
        // lower cut, sheet 2 (a > 1)
        let x = 0.96;
        let lhs = ev.theta_plus(1, x).unwrap().re - ev.theta_plus(1, lam[1]).unwrap().re
            - ev.theta_plus(2, x).unwrap().re;
        assert!(lhs.abs() < 1e-8, "lower cut equality: {lhs}");
        // upper cut, sheet 3; theta_1 vanishes at its own anchor lambda_4
        let x = 5.0;
        let lhs = ev.theta_plus(1, x).unwrap().re - ev.theta_plus(1, lam[3]).unwrap().re
            - ev.theta_plus(3, x).unwrap().re;
        assert!(lhs.abs() < 1e-8, "upper cut equality: {lhs}");
    }

    #[test]
    fn ordering_margins_positive_off_the_cuts() {
        let mut grid = vec![0.02, 0.06, 0.10];
        for i in 0..21 {
            grid.push(0.2 + (23.0 - 0.2) * i as f64 / 20.0);
        }
        let report = check_theta_orderings(&P_HEAVY, &grid).unwrap();
        assert!(report.all_positive(), "violations: {:?}", report.violations);
        assert!(report.min_margin > 0.0);
        assert!(report.checked > 10);
    }

    #[test]
    fn ordering_margin_vanishes_with_three_halves_power() {
        let ev = ThetaEvaluator::new(&P_HEAVY).unwrap();
        let lam = ev.branch_points().lambda;
        let base = ev.theta_plus(1, lam[1]).unwrap().re;
        let margin = |eps: f64| {
            let x = lam[1] + eps;
            ev.theta_plus(1, x).unwrap().re - base - ev.theta_plus(2, x).unwrap().re
        };
        let m1 = margin(1e-3);
        let m4 = margin(4e-3);
        assert!(m1 > 0.0 && m4 > 0.0);
        let ratio = m4 / m1;
        // 3/2-power vanishing: ratio should be near 4^{3/2} = 8
        assert!(
            (4.7..13.6).contains(&ratio),
            "margin ratio {ratio} incompatible with a 3/2 power law"
        );
    }

    #[test]
    fn rejects_bad_arguments() {
        let ev = ThetaEvaluator::new(&P_HEAVY).unwrap();
        assert!(ev.theta(0, Complex64::new(1.0, 0.0)).is_err());
        assert!(ev.theta(4, Complex64::new(1.0, 0.0)).is_err());
        assert!(ev.theta(1, Complex64::new(0.0, 0.0)).is_err());
        let one_cut = ModelParams { a: 1.05, beta: 0.5, c: 0.5 };
        assert!(ThetaEvaluator::new(&one_cut).is_err());
    }

    #[test]
    fn lower_half_plane_is_the_reflection() {
        let ev = ThetaEvaluator::new(&P_HEAVY).unwrap();
        let z = Complex64::new(1.3, 0.7);
        let up = ev.theta(2, z).unwrap();
        let dn = ev.theta(2, z.conj()).unwrap();
        assert!((dn - up.conj()).norm() == 0.0);
    }
}
