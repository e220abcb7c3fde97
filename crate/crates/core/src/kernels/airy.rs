//! Airy function of the first kind, from scratch.
//!
//! Two regimes with a single switchover at |x| = 9: the Maclaurin series
//! below, the Poincare asymptotic expansions above. The series suffers
//! catastrophic cancellation for negative x (terms reach ~3e6 at x = -9 while
//! the value is ~0.05), so it is accumulated in double-double arithmetic;
//! that keeps the series accurate to full f64 precision over the whole band.
//! At |x| = 9 the asymptotic argument is zeta = 18 and the optimally
//! truncated expansion floors near 1e-15 relative, so both regimes overlap
//! cleanly. In the oscillatory region x < 0 accuracy is relative to the local
//! envelope ~|x|^(-1/4), not to the (arbitrarily small) value near a zero.
//!
//! Guaranteed range [-30, 30]; outside it the positive side underflows badly
//! and the negative side would need a longer phase reduction, so it is an
//! error by contract.

use crate::dd::Dd;
use crate::error::{Error, Result};

/// Ai(0) = 3^(-2/3)/Gamma(2/3) as a double-double.
const AI0: Dd = Dd {
    hi: 0.3550280538878172,
    lo: 2.05233632436212e-17,
};
/// Ai'(0) = -3^(-1/3)/Gamma(1/3) as a double-double.
const AIP0: Dd = Dd {
    hi: -0.2588194037928068,
    lo: 2.522243111610832e-17,
};

const SWITCH: f64 = 9.0;
const RANGE: f64 = 30.0;

/// (Ai(x), Ai'(x)) for x in [-30, 30].
pub fn airy(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() || x.abs() > RANGE {
        return Err(Error::InvalidParameter(format!(
            "airy argument {x} outside the guaranteed range [-30, 30]"
        )));
    }
    if x.abs() <= SWITCH {
        Ok(series(x))
    } else if x > 0.0 {
        Ok(asymptotic_positive(x))
    } else {
        Ok(asymptotic_negative(x))
    }
}

/// Maclaurin series Ai = Ai(0) f + Ai'(0) g with
/// f = sum 3^k (1/3)_k x^(3k)/(3k)! and g = sum 3^k (2/3)_k x^(3k+1)/(3k+1)!,
/// all accumulation in double-double.
fn series(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (AI0.to_f64(), AIP0.to_f64());
    }
    let x3 = Dd::from_prod(x, x) * x;
    let mut tf = Dd::from(1.0);
    let mut tg = Dd::from(x);
    let mut f = tf;
    let mut g = tg;
    let mut fp = Dd::from(0.0);
    let mut gp = Dd::from(1.0);
    let mut peak = 1.0f64;
    for k in 1..160 {
        let k3 = 3.0 * k as f64;
        tf = tf * x3 / ((k3 - 1.0) * k3);
        tg = tg * x3 / (k3 * (k3 + 1.0));
        f = f + tf;
        g = g + tg;
        // division stays in double-double: the huge cancellation at x near 9
        // leaves no headroom for an f64-rounded factor
        fp = fp + tf * k3 / x;
        gp = gp + tg * (k3 + 1.0) / x;
        let mag = tf.to_f64().abs().max(tg.to_f64().abs());
        peak = peak.max(mag);
        if mag < 1e-35 * peak {
            break;
        }
    }
    let ai = AI0 * f + AIP0 * g;
    let aip = AI0 * fp + AIP0 * gp;
    (ai.to_f64(), aip.to_f64())
}

/// Asymptotic coefficients u_k (for Ai) and v_k (for Ai'), built by the
/// standard recurrence; terms are added until they stop decreasing or fall
/// below the floor.
fn asymptotic_sums(zeta: f64, even_odd_split: bool) -> AsymptoticSums {
    let mut u = 1.0f64; // u_0
    let mut sums = AsymptoticSums::default();
    sums.push(0, 1.0, 1.0, even_odd_split, zeta);
    let mut prev_mag = 1.0f64;
    for k in 1..40 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / (216.0 * kf * (2.0 * kf - 1.0));
        let v = -u * (6.0 * kf + 1.0) / (6.0 * kf - 1.0);
        let mag = u / zeta.powi(k as i32);
        if mag >= prev_mag || mag < 1e-20 {
            break;
        }
        prev_mag = mag;
        sums.push(k, u, v, even_odd_split, zeta);
    }
    sums
}

/// Accumulators for the four asymptotic series. In the monotonic regime only
/// `u_alt`/`v_alt` (alternating full sums) are used; in the oscillatory
/// regime the even/odd splits are.
#[derive(Default)]
struct AsymptoticSums {
    u_alt: f64,
    v_alt: f64,
    u_even: f64,
    u_odd: f64,
    v_even: f64,
    v_odd: f64,
}

impl AsymptoticSums {
    fn push(&mut self, k: usize, u: f64, v: f64, split: bool, zeta: f64) {
        let zk = zeta.powi(k as i32);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        self.u_alt += sign * u / zk;
        self.v_alt += sign * v / zk;
        if split {
            // (-1)^m for u_{2m} and u_{2m+1}
            let half_sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                self.u_even += half_sign * u / zk;
                self.v_even += half_sign * v / zk;
            } else {
                self.u_odd += half_sign * u / zk;
                self.v_odd += half_sign * v / zk;
            }
        }
    }
}

/// x > SWITCH: monotonic decay,
/// Ai ~ e^(-zeta)/(2 sqrt(pi) x^(1/4)) * sum, zeta = (2/3) x^(3/2).
fn asymptotic_positive(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let sums = asymptotic_sums(zeta, false);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let damp = (-zeta).exp();
    let ai = damp / (2.0 * sqrt_pi * x.powf(0.25)) * sums.u_alt;
    let aip = -x.powf(0.25) * damp / (2.0 * sqrt_pi) * sums.v_alt;
    (ai, aip)
}

/// x < -SWITCH: oscillatory regime with phase chi = zeta - pi/4 and the
/// even/odd coefficient splits.
fn asymptotic_negative(x: f64) -> (f64, f64) {
    let t = -x;
    let zeta = 2.0 / 3.0 * t.powf(1.5);
    let chi = zeta - std::f64::consts::FRAC_PI_4;
    let sums = asymptotic_sums(zeta, true);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let (sin_chi, cos_chi) = chi.sin_cos();
    let ai = (cos_chi * sums.u_even + sin_chi * sums.u_odd) / (sqrt_pi * t.powf(0.25));
    let aip = t.powf(0.25) / sqrt_pi * (sin_chi * sums.v_even - cos_chi * sums.v_odd);
    (ai, aip)
}
