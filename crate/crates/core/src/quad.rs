//! Quadrature: Gauss-Legendre rules with computed nodes, and an adaptive
//! Gauss-Kronrod (G7, K15) integrator with a global error queue.
//!
//! The adaptive integrator is generic over the value type so the same code
//! path serves real densities and complex phase integrals along paths.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Value types the adaptive integrator can accumulate.
pub trait QuadValue: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm(self) -> f64 {
        self.norm()
    }
}

/// Gauss-Legendre rule on [-1, 1].  Nodes are the roots of P_n found by
/// Newton iteration from the Chebyshev initial guesses; weights follow from
/// the derivative.  Exact for polynomials of degree 2n - 1.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "rule needs at least 2 nodes");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n / 2 {
            // Tricomi-style initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_deriv(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_deriv(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            let (_, d) = legendre_with_deriv(n, 0.0);
            nodes[n / 2] = 0.0;
            weights[n / 2] = 2.0 / (d * d);
        }
        GaussLegendre { nodes, weights }
    }

    /// Integral of f over [a, b] with the affine map from [-1, 1].
    pub fn integrate<V: QuadValue>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> V) -> V {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = V::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc.add(f(mid + half * x).scale(w));
        }
        acc.scale(half)
    }
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    if n == 1 {
        return (x, 1.0);
    }
    let d = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7/K15 pass over [a, b]: returns (K15 value, |K15 - G7| estimate).
fn gk15<V: QuadValue>(f: &mut impl FnMut(f64) -> V, a: f64, b: f64) -> (V, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = V::zero();
    let mut gauss = V::zero();
    for i in 0..8 {
        let (fp, fm);
        if i == 7 {
            fp = f(mid);
            fm = V::zero();
        } else {
            fp = f(mid + half * XGK[i]);
            fm = f(mid - half * XGK[i]);
        }
        let pair = if i == 7 { fp } else { fp.add(fm) };
        kronrod = kronrod.add(pair.scale(WGK[i]));
        // Odd indices of XGK and the center are the embedded Gauss nodes.
        if i % 2 == 1 || i == 7 {
            gauss = gauss.add(pair.scale(WG[i / 2]));
        }
    }
    let kronrod = kronrod.scale(half);
    let gauss = gauss.scale(half);
    let err = kronrod.add(gauss.scale(-1.0)).norm();
    (kronrod, err)
}

/// Adaptive Gauss-Kronrod to absolute tolerance `tol`: keeps a queue of
/// subintervals and bisects the one with the largest error estimate until the
/// summed estimate is below tolerance.
pub fn adaptive_gk<V: QuadValue>(
    mut f: impl FnMut(f64) -> V,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<V> {
    if a == b {
        return Ok(V::zero());
    }
    const MAX_INTERVALS: usize = 4000;
    struct Seg<V> {
        a: f64,
        b: f64,
        val: V,
        err: f64,
    }
    let (val, err) = gk15(&mut f, a, b);
    let mut segs = vec![Seg { a, b, val, err }];
    loop {
        let total_err: f64 = segs.iter().map(|s| s.err).sum();
        if total_err <= tol {
            let mut acc = V::zero();
            for s in &segs {
                acc = acc.add(s.val);
            }
            return Ok(acc);
        }
        if segs.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "tolerance {tol:.3e} not reached on [{a}, {b}]: {} subintervals, error {total_err:.3e}",
                segs.len()
            )));
        }
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .unwrap();
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            return Err(Error::Quadrature(format!(
                "interval underflow at [{}, {}] with error {:.3e}",
                s.a, s.b, s.err
            )));
        }
        let (v1, e1) = gk15(&mut f, s.a, mid);
        let (v2, e2) = gk15(&mut f, mid, s.b);
        segs.push(Seg { a: s.a, b: mid, val: v1, err: e1 });
        segs.push(Seg { a: mid, b: s.b, val: v2, err: e2 });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exactness() {
        // n nodes integrate monomials up to degree 2n - 1 exactly.
        let gl = GaussLegendre::new(5);
        for deg in 0..=9 {
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            let got = gl.integrate(-1.0, 1.0, |x| x.powi(deg));
            assert!(
                (got - exact).abs() < 1e-14,
                "degree {deg}: got {got}, want {exact}"
            );
        }
    }

    #[test]
    fn gauss_legendre_sin() {
        let gl = GaussLegendre::new(20);
        let got = gl.integrate(0.0, std::f64::consts::PI, |x| x.sin());
        assert!((got - 2.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_large_rule() {
        let gl = GaussLegendre::new(201);
        assert_eq!(gl.nodes.len(), 201);
        let sum: f64 = gl.weights.iter().sum();
        assert!((sum - 2.0).abs() < 1e-13);
        let got = gl.integrate(0.0, 1.0, |x| (-x).exp());
        assert!((got - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn adaptive_sqrt_singularity() {
        let got = adaptive_gk(|x: f64| x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((got - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_oscillatory() {
        let got = adaptive_gk(|x: f64| (20.0 * x).cos(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!(got.abs() < 1e-11);
    }

    #[test]
    fn adaptive_complex() {
        let got = adaptive_gk(
            |t| Complex64::new(0.0, t).exp(),
            0.0,
            1.0,
            1e-13,
        )
        .unwrap();
        let want = Complex64::new(1f64.sin(), 1.0 - 1f64.cos());
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn adaptive_reports_failure() {
        // 1/x on (0, 1] diverges; the integrator must give up, not hang.
        let r = adaptive_gk(|x: f64| 1.0 / x, 0.0, 1.0, 1e-10);
        assert!(r.is_err());
    }

    #[test]
    fn adaptive_handles_steep_but_integrable() {
        // finite integral with a huge logarithmic range
        let got: f64 = adaptive_gk(|x| 1.0 / x, 1e-300, 1.0, 1e-7).unwrap();
        assert!((got - 300.0 * std::f64::consts::LN_10).abs() < 1e-6);
    }
}
