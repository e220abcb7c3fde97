//! Tracy-Widom distribution for the unitary class, two ways.
//!
//! Primary path: Fredholm determinant of the Airy kernel on (s, inf), which
//! is robust and needs no shooting. Independent path: the Hastings-McLeod
//! solution of Painleve II, q'' = s q + 2 q^3, integrated backward by RK4
//! from s0 = 8 with q(s0) = Ai(s0), q'(s0) = Ai'(s0); the CDF is then
//! exp(-int_s^inf (t-s) q(t)^2 dt), with the two cumulative integrals
//! carried inside the RK4 state so no separate quadrature is needed.
//! Backward integration is benign here: the growing-direction error mode
//! shrinks toward smaller s, and the seeding error at s0 is O(Ai(8)^3).
//!
//! The boundary condition uses q ~ +Ai(s) as s -> +inf (the sign convention
//! under which q is positive); the law depends only on q^2.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::kernels::{airy, fredholm_det, KernelSpec};

pub const GRID_LO: f64 = -10.0;
pub const GRID_HI: f64 = 6.0;
pub const GRID_STEP: f64 = 0.05;

/// CDF at one point via the Airy-kernel determinant (with its internal
/// node-doubling check).
pub fn tw_cdf(s: f64) -> Result<f64> {
    if !s.is_finite() || !(GRID_LO..=GRID_HI).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "Tracy-Widom argument {s} outside [{GRID_LO}, {GRID_HI}]"
        )));
    }
    fredholm_det(KernelSpec::AiryTail { s }, 80)
}

/// Tabulated CDF on the uniform grid [GRID_LO, GRID_HI] step GRID_STEP.
pub struct TwTable {
    pub s_grid: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl TwTable {
    pub fn build() -> Result<Self> {
        let n = ((GRID_HI - GRID_LO) / GRID_STEP).round() as usize;
        let mut s_grid = Vec::with_capacity(n + 1);
        let mut cdf = Vec::with_capacity(n + 1);
        let mut prev = 0.0f64;
        for i in 0..=n {
            let s = GRID_LO + GRID_STEP * i as f64;
            let f = tw_cdf(s)?;
            if f < prev - 1e-9 {
                return Err(Error::Quadrature(format!(
                    "Tracy-Widom table not monotone at s = {s}: {f} after {prev}"
                )));
            }
            // quadrature jitter below 1e-9 in the flat tails is absorbed
            let f = f.max(prev).clamp(0.0, 1.0);
            s_grid.push(s);
            cdf.push(f);
            prev = f;
        }
        Ok(Self { s_grid, cdf })
    }

    /// Shared instance; built once per process.
    pub fn shared() -> Result<&'static TwTable> {
        static TABLE: OnceLock<TwTable> = OnceLock::new();
        if let Some(t) = TABLE.get() {
            return Ok(t);
        }
        let built = Self::build()?;
        Ok(TABLE.get_or_init(|| built))
    }

    /// Piecewise-linear evaluation, clamped to [0, 1] outside the grid.
    pub fn eval(&self, s: f64) -> f64 {
        if s <= self.s_grid[0] {
            return 0.0;
        }
        if s >= *self.s_grid.last().unwrap() {
            return 1.0;
        }
        let idx = ((s - GRID_LO) / GRID_STEP) as usize;
        let idx = idx.min(self.s_grid.len() - 2);
        let t = (s - self.s_grid[idx]) / GRID_STEP;
        self.cdf[idx] * (1.0 - t) + self.cdf[idx + 1] * t
    }

    /// Mean of the law by parts: int s dF = hi F(hi) - int F over the grid
    /// (Simpson); the neglected tails contribute below 1e-6.
    pub fn mean(&self) -> f64 {
        let n = self.s_grid.len() - 1;
        let h = GRID_STEP;
        let mut integral = self.cdf[0] + self.cdf[n];
        for (i, f) in self.cdf.iter().enumerate().take(n).skip(1) {
            integral += if i % 2 == 1 { 4.0 } else { 2.0 } * f;
        }
        integral *= h / 3.0;
        GRID_HI * self.cdf[n] - GRID_LO * self.cdf[0] - integral
    }
}

/// CDF table from the Painleve II path, on a descending RK4 grid
/// s_i = s0 - i h.
pub struct PainleveCdf {
    s0: f64,
    h: f64,
    /// Hastings-McLeod q at the grid nodes
    pub q: Vec<f64>,
    /// CDF values at the grid nodes
    pub cdf: Vec<f64>,
}

#[derive(Clone, Copy)]
struct State {
    q: f64,
    p: f64,
    /// int_s^{s0} q^2 dt
    a: f64,
    /// int_s^{s0} t q^2 dt
    b: f64,
}

/// Derivative of the state with respect to s (integrated toward smaller s).
fn deriv(s: f64, y: State) -> State {
    State {
        q: y.p,
        p: s * y.q + 2.0 * y.q.powi(3),
        a: -y.q * y.q,
        b: -s * y.q * y.q,
    }
}

fn rk4_step(s: f64, y: State, h: f64) -> State {
    let k1 = deriv(s, y);
    let k2 = deriv(s + 0.5 * h, advance(y, k1, 0.5 * h));
    let k3 = deriv(s + 0.5 * h, advance(y, k2, 0.5 * h));
    let k4 = deriv(s + h, advance(y, k3, h));
    State {
        q: y.q + h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
        p: y.p + h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
        a: y.a + h / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a),
        b: y.b + h / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b),
    }
}

fn advance(y: State, k: State, h: f64) -> State {
    State {
        q: y.q + h * k.q,
        p: y.p + h * k.p,
        a: y.a + h * k.a,
        b: y.b + h * k.b,
    }
}

impl PainleveCdf {
    pub fn build() -> Result<Self> {
        let s0 = 8.0;
        let h = 0.005;
        let steps = ((s0 - GRID_LO) / h).round() as usize;
        let (ai, aip) = airy(s0)?;
        let mut y = State { q: ai, p: aip, a: 0.0, b: 0.0 };
        let mut q = Vec::with_capacity(steps + 1);
        let mut cdf = Vec::with_capacity(steps + 1);
        for i in 0..=steps {
            let s = s0 - h * i as f64;
            q.push(y.q);
            // int_s^inf (t - s) q^2 dt, truncation above s0 ~ O(Ai(8)^2)
            cdf.push((-(y.b - s * y.a)).exp());
            if i < steps {
                y = rk4_step(s, y, -h);
            }
        }
        Ok(Self { s0, h, q, cdf })
    }

    /// Index of the grid node nearest to s.
    pub fn index_near(&self, s: f64) -> usize {
        (((self.s0 - s) / self.h).round() as usize).min(self.q.len() - 1)
    }

    pub fn s_at(&self, i: usize) -> f64 {
        self.s0 - self.h * i as f64
    }
}

/// Largest disagreement between the determinant and Painleve paths over
/// [-8, 4] (sampled every 0.5 at exact ODE grid nodes).
pub fn two_path_divergence() -> Result<f64> {
    let p = PainleveCdf::build()?;
    let mut worst = 0.0f64;
    for k in 0..=24 {
        let target = -8.0 + 0.5 * k as f64;
        let i = p.index_near(target);
        let s = p.s_at(i);
        let f_det = tw_cdf(s)?;
        worst = worst.max((f_det - p.cdf[i]).abs());
    }
    Ok(worst)
}
