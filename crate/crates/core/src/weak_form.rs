//! Distributional check of
//!
//! ```text
//! iint [ u phi_t + 1/2 u^2 phi_x + 1/2 F phi ] dx dt = 0,   F(x,t) = int_{-inf}^x w^2
//! ```
//!
//! for smooth bumps `phi` compactly supported in `t > 0`.

use crate::error::{HsError, Result};
use crate::frame::{Frame, FrameProvider};

/// Gauss-Legendre nodes and weights on [-1, 1], 8 points.
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Composite 8-point Gauss-Legendre of `f` on `[a, b]` with `m` panels.
pub fn gauss_composite(a: f64, b: f64, m: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / m as f64;
    let mut acc = 0.0;
    for k in 0..m {
        let mid = a + (k as f64 + 0.5) * h;
        let half = 0.5 * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            acc += w * half * f(mid + half * x);
        }
    }
    acc
}

/// Standard bump `exp(-1 / (1 - s^2))` on `|s| < 1`.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

pub fn bump_derivative(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s * s;
        bump(s) * (-2.0 * s / (q * q))
    }
}

/// Space-time rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x_lo: f64,
    pub x_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Window {
    pub fn new(x_lo: f64, x_hi: f64, t_lo: f64, t_hi: f64) -> Self {
        Self {
            x_lo,
            x_hi,
            t_lo,
            t_hi,
        }
    }

    pub fn measure(&self) -> f64 {
        (self.x_hi - self.x_lo) * (self.t_hi - self.t_lo)
    }
}

/// Tensor-product bump `phi(x,t) = bump((x-cx)/rx) bump((t-ct)/rt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub cx: f64,
    pub rx: f64,
    pub ct: f64,
    pub rt: f64,
}

impl TestFunction {
    /// `nx * nt` bumps tiling the window.
    pub fn grid(window: &Window, nx: usize, nt: usize) -> Vec<Self> {
        let dx = (window.x_hi - window.x_lo) / nx as f64;
        let dt = (window.t_hi - window.t_lo) / nt as f64;
        let mut out = Vec::with_capacity(nx * nt);
        for i in 0..nx {
            for j in 0..nt {
                out.push(Self {
                    cx: window.x_lo + (i as f64 + 0.5) * dx,
                    rx: 0.5 * dx,
                    ct: window.t_lo + (j as f64 + 0.5) * dt,
                    rt: 0.5 * dt,
                });
            }
        }
        out
    }

    fn inside(&self, w: &Window) -> bool {
        self.rx > 0.0
            && self.rt > 0.0
            && self.cx - self.rx >= w.x_lo
            && self.cx + self.rx <= w.x_hi
            && self.ct - self.rt >= w.t_lo
            && self.ct + self.rt <= w.t_hi
    }

    /// `iint |phi|`.
    pub fn l1_norm(&self) -> f64 {
        let one_d = gauss_composite(-1.0, 1.0, 64, bump);
        one_d * one_d * self.rx * self.rt
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakResidual {
    /// `|iint ...| / iint |phi|` per test function.
    pub per_test: Vec<f64>,
    pub max: f64,
    /// Panel count at which the quadrature stopped changing.
    pub panels: usize,
}

fn x_integral(frame: &Frame, phi: &TestFunction, t: f64, m: usize) -> f64 {
    let st = (t - phi.ct) / phi.rt;
    let bt = bump(st);
    let dbt = bump_derivative(st) / phi.rt;
    let lo = phi.cx - phi.rx;
    let hi = phi.cx + phi.rx;
    let mut cuts = vec![lo];
    cuts.extend(
        frame
            .positions
            .iter()
            .copied()
            .filter(|&p| p > lo && p < hi),
    );
    cuts.push(hi);
    cuts.dedup();
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        acc += gauss_composite(w[0], w[1], m, |x| {
            let sx = (x - phi.cx) / phi.rx;
            let bx = bump(sx);
            let dbx = bump_derivative(sx) / phi.rx;
            let u = frame.eval_u(x);
            let f = frame.forcing(x);
            u * bx * dbt + 0.5 * u * u * dbx * bt + 0.5 * f * bx * bt
        });
    }
    acc
}

fn integral<P: FrameProvider + ?Sized>(
    provider: &P,
    phi: &TestFunction,
    events: &[f64],
    m: usize,
) -> f64 {
    let lo = phi.ct - phi.rt;
    let hi = phi.ct + phi.rt;
    let mut cuts = vec![lo];
    cuts.extend(events.iter().copied().filter(|&e| e > lo && e < hi));
    cuts.push(hi);
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        acc += gauss_composite(w[0], w[1], m, |t| {
            let frame = provider.frame_at(t);
            x_integral(&frame, phi, t, m)
        });
    }
    acc
}

/// Maximum normalized weak-form residual over `tests`, refining panels until
/// successive estimates agree to `1e-12` (at most 64 panels per piece).
pub fn weak_residual<P: FrameProvider + ?Sized>(
    provider: &P,
    window: &Window,
    tests: &[TestFunction],
) -> Result<WeakResidual> {
    if window.t_lo < 0.0 || window.t_hi > provider.horizon() {
        return Err(HsError::SupportOutsideWindow);
    }
    if tests.iter().any(|phi| !phi.inside(window)) {
        return Err(HsError::SupportOutsideWindow);
    }
    let events = provider.event_times();
    let mut per_test = Vec::with_capacity(tests.len());
    let mut panels_used = 1;
    for phi in tests {
        let norm = phi.l1_norm();
        let mut m = 2;
        let mut prev = integral(provider, phi, &events, m);
        loop {
            let next_m = 2 * m;
            let next = integral(provider, phi, &events, next_m);
            let settled = (next - prev).abs() <= 1e-12 * norm.max(1e-300);
            m = next_m;
            prev = next;
            if settled || m >= 64 {
                break;
            }
        }
        panels_used = panels_used.max(m);
        per_test.push(prev.abs() / norm);
    }
    let max = per_test.iter().fold(0.0_f64, |a, &b| a.max(b));
    Ok(WeakResidual {
        per_test,
        max,
        panels: panels_used,
    })
}

/// Fault injection: multiplies the slope of one cell in every frame.
///
/// The resulting field is no longer continuous at the cell's right edge and
/// carries the wrong energy, so it should fail the weak-form check.
pub struct ScaledSlope<'a, P: ?Sized> {
    pub inner: &'a P,
    pub cell: usize,
    pub factor: f64,
}

impl<P: ?Sized> ScaledSlope<'_, P> {
    fn scale(&self, mut f: Frame) -> Frame {
        if let Some(c) = f.cells.get_mut(self.cell) {
            c.slope *= self.factor;
        }
        f
    }
}

impl<P: FrameProvider + ?Sized> FrameProvider for ScaledSlope<'_, P> {
    fn breakpoints(&self) -> &[f64] {
        self.inner.breakpoints()
    }

    fn frame_at(&self, t: f64) -> Frame {
        self.scale(self.inner.frame_at(t))
    }

    fn frame_left_limit(&self, t: f64) -> Frame {
        self.scale(self.inner.frame_left_limit(t))
    }

    fn frame_right_limit(&self, t: f64) -> Frame {
        self.scale(self.inner.frame_right_limit(t))
    }

    fn event_times(&self) -> Vec<f64> {
        self.inner.event_times()
    }

    fn horizon(&self) -> f64 {
        self.inner.horizon()
    }
}
