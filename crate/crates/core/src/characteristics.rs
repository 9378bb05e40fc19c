//! Numerical characteristic tracing and pair diagnostics.
//!
//! A characteristic carries `(x, u)` with `x' = u`, `u' = F(x, t) / 2`. The
//! forcing is read from frames around the label's own frame position, so the
//! RK4 error is pure time discretization. Steps are split at event times; a
//! sub-step starts from the right limit of the frame and ends on its left
//! limit.

use std::fmt::Write as _;

use crate::dissipative::fmt17;
use crate::error::{HsError, Result};
use crate::frame::{CellKind, Frame, FrameProvider};
use crate::profile::Region;
use crate::solution::{Side, Solution};
use crate::weak_form::gauss_composite;

/// Pairs closer than this are treated as collided.
pub const COLLAPSE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    pub w: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicTrace {
    pub zeta: f64,
    pub side: Side,
    pub samples: Vec<TraceSample>,
}

impl CharacteristicTrace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn last(&self) -> &TraceSample {
        self.samples
            .last()
            .expect("traces have at least one sample")
    }

    /// CSV `t,x,u,w_if_defined`; the last field is empty on collision points.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,u,w_if_defined\n");
        for s in &self.samples {
            let w = s.w.map(fmt17).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", fmt17(s.t), fmt17(s.x), fmt17(s.u), w);
        }
        out
    }
}

fn region_of(labels: &[f64], zeta: f64) -> Region {
    let n = labels.len() - 1;
    if zeta < labels[0] {
        Region::Left
    } else if zeta >= labels[n] {
        Region::Right
    } else {
        Region::Cell(labels.partition_point(|&b| b <= zeta) - 1)
    }
}

/// Frame position of a label plus a local affine model of the forcing:
/// `F(x) ~ f_star + slope * (x - x_star)`.
#[derive(Debug, Clone, Copy)]
struct LocalForcing {
    x_star: f64,
    u_star: f64,
    f_star: f64,
    slope: f64,
    w: Option<f64>,
}

fn local_forcing(frame: &Frame, labels: &[f64], zeta: f64, side: Side) -> LocalForcing {
    let n = frame.cells.len();
    match region_of(labels, zeta) {
        Region::Left => LocalForcing {
            x_star: frame.positions[0] - (labels[0] - zeta),
            u_star: frame.values[0],
            f_star: 0.0,
            slope: 0.0,
            w: Some(0.0),
        },
        Region::Right => LocalForcing {
            x_star: frame.positions[n] + (zeta - labels[n]),
            u_star: frame.values[n],
            f_star: frame.total_energy(),
            slope: 0.0,
            w: Some(0.0),
        },
        Region::Cell(i) => {
            let c = &frame.cells[i];
            let f_left = frame.energy_left_of_cell(i);
            let (frac, slope, w) = match c.kind {
                CellKind::Alive => {
                    let theta = (zeta - labels[i]) / (labels[i + 1] - labels[i]);
                    // expanding cells carry a genuine x-dependence; collapsing
                    // ones are anchored at the label to avoid the singular mode
                    let s = if c.slope >= 0.0 {
                        c.slope * c.slope
                    } else {
                        0.0
                    };
                    (theta, s, Some(c.slope))
                }
                CellKind::Collapsed => (0.0, 0.0, None),
                CellKind::Resurrected { .. } => (side.fraction(), 0.0, Some(c.slope)),
            };
            let off = frac * c.width;
            LocalForcing {
                x_star: frame.positions[i] + off,
                u_star: frame.values[i] + if off > 0.0 { c.slope * off } else { 0.0 },
                f_star: f_left + frac * c.energy,
                slope,
                w,
            }
        }
    }
}

fn rhs(lf: &LocalForcing, x: f64, u: f64) -> (f64, f64) {
    (u, 0.5 * (lf.f_star + lf.slope * (x - lf.x_star)))
}

fn rk4_substep<P: FrameProvider + ?Sized>(
    provider: &P,
    zeta: f64,
    side: Side,
    a: f64,
    b: f64,
    state: (f64, f64),
) -> (f64, f64) {
    let labels = provider.breakpoints();
    let h = b - a;
    let mid = a + 0.5 * h;
    let fa = local_forcing(&provider.frame_right_limit(a), labels, zeta, side);
    let fm = local_forcing(&provider.frame_at(mid), labels, zeta, side);
    let fb = local_forcing(&provider.frame_left_limit(b), labels, zeta, side);
    let (x, u) = state;
    let k1 = rhs(&fa, x, u);
    let k2 = rhs(&fm, x + 0.5 * h * k1.0, u + 0.5 * h * k1.1);
    let k3 = rhs(&fm, x + 0.5 * h * k2.0, u + 0.5 * h * k2.1);
    let k4 = rhs(&fb, x + h * k3.0, u + h * k3.1);
    (
        x + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        u + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// Classical RK4 trace of the characteristic from label `zeta` on `[0, t_end]`.
///
/// At a branch event the trace follows the fan member selected by `side`.
pub fn integrate_characteristic<P: FrameProvider + ?Sized>(
    provider: &P,
    zeta: f64,
    t_end: f64,
    dt: f64,
    side: Side,
) -> Result<CharacteristicTrace> {
    if !(dt > 0.0) {
        return Err(HsError::NonPositiveStep(dt));
    }
    if !(t_end >= 0.0) || t_end > provider.horizon() {
        return Err(HsError::OutsideDomain {
            t: t_end,
            horizon: provider.horizon(),
        });
    }
    let labels = provider.breakpoints();
    let events = provider.event_times();
    let steps = ((t_end / dt) - 1e-9).ceil().max(0.0) as usize;
    let init = local_forcing(&provider.frame_at(0.0), labels, zeta, side);
    let mut state = (init.x_star, init.u_star);
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(TraceSample {
        t: 0.0,
        x: state.0,
        u: state.1,
        w: init.w,
    });
    for k in 0..steps {
        let a = k as f64 * dt;
        let b = if k + 1 == steps {
            t_end
        } else {
            (k + 1) as f64 * dt
        };
        let mut left = a;
        for &e in events.iter().filter(|&&e| e > a && e < b) {
            state = rk4_substep(provider, zeta, side, left, e, state);
            left = e;
        }
        state = rk4_substep(provider, zeta, side, left, b, state);
        let w = local_forcing(&provider.frame_at(b), labels, zeta, side).w;
        samples.push(TraceSample {
            t: b,
            x: state.0,
            u: state.1,
            w,
        });
    }
    Ok(CharacteristicTrace {
        zeta,
        side,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample {
    pub t: f64,
    pub h: f64,
    pub p: f64,
    /// `p / h`, absent once the pair has come within the collapse tolerance.
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairDiagnostics {
    pub samples: Vec<PairSample>,
}

impl PairDiagnostics {
    pub fn omega0(&self) -> Option<f64> {
        self.samples.first().and_then(|s| s.omega)
    }

    /// `2 w0 / (2 + t w0)` with `w0 = omega(0)`, while `2 + t w0 > 0`.
    pub fn riccati_bound(&self, t: f64) -> Option<f64> {
        let w0 = self.omega0()?;
        let g = 2.0 + t * w0;
        (g > 0.0).then(|| 2.0 * w0 / g)
    }

    /// CSV `t,h,p,omega,riccati_bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,h,p,omega,riccati_bound\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt17(s.t),
                fmt17(s.h),
                fmt17(s.p),
                s.omega.map(fmt17).unwrap_or_default(),
                self.riccati_bound(s.t).map(fmt17).unwrap_or_default()
            );
        }
        out
    }
}

pub fn pair_diagnostics(
    first: &CharacteristicTrace,
    second: &CharacteristicTrace,
) -> Result<PairDiagnostics> {
    if first.samples.len() != second.samples.len()
        || first.times().zip(second.times()).any(|(a, b)| a != b)
    {
        return Err(HsError::MismatchedGrids);
    }
    let mut collided = false;
    let samples = first
        .samples
        .iter()
        .zip(&second.samples)
        .map(|(a, b)| {
            let h = b.x - a.x;
            let p = b.u - a.u;
            collided |= h < COLLAPSE_TOLERANCE;
            PairSample {
                t: a.t,
                h,
                p,
                omega: (!collided).then(|| p / h),
            }
        })
        .collect();
    Ok(PairDiagnostics { samples })
}

/// `min_t [omega(t) - 2 omega(0) / (2 + t omega(0))]` over samples where both
/// sides are defined.
pub fn riccati_check(diag: &PairDiagnostics) -> Result<f64> {
    match diag.omega0() {
        Some(w0) if w0.is_finite() => {}
        _ => return Err(HsError::Invalid("omega(0) is not defined".into())),
    }
    Ok(diag
        .samples
        .iter()
        .filter_map(|s| Some(s.omega? - diag.riccati_bound(s.t)?))
        .fold(f64::INFINITY, f64::min))
}

/// Cumulative integral of uniformly sampled `f` with fourth-order local
/// rules (Simpson on pairs of panels, a three-point rule on the odd panel).
/// A trailing panel of different length falls back to the trapezoid rule.
pub fn cumulative_simpson(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * (t[1] - t[0]) * (f[0] + f[1]);
        return out;
    }
    let h = t[1] - t[0];
    let uniform = |k: usize| ((t[k] - t[k - 1]) - h).abs() <= 1e-9 * h;
    for k in 1..n {
        if !uniform(k) {
            out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (f[k - 1] + f[k]);
        } else if k == 1 {
            out[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
        } else if k % 2 == 0 && uniform(k - 1) {
            out[k] = out[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
        } else {
            out[k] = out[k - 1] + h / 12.0 * (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k]);
        }
    }
    out
}

/// Largest relative mismatch between `h(t)` and `h(0) exp(int_0^t omega)` on
/// the prefix where `omega` is defined.
pub fn exponential_identity_check(diag: &PairDiagnostics) -> f64 {
    let defined: Vec<&PairSample> = diag
        .samples
        .iter()
        .take_while(|s| s.omega.is_some())
        .collect();
    if defined.is_empty() {
        return 0.0;
    }
    let t: Vec<f64> = defined.iter().map(|s| s.t).collect();
    let w: Vec<f64> = defined.iter().map(|s| s.omega.unwrap()).collect();
    let integral = cumulative_simpson(&t, &w);
    let h0 = defined[0].h;
    defined
        .iter()
        .zip(integral)
        .map(|(s, i)| ((h0 * i.exp() - s.h) / s.h).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeparationVerdict {
    Pass { bound: f64, margin: f64 },
    Fail { bound: f64, margin: f64 },
    Inapplicable,
}

impl SeparationVerdict {
    pub fn passed(&self) -> bool {
        !matches!(self, SeparationVerdict::Fail { .. })
    }
}

/// Checks `|x_{z1}(s) - x_{z0}(s)| >= |z1 - z0| t^2 eps0^2 / 16` on `(0, t]`
/// for a label `z0` with `w0(z0) > -2/t + eps0`.
pub fn separation_lower_bound_check(
    solution: &Solution,
    z0: f64,
    z1: f64,
    t: f64,
    eps0: f64,
) -> SeparationVerdict {
    let p = solution.profile();
    if !(t > 0.0) || !(eps0 > 0.0) {
        return SeparationVerdict::Inapplicable;
    }
    if !(p.slope_at(z0) > -2.0 / t + eps0) {
        return SeparationVerdict::Inapplicable;
    }
    if z1 == z0 {
        return SeparationVerdict::Pass {
            bound: 0.0,
            margin: 0.0,
        };
    }
    let omega0 = (p.eval_u(z1) - p.eval_u(z0)) / (z1 - z0);
    if !(omega0 > -2.0 / t + 0.5 * eps0) {
        return SeparationVerdict::Inapplicable;
    }
    let bound = (z1 - z0).abs() * t * t * eps0 * eps0 / 16.0;
    let samples = 200;
    let margin = (1..=samples)
        .map(|k| {
            let s = t * k as f64 / samples as f64;
            let sep = solution
                .width_between((z0, Side::Middle), (z1, Side::Middle), s)
                .abs();
            sep - bound
        })
        .fold(f64::INFINITY, f64::min);
    if margin >= 0.0 {
        SeparationVerdict::Pass { bound, margin }
    } else {
        SeparationVerdict::Fail { bound, margin }
    }
}

/// `|int_sigma^tau (window average of w^2 between x_zeta and x_l[zeta+eps]
/// - w^2(x_zeta)) dt|` for each `eps`.
///
/// Fails with [`HsError::Invalid`] when a cell under `[zeta, zeta + max eps]`
/// blows up before `tau`.
pub fn averaged_energy_probe(
    solution: &Solution,
    zeta: f64,
    eps: &[f64],
    sigma: f64,
    tau: f64,
) -> Result<Vec<f64>> {
    if !(0.0 <= sigma && sigma <= tau) {
        return Err(HsError::Invalid(format!(
            "need 0 <= sigma <= tau, got {sigma}, {tau}"
        )));
    }
    if let Some(&e) = eps.iter().find(|&&e| !(e > 0.0)) {
        return Err(HsError::NonPositiveWidth(e));
    }
    let reach = eps.iter().copied().fold(0.0, f64::max);
    let p = solution.profile();
    let hit = p
        .cell_meta()
        .iter()
        .filter(|m| {
            let lo = p.breakpoints()[m.index];
            let hi = p.breakpoints()[m.index + 1];
            hi > zeta && lo <= zeta + reach
        })
        .any(|m| m.blowup_time <= tau);
    if hit {
        return Err(HsError::Invalid(
            "averaging window crosses a blow-up event".into(),
        ));
    }
    Ok(eps
        .iter()
        .map(|&e| {
            let a = (zeta, Side::Middle);
            let b = (zeta + e, Side::Leftmost);
            let integrand = |t: f64| {
                let width = solution.width_between(a, b, t);
                let avg = solution.energy_between(a, b, t) / width;
                let w = solution
                    .characteristic_state(zeta, t, Side::Middle)
                    .w
                    .unwrap_or(0.0);
                avg - w * w
            };
            gauss_composite(sigma, tau, 16, integrand).abs()
        })
        .collect())
}
