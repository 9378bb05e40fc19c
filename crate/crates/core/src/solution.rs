//! Closed-form weak solutions generated from piecewise-linear data.
//!
//! Breakpoint `j` moves with `u_j' = 1/2 * (energy of cells left of j)`, so
//! between blow-up events `u_j` is linear and `x_j` quadratic in `t`. Alive
//! cells follow the Riccati laws
//!
//! ```text
//! w_i(t) = 2 w0_i / (2 + t w0_i),   h_i(t) = dz_i (2 + t w0_i)^2 / 4,
//! ```
//!
//! so `w_i^2 h_i = e_i` until the cell collapses at `T_i = -2 / w0_i`. A cell
//! with continuation coefficient `kappa_i > 0` reopens as a fan of slope
//! `2 / (t - T_i)` and width `kappa_i e_i (t - T_i)^2 / 4`. With every
//! `kappa_i = 0` this is the dissipative solution.

use crate::continuation::ContinuationPolicy;
use crate::dissipative::EventQueue;
use crate::error::Result;
use crate::frame::{CellKind, Frame, FrameCell, FrameProvider};
use crate::profile::{CellMeta, InitialProfile, Region};

/// Which member of the characteristic fan a label follows after a branch.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Side {
    Leftmost,
    Rightmost,
    /// Fraction `lambda` of the fan width, measured from its left edge.
    Generic(f64),
    /// `Generic(0.5)`.
    #[default]
    Middle,
}

impl Side {
    pub fn fraction(self) -> f64 {
        match self {
            Side::Leftmost => 0.0,
            Side::Rightmost => 1.0,
            Side::Generic(l) => l.clamp(0.0, 1.0),
            Side::Middle => 0.5,
        }
    }
}

/// How a frame at an event time is resolved.
///
/// `At` reports the collapsed state at `t = T_i` (the survivor set uses a
/// strict inequality). `Left` keeps collapsing cells alive; `Right` already
/// contains newborn fans with zero width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeLimit {
    Left,
    At,
    Right,
}

/// Where a label sits at time `t`: a region plus a fraction of the slot width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelCoord {
    pub region: Region,
    pub frac: f64,
}

/// Position, value and (if defined) slope along the characteristic of a label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicState {
    pub x: f64,
    pub u: f64,
    /// Absent when the label sits on a collision point.
    pub w: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    profile: InitialProfile,
    meta: Vec<CellMeta>,
    kappa: Vec<f64>,
    events: EventQueue,
}

impl Solution {
    pub fn new(profile: InitialProfile, policy: &ContinuationPolicy) -> Result<Self> {
        policy.validate(&profile)?;
        let meta = profile.cell_meta();
        let mut kappa = vec![0.0; meta.len()];
        for (&cell, &k) in policy.iter() {
            kappa[cell] = k;
        }
        let events = EventQueue::from_profile(&profile);
        Ok(Self {
            profile,
            meta,
            kappa,
            events,
        })
    }

    pub fn dissipative(profile: InitialProfile) -> Self {
        Self::new(profile, &ContinuationPolicy::dissipative())
            .expect("empty policy is always valid")
    }

    pub fn profile(&self) -> &InitialProfile {
        &self.profile
    }

    pub fn meta(&self) -> &[CellMeta] {
        &self.meta
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn events(&self) -> &EventQueue {
        &self.events
    }

    pub fn is_dissipative(&self) -> bool {
        self.kappa.iter().all(|&k| k == 0.0)
    }

    /// State of cell slot `i` at time `t`.
    pub fn cell(&self, i: usize, t: f64, limit: TimeLimit) -> FrameCell {
        let m = &self.meta[i];
        let collapsed = match limit {
            TimeLimit::Left => t > m.blowup_time,
            _ => t >= m.blowup_time,
        };
        if !collapsed {
            let g = 2.0 + t * m.slope;
            return FrameCell {
                kind: CellKind::Alive,
                width: m.width * 0.25 * g * g,
                slope: 2.0 * m.slope / g,
                energy: m.energy,
            };
        }
        let k = self.kappa[i];
        let age = t - m.blowup_time;
        if k > 0.0 && (age > 0.0 || limit == TimeLimit::Right) {
            FrameCell {
                kind: CellKind::Resurrected {
                    birth: m.blowup_time,
                },
                width: 0.25 * k * m.energy * age * age,
                slope: 2.0 / age,
                energy: k * m.energy,
            }
        } else {
            FrameCell {
                kind: CellKind::Collapsed,
                width: 0.0,
                slope: 0.0,
                energy: 0.0,
            }
        }
    }

    /// `u` jump across slot `i`, `u_{i+1} - u_i`.
    fn increment(&self, i: usize, cell: &FrameCell, t: f64) -> f64 {
        let m = &self.meta[i];
        match cell.kind {
            CellKind::Alive => 0.5 * m.slope * m.width * (2.0 + t * m.slope),
            CellKind::Collapsed => 0.0,
            CellKind::Resurrected { birth } => 0.5 * cell.energy * (t - birth),
        }
    }

    fn build_frame(&self, t: f64, limit: TimeLimit) -> Frame {
        let n = self.meta.len();
        let z0 = self.profile.breakpoints()[0];
        let anchor = self.profile.anchor();
        let mut positions = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n + 1);
        let mut cells = Vec::with_capacity(n);
        positions.push(z0 + anchor * t);
        values.push(anchor);
        for i in 0..n {
            let c = self.cell(i, t, limit);
            let dp = self.increment(i, &c, t);
            positions.push(positions[i] + c.width);
            values.push(values[i] + dp);
            cells.push(c);
        }
        Frame {
            t,
            positions,
            values,
            cells,
        }
    }

    pub fn frame(&self, t: f64) -> Frame {
        self.build_frame(t, TimeLimit::At)
    }

    /// Local coordinate of label `zeta` at time `t`.
    pub fn coord(&self, zeta: f64, t: f64, side: Side) -> LabelCoord {
        let region = self.profile.locate(zeta);
        let frac = match region {
            Region::Cell(i) => match self.cell(i, t, TimeLimit::At).kind {
                CellKind::Alive => (zeta - self.profile.breakpoints()[i]) / self.meta[i].width,
                CellKind::Collapsed => 0.0,
                CellKind::Resurrected { .. } => side.fraction(),
            },
            _ => 0.0,
        };
        LabelCoord { region, frac }
    }

    /// Characteristic of label `zeta` read off the frame at `t`.
    pub fn characteristic_state(&self, zeta: f64, t: f64, side: Side) -> CharacteristicState {
        let frame = self.frame(t);
        self.characteristic_state_in(&frame, zeta, side)
    }

    pub fn characteristic_state_in(
        &self,
        frame: &Frame,
        zeta: f64,
        side: Side,
    ) -> CharacteristicState {
        let bp = self.profile.breakpoints();
        let n = self.meta.len();
        let coord = self.coord(zeta, frame.t, side);
        match coord.region {
            Region::Left => CharacteristicState {
                x: frame.positions[0] - (bp[0] - zeta),
                u: frame.values[0],
                w: Some(0.0),
            },
            Region::Right => CharacteristicState {
                x: frame.positions[n] + (zeta - bp[n]),
                u: frame.values[n],
                w: Some(0.0),
            },
            Region::Cell(i) => {
                let c = &frame.cells[i];
                let off = coord.frac * c.width;
                CharacteristicState {
                    x: frame.positions[i] + off,
                    u: frame.values[i] + c.slope * off,
                    w: match c.kind {
                        CellKind::Collapsed => None,
                        _ => Some(c.slope),
                    },
                }
            }
        }
    }

    fn coord_key(&self, c: LabelCoord) -> (f64, f64) {
        // (slot index as float, fraction) with tails at -1 and n
        let n = self.meta.len() as f64;
        match c.region {
            Region::Left => (-1.0, 0.0),
            Region::Right => (n, 0.0),
            Region::Cell(i) => (i as f64, c.frac),
        }
    }

    /// `int w^2` and `int max(w,0)^2` between two labels, summed per slot
    /// from closed-form cell energies. Negative when `b` sits left of `a`.
    fn energies_between(&self, a: (f64, Side), b: (f64, Side), t: f64) -> (f64, f64) {
        let ca = self.coord_key(self.coord(a.0, t, a.1));
        let cb = self.coord_key(self.coord(b.0, t, b.1));
        let (lo, hi, sign) = if ca <= cb {
            (ca, cb, 1.0)
        } else {
            (cb, ca, -1.0)
        };
        let mut total = 0.0;
        let mut positive = 0.0;
        for i in 0..self.meta.len() {
            let k = i as f64;
            if k < lo.0 || k > hi.0 {
                continue;
            }
            let from = if k == lo.0 { lo.1 } else { 0.0 };
            let to = if k == hi.0 { hi.1 } else { 1.0 };
            if to <= from {
                continue;
            }
            let c = self.cell(i, t, TimeLimit::At);
            let e = (to - from) * c.energy;
            total += e;
            if c.slope > 0.0 {
                positive += e;
            }
        }
        (sign * total, sign * positive)
    }

    /// `int_{x_a(t)}^{x_b(t)} w^2`.
    pub fn energy_between(&self, a: (f64, Side), b: (f64, Side), t: f64) -> f64 {
        self.energies_between(a, b, t).0
    }

    /// `int_{x_a(t)}^{x_b(t)} max(w, 0)^2`.
    pub fn positive_energy_between(&self, a: (f64, Side), b: (f64, Side), t: f64) -> f64 {
        self.energies_between(a, b, t).1
    }

    /// `x_b(t) - x_a(t)` summed per slot, so narrow windows keep full
    /// relative precision.
    pub fn width_between(&self, a: (f64, Side), b: (f64, Side), t: f64) -> f64 {
        let bp = self.profile.breakpoints();
        let n = self.meta.len();
        let ka = self.coord_key(self.coord(a.0, t, a.1));
        let kb = self.coord_key(self.coord(b.0, t, b.1));
        let (lo, hi, sign, zl, zh) = if ka <= kb {
            (ka, kb, 1.0, a.0, b.0)
        } else {
            (kb, ka, -1.0, b.0, a.0)
        };
        let mut acc = 0.0;
        if lo.0 < 0.0 {
            acc += if hi.0 < 0.0 { zh - zl } else { bp[0] - zl };
        }
        if hi.0 >= n as f64 {
            acc += if lo.0 >= n as f64 {
                zh - zl
            } else {
                zh - bp[n]
            };
        }
        for i in 0..n {
            let k = i as f64;
            if k < lo.0 || k > hi.0 {
                continue;
            }
            let from = if k == lo.0 { lo.1 } else { 0.0 };
            let to = if k == hi.0 { hi.1 } else { 1.0 };
            if to > from {
                acc += (to - from) * self.cell(i, t, TimeLimit::At).width;
            }
        }
        sign * acc
    }

    /// Total `int w^2` from closed-form cell energies.
    pub fn total_energy(&self, t: f64) -> f64 {
        (0..self.meta.len())
            .map(|i| self.cell(i, t, TimeLimit::At).energy)
            .fold(0.0, |a, b| a + b)
    }

    /// `u` at breakpoint `j` from the time integral of its forcing:
    /// `u_j(0) + 1/2 sum_{i<j} e_i (min(t, T_i) + kappa_i (t - T_i)_+)`.
    pub fn breakpoint_u_by_forcing(&self, j: usize, t: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..j {
            let m = &self.meta[i];
            let big_t = m.blowup_time;
            let late = (t - big_t).max(0.0);
            acc += m.energy * (t.min(big_t) + self.kappa[i] * late);
        }
        self.profile.knot_values()[j] + 0.5 * acc
    }

    /// `x` at breakpoint `j` from the double time integral of its forcing.
    pub fn breakpoint_x_by_forcing(&self, j: usize, t: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..j {
            let m = &self.meta[i];
            let big_t = m.blowup_time;
            let pre = if t <= big_t {
                0.5 * t * t
            } else {
                0.5 * big_t * big_t + big_t * (t - big_t)
            };
            let late = (t - big_t).max(0.0);
            acc += m.energy * (pre + 0.5 * self.kappa[i] * late * late);
        }
        self.profile.breakpoints()[j] + self.profile.knot_values()[j] * t + 0.5 * acc
    }
}

impl FrameProvider for Solution {
    fn breakpoints(&self) -> &[f64] {
        self.profile.breakpoints()
    }

    fn frame_at(&self, t: f64) -> Frame {
        self.build_frame(t, TimeLimit::At)
    }

    fn frame_left_limit(&self, t: f64) -> Frame {
        self.build_frame(t, TimeLimit::Left)
    }

    fn frame_right_limit(&self, t: f64) -> Frame {
        self.build_frame(t, TimeLimit::Right)
    }

    fn event_times(&self) -> Vec<f64> {
        self.events.times().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cusp() -> InitialProfile {
        InitialProfile::new(vec![0.0, 1.0], vec![-2.0], 0.0).unwrap()
    }

    fn two_cell() -> InitialProfile {
        InitialProfile::new(vec![-1.0, 0.0, 1.0], vec![1.0, -1.0], 0.0).unwrap()
    }

    #[test]
    fn breakpoint_routes_agree() {
        let policy = ContinuationPolicy::uniform(&two_cell(), 0.7);
        let s = Solution::new(two_cell(), &policy).unwrap();
        for &t in &[0.0, 0.3, 1.0, 1.999, 2.0, 2.5, 4.0] {
            let f = s.frame(t);
            for j in 0..3 {
                assert!(
                    (f.values[j] - s.breakpoint_u_by_forcing(j, t)).abs() < 1e-13,
                    "u t={t} j={j}"
                );
                assert!(
                    (f.positions[j] - s.breakpoint_x_by_forcing(j, t)).abs() < 1e-13,
                    "x t={t} j={j}"
                );
            }
        }
    }

    #[test]
    fn left_limit_keeps_collapsing_cell() {
        let s = Solution::dissipative(cusp());
        assert_eq!(s.frame(1.0).cells[0].kind, CellKind::Collapsed);
        let f = s.frame_left_limit(1.0);
        assert_eq!(f.cells[0].kind, CellKind::Alive);
        assert_eq!(f.cells[0].energy, 4.0);
    }

    #[test]
    fn energy_between_sides_of_fan() {
        let policy = ContinuationPolicy::uniform(&cusp(), 1.0);
        let s = Solution::new(cusp(), &policy).unwrap();
        let t = 2.0;
        assert_eq!(
            s.energy_between((-1.0, Side::Leftmost), (2.0, Side::Leftmost), t),
            4.0
        );
        assert_eq!(
            s.energy_between((0.5, Side::Leftmost), (0.5, Side::Rightmost), t),
            4.0
        );
        assert_eq!(
            s.energy_between((0.5, Side::Middle), (0.5, Side::Rightmost), t),
            2.0
        );
        assert_eq!(
            s.energy_between((0.5, Side::Rightmost), (0.5, Side::Leftmost), t),
            -4.0
        );
        assert_eq!(
            s.positive_energy_between((-1.0, Side::Leftmost), (2.0, Side::Leftmost), t),
            4.0
        );
    }

    #[test]
    fn width_between_matches_positions() {
        let policy = ContinuationPolicy::uniform(&two_cell(), 0.5);
        let s = Solution::new(two_cell(), &policy).unwrap();
        let labels = [-2.0, -1.0, -0.3, 0.0, 0.4, 1.0, 1.7];
        for &t in &[0.0, 0.7, 2.0, 3.3] {
            for &a in &labels {
                for &b in &labels {
                    for side in [Side::Leftmost, Side::Middle, Side::Rightmost] {
                        let xa = s.characteristic_state(a, t, side).x;
                        let xb = s.characteristic_state(b, t, Side::Leftmost).x;
                        let w = s.width_between((a, side), (b, Side::Leftmost), t);
                        assert!((w - (xb - xa)).abs() < 1e-13, "a={a} b={b} t={t}");
                    }
                }
            }
        }
    }
}
