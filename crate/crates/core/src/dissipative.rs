//! The unique dissipative solution.
//!
//! Event-driven in the sense that everything is keyed off the sorted list of
//! blow-up times; between two events the breakpoint trajectories are exact
//! polynomials, so no time stepping is involved.

use std::fmt::Write as _;

use crate::frame::{CellKind, Frame};
use crate::profile::{CellMeta, InitialProfile};
use crate::solution::{CharacteristicState, Side, Solution};

/// Distinct finite blow-up times with the cells collapsing at each.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventQueue {
    times: Vec<f64>,
    cells: Vec<Vec<usize>>,
}

impl EventQueue {
    pub fn from_profile(profile: &InitialProfile) -> Self {
        let mut finite: Vec<(f64, usize)> = profile
            .cell_meta()
            .iter()
            .filter(|m| m.blows_up())
            .map(|m| (m.blowup_time, m.index))
            .collect();
        finite.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut q = EventQueue::default();
        for (t, i) in finite {
            // equal stored times form one batch
            if q.times.last() == Some(&t) {
                q.cells.last_mut().unwrap().push(i);
            } else {
                q.times.push(t);
                q.cells.push(vec![i]);
            }
        }
        q
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[usize])> {
        self.times
            .iter()
            .copied()
            .zip(self.cells.iter().map(Vec::as_slice))
    }

    /// `0`, every event in `[0, t_end]`, midpoints of the gaps, and `t_end`.
    pub fn sampling_grid(&self, t_end: f64) -> Vec<f64> {
        let mut knots = vec![0.0];
        knots.extend(self.times.iter().copied().filter(|&t| t > 0.0 && t < t_end));
        if t_end > 0.0 {
            knots.push(t_end);
        }
        let mut grid = Vec::with_capacity(2 * knots.len());
        for (k, &t) in knots.iter().enumerate() {
            if k > 0 {
                grid.push(0.5 * (knots[k - 1] + t));
            }
            grid.push(t);
        }
        grid
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellStatus {
    Alive,
    Collapsed { at: f64 },
}

/// A cell of the dissipative solution at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellState {
    pub meta: CellMeta,
    pub status: CellStatus,
    pub width: f64,
    pub slope: f64,
}

pub fn cell_states(profile: &InitialProfile, t: f64) -> Vec<CellState> {
    let frame = solve_at(profile, t);
    profile
        .cell_meta()
        .into_iter()
        .zip(frame.cells)
        .map(|(meta, c)| CellState {
            meta,
            status: match c.kind {
                CellKind::Alive => CellStatus::Alive,
                _ => CellStatus::Collapsed {
                    at: meta.blowup_time,
                },
            },
            width: c.width,
            slope: c.slope,
        })
        .collect()
}

pub fn solve_at(profile: &InitialProfile, t: f64) -> Frame {
    Solution::dissipative(profile.clone()).frame(t)
}

pub fn characteristic_state(profile: &InitialProfile, zeta: f64, t: f64) -> CharacteristicState {
    Solution::dissipative(profile.clone()).characteristic_state(zeta, t, Side::Middle)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    pub integral_w2: f64,
    /// `E = 1/2 int w^2`.
    pub energy: f64,
}

pub fn energy_series(profile: &InitialProfile, t_grid: &[f64]) -> Vec<EnergySample> {
    t_grid
        .iter()
        .map(|&t| {
            let m = profile.survivor_mass(t);
            EnergySample {
                t,
                integral_w2: m,
                energy: 0.5 * m,
            }
        })
        .collect()
}

/// Fixed-width decimal with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with columns `t,total_energy,dissipative_bound,n_alive_cells`.
pub fn energy_csv(solution: &Solution, t_grid: &[f64]) -> String {
    let mut out = String::from("t,total_energy,dissipative_bound,n_alive_cells\n");
    for &t in t_grid {
        let frame = solution.frame(t);
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt17(t),
            fmt17(solution.total_energy(t)),
            fmt17(solution.profile().survivor_mass(t)),
            frame.n_alive()
        );
    }
    out
}
