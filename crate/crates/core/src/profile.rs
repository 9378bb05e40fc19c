//! Piecewise-linear initial data.
//!
//! `u0` is continuous and piecewise linear on the breakpoints `z_0 < ... < z_n`,
//! with slope `w0_i` on cell `(z_i, z_{i+1})` and zero slope outside the
//! support. Everything the solvers need (cell energies, blow-up times, the
//! surviving energy at time `t`) is a finite sum over cells.

use serde::{Deserialize, Serialize};

use crate::error::{HsError, Result};

/// Which part of the label line a point falls in.
///
/// Cells own half-open intervals `[z_i, z_{i+1})`; the last breakpoint
/// belongs to the right tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Left,
    Cell(usize),
    Right,
}

/// Piecewise-linear `u0` with compactly supported piecewise-constant slope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialProfile {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    anchor: f64,
    #[serde(skip)]
    knot_values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawProfile {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    #[serde(default)]
    anchor: f64,
}

impl<'de> Deserialize<'de> for InitialProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawProfile::deserialize(d)?;
        InitialProfile::new(raw.breakpoints, raw.slopes, raw.anchor)
            .map_err(serde::de::Error::custom)
    }
}

/// Per-cell invariants of the initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMeta {
    pub index: usize,
    pub width: f64,
    pub slope: f64,
    /// `slope^2 * width`.
    pub energy: f64,
    /// `-2 / slope` for negative slopes, `+inf` otherwise.
    pub blowup_time: f64,
}

impl CellMeta {
    pub fn blows_up(&self) -> bool {
        self.blowup_time.is_finite()
    }

    /// Membership in the survivor set `I_t`: strict inequality `t < T_i`.
    pub fn survives(&self, t: f64) -> bool {
        t < self.blowup_time
    }
}

/// Blow-up time of a cell with initial slope `w0`.
pub fn blowup_time(w0: f64) -> f64 {
    if w0 < 0.0 {
        -2.0 / w0
    } else {
        f64::INFINITY
    }
}

impl InitialProfile {
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<f64>, anchor: f64) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(HsError::TooFewBreakpoints(breakpoints.len()));
        }
        if slopes.len() + 1 != breakpoints.len() {
            return Err(HsError::SlopeCount {
                expected: breakpoints.len() - 1,
                breakpoints: breakpoints.len(),
                got: slopes.len(),
            });
        }
        for (index, z) in breakpoints.iter().enumerate() {
            if !z.is_finite() {
                return Err(HsError::NonFinite {
                    field: "breakpoints",
                    index,
                });
            }
            if index > 0 && *z <= breakpoints[index - 1] {
                return Err(HsError::NonIncreasingBreakpoint { index });
            }
        }
        if let Some(index) = slopes.iter().position(|w| !w.is_finite()) {
            return Err(HsError::NonFinite {
                field: "slopes",
                index,
            });
        }
        if !anchor.is_finite() {
            return Err(HsError::NonFiniteAnchor);
        }
        let mut knot_values = Vec::with_capacity(breakpoints.len());
        knot_values.push(anchor);
        for (i, w) in slopes.iter().enumerate() {
            let prev = knot_values[i];
            knot_values.push(prev + w * (breakpoints[i + 1] - breakpoints[i]));
        }
        Ok(Self {
            breakpoints,
            slopes,
            anchor,
            knot_values,
        })
    }

    /// Parse the JSON fragment `{"breakpoints": [...], "slopes": [...], "anchor": 0.0}`.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HsError::Json(e.to_string()))
    }

    /// The zero-slope profile on `[lo, hi]` with the given constant value.
    pub fn flat(lo: f64, hi: f64, value: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![0.0], value)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn num_cells(&self) -> usize {
        self.slopes.len()
    }

    /// `u0` at each breakpoint.
    pub fn knot_values(&self) -> &[f64] {
        &self.knot_values
    }

    pub fn support(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn width(&self, i: usize) -> f64 {
        self.breakpoints[i + 1] - self.breakpoints[i]
    }

    pub fn cell_meta(&self) -> Vec<CellMeta> {
        (0..self.num_cells()).map(|i| self.meta(i)).collect()
    }

    pub fn meta(&self, i: usize) -> CellMeta {
        let width = self.width(i);
        let slope = self.slopes[i];
        CellMeta {
            index: i,
            width,
            slope,
            energy: slope * slope * width,
            blowup_time: blowup_time(slope),
        }
    }

    pub fn locate(&self, zeta: f64) -> Region {
        let (lo, hi) = self.support();
        if zeta < lo {
            Region::Left
        } else if zeta >= hi {
            Region::Right
        } else {
            // first breakpoint strictly greater than zeta, minus one
            let k = self.breakpoints.partition_point(|&b| b <= zeta);
            Region::Cell(k - 1)
        }
    }

    /// `w0(zeta)` with the half-open cell convention.
    pub fn slope_at(&self, zeta: f64) -> f64 {
        match self.locate(zeta) {
            Region::Cell(i) => self.slopes[i],
            _ => 0.0,
        }
    }

    pub fn eval_u(&self, x: f64) -> f64 {
        match self.locate(x) {
            Region::Left => self.anchor,
            Region::Right => *self.knot_values.last().unwrap(),
            Region::Cell(i) => self.knot_values[i] + self.slopes[i] * (x - self.breakpoints[i]),
        }
    }

    pub fn total_energy(&self) -> f64 {
        self.cell_meta()
            .iter()
            .map(|c| c.energy)
            .fold(0.0, |a, b| a + b)
    }

    /// Largest `|w0|`, the Lipschitz constant of `u0`.
    pub fn max_abs_slope(&self) -> f64 {
        self.slopes.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// `int_{I_t} w0^2`: energy of cells with `t < T_i`.
    pub fn survivor_mass(&self, t: f64) -> f64 {
        self.cell_meta()
            .iter()
            .filter(|c| c.survives(t))
            .map(|c| c.energy)
            .fold(0.0, |a, b| a + b)
    }

    /// `int_{I_t cap (a, b)} w0^2`.
    pub fn survivor_mass_between(&self, a: f64, b: f64, t: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        self.cell_meta()
            .iter()
            .filter(|c| c.survives(t))
            .map(|c| {
                let lo = self.breakpoints[c.index].max(a);
                let hi = self.breakpoints[c.index + 1].min(b);
                if hi > lo {
                    c.slope * c.slope * (hi - lo)
                } else {
                    0.0
                }
            })
            .fold(0.0, |a, b| a + b)
    }

    /// Energy of `w0` on `(-inf, zeta)` restricted to each cell: returns
    /// `(cell, partial energy)` pairs for cells intersecting the half-line.
    pub fn partial_energies_left_of(&self, zeta: f64) -> Vec<(usize, f64)> {
        (0..self.num_cells())
            .filter_map(|i| {
                let lo = self.breakpoints[i];
                let hi = self.breakpoints[i + 1].min(zeta);
                (hi > lo).then(|| (i, self.slopes[i] * self.slopes[i] * (hi - lo)))
            })
            .collect()
    }
}
