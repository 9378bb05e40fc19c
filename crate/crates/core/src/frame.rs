//! Snapshots of a solution at a fixed time.

/// State of one cell slot in a [`Frame`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellKind {
    Alive,
    /// Collapsed to a point at its blow-up time; zero width, no energy.
    Collapsed,
    /// A self-similar fan born at `birth` in place of a collapsed cell.
    Resurrected {
        birth: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameCell {
    pub kind: CellKind,
    pub width: f64,
    /// `w` on the cell; 0 for collapsed cells.
    pub slope: f64,
    /// Closed-form `int w^2` over the cell.
    pub energy: f64,
}

impl FrameCell {
    pub fn is_alive(&self) -> bool {
        self.kind == CellKind::Alive
    }
}

/// Piecewise-linear profile `u(., t)`.
///
/// `positions` and `values` have one entry per label breakpoint; cell `i`
/// spans `positions[i]..positions[i + 1]`. Outside the support `u` is
/// constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub positions: Vec<f64>,
    pub values: Vec<f64>,
    pub cells: Vec<FrameCell>,
}

impl Frame {
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_alive(&self) -> usize {
        self.cells.iter().filter(|c| c.is_alive()).count()
    }

    /// Cell with `positions[i] <= x < positions[i + 1]`, skipping zero-width cells.
    fn cell_containing(&self, x: f64) -> Option<usize> {
        let n = self.cells.len();
        if x < self.positions[0] || x >= self.positions[n] {
            return None;
        }
        let j = self.positions.partition_point(|&p| p <= x);
        Some(j - 1)
    }

    pub fn eval_u(&self, x: f64) -> f64 {
        let n = self.cells.len();
        if x < self.positions[0] {
            return self.values[0];
        }
        match self.cell_containing(x) {
            Some(i) => self.values[i] + self.cells[i].slope * (x - self.positions[i]),
            None => self.values[n],
        }
    }

    /// `w(x, t)`, zero outside the support.
    pub fn eval_w(&self, x: f64) -> f64 {
        self.cell_containing(x).map_or(0.0, |i| self.cells[i].slope)
    }

    /// `F(x) = int_{-inf}^x w^2`, integrated from slopes and positions.
    pub fn forcing(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (i, c) in self.cells.iter().enumerate() {
            let lo = self.positions[i];
            let hi = self.positions[i + 1];
            if x <= lo {
                break;
            }
            let w2 = c.slope * c.slope;
            if x >= hi {
                acc += w2 * c.width;
            } else {
                acc += w2 * (x - lo);
                break;
            }
        }
        acc
    }

    /// Quadrature of `w^2` over the frame: exact for piecewise-constant `w`.
    pub fn integral_w2(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| c.slope * c.slope * c.width)
            .fold(0.0, |a, b| a + b)
    }

    /// Quadrature of `max(w, 0)^2`.
    pub fn integral_w2_positive(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| c.slope.max(0.0).powi(2) * c.width)
            .fold(0.0, |a, b| a + b)
    }

    /// Sum of closed-form cell energies for cells `0..i`.
    pub fn energy_left_of_cell(&self, i: usize) -> f64 {
        self.cells[..i]
            .iter()
            .map(|c| c.energy)
            .fold(0.0, |a, b| a + b)
    }

    pub fn total_energy(&self) -> f64 {
        self.cells.iter().map(|c| c.energy).fold(0.0, |a, b| a + b)
    }

    /// Largest `|u|` over the frame.
    pub fn sup_abs_u(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Anything that can produce frames of a solution on `[0, horizon]`.
///
/// Labels are the initial breakpoints: frame cell `i` is the image of the
/// label cell `breakpoints[i]..breakpoints[i + 1]`.
pub trait FrameProvider: Sync {
    fn breakpoints(&self) -> &[f64];

    fn frame_at(&self, t: f64) -> Frame;

    /// Left limit in time: cells collapsing exactly at `t` still count as alive.
    fn frame_left_limit(&self, t: f64) -> Frame {
        self.frame_at(t)
    }

    /// Right limit in time: fans born exactly at `t` are already present.
    fn frame_right_limit(&self, t: f64) -> Frame {
        self.frame_at(t)
    }

    /// Times at which the frame changes non-smoothly, sorted.
    fn event_times(&self) -> Vec<f64>;

    fn horizon(&self) -> f64 {
        f64::INFINITY
    }
}
