//! Exact characteristic solver for the Hunter-Saxton equation
//!
//! ```text
//! u_t + (u^2 / 2)_x = 1/2 int_{-inf}^x w^2 dy,   w = u_x,
//! ```
//!
//! with piecewise-linear initial data, together with the machinery to check
//! energy and characteristic properties of the solutions it produces: the
//! dissipative solution, the family of energy-reinjecting continuations,
//! numerical characteristic tracing, the flow map of labels and its
//! generalized inverse, and an energy ledger comparing all of them.

// `!(x > 0.0)` style tests are deliberate: NaN has to fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod continuation;
pub mod dissipative;
pub mod energy_ledger;
pub mod error;
pub mod flow_map;
pub mod frame;
pub mod profile;
pub mod solution;
pub mod weak_form;

pub use continuation::{continue_with, ContinuationPolicy, ResurrectedCell};
pub use dissipative::{characteristic_state, energy_series, solve_at, EventQueue};
pub use energy_ledger::{compare, EnergyReport};
pub use error::{HsError, Result};
pub use flow_map::{build_flow_map, MonotoneFlowMap, StepFunction};
pub use frame::{CellKind, Frame, FrameCell, FrameProvider};
pub use profile::{CellMeta, InitialProfile, Region};
pub use solution::{CharacteristicState, Side, Solution};
