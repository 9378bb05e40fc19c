//! Non-dissipative weak continuations.
//!
//! At the blow-up of cell `i` a fraction `kappa_i` of the cell energy `e_i`
//! is re-injected as a fan `w = 2 / (t - T_i)` of width
//! `kappa_i e_i (t - T_i)^2 / 4`. For the single cusp (`e = 4`) this is the
//! classical one-parameter family with `k = kappa`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{HsError, Result};
use crate::frame::Frame;
use crate::profile::InitialProfile;
use crate::solution::Solution;

/// Per-event resurrection coefficients; missing cells default to 0.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContinuationPolicy {
    #[serde(default)]
    resurrect: BTreeMap<usize, f64>,
}

impl ContinuationPolicy {
    pub fn dissipative() -> Self {
        Self::default()
    }

    pub fn from_map(resurrect: BTreeMap<usize, f64>) -> Self {
        Self { resurrect }
    }

    /// Same `kappa` at every blow-up event of `profile`.
    pub fn uniform(profile: &InitialProfile, kappa: f64) -> Self {
        let resurrect = profile
            .cell_meta()
            .iter()
            .filter(|m| m.blows_up())
            .map(|m| (m.index, kappa))
            .collect();
        Self { resurrect }
    }

    /// Parse `{"resurrect": {"<cell_index>": kappa, ...}}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, BTreeMap<String, f64>> =
            serde_json::from_str(text).map_err(|e| HsError::Json(e.to_string()))?;
        let mut resurrect = BTreeMap::new();
        if let Some(entries) = raw.get("resurrect") {
            for (key, &k) in entries {
                let cell = key
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| HsError::BadCellKey(key.clone()))?;
                resurrect.insert(cell, k);
            }
        }
        Ok(Self { resurrect })
    }

    pub fn with(mut self, cell: usize, kappa: f64) -> Self {
        self.resurrect.insert(cell, kappa);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&usize, &f64)> {
        self.resurrect.iter()
    }

    pub fn kappa(&self, cell: usize) -> f64 {
        self.resurrect.get(&cell).copied().unwrap_or(0.0)
    }

    pub fn is_dissipative(&self) -> bool {
        self.resurrect.values().all(|&k| k == 0.0)
    }

    pub fn validate(&self, profile: &InitialProfile) -> Result<()> {
        let cells = profile.num_cells();
        for (&cell, &kappa) in &self.resurrect {
            if cell >= cells {
                return Err(HsError::CellOutOfRange { cell, cells });
            }
            if !(kappa >= 0.0) || !kappa.is_finite() {
                return Err(HsError::NegativeKappa { cell, kappa });
            }
            if !profile.meta(cell).blows_up() {
                return Err(HsError::NoBlowUp { cell });
            }
        }
        Ok(())
    }
}

/// The fan reopened at a blow-up event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResurrectedCell {
    pub birth: f64,
    pub kappa: f64,
    pub parent_energy: f64,
}

impl ResurrectedCell {
    pub fn slope(&self, t: f64) -> f64 {
        2.0 / (t - self.birth)
    }

    pub fn width(&self, t: f64) -> f64 {
        let age = t - self.birth;
        0.25 * self.kappa * self.parent_energy * age * age
    }

    pub fn energy(&self) -> f64 {
        self.kappa * self.parent_energy
    }
}

/// Fans that exist under `policy` (one per event with `kappa > 0`).
pub fn resurrected_cells(
    profile: &InitialProfile,
    policy: &ContinuationPolicy,
) -> Vec<(usize, ResurrectedCell)> {
    policy
        .iter()
        .filter(|(_, &k)| k > 0.0)
        .map(|(&i, &kappa)| {
            let m = profile.meta(i);
            (
                i,
                ResurrectedCell {
                    birth: m.blowup_time,
                    kappa,
                    parent_energy: m.energy,
                },
            )
        })
        .collect()
}

pub fn continue_with(
    profile: &InitialProfile,
    policy: &ContinuationPolicy,
    t: f64,
) -> Result<Frame> {
    if t < 0.0 {
        return Err(HsError::NegativeTime(t));
    }
    Ok(Solution::new(profile.clone(), policy)?.frame(t))
}
