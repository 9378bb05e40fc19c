//! Scenario files: one JSON document per run.

use std::collections::BTreeMap;
use std::path::Path;

use hsx_core::dissipative::EventQueue;
use hsx_core::energy_ledger::refined_grid;
use hsx_core::{ContinuationPolicy, InitialProfile};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub id: String,
    /// Per-cell coefficients, keyed by cell index.
    #[serde(default)]
    pub resurrect: BTreeMap<String, f64>,
    /// Same coefficient on every blow-up cell; combined with `resurrect`,
    /// explicit entries win.
    #[serde(default)]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_end: Option<f64>,
    /// Points per gap between events.
    pub refine: Option<usize>,
    /// Explicit grid; overrides `t_end`/`refine`.
    pub times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSpec {
    pub policy: String,
    pub cell: usize,
    pub factor: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub profile: serde_json::Value,
    #[serde(default)]
    pub policies: Vec<PolicySpec>,
    #[serde(default)]
    pub t_grid: GridSpec,
    pub dt: Option<f64>,
    pub checks: Option<Vec<String>>,
    #[serde(default)]
    pub pairs: Vec<(f64, f64)>,
    #[serde(default)]
    pub windows: Vec<(f64, f64)>,
    #[serde(default)]
    pub traces: Vec<f64>,
    pub fault_injection: Option<FaultSpec>,
}

pub const ALL_CHECKS: [&str; 9] = [
    "energy_order",
    "localized_energy",
    "characterization",
    "riccati",
    "exponential",
    "derivative_bound",
    "change_of_variables",
    "positive_energy",
    "weak_residual",
];

#[derive(Debug, Clone)]
pub struct Scenario {
    pub profile: InitialProfile,
    pub policies: Vec<(String, ContinuationPolicy)>,
    pub grid: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub checks: Vec<String>,
    pub pairs: Vec<(f64, f64)>,
    pub windows: Vec<(f64, f64)>,
    pub traces: Vec<f64>,
    pub fault: Option<FaultSpec>,
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub kappa_sweep: Option<Vec<f64>>,
}

/// `lo:hi:n` into `n` evenly spaced values.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(format!("--kappa-sweep expects lo:hi:n, got {spec:?}"));
    };
    let lo: f64 = lo
        .parse()
        .map_err(|_| format!("--kappa-sweep: bad lower bound {lo:?}"))?;
    let hi: f64 = hi
        .parse()
        .map_err(|_| format!("--kappa-sweep: bad upper bound {hi:?}"))?;
    let n: usize = n
        .parse()
        .map_err(|_| format!("--kappa-sweep: bad count {n:?}"))?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(format!(
            "--kappa-sweep: need finite lo <= hi and n >= 1, got {spec:?}"
        ));
    }
    Ok((0..n)
        .map(|j| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * j as f64 / (n - 1) as f64
            }
        })
        .collect())
}

fn policy_from_spec(
    spec: &PolicySpec,
    profile: &InitialProfile,
) -> Result<ContinuationPolicy, String> {
    let mut policy = match spec.kappa {
        Some(k) if k < 0.0 || !k.is_finite() => {
            return Err(format!(
                "policies[{:?}].kappa: must be finite and >= 0, got {k}",
                spec.id
            ))
        }
        Some(k) => ContinuationPolicy::uniform(profile, k),
        None => ContinuationPolicy::dissipative(),
    };
    for (key, &k) in &spec.resurrect {
        let cell: usize = key.parse().map_err(|_| {
            format!(
                "policies[{:?}].resurrect: key {key:?} is not a cell index",
                spec.id
            )
        })?;
        policy = policy.with(cell, k);
    }
    policy
        .validate(profile)
        .map_err(|e| format!("policies[{:?}]: {e}", spec.id))?;
    Ok(policy)
}

fn default_t_end(profile: &InitialProfile) -> f64 {
    let last = EventQueue::from_profile(profile)
        .times()
        .last()
        .copied()
        .unwrap_or(0.0);
    (1.5 * last).max(2.0)
}

impl Scenario {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text, overrides).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str, overrides: &Overrides) -> Result<Self, String> {
        let raw: RawScenario = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let profile: InitialProfile =
            serde_json::from_value(raw.profile).map_err(|e| format!("profile: {e}"))?;

        let mut policies = Vec::new();
        for spec in &raw.policies {
            if policies.iter().any(|(id, _)| id == &spec.id) {
                return Err(format!("policies: duplicate id {:?}", spec.id));
            }
            policies.push((spec.id.clone(), policy_from_spec(spec, &profile)?));
        }
        if let Some(sweep) = &overrides.kappa_sweep {
            policies.clear();
            for &k in sweep {
                policies.push((format!("k={k}"), ContinuationPolicy::uniform(&profile, k)));
            }
        }
        if !policies.iter().any(|(_, p)| p.is_dissipative()) {
            policies.insert(
                0,
                ("dissipative".to_string(), ContinuationPolicy::dissipative()),
            );
        }

        let t_end = overrides
            .t_end
            .or(raw.t_grid.t_end)
            .unwrap_or_else(|| default_t_end(&profile));
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(format!("t_grid.t_end: must be positive, got {t_end}"));
        }
        let grid = match &raw.t_grid.times {
            Some(times) if overrides.t_end.is_none() => {
                if times.is_empty() || times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
                    return Err("t_grid.times: need a nonempty list of finite times >= 0".into());
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err("t_grid.times: must be strictly increasing".into());
                }
                times.clone()
            }
            _ => {
                let refine = raw.t_grid.refine.unwrap_or(4);
                if refine == 0 {
                    return Err("t_grid.refine: must be >= 1".into());
                }
                refined_grid(&profile, t_end, refine)
            }
        };
        let t_end = *grid.last().unwrap();

        let dt = overrides.dt.or(raw.dt).unwrap_or(1e-3);
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(format!("dt: must be positive, got {dt}"));
        }

        let checks = match raw.checks {
            Some(list) => {
                for c in &list {
                    if !ALL_CHECKS.contains(&c.as_str()) {
                        return Err(format!(
                            "checks: unknown check {c:?} (known: {})",
                            ALL_CHECKS.join(", ")
                        ));
                    }
                }
                list
            }
            None => ALL_CHECKS.iter().map(|s| s.to_string()).collect(),
        };

        for (k, &(a, b)) in raw.pairs.iter().enumerate() {
            if !(a < b) {
                return Err(format!(
                    "pairs[{k}]: need first label < second label, got ({a}, {b})"
                ));
            }
        }
        let mut windows = raw.windows.clone();
        for (k, &(a, b)) in windows.iter().enumerate() {
            if !(a < b) {
                return Err(format!(
                    "windows[{k}]: need left label < right label, got ({a}, {b})"
                ));
            }
        }
        if windows.is_empty() {
            let (lo, hi) = profile.support();
            windows.push((lo - 1.0, hi + 1.0));
        }
        if let Some(f) = &raw.fault_injection {
            if !policies.iter().any(|(id, _)| id == &f.policy) {
                return Err(format!(
                    "fault_injection.policy: unknown policy {:?}",
                    f.policy
                ));
            }
            if f.cell >= profile.num_cells() {
                return Err(format!("fault_injection.cell: {} out of range", f.cell));
            }
        }

        Ok(Scenario {
            profile,
            policies,
            grid,
            t_end,
            dt,
            checks,
            pairs: raw.pairs,
            windows,
            traces: raw.traces,
            fault: raw.fault_injection,
        })
    }

    pub fn wants(&self, check: &str) -> bool {
        self.checks.iter().any(|c| c == check)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUSP: &str = r#"{"profile":{"breakpoints":[0,1],"slopes":[-2],"anchor":0}}"#;

    #[test]
    fn sweep_spec() {
        assert_eq!(
            parse_sweep("0:1:5").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(parse_sweep("0.5:0.5:1").unwrap(), vec![0.5]);
        assert!(parse_sweep("1:0:3").is_err());
        assert!(parse_sweep("0:1").is_err());
        assert!(parse_sweep("0:1:0").is_err());
    }

    #[test]
    fn defaults() {
        let s = Scenario::parse(CUSP, &Overrides::default()).unwrap();
        assert_eq!(s.policies.len(), 1);
        assert_eq!(s.t_end, 2.0);
        assert!(s.grid.contains(&1.0));
        assert_eq!(s.windows, vec![(-1.0, 2.0)]);
        assert_eq!(s.checks.len(), ALL_CHECKS.len());
    }

    #[test]
    fn sweep_replaces_policies() {
        let o = Overrides {
            kappa_sweep: Some(vec![0.5, 1.0]),
            ..Default::default()
        };
        let s = Scenario::parse(CUSP, &o).unwrap();
        let ids: Vec<&str> = s.policies.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, vec!["dissipative", "k=0.5", "k=1"]);
    }

    #[test]
    fn errors_name_fields() {
        let bad = r#"{"profile":{"breakpoints":[0,1],"slopes":[-2],"anchor":0},"policies":[{"id":"a","kappa":-1}]}"#;
        assert!(Scenario::parse(bad, &Overrides::default())
            .unwrap_err()
            .contains("kappa"));
        let bad = r#"{"profile":{"breakpoints":[0,1],"slopes":[-2],"anchor":0},"policies":[{"id":"a","resurrect":{"0":-1}}]}"#;
        assert!(Scenario::parse(bad, &Overrides::default())
            .unwrap_err()
            .contains("policies"));
        let bad = r#"{"profile":{"breakpoints":[1,0],"slopes":[-2],"anchor":0}}"#;
        assert!(Scenario::parse(bad, &Overrides::default())
            .unwrap_err()
            .starts_with("profile"));
        let bad = "{\n  \"profile\": 3,\n  \"bogus\": 1\n}";
        assert!(Scenario::parse(bad, &Overrides::default())
            .unwrap_err()
            .contains("line"));
        let bad = r#"{"profile":{"breakpoints":[0,1],"slopes":[-2],"anchor":0},"checks":["nope"]}"#;
        assert!(Scenario::parse(bad, &Overrides::default())
            .unwrap_err()
            .contains("nope"));
    }
}
