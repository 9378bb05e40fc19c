//! Energy accounting across continuations.
//!
//! Every quantity here is a finite sum of closed-form cell energies, so the
//! tolerances below only absorb summation roundoff.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::continuation::ContinuationPolicy;
use crate::dissipative::fmt17;
use crate::error::{HsError, Result};
use crate::flow_map::positive_energy;
use crate::profile::InitialProfile;
use crate::solution::{Side, Solution};

/// Absolute tolerance on energy margins.
pub const MARGIN_TOLERANCE: f64 = 1e-10;

pub const SCOPE_NOTE: &str =
    "verdicts cover the implemented continuation family (per-event resurrection coefficients) only";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyVerdict {
    /// `min_t (E_policy(t) - bound(t))`.
    pub min_margin: f64,
    pub never_below: bool,
    /// First grid time where the policy strictly exceeds the bound.
    pub first_exceed: Option<f64>,
    /// Each event with `kappa > 0` shows strict excess at the first grid
    /// point after it (vacuous when the grid ends first).
    pub strict_after_events: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub t: Vec<f64>,
    pub bound: Vec<f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub verdicts: BTreeMap<String, PolicyVerdict>,
    pub scope: String,
}

impl EnergyReport {
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|v| v.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `t,bound,<id>...` with ids in sorted order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,bound");
        for id in self.series.keys() {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for (k, t) in self.t.iter().enumerate() {
            out.push_str(&fmt17(*t));
            out.push(',');
            out.push_str(&fmt17(self.bound[k]));
            for s in self.series.values() {
                out.push(',');
                out.push_str(&fmt17(s[k]));
            }
            out.push('\n');
        }
        out
    }
}

fn verdict(solution: &Solution, grid: &[f64], series: &[f64], bound: &[f64]) -> PolicyVerdict {
    let margins: Vec<f64> = series.iter().zip(bound).map(|(e, b)| e - b).collect();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let never_below = min_margin >= -MARGIN_TOLERANCE;
    let first_exceed = margins
        .iter()
        .position(|&m| m > MARGIN_TOLERANCE)
        .map(|k| grid[k]);
    let strict_after_events = solution
        .meta()
        .iter()
        .filter(|m| m.blows_up() && solution.kappa()[m.index] > 0.0)
        .all(|m| match grid.iter().position(|&t| t > m.blowup_time) {
            Some(k) => margins[k] > MARGIN_TOLERANCE,
            None => true,
        });
    PolicyVerdict {
        min_margin,
        never_below,
        first_exceed,
        strict_after_events,
        passed: never_below && strict_after_events,
    }
}

/// Energies of every policy against the dissipative bound on `t_grid`.
///
/// One of the policies must be dissipative; its series has to reproduce the
/// bound exactly.
pub fn compare(
    profile: &InitialProfile,
    policies: &[(String, ContinuationPolicy)],
    t_grid: &[f64],
) -> Result<EnergyReport> {
    if !policies.iter().any(|(_, p)| p.is_dissipative()) {
        return Err(HsError::Invalid(
            "policy list must include the dissipative policy".into(),
        ));
    }
    let solutions = policies
        .iter()
        .map(|(id, p)| Solution::new(profile.clone(), p).map(|s| (id.clone(), s)))
        .collect::<Result<Vec<_>>>()?;
    let bound: Vec<f64> = t_grid.iter().map(|&t| profile.survivor_mass(t)).collect();

    let rows: Vec<(String, Vec<f64>, PolicyVerdict)> = std::thread::scope(|scope| {
        let handles: Vec<_> = solutions
            .iter()
            .map(|(id, s)| {
                let bound = &bound;
                scope.spawn(move || {
                    let series: Vec<f64> = t_grid.iter().map(|&t| s.total_energy(t)).collect();
                    let mut v = verdict(s, t_grid, &series, bound);
                    if s.is_dissipative() && series != *bound {
                        v.passed = false;
                    }
                    (id.clone(), series, v)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("policy worker"))
            .collect()
    });

    let mut series = BTreeMap::new();
    let mut verdicts = BTreeMap::new();
    for (id, s, v) in rows {
        if series.insert(id.clone(), s).is_some() {
            return Err(HsError::Invalid(format!("duplicate policy id {id:?}")));
        }
        verdicts.insert(id, v);
    }
    Ok(EnergyReport {
        t: t_grid.to_vec(),
        bound,
        series,
        verdicts,
        scope: SCOPE_NOTE.to_string(),
    })
}

/// `min_t [ int_{x_xi}^{x_zeta} w^2 - int_{I_t cap (xi, zeta)} w0^2 ]`, with
/// the leftmost characteristic from `xi` and the rightmost from `zeta`.
pub fn localized_energy_check(solution: &Solution, xi: f64, zeta: f64, t_grid: &[f64]) -> f64 {
    t_grid
        .iter()
        .map(|&t| {
            let lhs = solution.energy_between((xi, Side::Leftmost), (zeta, Side::Rightmost), t);
            lhs - solution.profile().survivor_mass_between(xi, zeta, t)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `|u(x_xi(t), t) - u0(xi) - 1/2 int_0^t int_{I_s cap (-inf, xi)} w0^2|`.
pub fn dissipative_characterization_check(solution: &Solution, xi: f64, t: f64) -> Result<f64> {
    if !solution.is_dissipative() {
        return Err(HsError::NotDissipative);
    }
    let p = solution.profile();
    let lhs = solution.characteristic_state(xi, t, Side::Middle).u;
    let integral: f64 = p
        .partial_energies_left_of(xi)
        .into_iter()
        .map(|(i, e)| e * t.min(p.meta(i).blowup_time))
        .fold(0.0, |a, b| a + b);
    Ok((lhs - p.eval_u(xi) - 0.5 * integral).abs())
}

/// Smallest increment of `E+` between consecutive grid times on the window
/// between labels `a < b`.
pub fn positive_energy_monotonicity_check(
    solution: &Solution,
    a: f64,
    b: f64,
    t_grid: &[f64],
) -> f64 {
    let series: Vec<f64> = t_grid
        .iter()
        .map(|&t| positive_energy(solution, a, b, t))
        .collect();
    series
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Grid of `n` points per gap between `0`, the event times and `t_end`,
/// including every event time.
pub fn refined_grid(profile: &InitialProfile, t_end: f64, n: usize) -> Vec<f64> {
    let events = crate::dissipative::EventQueue::from_profile(profile);
    let mut knots = vec![0.0];
    knots.extend(
        events
            .times()
            .iter()
            .copied()
            .filter(|&t| t > 0.0 && t < t_end),
    );
    knots.push(t_end);
    let mut grid = vec![0.0];
    for w in knots.windows(2) {
        for k in 1..=n {
            grid.push(if k == n {
                w[1]
            } else {
                w[0] + (w[1] - w[0]) * k as f64 / n as f64
            });
        }
    }
    grid
}

/// One line per policy: `id,min_margin,first_exceed,passed`.
pub fn verdict_lines(report: &EnergyReport) -> String {
    let mut out = String::new();
    for (id, v) in &report.verdicts {
        let first = v.first_exceed.map_or_else(|| "-".to_string(), fmt17);
        let _ = writeln!(out, "{id},{},{first},{}", fmt17(v.min_margin), v.passed);
    }
    out
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

    fn sweep(p: &InitialProfile, ks: &[f64]) -> Vec<(String, ContinuationPolicy)> {
        ks.iter()
            .map(|&k| (format!("k={k}"), ContinuationPolicy::uniform(p, k)))
            .collect()
    }

    #[test]
    fn cusp_sweep_ordering() {
        let p = cusp();
        let grid = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0];
        let r = compare(&p, &sweep(&p, &[0.0, 0.5, 1.0]), &grid).unwrap();
        assert!(r.passed());
        assert_eq!(r.bound, vec![4.0, 4.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.series["k=0"], r.bound);
        assert_eq!(r.series["k=0.5"][4], 2.0);
        assert_eq!(r.series["k=1"][4], 4.0);
        assert_eq!(r.verdicts["k=1"].first_exceed, Some(1.5));
        assert_eq!(r.verdicts["k=0"].first_exceed, None);
        // the newborn fan has zero width but carries its energy from the start
        assert_eq!(r.series["k=1"][2], 0.0);
    }

    #[test]
    fn monotone_data_has_no_events() {
        let p = InitialProfile::new(vec![0.0, 1.0, 3.0], vec![1.0, 0.5], 0.0).unwrap();
        let pols = vec![
            ("d".to_string(), ContinuationPolicy::dissipative()),
            ("u".to_string(), ContinuationPolicy::uniform(&p, 1.0)),
        ];
        let r = compare(&p, &pols, &[0.0, 1.0, 10.0]).unwrap();
        assert_eq!(r.series["d"], r.series["u"]);
        assert!(r.bound.iter().all(|&b| b == 1.5));
    }

    #[test]
    fn two_cell_policy_keeps_energy() {
        let p = two_cell();
        let pols = vec![
            ("d".to_string(), ContinuationPolicy::dissipative()),
            (
                "k".to_string(),
                ContinuationPolicy::dissipative().with(1, 1.0),
            ),
        ];
        let r = compare(&p, &pols, &[1.0, 2.0, 2.5]).unwrap();
        assert_eq!(r.bound, vec![2.0, 1.0, 1.0]);
        assert_eq!(r.series["k"], vec![2.0, 1.0, 2.0]);
        assert!(r.passed());
    }

    #[test]
    fn compare_requires_dissipative_and_is_order_invariant() {
        let p = cusp();
        let only = vec![("a".to_string(), ContinuationPolicy::uniform(&p, 1.0))];
        assert!(compare(&p, &only, &[0.0]).is_err());
        let mut pols = sweep(&p, &[0.0, 0.25, 1.0]);
        let grid = refined_grid(&p, 3.0, 4);
        let a = compare(&p, &pols, &grid).unwrap();
        pols.reverse();
        let b = compare(&p, &pols, &grid).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn report_serializes() {
        let p = cusp();
        let r = compare(&p, &sweep(&p, &[0.0, 1.0]), &[0.0, 2.0]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["bound"][0], 4.0);
        assert_eq!(v["series"]["k=1"][1], 4.0);
        assert!(v["verdicts"]["k=0"]["first_exceed"].is_null());
        let csv = r.to_csv();
        assert_eq!(csv.lines().next(), Some("t,bound,k=0,k=1"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn localized_inequality_examples() {
        let p = two_cell();
        let s = Solution::dissipative(p.clone());
        let grid = refined_grid(&p, 4.0, 8);
        for &(a, b) in &[(-1.0, 1.0), (-0.3, 0.4), (0.2, 0.9), (-5.0, 5.0)] {
            assert!(localized_energy_check(&s, a, b, &grid).abs() <= 1e-14);
        }
        let c = Solution::new(cusp(), &ContinuationPolicy::uniform(&cusp(), 1.0)).unwrap();
        assert_eq!(localized_energy_check(&c, -1.0, 2.0, &[2.0]), 4.0);
        assert_eq!(localized_energy_check(&s, 0.5, 0.5, &grid), 0.0);
    }

    #[test]
    fn characterization_examples() {
        let s = Solution::dissipative(two_cell());
        assert!(dissipative_characterization_check(&s, 0.0, 1.0).unwrap() <= 1e-15);
        assert_eq!(s.characteristic_state(0.0, 1.0, Side::Middle).u, 1.5);
        assert_eq!(
            dissipative_characterization_check(&s, -3.0, 2.0).unwrap(),
            0.0
        );
        let c = Solution::dissipative(cusp());
        assert!(dissipative_characterization_check(&c, 1.0, 0.5).unwrap() <= 1e-15);
        for &t in &[0.3, 1.0, 1.7, 4.0] {
            for &xi in &[0.0, 0.25, 0.5, 1.0, 2.0] {
                assert!(dissipative_characterization_check(&c, xi, t).unwrap() <= 1e-12);
            }
        }
        let k = Solution::new(cusp(), &ContinuationPolicy::uniform(&cusp(), 0.5)).unwrap();
        assert!(matches!(
            dissipative_characterization_check(&k, 1.0, 2.0),
            Err(HsError::NotDissipative)
        ));
    }

    #[test]
    fn positive_energy_never_decreases() {
        let p = InitialProfile::new(vec![0.0, 1.0, 2.0, 3.0], vec![2.0, -1.0, -3.0], 0.0).unwrap();
        for k in [0.0, 0.5, 1.0] {
            let s = Solution::new(p.clone(), &ContinuationPolicy::uniform(&p, k)).unwrap();
            let grid = refined_grid(&p, 5.0, 10);
            assert!(positive_energy_monotonicity_check(&s, -1.0, 4.0, &grid) >= -MARGIN_TOLERANCE);
        }
    }

    #[test]
    fn refined_grid_contains_events() {
        let g = refined_grid(&two_cell(), 3.0, 2);
        assert_eq!(g, vec![0.0, 1.0, 2.0, 2.5, 3.0]);
    }
}
