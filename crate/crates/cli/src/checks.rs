//! Verdict table: one row per (check, target).

use std::fmt::Write as _;

use hsx_core::characteristics::{
    exponential_identity_check, integrate_characteristic, pair_diagnostics, riccati_check,
};
use hsx_core::dissipative::fmt17;
use hsx_core::energy_ledger::{
    compare, dissipative_characterization_check, localized_energy_check,
    positive_energy_monotonicity_check, MARGIN_TOLERANCE,
};
use hsx_core::flow_map::{
    build_flow_map, derivative_bound_check, stieltjes_change_of_variables_check, StepFunction,
};
use hsx_core::weak_form::{weak_residual, ScaledSlope, TestFunction, Window};
use hsx_core::{FrameProvider, Side, Solution};
use serde::Serialize;

use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Pass {
    /// `value >= threshold`.
    AtLeast,
    /// `value <= threshold`.
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub target: String,
    pub value: f64,
    pub threshold: f64,
    pub rule: Pass,
    pub passed: bool,
}

fn row(check: &str, target: String, value: f64, threshold: f64, rule: Pass) -> Verdict {
    let passed = match rule {
        Pass::AtLeast => value >= threshold,
        Pass::AtMost => value <= threshold,
    };
    Verdict {
        check: check.to_string(),
        target,
        value,
        threshold,
        rule,
        passed,
    }
}

pub fn table_csv(rows: &[Verdict]) -> String {
    let mut out = String::from("check,target,value,threshold,passed\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.check,
            r.target,
            fmt17(r.value),
            fmt17(r.threshold),
            if r.passed { "pass" } else { "fail" }
        );
    }
    out
}

pub fn table_text(rows: &[Verdict]) -> String {
    let w_check = rows.iter().map(|r| r.check.len()).max().unwrap_or(5).max(5);
    let w_target = rows
        .iter()
        .map(|r| r.target.len())
        .max()
        .unwrap_or(6)
        .max(6);
    let mut out = format!(
        "{:<w_check$}  {:<w_target$}  {:>24}  {:>24}  verdict\n",
        "check", "target", "value", "threshold"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<w_check$}  {:<w_target$}  {:>24}  {:>24}  {}",
            r.check,
            r.target,
            fmt17(r.value),
            fmt17(r.threshold),
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
    out
}

pub struct Context<'a> {
    pub scenario: &'a Scenario,
    pub solutions: Vec<(String, Solution)>,
}

impl<'a> Context<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self, String> {
        let solutions = scenario
            .policies
            .iter()
            .map(|(id, p)| {
                Solution::new(scenario.profile.clone(), p)
                    .map(|s| (id.clone(), s))
                    .map_err(|e| format!("policies[{id:?}]: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            scenario,
            solutions,
        })
    }

    pub fn dissipative(&self) -> &Solution {
        &self
            .solutions
            .iter()
            .find(|(_, s)| s.is_dissipative())
            .expect("scenarios always carry the dissipative policy")
            .1
    }
}

fn window_name(a: f64, b: f64) -> String {
    format!("({a};{b})")
}

fn energy_order(ctx: &Context, rows: &mut Vec<Verdict>) -> Result<(), String> {
    let sc = ctx.scenario;
    let report = compare(&sc.profile, &sc.policies, &sc.grid).map_err(|e| e.to_string())?;
    for (id, v) in &report.verdicts {
        let mut r = row(
            "energy_order",
            id.clone(),
            v.min_margin,
            -MARGIN_TOLERANCE,
            Pass::AtLeast,
        );
        r.passed &= v.passed;
        rows.push(r);
    }
    Ok(())
}

fn localized_energy(ctx: &Context, rows: &mut Vec<Verdict>) {
    for (id, s) in &ctx.solutions {
        for &(a, b) in &ctx.scenario.windows {
            let m = localized_energy_check(s, a, b, &ctx.scenario.grid);
            rows.push(row(
                "localized_energy",
                format!("{id} {}", window_name(a, b)),
                m,
                -MARGIN_TOLERANCE,
                Pass::AtLeast,
            ));
        }
    }
}

fn characterization(ctx: &Context, rows: &mut Vec<Verdict>) -> Result<(), String> {
    let s = ctx.dissipative();
    let mut labels: Vec<f64> = ctx
        .scenario
        .windows
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect();
    labels.extend(ctx.scenario.pairs.iter().flat_map(|&(a, b)| [a, b]));
    labels.extend(s.profile().breakpoints());
    labels.sort_by(f64::total_cmp);
    labels.dedup();
    let mut worst = 0.0_f64;
    for &xi in &labels {
        for &t in &ctx.scenario.grid {
            worst =
                worst.max(dissipative_characterization_check(s, xi, t).map_err(|e| e.to_string())?);
        }
    }
    rows.push(row(
        "characterization",
        format!("{} labels", labels.len()),
        worst,
        1e-12,
        Pass::AtMost,
    ));
    Ok(())
}

fn pair_checks(ctx: &Context, rows: &mut Vec<Verdict>) -> Result<(), String> {
    let sc = ctx.scenario;
    let s = ctx.dissipative();
    for &(z0, z1) in &sc.pairs {
        let p = s.profile();
        let omega0 = (p.eval_u(z1) - p.eval_u(z0)) / (z1 - z0);
        let mut t_end = sc.t_end;
        if omega0 < 0.0 {
            t_end = t_end.min(0.9 * -2.0 / omega0);
        }
        let a = integrate_characteristic(s, z0, t_end, sc.dt, Side::Middle)
            .map_err(|e| e.to_string())?;
        let b = integrate_characteristic(s, z1, t_end, sc.dt, Side::Middle)
            .map_err(|e| e.to_string())?;
        let d = pair_diagnostics(&a, &b).map_err(|e| e.to_string())?;
        let target = window_name(z0, z1);
        if sc.wants("riccati") {
            let m = riccati_check(&d).map_err(|e| format!("pair {target}: {e}"))?;
            rows.push(row("riccati", target.clone(), m, -1e-8, Pass::AtLeast));
        }
        if sc.wants("exponential") {
            rows.push(row(
                "exponential",
                target,
                exponential_identity_check(&d),
                1e-5,
                Pass::AtMost,
            ));
        }
    }
    Ok(())
}

fn flow_checks(ctx: &Context, rows: &mut Vec<Verdict>) {
    let sc = ctx.scenario;
    for (id, s) in &ctx.solutions {
        if sc.wants("derivative_bound") {
            let m = sc
                .grid
                .iter()
                .map(|&t| derivative_bound_check(&build_flow_map(s, t), &sc.profile, t))
                .fold(f64::INFINITY, f64::min);
            // no affine piece left means nothing to bound
            let m = if m.is_finite() { m } else { 0.0 };
            rows.push(row(
                "derivative_bound",
                id.clone(),
                m,
                -1e-12,
                Pass::AtLeast,
            ));
        }
        if sc.wants("change_of_variables") {
            let mut worst = 0.0_f64;
            for &t in &sc.grid {
                let map = build_flow_map(s, t);
                for &(a, b) in &sc.windows {
                    let f = StepFunction::indicator(a, b);
                    let c = stieltjes_change_of_variables_check(&f, &map, a - 1.0, b + 1.0);
                    worst = worst
                        .max(c.mismatch / 1f64.max(c.stieltjes.abs()).max(c.pulled_back.abs()));
                }
            }
            rows.push(row(
                "change_of_variables",
                id.clone(),
                worst,
                1e-12,
                Pass::AtMost,
            ));
        }
    }
}

fn positive_energy(ctx: &Context, rows: &mut Vec<Verdict>) {
    for (id, s) in &ctx.solutions {
        for &(a, b) in &ctx.scenario.windows {
            let m = positive_energy_monotonicity_check(s, a, b, &ctx.scenario.grid);
            let m = if m.is_finite() { m } else { 0.0 };
            rows.push(row(
                "positive_energy",
                format!("{id} {}", window_name(a, b)),
                m,
                -MARGIN_TOLERANCE,
                Pass::AtLeast,
            ));
        }
    }
}

/// Window covering every frame position on the grid with a margin of one.
fn residual_window(s: &Solution, grid: &[f64]) -> Window {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in grid {
        let f = s.frame(t);
        lo = lo.min(f.positions[0]);
        hi = hi.max(*f.positions.last().unwrap());
    }
    Window::new(lo - 1.0, hi + 1.0, 0.0, *grid.last().unwrap())
}

fn weak(ctx: &Context, rows: &mut Vec<Verdict>) -> Result<(), String> {
    let sc = ctx.scenario;
    for (id, s) in &ctx.solutions {
        let window = residual_window(s, &sc.grid);
        let tests = TestFunction::grid(&window, 6, 3);
        let res = match &sc.fault {
            Some(f) if &f.policy == id => {
                let fault = ScaledSlope {
                    inner: s,
                    cell: f.cell,
                    factor: f.factor,
                };
                residual(&fault, &window, &tests)?
            }
            _ => residual(s, &window, &tests)?,
        };
        rows.push(row("weak_residual", id.clone(), res, 1e-6, Pass::AtMost));
    }
    Ok(())
}

fn residual<P: FrameProvider>(
    p: &P,
    window: &Window,
    tests: &[TestFunction],
) -> Result<f64, String> {
    weak_residual(p, window, tests)
        .map(|r| r.max)
        .map_err(|e| e.to_string())
}

pub fn run_checks(ctx: &Context) -> Result<Vec<Verdict>, String> {
    let sc = ctx.scenario;
    let mut rows = Vec::new();
    if sc.wants("energy_order") {
        energy_order(ctx, &mut rows)?;
    }
    if sc.wants("localized_energy") {
        localized_energy(ctx, &mut rows);
    }
    if sc.wants("characterization") {
        characterization(ctx, &mut rows)?;
    }
    if sc.wants("riccati") || sc.wants("exponential") {
        pair_checks(ctx, &mut rows)?;
    }
    flow_checks(ctx, &mut rows);
    if sc.wants("positive_energy") {
        positive_energy(ctx, &mut rows);
    }
    if sc.wants("weak_residual") {
        weak(ctx, &mut rows)?;
    }
    Ok(rows)
}
