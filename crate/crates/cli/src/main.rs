//! `hsx`: run scenario files through the solver and its checks.
//!
//! Exit codes: 0 when every selected check passes, 1 on a check failure,
//! 2 on unreadable or invalid input.

// `!(x > 0.0)` style tests are deliberate: NaN has to fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod checks;
mod scenario;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hsx_core::characteristics::{integrate_characteristic, pair_diagnostics};
use hsx_core::dissipative::{energy_csv, fmt17};
use hsx_core::energy_ledger::{compare, EnergyReport};
use hsx_core::flow_map::build_flow_map;
use hsx_core::Side;

use checks::{run_checks, table_csv, table_text, Context, Verdict};
use scenario::{parse_sweep, Overrides, Scenario};

#[derive(Parser)]
#[command(name = "hsx", version, about = "Hunter-Saxton scenario runner")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Write energy series, frames, flow maps and traces.
    Solve(RunArgs),
    /// Compare every policy's energy against the dissipative bound.
    Compare(RunArgs),
    /// Run the selected checks and print the verdict table.
    Check(RunArgs),
    /// Energy comparison and localized inequality across a kappa sweep.
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Final time; replaces the scenario's grid with a refined one ending here.
    #[arg(long)]
    t_end: Option<f64>,
    /// Step for characteristic tracing.
    #[arg(long)]
    dt: Option<f64>,
    /// Uniform resurrection coefficients `lo:hi:n`, replacing the scenario's policies.
    #[arg(long, value_name = "LO:HI:N")]
    kappa_sweep: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

enum Failure {
    Input(String),
    Checks,
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure::Input(e)
    }
}

fn file_id(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._=-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(args: &RunArgs, require_sweep: bool) -> Result<Scenario, Failure> {
    let kappa_sweep = match &args.kappa_sweep {
        Some(spec) => Some(parse_sweep(spec)?),
        None if require_sweep => {
            return Err(Failure::Input("sweep needs --kappa-sweep lo:hi:n".into()))
        }
        None => None,
    };
    let overrides = Overrides {
        t_end: args.t_end,
        dt: args.dt,
        kappa_sweep,
    };
    let scenario = Scenario::load(&args.scenario, &overrides)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.out.display())))?;
    Ok(scenario)
}

fn frame_csv(frame: &hsx_core::Frame) -> String {
    let mut out = String::from("x,u\n");
    for (x, u) in frame.positions.iter().zip(&frame.values) {
        let _ = writeln!(out, "{},{}", fmt17(*x), fmt17(*u));
    }
    out
}

fn solve(args: &RunArgs) -> Result<(), Failure> {
    let sc = load(args, false)?;
    let ctx = Context::new(&sc)?;
    for (id, s) in &ctx.solutions {
        let fid = file_id(id);
        write(
            &args.out,
            &format!("energy_{fid}.csv"),
            &energy_csv(s, &sc.grid),
        )?;
        write(
            &args.out,
            &format!("frame_{fid}.csv"),
            &frame_csv(&s.frame(sc.t_end)),
        )?;
        write(
            &args.out,
            &format!("flow_map_{fid}.csv"),
            &build_flow_map(s, sc.t_end).to_csv(),
        )?;
        for (j, &zeta) in sc.traces.iter().enumerate() {
            let trace = integrate_characteristic(s, zeta, sc.t_end, sc.dt, Side::Middle)
                .map_err(|e| e.to_string())?;
            write(&args.out, &format!("trace_{fid}_{j}.csv"), &trace.to_csv())?;
        }
        println!(
            "{id}: energy {} at t={} (bound {})",
            fmt17(s.total_energy(sc.t_end)),
            fmt17(sc.t_end),
            fmt17(sc.profile.survivor_mass(sc.t_end))
        );
    }
    let s = ctx.dissipative();
    for (j, &(z0, z1)) in sc.pairs.iter().enumerate() {
        let a = integrate_characteristic(s, z0, sc.t_end, sc.dt, Side::Middle)
            .map_err(|e| e.to_string())?;
        let b = integrate_characteristic(s, z1, sc.t_end, sc.dt, Side::Middle)
            .map_err(|e| e.to_string())?;
        let d = pair_diagnostics(&a, &b).map_err(|e| e.to_string())?;
        write(&args.out, &format!("pair_{j}.csv"), &d.to_csv())?;
    }
    Ok(())
}

fn write_report(dir: &Path, report: &EnergyReport) -> Result<(), Failure> {
    write(dir, "report.json", &(report.to_json() + "\n"))?;
    write(dir, "report.csv", &report.to_csv())
}

fn finish(dir: &Path, rows: &[Verdict]) -> Result<(), Failure> {
    write(dir, "verdicts.csv", &table_csv(rows))?;
    let json = serde_json::to_string_pretty(rows).map_err(|e| e.to_string())?;
    write(dir, "verdicts.json", &(json + "\n"))?;
    print!("{}", table_text(rows));
    if rows.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn energy_rows(report: &EnergyReport) -> Vec<Verdict> {
    report
        .verdicts
        .iter()
        .map(|(id, v)| Verdict {
            check: "energy_order".into(),
            target: id.clone(),
            value: v.min_margin,
            threshold: -hsx_core::energy_ledger::MARGIN_TOLERANCE,
            rule: checks::Pass::AtLeast,
            passed: v.passed,
        })
        .collect()
}

fn compare_verb(args: &RunArgs) -> Result<(), Failure> {
    let sc = load(args, false)?;
    let report = compare(&sc.profile, &sc.policies, &sc.grid).map_err(|e| e.to_string())?;
    write_report(&args.out, &report)?;
    finish(&args.out, &energy_rows(&report))
}

fn check(args: &RunArgs) -> Result<(), Failure> {
    let sc = load(args, false)?;
    let ctx = Context::new(&sc)?;
    let rows = run_checks(&ctx)?;
    finish(&args.out, &rows)
}

fn sweep(args: &RunArgs) -> Result<(), Failure> {
    let mut sc = load(args, true)?;
    let report = compare(&sc.profile, &sc.policies, &sc.grid).map_err(|e| e.to_string())?;
    write_report(&args.out, &report)?;
    sc.checks = vec!["localized_energy".into()];
    let ctx = Context::new(&sc)?;
    let mut rows = energy_rows(&report);
    rows.extend(run_checks(&ctx)?);

    let mut csv = String::from("policy,kappa,energy_t_end,bound_t_end\n");
    let last = sc.grid.len() - 1;
    for (id, p) in &sc.policies {
        let kappa = p.iter().map(|(_, &k)| k).fold(0.0, f64::max);
        let _ = writeln!(
            csv,
            "{id},{},{},{}",
            fmt17(kappa),
            fmt17(report.series[id][last]),
            fmt17(report.bound[last])
        );
    }
    write(&args.out, "sweep.csv", &csv)?;
    finish(&args.out, &rows)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.verb {
        Verb::Solve(a) => solve(a),
        Verb::Compare(a) => compare_verb(a),
        Verb::Check(a) => check(a),
        Verb::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => {
            eprintln!("hsx: one or more checks failed");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("hsx: {msg}");
            ExitCode::from(2)
        }
    }
}
