//! `szego`: spectra, exact trajectories, soliton resolution, growth rates,
//! action-angle coordinates and oracle validation for rational data.

mod config;
mod io;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;
use szego_core::action_angle::{chi, chi_inverse, szego_flow};
use szego_core::asymptotics::{growth_fit, nongeneric_analysis, remainder_norms, FitWindow};
use szego_core::flow::{trajectory, trajectory_csv, Observables};
use szego_core::hankel::{analyze, eigendecompose, Genericity};
use szego_core::oracle::{box_refinement, compare, OracleConfig};
use szego_core::par::Execution;
use szego_core::sample::{random_coords, rng};
use szego_core::SzegoError;

use config::Opts;
use io::{load_coords, load_symbol, parse_list, parse_times, Outputs};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Io(String),
    Math(SzegoError),
    /// A check ran to completion but exceeded its tolerance.
    Tolerance(String),
}

impl From<SzegoError> for CliError {
    fn from(e: SzegoError) -> Self {
        CliError::Math(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Math(e) => e.exit_code() as u8,
            CliError::Tolerance(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Math(e) => write!(f, "{e}"),
            CliError::Tolerance(m) => write!(f, "tolerance exceeded: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "szego", version, about = "Exact evolution of the cubic Szegő equation on the line")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Eigendata of H_u² and the genericity class.
    Spectrum,
    /// Trajectory CSV with conservation laws and Sobolev norms.
    Evolve,
    /// Soliton parameters and remainder decay (strongly generic data).
    Solitons,
    /// Sobolev growth rates and the double-eigenvalue pole tracks.
    Growth,
    /// Action-angle coordinates, or the inverse map with --coords.
    Actionangle,
    /// Random coordinates through chi_inverse and back.
    Roundtrip,
    /// Explicit formula against the pseudo-spectral oracle.
    Validate,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Spectrum => "spectrum",
            Cmd::Evolve => "evolve",
            Cmd::Solitons => "solitons",
            Cmd::Growth => "growth",
            Cmd::Actionangle => "actionangle",
            Cmd::Roundtrip => "roundtrip",
            Cmd::Validate => "validate",
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn exec(o: &Opts) -> Execution {
    if o.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn spectrum(o: &Opts, out: &mut Outputs) -> Result<(), CliError> {
    let dec = eigendecompose(&load_symbol(o)?)?;
    let mut v = dec.to_json();
    v["lambda_sq"] = json!(dec.lambdas.iter().map(|l| l * l).collect::<Vec<_>>());
    v["rank"] = json!(dec.rank());
    out.emit("spectrum.json", &pretty(&v), true)
}

fn evolve(o: &Opts, out: &mut Outputs) -> Result<(), CliError> {
    let u = load_symbol(o)?;
    let (dec, tm) = analyze(&u)?;
    let times = parse_times(o.times.as_deref().unwrap_or("lin:0:10:11"))?;
    let obs = Observables {
        jmax: o.jmax.unwrap_or(4),
        sobolev: o.s.as_deref().map(|s| parse_list("s", s)).transpose()?.unwrap_or_default(),
    };
    let rows = trajectory(&dec, &tm, &times, &obs, exec(o))?;
    out.emit("trajectory.csv", &trajectory_csv(&rows, &obs), true)?;
    let tol = o.tol.unwrap_or(1e-9);
    let mut drift: f64 = 0.0;
    for r in &rows {
        for (j, j0) in r.j.iter().zip(&rows[0].j) {
            drift = drift.max((j - j0).abs() / j0.abs().max(f64::MIN_POSITIVE));
        }
    }
    if drift > tol {
        return Err(CliError::Tolerance(format!("conservation drift {drift:.3e} > {tol:e}")));
    }
    Ok(())
}

fn solitons(o: &Opts, out: &mut Outputs) -> Result<(), CliError> {
    let (dec, tm) = analyze(&load_symbol(o)?)?;
    let times = parse_times(o.times.as_deref().unwrap_or("symlog:1e2:1e4:40"))?;
    let s = parse_list("s", o.s.as_deref().unwrap_or("0,0.5,1"))?;
    let rep = remainder_norms(&dec, &tm, &times, &s, FitWindow::LargestDecade, exec(o))?;
    out.emit("solitons.csv", &rep.to_csv(), false)?;
    out.emit("solitons.json", &pretty(&json!({ "solitons": rep.solitons, "fits": rep.fits })), true)
}

fn growth(o: &Opts, out: &mut Outputs) -> Result<(), CliError> {
    let (dec, tm) = analyze(&load_symbol(o)?)?;
    let times = parse_times(o.times.as_deref().unwrap_or("log:1e2:1e4:40"))?;
    let s = parse_list("s", o.s.as_deref().unwrap_or("0.75,1,2"))?;
    let fits = s
        .iter()
        .map(|&s| growth_fit(&dec, &tm, s, &times, FitWindow::LargestDecade, exec(o)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("time");
    for f in &fits {
        csv.push_str(&format!(",Hdot_{}", f.s));
    }
    csv.push('\n');
    for (i, t) in times.iter().enumerate() {
        csv.push_str(&format!("{t:.17e}"));
        for f in &fits {
            csv.push_str(&format!(",{:.17e}", f.norms[i]));
        }
        csv.push('\n');
    }
    out.emit("growth.csv", &csv, false)?;
    let summary: Vec<_> =
        fits.iter().map(|f| json!({ "s": f.s, "fit": f.fit, "h_half_drift": f.h_half_drift })).collect();
    let mut v = json!({ "genericity": dec.genericity.as_str(), "fits": summary });
    if dec.genericity == Genericity::NonGeneric && dec.rank() == 2 && dec.clusters.len() == 1 {
        v["nongeneric"] = serde_json::to_value(nongeneric_analysis(&dec, &tm, &times)?).expect("serializable");
    }
    out.emit("growth.json", &pretty(&v), true)
}

fn actionangle(o: &Opts, out: &mut Outputs) -> Result<(), CliError> {
    if let Some(c) = &o.coords {
        let coords = load_coords(c)?;
        let coords = match o.t {
            Some(t) => szego_flow(&coords, t),
            None => coords,
        };
        let u = chi_inverse(&coords)?;
        let v = json!({ "coords": coords, "symbol": serde_json::to_value(&u).expect("serializable") });
        return out.emit("actionangle.json", &pretty(&v), true);
    }
    let dec = eigendecompose(&load_symbol(o)?)?;
    let coords = chi(&dec)?;
    let mut v = json!({ "coords": coords });
    if let Some(t) = o.t {
        let moved = szego_flow(&coords, t);
        v["t"] = json!(t);
        v["flowed_coords"] = json!(moved);
        v["flowed_symbol"] = serde_json::to_value(&chi_inverse(&moved)?).expect("serializable");
    }
    out.emit("actionangle.json", &pretty(&v), true)
}

fn roundtrip(o: &Opts, out: &mut Outputs) -> Result<(), CliError> {
    let mut r = rng(o.seed.unwrap_or(0));
    let n = o.n.unwrap_or(3);
    if n == 0 {
        return Err(CliError::Input("--n must be positive".into()));
    }
    let tol = o.tol.unwrap_or(1e-7);
    let mut reports = Vec::new();
    let mut worst: f64 = 0.0;
    for _ in 0..o.draws.unwrap_or(1) {
        let coords = random_coords(&mut r, n);
        let u = chi_inverse(&coords)?;
        let back = chi(&eigendecompose(&u)?)?;
        let err = coords.max_diff(&back);
        worst = worst.max(err);
        reports.push(json!({
            "input": coords,
            "symbol": serde_json::to_value(&u).expect("serializable"),
            "forward": back,
            "max_error": err,
        }));
    }
    out.emit("roundtrip.json", &pretty(&json!({ "draws": reports, "max_error": worst })), true)?;
    if worst > tol {
        return Err(CliError::Tolerance(format!("round-trip error {worst:.3e} > {tol:e}")));
    }
    Ok(())
}

fn validate(o: &Opts, out: &mut Outputs) -> Result<(), CliError> {
    let u = load_symbol(o)?;
    let d = OracleConfig::default();
    let cfg = OracleConfig {
        half_width: o.half_width.unwrap_or(d.half_width),
        modes: o.modes.unwrap_or(d.modes),
        dt: o.dt.unwrap_or(d.dt),
        edge_tol: None,
    };
    let t = o.t.unwrap_or(1.0);
    let tol = o.tol.unwrap_or(1e-5);
    let rep = compare(&u, t, &cfg)?;
    let refine = box_refinement(&u, t, &cfg)?;
    let v = json!({ "comparison": rep, "box_refinement": refine, "tol": tol });
    out.emit("validate.json", &pretty(&v), true)?;
    if refine.extrapolated_error > tol {
        return Err(CliError::Tolerance(format!(
            "box-extrapolated oracle error {:.3e} > {tol:e}",
            refine.extrapolated_error
        )));
    }
    Ok(())
}

fn run(cmd: Cmd, o: &Opts, out: &mut Outputs) -> Result<(), CliError> {
    match cmd {
        Cmd::Spectrum => spectrum(o, out),
        Cmd::Evolve => evolve(o, out),
        Cmd::Solitons => solitons(o, out),
        Cmd::Growth => growth(o, out),
        Cmd::Actionangle => actionangle(o, out),
        Cmd::Roundtrip => roundtrip(o, out),
        Cmd::Validate => validate(o, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let opts = match cli.opts.merge_config() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("szego: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let mut out = match Outputs::new(opts.out.as_deref()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("szego: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let res = run(cli.cmd, &opts, &mut out);
    let code = res.as_ref().err().map_or(0, CliError::exit_code);
    if let Err(e) = &res {
        eprintln!("szego: {e}");
    }
    if let Err(e) = out.finish(cli.cmd.name(), &opts, start.elapsed().as_secs_f64(), code as i32) {
        eprintln!("szego: {e}");
        return ExitCode::from(e.exit_code());
    }
    ExitCode::from(code)
}
