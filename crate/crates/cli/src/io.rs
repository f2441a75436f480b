//! Input parsing and atomic, manifest-tracked output.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{json, Value};
use szego_core::action_angle::ActionAngleCoords;
use szego_core::poly::Poly;
use szego_core::rational::{pf_from_ratio, HardyRational};

use crate::config::Opts;
use crate::CliError;

fn inline_or_file(spec: &str) -> Result<String, CliError> {
    let t = spec.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        Ok(spec.to_string())
    } else {
        fs::read_to_string(spec).map_err(|e| CliError::Input(format!("{spec}: {e}")))
    }
}

fn parse_coeffs(s: &str) -> Result<Poly, CliError> {
    let v: Vec<Value> = serde_json::from_str(s).map_err(|e| CliError::Input(format!("coefficients: {e}")))?;
    let mut out = Vec::with_capacity(v.len());
    for c in v {
        let z = match &c {
            Value::Number(n) => Complex64::new(n.as_f64().unwrap_or(f64::NAN), 0.0),
            Value::Array(a) if a.len() == 2 => {
                Complex64::new(a[0].as_f64().unwrap_or(f64::NAN), a[1].as_f64().unwrap_or(f64::NAN))
            }
            _ => return Err(CliError::Input(format!("coefficient {c} is neither a number nor [re, im]"))),
        };
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(CliError::Input(format!("coefficient {c} is not finite")));
        }
        out.push(z);
    }
    Ok(Poly::new(out))
}

pub fn load_symbol(o: &Opts) -> Result<HardyRational, CliError> {
    match (&o.symbol, &o.num, &o.den) {
        (Some(s), None, None) => Ok(HardyRational::from_json(&inline_or_file(s)?)?),
        (None, Some(n), Some(d)) => Ok(pf_from_ratio(&parse_coeffs(n)?, &parse_coeffs(d)?)?),
        (None, None, None) => Err(CliError::Input("no symbol: pass --symbol or --num/--den".into())),
        _ => Err(CliError::Input("pass either --symbol or both --num and --den".into())),
    }
}

pub fn load_coords(spec: &str) -> Result<ActionAngleCoords, CliError> {
    serde_json::from_str(&inline_or_file(spec)?).map_err(|e| CliError::Input(format!("coordinates: {e}")))
}

fn num(key: &str, s: &str) -> Result<f64, CliError> {
    s.trim().parse().map_err(|_| CliError::Input(format!("{key}: cannot parse {s:?}")))
}

/// `lin:a:b:n`, `log:a:b:n` (positive ends), `symlog:a:b:n` (the log
/// spacing mirrored to negative times), or `t1,t2,...`.
pub fn parse_times(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 1 {
        return spec.split(',').map(|s| num("times", s)).collect();
    }
    if parts.len() != 4 {
        return Err(CliError::Input(format!("times spec {spec:?}: expected kind:a:b:n")));
    }
    let (a, b) = (num("times", parts[1])?, num("times", parts[2])?);
    let n: usize = parts[3].trim().parse().map_err(|_| CliError::Input(format!("times count {:?}", parts[3])))?;
    if n == 0 {
        return Err(CliError::Input("times count must be positive".into()));
    }
    let frac = |k: usize| if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
    match parts[0] {
        "lin" => Ok((0..n).map(|k| a + (b - a) * frac(k)).collect()),
        "log" | "symlog" => {
            if a <= 0.0 || b <= 0.0 {
                return Err(CliError::Input("log spacing needs positive ends".into()));
            }
            let pos: Vec<f64> = (0..n).map(|k| (a.ln() + (b.ln() - a.ln()) * frac(k)).exp()).collect();
            if parts[0] == "log" {
                Ok(pos)
            } else {
                let mut all: Vec<f64> = pos.iter().rev().map(|t| -t).collect();
                all.extend(pos);
                Ok(all)
            }
        }
        k => Err(CliError::Input(format!("unknown times kind {k:?}"))),
    }
}

pub fn parse_list(key: &str, spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',').map(|s| num(key, s)).collect()
}

/// Files written by one run; `finish` adds the manifest.
pub struct Outputs {
    dir: Option<PathBuf>,
    files: Vec<String>,
}

fn write_atomic(path: &Path, body: &str) -> Result<(), CliError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, body).map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

impl Outputs {
    pub fn new(dir: Option<&str>) -> Result<Self, CliError> {
        let dir = dir.map(PathBuf::from);
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| CliError::Io(format!("{}: {e}", d.display())))?;
        }
        Ok(Outputs { dir, files: Vec::new() })
    }

    /// Writes `name` into the output directory, or prints it when there is
    /// none and `stdout` is set.
    pub fn emit(&mut self, name: &str, body: &str, stdout: bool) -> Result<(), CliError> {
        match &self.dir {
            Some(d) => {
                write_atomic(&d.join(name), body)?;
                self.files.push(name.to_string());
            }
            None if stdout => print!("{body}"),
            None => {}
        }
        Ok(())
    }

    pub fn finish(self, command: &str, opts: &Opts, wall_time: f64, exit_code: i32) -> Result<(), CliError> {
        let Some(d) = &self.dir else { return Ok(()) };
        let manifest = json!({
            "command": command,
            "config": opts,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": wall_time,
            "exit_code": exit_code,
            "artifacts": self.files,
        });
        write_atomic(&d.join("manifest.json"), &(serde_json::to_string_pretty(&manifest).unwrap() + "\n"))
    }
}
