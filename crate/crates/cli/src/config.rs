//! Flat `key = value` config files merged under command-line flags.

use std::collections::BTreeMap;

use clap::Args;
use serde::Serialize;

use crate::CliError;

/// Options shared by every subcommand. Each may also come from `--config`.
#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct Opts {
    /// Symbol as a JSON file path or inline JSON.
    #[arg(long, global = true)]
    pub symbol: Option<String>,
    /// Numerator coefficients (ascending), JSON list of numbers or [re, im].
    #[arg(long, global = true)]
    pub num: Option<String>,
    /// Denominator coefficients (ascending).
    #[arg(long, global = true)]
    pub den: Option<String>,
    /// Output directory; stdout only when absent.
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `lin:a:b:n`, `log:a:b:n`, `symlog:a:b:n` or a comma list.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub times: Option<String>,
    /// Comma list of Sobolev orders.
    #[arg(long, global = true)]
    pub s: Option<String>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Single time for `validate` and the coordinate flow of `actionangle`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Oracle box half-width.
    #[arg(long = "L", global = true)]
    pub half_width: Option<f64>,
    /// Oracle mode count.
    #[arg(long = "M", global = true)]
    pub modes: Option<usize>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Rank for random draws.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub draws: Option<usize>,
    /// Action-angle coordinates (path or inline JSON) to invert.
    #[arg(long, global = true)]
    pub coords: Option<String>,
    /// Number of conservation laws reported by `evolve`.
    #[arg(long, global = true)]
    pub jmax: Option<usize>,
    /// Run sequentially instead of on the thread pool.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Flat `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<String>,
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Input(format!("config key {key}: cannot parse {v:?}")))
}

pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("config line {}: expected key = value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl Opts {
    /// Fills unset options from the config file named by `--config`.
    pub fn merge_config(mut self) -> Result<Self, CliError> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
        for (k, v) in parse_file(&text)? {
            let v = v.as_str();
            macro_rules! fill {
                ($field:ident) => {
                    if self.$field.is_none() {
                        self.$field = Some(parse(&k, v)?);
                    }
                };
            }
            match k.as_str() {
                "symbol" => fill!(symbol),
                "num" => fill!(num),
                "den" => fill!(den),
                "out" => fill!(out),
                "seed" => fill!(seed),
                "times" => fill!(times),
                "s" => fill!(s),
                "tol" => fill!(tol),
                "t" => fill!(t),
                "L" => fill!(half_width),
                "M" => fill!(modes),
                "dt" => fill!(dt),
                "n" => fill!(n),
                "draws" => fill!(draws),
                "coords" => fill!(coords),
                "jmax" => fill!(jmax),
                "sequential" => self.sequential |= parse::<bool>(&k, v)?,
                _ => return Err(CliError::Input(format!("unknown config key {k:?}"))),
            }
        }
        Ok(self)
    }
}
