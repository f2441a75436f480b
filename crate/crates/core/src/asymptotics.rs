//! Long-time behaviour: soliton resolution for strongly generic data, the
//! double-eigenvalue pathology in `M(2)`, and Sobolev growth rates.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Result, SzegoError};
use crate::flow::{conserved_h_half_norm, recover_rational};
use crate::hankel::{Genericity, SpectralDecomposition, TMatrix};
use crate::par::Execution;
use crate::rational::{homogeneous_sobolev_norm, inhomogeneous_sobolev_norm, HardyRational};

type C = Complex64;
const I: C = C::new(0.0, 1.0);

/// The soliton `e^{-iωt} C/(x - ct - p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolitonParams {
    pub amplitude: C,
    pub pole: C,
    pub speed: f64,
    pub frequency: f64,
}

impl SolitonParams {
    /// Speed and frequency of a single-pole datum `C/(x - p)`.
    pub fn from_symbol(amplitude: C, pole: C) -> Self {
        let a2 = amplitude.norm_sqr();
        SolitonParams { amplitude, pole, speed: a2 / (-2.0 * pole.im), frequency: a2 / (4.0 * pole.im * pole.im) }
    }

    pub fn at(&self, t: f64) -> HardyRational {
        let c = self.amplitude * C::from_polar(1.0, -self.frequency * t);
        HardyRational::monomial(c, self.pole + self.speed * t, 1).expect("Im p < 0")
    }
}

/// One soliton per eigenchannel, sorted by speed: `C_j = iλ_jβ̄_j²/2π`,
/// `p_j = γ_j - iν_j²/4π`, speed `λ_j²ν_j²/2π`, frequency `λ_j²`.
pub fn soliton_params_from_spectrum(dec: &SpectralDecomposition, _tm: &TMatrix) -> Result<Vec<SolitonParams>> {
    if dec.genericity != Genericity::StronglyGeneric {
        return Err(SzegoError::NotStronglyGeneric);
    }
    let mut out: Vec<SolitonParams> = (0..dec.rank())
        .map(|j| {
            let (l, b, v) = (dec.lambdas[j], dec.betas[j], dec.nus[j]);
            SolitonParams {
                amplitude: I * l * b.conj() * b.conj() / (2.0 * PI),
                pole: C::new(dec.gammas[j], -v * v / (4.0 * PI)),
                speed: l * l * v * v / (2.0 * PI),
                frequency: l * l,
            }
        })
        .collect();
    out.sort_by(|a, b| a.speed.total_cmp(&b.speed));
    Ok(out)
}

/// `ε(t) = u(t) - Σ_j soliton_j(t)` in partial fractions.
pub fn remainder(dec: &SpectralDecomposition, tm: &TMatrix, solitons: &[SolitonParams], t: f64) -> Result<HardyRational> {
    let u = recover_rational(dec, tm, t)?;
    let sum = solitons.iter().fold(HardyRational::zero(), |acc, s| acc.add(&s.at(t)));
    Ok(u.sub(&sum))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWindow {
    /// `|t| ∈ [t_max/10, t_max]` when it holds at least 12 samples, else all.
    #[default]
    LargestDecade,
    All,
}

/// Least-squares line `log y = slope · log|t| + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval for the slope.
    pub slope_ci: (f64, f64),
    pub samples: usize,
    pub t_min: f64,
    pub t_max: f64,
}

pub const MIN_FIT_SAMPLES: usize = 5;
const DECADE_SAMPLES: usize = 12;

pub fn power_fit(ts: &[f64], ys: &[f64], window: FitWindow) -> Result<PowerFit> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(t, y)| **t != 0.0 && **y > 0.0 && y.is_finite())
        .map(|(t, y)| (t.abs(), *y))
        .collect();
    let tmax = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    let pts = match window {
        FitWindow::LargestDecade => {
            let top: Vec<_> = pts.iter().copied().filter(|p| p.0 >= tmax / 10.0 * (1.0 - 1e-12)).collect();
            if top.len() >= DECADE_SAMPLES {
                top
            } else {
                pts
            }
        }
        FitWindow::All => pts,
    };
    let n = pts.len();
    if n < MIN_FIT_SAMPLES {
        return Err(SzegoError::InsufficientSamples(format!("{n} usable points, need {MIN_FIT_SAMPLES}")));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ls: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ls.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ls).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(SzegoError::InsufficientSamples("all samples at one |t|".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ls).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let se = (sse / (nf - 2.0) / sxx).sqrt();
    let q = StudentsT::new(0.0, 1.0, nf - 2.0).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::NAN);
    Ok(PowerFit {
        slope,
        intercept,
        slope_ci: (slope - q * se, slope + q * se),
        samples: n,
        t_min: pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        t_max: tmax,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub s: f64,
    pub direction: Direction,
    pub fit: PowerFit,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolutionReport {
    pub solitons: Vec<SolitonParams>,
    pub times: Vec<f64>,
    pub s_values: Vec<f64>,
    /// `remainder_norms[i][k] = ‖ε(times[i])‖_{H^{s_k}}`.
    pub remainder_norms: Vec<Vec<f64>>,
    pub fits: Vec<DecayFit>,
}

impl ResolutionReport {
    pub fn fit(&self, s: f64, direction: Direction) -> Option<&PowerFit> {
        self.fits.iter().find(|f| f.s == s && f.direction == direction).map(|f| &f.fit)
    }

    /// CSV: time, s, remainder norm, then the soliton pole positions.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,s,remainder_norm");
        for j in 1..=self.solitons.len() {
            out.push_str(&format!(",soliton_{j}_pole_re,soliton_{j}_pole_im"));
        }
        out.push('\n');
        for (i, &t) in self.times.iter().enumerate() {
            for (k, &s) in self.s_values.iter().enumerate() {
                out.push_str(&format!("{t:.17e},{s},{:.17e}", self.remainder_norms[i][k]));
                for sol in &self.solitons {
                    let p = sol.pole + sol.speed * t;
                    out.push_str(&format!(",{:.17e},{:.17e}", p.re, p.im));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Inhomogeneous `H^s` norms of the remainder along `times`, with decay
/// exponents fitted separately for `t > 0` and `t < 0`.
pub fn remainder_norms(
    dec: &SpectralDecomposition,
    tm: &TMatrix,
    times: &[f64],
    s_values: &[f64],
    window: FitWindow,
    exec: Execution,
) -> Result<ResolutionReport> {
    if times.contains(&0.0) {
        return Err(SzegoError::InsufficientSamples("remainder decay needs nonzero times".into()));
    }
    let solitons = soliton_params_from_spectrum(dec, tm)?;
    let rows: Vec<Result<Vec<f64>>> = exec.map(times, |&t| {
        let eps = remainder(dec, tm, &solitons, t)?;
        Ok(s_values.iter().map(|&s| inhomogeneous_sobolev_norm(&eps, s)).collect())
    });
    let remainder_norms = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut fits = Vec::new();
    for (dir, sign) in [(Direction::Forward, 1.0), (Direction::Backward, -1.0)] {
        let idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] * sign > 0.0).collect();
        if idx.is_empty() {
            continue;
        }
        for (k, &s) in s_values.iter().enumerate() {
            let ts: Vec<f64> = idx.iter().map(|&i| times[i]).collect();
            let ys: Vec<f64> = idx.iter().map(|&i| remainder_norms[i][k]).collect();
            fits.push(DecayFit { s, direction: dir, fit: power_fit(&ts, &ys, window)? });
        }
    }
    Ok(ResolutionReport { solitons, times: times.to_vec(), s_values: s_values.to_vec(), remainder_norms, fits })
}

#[derive(Clone, Debug, Serialize)]
pub struct PoleTrack {
    pub t: f64,
    /// Eigenvalue of `S(t)` escaping to infinity.
    pub e1: C,
    /// Eigenvalue of `S(t)` approaching the real axis.
    pub e2: C,
    pub discriminant: C,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonGenericReport {
    pub lambda_sq: f64,
    pub nu1: f64,
    /// `(c1, c2, d1, d2)`: `T e_1 = c1 e_1 + c2 e_2`, `T e_2 = d1 e_1 + d2 e_2`.
    pub t_entries: [C; 4],
    /// `Δ(t) = A²t² + Bt + C`.
    pub disc_a: f64,
    pub disc_b: C,
    pub disc_c: C,
    pub im_b_expected: f64,
    pub speed_spectral: f64,
    pub speed_direct: f64,
    pub amplitude_abs_spectral: f64,
    pub amplitude_abs_norms: f64,
    /// `-ν₁²/4π`.
    pub im_p_spectral: f64,
    /// `-(‖u₀‖_{L²}/‖u₀‖_{Ḣ^{1/2}})²`.
    pub im_p_h_half: f64,
    /// `-(‖u₀‖_{L²}/‖u₀‖_{Ḣ¹})²`, the same ratio normalised in Ḣ¹.
    pub im_p_h_one: f64,
    pub tracks: Vec<PoleTrack>,
    /// Fit of `Im E_2(t)` against `|t|`, expected slope `-2`.
    pub im_e2_fit: Option<PowerFit>,
}

/// Pole dynamics for `u₀ ∈ M(2)` whose `H²` has a double eigenvalue.
/// The basis of the eigenspace is the one with `β₂ = 0`.
pub fn nongeneric_analysis(dec: &SpectralDecomposition, tm: &TMatrix, times: &[f64]) -> Result<NonGenericReport> {
    if dec.rank() != 2 || dec.clusters.len() != 1 {
        return Err(SzegoError::NotDoubleEigenvalue(format!(
            "rank {} with {} distinct eigenvalues",
            dec.rank(),
            dec.clusters.len()
        )));
    }
    let lambda_sq = dec.lambdas[0] * dec.lambdas[1];
    let nu1 = dec.nus[0];
    let t = &tm.t;
    let (c1, c2, d1, d2) = (t[(0, 0)], t[(1, 0)], t[(0, 1)], t[(1, 1)]);
    let a = lambda_sq * nu1 * nu1 / (2.0 * PI);
    let disc_b = 2.0 * a * (c1 - d2);
    let disc_c = (c1 - d2) * (c1 - d2) + 4.0 * c2 * d1;
    let u0 = &dec.symbol;
    let l2sq = u0.norm_l2().powi(2);
    let h_half = homogeneous_sobolev_norm(u0, 0.5);
    let h_one = homogeneous_sobolev_norm(u0, 1.0);
    let tracks: Vec<PoleTrack> = times
        .iter()
        .map(|&t| {
            let disc = a * a * t * t + disc_b * t + disc_c;
            let tr = c1 + a * t + d2;
            let det = (c1 + a * t) * d2 - c2 * d1;
            let r = disc.sqrt();
            let (p, m) = ((tr + r) / 2.0, (tr - r) / 2.0);
            let e1 = if p.norm() >= m.norm() { p } else { m };
            // the product form keeps the small root free of cancellation
            let e2 = det / e1;
            PoleTrack { t, e1, e2, discriminant: disc }
        })
        .collect();
    let (ts, ims): (Vec<f64>, Vec<f64>) = tracks.iter().filter(|p| p.t > 0.0).map(|p| (p.t, p.e2.im)).unzip();
    let im_e2_fit = power_fit(&ts, &ims, FitWindow::All).ok();
    Ok(NonGenericReport {
        lambda_sq,
        nu1,
        t_entries: [c1, c2, d1, d2],
        disc_a: a,
        disc_b,
        disc_c,
        im_b_expected: lambda_sq * nu1.powi(4) / (4.0 * PI * PI),
        speed_spectral: a,
        speed_direct: l2sq / (2.0 * PI),
        amplitude_abs_spectral: lambda_sq.sqrt() * nu1 * nu1 / (2.0 * PI),
        amplitude_abs_norms: l2sq / (PI.sqrt() * h_half),
        im_p_spectral: -nu1 * nu1 / (4.0 * PI),
        im_p_h_half: -(l2sq / (h_half * h_half)),
        im_p_h_one: -(l2sq / (h_one * h_one)),
        tracks,
        im_e2_fit,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthFit {
    pub s: f64,
    pub fit: PowerFit,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// Largest `|‖u(t)‖_{H^{1/2}} / ‖u₀‖_{H^{1/2}} - 1|` over `times`.
    pub h_half_drift: f64,
}

/// Slope of `log ‖u(t)‖_{Ḣ^s}` against `log|t|`.
pub fn growth_fit(
    dec: &SpectralDecomposition,
    tm: &TMatrix,
    s: f64,
    times: &[f64],
    window: FitWindow,
    exec: Execution,
) -> Result<GrowthFit> {
    let h0 = conserved_h_half_norm(&dec.symbol);
    let rows: Vec<Result<(f64, f64)>> = exec.map(times, |&t| {
        let u = recover_rational(dec, tm, t)?;
        Ok((homogeneous_sobolev_norm(&u, s), conserved_h_half_norm(&u)))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let norms: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let h_half_drift = rows.iter().map(|r| (r.1 / h0 - 1.0).abs()).fold(0.0, f64::max);
    let fit = power_fit(times, &norms, window)?;
    Ok(GrowthFit { s, fit, times: times.to_vec(), norms, h_half_drift })
}

/// Log-spaced times `a, ..., b` (both positive).
pub fn log_times(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n).map(|k| (la + (lb - la) * k as f64 / (n - 1) as f64).exp()).collect()
}
