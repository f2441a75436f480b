//! Pseudo-spectral RK4 integration of `i ∂ₜu = Π(|u|²u)` on the periodic
//! box `[-L, L)`, kept independent of the explicit formula so that the two
//! can be compared.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Result, SzegoError};
use crate::flow::recover_rational;
use crate::hankel::analyze;
use crate::rational::{fourier_eval, fourier_transform, HardyRational};

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// Spectral tail allowed at the largest resolved frequency.
pub const SPECTRAL_TAIL_TOL: f64 = 1e-14;
/// Longest time the oracle is trusted for.
pub const ORACLE_WINDOW: f64 = 5.0;

/// Nonnegative-frequency amplitudes `û(kπ/L)`, `k = 0..M/2`. The symmetric
/// periodization puts half of `û(0+)` in the `k = 0` slot.
#[derive(Clone, Debug)]
pub struct GridState {
    pub half_width: f64,
    pub modes: usize,
    pub amplitudes: Vec<C>,
    pub time: f64,
}

impl GridState {
    pub fn zero(half_width: f64, modes: usize) -> Self {
        GridState { half_width, modes, amplitudes: vec![ZERO; modes / 2], time: 0.0 }
    }

    pub fn xi(&self, k: usize) -> f64 {
        k as f64 * PI / self.half_width
    }

    /// `x_j = -L + 2Lj/M`.
    pub fn grid(&self) -> Vec<f64> {
        let dx = 2.0 * self.half_width / self.modes as f64;
        (0..self.modes).map(|j| -self.half_width + j as f64 * dx).collect()
    }

    fn to_fft_coeffs(&self) -> Vec<C> {
        let s = 1.0 / (2.0 * self.half_width);
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| if k % 2 == 0 { a * s } else { -a * s })
            .collect()
    }

    fn set_from_fft_coeffs(&mut self, c: &[C]) {
        let s = 2.0 * self.half_width;
        for (k, (a, v)) in self.amplitudes.iter_mut().zip(c).enumerate() {
            *a = if k % 2 == 0 { v * s } else { -v * s };
        }
    }

    /// `u(x_j)` on the `M`-point grid.
    pub fn spatial_values(&self) -> Vec<C> {
        let fft = FftPlanner::new().plan_fft_inverse(self.modes);
        let mut buf = vec![ZERO; self.modes];
        buf[..self.modes / 2].copy_from_slice(&self.to_fft_coeffs());
        fft.process(&mut buf);
        buf
    }

    /// Box mass `(1/2L) Σ_k |û_k|²`.
    pub fn mass(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() / (2.0 * self.half_width)
    }
}

/// Largest `|u(±L)|` and the fraction of box mass in `|x| > 0.9 L`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TailReport {
    pub spectral_tail: f64,
    pub edge_value: f64,
    pub edge_mass_fraction: f64,
}

/// Fills amplitudes from the closed-form transform of `u`.
pub fn sample_to_grid(u: &HardyRational, half_width: f64, modes: usize) -> Result<(GridState, TailReport)> {
    if !modes.is_power_of_two() || modes < 4 {
        return Err(SzegoError::InvalidSymbol(format!("mode count {modes} is not a power of two >= 4")));
    }
    if half_width <= 0.0 || !half_width.is_finite() {
        return Err(SzegoError::InvalidSymbol(format!("box half-width {half_width}")));
    }
    let mut st = GridState::zero(half_width, modes);
    if u.is_zero() {
        return Ok((st, TailReport { spectral_tail: 0.0, edge_value: 0.0, edge_mass_fraction: 0.0 }));
    }
    let ft = fourier_transform(u);
    for k in 1..modes / 2 {
        st.amplitudes[k] = fourier_eval(&ft, st.xi(k));
    }
    st.amplitudes[0] = -PI * I * u.lambda();
    let spectral_tail = fourier_eval(&ft, st.xi(modes / 2)).norm();
    if spectral_tail > SPECTRAL_TAIL_TOL {
        let mut m = modes;
        while m < (1 << 30) && fourier_eval(&ft, m as f64 * PI / (2.0 * half_width)).norm() > SPECTRAL_TAIL_TOL {
            m *= 2;
        }
        return Err(SzegoError::BoxTooSmall(format!(
            "|û(ξ_max)| = {spectral_tail:.3e} > {SPECTRAL_TAIL_TOL:e}; use M >= {m} at L = {half_width}"
        )));
    }
    let edge_value = u.eval(C::new(half_width, 0.0)).norm().max(u.eval(C::new(-half_width, 0.0)).norm());
    let vals = st.spatial_values();
    let total: f64 = vals.iter().map(|v| v.norm_sqr()).sum();
    let edge: f64 = st.grid().iter().zip(&vals).filter(|(x, _)| x.abs() > 0.9 * half_width).map(|(_, v)| v.norm_sqr()).sum();
    Ok((st, TailReport { spectral_tail, edge_value, edge_mass_fraction: edge / total }))
}

/// Reusable transforms on the `2M`-point dealiasing grid.
pub struct Integrator {
    modes: usize,
    half_width: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<C>,
}

impl Integrator {
    pub fn new(half_width: f64, modes: usize) -> Self {
        let mut planner = FftPlanner::new();
        Integrator {
            modes,
            half_width,
            forward: planner.plan_fft_forward(2 * modes),
            inverse: planner.plan_fft_inverse(2 * modes),
            scratch: vec![ZERO; 2 * modes],
        }
    }

    /// `-i P(|u|²u)` in FFT coefficients, with `P` keeping `0 <= k < M/2`
    /// and halving `k = 0`.
    fn rhs(&mut self, c: &[C], out: &mut [C]) {
        let n2 = 2 * self.modes;
        self.scratch.fill(ZERO);
        self.scratch[..c.len()].copy_from_slice(c);
        self.inverse.process(&mut self.scratch);
        for v in self.scratch.iter_mut() {
            *v *= v.norm_sqr();
        }
        self.forward.process(&mut self.scratch);
        let s = 1.0 / n2 as f64;
        for (k, o) in out.iter_mut().enumerate() {
            *o = -I * self.scratch[k] * s;
        }
        out[0] *= 0.5;
    }

    /// `∫|u|⁴` on the dealiasing grid, exact for the stored modes.
    pub fn quartic_energy(&mut self, st: &GridState) -> f64 {
        self.scratch.fill(ZERO);
        let c = st.to_fft_coeffs();
        self.scratch[..c.len()].copy_from_slice(&c);
        self.inverse.process(&mut self.scratch);
        let dx = self.half_width / self.modes as f64;
        self.scratch.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() * dx
    }

    /// One classical RK4 step.
    pub fn step(&mut self, st: &mut GridState, dt: f64) -> Result<()> {
        let y = st.to_fft_coeffs();
        let n = y.len();
        let mut k1 = vec![ZERO; n];
        let mut k2 = vec![ZERO; n];
        let mut k3 = vec![ZERO; n];
        let mut k4 = vec![ZERO; n];
        let axpy = |a: &[C], h: f64, b: &[C]| -> Vec<C> { a.iter().zip(b).map(|(x, y)| x + y * h).collect() };
        self.rhs(&y, &mut k1);
        self.rhs(&axpy(&y, dt / 2.0, &k1), &mut k2);
        self.rhs(&axpy(&y, dt / 2.0, &k2), &mut k3);
        self.rhs(&axpy(&y, dt, &k3), &mut k4);
        let next: Vec<C> = (0..n).map(|k| y[k] + (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]) * (dt / 6.0)).collect();
        if next.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(SzegoError::Instability(st.time + dt));
        }
        st.set_from_fft_coeffs(&next);
        st.time += dt;
        Ok(())
    }

    /// Advance to `t_end` with steps of at most `dt` (the last one shortened).
    pub fn integrate(&mut self, st: &mut GridState, t_end: f64, dt: f64) -> Result<()> {
        let span = t_end - st.time;
        let steps = (span.abs() / dt).ceil().max(0.0) as usize;
        if steps == 0 {
            return Ok(());
        }
        let h = span / steps as f64;
        for _ in 0..steps {
            self.step(st, h)?;
        }
        Ok(())
    }
}

/// `0.5/‖u‖²_∞` measured on the grid.
pub fn stability_budget(st: &GridState) -> f64 {
    let m = st.spatial_values().iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    if m == 0.0 {
        f64::INFINITY
    } else {
        0.5 / m
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OracleConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "M")]
    pub modes: usize,
    pub dt: f64,
    /// When set, `|u₀(±L)| / max|u₀|` above this fails with "box too small".
    pub edge_tol: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { half_width: 200.0, modes: 1 << 14, dt: 1e-3, edge_tol: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub t: f64,
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "M")]
    pub modes: usize,
    pub dt: f64,
    /// Grid L² error against the periodized explicit solution.
    pub l2_error: f64,
    pub linf_error: f64,
    /// The same L² error through Parseval from the explicit transform.
    pub spectral_l2_error: f64,
    pub max_mode_error: f64,
    pub j2_drift_explicit: f64,
    pub j2_drift_oracle: f64,
    pub energy_drift_oracle: f64,
    pub tail: TailReport,
}

/// Oracle amplitudes of the periodized explicit `u(t)`.
fn explicit_amplitudes(u: &HardyRational, like: &GridState) -> Vec<C> {
    let ft = fourier_transform(u);
    (0..like.amplitudes.len())
        .map(|k| if k == 0 { -PI * I * u.lambda() } else { fourier_eval(&ft, like.xi(k)) })
        .collect()
}

pub fn compare(u0: &HardyRational, t: f64, cfg: &OracleConfig) -> Result<CompareReport> {
    if t.abs() > ORACLE_WINDOW {
        return Err(SzegoError::InsufficientSamples(format!("oracle comparison limited to |t| <= {ORACLE_WINDOW}, got {t}")));
    }
    let (mut st, tail) = sample_to_grid(u0, cfg.half_width, cfg.modes)?;
    if let Some(tol) = cfg.edge_tol {
        let peak = st.spatial_values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        if tail.edge_value > tol * peak {
            let suggest = cfg.half_width * tail.edge_value / (tol * peak);
            return Err(SzegoError::BoxTooSmall(format!(
                "|u(±L)| = {:.3e} exceeds {tol:e} of the peak; try L >= {suggest:.0}",
                tail.edge_value
            )));
        }
    }
    let mut integ = Integrator::new(cfg.half_width, cfg.modes);
    let m0 = st.mass();
    let e0 = integ.quartic_energy(&st);
    integ.integrate(&mut st, t, cfg.dt)?;

    let (dec, tm) = analyze(u0)?;
    let ut = recover_rational(&dec, &tm, t)?;
    let vals = st.spatial_values();
    let dx = 2.0 * cfg.half_width / cfg.modes as f64;
    let (mut l2, mut linf) = (0.0f64, 0.0f64);
    for (x, v) in st.grid().iter().zip(&vals) {
        let e = (ut.eval_periodized(*x, cfg.half_width) - v).norm();
        l2 += e * e * dx;
        linf = linf.max(e);
    }
    let exact = explicit_amplitudes(&ut, &st);
    let mut spec = 0.0f64;
    let mut max_mode = 0.0f64;
    for (a, b) in exact.iter().zip(&st.amplitudes) {
        let e = (a - b).norm();
        spec += e * e;
        max_mode = max_mode.max(e);
    }
    let j0 = u0.norm_l2().powi(2);
    Ok(CompareReport {
        t,
        half_width: cfg.half_width,
        modes: cfg.modes,
        dt: cfg.dt,
        l2_error: l2.sqrt(),
        linf_error: linf,
        spectral_l2_error: (spec / (2.0 * cfg.half_width)).sqrt(),
        max_mode_error: max_mode,
        j2_drift_explicit: (ut.norm_l2().powi(2) - j0).abs() / j0,
        j2_drift_oracle: (st.mass() - m0).abs() / m0,
        energy_drift_oracle: (integ.quartic_energy(&st) - e0).abs() / e0,
        tail,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfConvergence {
    pub dts: [f64; 3],
    /// `‖u_{dt} - u_{dt/2}‖` and `‖u_{dt/2} - u_{dt/4}‖`.
    pub differences: [f64; 2],
    pub ratio: f64,
    pub order: f64,
}

/// Runs at `dt`, `dt/2`, `dt/4`; the difference ratio is `2^order`.
pub fn self_convergence(u0: &HardyRational, t: f64, half_width: f64, modes: usize, dt: f64) -> Result<SelfConvergence> {
    let (st0, _) = sample_to_grid(u0, half_width, modes)?;
    let dts = [dt, dt / 2.0, dt / 4.0];
    let mut ends = Vec::with_capacity(3);
    for &h in &dts {
        let mut st = st0.clone();
        Integrator::new(half_width, modes).integrate(&mut st, t, h)?;
        ends.push(st);
    }
    let diff = |a: &GridState, b: &GridState| {
        (a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() / (2.0 * half_width)).sqrt()
    };
    let differences = [diff(&ends[0], &ends[1]), diff(&ends[1], &ends[2])];
    let ratio = differences[0] / differences[1];
    Ok(SelfConvergence { dts, differences, ratio, order: ratio.log2() })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxRefinement {
    pub half_widths: [f64; 2],
    /// Spectral L² errors against the explicit solution at `L` and `2L`.
    pub errors: [f64; 2],
    /// Observed order in `1/L`.
    pub order: f64,
    /// Error of the Richardson combination `(4 û_{2L} - û_L)/3` on the
    /// frequencies of the coarse box.
    pub extrapolated_error: f64,
}

/// Runs the oracle on `[-L, L)` and `[-2L, 2L)` (twice the modes, same
/// frequency cutoff) and extrapolates away the `O(1/L²)` box error.
pub fn box_refinement(u0: &HardyRational, t: f64, cfg: &OracleConfig) -> Result<BoxRefinement> {
    let (dec, tm) = analyze(u0)?;
    let ut = recover_rational(&dec, &tm, t)?;
    let run = |l: f64, m: usize| -> Result<GridState> {
        let (mut st, _) = sample_to_grid(u0, l, m)?;
        Integrator::new(l, m).integrate(&mut st, t, cfg.dt)?;
        Ok(st)
    };
    let coarse = run(cfg.half_width, cfg.modes)?;
    let fine = run(2.0 * cfg.half_width, 2 * cfg.modes)?;
    let err = |st: &GridState, amps: &[C]| {
        let exact = explicit_amplitudes(&ut, st);
        (exact.iter().zip(amps).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / (2.0 * st.half_width)).sqrt()
    };
    let e_coarse = err(&coarse, &coarse.amplitudes);
    let e_fine = err(&fine, &fine.amplitudes);
    let combined: Vec<C> =
        coarse.amplitudes.iter().enumerate().map(|(k, a)| (4.0 * fine.amplitudes[2 * k] - a) / 3.0).collect();
    Ok(BoxRefinement {
        half_widths: [cfg.half_width, 2.0 * cfg.half_width],
        errors: [e_coarse, e_fine],
        order: (e_coarse / e_fine).log2(),
        extrapolated_error: err(&coarse, &combined),
    })
}
