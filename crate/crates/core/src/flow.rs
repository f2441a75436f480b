//! Closed-form evolution: the matrix `S(t)`, the resolvent formula for
//! `u(t, x)`, and recovery of `u(t)` as a rational function.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Result, SzegoError};
use crate::hankel::{SpectralDecomposition, TMatrix};
use crate::linalg::{self, CMat, CVec};
use crate::par::Execution;
use crate::rational::{hankel_apply, homogeneous_sobolev_norm, inner_product, HardyRational, PoleTerm};

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// Relative eigenvalue gap of `S(t)` below which recovery switches to the
/// sample-and-fit path. A Jordan block of size `m` splits by about
/// `ε^{1/m}` in floating point, so this sits above `ε^{1/3}`.
pub const DEFECTIVE_GAP: f64 = 1e-5;

/// `S(t)` in the eigenbasis of `H_{u₀}²` (entry `(k, j) = (S e_j, e_k)`)
/// with the diagonal of `W(t) = e^{i t H²/2}`.
#[derive(Clone, Debug)]
pub struct FlowMatrix {
    pub s: CMat,
    pub w_diag: Vec<C>,
    pub t: f64,
}

fn off_cluster(lj: f64, lk: f64, bj: C, bk: C, t: f64) -> C {
    let d = lk * lk - lj * lj;
    let ph = C::from_polar(1.0, t * d / 2.0);
    lj / (2.0 * PI * d) * (lj * ph * bj.conj() * bk - lk * ph.conj() * bj * bk.conj()) / I
}

pub fn s_matrix(dec: &SpectralDecomposition, tm: &TMatrix, t: f64) -> FlowMatrix {
    let n = dec.rank();
    let cl = dec.cluster_of();
    let (l, b) = (&dec.lambdas, &dec.betas);
    let mut s = tm.t.clone();
    for j in 0..n {
        for k in 0..n {
            if cl[j] == cl[k] {
                s[(k, j)] += l[j] * l[j] * b[j].conj() * b[k] * t / (2.0 * PI);
            } else {
                s[(k, j)] += off_cluster(l[j], l[k], b[j], b[k], t) - off_cluster(l[j], l[k], b[j], b[k], 0.0);
            }
        }
    }
    let w_diag = l.iter().map(|&lj| C::from_polar(1.0, t * lj * lj / 2.0)).collect();
    FlowMatrix { s, w_diag, t }
}

/// Vectors `a = W̄ (λ β̄)` and `b = W β` of the resolvent formula
/// `u(t, x) = -(i/2π) b^H (S^H - x)^{-1} a`.
fn resolvent_vectors(dec: &SpectralDecomposition, fm: &FlowMatrix) -> (CVec, CVec) {
    let n = dec.rank();
    let a = CVec::from_fn(n, |j, _| fm.w_diag[j].conj() * dec.lambdas[j] * dec.betas[j].conj());
    let b = CVec::from_fn(n, |j, _| fm.w_diag[j] * dec.betas[j]);
    (a, b)
}

/// `u(t, x)` through one linear solve; `x` may be complex with `Im x ≥ 0`.
pub fn evolve_eval(dec: &SpectralDecomposition, tm: &TMatrix, t: f64, x: C) -> Result<C> {
    let fm = s_matrix(dec, tm, t);
    eval_with(dec, &fm, x)
}

pub fn eval_with(dec: &SpectralDecomposition, fm: &FlowMatrix, x: C) -> Result<C> {
    let n = dec.rank();
    let (a, b) = resolvent_vectors(dec, fm);
    let m = fm.s.adjoint() - CMat::identity(n, n) * x;
    let (z, rel) = linalg::solve(&m, &a)?;
    if rel > 1e-10 {
        return Err(SzegoError::ResolventSolve(rel));
    }
    Ok(-I / (2.0 * PI) * b.dotc(&z))
}

/// `u(t)` as an element of `M(N)`.
pub fn recover_rational(dec: &SpectralDecomposition, tm: &TMatrix, t: f64) -> Result<HardyRational> {
    let fm = s_matrix(dec, tm, t);
    recover_from(dec, &fm)
}

pub fn recover_from(dec: &SpectralDecomposition, fm: &FlowMatrix) -> Result<HardyRational> {
    let n = dec.rank();
    let sh = fm.s.adjoint();
    let (vals, vecs) = linalg::eig(&sh)?;
    let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let mut min_gap = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            min_gap = min_gap.min((vals[i] - vals[j]).norm() / scale);
        }
    }
    if let Some(v) = vals.iter().find(|v| v.im >= 0.0) {
        return Err(SzegoError::DefectiveRecovery(format!("eigenvalue {v} of S^H is not in the lower half-plane")));
    }
    if min_gap < DEFECTIVE_GAP {
        return recover_by_fit(dec, fm, &vals);
    }
    let (a, b) = resolvent_vectors(dec, fm);
    let (va, rel) = linalg::solve(&vecs, &a)?;
    if rel > 1e-10 {
        return Err(SzegoError::ResolventSolve(rel));
    }
    let bv = vecs.adjoint() * &b; // (b^H V)_m = conj((V^H b)_m)
    let terms = (0..n)
        .map(|m| PoleTerm::new(vals[m], vec![I / (2.0 * PI) * bv[m].conj() * va[m]]))
        .collect();
    HardyRational::from_terms(terms)
}

/// Near-defective `S(t)`: cluster the eigenvalues into multiple poles and
/// fit coefficients to the resolvent formula by least squares.
fn recover_by_fit(dec: &SpectralDecomposition, fm: &FlowMatrix, vals: &[C]) -> Result<HardyRational> {
    let n = vals.len();
    let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let mut groups: Vec<Vec<C>> = Vec::new();
    for &v in vals {
        match groups.iter_mut().find(|g| g.iter().any(|&w| (w - v).norm() / scale < DEFECTIVE_GAP * 10.0)) {
            Some(g) => g.push(v),
            None => groups.push(vec![v]),
        }
    }
    let mut poles: Vec<C> = groups.iter().map(|g| g.iter().sum::<C>() / g.len() as f64).collect();
    let mults: Vec<usize> = groups.iter().map(Vec::len).collect();
    let centre = vals.iter().map(|v| v.re).sum::<f64>() / n as f64;
    let spread = vals.iter().map(|v| (v.re - centre).abs() + v.im.abs()).fold(1.0, f64::max);
    let m = 4 * (n + groups.len()).max(2);
    let xs: Vec<f64> =
        (0..m).map(|k| centre + 2.0 * spread * (PI * (k as f64 + 0.5) / m as f64).cos()).collect();
    let rhs = CVec::from_iterator(xs.len(), xs.iter().map(|&x| eval_with(dec, fm, C::new(x, 0.0))).collect::<Result<Vec<_>>>()?);
    type Fit = (Vec<(C, usize)>, CVec, f64);
    let fit = |poles: &[C], extra: usize| -> Result<Fit> {
        let funcs: Vec<(C, usize)> = poles
            .iter()
            .zip(&mults)
            .flat_map(|(&p, &k)| (1..=k + extra).map(move |l| (p, l)))
            .collect();
        let a = CMat::from_fn(xs.len(), funcs.len(), |r, c| {
            let (p, l) = funcs[c];
            (C::new(xs[r], 0.0) - p).powi(-(l as i32))
        });
        let coef = linalg::least_squares(&a, &rhs)?;
        let resid = (&a * &coef - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
        Ok((funcs, coef, resid))
    };
    // Gauss-Newton on the cluster centres: (x-p-δ)^{-k} ≈ (x-p)^{-k} + kδ(x-p)^{-k-1}
    for _ in 0..4 {
        let (_, coef, _) = fit(&poles, 1)?;
        let mut off = 0;
        let mut worst: f64 = 0.0;
        for (p, &k) in poles.iter_mut().zip(&mults) {
            let (top, next) = (coef[off + k - 1], coef[off + k]);
            if top.norm() > 0.0 {
                let d = next / (top * k as f64);
                if d.norm() < 0.1 * spread {
                    *p += d;
                    worst = worst.max(d.norm());
                }
            }
            off += k + 1;
        }
        if worst < 1e-15 * spread {
            break;
        }
    }
    let (funcs, coef, resid) = fit(&poles, 0)?;
    if resid > 1e-7 {
        return Err(SzegoError::DefectiveRecovery(format!(
            "fit residual {resid:.3e} with {} pole clusters from eigenvalues {vals:?}",
            groups.len()
        )));
    }
    let mut terms: Vec<PoleTerm> = Vec::new();
    for (i, &(p, l)) in funcs.iter().enumerate() {
        match terms.iter_mut().find(|t| t.pole == p) {
            Some(t) => {
                t.coeffs.resize(l, ZERO);
                t.coeffs[l - 1] = coef[i];
            }
            None => {
                let mut v = vec![ZERO; l];
                v[l - 1] = coef[i];
                terms.push(PoleTerm { pole: p, coeffs: v });
            }
        }
    }
    HardyRational::from_terms(terms)
}

/// `J_{2k} = Σ_j λ_j^{2k} ν_j²`, `k = 1..=kmax`, from spectral data.
pub fn conserved_quantities(dec: &SpectralDecomposition, kmax: usize) -> Vec<f64> {
    (1..=kmax)
        .map(|k| dec.lambdas.iter().zip(&dec.nus).map(|(l, v)| l.powi(2 * k as i32) * v * v).sum())
        .collect()
}

/// `J_{2k} = (u, H_u^{2k-2} u)` by repeated application of `H_u`.
pub fn conserved_quantities_direct(u: &HardyRational, kmax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax);
    let mut h = u.clone();
    for _ in 0..kmax {
        out.push(inner_product(u, &h).expect("integrable").re);
        h = hankel_apply(u, &hankel_apply(u, &h));
    }
    out
}

/// Conserved `H^{1/2}` norm `(‖u‖²_{L²} + ‖u‖²_{Ḣ^{1/2}})^{1/2}`.
pub fn conserved_h_half_norm(u: &HardyRational) -> f64 {
    let l2 = u.norm_l2();
    let h = homogeneous_sobolev_norm(u, 0.5);
    (l2 * l2 + h * h).sqrt()
}

/// What [`trajectory`] computes per time.
#[derive(Clone, Debug)]
pub struct Observables {
    /// Number of conservation laws `J_2, ..., J_{2 jmax}`.
    pub jmax: usize,
    /// Orders `s` of extra `Ḣ^s` columns.
    pub sobolev: Vec<f64>,
}

impl Default for Observables {
    fn default() -> Self {
        Observables { jmax: 4, sobolev: Vec::new() }
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryRow {
    pub t: f64,
    pub u: HardyRational,
    pub j: Vec<f64>,
    pub l2: f64,
    pub h_half: f64,
    pub hs: Vec<f64>,
}

pub fn trajectory(
    dec: &SpectralDecomposition,
    tm: &TMatrix,
    times: &[f64],
    obs: &Observables,
    exec: Execution,
) -> Result<Vec<TrajectoryRow>> {
    exec.map(times, |&t| {
        let u = recover_rational(dec, tm, t)?;
        Ok(TrajectoryRow {
            t,
            j: conserved_quantities_direct(&u, obs.jmax),
            l2: u.norm_l2(),
            h_half: conserved_h_half_norm(&u),
            hs: obs.sobolev.iter().map(|&s| homogeneous_sobolev_norm(&u, s)).collect(),
            u,
        })
    })
    .into_iter()
    .collect()
}

/// CSV with columns time, pole/coeff per basis slot, J's, L2, H12, Ḣ^s.
pub fn trajectory_csv(rows: &[TrajectoryRow], obs: &Observables) -> String {
    let n = rows.first().map(|r| r.u.degree()).unwrap_or(0);
    let mut out = String::from("time");
    for k in 1..=n {
        let _ = write!(out, ",pole_{k}_re,pole_{k}_im,coeff_{k}_re,coeff_{k}_im");
    }
    for k in 1..=obs.jmax {
        let _ = write!(out, ",J{}", 2 * k);
    }
    out.push_str(",L2,H12");
    for s in &obs.sobolev {
        let _ = write!(out, ",Hdot_{s}");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{:.17e}", r.t);
        let mut slots = 0;
        for t in r.u.terms() {
            for c in &t.coeffs {
                let _ = write!(out, ",{:.17e},{:.17e},{:.17e},{:.17e}", t.pole.re, t.pole.im, c.re, c.im);
                slots += 1;
            }
        }
        for _ in slots..n {
            out.push_str(",,,,");
        }
        for v in r.j.iter().chain([r.l2, r.h_half].iter()).chain(r.hs.iter()) {
            let _ = write!(out, ",{v:.17e}");
        }
        out.push('\n');
    }
    out
}
