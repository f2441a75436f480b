//! The Hankel operator `H_u` on its range, the eigendecomposition of `H_u²`
//! with phase-fixed eigenvectors `H_u e_j = λ_j e_j`, and the shift `T`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SzegoError};
use crate::linalg::{self, CMat, CVec};
use crate::rational::{blaschke, hankel_apply, inner_product, HardyRational, PoleTerm, RationalFn};

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Relative gap below which eigenvalues of `H_u²` form one cluster. Shared by
/// the genericity classifier and the flow matrix.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Largest Gram condition number accepted.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// The basis `f_a = 1/(x - p_j)^l` of `Ran(H_u)` with its Gram matrix.
#[derive(Clone, Debug)]
pub struct RangeBasis {
    /// `(pole, l)` per basis function.
    pub funcs: Vec<(C, usize)>,
    /// `G_{ab} = (f_a, f_b)`.
    pub gram: CMat,
    /// Lower Cholesky factor of the conjugate Gram matrix, `Ḡ = L L^H`.
    pub chol: CMat,
    l_inv_h: CMat,
}

impl RangeBasis {
    pub fn dim(&self) -> usize {
        self.funcs.len()
    }

    /// Basis coordinates of `f`, plus the L² size of any part of `f`
    /// lying outside the span.
    pub fn coords_of(&self, f: &HardyRational) -> (CVec, f64) {
        let mut c = CVec::zeros(self.dim());
        let mut outside = Vec::new();
        for t in f.terms() {
            for (i, &coef) in t.coeffs.iter().enumerate() {
                match self.funcs.iter().position(|&(p, l)| p == t.pole && l == i + 1) {
                    Some(a) => c[a] += coef,
                    None if coef != ZERO => {
                        outside.push(PoleTerm::new(t.pole, {
                            let mut v = vec![ZERO; i + 1];
                            v[i] = coef;
                            v
                        }))
                    }
                    None => {}
                }
            }
        }
        let leak = if outside.is_empty() {
            0.0
        } else {
            HardyRational::from_terms(outside).map(|h| h.norm_l2()).unwrap_or(f64::INFINITY)
        };
        (c, leak)
    }

    pub fn function(&self, c: &CVec) -> HardyRational {
        let terms = self
            .funcs
            .iter()
            .zip(c.iter())
            .map(|(&(p, l), &coef)| {
                let mut v = vec![ZERO; l];
                v[l - 1] = coef;
                PoleTerm::new(p, v)
            })
            .collect();
        HardyRational::from_terms(terms).expect("basis poles are in the lower half-plane")
    }

    /// Orthonormal coordinates `y = L^H c`.
    pub fn to_ortho(&self, c: &CVec) -> CVec {
        self.chol.adjoint() * c
    }

    /// Basis coordinates `c = L^{-H} y`.
    pub fn from_ortho(&self, y: &CVec) -> CVec {
        &self.l_inv_h * y
    }

    /// Orthonormal coordinates of `f`, or range leakage.
    pub fn ortho_coords_of(&self, f: &HardyRational) -> Result<CVec> {
        let (c, leak) = self.coords_of(f);
        let scale = f.norm_l2().max(f64::MIN_POSITIVE);
        if leak > 1e-8 * scale {
            return Err(SzegoError::RangeLeakage(leak / scale));
        }
        Ok(self.to_ortho(&c))
    }
}

pub fn build_range_basis(u: &HardyRational) -> Result<RangeBasis> {
    if u.is_zero() {
        return Err(SzegoError::ZeroSymbol);
    }
    let funcs: Vec<(C, usize)> = u
        .terms()
        .iter()
        .flat_map(|t| (1..=t.multiplicity()).map(move |l| (t.pole, l)))
        .collect();
    let n = funcs.len();
    let monos: Vec<RationalFn> = funcs.iter().map(|&(p, l)| RationalFn::monomial(ONE, p, l)).collect();
    let mut gram = CMat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            gram[(a, b)] = inner_product(&monos[a], &monos[b])?;
        }
    }
    // gram[(a,b)] = (f_a, f_b); make exactly Hermitian.
    let gram = (&gram + gram.adjoint()) * C::new(0.5, 0.0);
    let (ev, _) = linalg::hermitian_eig(&gram);
    let cond = ev[n - 1] / ev[0].max(f64::MIN_POSITIVE);
    if !(ev[0] > 1e-13 * ev[n - 1]) || cond > MAX_GRAM_CONDITION {
        return Err(SzegoError::IllConditionedBasis(cond));
    }
    // ‖Σ c_a f_a‖² = c^H Ḡ c, so the orthonormal coordinates come from the
    // Cholesky factor of Ḡ.
    let chol = nalgebra::Cholesky::new(linalg::conj(&gram))
        .ok_or(SzegoError::IllConditionedBasis(cond))?
        .l();
    let l_inv_h = chol
        .adjoint()
        .solve_upper_triangular(&CMat::identity(n, n))
        .ok_or(SzegoError::IllConditionedBasis(cond))?;
    Ok(RangeBasis { funcs, gram, chol, l_inv_h })
}

/// Matrix `M` with `H_u f_a = Σ_b M_{ba} f_b`.
pub fn hankel_matrix(u: &HardyRational, rb: &RangeBasis) -> Result<CMat> {
    let n = rb.dim();
    let mut m = CMat::zeros(n, n);
    for a in 0..n {
        let fa = rb.function(&CVec::from_fn(n, |i, _| if i == a { ONE } else { ZERO }));
        let h = hankel_apply(u, &fa);
        let (c, leak) = rb.coords_of(&h);
        let scale = h.norm_l2().max(f64::MIN_POSITIVE);
        if leak > 1e-8 * scale {
            return Err(SzegoError::RangeLeakage(leak / scale));
        }
        m.set_column(a, &c);
    }
    Ok(m)
}

/// Antilinear `H_u` in orthonormal coordinates: `y ↦ K ȳ`, with `K`
/// complex symmetric.
pub fn hankel_ortho(rb: &RangeBasis, m: &CMat) -> CMat {
    let k = rb.chol.adjoint() * m * linalg::conj(&rb.l_inv_h);
    (&k + k.transpose()) * C::new(0.5, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Genericity {
    StronglyGeneric,
    Generic,
    NonGeneric,
}

impl Genericity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Genericity::StronglyGeneric => "strongly_generic",
            Genericity::Generic => "generic",
            Genericity::NonGeneric => "non_generic",
        }
    }

    pub fn is_generic(&self) -> bool {
        !matches!(self, Genericity::NonGeneric)
    }
}

/// Eigendata of `H_u²` with `H_u e_j = λ_j e_j`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub lambdas: Vec<f64>,
    /// Columns `e_j` in orthonormal range coordinates.
    pub evecs: CMat,
    /// `β_j = (g, e_j)`.
    pub betas: Vec<C>,
    pub nus: Vec<f64>,
    /// `2φ_j = 2 arg β_j`, in `[0, 2π)`.
    pub two_phi: Vec<f64>,
    /// `γ_j = Re (T e_j, e_j)`.
    pub gammas: Vec<f64>,
    pub genericity: Genericity,
    /// Index groups of equal `λ_j²`.
    pub clusters: Vec<Vec<usize>>,
    pub basis: RangeBasis,
    /// Antilinear `H_u` in orthonormal coordinates.
    pub kmat: CMat,
    pub symbol: HardyRational,
    pub g: HardyRational,
}

impl SpectralDecomposition {
    pub fn rank(&self) -> usize {
        self.lambdas.len()
    }

    /// `e_j` as a rational function.
    pub fn eigenfunction(&self, j: usize) -> HardyRational {
        self.basis.function(&self.basis.from_ortho(&self.evecs.column(j).into_owned()))
    }

    /// Coordinates of `f` in the eigenbasis: `(f, e_j)`.
    pub fn eigen_coords(&self, f: &HardyRational) -> Result<CVec> {
        let y = self.basis.ortho_coords_of(f)?;
        Ok(self.evecs.adjoint() * y)
    }

    /// Cluster index of each eigenvalue.
    pub fn cluster_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.rank()];
        for (ci, cl) in self.clusters.iter().enumerate() {
            for &j in cl {
                out[j] = ci;
            }
        }
        out
    }

    /// `u = Σ λ_j β̄_j e_j`.
    pub fn reconstruct_symbol(&self) -> HardyRational {
        let coeffs = CVec::from_fn(self.rank(), |j, _| self.betas[j].conj() * self.lambdas[j]);
        let y = &self.evecs * coeffs;
        self.basis.function(&self.basis.from_ortho(&y))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let evecs: Vec<Vec<[f64; 2]>> = (0..self.rank())
            .map(|j| self.evecs.column(j).iter().map(|z| [z.re, z.im]).collect())
            .collect();
        serde_json::json!({
            "lambda": self.lambdas,
            "nu": self.nus,
            "two_phi": self.two_phi,
            "gamma": self.gammas,
            "evecs": evecs,
            "genericity": self.genericity.as_str(),
        })
    }
}

/// Matrix of `T` in the eigenbasis, entry `(k, j) = (T e_j, e_k)`, and of
/// its adjoint `T*`.
#[derive(Clone, Debug)]
pub struct TMatrix {
    pub t: CMat,
    pub t_star: CMat,
}

/// Phase fixing for a simple eigenvalue: rotate `v` so that `K v̄ = λ v`
/// with a positive `λ`, choosing the rotation angle in `[0, π)`.
pub fn fix_phase(k: &CMat, v: &CVec) -> CVec {
    let c = v.dotc(&(k * linalg::conj_vec(v)));
    let mut theta = c.arg() / 2.0;
    if theta < 0.0 {
        theta += PI;
    }
    if theta >= PI {
        theta -= PI;
    }
    v * C::from_polar(1.0, theta)
}

/// Orthonormal basis of the fixed points of `z ↦ A z̄` inside an
/// eigenspace, where `A = V^H K V̄ / λ`.
fn conjugation_basis(k: &CMat, v: &CMat, lambda: f64) -> Result<CMat> {
    let m = v.ncols();
    let a = v.adjoint() * k * linalg::conj(v) / C::new(lambda, 0.0);
    // z = x + i y, A z̄ - z = 0 in real form.
    let mut r = DMatrix::<f64>::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let (ar, ai) = (a[(i, j)].re, a[(i, j)].im);
            let d = if i == j { 1.0 } else { 0.0 };
            r[(i, j)] = ar - d;
            r[(i, m + j)] = ai;
            r[(m + i, j)] = ai;
            r[(m + i, m + j)] = -ar - d;
        }
    }
    let ns = linalg::real_null_space(&r, 1e-7);
    if ns.ncols() != m {
        return Err(SzegoError::ConjugationBasis { expected: m, found: ns.ncols() });
    }
    // Complex inner products between fixed vectors are real, so real
    // Gram-Schmidt yields a complex-orthonormal basis.
    let mut basis: Vec<CVec> = Vec::with_capacity(m);
    for c in 0..m {
        let z = CVec::from_fn(m, |i, _| C::new(ns[(i, c)], ns[(m + i, c)]));
        let mut w = v * z;
        for b in &basis {
            let proj = b.dotc(&w).re;
            w -= b * C::new(proj, 0.0);
        }
        let nw = w.norm();
        w /= C::new(nw, 0.0);
        basis.push(w);
    }
    Ok(CMat::from_columns(&basis))
}

/// Real rotation of a fixed-point basis so that `(g, e)` vanishes on every
/// vector but the first. Valid because `β̄_j β_k` is real inside a cluster.
fn concentrate_beta(e: &CMat, g_ortho: &CVec) -> CMat {
    let m = e.ncols();
    let beta: CVec = e.adjoint() * g_ortho;
    let (imax, bmax) = beta.iter().enumerate().fold((0, 0.0), |acc, (i, b)| {
        if b.norm() > acc.1 {
            (i, b.norm())
        } else {
            acc
        }
    });
    if bmax == 0.0 || m == 1 {
        return e.clone();
    }
    let phase = beta[imax] / bmax;
    let r: Vec<f64> = beta.iter().map(|b| (b / phase).re).collect();
    let rn = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    // Householder reflection whose first column is r/|r|.
    let mut w: Vec<f64> = r.iter().map(|x| x / rn).collect();
    w[0] -= 1.0;
    let wn2: f64 = w.iter().map(|x| x * x).sum();
    let q = DMatrix::<f64>::from_fn(m, m, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        if wn2 < 1e-30 {
            d
        } else {
            d - 2.0 * w[i] * w[j] / wn2
        }
    });
    e * q.map(|x| C::new(x, 0.0))
}

/// Eigendecomposition of `H_u²` with phase-fixed eigenvectors.
pub fn eigendecompose(u: &HardyRational) -> Result<SpectralDecomposition> {
    let rb = build_range_basis(u)?;
    let m = hankel_matrix(u, &rb)?;
    let k = hankel_ortho(&rb, &m);
    let n = rb.dim();
    let h2 = &k * k.adjoint();
    let (vals, vecs) = linalg::hermitian_eig(&h2);
    let lmax = vals[n - 1].max(0.0).sqrt();
    let lmin = vals[0].max(0.0).sqrt();
    if !(lmin >= 1e-10 * lmax) || lmax == 0.0 {
        return Err(SzegoError::RankDeficient(lmin / lmax));
    }
    let clusters = group_clusters(&vals);
    let bl = blaschke(u)?;
    let g_ortho = rb.ortho_coords_of(&bl.g)?;

    let mut evecs = CMat::zeros(n, n);
    for cl in &clusters {
        let lam = (cl.iter().map(|&j| vals[j]).sum::<f64>() / cl.len() as f64).sqrt();
        if cl.len() == 1 {
            let v = vecs.column(cl[0]).into_owned();
            evecs.set_column(cl[0], &fix_phase(&k, &v));
        } else {
            let v = CMat::from_columns(&cl.iter().map(|&j| vecs.column(j).into_owned()).collect::<Vec<_>>());
            let e = concentrate_beta(&conjugation_basis(&k, &v, lam)?, &g_ortho);
            for (c, &j) in cl.iter().enumerate() {
                evecs.set_column(j, &e.column(c));
            }
        }
    }
    let mut lambdas: Vec<f64> = vals.iter().map(|v| v.max(0.0).sqrt()).collect();
    for cl in &clusters {
        let mean = cl.iter().map(|&j| lambdas[j]).sum::<f64>() / cl.len() as f64;
        for &j in cl {
            lambdas[j] = mean;
        }
    }
    // Eigen-relation check: K ē_j = λ_j e_j.
    let resid = (&k * linalg::conj(&evecs) - &evecs * CMat::from_diagonal(&CVec::from_iterator(n, lambdas.iter().map(|&l| C::new(l, 0.0))))).norm();
    if resid > 1e-8 * lmax.max(1.0) * (n as f64).sqrt() {
        return Err(SzegoError::ConjugationBasis { expected: n, found: 0 });
    }
    let betas: Vec<C> = (evecs.adjoint() * &g_ortho).iter().copied().collect();
    let nus: Vec<f64> = betas.iter().map(|b| b.norm()).collect();
    let two_phi = betas.iter().map(|b| wrap_angle(2.0 * b.arg())).collect();

    let mut dec = SpectralDecomposition {
        lambdas,
        evecs,
        betas,
        nus,
        two_phi,
        gammas: vec![0.0; n],
        genericity: Genericity::NonGeneric,
        clusters,
        basis: rb,
        kmat: k,
        symbol: u.clone(),
        g: bl.g,
    };
    let tm = t_matrix(&dec)?;
    dec.gammas = (0..n).map(|j| tm.t[(j, j)].re).collect();
    dec.genericity = classify_genericity(&dec);
    Ok(dec)
}

/// Eigendecomposition together with the `T` matrix.
pub fn analyze(u: &HardyRational) -> Result<(SpectralDecomposition, TMatrix)> {
    let dec = eigendecompose(u)?;
    let tm = t_matrix(&dec)?;
    Ok((dec, tm))
}

pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// Group sorted eigenvalues whose relative gap is below [`CLUSTER_TOL`].
pub fn group_clusters(sorted: &[f64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (j, &v) in sorted.iter().enumerate() {
        match out.last_mut() {
            Some(last) if rel_gap(sorted[*last.last().unwrap()], v) < CLUSTER_TOL => last.push(j),
            _ => out.push(vec![j]),
        }
    }
    out
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// `T e_j = x e_j - Λ(e_j) + Λ(e_j) g` projected on the eigenbasis.
pub fn t_matrix(dec: &SpectralDecomposition) -> Result<TMatrix> {
    let n = dec.rank();
    let mut t = CMat::zeros(n, n);
    for j in 0..n {
        let e = dec.eigenfunction(j);
        let lam = e.lambda();
        let xe = e.as_rational().mul_x();
        let shifted = RationalFn::new(xe.terms().to_vec(), Vec::new());
        let te = HardyRational::new(shifted).expect("same poles").add(&dec.g.scale(lam));
        let (c, leak) = dec.basis.coords_of(&te);
        let scale = te.norm_l2().max(f64::MIN_POSITIVE);
        if leak > 1e-8 * scale {
            return Err(SzegoError::ShiftClosure(leak / scale));
        }
        let y = dec.basis.to_ortho(&c);
        t.set_column(j, &(dec.evecs.adjoint() * y));
    }
    let t_star = t.adjoint();
    Ok(TMatrix { t, t_star })
}

/// Classification by simple spectrum, nonvanishing `ν_j`, and distinct
/// soliton speeds `λ_j² ν_j²`.
pub fn classify_genericity(dec: &SpectralDecomposition) -> Genericity {
    let simple = dec.clusters.iter().all(|c| c.len() == 1);
    let numax = dec.nus.iter().cloned().fold(0.0, f64::max);
    let nonzero = dec.nus.iter().all(|&v| v > CLUSTER_TOL * numax);
    if !(simple && nonzero) {
        return Genericity::NonGeneric;
    }
    let mut speeds: Vec<f64> = dec.lambdas.iter().zip(&dec.nus).map(|(l, v)| l * l * v * v).collect();
    speeds.sort_by(f64::total_cmp);
    if speeds.windows(2).all(|w| rel_gap(w[0], w[1]) >= CLUSTER_TOL) {
        Genericity::StronglyGeneric
    } else {
        Genericity::Generic
    }
}
