//! Generalized action-angle coordinates `χ(u) = (2λ²ν², 4πλ², 2φ, γ)`, their
//! inverse, hierarchy flows in coordinates, and the hierarchy vector fields.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SzegoError};
use crate::hankel::{wrap_angle, SpectralDecomposition};
use crate::linalg::{self, CMat, CVec};
use crate::rational::{hankel_apply, HardyRational, PoleTerm};

type C = Complex64;
const I: C = C::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionAngleCoords {
    /// `2 λ_j² ν_j²`
    #[serde(rename = "actions_I")]
    pub actions_i: Vec<f64>,
    /// `4π λ_j²`, strictly increasing
    pub actions_lambda: Vec<f64>,
    /// `2φ_j` in `[0, 2π)`
    pub angles: Vec<f64>,
    /// `γ_j`
    #[serde(rename = "generalized_angles")]
    pub gammas: Vec<f64>,
}

impl ActionAngleCoords {
    pub fn len(&self) -> usize {
        self.actions_lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions_lambda.is_empty()
    }

    pub fn lambda_sq(&self, j: usize) -> f64 {
        self.actions_lambda[j] / (4.0 * PI)
    }

    pub fn nu_sq(&self, j: usize) -> f64 {
        self.actions_i[j] / (2.0 * self.lambda_sq(j))
    }

    /// Membership in Ω: positive actions, strictly increasing `4πλ²`.
    pub fn in_domain(&self) -> bool {
        let n = self.len();
        self.actions_i.len() == n
            && self.angles.len() == n
            && self.gammas.len() == n
            && self.actions_i.iter().all(|&a| a > 0.0)
            && self.actions_lambda.first().is_some_and(|&a| a > 0.0)
            && self.actions_lambda.windows(2).all(|w| w[0] < w[1])
    }

    /// Largest componentwise difference, angles compared modulo 2π.
    pub fn max_diff(&self, other: &ActionAngleCoords) -> f64 {
        let mut d: f64 = 0.0;
        for j in 0..self.len().min(other.len()) {
            d = d.max((self.actions_i[j] - other.actions_i[j]).abs());
            d = d.max((self.actions_lambda[j] - other.actions_lambda[j]).abs());
            d = d.max(angle_diff(self.angles[j], other.angles[j]).abs());
            d = d.max((self.gammas[j] - other.gammas[j]).abs());
        }
        if self.len() != other.len() {
            d = f64::INFINITY;
        }
        d
    }
}

/// `a - b` reduced to `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

pub fn chi(dec: &SpectralDecomposition) -> Result<ActionAngleCoords> {
    if !dec.genericity.is_generic() {
        return Err(SzegoError::NotGeneric);
    }
    let l2: Vec<f64> = dec.lambdas.iter().map(|l| l * l).collect();
    Ok(ActionAngleCoords {
        actions_i: l2.iter().zip(&dec.nus).map(|(a, v)| 2.0 * a * v * v).collect(),
        actions_lambda: l2.iter().map(|a| 4.0 * PI * a).collect(),
        angles: dec.two_phi.clone(),
        gammas: dec.gammas.clone(),
    })
}

/// Matrix of `T` in the basis `f_j = e^{iφ_j} e_j`, built from coordinates
/// alone.
pub fn t_from_coords(c: &ActionAngleCoords) -> CMat {
    let n = c.len();
    let lam: Vec<f64> = (0..n).map(|j| c.lambda_sq(j).sqrt()).collect();
    let nu: Vec<f64> = (0..n).map(|j| c.nu_sq(j).sqrt()).collect();
    CMat::from_fn(n, n, |k, j| {
        if k == j {
            C::new(c.gammas[j], nu[j] * nu[j] / (4.0 * PI))
        } else {
            let ph = C::from_polar(1.0, c.angles[j] - c.angles[k]);
            lam[j] * nu[j] * nu[k] / (2.0 * PI * I) * (lam[j] - lam[k] * ph) / (lam[k] * lam[k] - lam[j] * lam[j])
        }
    })
}

/// `u(x) = -(i/2π) Σ_{jk} λ_j ν_j ν_k e^{-2iφ_j} conj(R_{jk})` with
/// `R = (T - x̄)^{-1}`.
pub fn eval_from_coords(c: &ActionAngleCoords, t: &CMat, x: C) -> Result<C> {
    let n = c.len();
    let a = CVec::from_fn(n, |j, _| {
        let (l2, v2) = (c.lambda_sq(j), c.nu_sq(j));
        (l2 * v2).sqrt() * C::from_polar(1.0, -c.angles[j])
    });
    let b = CVec::from_fn(n, |j, _| C::new(c.nu_sq(j).sqrt(), 0.0));
    let m = t.adjoint() - CMat::identity(n, n) * x;
    let (z, rel) = linalg::solve(&m, &a)?;
    if rel > 1e-10 {
        return Err(SzegoError::ResolventSolve(rel));
    }
    Ok(-I / (2.0 * PI) * b.dotc(&z))
}

/// Poles from the spectrum of `T`, residues by least squares on Chebyshev
/// points scaled to the spectral radius of `T`.
pub fn chi_inverse(c: &ActionAngleCoords) -> Result<HardyRational> {
    if !c.in_domain() {
        return Err(SzegoError::OutsideImage("coordinates not in the domain".into()));
    }
    let n = c.len();
    let t = t_from_coords(c);
    let eig = linalg::eigenvalues(&t)?;
    if let Some(z) = eig.iter().find(|z| z.im <= 0.0) {
        return Err(SzegoError::OutsideImage(format!("{z}")));
    }
    let poles: Vec<C> = eig.iter().map(|z| z.conj()).collect();
    let radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let m = 4 * n + 8;
    let xs: Vec<f64> = (0..m).map(|k| 2.0 * radius * (PI * (k as f64 + 0.5) / m as f64).cos()).collect();
    let a = CMat::from_fn(m, n, |r, j| C::new(1.0, 0.0) / (C::new(xs[r], 0.0) - poles[j]));
    let rhs = CVec::from_iterator(m, xs.iter().map(|&x| eval_from_coords(c, &t, C::new(x, 0.0))).collect::<Result<Vec<_>>>()?);
    let coef = linalg::least_squares(&a, &rhs)?;
    let resid = (&a * &coef - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
    if resid > 1e-8 {
        return Err(SzegoError::DefectiveRecovery(format!("residue fit residual {resid:.3e}")));
    }
    HardyRational::from_terms((0..n).map(|j| PoleTerm::new(poles[j], vec![coef[j]])).collect())
}

/// Flow of `J_{2n}` in coordinates: actions fixed, `2φ_j` advancing at
/// `λ_j^{2n-2}/2` and `γ_j` at `(n-1) λ_j^{2n-2} ν_j² / 4π`.
pub fn hierarchy_flow(c: &ActionAngleCoords, n: u32, t: f64) -> ActionAngleCoords {
    let mut out = c.clone();
    for j in 0..c.len() {
        let lp = c.lambda_sq(j).powi(n as i32 - 1);
        out.angles[j] = wrap_angle(c.angles[j] + t * lp / 2.0);
        out.gammas[j] = c.gammas[j] + t * (n as f64 - 1.0) * lp * c.nu_sq(j) / (4.0 * PI);
    }
    out
}

/// Coordinate flow of the cubic Szegő equation itself (energy `2 J_4`).
pub fn szego_flow(c: &ActionAngleCoords, t: f64) -> ActionAngleCoords {
    hierarchy_flow(c, 2, 2.0 * t)
}

/// `X_{J_{2n}}(u) = (1/2i) (H^{2n-1}(g) + Σ_{k=1}^{n-1} H^{2n-2k-1}(g) H^{2k}(g))`.
pub fn hierarchy_vector_field(u: &HardyRational, g: &HardyRational, n: usize) -> HardyRational {
    let mut powers = vec![g.clone()];
    for _ in 1..(2 * n) {
        let next = hankel_apply(u, powers.last().unwrap());
        powers.push(next);
    }
    let mut x = powers[2 * n - 1].clone();
    for k in 1..n {
        x = x.add(&powers[2 * n - 2 * k - 1].mul(&powers[2 * k]));
    }
    x.scale(C::new(0.0, -0.5))
}

/// One explicit Euler step `u + h X` retracted onto `M(N)`: for simple
/// poles, a double-pole component `b/(x-p)²` of `X` moves the pole by
/// `h b / c`, where `c` is the residue of `u`.
pub fn euler_retract(u: &HardyRational, x: &HardyRational, h: f64) -> Result<HardyRational> {
    let mut terms = Vec::with_capacity(u.terms().len());
    for t in u.terms() {
        if t.multiplicity() != 1 {
            return Err(SzegoError::InvalidSymbol("retraction needs simple poles".into()));
        }
        let xt = x.terms().iter().find(|s| s.pole == t.pole);
        let (a, b) = match xt {
            Some(s) => (s.coeffs.first().copied().unwrap_or_default(), s.coeffs.get(1).copied().unwrap_or_default()),
            None => (C::default(), C::default()),
        };
        let c = t.coeffs[0];
        terms.push(PoleTerm::new(t.pole + b * h / c, vec![c + a * h]));
    }
    HardyRational::from_terms(terms)
}

/// Membership of two symbols in the same toroidal cylinder: equal `λ_j`
/// and `ν_j` lists.
pub fn toroidal_cylinder_check(a: &SpectralDecomposition, b: &SpectralDecomposition) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-8 * x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
    a.rank() == b.rank()
        && a.lambdas.iter().zip(&b.lambdas).all(|(x, y)| close(*x, *y))
        && a.nus.iter().zip(&b.nus).all(|(x, y)| close(*x, *y))
}
