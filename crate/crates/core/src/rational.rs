//! Rational functions in partial-fraction form and the residue calculus on
//! them: Szegő projection, Λ functional, inner products, Blaschke products,
//! closed-form Fourier transforms and Sobolev norms.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SzegoError};
use crate::poly::{binomial, factorial, Poly, DEGREE_CAP};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// Roots of the denominator closer than this (relative) are one pole.
pub const POLE_CLUSTER_TOL: f64 = 1e-9;

/// A pole and its coefficients `c_l` of `1/(x - p)^l`, `l = 1..=m`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleTerm {
    pub pole: C,
    pub coeffs: Vec<C>,
}

impl PoleTerm {
    pub fn new(pole: C, coeffs: Vec<C>) -> Self {
        let mut t = PoleTerm { pole, coeffs };
        while matches!(t.coeffs.last(), Some(c) if *c == ZERO) {
            t.coeffs.pop();
        }
        t
    }

    pub fn multiplicity(&self) -> usize {
        self.coeffs.len()
    }
}

/// Sum of pole terms with pairwise distinct poles plus a polynomial part.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RationalFn {
    terms: Vec<PoleTerm>,
    poly: Vec<C>,
}

fn cmp_pole(a: &C, b: &C) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

impl RationalFn {
    /// Canonical form: poles merged on exact equality, zero coefficients
    /// trimmed, terms sorted by `(Re p, Im p)`.
    pub fn new(terms: Vec<PoleTerm>, poly: Vec<C>) -> Self {
        let mut merged: Vec<PoleTerm> = Vec::with_capacity(terms.len());
        let mut terms = terms;
        terms.sort_by(|a, b| cmp_pole(&a.pole, &b.pole));
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.pole == t.pole => {
                    if t.coeffs.len() > last.coeffs.len() {
                        last.coeffs.resize(t.coeffs.len(), ZERO);
                    }
                    for (a, b) in last.coeffs.iter_mut().zip(t.coeffs) {
                        *a += b;
                    }
                }
                _ => merged.push(t),
            }
        }
        let terms = merged
            .into_iter()
            .map(|t| PoleTerm::new(t.pole, t.coeffs))
            .filter(|t| !t.coeffs.is_empty())
            .collect();
        let mut poly = poly;
        while matches!(poly.last(), Some(c) if *c == ZERO) {
            poly.pop();
        }
        RationalFn { terms, poly }
    }

    pub fn zero() -> Self {
        RationalFn::default()
    }

    pub fn constant(c: C) -> Self {
        RationalFn::new(Vec::new(), vec![c])
    }

    /// `c / (x - p)^l`.
    pub fn monomial(c: C, pole: C, l: usize) -> Self {
        let mut coeffs = vec![ZERO; l];
        coeffs[l - 1] = c;
        RationalFn::new(vec![PoleTerm::new(pole, coeffs)], Vec::new())
    }

    pub fn terms(&self) -> &[PoleTerm] {
        &self.terms
    }

    /// Polynomial part, ascending powers.
    pub fn poly_part(&self) -> &[C] {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.poly.is_empty()
    }

    pub fn is_decaying(&self) -> bool {
        self.poly.is_empty()
    }

    /// Poles with multiplicities, in canonical order.
    pub fn poles(&self) -> Vec<(C, usize)> {
        self.terms.iter().map(|t| (t.pole, t.multiplicity())).collect()
    }

    /// Total pole multiplicity.
    pub fn degree(&self) -> usize {
        self.terms.iter().map(PoleTerm::multiplicity).sum()
    }

    pub fn add(&self, other: &RationalFn) -> RationalFn {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        let n = self.poly.len().max(other.poly.len());
        let poly = (0..n)
            .map(|k| self.poly.get(k).copied().unwrap_or(ZERO) + other.poly.get(k).copied().unwrap_or(ZERO))
            .collect();
        RationalFn::new(terms, poly)
    }

    pub fn scale(&self, s: C) -> RationalFn {
        RationalFn::new(
            self.terms
                .iter()
                .map(|t| PoleTerm::new(t.pole, t.coeffs.iter().map(|&c| c * s).collect()))
                .collect(),
            self.poly.iter().map(|&c| c * s).collect(),
        )
    }

    pub fn sub(&self, other: &RationalFn) -> RationalFn {
        self.add(&other.scale(-ONE))
    }

    /// `x · f(x)`, using `x/(x-p)^l = 1/(x-p)^(l-1) + p/(x-p)^l`.
    pub fn mul_x(&self) -> RationalFn {
        let mut poly = vec![ZERO];
        poly.extend_from_slice(&self.poly);
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let m = t.coeffs.len();
            let coeffs = (0..m)
                .map(|l| t.pole * t.coeffs[l] + t.coeffs.get(l + 1).copied().unwrap_or(ZERO))
                .collect();
            poly[0] += t.coeffs[0];
            terms.push(PoleTerm::new(t.pole, coeffs));
        }
        RationalFn::new(terms, poly)
    }

    /// Product, expanded back into partial fractions.
    pub fn mul(&self, other: &RationalFn) -> RationalFn {
        let mut acc_terms: Vec<PoleTerm> = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                acc_terms.extend(term_product(a, b));
            }
        }
        let mut out = RationalFn::new(acc_terms, Vec::new());
        // Polynomial parts: P·Q directly, P·(terms) through repeated x-shifts.
        let pq = Poly::new(self.poly.clone()).mul(&Poly::new(other.poly.clone()));
        out = out.add(&RationalFn::new(Vec::new(), pq.0));
        for (poly, rat) in [(&self.poly, other), (&other.poly, self)] {
            let decaying = RationalFn::new(rat.terms.clone(), Vec::new());
            let mut shifted = decaying;
            for &c in poly.iter() {
                out = out.add(&shifted.scale(c));
                shifted = shifted.mul_x();
            }
        }
        out
    }

    /// `f*(x) = conj(f(conj x))`, the function whose values on the real
    /// line are the complex conjugates of those of `f`.
    pub fn conj_reflect(&self) -> RationalFn {
        RationalFn::new(
            self.terms
                .iter()
                .map(|t| PoleTerm::new(t.pole.conj(), t.coeffs.iter().map(|c| c.conj()).collect()))
                .collect(),
            self.poly.iter().map(|c| c.conj()).collect(),
        )
    }

    /// Value at `z`.
    pub fn evaluate(&self, z: C) -> Result<C> {
        for t in &self.terms {
            if (z - t.pole).norm() < 1e-14 {
                return Err(SzegoError::EvaluationAtPole(format!("{z}")));
            }
        }
        Ok(self.eval(z))
    }

    /// Value at `z` without the pole guard.
    pub fn eval(&self, z: C) -> C {
        let mut s = self.poly.iter().rev().fold(ZERO, |acc, &c| acc * z + c);
        for t in &self.terms {
            let w = ONE / (z - t.pole);
            s += t.coeffs.iter().rev().fold(ZERO, |acc, &c| (acc + c) * w);
        }
        s
    }

    /// Λ(f): the sum of first-order coefficients, `lim x f(x)` at infinity.
    pub fn lambda(&self) -> C {
        self.terms.iter().map(|t| t.coeffs[0]).sum()
    }

    /// Szegő projection: keeps the lower-half-plane terms.
    pub fn szego_project(&self) -> Result<HardyRational> {
        if !self.is_decaying() {
            return Err(SzegoError::NonDecaying);
        }
        self.check_no_real_poles()?;
        Ok(HardyRational(RationalFn::new(
            self.terms.iter().filter(|t| t.pole.im < 0.0).cloned().collect(),
            Vec::new(),
        )))
    }

    /// `(I - Π) f`: the upper-half-plane terms.
    pub fn anti_hardy_part(&self) -> Result<RationalFn> {
        if !self.is_decaying() {
            return Err(SzegoError::NonDecaying);
        }
        self.check_no_real_poles()?;
        Ok(RationalFn::new(
            self.terms.iter().filter(|t| t.pole.im > 0.0).cloned().collect(),
            Vec::new(),
        ))
    }

    fn check_no_real_poles(&self) -> Result<()> {
        match self.terms.iter().find(|t| t.pole.im == 0.0) {
            Some(t) => Err(SzegoError::NonIntegrable(format!("real pole at {}", t.pole))),
            None => Ok(()),
        }
    }

    /// `∫ f dx` over the line, as the symmetric limit `lim ∫_{-R}^{R}`
    /// when `f` decays only like `1/x`.
    pub fn integral(&self) -> Result<C> {
        if !self.is_decaying() {
            return Err(SzegoError::NonIntegrable("polynomial part".into()));
        }
        self.check_no_real_poles()?;
        // ∫_{-R}^{R} dx/(x-p) → -iπ for Im p < 0 and +iπ for Im p > 0;
        // higher powers integrate to zero.
        Ok(self
            .terms
            .iter()
            .map(|t| {
                let s = if t.pole.im < 0.0 { -1.0 } else { 1.0 };
                t.coeffs[0] * I * (s * std::f64::consts::PI)
            })
            .sum())
    }

    /// Drop coefficients below `tol` times the largest one.
    pub fn chop(&self, tol: f64) -> RationalFn {
        let big = self
            .terms
            .iter()
            .flat_map(|t| t.coeffs.iter())
            .chain(self.poly.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let cut = |c: &C| if c.norm() <= tol * big { ZERO } else { *c };
        RationalFn::new(
            self.terms
                .iter()
                .map(|t| PoleTerm::new(t.pole, t.coeffs.iter().map(cut).collect()))
                .collect(),
            self.poly.iter().map(cut).collect(),
        )
    }

    /// Values of the `2L`-periodization `Σ_n f(x + 2Ln)` (symmetric sum),
    /// through derivatives of `(π/2L) cot(π z / 2L)`.
    pub fn eval_periodized(&self, x: f64, half_width: f64) -> C {
        let k = std::f64::consts::PI / (2.0 * half_width);
        let mut s = ZERO;
        for t in &self.terms {
            let z = C::new(x, 0.0) - t.pole;
            let derivs = cot_derivatives(k * z, t.coeffs.len());
            for (l, &c) in t.coeffs.iter().enumerate() {
                // Σ_n (z + 2Ln)^{-(l+1)} = (-1)^l / l! · d^l/dz^l [k cot(kz)]
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                s += c * derivs[l] * (sign * k.powi(l as i32 + 1) / factorial(l));
            }
        }
        s
    }
}

/// `cot^{(n)}(w)` for `n = 0..count`, via the polynomial recursion in
/// `y = cot w`: `d/dw P(y) = -(1 + y²) P'(y)`.
fn cot_derivatives(w: C, count: usize) -> Vec<C> {
    let y = w.cos() / w.sin();
    let mut p = vec![0.0, 1.0]; // P_0(y) = y
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(p.iter().rev().fold(ZERO, |acc, &c| acc * y + c));
        // P' then multiply by -(1 + y²)
        let dp: Vec<f64> = p.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect();
        let mut next = vec![0.0; dp.len() + 2];
        for (k, &c) in dp.iter().enumerate() {
            next[k] -= c;
            next[k + 2] -= c;
        }
        p = next;
    }
    out
}

/// Partial fractions of `a · b` for two single-pole terms.
fn term_product(a: &PoleTerm, b: &PoleTerm) -> Vec<PoleTerm> {
    let (p, q) = (a.pole, b.pole);
    if p == q {
        let mut coeffs = vec![ZERO; a.coeffs.len() + b.coeffs.len()];
        for (i, &x) in a.coeffs.iter().enumerate() {
            for (j, &y) in b.coeffs.iter().enumerate() {
                coeffs[i + j + 1] += x * y;
            }
        }
        return vec![PoleTerm::new(p, coeffs)];
    }
    let mut at_p = vec![ZERO; a.coeffs.len()];
    let mut at_q = vec![ZERO; b.coeffs.len()];
    for (i, &x) in a.coeffs.iter().enumerate() {
        for (j, &y) in b.coeffs.iter().enumerate() {
            let (ea, eb) = (i + 1, j + 1);
            let xy = x * y;
            for (pole_coeffs, e_here, e_other, d) in [(&mut at_p, ea, eb, p - q), (&mut at_q, eb, ea, q - p)] {
                // 1/((x-p)^a (x-q)^b) near p: Σ_r binom(-b, r) (p-q)^{-b-r} (x-p)^{r-a}
                for r in 0..e_here {
                    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                    let coef = sign * binomial(e_other + r - 1, r);
                    pole_coeffs[e_here - r - 1] += xy * coef * d.powi(-((e_other + r) as i32));
                }
            }
        }
    }
    vec![PoleTerm::new(p, at_p), PoleTerm::new(q, at_q)]
}

/// `∫ (x-p)^{-l} (x-r)^{-m} dx` over the real line, for non-real `p, r`.
fn pair_integral(p: C, l: usize, r: C, m: usize) -> C {
    let lower_p = p.im < 0.0;
    let lower_r = r.im < 0.0;
    if lower_p == lower_r {
        return ZERO;
    }
    // Close in the upper half plane around whichever pole lies there.
    let (up, e_up, other, e_other) = if lower_p { (r, m, p, l) } else { (p, l, r, m) };
    let sign = if (e_up - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let comb = factorial(e_up + e_other - 2) / (factorial(e_other - 1) * factorial(e_up - 1));
    C::new(0.0, 2.0 * std::f64::consts::PI) * sign * comb * (up - other).powi(-((e_up + e_other - 1) as i32))
}

/// `(f, h) = ∫ f h̄` by residues.
pub fn inner_product(f: &RationalFn, h: &RationalFn) -> Result<C> {
    if !f.is_decaying() || !h.is_decaying() {
        return Err(SzegoError::NonIntegrable("polynomial part".into()));
    }
    f.check_no_real_poles()?;
    h.check_no_real_poles()?;
    let mut s = ZERO;
    for a in &f.terms {
        for b in &h.terms {
            let r = b.pole.conj();
            for (i, &x) in a.coeffs.iter().enumerate() {
                for (j, &y) in b.coeffs.iter().enumerate() {
                    s += x * y.conj() * pair_integral(a.pole, i + 1, r, j + 1);
                }
            }
        }
    }
    Ok(s)
}

/// `ω(u, v) = 4 Im (u, v)`.
pub fn symplectic_form(u: &HardyRational, v: &HardyRational) -> f64 {
    4.0 * inner_product(u, v).expect("Hardy rationals are integrable").im
}

/// An element of `L²_+`: a decaying rational whose poles all lie in the open
/// lower half-plane.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HardyRational(RationalFn);

impl std::ops::Deref for HardyRational {
    type Target = RationalFn;
    fn deref(&self) -> &RationalFn {
        &self.0
    }
}

impl HardyRational {
    pub fn new(f: RationalFn) -> Result<Self> {
        if !f.is_decaying() {
            return Err(SzegoError::InvalidSymbol("polynomial part in a Hardy element".into()));
        }
        if let Some(t) = f.terms.iter().find(|t| !(t.pole.im < 0.0)) {
            return Err(SzegoError::PoleOnOrAboveRealLine(format!("{}", t.pole)));
        }
        if f.degree() > DEGREE_CAP {
            return Err(SzegoError::DegreeCap(f.degree()));
        }
        Ok(HardyRational(f))
    }

    pub fn from_terms(terms: Vec<PoleTerm>) -> Result<Self> {
        HardyRational::new(RationalFn::new(terms, Vec::new()))
    }

    pub fn zero() -> Self {
        HardyRational::default()
    }

    /// `c / (x - p)^l` with `Im p < 0`.
    pub fn monomial(c: C, pole: C, l: usize) -> Result<Self> {
        HardyRational::new(RationalFn::monomial(c, pole, l))
    }

    pub fn as_rational(&self) -> &RationalFn {
        &self.0
    }

    pub fn into_rational(self) -> RationalFn {
        self.0
    }

    pub fn add(&self, other: &HardyRational) -> HardyRational {
        HardyRational(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &HardyRational) -> HardyRational {
        HardyRational(self.0.sub(&other.0))
    }

    pub fn scale(&self, s: C) -> HardyRational {
        HardyRational(self.0.scale(s))
    }

    /// Products of Hardy elements stay in the class.
    pub fn mul(&self, other: &HardyRational) -> HardyRational {
        HardyRational(self.0.mul(&other.0))
    }

    pub fn chop(&self, tol: f64) -> HardyRational {
        HardyRational(self.0.chop(tol))
    }

    pub fn norm_l2(&self) -> f64 {
        inner_product(self, self).expect("integrable").re.max(0.0).sqrt()
    }
}

/// `H_u(h) = Π(u h̄)`.
pub fn hankel_apply(u: &HardyRational, h: &HardyRational) -> HardyRational {
    u.0.mul(&h.0.conj_reflect()).szego_project().expect("product of Hardy rationals is projectable")
}

/// Partial fractions of `A/B` with all roots of `B` in the lower
/// half-plane.
pub fn pf_from_ratio(num: &Poly, den: &Poly) -> Result<HardyRational> {
    let deg_b = den.degree().ok_or_else(|| SzegoError::InvalidSymbol("zero denominator".into()))?;
    if deg_b > DEGREE_CAP {
        return Err(SzegoError::DegreeCap(deg_b));
    }
    if let Some(deg_a) = num.degree() {
        if deg_a + 1 > deg_b {
            return Err(SzegoError::InvalidSymbol(format!(
                "numerator degree {deg_a} must be below denominator degree {deg_b}"
            )));
        }
    } else {
        return Ok(HardyRational::zero());
    }
    let b0 = den.0[0];
    if b0 == ZERO {
        return Err(SzegoError::PoleOnOrAboveRealLine("0".into()));
    }
    let (num, den) = (num.scale(ONE / b0), den.scale(ONE / b0));
    let roots = den.root_clusters(POLE_CLUSTER_TOL)?;
    if let Some((r, _)) = roots.iter().find(|(r, _)| r.im >= -1e-12) {
        return Err(SzegoError::PoleOnOrAboveRealLine(format!("{r}")));
    }
    let lead = den.0[deg_b];
    let abs_num = Poly(num.0.iter().map(|c| C::new(c.norm(), 0.0)).collect());
    let mut terms = Vec::with_capacity(roots.len());
    for (idx, &(p, m)) in roots.iter().enumerate() {
        let a_ser = num.taylor_at(p);
        let scale = abs_num.eval(C::new(p.norm(), 0.0)).norm();
        if a_ser[0].norm() <= 1e-10 * scale {
            return Err(SzegoError::NonReducedFraction(format!("{p}")));
        }
        // Taylor series of Q(x) = lead · Π_{other roots}(x - r)^{m_r} at p.
        let mut q = Poly::constant(lead);
        for (j, &(r, mr)) in roots.iter().enumerate() {
            if j != idx {
                q = q.mul(&Poly::from_roots(&vec![r; mr]));
            }
        }
        let q_ser = q.taylor_at(p);
        // Series division A/Q up to order m-1.
        let mut s = vec![ZERO; m];
        for k in 0..m {
            let mut acc = a_ser.get(k).copied().unwrap_or(ZERO);
            for i in 0..k {
                acc -= s[i] * q_ser.get(k - i).copied().unwrap_or(ZERO);
            }
            s[k] = acc / q_ser[0];
        }
        // Coefficient of (x-p)^{-l} is the series coefficient of order m-l.
        let coeffs = (1..=m).map(|l| s[m - l]).collect();
        terms.push(PoleTerm::new(p, coeffs));
    }
    HardyRational::from_terms(terms)
}

/// Blaschke product `b_u = Π ((x - p̄)/(x - p))^m` of a symbol together with
/// `g = 1 - b_u`.
#[derive(Clone, Debug)]
pub struct BlaschkeData {
    pub poles: Vec<(C, usize)>,
    pub g: HardyRational,
}

impl BlaschkeData {
    pub fn eval_b(&self, z: C) -> C {
        self.poles
            .iter()
            .map(|&(p, m)| ((z - p.conj()) / (z - p)).powi(m as i32))
            .product()
    }
}

pub fn blaschke(u: &HardyRational) -> Result<BlaschkeData> {
    if u.is_zero() {
        return Err(SzegoError::ZeroSymbol);
    }
    let poles = u.poles();
    // Expand Π (1 + (p - p̄)/(x - p))^m; the constant part stays exactly 1.
    let mut b = RationalFn::constant(ONE);
    for &(p, m) in &poles {
        let factor = RationalFn::new(vec![PoleTerm::new(p, vec![p - p.conj()])], vec![ONE]);
        for _ in 0..m {
            b = b.mul(&factor);
        }
    }
    let g = RationalFn::constant(ONE).sub(&b);
    let g = HardyRational::new(RationalFn::new(g.terms, Vec::new()))?;
    let check = hankel_apply(u, &g).sub(u);
    let rel = check.norm_l2() / u.norm_l2();
    if rel > 1e-10 {
        return Err(SzegoError::RangeLeakage(rel));
    }
    Ok(BlaschkeData { poles, g })
}

/// One term `amp · ξ^power · e^{-i pole ξ}` of a closed-form Fourier
/// transform, valid for `ξ > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub amp: C,
    pub pole: C,
    pub power: usize,
}

/// `f̂(ξ) = ∫ e^{-ixξ} f(x) dx`, as a sum of `FourierTerm`s.
pub fn fourier_transform(f: &HardyRational) -> Vec<FourierTerm> {
    let mut out = Vec::new();
    for t in f.terms() {
        for (i, &c) in t.coeffs.iter().enumerate() {
            let l = i + 1;
            let amp = c * C::new(2.0 * std::f64::consts::PI, 0.0) * (-I).powi(l as i32) / factorial(l - 1);
            out.push(FourierTerm { amp, pole: t.pole, power: l - 1 });
        }
    }
    out
}

pub fn fourier_eval(terms: &[FourierTerm], xi: f64) -> C {
    if xi < 0.0 {
        return ZERO;
    }
    terms
        .iter()
        .map(|t| t.amp * xi.powi(t.power as i32) * (-I * t.pole * xi).exp())
        .sum()
}

/// `‖f‖²_{Ḣ^s} = (1/2π) ∫_0^∞ ξ^{2s} |f̂(ξ)|² dξ`, closed form via
/// `∫ ξ^n e^{-cξ} = Γ(n+1)/c^{n+1}`.
pub fn homogeneous_sobolev_norm_sq(f: &HardyRational, s: f64) -> f64 {
    let ft = fourier_transform(f);
    let mut acc = ZERO;
    for a in &ft {
        for b in &ft {
            let n = (a.power + b.power) as f64 + 2.0 * s;
            let c = I * (a.pole - b.pole.conj());
            let g = statrs::function::gamma::gamma(n + 1.0);
            acc += a.amp * b.amp.conj() * g / c.powf(n + 1.0);
        }
    }
    (acc.re / (2.0 * std::f64::consts::PI)).max(0.0)
}

pub fn homogeneous_sobolev_norm(f: &HardyRational, s: f64) -> f64 {
    homogeneous_sobolev_norm_sq(f, s).sqrt()
}

/// `‖f‖_{H^s}` with weight `(1 + ξ²)^s`. Integer `s` expands exactly into
/// homogeneous norms; otherwise adaptive quadrature plus a tail bound.
pub fn inhomogeneous_sobolev_norm(f: &HardyRational, s: f64) -> f64 {
    if f.is_zero() {
        return 0.0;
    }
    if s.fract() == 0.0 {
        let k = s as usize;
        return (0..=k)
            .map(|j| binomial(k, j) * homogeneous_sobolev_norm_sq(f, j as f64))
            .sum::<f64>()
            .sqrt();
    }
    let ft = fourier_transform(f);
    let density = |xi: f64| (1.0 + xi * xi).powf(s) * fourier_eval(&ft, xi).norm_sqr();
    let decay = ft.iter().map(|t| -t.pole.im).fold(f64::INFINITY, f64::min);
    let kmax = ft.iter().map(|t| t.power).max().unwrap_or(0) as f64;
    let amp: f64 = ft.iter().map(|t| t.amp.norm()).sum();
    // Tail of amp² (1+ξ²)^s ξ^{2k} e^{-2aξ} beyond Ξ.
    let q = 2.0 * kmax + 2.0 * s;
    let tail = |x: f64| amp * amp * 2f64.powf(s) * x.powf(q) * (-2.0 * decay * x).exp() / (2.0 * decay - q / x).max(decay);
    let mut upper = (q / decay).max(1.0 / decay);
    while tail(upper) > 1e-13 {
        upper *= 1.25;
    }
    // Panels on a geometric grid resolve both the near-zero and decay scales.
    let mut edges = vec![0.0];
    let mut x = 0.05 / decay.max(1e-300);
    while x < upper {
        edges.push(x);
        x *= 2.0;
    }
    edges.push(upper);
    let integral: f64 = edges
        .windows(2)
        .map(|w| quadrature::integrate(density, w[0], w[1], 1e-13).integral)
        .sum();
    (integral / (2.0 * std::f64::consts::PI)).sqrt()
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for t in &self.terms {
            for (i, c) in t.coeffs.iter().enumerate() {
                if *c == ZERO {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "({c})/(x - ({}))^{}", t.pole, i + 1)?;
            }
        }
        for (k, c) in self.poly.iter().enumerate() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})x^{k}")?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Display for HardyRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

// JSON interchange: {"terms":[{"pole":[re,im],"coeffs":[[re,im],...]}]}

#[derive(Serialize, Deserialize)]
struct TermJson {
    pole: [f64; 2],
    coeffs: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct HardyJson {
    terms: Vec<TermJson>,
}

impl Serialize for HardyRational {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        HardyJson {
            terms: self
                .terms()
                .iter()
                .map(|t| TermJson {
                    pole: [t.pole.re, t.pole.im],
                    coeffs: t.coeffs.iter().map(|c| [c.re, c.im]).collect(),
                })
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for HardyRational {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = HardyJson::deserialize(de)?;
        let terms = raw
            .terms
            .into_iter()
            .map(|t| PoleTerm::new(C::new(t.pole[0], t.pole[1]), t.coeffs.iter().map(|c| C::new(c[0], c[1])).collect()))
            .collect::<Vec<_>>();
        let mut seen: Vec<C> = terms.iter().map(|t| t.pole).collect();
        seen.sort_by(cmp_pole);
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(serde::de::Error::custom("duplicate pole"));
        }
        HardyRational::from_terms(terms).map_err(serde::de::Error::custom)
    }
}

impl HardyRational {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| match e.classify() {
            serde_json::error::Category::Data => {
                let msg = e.to_string();
                if msg.contains("pole on or above") {
                    SzegoError::PoleOnOrAboveRealLine(msg)
                } else {
                    SzegoError::InvalidSymbol(msg)
                }
            }
            _ => SzegoError::InvalidSymbol(e.to_string()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn simple(coef: C, pole: C) -> HardyRational {
        HardyRational::monomial(coef, pole, 1).unwrap()
    }

    fn two_pole() -> HardyRational {
        simple(c(2.0, 0.0), c(0.0, -1.0)).add(&simple(c(-4.0, 0.0), c(0.0, -2.0)))
    }

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn ratio_to_single_fraction() {
        let u = pf_from_ratio(&Poly::constant(ONE), &Poly::new(vec![I, ONE])).unwrap();
        assert_eq!(u.terms().len(), 1);
        assert!(close(u.terms()[0].pole, -I, 1e-14));
        assert!(close(u.terms()[0].coeffs[0], ONE, 1e-14));
    }

    #[test]
    fn ratio_to_two_pole_example() {
        // 2(x+2i) - 4(x+i) over (x+i)(x+2i)
        let num = Poly::new(vec![c(0.0, 0.0), c(-2.0, 0.0)]);
        let den = Poly::from_roots(&[-I, c(0.0, -2.0)]);
        let u = pf_from_ratio(&num, &den).unwrap();
        let expect = two_pole();
        assert_eq!(u.terms().len(), 2);
        for (a, b) in u.terms().iter().zip(expect.terms()) {
            assert!(close(a.pole, b.pole, 1e-12));
            assert!(close(a.coeffs[0], b.coeffs[0], 1e-12));
        }
    }

    #[test]
    fn ratio_with_double_root() {
        let den = Poly::from_roots(&[-I, -I]);
        let u = pf_from_ratio(&Poly::constant(ONE), &den).unwrap();
        assert_eq!(u.terms().len(), 1);
        let t = &u.terms()[0];
        assert_eq!(t.multiplicity(), 2);
        assert!(t.coeffs[0].norm() < 1e-7);
        assert!(close(t.coeffs[1], ONE, 1e-7));
    }

    #[test]
    fn ratio_rejects_upper_pole_and_common_factor() {
        let up = pf_from_ratio(&Poly::constant(ONE), &Poly::new(vec![-I, ONE]));
        assert!(matches!(up, Err(SzegoError::PoleOnOrAboveRealLine(_))));
        let real = pf_from_ratio(&Poly::constant(ONE), &Poly::new(vec![c(-1.0, 0.0), ONE]));
        assert!(matches!(real, Err(SzegoError::PoleOnOrAboveRealLine(_))));
        let common = pf_from_ratio(&Poly::new(vec![I, ONE]), &Poly::from_roots(&[-I, c(0.0, -2.0)]));
        assert!(matches!(common, Err(SzegoError::NonReducedFraction(_))));
    }

    #[test]
    fn projection_examples() {
        let f = RationalFn::monomial(ONE, -I, 1).mul(&RationalFn::monomial(ONE, I, 1));
        let p = f.szego_project().unwrap();
        assert_eq!(p.terms().len(), 1);
        assert!(close(p.terms()[0].coeffs[0], c(0.0, 0.5), 1e-15));
        let anti = RationalFn::monomial(ONE, I, 1);
        assert!(anti.szego_project().unwrap().is_zero());
        let bad = RationalFn::constant(ONE);
        assert_eq!(bad.szego_project(), Err(SzegoError::NonDecaying));
    }

    #[test]
    fn hankel_examples() {
        let u = simple(ONE, -I);
        let h = hankel_apply(&u, &u);
        assert!(close(h.terms()[0].coeffs[0], c(0.0, 0.5), 1e-15));
        assert!(hankel_apply(&u, &HardyRational::zero()).is_zero());
        let h2 = hankel_apply(&u, &simple(ONE, c(0.0, -2.0)));
        assert_eq!(h2.terms().len(), 1);
        assert!(close(h2.terms()[0].coeffs[0], c(0.0, 1.0 / 3.0), 1e-15));
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(simple(ONE, -I).lambda(), ONE);
        assert_eq!(HardyRational::monomial(ONE, -I, 2).unwrap().lambda(), ZERO);
        assert_eq!(two_pole().lambda(), c(-2.0, 0.0));
    }

    #[test]
    fn inner_product_examples() {
        let u = simple(ONE, -I);
        assert!(close(inner_product(&u, &u).unwrap(), c(PI, 0.0), 1e-15));
        // (1/(x+i), ((x-i)/(x+i)) · 1/(x+i)) = 0
        let b = RationalFn::new(vec![PoleTerm::new(-I, vec![c(0.0, -2.0)])], vec![ONE]);
        let bh = b.mul(&u);
        assert!(inner_product(&u, &bh).unwrap().norm() < 1e-15);
        let z = HardyRational::zero();
        assert_eq!(inner_product(&z, &z).unwrap(), ZERO);
    }

    #[test]
    fn blaschke_examples() {
        let u = simple(ONE, -I);
        let b = blaschke(&u).unwrap();
        assert_eq!(b.g.terms().len(), 1);
        assert!(close(b.g.terms()[0].coeffs[0], c(0.0, 2.0), 1e-15));
        let b3 = blaschke(&simple(c(3.0, -1.0), -I)).unwrap();
        assert_eq!(b3.g, b.g);
        let b2 = blaschke(&two_pole()).unwrap();
        assert_eq!(b2.g.poles().len(), 2);
        for x in [-3.0, 0.0, 0.7, 12.0] {
            assert!((b2.eval_b(c(x, 0.0)).norm() - 1.0).abs() < 1e-14);
            assert!(close(b2.g.eval(c(x, 0.0)), ONE - b2.eval_b(c(x, 0.0)), 1e-14));
        }
        assert_eq!(blaschke(&HardyRational::zero()).unwrap_err(), SzegoError::ZeroSymbol);
    }

    #[test]
    fn fourier_examples() {
        let ft = fourier_transform(&simple(ONE, -I));
        assert_eq!(ft.len(), 1);
        assert!(close(ft[0].amp, c(0.0, -2.0 * PI), 1e-15));
        assert_eq!(ft[0].power, 0);
        let ft2 = fourier_transform(&HardyRational::monomial(ONE, -I, 2).unwrap());
        let nonzero: Vec<_> = ft2.iter().filter(|t| t.amp != ZERO).collect();
        assert!(close(nonzero[0].amp, c(-2.0 * PI, 0.0), 1e-15));
        assert_eq!(nonzero[0].power, 1);
        assert!(fourier_transform(&HardyRational::zero()).is_empty());
    }

    #[test]
    fn sobolev_examples() {
        let u = simple(ONE, -I);
        assert!((homogeneous_sobolev_norm(&u, 0.0) - PI.sqrt()).abs() < 1e-14);
        assert!((homogeneous_sobolev_norm(&u, 0.5) - (PI / 2.0).sqrt()).abs() < 1e-14);
        assert_eq!(homogeneous_sobolev_norm(&HardyRational::zero(), 1.3), 0.0);
        assert!((inhomogeneous_sobolev_norm(&u, 0.0) - PI.sqrt()).abs() < 1e-10);
        let h = inhomogeneous_sobolev_norm(&u, 0.5);
        let l2 = u.norm_l2();
        assert!(h > l2 && h < l2 + homogeneous_sobolev_norm(&u, 0.5));
        let one = inhomogeneous_sobolev_norm(&u, 1.0).powi(2);
        let expect = l2 * l2 + homogeneous_sobolev_norm_sq(&u, 1.0);
        assert!((one - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn evaluate_examples() {
        let u = simple(ONE, -I);
        assert!(close(u.evaluate(ZERO).unwrap(), -I, 1e-15));
        assert!(close(u.evaluate(I).unwrap(), c(0.0, -0.5), 1e-15));
        assert!(two_pole().evaluate(ZERO).unwrap().norm() < 1e-15);
        assert!(matches!(u.evaluate(-I), Err(SzegoError::EvaluationAtPole(_))));
    }

    #[test]
    fn symplectic_examples() {
        let u = simple(ONE, -I);
        let iu = u.scale(I);
        assert!((symplectic_form(&u, &iu) + 4.0 * PI).abs() < 1e-13);
        assert!(symplectic_form(&u, &u).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let u = two_pole();
        let s = u.to_json();
        assert_eq!(HardyRational::from_json(&s).unwrap(), u);
        assert!(matches!(
            HardyRational::from_json(r#"{"terms":[{"pole":[0,1],"coeffs":[[1,0]]}]}"#),
            Err(SzegoError::PoleOnOrAboveRealLine(_))
        ));
        assert!(matches!(HardyRational::from_json("{oops"), Err(SzegoError::InvalidSymbol(_))));
    }

    #[test]
    fn periodized_matches_direct_sum() {
        let u = HardyRational::from_terms(vec![PoleTerm::new(c(0.3, -0.7), vec![c(1.0, 0.5), c(-0.2, 0.1), c(0.05, 0.0)])]).unwrap();
        let l = 3.0;
        let x = 0.4;
        let n_max = 20000;
        let mut direct: C = (-n_max..=n_max).map(|n| u.eval(c(x + 2.0 * l * n as f64, 0.0))).sum();
        // Leading symmetric tails: Σ_{|n|>N} 1/(z+2Ln) ≈ -z/(2L²N) and
        // Σ_{|n|>N} 1/(z+2Ln)² ≈ 1/(2L²N).
        let t = &u.terms()[0];
        direct += (t.coeffs[1] - t.coeffs[0] * (c(x, 0.0) - t.pole)) / (2.0 * l * l * n_max as f64);
        assert!(close(u.eval_periodized(x, l), direct, 1e-10));
    }
}
