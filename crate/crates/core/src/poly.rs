//! Dense complex polynomials in ascending-power order, plus root finding.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SzegoError};

/// Largest polynomial degree accepted anywhere in the crate.
pub const DEGREE_CAP: usize = 64;

/// Complex polynomial `Σ c_k x^k`, coefficients stored lowest power first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Poly(coeffs);
        p.trim();
        p
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    /// `Π (x - r)` over the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Poly(vec![Complex64::new(1.0, 0.0)]);
        for &r in roots {
            p = p.mul(&Poly(vec![-r, Complex64::new(1.0, 0.0)]));
        }
        p
    }

    fn trim(&mut self) {
        while matches!(self.0.last(), Some(c) if *c == Complex64::new(0.0, 0.0)) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let zero = Complex64::new(0.0, 0.0);
        Poly::new(
            (0..n)
                .map(|k| {
                    self.0.get(k).copied().unwrap_or(zero) + other.0.get(k).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.0.iter().map(|&c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::default();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Roots with multiplicity, as `(root, multiplicity)` clusters.
    ///
    /// Roots come from the companion-matrix eigenvalues, polished by Newton
    /// steps. Computed roots within `cluster_tol` relative distance always
    /// merge. A floating-point m-fold root splits by roughly eps^(1/m), so
    /// roots within [`LOOSE_CLUSTER_TOL`] also merge, but only when the
    /// first m-1 derivatives vanish at the cluster mean to rounding level.
    pub fn root_clusters(&self, cluster_tol: f64) -> Result<Vec<(Complex64, usize)>> {
        let deg = match self.degree() {
            None => return Err(SzegoError::InvalidSymbol("zero polynomial has no roots".into())),
            Some(d) => d,
        };
        if deg > DEGREE_CAP {
            return Err(SzegoError::DegreeCap(deg));
        }
        if deg == 0 {
            return Ok(Vec::new());
        }
        let lead = self.0[deg];
        let mut companion = DMatrix::<Complex64>::zeros(deg, deg);
        for i in 1..deg {
            companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..deg {
            companion[(i, deg - 1)] = -self.0[i] / lead;
        }
        let roots = crate::linalg::eigenvalues(&companion)?;

        let dp = self.derivative();
        let polish = |mut r: Complex64| {
            for _ in 0..3 {
                let d = dp.eval(r);
                if d.norm() < 1e-8 * self.max_abs() {
                    break;
                }
                let step = self.eval(r) / d;
                if !step.is_finite() || step.norm() > 1e-3 * r.norm().max(1.0) {
                    break;
                }
                r -= step;
            }
            r
        };

        let rel = |a: Complex64, b: Complex64| (a - b).norm() / a.norm().max(b.norm()).max(1.0);
        let mut out = Vec::new();
        for loose in group(&roots, |a, b| rel(a, b) <= LOOSE_CLUSTER_TOL) {
            let m = loose.len();
            if m > 1 && self.is_multiple_root(mean(&loose), m) {
                out.push((mean(&loose), m));
                continue;
            }
            for strict in group(&loose, |a, b| rel(a, b) <= cluster_tol) {
                if strict.len() == 1 {
                    out.push((polish(strict[0]), 1));
                } else {
                    out.push((mean(&strict), strict.len()));
                }
            }
        }
        Ok(out)
    }

    /// Taylor coefficients of `p` around `z`, lowest order first.
    pub fn taylor_at(&self, z: Complex64) -> Vec<Complex64> {
        // Repeated synthetic division.
        let mut c = self.0.clone();
        let n = c.len();
        for k in 0..n {
            for i in (k..n - 1).rev() {
                let hi = c[i + 1];
                c[i] += z * hi;
            }
        }
        c
    }

    fn is_multiple_root(&self, z: Complex64, m: usize) -> bool {
        let t = self.taylor_at(z);
        let abs_poly = Poly(self.0.iter().map(|c| Complex64::new(c.norm(), 0.0)).collect());
        let scale = abs_poly.taylor_at(Complex64::new(z.norm(), 0.0));
        (0..m).all(|k| t[k].norm() <= 1e-12 * scale[k].norm().max(f64::MIN_POSITIVE))
    }
}

/// Relative distance below which nearby computed roots are candidates for a
/// single multiple root, pending a derivative check.
pub const LOOSE_CLUSTER_TOL: f64 = 1e-4;

fn mean(v: &[Complex64]) -> Complex64 {
    v.iter().sum::<Complex64>() / v.len() as f64
}

/// Single-linkage grouping under `close`.
fn group(items: &[Complex64], close: impl Fn(Complex64, Complex64) -> bool) -> Vec<Vec<Complex64>> {
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for &r in items {
        let hits: Vec<usize> = (0..groups.len()).filter(|&g| groups[g].iter().any(|&x| close(x, r))).collect();
        match hits.split_first() {
            None => groups.push(vec![r]),
            Some((&first, rest)) => {
                for &g in rest.iter().rev() {
                    let moved = groups.remove(g);
                    groups[first].extend(moved);
                }
                groups[first].push(r);
            }
        }
    }
    groups
}

/// Binomial coefficient as a float.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
