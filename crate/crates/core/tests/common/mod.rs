#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use szego_core::rational::{HardyRational, PoleTerm};

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn simple(coef: C, pole: C) -> HardyRational {
    HardyRational::monomial(coef, pole, 1).unwrap()
}

pub fn soliton() -> HardyRational {
    simple(c(1.0, 0.0), c(0.0, -1.0))
}

/// `2/(x+i) - 4/(x+2i)`.
pub fn double_eigenvalue() -> HardyRational {
    simple(c(2.0, 0.0), c(0.0, -1.0)).add(&simple(c(-4.0, 0.0), c(0.0, -2.0)))
}

pub fn with_double_pole() -> HardyRational {
    HardyRational::from_terms(vec![
        PoleTerm::new(c(0.5, -1.0), vec![c(1.0, 0.3), c(-0.4, 0.2)]),
        PoleTerm::new(c(-1.0, -0.7), vec![c(0.2, -0.9)]),
    ])
    .unwrap()
}

/// `∫_R f` for smooth `f` decaying at least like `1/x²`, by the trapezoid
/// rule after `x = sinh s`.
pub fn line_integral(f: impl Fn(f64) -> C) -> C {
    let h = 0.005;
    let n = (42.0 / h) as i64;
    let mut acc = c(0.0, 0.0);
    for k in -n..=n {
        let s = k as f64 * h;
        acc += f(s.sinh()) * s.cosh();
    }
    acc * h
}

/// `∫_0^∞ f` for `f` with at most algebraic behaviour at 0 and exponential
/// decay, by the trapezoid rule after `ξ = e^s`.
pub fn half_line_integral(f: impl Fn(f64) -> f64) -> f64 {
    let h = 0.005;
    let n = (40.0 / h) as i64;
    (-n..=n).map(|k| {
        let s = k as f64 * h;
        f(s.exp()) * s.exp()
    })
    .sum::<f64>()
        * h
}

pub fn inner_quad(f: &HardyRational, g: &HardyRational) -> C {
    line_integral(|x| f.eval(c(x, 0.0)) * g.eval(c(x, 0.0)).conj())
}

/// Derivative of a partial-fraction sum, evaluated directly.
pub fn eval_derivative(f: &HardyRational, x: f64) -> C {
    let z = c(x, 0.0);
    let mut acc = c(0.0, 0.0);
    for t in f.terms() {
        for (i, a) in t.coeffs.iter().enumerate() {
            let l = (i + 1) as i32;
            acc += -(l as f64) * a / (z - t.pole).powi(l + 1);
        }
    }
    acc
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let (mut q0, mut q1) = (1.0, x);
                    for k in 2..=n {
                        let q2 = ((2 * k - 1) as f64 * x * q1 - (k - 1) as f64 * q0) / k as f64;
                        q0 = q1;
                        q1 = q2;
                    }
                    let d = n as f64 * (x * q1 - q0) / (x * x - 1.0);
                    return (x, 2.0 / ((1.0 - x * x) * d * d));
                }
            }
        })
        .collect()
}

/// `∫_R F(x) e^{-iκx} dx` for `F ~ a/x²`, by Gauss-Legendre panels on
/// `[-X, X]` and two-term asymptotic tails.
pub fn oscillatory_integral(f: impl Fn(f64) -> C, kappa: f64) -> C {
    let big: f64 = 2000.0;
    let gl = gauss_legendre(12);
    let mut acc = c(0.0, 0.0);
    let mut a: f64 = -big;
    while a < big {
        let w = if a.abs() < 20.0 { 0.25 } else { 0.5 };
        let b = (a + w).min(big);
        let (m, r) = ((a + b) / 2.0, (b - a) / 2.0);
        for &(x, wt) in &gl {
            let xx = m + r * x;
            acc += f(xx) * C::from_polar(1.0, -kappa * xx) * wt * r;
        }
        a = b;
    }
    // ∫_X^∞ e^{iky} y^{-2} dy ≈ -e^{ikX}/(ikX²) (1 + 2/(ikX))
    let tail = |k: f64| {
        let ik = c(0.0, k);
        -C::from_polar(1.0, k * big) / (ik * big * big) * (1.0 + 2.0 / (ik * big))
    };
    acc + f(big) * big * big * tail(-kappa) + f(-big) * big * big * tail(kappa)
}

/// `‖f - g‖_{L²}` from pointwise differences, free of the cancellation in
/// `‖f‖² - 2 Re(f, g) + ‖g‖²`.
pub fn l2_distance(f: &HardyRational, g: &HardyRational) -> f64 {
    line_integral(|x| c((f.eval(c(x, 0.0)) - g.eval(c(x, 0.0))).norm_sqr(), 0.0)).re.sqrt()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
