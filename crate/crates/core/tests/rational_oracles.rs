mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64 as C;
use rustfft::FftPlanner;
use szego_core::hankel::eigendecompose;
use szego_core::rational::{
    blaschke, fourier_eval, fourier_transform, hankel_apply, homogeneous_sobolev_norm, inhomogeneous_sobolev_norm,
    inner_product, HardyRational, RationalFn,
};
use szego_core::sample::{random_generic_symbol, random_symbol, rng, SymbolRanges};

fn samples() -> Vec<HardyRational> {
    let mut r = rng(2024);
    let mut out = vec![soliton(), double_eigenvalue(), with_double_pole()];
    for n in 1..=3 {
        out.push(random_symbol(&mut r, n, &SymbolRanges::default()));
    }
    out
}

#[test]
fn inner_products_match_quadrature() {
    let s = samples();
    for f in &s {
        for g in &s {
            let exact = inner_product(f, g).unwrap();
            let quad = inner_quad(f, g);
            assert!((exact - quad).norm() < 1e-9 * (1.0 + exact.norm()), "{exact} vs {quad}");
        }
    }
}

#[test]
fn kernel_orthogonal_to_range() {
    // (1/(x+i), b_u/(x+i)) with b_u = (x-i)/(x+i)
    let f = soliton();
    let bf = line_integral(|x| {
        let z = c(x, 0.0);
        let b = (z - c(0.0, 1.0)) / (z + c(0.0, 1.0));
        f.eval(z) * (b * f.eval(z)).conj()
    });
    assert!(bf.norm() < 1e-10);
    assert_eq!(inner_product(&HardyRational::zero(), &HardyRational::zero()).unwrap(), c(0.0, 0.0));
}

#[test]
fn sobolev_norms_match_quadrature() {
    for f in samples() {
        let l2 = inner_quad(&f, &f).re.sqrt();
        assert!(rel(homogeneous_sobolev_norm(&f, 0.0), l2) < 1e-9);
        // Ḣ¹ through the derivative
        let d1 = line_integral(|x| c(eval_derivative(&f, x).norm_sqr(), 0.0)).re.sqrt();
        assert!(rel(homogeneous_sobolev_norm(&f, 1.0), d1) < 1e-9);
        // Ḣ^{1/2} through (-i f', f)
        let dh = line_integral(|x| -c(0.0, 1.0) * eval_derivative(&f, x) * f.eval(c(x, 0.0)).conj()).re.sqrt();
        assert!(rel(homogeneous_sobolev_norm(&f, 0.5), dh) < 1e-9);
        // fractional orders through the closed-form density
        let ft = fourier_transform(&f);
        for s in [0.25, 0.75, 1.5] {
            let q = (half_line_integral(|xi| xi.powf(2.0 * s) * fourier_eval(&ft, xi).norm_sqr()) / (2.0 * PI)).sqrt();
            assert!(rel(homogeneous_sobolev_norm(&f, s), q) < 1e-9, "s={s}");
            let q = (half_line_integral(|xi| (1.0 + xi * xi).powf(s) * fourier_eval(&ft, xi).norm_sqr()) / (2.0 * PI)).sqrt();
            assert!((inhomogeneous_sobolev_norm(&f, s) - q).abs() < 1e-9, "s={s}");
        }
    }
}

#[test]
fn inhomogeneous_norm_identities() {
    for f in samples() {
        let (l2, h1) = (f.norm_l2(), homogeneous_sobolev_norm(&f, 1.0));
        assert!((inhomogeneous_sobolev_norm(&f, 0.0) - l2).abs() < 1e-10);
        assert!(rel(inhomogeneous_sobolev_norm(&f, 1.0).powi(2), l2 * l2 + h1 * h1) < 1e-9);
        let half = inhomogeneous_sobolev_norm(&f, 0.5);
        assert!(half >= l2 && half <= l2 + homogeneous_sobolev_norm(&f, 0.5));
    }
    assert_eq!(inhomogeneous_sobolev_norm(&HardyRational::zero(), 0.5), 0.0);
}

#[test]
fn fourier_transform_matches_fft() {
    let f = with_double_pole();
    let ft = fourier_transform(&f);
    let (l, m) = (4000.0, 1usize << 20);
    let dx = 2.0 * l / m as f64;
    // peel off Λ/(x+i) so the truncated tail is O(1/L²); its transform is -2πi e^{-ξ}
    let lam = f.lambda();
    let r = |x: f64| f.eval(c(x, 0.0)) - lam / c(x, 1.0);
    let mut buf: Vec<C> = (0..m).map(|j| r(-l + j as f64 * dx) * dx).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    for k in [200usize, 500, 1000, 2000, 4000] {
        let xi = 2.0 * PI * k as f64 / (2.0 * l);
        // shift from x_0 = -L
        let fft = buf[k] * C::from_polar(1.0, xi * l) - 2.0 * PI * c(0.0, 1.0) * lam * (-xi).exp();
        let exact = fourier_eval(&ft, xi);
        assert!((fft - exact).norm() < 1e-6 * exact.norm(), "xi={xi} {fft} {exact}");
    }
}

#[test]
fn lambda_matches_extrapolation() {
    for f in samples() {
        let r = 1e6;
        let at = |x: f64| f.eval(c(x, 0.0)) * x;
        let est = 2.0 * at(2.0 * r) - at(r);
        let lam = f.lambda();
        assert!((est - lam).norm() < 1e-8 * lam.norm().max(1e-3), "{est} {lam}");
    }
}

#[test]
fn projection_identities() {
    let mut r = rng(9);
    for _ in 0..10 {
        let a = random_symbol(&mut r, 2, &SymbolRanges::default());
        let b = random_symbol(&mut r, 2, &SymbolRanges::default());
        let f: RationalFn = a.as_rational().mul(&b.as_rational().conj_reflect());
        let p = f.szego_project().unwrap();
        assert_eq!(p.as_rational().szego_project().unwrap(), p);
        let rest = f.anti_hardy_part().unwrap();
        for k in 0..50 {
            let x = c(-5.0 + 0.2 * k as f64 + 0.013, 0.0);
            assert!((f.eval(x) - p.eval(x) - rest.eval(x)).norm() < 1e-12 * (1.0 + f.eval(x).norm()));
        }
        // Π(xf) = xΠ(f) + (1/2πi) ∫ f
        // f = O(1/x²), so the constant part of xf is rounding
        let pxf = f.mul_x().chop(1e-13).szego_project().unwrap();
        let int = f.integral().unwrap();
        for k in 0..20 {
            let x = c(-3.0 + 0.3 * k as f64, 0.0);
            let rhs = x * p.eval(x) + int / (2.0 * PI * c(0.0, 1.0));
            assert!((pxf.eval(x) - rhs).norm() < 1e-10);
        }
    }
}

#[test]
fn hankel_apply_matches_quadrature() {
    // H_u(h) coordinates against the range basis by quadrature: (H_u h, f) = ∫ u h̄ f̄
    let u = with_double_pole();
    let h = simple(c(0.3, 0.1), c(1.0, -0.5));
    let hu = hankel_apply(&u, &h);
    for f in [soliton(), simple(c(1.0, 0.0), c(0.5, -1.0)), h.clone()] {
        let lhs = inner_product(&hu, &f).unwrap();
        let rhs = line_integral(|x| {
            let z = c(x, 0.0);
            u.eval(z) * h.eval(z).conj() * f.eval(z).conj()
        });
        assert!((lhs - rhs).norm() < 1e-9, "{lhs} {rhs}");
    }
}

#[test]
fn blaschke_properties() {
    for u in samples() {
        let b = blaschke(&u).unwrap();
        for k in 0..30 {
            let x = c(-7.0 + 0.47 * k as f64, 0.0);
            assert!((b.eval_b(x).norm() - 1.0).abs() < 1e-12);
            assert!((b.g.eval(x) - (1.0 - b.eval_b(x))).norm() < 1e-12);
        }
        assert!(hankel_apply(&u, &b.g).sub(&u).norm_l2() < 1e-10 * u.norm_l2());
    }
}

#[test]
fn fourier_inversion_against_g() {
    // û(λ) = (u, e^{iλx} g) for generic u
    let mut r = rng(31);
    let u = random_generic_symbol(&mut r, 2, szego_core::hankel::Genericity::Generic, 0.05);
    let g = eigendecompose(&u).unwrap().g;
    let ft = fourier_transform(&u);
    for k in 1..=10 {
        let lam = 0.3 * k as f64;
        let q = oscillatory_integral(|x| u.eval(c(x, 0.0)) * g.eval(c(x, 0.0)).conj(), lam);
        let exact = fourier_eval(&ft, lam);
        assert!((q - exact).norm() < 1e-7 * (1.0 + exact.norm()), "λ={lam} {q} {exact}");
    }
}
