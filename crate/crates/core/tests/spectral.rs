mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64 as C;
use rand::Rng;
use szego_core::flow::{conserved_quantities, conserved_quantities_direct};
use szego_core::hankel::{analyze, build_range_basis, eigendecompose, Genericity, SpectralDecomposition};
use szego_core::linalg::eigenvalues;
use szego_core::rational::{blaschke, hankel_apply, inner_product, HardyRational};
use szego_core::sample::{random_generic_symbol, random_symbol, rng, SymbolRanges};

fn cases() -> Vec<HardyRational> {
    let mut r = rng(77);
    let mut out = vec![soliton(), double_eigenvalue(), with_double_pole()];
    for n in 2..=4 {
        out.push(random_symbol(&mut r, n, &SymbolRanges::default()));
    }
    out.push(random_generic_symbol(&mut r, 3, Genericity::StronglyGeneric, 0.05));
    out
}

fn hdot_half_sq(u: &HardyRational) -> f64 {
    line_integral(|x| -c(0.0, 1.0) * eval_derivative(u, x) * u.eval(c(x, 0.0)).conj()).re
}

#[test]
fn eigenfunctions_by_quadrature() {
    for u in cases() {
        let dec = eigendecompose(&u).unwrap();
        let g = blaschke(&u).unwrap().g;
        let n = dec.rank();
        let es: Vec<_> = (0..n).map(|j| dec.eigenfunction(j)).collect();
        for j in 0..n {
            let he = hankel_apply(&u, &es[j]);
            assert!(he.sub(&es[j].scale(c(dec.lambdas[j], 0.0))).norm_l2() < 1e-9);
            for k in 0..n {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((inner_quad(&es[j], &es[k]) - want).norm() < 1e-9);
            }
            let beta = inner_quad(&g, &es[j]);
            assert!((beta - dec.betas[j]).norm() < 1e-9, "{beta} {}", dec.betas[j]);
            assert!((beta.norm() - dec.nus[j]).abs() < 1e-9);
            // (u, e_j) = λ_j β̄_j
            let ue = inner_quad(&u, &es[j]);
            assert!((ue - dec.lambdas[j] * dec.betas[j].conj()).norm() < 1e-9);
        }
    }
}

#[test]
fn trace_identities() {
    for u in cases() {
        let dec = eigendecompose(&u).unwrap();
        let l2 = inner_quad(&u, &u).re;
        let j2: f64 = dec.lambdas.iter().zip(&dec.nus).map(|(l, v)| l * l * v * v).sum();
        assert!(rel(j2, l2) < 1e-9);
        let tr: f64 = dec.lambdas.iter().map(|l| l * l).sum();
        assert!(rel(2.0 * PI * tr, hdot_half_sq(&u)) < 1e-9);
        let spectral = conserved_quantities(&dec, 4);
        let direct = conserved_quantities_direct(&u, 4);
        for (a, b) in spectral.iter().zip(&direct) {
            assert!(rel(*a, *b) < 1e-9);
        }
        assert!(dec.reconstruct_symbol().sub(&u).norm_l2() < 1e-9 * u.norm_l2());
    }
}

#[test]
fn j4_is_quartic_integral() {
    // J_4 = λ⁴ν² against (1/2)∫|u|⁴
    let u = soliton();
    let dec = eigendecompose(&u).unwrap();
    let j4 = conserved_quantities(&dec, 2)[1];
    assert!((j4 - PI / 4.0).abs() < 1e-12);
    let quartic = line_integral(|x| c(u.eval(c(x, 0.0)).norm_sqr().powi(2), 0.0)).re;
    assert!((0.5 * quartic - PI / 4.0).abs() < 1e-10);
}

#[test]
fn hankel_symmetry_by_quadrature() {
    let u = with_double_pole();
    let fs = [soliton(), simple(c(0.2, 1.0), c(1.0, -0.3)), double_eigenvalue()];
    for f in &fs {
        for h in &fs {
            let a = inner_product(&hankel_apply(&u, f), h).unwrap();
            let b = inner_product(&hankel_apply(&u, h), f).unwrap();
            assert!((a - b).norm() < 1e-12);
            let q = line_integral(|x| {
                let z = c(x, 0.0);
                u.eval(z) * f.eval(z).conj() * h.eval(z).conj()
            });
            assert!((a - q).norm() < 1e-9);
        }
    }
}

fn t_by_quadrature(dec: &SpectralDecomposition) -> Vec<Vec<C>> {
    let n = dec.rank();
    let es: Vec<_> = (0..n).map(|j| dec.eigenfunction(j)).collect();
    let g = &dec.g;
    (0..n)
        .map(|k| {
            (0..n)
                .map(|j| {
                    let lam = es[j].lambda();
                    line_integral(|x| {
                        let z = c(x, 0.0);
                        let te = z * es[j].eval(z) - lam + lam * g.eval(z);
                        te * es[k].eval(z).conj()
                    })
                })
                .collect()
        })
        .collect()
}

#[test]
fn shift_matrix_structure() {
    for u in cases() {
        let (dec, tm) = analyze(&u).unwrap();
        let n = dec.rank();
        let q = t_by_quadrature(&dec);
        let (l, b) = (&dec.lambdas, &dec.betas);
        for k in 0..n {
            for j in 0..n {
                let t = tm.t[(k, j)];
                assert!((t - q[k][j]).norm() < 1e-8, "({k},{j}) {t} {}", q[k][j]);
                // T - T* = (i/2π) β_k β̄_j
                let d = t - tm.t[(j, k)].conj();
                assert!((d - c(0.0, 1.0) / (2.0 * PI) * b[k] * b[j].conj()).norm() < 1e-9);
                // T*H = HT
                assert!((l[j] * tm.t[(j, k)].conj() - l[k] * t.conj()).norm() < 1e-9);
            }
            assert!((tm.t[(k, k)].im - dec.nus[k].powi(2) / (4.0 * PI)).abs() < 1e-10);
        }
        let mut ev = eigenvalues(&tm.t).unwrap();
        let mut poles: Vec<C> = u.as_rational().poles().iter().flat_map(|&(p, m)| vec![p.conj(); m]).collect();
        let key = |z: &C| (z.re * 1e6).round() as i64 * 1_000_000 + (z.im * 1e6).round() as i64;
        ev.sort_by_key(key);
        poles.sort_by_key(key);
        assert_eq!(ev.len(), poles.len());
        for (a, p) in ev.iter().zip(&poles) {
            assert!((a - p).norm() < 1e-5, "{a} {p}");
        }
    }
}

#[test]
fn double_eigenvalue_example() {
    let (dec, tm) = analyze(&double_eigenvalue()).unwrap();
    assert_eq!(dec.genericity, Genericity::NonGeneric);
    for l in &dec.lambdas {
        assert!((l * l - 1.0 / 9.0).abs() < 1e-12);
    }
    assert!(dec.nus[1] < 1e-10);
    let mut ev = eigenvalues(&tm.t).unwrap();
    ev.sort_by(|a, b| a.im.total_cmp(&b.im));
    assert!((ev[0] - c(0.0, 1.0)).norm() < 1e-9 && (ev[1] - c(0.0, 2.0)).norm() < 1e-9);
}

#[test]
fn gram_matrix_closed_form() {
    let rb = build_range_basis(&double_eigenvalue()).unwrap();
    let mut diag: Vec<f64> = (0..2).map(|i| rb.gram[(i, i)].re).collect();
    diag.sort_by(f64::total_cmp);
    assert!((diag[0] - PI / 2.0).abs() < 1e-12 && (diag[1] - PI).abs() < 1e-12);
    // (1/(x+i), 1/(x+2i)) = 2π/3
    assert!((rb.gram[(0, 1)].norm() - 2.0 * PI / 3.0).abs() < 1e-12);
    assert!((rb.gram[(0, 1)] - rb.gram[(1, 0)].conj()).norm() < 1e-14);
}

#[test]
fn rank_one_frequency() {
    let mut r = rng(5);
    for _ in 0..10 {
        let coef = c(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let pole = c(r.random_range(-3.0..3.0), r.random_range(-3.0..-0.2));
        let dec = eigendecompose(&simple(coef, pole)).unwrap();
        assert!(rel(dec.lambdas[0], coef.norm() / (2.0 * pole.im.abs())) < 1e-12);
    }
}
