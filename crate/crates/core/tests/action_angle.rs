mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64 as C;
use szego_core::action_angle::{
    angle_diff, chi, chi_inverse, euler_retract, hierarchy_flow, hierarchy_vector_field, szego_flow,
    toroidal_cylinder_check, ActionAngleCoords,
};
use szego_core::flow::recover_rational;
use szego_core::hankel::{analyze, eigendecompose, Genericity};
use szego_core::sample::{random_generic_symbol, rng};

fn coords_of(u: &szego_core::rational::HardyRational) -> ActionAngleCoords {
    chi(&eigendecompose(u).unwrap()).unwrap()
}

#[test]
fn toroidal_cylinders() {
    let u = random_generic_symbol(&mut rng(3), 3, Genericity::Generic, 0.05);
    let (dec, tm) = analyze(&u).unwrap();
    assert!(toroidal_cylinder_check(&dec, &dec));
    let later = eigendecompose(&recover_rational(&dec, &tm, 7.3).unwrap()).unwrap();
    assert!(toroidal_cylinder_check(&dec, &later));
    let doubled = eigendecompose(&u.scale(c(2.0, 0.0))).unwrap();
    assert!(!toroidal_cylinder_check(&dec, &doubled));
}

#[test]
fn soliton_angles_follow_closed_form() {
    // u(t) = e^{-it/4}/(x - t/2 + i)
    let c0 = coords_of(&soliton());
    for t in [0.5, 3.0, -11.0] {
        let ut = simple(C::from_polar(1.0, -t / 4.0), c(t / 2.0, -1.0));
        let ct = coords_of(&ut);
        assert!(angle_diff(ct.angles[0], c0.angles[0] + t / 4.0).abs() < 1e-12);
        assert!((ct.gammas[0] - t / 2.0).abs() < 1e-12);
        assert!(ct.max_diff(&szego_flow(&c0, t)) < 1e-12);
    }
}

#[test]
fn euler_step_rates() {
    // coordinates of u ± h X_{J_{2n}}(u), retracted, against the coordinate rates
    let h = 1e-6;
    for seed in [1u64, 2, 3] {
        let u = random_generic_symbol(&mut rng(seed), 3, Genericity::Generic, 0.05);
        let dec = eigendecompose(&u).unwrap();
        let c0 = chi(&dec).unwrap();
        for n in 1..=3usize {
            let x = hierarchy_vector_field(&u, &dec.g, n);
            let fwd = coords_of(&euler_retract(&u, &x, h).unwrap());
            let bwd = coords_of(&euler_retract(&u, &x, -h).unwrap());
            let want = hierarchy_flow(&c0, n as u32, 1.0);
            for j in 0..c0.len() {
                let d_act = (fwd.actions_i[j] - bwd.actions_i[j]) / (2.0 * h);
                assert!(d_act.abs() < 1e-3 * c0.actions_i[j], "n={n} j={j} {d_act}");
                let d_lam = (fwd.actions_lambda[j] - bwd.actions_lambda[j]) / (2.0 * h);
                assert!(d_lam.abs() < 1e-3 * c0.actions_lambda[j]);
                let rate = angle_diff(want.angles[j], c0.angles[j]);
                let d_ang = angle_diff(fwd.angles[j], bwd.angles[j]) / (2.0 * h);
                assert!((d_ang - rate).abs() < 1e-3 * rate.abs().max(1e-2), "n={n} j={j} {d_ang} {rate}");
                let grate = want.gammas[j] - c0.gammas[j];
                let d_gam = (fwd.gammas[j] - bwd.gammas[j]) / (2.0 * h);
                assert!((d_gam - grate).abs() < 1e-3 * grate.abs().max(1e-2), "n={n} j={j} {d_gam} {grate}");
            }
        }
    }
}

#[test]
fn szego_field_is_time_derivative() {
    // (1/i) Π(|u|²u) = 2 X_{J_4}(u), checked off the real axis by quadrature
    let u = random_generic_symbol(&mut rng(12), 2, Genericity::Generic, 0.05);
    let g = eigendecompose(&u).unwrap().g;
    let x = hierarchy_vector_field(&u, &g, 2);
    for z in [c(0.0, 0.5), c(1.5, 1.0)] {
        let cubic = line_integral(|y| {
            let v = u.eval(c(y, 0.0));
            v.norm_sqr() * v / (c(y, 0.0) - z)
        }) / (2.0 * PI * c(0.0, 1.0));
        assert!((cubic / c(0.0, 1.0) - 2.0 * x.eval(z)).norm() < 1e-9);
    }
}

#[test]
fn inverse_one_by_one_closed_form() {
    // N = 1: pole γ - iν²/4π, |coefficient| = λν²/2π
    let coords = ActionAngleCoords {
        actions_i: vec![2.0 * 0.3 * 5.0],
        actions_lambda: vec![4.0 * PI * 0.3],
        angles: vec![1.1],
        gammas: vec![-0.4],
    };
    let u = chi_inverse(&coords).unwrap();
    let t = &u.terms()[0];
    assert!((t.pole - c(-0.4, -5.0 / (4.0 * PI))).norm() < 1e-12);
    assert!((t.coeffs[0].norm() - 0.3f64.sqrt() * 5.0 / (2.0 * PI)).abs() < 1e-12);
    assert!(coords.max_diff(&coords_of(&u)) < 1e-10);
}

#[test]
fn inverse_rejects_outside_image() {
    let mut c = szego_core::sample::random_coords(&mut rng(4), 2);
    c.actions_lambda.swap(0, 1);
    assert!(!c.in_domain());
    assert!(chi_inverse(&c).is_err());
}
