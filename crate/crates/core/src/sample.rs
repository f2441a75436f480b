//! Seeded random symbols and coordinates for property suites and demos.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action_angle::ActionAngleCoords;
use crate::hankel::{eigendecompose, Genericity};
use crate::rational::{HardyRational, PoleTerm};

type C = Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ranges for random simple-pole symbols.
#[derive(Clone, Debug)]
pub struct SymbolRanges {
    pub re_pole: (f64, f64),
    pub im_pole: (f64, f64),
    pub coeff_abs: (f64, f64),
    /// Minimum distance between two poles.
    pub min_separation: f64,
}

impl Default for SymbolRanges {
    fn default() -> Self {
        SymbolRanges { re_pole: (-2.0, 2.0), im_pole: (-2.0, -0.4), coeff_abs: (0.4, 2.0), min_separation: 0.4 }
    }
}

/// `Σ_j c_j/(x - p_j)` with `n` distinct simple poles.
pub fn random_symbol<R: Rng>(rng: &mut R, n: usize, r: &SymbolRanges) -> HardyRational {
    let mut poles: Vec<C> = Vec::with_capacity(n);
    while poles.len() < n {
        let p = C::new(rng.random_range(r.re_pole.0..r.re_pole.1), rng.random_range(r.im_pole.0..r.im_pole.1));
        if poles.iter().all(|q| (q - p).norm() >= r.min_separation) {
            poles.push(p);
        }
    }
    let terms = poles
        .into_iter()
        .map(|p| {
            let c = C::from_polar(rng.random_range(r.coeff_abs.0..r.coeff_abs.1), rng.random_range(0.0..2.0 * PI));
            PoleTerm::new(p, vec![c])
        })
        .collect();
    HardyRational::from_terms(terms).expect("poles drawn in the lower half-plane")
}

/// Draw until the symbol is at least as generic as `class`, with relative
/// spectral gaps above `min_gap` so the classification is robust.
pub fn random_generic_symbol<R: Rng>(rng: &mut R, n: usize, class: Genericity, min_gap: f64) -> HardyRational {
    let r = SymbolRanges::default();
    loop {
        let u = random_symbol(rng, n, &r);
        let Ok(dec) = eigendecompose(&u) else { continue };
        let ok = match class {
            Genericity::NonGeneric => true,
            Genericity::Generic => dec.genericity.is_generic(),
            Genericity::StronglyGeneric => dec.genericity == Genericity::StronglyGeneric,
        };
        if !ok {
            continue;
        }
        let l2: Vec<f64> = dec.lambdas.iter().map(|l| l * l).collect();
        let mut speeds: Vec<f64> = l2.iter().zip(&dec.nus).map(|(a, v)| a * v * v).collect();
        speeds.sort_by(f64::total_cmp);
        let gap_ok = |v: &[f64]| v.windows(2).all(|w| (w[1] - w[0]) >= min_gap * w[1]);
        let speed_ok = class != Genericity::StronglyGeneric || gap_ok(&speeds);
        if gap_ok(&l2) && speed_ok {
            return u;
        }
    }
}

/// Random point of Ω with relative action gaps of at least 20%.
pub fn random_coords<R: Rng>(rng: &mut R, n: usize) -> ActionAngleCoords {
    let mut lam2 = Vec::with_capacity(n);
    let mut acc = rng.random_range(0.05..0.3);
    for _ in 0..n {
        lam2.push(acc);
        acc *= rng.random_range(1.2..2.0);
    }
    let actions_lambda = lam2.iter().map(|l| 4.0 * PI * l).collect();
    let actions_i = lam2.iter().map(|l| 2.0 * l * rng.random_range(1.0..12.0)).collect();
    let angles = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let gammas = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    ActionAngleCoords { actions_i, actions_lambda, angles, gammas }
}
