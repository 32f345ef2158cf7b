//! Seeded random test data and a fixed set of reference systems.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::geometry::{BumpAtom, ConformalTorusMetric, MagneticSystem, ScalarField, Surface, TrigPoly2};
use crate::phase::PhaseFunction;

type C64 = Complex64;

/// Frequencies `|m|, |n| <= TORUS_BAND` appear in random torus modes.
pub const TORUS_BAND: i32 = 2;

fn normal(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) / std::f64::consts::SQRT_2
}

fn random_poly(rng: &mut ChaCha8Rng, terms: usize) -> TrigPoly2 {
    let mut p = TrigPoly2::zero();
    for _ in 0..terms {
        let m = rng.random_range(-TORUS_BAND..=TORUS_BAND);
        let n = rng.random_range(-TORUS_BAND..=TORUS_BAND);
        p.add_term(m, n, normal(rng));
    }
    p
}

/// A function of exact degree `degree` with random data in every mode
/// `|k| <= degree`.
pub fn random_function(sys: &MagneticSystem, seed: u64, degree: u32) -> Result<PhaseFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = degree as i32;
    match sys.surface() {
        Surface::Torus(_) => {
            let modes: BTreeMap<i32, TrigPoly2> = (-d..=d).map(|k| (k, random_poly(&mut rng, 4))).collect();
            Ok(PhaseFunction::torus(modes))
        }
        Surface::Bolza(b) => {
            let mut atoms = Vec::new();
            for k in -d..=d {
                let r = 0.6 * rng.random::<f64>().sqrt();
                let phi = std::f64::consts::TAU * rng.random::<f64>();
                let radius = rng.random_range(0.9..1.4);
                atoms.push(BumpAtom::new(C64::from_polar(r, phi), radius, k, normal(&mut rng)));
            }
            PhaseFunction::atoms(b, atoms)
        }
    }
}

/// Randomized battery: `count` functions with degrees cycling through
/// `0..=max_degree`, seeds derived from `seed`.
pub fn random_battery(sys: &MagneticSystem, seed: u64, count: usize, max_degree: u32) -> Result<Vec<PhaseFunction>> {
    (0..count)
        .map(|i| random_function(sys, seed.wrapping_mul(1_000_003).wrapping_add(i as u64), (i as u32) % (max_degree + 1)))
        .collect()
}

/// Flat torus with a degree-two trigonometric intensity.
pub fn flat_torus_trig_kappa() -> MagneticSystem {
    let poly = TrigPoly2::constant(0.3)
        .plus(&TrigPoly2::cos(0.2, 1, 0))
        .plus(&TrigPoly2::sin(0.15, 1, 1))
        .plus(&TrigPoly2::cos(0.1, 2, -1));
    MagneticSystem::new(Surface::flat_torus(), ScalarField::Trig { poly }).expect("real intensity")
}

/// Conformally flat torus with nonconstant metric and intensity.
pub fn wavy_torus() -> MagneticSystem {
    let lambda = TrigPoly2::cos(0.15, 1, 0).plus(&TrigPoly2::sin(0.1, 1, 1));
    let metric = ConformalTorusMetric::new(lambda).expect("real conformal factor");
    let poly = TrigPoly2::constant(0.7).plus(&TrigPoly2::cos(0.2, 0, 1)).plus(&TrigPoly2::sin(0.1, 2, -1));
    MagneticSystem::new(Surface::Torus(metric), ScalarField::Trig { poly }).expect("real intensity")
}

/// Bolza surface with a localized bump added to a constant intensity.
pub fn bumpy_bolza() -> MagneticSystem {
    let atoms = vec![BumpAtom::new(C64::new(0.1, -0.2), 1.5, 0, C64::new(0.1, 0.0))];
    MagneticSystem::new(Surface::bolza(), ScalarField::Bumps { offset: 0.4, atoms }).expect("valid bump")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let sys = MagneticSystem::bolza(0.6);
        let a = random_function(&sys, 7, 2).unwrap().to_json(sys.backend()).unwrap();
        let b = random_function(&sys, 7, 2).unwrap().to_json(sys.backend()).unwrap();
        let c = random_function(&sys, 8, 2).unwrap().to_json(sys.backend()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn degrees_cycle() {
        let sys = flat_torus_trig_kappa();
        let fs = random_battery(&sys, 1, 5, 4).unwrap();
        let degs: Vec<u32> = fs.iter().map(|f| f.structural_degree()).collect();
        assert_eq!(degs, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn reference_systems_build() {
        let b = bumpy_bolza().negativity_bounds(8).unwrap().bounds().unwrap();
        assert!(b.a > 0.05 && b.b < 1.0, "{b:?}");
        let w = wavy_torus();
        assert_eq!(w.backend(), crate::geometry::BackendKind::Torus);
    }
}
