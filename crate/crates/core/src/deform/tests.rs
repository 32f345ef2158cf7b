use super::*;
use crate::battery::wavy_torus;
use crate::geometry::{MagneticSystem, PhasePoint, ScalarField, TrigPoly2};
use crate::orbit::{find_periodic_orbit, ClassLabel};
use crate::phase::{PhaseFunction, Quadrature};

const SYSTOLE: f64 = 3.057_141_839_597_6;

fn wavy_geodesic() -> MagneticSystem {
    wavy_torus().with_kappa(ScalarField::constant(0.0)).unwrap()
}

#[test]
fn conformal_beta_is_twice_phi() {
    let phi = TrigPoly2::cos(0.2, 1, 0).plus(&TrigPoly2::constant(0.1));
    let fam = DeformationFamily::new(wavy_torus(), FamilyKind::Conformal { phi: phi.clone() }, 0.5).unwrap();
    let quad = Quadrature::new(fam.base(), 16);
    let b = beta(&fam, &quad).unwrap();
    assert_eq!(b.spectrum.support(), vec![0]);
    let p = PhasePoint::new(0.3, 1.2, 0.4);
    let v = crate::phase::evaluate(fam.base(), &b.function, p).unwrap().re;
    assert!((v - 2.0 * phi.eval(0.3, 1.2).re).abs() < 1e-14);
    let pts: Vec<PhasePoint> = (0..10).map(|k| PhasePoint::new(0.6 * k as f64, 0.37 * k as f64, 0.0)).collect();
    assert!(beta_difference_check(&fam, &b, &pts).unwrap() < 1e-6);
}

#[test]
fn trivial_betas() {
    let fam = DeformationFamily::new(MagneticSystem::bolza(0.6), FamilyKind::Constant, 0.1).unwrap();
    let quad = Quadrature::new(fam.base(), 4);
    assert!(beta(&fam, &quad).unwrap().function.is_structurally_zero());
    let fam = DeformationFamily::new(MagneticSystem::flat_torus(0.0), FamilyKind::TorusTranslation { vx: 1.0, vy: 0.5 }, 1.0)
        .unwrap();
    let quad = Quadrature::new(fam.base(), 8);
    assert!(beta(&fam, &quad).unwrap().function.is_structurally_zero());
    assert!(DeformationFamily::new(MagneticSystem::bolza(0.0), FamilyKind::TorusTranslation { vx: 1.0, vy: 0.0 }, 1.0)
        .is_err());
}

#[test]
fn translation_beta_matches_differences() {
    let fam = DeformationFamily::new(wavy_geodesic(), FamilyKind::TorusTranslation { vx: 0.3, vy: -0.7 }, 1.0).unwrap();
    let quad = Quadrature::new(fam.base(), 16);
    let b = beta(&fam, &quad).unwrap();
    assert!(b.leakage == 0.0);
    let pts: Vec<PhasePoint> = (0..10).map(|k| PhasePoint::new(0.6 * k as f64, 0.37 * k as f64, 1.0)).collect();
    assert!(beta_difference_check(&fam, &b, &pts).unwrap() < 1e-6);
}

#[test]
fn constant_family_lengths_are_constant() {
    let fam = DeformationFamily::new(MagneticSystem::bolza(0.6), FamilyKind::Constant, 0.1).unwrap();
    let l = length_function(&fam, &ClassLabel::generator(0).unwrap(), &[-0.05, 0.0, 0.05]).unwrap();
    assert!(l.max_relative_variation() < 1e-12);
}

#[test]
fn intensity_family_follows_hypercycle_law() {
    let fam = DeformationFamily::new(
        MagneticSystem::bolza(0.0),
        FamilyKind::KappaLinear { direction: ScalarField::constant(0.6) },
        1.2,
    )
    .unwrap();
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0, -0.5];
    let l = length_function(&fam, &ClassLabel::generator(3).unwrap(), &grid).unwrap();
    for (s, len) in grid.iter().zip(&l.lengths) {
        let want = SYSTOLE / (1.0 - 0.36 * s * s).sqrt();
        assert!((len / want - 1.0).abs() < 1e-8, "s {s}: {len} vs {want}");
    }
}

#[test]
fn conformal_torus_lengths_match_direct_search() {
    let phi = TrigPoly2::cos(0.3, 0, 1);
    let fam = DeformationFamily::new(wavy_geodesic(), FamilyKind::Conformal { phi }, 0.5).unwrap();
    let class = ClassLabel::torus(1, 0).unwrap();
    let grid = [0.0, 0.05, 0.1];
    let l = length_function(&fam, &class, &grid).unwrap();
    for (s, len) in grid.iter().zip(&l.lengths) {
        let direct = find_periodic_orbit(&fam.at(*s).unwrap(), &class).unwrap();
        assert!((direct.period - len).abs() < 1e-8, "s {s}: {len} vs {}", direct.period);
    }
    assert!(l.max_relative_variation() > 1e-4);
}

#[test]
fn translation_family_is_isospectral_and_beta_integrates_to_zero() {
    let fam = DeformationFamily::new(wavy_geodesic(), FamilyKind::TorusTranslation { vx: 0.4, vy: 0.9 }, 1.0).unwrap();
    let quad = Quadrature::new(fam.base(), 16);
    let b = beta(&fam, &quad).unwrap();
    for class in [ClassLabel::torus(1, 0).unwrap(), ClassLabel::torus(1, 1).unwrap()] {
        let l = length_function(&fam, &class, &[-0.2, 0.0, 0.2, 0.4]).unwrap();
        assert!(l.max_relative_variation() < 1e-8, "{:?}", l.lengths);
        let o = find_periodic_orbit(fam.base(), &class).unwrap();
        let r = livsic_integral_check(&fam, &b, &o, Some(&l)).unwrap();
        assert!(r.asserted && r.pass, "{r:?}");
    }
}

#[test]
fn conformal_family_has_nonzero_integral_and_moving_lengths() {
    let phi = TrigPoly2::constant(0.2).plus(&TrigPoly2::cos(0.1, 1, 0));
    let fam = DeformationFamily::new(wavy_geodesic(), FamilyKind::Conformal { phi }, 0.5).unwrap();
    let quad = Quadrature::new(fam.base(), 16);
    let b = beta(&fam, &quad).unwrap();
    let class = ClassLabel::torus(0, 1).unwrap();
    let l = length_function(&fam, &class, &[0.0, 0.1]).unwrap();
    let o = find_periodic_orbit(fam.base(), &class).unwrap();
    let r = livsic_integral_check(&fam, &b, &o, Some(&l)).unwrap();
    assert!(!r.asserted && r.pass);
    assert!(r.integral.abs() > 0.1 * o.period);
    assert!(l.max_relative_variation() > 1e-3);
}

#[test]
fn magnetic_translation_family() {
    let sys = wavy_torus().with_kappa(ScalarField::Trig { poly: TrigPoly2::cos(0.1, 0, 1) }).unwrap();
    let fam = DeformationFamily::new(sys, FamilyKind::TorusTranslation { vx: 0.4, vy: 0.9 }, 1.0).unwrap();
    let quad = Quadrature::new(fam.base(), 16);
    let b = beta(&fam, &quad).unwrap();
    let class = ClassLabel::torus(1, 0).unwrap();
    let l = length_function(&fam, &class, &[-0.2, 0.0, 0.2]).unwrap();
    let o = find_periodic_orbit(fam.base(), &class).unwrap();
    let r = livsic_integral_check(&fam, &b, &o, Some(&l)).unwrap();
    assert!(r.asserted && r.pass, "{r:?}");
}

fn hypercycle_field(h: f64) -> VariationalField {
    let fam = DeformationFamily::new(
        MagneticSystem::bolza(0.6),
        FamilyKind::KappaLinear { direction: ScalarField::constant(1.0) },
        0.2,
    )
    .unwrap();
    let o = find_periodic_orbit(fam.base(), &ClassLabel::generator(0).unwrap()).unwrap();
    variational_field(&fam, &o, h).unwrap()
}

#[test]
fn constant_perturbation_field() {
    let f = hypercycle_field(1e-3);
    let want = -1.0 / 0.64;
    let worst_y = f.y.iter().map(|y| (y - want).abs()).fold(0.0, f64::max);
    assert!(worst_y < 1e-5, "{worst_y}");
    assert!(f.x.iter().all(|x| x.abs() < 1e-5));
    assert!((f.length_rate - 0.6 / 0.64).abs() < 1e-5);
    let r = jacobi_residual(&f, JACOBI_TOL);
    assert!(r.pass, "{r:?}");
    let r2 = jacobi_residual(&hypercycle_field(2e-3), JACOBI_TOL);
    let order = r2.normal_residual / r.normal_residual;
    assert!(order > 3.0 && order < 5.0, "{order}");
}

#[test]
fn zero_field_has_zero_residual() {
    let sys = MagneticSystem::bolza(0.0);
    let o = find_periodic_orbit(&sys, &ClassLabel::generator(0).unwrap()).unwrap();
    let f = VariationalField::zero(&sys, &o).unwrap();
    let r = jacobi_residual(&f, 1e-12);
    assert!(r.pass && r.normal_residual == 0.0);
    let fam = DeformationFamily::new(sys.clone(), FamilyKind::Constant, 0.1).unwrap();
    let f = variational_field(&fam, &o, 1e-3).unwrap();
    assert!(f.y.iter().chain(&f.x).all(|v| v.abs() < 1e-7));
}

#[test]
fn first_order_system_constant_solution() {
    let sys = MagneticSystem::bolza(0.6);
    let quad = Quadrature::new(&sys, 4);
    let c = 0.3;
    let y = PhaseFunction::real_constant(-c / 0.64);
    let r = first_order_system_residual(&sys, &quad, &y, &PhaseFunction::zero(), &PhaseFunction::real_constant(c)).unwrap();
    assert!(r.iter().all(|r| r.pass && r.left < 1e-16), "{r:?}");
    let z = PhaseFunction::zero();
    assert!(first_order_system_residual(&sys, &quad, &z, &z, &z).unwrap().iter().all(|r| r.pass));
    let bad = first_order_system_residual(&sys, &quad, &y, &z, &z).unwrap();
    assert!(!bad[1].pass);
}

#[test]
fn systole_is_nondegenerate() {
    let sys = MagneticSystem::bolza(0.0);
    let o = find_periodic_orbit(&sys, &ClassLabel::generator(0).unwrap()).unwrap();
    let n = periodic_nondegeneracy(&sys, &o).unwrap();
    assert!(n.pass);
    assert!((n.min_singular_value - (1.0 - (-SYSTOLE).exp())).abs() < 1e-5, "{}", n.min_singular_value);
}
