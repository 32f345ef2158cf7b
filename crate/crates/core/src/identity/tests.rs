use std::f64::consts::{E, PI};

use num_complex::Complex64;

use super::*;
use crate::battery::{flat_torus_trig_kappa, random_function, wavy_torus};
use crate::geometry::{BumpAtom, MagneticSystem, TrigPoly2};
use crate::phase::{PhaseFunction, Quadrature};

type C64 = Complex64;

fn bolza_atom(k: i32) -> (MagneticSystem, PhaseFunction) {
    let sys = MagneticSystem::bolza(0.6);
    let b = sys.surface().as_bolza().unwrap().clone();
    let u = PhaseFunction::atoms(&b, vec![BumpAtom::new(C64::new(0.1, -0.05), 1.2, k, C64::new(0.8, 0.3))]).unwrap();
    (sys, u)
}

#[test]
fn weight_spot_values() {
    let w = CarlemanWeights::<f64>::new(1.0, 64).unwrap();
    assert!((w.log_gamma_sq(1).exp() - 8.0 * E).abs() < 1e-12);
    assert!((w.log_gamma_sq(2).exp() - 128.0 * E * E).abs() < 1e-9);
    assert!((w.log_gamma_sq(-2) - w.log_gamma_sq(2)).abs() == 0.0);
    assert!((w.log_gamma_sq(3).exp() - 3072.0 * E.powi(3)).abs() < 1e-7);
    assert_eq!(w.log_gamma_sq(0), 0.0);
    assert!(16.0 * w.log_gamma_sq(1).exp() < w.log_gamma_sq(2).exp());
    assert!(w.log_gamma_sq(3) > (4.0f64).ln() + w.log_gamma_sq(1));
}

#[test]
fn weights_certified_without_overflow() {
    for sigma in [0.1, 1.0, 3.0] {
        let w = CarlemanWeights::<f64>::new(sigma, 64).unwrap();
        let c = w.certify();
        assert!(c.holds(), "sigma {sigma}: {c:?}");
        assert!((c.factorial_step - sigma).abs() < 1e-9);
        assert!(w.log_gamma_sq(64).is_finite());
    }
    let w32 = CarlemanWeights::<f32>::new(1.0, 64).unwrap();
    assert!(w32.certify().holds());
}

#[test]
fn zero_sigma_rejected() {
    assert!(CarlemanWeights::<f64>::new(0.0, 64).is_err());
    assert!(CarlemanWeights::<f64>::new(-1.0, 64).is_err());
}

#[test]
fn pestov_constant_is_trivial() {
    let sys = MagneticSystem::bolza(0.6);
    let q = Quadrature::new(&sys, 2);
    let r = pestov_residual(&sys, &q, &PhaseFunction::real_constant(1.0)).unwrap();
    assert_eq!((r.left, r.right), (0.0, 0.0));
    assert!(r.pass);
    let r = pestov_corollary_residual(&sys, &q, &PhaseFunction::real_constant(1.0)).unwrap();
    assert!(r.pass);
}

#[test]
fn pestov_flat_closed_form() {
    let sys = MagneticSystem::flat_torus(0.0);
    let q = Quadrature::new(&sys, 16);
    let u = PhaseFunction::torus_mode(1, TrigPoly2::cos(1.0, 1, 0));
    let r = pestov_residual(&sys, &q, &u).unwrap();
    assert!((r.right - 4.0 * PI.powi(3)).abs() < 1e-10);
    assert!(r.rel_residual < 1e-12 && r.pass);
}

#[test]
fn pestov_random_torus() {
    for sys in [flat_torus_trig_kappa(), wavy_torus()] {
        let q = Quadrature::new(&sys, 32);
        for seed in 0..4 {
            let u = random_function(&sys, seed, 1 + seed as u32 % 4).unwrap();
            let r = pestov_residual(&sys, &q, &u).unwrap();
            assert!(r.rel_residual < 1e-9, "seed {seed}: {r:?}");
            let c = pestov_corollary_residual(&sys, &q, &u).unwrap();
            assert!(c.rel_residual < 1e-9, "seed {seed}: {c:?}");
        }
    }
}

#[test]
fn pestov_bolza() {
    let sys = MagneticSystem::bolza(0.6);
    let q = Quadrature::new(&sys, 5);
    let u = random_function(&sys, 3, 2).unwrap();
    let r = pestov_residual(&sys, &q, &u).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn corollary_on_mode_zero() {
    let sys = flat_torus_trig_kappa();
    let q = Quadrature::new(&sys, 24);
    let u = PhaseFunction::torus_mode(0, TrigPoly2::cos(1.0, 1, 2).plus(&TrigPoly2::sin(0.5, 0, 1)));
    let c = pestov_corollary_residual(&sys, &q, &u).unwrap();
    assert!(c.rel_residual < 1e-8, "{c:?}");
}

#[test]
fn corollary_is_rearranged_pestov() {
    // left_c − right_c = (left_p − right_p) up to the sign convention, so the
    // two defects agree to roundoff.
    let sys = wavy_torus();
    let q = Quadrature::new(&sys, 24);
    let u = random_function(&sys, 11, 2).unwrap();
    let p = pestov_residual(&sys, &q, &u).unwrap();
    let c = pestov_corollary_residual(&sys, &q, &u).unwrap();
    let scale = p.scale.max(c.scale);
    assert!(((p.left - p.right).abs() - (c.left - c.right).abs()).abs() <= 1e-9 * scale);
}

#[test]
fn mode_identity_flat_and_bolza() {
    let sys = MagneticSystem::flat_torus(0.0);
    let q = Quadrature::new(&sys, 16);
    let u = PhaseFunction::torus_mode(1, TrigPoly2::cos(1.0, 1, 0));
    for r in mode_identity_residual(&sys, &q, &u).unwrap() {
        assert!(r.rel_residual < 1e-10, "{r:?}");
    }
    let (sys, u) = bolza_atom(2);
    let q = Quadrature::new(&sys, 5);
    for r in mode_identity_residual(&sys, &q, &u).unwrap() {
        assert!(r.rel_residual < 1e-5, "{r:?}");
    }
    assert!(mode_identity_residual(&sys, &q, &PhaseFunction::real_constant(1.0)).is_err());
}

#[test]
fn gk_on_bolza() {
    let sys = MagneticSystem::bolza(0.6);
    let q = Quadrature::new(&sys, 5);
    let neg = sys.negativity_bounds(2).unwrap();
    let u = random_function(&sys, 5, 3).unwrap();
    for k in [1, 2, -1, -2] {
        let r = gk_inequalities(&sys, &q, &neg, &u, k).unwrap();
        assert!(r.pass(), "k = {k}: {r:?}");
    }
    assert!(gk_inequalities(&sys, &q, &neg, &u, 0).is_err());
    let refused = MagneticSystem::flat_torus(1.0).negativity_bounds(4).unwrap();
    let t = MagneticSystem::flat_torus(1.0);
    let qt = Quadrature::new(&t, 8);
    assert!(gk_inequalities(&t, &qt, &refused, &PhaseFunction::real_constant(1.0), 1).is_err());
}

#[test]
fn gk_zero_mode_degenerates() {
    let data = ModeData::default();
    let r = data.gk(1, 0.32, 0.32, &Tolerance::new("t", 1e-9));
    assert!(r.pass());
    assert_eq!((r.lower.left, r.lower.right), (0.0, 0.0));
}

#[test]
fn gk2_from_triangle_bound() {
    // η⁺u_k = (Fu)_{k+1} − η⁻u_{k+2} − i(k+1)κu_{k+1}, bounded term by term.
    let sys = MagneticSystem::bolza(0.6);
    let q = Quadrature::new(&sys, 4);
    let u = random_function(&sys, 9, 3).unwrap();
    let k = 1;
    let i = C64::new(0.0, 1.0);
    let fu1 = u.f().project(k + 1);
    let em2 = u.project(k + 2).eta_minus();
    let ku1 = PhaseFunction::kappa().mul(&u.project(k + 1)).scale(i * (k + 1) as f64);
    let ep = u.project(k).eta_plus();
    let rebuilt = PhaseFunction::linear(vec![(C64::new(1.0, 0.0), fu1.clone()), (C64::new(-1.0, 0.0), em2.clone()), (-C64::new(1.0, 0.0), ku1.clone())]);
    let s = q.sample(&sys, &[&ep, &rebuilt, &fu1, &em2, &ku1]).unwrap();
    let diff = (q.norm_sq(&s[0]) - q.norm_sq(&s[1])).abs();
    assert!(diff < 1e-10 * q.norm_sq(&s[0]));
    let bound = 2.0 * q.norm_sq(&s[2]) + 4.0 * q.norm_sq(&s[3]) + 4.0 * q.norm_sq(&s[4]);
    assert!(q.norm_sq(&s[0]) <= bound);
}

#[test]
fn carleman_bolza_random() {
    let sys = MagneticSystem::bolza(0.6);
    let q = Quadrature::new(&sys, 4);
    let neg = sys.negativity_bounds(2).unwrap();
    let u = random_function(&sys, 21, 3).unwrap();
    let r = carleman_estimate(&sys, &q, &neg, &u, 1.0, 1).unwrap();
    assert!(r.pass && r.ratio() <= 1.0, "{r:?}");
    let c = carleman_estimate(&sys, &q, &neg, &PhaseFunction::real_constant(2.0), 1.0, 1).unwrap();
    assert!(c.pass && c.ratio() == 0.0);
    assert!(carleman_estimate(&sys, &q, &neg, &u, 1.0, 0).is_err());
    assert!(carleman_estimate(&sys, &q, &neg, &u, 0.0, 1).is_err());
}

#[test]
fn carleman_below_degree_is_empty() {
    let sys = MagneticSystem::bolza(0.6);
    let q = Quadrature::new(&sys, 3);
    let neg = sys.negativity_bounds(2).unwrap();
    let u = random_function(&sys, 2, 1).unwrap();
    let r = carleman_estimate(&sys, &q, &neg, &u, 1.0, 3).unwrap();
    assert_eq!(r.positive.report.left, f64::NEG_INFINITY);
    assert!(r.pass);
}

#[test]
fn engine_trivial_and_cross_check() {
    let w = CarlemanWeights::<f64>::new(1.0, 64).unwrap();
    let tol = Tolerance::new("t", 1e-6);
    let e = weighted_summation_engine(&ModeData::default(), &w, 0.32, 1, &tol).unwrap();
    assert!(e.certified);

    let sys = MagneticSystem::bolza(0.6);
    let q = Quadrature::new(&sys, 4);
    let neg = sys.negativity_bounds(2).unwrap();
    let u = random_function(&sys, 31, 3).unwrap();
    let direct = carleman_estimate(&sys, &q, &neg, &u, 1.0, 1).unwrap();
    let data = ModeData::harvest(&sys, &q, &u).unwrap();
    let e = weighted_summation_engine(&data, &w, 0.32, 1, &tol).unwrap();
    assert!(e.hypotheses_hold && e.coefficients_nonnegative);
    assert_eq!(e.certified, direct.pass);
    assert_eq!(e.positive.estimate, direct.positive.report);
}

#[test]
fn engine_reports_hypothesis_failure() {
    let w = CarlemanWeights::<f64>::new(1.0, 64).unwrap();
    let mut data = ModeData::default();
    data.records.insert(1, ModeRecord { k: 1, u_sq: 1.0, eta_plus_sq: 0.0, eta_minus_sq: 0.0, kappa_u_sq: 0.0, fu_sq: 0.0 });
    let e = weighted_summation_engine(&data, &w, 0.32, 1, &Tolerance::new("t", 1e-9)).unwrap();
    assert!(!e.hypotheses_hold);
    assert_eq!(e.positive.hypothesis_failures, vec![1]);
    assert!(!e.certified);
}

#[test]
fn bracket_coefficient_at_two() {
    let w = CarlemanWeights::<f64>::new(1.0, 8).unwrap();
    let g = |k: i32| w.log_gamma_sq(k).exp();
    let c = 2.0 * g(2) / 2.0 - 4.0 * 4.0 * g(1);
    assert!((c - (128.0 * E * E - 128.0 * E)).abs() < 1e-9);
    assert!((c - 597.86).abs() < 0.01);
    assert!((g(2) - 945.799).abs() < 1e-3);
}

#[test]
fn degree_reduction() {
    let sys = MagneticSystem::bolza(0.6);
    let q = Quadrature::new(&sys, 4);
    let neg = sys.negativity_bounds(2).unwrap();
    let c = degree_reduction_check(&sys, &q, &neg, &PhaseFunction::real_constant(1.0), 1.0).unwrap();
    assert_eq!((c.v_degree, c.tail_mass), (0, 0.0));
    assert!(c.pass);
    let u = random_function(&sys, 4, 1).unwrap();
    let c = degree_reduction_check(&sys, &q, &neg, &u, 1.0).unwrap();
    assert_eq!(c.v_degree, 2);
    assert!(c.pass && c.tail_mass <= c.tail_bound, "{c:?}");
    let u0 = random_function(&sys, 4, 0).unwrap();
    assert!(u0.f().structural_degree() <= 1);
}

#[test]
fn chain_contracts() {
    let sys = MagneticSystem::bolza(0.6);
    let q = Quadrature::new(&sys, 4);
    let neg = sys.negativity_bounds(2).unwrap();
    let y = random_function(&sys, 40, 3).unwrap();
    let r = contraction_chain(&sys, &q, &neg, &y, 1, None).unwrap();
    assert!((r.sigma - 4f64.ln()).abs() < 1e-12);
    assert!(r.constant <= 1.0 + 1e-12);
    assert!(r.pass && r.ratio() <= 1.0, "{r:?}");
    assert!(contraction_chain(&sys, &q, &neg, &y, 1, Some(0.5)).is_err());
}

#[test]
fn riccati_norm_constant_solution() {
    let (sys, _) = bolza_atom(0);
    let q = Quadrature::new(&sys, 5);
    let u = random_function(&sys, 8, 2).unwrap();
    for r0 in [0.8, -0.8] {
        let r = PhaseFunction::real_constant(r0);
        let reps = riccati_norm_identity(&sys, &q, &u, &r).unwrap();
        assert!(reps.iter().all(|x| x.pass), "{reps:?}");
    }
    let bad = PhaseFunction::real_constant(0.5);
    assert!(riccati_norm_identity(&sys, &q, &u, &bad).is_err());
    let zero = riccati_norm_identity(&sys, &q, &PhaseFunction::zero(), &PhaseFunction::real_constant(0.8)).unwrap();
    assert_eq!((zero[0].left, zero[0].right), (0.0, 0.0));
}

mod riccati_along_orbits {
    use crate::battery::bumpy_bolza;
    use crate::geometry::{MagneticSystem, ScalarField};
    use crate::identity::{branch_separation, riccati_solve, Branch};
    use crate::orbit::{find_periodic_orbit, ClassLabel};

    #[test]
    fn constant_intensity_gives_constant_solutions() {
        for (kappa, c) in [(0.6, 0.8), (0.0, 1.0)] {
            let sys = MagneticSystem::bolza(kappa);
            let o = find_periodic_orbit(&sys, &ClassLabel::generator(1).unwrap()).unwrap();
            let p = riccati_solve(&sys, &o, Branch::Plus).unwrap();
            let m = riccati_solve(&sys, &o, Branch::Minus).unwrap();
            assert!(p.values.iter().all(|r| (r - c).abs() < 1e-8), "{:?}", p.values);
            assert!(m.values.iter().all(|r| (r + c).abs() < 1e-8));
            assert!(p.equation_residual < 1e-8);
            assert!((branch_separation(&p, &m).unwrap() - 2.0 * c).abs() < 1e-8);
        }
    }

    #[test]
    fn variable_intensity_branches_separate() {
        let sys = bumpy_bolza();
        let o = find_periodic_orbit(&sys, &ClassLabel::bolza(&[0, 2]).unwrap()).unwrap();
        let p = riccati_solve(&sys, &o, Branch::Plus).unwrap();
        let m = riccati_solve(&sys, &o, Branch::Minus).unwrap();
        assert!(p.periodicity_defect < 1e-10 && m.periodicity_defect < 1e-10);
        assert!(p.equation_residual < 1e-6, "{}", p.equation_residual);
        assert!(p.max() - p.min() > 1e-3);
        assert!(branch_separation(&p, &m).unwrap() > 0.5);
    }

    #[test]
    fn refuses_nonnegative_curvature() {
        let sys = MagneticSystem::flat_torus(0.0).with_kappa(ScalarField::constant(0.5)).unwrap();
        let o = find_periodic_orbit(&MagneticSystem::flat_torus(0.0), &ClassLabel::torus(1, 0).unwrap()).unwrap();
        assert!(riccati_solve(&sys, &o, Branch::Plus).is_err());
    }
}

#[test]
fn structural_reports_on_battery() {
    for sys in [crate::battery::flat_torus_trig_kappa(), crate::battery::bumpy_bolza()] {
        let quad = Quadrature::new(&sys, if sys.backend() == BackendKind::Torus { 16 } else { 3 });
        for u in crate::battery::random_battery(&sys, 5, 4, 3).unwrap() {
            for r in structural_residuals(&sys, &quad, &u).unwrap() {
                assert!(r.pass && r.rel_residual < 1e-12, "{r:?}");
            }
        }
    }
}
