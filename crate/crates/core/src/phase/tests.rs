use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;

use super::*;
use crate::geometry::{BasePoint, ConformalTorusMetric, MagneticSystem, PhasePoint, ScalarField, Surface};

fn wavy_torus() -> MagneticSystem {
    let lambda = TrigPoly2::cos(0.15, 1, 0).plus(&TrigPoly2::sin(0.1, 1, 1));
    let kappa = TrigPoly2::constant(0.7).plus(&TrigPoly2::cos(0.2, 0, 1)).plus(&TrigPoly2::sin(0.1, 2, -1));
    MagneticSystem::new(Surface::Torus(ConformalTorusMetric::new(lambda).unwrap()), ScalarField::Trig { poly: kappa }).unwrap()
}

fn bumpy_bolza() -> MagneticSystem {
    let bump = BumpAtom::new(C64::new(0.1, -0.2), 1.1, 0, C64::new(0.3, 0.0));
    MagneticSystem::new(Surface::bolza(), ScalarField::Bumps { offset: 0.5, atoms: vec![bump] }).unwrap()
}

fn torus_test_function() -> PhaseFunction {
    let mut m = BTreeMap::new();
    m.insert(0, TrigPoly2::cos(1.0, 1, 2));
    m.insert(1, TrigPoly2::sin(0.5, 0, 1).plus(&TrigPoly2::constant(0.3)));
    m.insert(-1, TrigPoly2::sin(0.5, 0, 1).plus(&TrigPoly2::constant(0.3)));
    m.insert(2, TrigPoly2::cos(0.4, 2, 1));
    m.insert(-2, TrigPoly2::cos(0.4, 2, 1));
    PhaseFunction::torus(m)
}

fn bolza_test_function(sys: &MagneticSystem) -> PhaseFunction {
    let b = sys.surface().as_bolza().unwrap();
    let a1 = BumpAtom::new(C64::new(0.2, 0.15), 1.3, 1, C64::new(0.4, 0.2));
    let a2 = BumpAtom::new(C64::new(-0.3, 0.1), 1.0, 2, C64::new(-0.2, 0.5));
    let a0 = BumpAtom::new(C64::new(0.0, -0.4), 1.4, 0, C64::new(1.0, 0.0));
    PhaseFunction::atoms(b, vec![a1.clone(), a1.conjugate(), a2.clone(), a2.conjugate(), a0]).unwrap()
}

fn sample_points(sys: &MagneticSystem) -> Vec<PhasePoint> {
    match sys.backend() {
        BackendKind::Torus => vec![
            PhasePoint::new(0.3, 1.7, 0.2),
            PhasePoint::new(4.1, 2.2, 2.9),
            PhasePoint::new(5.9, 0.4, 5.0),
        ],
        BackendKind::Bolza => vec![
            PhasePoint::new(0.1, 0.2, 0.7),
            PhasePoint::new(-0.35, 0.05, 3.3),
            PhasePoint::new(0.5, -0.4, 4.4),
        ],
    }
}

fn assert_vanishes(sys: &MagneticSystem, r: &PhaseFunction, scale: f64, tol: f64) {
    for p in sample_points(sys) {
        let v = evaluate(sys, r, p).unwrap();
        assert!(v.norm() <= tol * scale, "residual {v} at {p:?}");
    }
}

#[test]
fn v_multiplies_modes() {
    let sys = MagneticSystem::flat_torus(0.0);
    let u = torus_test_function();
    let p = BasePoint::new(0.4, 1.1);
    let a = mode_values(&sys, &u, p).unwrap();
    let b = mode_values(&sys, &u.v(), p).unwrap();
    for (k, v) in &a {
        let expect = v * C64::new(0.0, *k as f64);
        assert_eq!(b.get(k).copied().unwrap_or_default(), expect);
    }
    assert!(PhaseFunction::real_constant(2.0).v().is_structurally_zero());
}

#[test]
fn x_on_flat_torus_example() {
    let sys = MagneticSystem::flat_torus(0.0);
    let u = PhaseFunction::torus_mode(1, TrigPoly2::cos(1.0, 1, 0));
    let xu = apply_x(&sys, &u).unwrap();
    for p in sample_points(&sys) {
        let got = evaluate(&sys, &xu, p).unwrap();
        let expect = C64::from_polar(1.0, p.theta) * p.theta.cos() * (-p.x.sin());
        assert!((got - expect).norm() < 1e-14);
    }
}

#[test]
fn xperp_on_flat_torus_example() {
    let sys = MagneticSystem::flat_torus(0.0);
    let u = PhaseFunction::torus_mode(0, TrigPoly2::cos(1.0, 1, 0));
    let w = apply_xperp(&sys, &u).unwrap();
    for p in sample_points(&sys) {
        let got = evaluate(&sys, &w, p).unwrap();
        assert!((got - C64::new(p.x.sin() * p.theta.sin(), 0.0)).norm() < 1e-14);
    }
}

#[test]
fn f_with_unit_field() {
    let sys = MagneticSystem::flat_torus(1.0);
    let u = PhaseFunction::fiber_exp(1);
    let fu = apply_f(&sys, &u).unwrap();
    let p = PhasePoint::new(1.0, 2.0, PI / 2.0);
    assert!((evaluate(&sys, &u, p).unwrap() - C64::new(0.0, 1.0)).norm() < 1e-15);
    assert!((evaluate(&sys, &fu, p).unwrap() - C64::new(-1.0, 0.0)).norm() < 1e-15);
    let c = apply_f(&sys, &PhaseFunction::real_constant(3.0)).unwrap();
    assert_vanishes(&sys, &c, 1.0, 1e-15);
}

#[test]
fn eta_shifts_single_mode() {
    let u = PhaseFunction::torus_mode(2, TrigPoly2::cos(1.0, 1, 1));
    assert_eq!(u.eta_plus().structural_modes().iter().copied().collect::<Vec<_>>(), vec![3]);
    assert_eq!(u.eta_minus().structural_modes().iter().copied().collect::<Vec<_>>(), vec![1]);
    let sys = wavy_torus();
    let r = u.eta_plus().add(&u.eta_minus()).sub(&u.x());
    assert_vanishes(&sys, &r, 1.0, 1e-14);
    let r = u.eta_plus().sub(&u.eta_minus()).scale(C64::new(0.0, 1.0)).sub(&u.xperp());
    assert_vanishes(&sys, &r, 1.0, 1e-14);
    let one = PhaseFunction::real_constant(1.0);
    assert_vanishes(&sys, &one.eta_plus(), 1.0, 1e-15);
}

fn structural_residuals(sys: &MagneticSystem, u: &PhaseFunction, tol: f64) {
    // [V, F] = X⊥
    let r1 = commutator(FrameOp::V, FrameOp::F, u).sub(&u.xperp());
    // [V, X⊥] = -F + κV
    let r2 = commutator(FrameOp::V, FrameOp::Xperp, u).add(&u.f()).sub(&PhaseFunction::kappa().mul(&u.v()));
    // [F, X⊥] = -κF + 𝕂V
    let r3 = commutator(FrameOp::F, FrameOp::Xperp, u)
        .add(&PhaseFunction::kappa().mul(&u.f()))
        .sub(&PhaseFunction::magnetic_curvature().mul(&u.v()));
    let scale = sample_points(sys)
        .into_iter()
        .map(|p| evaluate(sys, &u.f().f(), p).unwrap().norm() + evaluate(sys, u, p).unwrap().norm())
        .fold(1.0, f64::max);
    for r in [r1, r2, r3] {
        assert_vanishes(sys, &r, scale, tol);
    }
}

#[test]
fn structural_equations_on_conformal_torus() {
    structural_residuals(&wavy_torus(), &torus_test_function(), 1e-12);
}

#[test]
fn structural_equations_on_bolza() {
    let sys = bumpy_bolza();
    structural_residuals(&sys, &bolza_test_function(&sys), 1e-11);
}

#[test]
fn magnetic_curvature_node_matches_geometry() {
    let sys = wavy_torus();
    let k = PhaseFunction::magnetic_curvature();
    for p in sample_points(&sys) {
        let a = evaluate(&sys, &k, p).unwrap();
        let b = sys.magnetic_curvature(p).unwrap();
        assert!((a.re - b).abs() < 1e-13 && a.im.abs() < 1e-14);
    }
    // K - X⊥κ + κ² built from the operators
    let kap = PhaseFunction::kappa();
    let built = PhaseFunction::gaussian_curvature().sub(&kap.xperp()).add(&kap.mul(&kap));
    assert_vanishes(&sys, &built.sub(&k), 1.0, 1e-13);
}

#[test]
fn liouville_measure_and_orthogonality() {
    let sys = MagneticSystem::flat_torus(0.0);
    let q = Quadrature::new(&sys, 16);
    let one = PhaseFunction::real_constant(1.0);
    let m = q.norm_sq_fn(&sys, &one).unwrap();
    assert!((m - TAU.powi(3)).abs() < 1e-9);
    let a = PhaseFunction::torus_mode(1, TrigPoly2::cos(1.0, 1, 0));
    let b = PhaseFunction::torus_mode(2, TrigPoly2::cos(1.0, 1, 0));
    assert_eq!(q.inner_fn(&sys, &a, &b).unwrap(), C64::new(0.0, 0.0));
}

#[test]
fn skew_adjoint_operators() {
    for sys in [wavy_torus(), bumpy_bolza()] {
        let (u, v, res, tol) = match sys.backend() {
            BackendKind::Torus => (torus_test_function(), torus_test_function().x(), 48, 1e-10),
            BackendKind::Bolza => (bolza_test_function(&sys), bolza_test_function(&sys).v(), 6, 1e-7),
        };
        let q = Quadrature::new(&sys, res);
        let scale = q.norm_sq_fn(&sys, &u).unwrap().max(q.norm_sq_fn(&sys, &v).unwrap());
        for op in [FrameOp::V, FrameOp::Xperp, FrameOp::F, FrameOp::X] {
            let s = q.sample(&sys, &[&u, &v, &u.apply(op), &v.apply(op)]).unwrap();
            let r = q.inner(&s[2], &s[1]) + q.inner(&s[0], &s[3]);
            assert!(r.norm() < tol * scale, "{op} on {}: {r}", sys.backend());
            let avg = q.integral(&s[2]);
            assert!(avg.norm() < tol * scale, "{op} average {avg}");
        }
    }
}

#[test]
fn bolza_functions_are_invariant() {
    let sys = bumpy_bolza();
    let u = bolza_test_function(&sys);
    let fu = u.f();
    let b = sys.surface().as_bolza().unwrap().clone();
    for z in b.boundary_samples(2) {
        for g in b.generators() {
            let w = g.apply(z);
            let shift = g.angle_shift(z);
            for f in [&u, &fu] {
                let p = PhasePoint::new(z.re, z.im, 0.9);
                let q = PhasePoint::new(w.re, w.im, 0.9 + shift);
                let (a, c) = (evaluate(&sys, f, p).unwrap(), evaluate(&sys, f, q).unwrap());
                assert!((a - c).norm() < 1e-10, "{a} vs {c}");
            }
        }
    }
}

#[test]
fn products_add_mode_indices() {
    let a = PhaseFunction::torus_mode(2, TrigPoly2::cos(1.0, 1, 0));
    let b = PhaseFunction::torus_mode(-3, TrigPoly2::sin(1.0, 0, 1));
    let p = a.mul(&b);
    assert_eq!(p.structural_modes().iter().copied().collect::<Vec<_>>(), vec![-1]);
    let sys = MagneticSystem::flat_torus(0.0);
    let m = mode_values(&sys, &p, BasePoint::new(0.3, 0.8)).unwrap();
    assert_eq!(m.keys().copied().collect::<Vec<_>>(), vec![-1]);
}

#[test]
fn mixed_backends_are_rejected() {
    let sys = bumpy_bolza();
    let t = PhaseFunction::fiber_exp(1);
    assert!(matches!(apply_x(&sys, &t), Err(Error::BackendMismatch { .. })));
    let mixed = t.add(&bolza_test_function(&sys));
    assert_eq!(mixed.backend(), BackendTag::Mixed);
    assert!(apply_f(&MagneticSystem::flat_torus(0.0), &mixed).is_err());
}

#[test]
fn json_roundtrip() {
    let sys = bumpy_bolza();
    let u = bolza_test_function(&sys);
    let s = u.to_json(BackendKind::Bolza).unwrap();
    let v = PhaseFunction::from_json(&sys, &s).unwrap();
    let p = PhasePoint::new(0.05, 0.1, 1.0);
    assert_eq!(evaluate(&sys, &u, p).unwrap(), evaluate(&sys, &v, p).unwrap());
    assert_eq!(u.real_flag(), Some(true));
    let t = torus_test_function();
    let s = t.to_json(BackendKind::Torus).unwrap();
    let flat = MagneticSystem::flat_torus(0.0);
    let t2 = PhaseFunction::from_json(&flat, &s).unwrap();
    let p = PhasePoint::new(0.5, 0.6, 0.7);
    assert_eq!(evaluate(&flat, &t, p).unwrap(), evaluate(&flat, &t2, p).unwrap());
    assert!(PhaseFunction::from_json(&sys, &s).is_err());
    assert!(t.f().to_json(BackendKind::Torus).is_err());
}

