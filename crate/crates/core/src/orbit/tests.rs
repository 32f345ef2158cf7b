use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::*;
use crate::battery::{bumpy_bolza, wavy_torus};
use crate::geometry::bolza::distance_from_origin;
use crate::geometry::{BumpAtom, MagneticSystem, PhasePoint, TrigPoly2};
use crate::phase::{evaluate, PhaseFunction};

type C64 = Complex64;

const SYSTOLE: f64 = 3.057_141_839_597_6;

#[test]
fn straight_line_on_flat_torus() {
    let sys = MagneticSystem::flat_torus(0.0);
    let p = integrate_flow(&sys, PhasePoint::new(0.0, 0.0, 0.0), 1.0).unwrap();
    assert!((p.x - 1.0).abs() < 1e-12 && p.y.abs() < 1e-12 && p.theta.abs() < 1e-12);
}

#[test]
fn unit_circle_for_unit_intensity() {
    let sys = MagneticSystem::flat_torus(1.0);
    let p0 = PhasePoint::new(0.3, 0.2, 0.4);
    let p = integrate_flow(&sys, p0, TAU).unwrap();
    assert!((p.x - p0.x).abs() < 1e-9 && (p.y - p0.y).abs() < 1e-9);
    assert!((p.theta - p0.theta - TAU).abs() < 1e-9);
}

#[test]
fn diameter_is_a_geodesic() {
    let sys = MagneticSystem::bolza(0.0);
    for t in [0.5, 2.0, 4.0] {
        let p = integrate_flow(&sys, PhasePoint::new(0.0, 0.0, 0.7), t).unwrap();
        assert!((distance_from_origin(p.base().z()) - t).abs() < 1e-9);
        assert!((p.base().z().arg() - 0.7).abs() < 1e-12);
    }
}

#[test]
fn unit_speed_along_trajectories() {
    for sys in [wavy_torus(), bumpy_bolza()] {
        let times: Vec<f64> = (0..20).map(|k| 0.2 * k as f64).collect();
        for p in trajectory(&sys, PhasePoint::new(0.1, 0.05, 1.0), &times).unwrap() {
            assert!((speed(&sys, p).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn flow_jacobian_matches_differences() {
    let sys = bumpy_bolza();
    let p = PhasePoint::new(0.1, -0.1, 0.3);
    let (_, j) = integrate_with_jacobian(&sys, p, 1.5).unwrap();
    let h = 1e-5;
    for c in 0..3 {
        let mut a = p;
        let mut b = p;
        match c {
            0 => {
                a.x += h;
                b.x -= h
            }
            1 => {
                a.y += h;
                b.y -= h
            }
            _ => {
                a.theta += h;
                b.theta -= h
            }
        }
        let fa = integrate_flow(&sys, a, 1.5).unwrap();
        let fb = integrate_flow(&sys, b, 1.5).unwrap();
        let fd = [(fa.x - fb.x) / (2.0 * h), (fa.y - fb.y) / (2.0 * h), (fa.theta - fb.theta) / (2.0 * h)];
        for r in 0..3 {
            assert!((fd[r] - j[r][c]).abs() < 1e-6, "({r},{c}): {} vs {}", fd[r], j[r][c]);
        }
    }
}

fn flow_derivative_defect(sys: &MagneticSystem, u: &PhaseFunction, p: PhasePoint) -> f64 {
    let h = 1e-3;
    let at = |t: f64| evaluate(sys, u, integrate_flow(sys, p, t).unwrap()).unwrap();
    let d = (at(-2.0 * h) - at(2.0 * h) + 8.0 * (at(h) - at(-h))) / (12.0 * h);
    (d - evaluate(sys, &u.f(), p).unwrap()).norm()
}

#[test]
fn flow_derivative_is_f() {
    let sys = wavy_torus();
    let u = PhaseFunction::torus(
        [(0, TrigPoly2::cos(1.0, 1, 1)), (1, TrigPoly2::sin(0.5, 0, 1)), (-2, TrigPoly2::cos(0.3, 2, 0))].into(),
    );
    assert!(flow_derivative_defect(&sys, &u, PhasePoint::new(0.4, 1.1, 2.0)) < 1e-7);
    let sys = bumpy_bolza();
    let b = sys.surface().as_bolza().unwrap().clone();
    let u = PhaseFunction::atoms(
        &b,
        vec![
            BumpAtom::new(C64::new(0.05, 0.1), 1.2, 0, C64::new(1.0, 0.0)),
            BumpAtom::new(C64::new(0.0, 0.0), 1.3, 1, C64::new(0.2, 0.5)),
        ],
    )
    .unwrap();
    assert!(flow_derivative_defect(&sys, &u, PhasePoint::new(0.1, 0.2, 0.5)) < 1e-7);
}

#[test]
fn bolza_systole() {
    let sys = MagneticSystem::bolza(0.0);
    let o = find_periodic_orbit(&sys, &ClassLabel::generator(0).unwrap()).unwrap();
    assert!((o.period - SYSTOLE).abs() < 1e-6, "{}", o.period);
    assert!(o.closure_defect <= 1e-9);
    let m = monodromy(&sys, &o).unwrap();
    assert!((m.det - 1.0).abs() < 1e-8);
    assert!((m.eigenvalues[0].re / SYSTOLE.exp() - 1.0).abs() < 1e-5);
    assert!(m.is_hyperbolic());
}

#[test]
fn hypercycle_length_and_monodromy() {
    let sys = MagneticSystem::bolza(0.6);
    let o = find_periodic_orbit(&sys, &ClassLabel::generator(2).unwrap()).unwrap();
    assert!((o.period - SYSTOLE / 0.8).abs() < 1e-6 * o.period, "{}", o.period);
    assert!(o.closure_defect <= 1e-9);
    let m = monodromy(&sys, &o).unwrap();
    assert!((m.eigenvalues[0].re / SYSTOLE.exp() - 1.0).abs() < 1e-5);
    assert!((m.eigenvalues[1].re / (-SYSTOLE).exp() - 1.0).abs() < 1e-5);
    assert!((m.det - 1.0).abs() < 1e-8);
}

#[test]
fn flat_torus_lengths() {
    let sys = MagneticSystem::flat_torus(0.0);
    for (m, n) in [(1, 0), (1, 1), (2, -1)] {
        let c = ClassLabel::torus(m, n).unwrap();
        let o = find_periodic_orbit(&sys, &c).unwrap();
        assert!((o.period - TAU * ((m * m + n * n) as f64).sqrt()).abs() < 1e-9);
    }
    assert!(find_periodic_orbit(&MagneticSystem::flat_torus(0.5), &ClassLabel::torus(1, 0).unwrap()).is_err());
}

#[test]
fn wavy_torus_orbit_closes() {
    let sys = wavy_torus().with_kappa(crate::geometry::ScalarField::constant(0.1)).unwrap();
    let o = find_periodic_orbit(&sys, &ClassLabel::torus(0, 1).unwrap()).unwrap();
    assert!(o.closure_defect < 1e-9);
    assert!(o.period > 5.0 && o.period < 8.0);
}

#[test]
fn spectrum_generators_equal() {
    let sys = MagneticSystem::bolza(0.0);
    let rows = marked_length_spectrum(&sys, &parse_class_list("g1..g8").unwrap());
    assert_eq!(rows.len(), 8);
    for r in &rows {
        assert!((r.period.unwrap() - SYSTOLE).abs() < 1e-6, "{r:?}");
    }
    assert!(marked_length_spectrum(&sys, &[]).is_empty());
    let bad = marked_length_spectrum(&MagneticSystem::flat_torus(0.5), &[ClassLabel::torus(1, 0).unwrap()]);
    assert!(bad[0].error.is_some());
}

#[test]
fn birkhoff_constant_and_coboundary() {
    let sys = bumpy_bolza();
    let one = PhaseFunction::real_constant(1.0);
    let p = PhasePoint::new(0.1, 0.0, 0.3);
    let r = birkhoff_average(&sys, &one, p, &[1.0, 5.0, 10.0]).unwrap();
    assert!(r.averages.iter().all(|a| (a - 1.0).abs() < 1e-10));
    let b = sys.surface().as_bolza().unwrap().clone();
    let w = PhaseFunction::atoms(&b, vec![BumpAtom::new(C64::new(0.0, 0.1), 1.4, 0, C64::new(1.0, 0.0))]).unwrap();
    let fw = w.f();
    let r = birkhoff_average(&sys, &fw, p, &[4.0, 16.0]).unwrap();
    for (t, a) in r.times.iter().zip(&r.averages) {
        // |w| <= 1 for a unit-weight bump, up to overlapping translates
        assert!(a.abs() <= 2.0 * 1.0 / t + 1e-9, "t {t}: {a}");
    }
    let _ = PI;
}


#[test]
fn hypercycle_law_grid() {
    let classes = parse_class_list("g1, g2, g1.g2, g1.g3, g1.g2.g3").unwrap();
    let base = MagneticSystem::bolza(0.0);
    let l0: Vec<f64> = marked_length_spectrum(&base, &classes).iter().map(|r| r.period.unwrap()).collect();
    for kappa in [0.2, 0.4, 0.6, 0.8] {
        let sys = MagneticSystem::bolza(kappa);
        let q = (1.0 - kappa * kappa).sqrt();
        for (c, l) in classes.iter().zip(&l0) {
            let o = find_periodic_orbit(&sys, c).unwrap();
            assert!((o.period * q / l - 1.0).abs() < 1e-6, "{c} at {kappa}: {}", o.period);
            let m = monodromy(&sys, &o).unwrap();
            assert!((m.eigenvalues[0].re / (o.period * q).exp() - 1.0).abs() < 1e-5);
            assert!((m.det - 1.0).abs() < 1e-8 && m.is_hyperbolic());
        }
    }
}
