//! Deformation experiments: length functions, the Livsic integral of `β`
//! and Jacobi fields.

use rayon::prelude::*;

use maglab::deform::{
    beta, beta_difference_check, jacobi_residual, length_function, livsic_integral_check, periodic_nondegeneracy,
    variational_field, DeformationFamily, FamilyKind, VariationalField, BETA_LEAKAGE_TOL, ISOSPECTRAL_TOL,
    JACOBI_TOL,
};
use maglab::geometry::PhasePoint;
use maglab::orbit::{find_periodic_orbit, ClassLabel};
use maglab::phase::Quadrature;

use crate::batteries::{Battery, Ctx};
use crate::report::{num, Outcome, Row, Table};
use crate::CliError;

/// Central differences of `e^{2λ_s}` agree with the closed-form `β` to
/// `O(h_s²)`.
const BETA_FD_TOL: f64 = 1e-5;

fn spread(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    hi - lo
}

fn family_and_classes(ctx: &Ctx) -> Result<(DeformationFamily, Vec<ClassLabel>), CliError> {
    Ok((ctx.cfg.family()?, ctx.cfg.classes(&ctx.cfg.deform.classes)?))
}

/// Rows for `β`, the length functions over the `s` grid and the Livsic
/// integral along each class.
pub fn livsic_rows(ctx: &Ctx, me: &Battery) -> Result<Outcome, CliError> {
    let (family, classes) = family_and_classes(ctx)?;
    let mut out = Outcome::default();
    let quad = Quadrature::new(family.base(), ctx.cfg.base_resolution());
    let b = match beta(&family, &quad) {
        Ok(b) => b,
        Err(e) => {
            out.rows.push(Row::new(me, "family", "beta").error(e));
            return Ok(out);
        }
    };
    out.rows.push(Row::new(me, "family", "beta_mode_leakage").at_most(b.leakage, BETA_LEAKAGE_TOL));
    let probes: Vec<PhasePoint> =
        quad.nodes().iter().take(32).enumerate().map(|(i, p)| PhasePoint::new(p.x, p.y, 0.7 * i as f64)).collect();
    match beta_difference_check(&family, &b, &probes) {
        Ok(gap) => out.rows.push(Row::new(me, "family", "beta_finite_difference").at_most(gap, BETA_FD_TOL)),
        Err(e) => out.rows.push(Row::new(me, "family", "beta_finite_difference").error(e)),
    }
    let isospectral = matches!(family.kind(), FamilyKind::Constant | FamilyKind::TorusTranslation { .. });
    let grid = &ctx.cfg.deform.s_grid;
    let per: Vec<_> = classes
        .par_iter()
        .map(|c| {
            let lf = length_function(&family, c, grid)?;
            let o = find_periodic_orbit(family.base(), c)?;
            let l = livsic_integral_check(&family, &b, &o, Some(&lf))?;
            Ok::<_, maglab::Error>((lf, l))
        })
        .collect();
    let mut t = Table::new("length_function", &["class", "s", "length", "closure_defect"]);
    for (c, r) in classes.iter().zip(per) {
        let key = c.key();
        let (lf, l) = match r {
            Ok(v) => v,
            Err(e) => {
                out.rows.push(Row::new(me, &key, "length_function").error(e));
                continue;
            }
        };
        for i in 0..lf.s.len() {
            t.push(vec![key.clone(), num(lf.s[i]), num(lf.lengths[i]), num(lf.closure_defects[i])]);
        }
        if isospectral {
            out.rows.push(Row::new(me, &key, "isospectral").at_most(lf.max_relative_variation(), ISOSPECTRAL_TOL));
        }
        if l.asserted {
            out.rows.push(Row::new(me, &key, "livsic_integral").at_most(l.integral.abs() / l.length, l.tolerance));
        }
    }
    out.tables.push(t);
    Ok(out)
}

fn field_table(t: &mut Table, f: &VariationalField) {
    for i in (0..f.times.len()).step_by(4) {
        t.push(vec![f.class_key.clone(), num(f.times[i]), num(f.x[i]), num(f.y[i]), num(f.f0[i]), num(f.curvature[i])]);
    }
}

/// Jacobi residuals at `h_s` and `2h_s`, the observed order, the closed
/// form for constant data and the nondegeneracy of each orbit.
pub fn jacobi_rows(ctx: &Ctx, me: &Battery) -> Result<Outcome, CliError> {
    let (family, classes) = family_and_classes(ctx)?;
    let mut out = Outcome::default();
    if !family.fixed_metric() {
        out.rows.push(Row::new(me, "family", "jacobi").error("variational fields need a family with fixed metric"));
        return Ok(out);
    }
    let h = family.h_s();
    let per: Vec<_> = classes
        .par_iter()
        .map(|c| {
            let o = find_periodic_orbit(family.base(), c)?;
            let nd = periodic_nondegeneracy(family.base(), &o)?;
            let f1 = variational_field(&family, &o, h)?;
            let f2 = if 2.0 * h < family.epsilon() { Some(variational_field(&family, &o, 2.0 * h)?) } else { None };
            Ok::<_, maglab::Error>((nd, f1, f2))
        })
        .collect();
    let mut t = Table::new("jacobi_field", &["class", "t", "x", "y", "f0", "curvature"]);
    let mut conv = Table::new("jacobi_convergence", &["class", "h_s", "normal_residual", "tangential_residual"]);
    for (c, r) in classes.iter().zip(per) {
        let key = c.key();
        let (nd, f1, f2) = match r {
            Ok(v) => v,
            Err(e) => {
                out.rows.push(Row::new(me, &key, "jacobi").error(e));
                continue;
            }
        };
        out.rows.push(Row::new(me, &key, "nondegenerate").holds(nd.pass));
        let r1 = jacobi_residual(&f1, JACOBI_TOL);
        out.rows.push(Row::new(me, &key, "normal_residual").at_most(r1.normal_residual / r1.scale, JACOBI_TOL));
        out.rows.push(Row::new(me, &key, "tangential_residual").at_most(r1.tangential_residual / r1.scale, JACOBI_TOL));
        conv.push(vec![key.clone(), num(h), num(r1.normal_residual), num(r1.tangential_residual)]);
        if let Some(f2) = &f2 {
            let r2 = jacobi_residual(f2, JACOBI_TOL);
            conv.push(vec![key.clone(), num(2.0 * h), num(r2.normal_residual), num(r2.tangential_residual)]);
            // below this the residual is at the noise floor and has no order
            if r1.normal_residual > 1e-9 {
                let order = (r2.normal_residual / r1.normal_residual).log2();
                out.rows.push(Row::new(me, &key, "second_order_decay").at_most((order - 2.0).abs(), 0.5));
            }
        }
        if spread(&f1.curvature) < 1e-12 && spread(&f1.f0) < 1e-12 && f1.curvature[0] != 0.0 {
            let want = f1.f0[0] / f1.curvature[0];
            let dev = f1.y.iter().map(|y| (y - want).abs()).fold(0.0, f64::max);
            out.rows.push(Row::new(me, &key, "constant_closed_form").at_most(dev, 1e-5));
        }
        field_table(&mut t, &f1);
    }
    out.tables.push(t);
    out.tables.push(conv);
    Ok(out)
}
