//! Verification batteries run by `verify`.

use std::f64::consts::SQRT_2;

use rayon::prelude::*;

use maglab::battery::random_battery;
use maglab::fourier::{decompose, parseval_defect, reassemble, ModeSpectrum};
use maglab::geometry::{MagneticSystem, Negativity, NegativityBounds, Surface};
use maglab::identity::{
    branch_separation, contraction_chain, estimate_from_data, mode_identity_residual, pestov_corollary_residual,
    pestov_residual, riccati_norm_identity, riccati_solve, structural_residuals, weighted_summation_engine, Branch,
    CarlemanWeights, ModeData, Tolerance, CARLEMAN_TOL, RICCATI_TOL,
};
use maglab::orbit::{find_periodic_orbit, monodromy, ClassLabel, Deck, PeriodicOrbit};
use maglab::phase::{PhaseFunction, Quadrature};

use crate::config::ExperimentConfig;
use crate::report::{num, Outcome, Row, Table};
use crate::CliError;

pub struct Battery {
    pub name: &'static str,
    pub anchor: &'static str,
    /// Draws seeded random functions.
    pub randomized: bool,
    run: fn(&Ctx) -> Result<Outcome, CliError>,
}

pub const BATTERIES: [Battery; 10] = [
    Battery { name: "structural", anchor: "structural equations of the moving frame", randomized: true, run: structural },
    Battery { name: "fourier", anchor: "fiber Fourier decomposition and Parseval", randomized: true, run: fourier },
    Battery { name: "pestov", anchor: "Pestov identity and its commutator corollary", randomized: true, run: pestov },
    Battery { name: "mode", anchor: "per-mode identity and eta inequalities", randomized: true, run: mode },
    Battery { name: "riccati", anchor: "Riccati equation along closed orbits and norm identity", randomized: true, run: riccati },
    Battery { name: "carleman", anchor: "weighted Carleman estimate", randomized: true, run: carleman },
    Battery { name: "chain", anchor: "two-step Carleman contraction chain", randomized: true, run: chain },
    Battery { name: "orbit", anchor: "length spectrum and monodromy oracles", randomized: false, run: orbit },
    Battery { name: "jacobi", anchor: "Jacobi equation for variational fields", randomized: false, run: jacobi },
    Battery { name: "livsic", anchor: "Livsic integral of the metric variation", randomized: false, run: livsic },
];

pub fn find(name: &str) -> Option<&'static Battery> {
    BATTERIES.iter().find(|b| b.name == name)
}

pub fn run(b: &Battery, ctx: &Ctx) -> Result<Outcome, CliError> {
    (b.run)(ctx)
}

/// Inputs shared by the batteries of one run.
pub struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub sys: MagneticSystem,
}

impl<'a> Ctx<'a> {
    pub fn new(cfg: &'a ExperimentConfig) -> Result<Self, CliError> {
        Ok(Self { cfg, sys: cfg.system()? })
    }

    pub fn functions(&self) -> Result<Vec<PhaseFunction>, CliError> {
        let b = &self.cfg.battery;
        random_battery(&self.sys, self.cfg.seed()?, b.count, b.max_degree).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn quadrature(&self) -> Quadrature {
        Quadrature::new(&self.sys, self.cfg.base_resolution())
    }

    fn negativity(&self) -> Result<NegativityBounds, maglab::Error> {
        self.sys.negativity_bounds(self.cfg.resolution.negativity)?.bounds()
    }
}

fn case(i: usize) -> String {
    format!("u{i:03}")
}

/// Runs `f` on every battery member in parallel and concatenates the rows
/// in member order.
fn per_member<F>(fns: &[PhaseFunction], f: F) -> Vec<Row>
where
    F: Fn(usize, &PhaseFunction) -> Vec<Row> + Sync,
{
    let parts: Vec<Vec<Row>> = fns.par_iter().enumerate().map(|(i, u)| f(i, u)).collect();
    parts.into_iter().flatten().collect()
}

fn structural(ctx: &Ctx) -> Result<Outcome, CliError> {
    let me = find("structural").unwrap();
    let fns = ctx.functions()?;
    let quad = ctx.quadrature();
    let rows = per_member(&fns, |i, u| match structural_residuals(&ctx.sys, &quad, u) {
        Ok(reps) => reps.iter().map(|r| Row::new(me, case(i), &r.name).identity(r)).collect(),
        Err(e) => vec![Row::new(me, case(i), "structural").error(e)],
    });
    let mut out = Outcome { rows, tables: vec![] };
    if matches!(ctx.sys.surface(), Surface::Bolza(_)) {
        let mut t = Table::new("structural_convergence", &["resolution", "nodes", "max_rel_residual"]);
        for &level in &ctx.cfg.resolution.bolza_ladder {
            if level == quad.resolution() && out.rows.iter().all(|r| r.residual.is_finite()) {
                let w = out.rows.iter().map(|r| r.residual).fold(0.0, f64::max);
                t.push(vec![level.to_string(), quad.len().to_string(), num(w)]);
                continue;
            }
            let q = Quadrature::new(&ctx.sys, level);
            let worst = fns
                .par_iter()
                .map(|u| structural_residuals(&ctx.sys, &q, u).map(|r| r.iter().map(|x| x.rel_residual).fold(0.0, f64::max)))
                .collect::<Result<Vec<f64>, _>>();
            match worst {
                Ok(w) => t.push(vec![level.to_string(), q.len().to_string(), num(w.into_iter().fold(0.0, f64::max))]),
                Err(e) => out.rows.push(Row::new(me, format!("level {level}"), "structural").error(e)),
            }
        }
        out.tables.push(t);
    }
    Ok(out)
}

fn fourier(ctx: &Ctx) -> Result<Outcome, CliError> {
    let me = find("fourier").unwrap();
    let fns = ctx.functions()?;
    let quad = ctx.quadrature();
    let spectra: Vec<Result<(f64, f64, ModeSpectrum), maglab::Error>> = fns
        .par_iter()
        .map(|u| {
            let back = reassemble(&decompose(u));
            let s = quad.sample(&ctx.sys, &[u, &u.sub(&back)])?;
            let norm = quad.norm_sq(&s[0]);
            let gap = (quad.norm_sq(&s[1]) / norm.max(f64::MIN_POSITIVE)).sqrt();
            Ok((parseval_defect(&quad, &s[0]), gap, ModeSpectrum::from_sampled(&quad, &s[0])))
        })
        .collect();
    let mut out = Outcome::default();
    let mut t = Table::new("mode_norms", &["case", "k", "norm"]);
    for (i, r) in spectra.into_iter().enumerate() {
        match r {
            Ok((parseval, gap, modes)) => {
                out.rows.push(Row::new(me, case(i), "parseval").at_most(parseval, 1e-12));
                out.rows.push(Row::new(me, case(i), "reassembly").at_most(gap, 1e-14));
                let want = fns[i].structural_degree();
                out.rows.push(Row::new(me, case(i), "degree").holds(modes.degree == want));
                for row in modes.rows() {
                    t.push(vec![case(i), row.k.to_string(), num(row.norm)]);
                }
            }
            Err(e) => out.rows.push(Row::new(me, case(i), "fourier").error(e)),
        }
    }
    out.tables.push(t);
    Ok(out)
}

fn pestov(ctx: &Ctx) -> Result<Outcome, CliError> {
    let me = find("pestov").unwrap();
    let fns = ctx.functions()?;
    let quad = ctx.quadrature();
    let rows = per_member(&fns, |i, u| {
        [pestov_residual(&ctx.sys, &quad, u), pestov_corollary_residual(&ctx.sys, &quad, u)]
            .into_iter()
            .map(|r| match r {
                Ok(r) => Row::new(me, case(i), &r.name).identity(&r),
                Err(e) => Row::new(me, case(i), "pestov").error(e),
            })
            .collect()
    });
    Ok(Outcome { rows, tables: vec![] })
}

fn refused(me: &Battery, e: maglab::Error) -> Outcome {
    Outcome { rows: vec![Row::new(me, "system", "negativity").error(e)], tables: vec![] }
}

fn mode(ctx: &Ctx) -> Result<Outcome, CliError> {
    let me = find("mode").unwrap();
    let fns = ctx.functions()?;
    let quad = ctx.quadrature();
    let nb = match ctx.negativity() {
        Ok(nb) => nb,
        Err(e) => return Ok(refused(me, e)),
    };
    let tol = Tolerance::inequality(ctx.sys.backend());
    let rows = per_member(&fns, |i, u| {
        let mut rows = Vec::new();
        for (k, uk) in decompose(u).into_iter().filter(|(k, _)| *k != 0) {
            match mode_identity_residual(&ctx.sys, &quad, &uk) {
                Ok(reps) => rows.extend(reps.iter().map(|r| Row::new(me, format!("{} k={k}", case(i)), &r.name).identity(r))),
                Err(e) => rows.push(Row::new(me, format!("{} k={k}", case(i)), "mode_identity").error(e)),
            }
        }
        match ModeData::harvest(&ctx.sys, &quad, u) {
            Ok(data) => {
                let reach = data.reach() as i32;
                for k in (-reach..=reach).filter(|k| *k != 0) {
                    let g = data.gk(k, nb.a, nb.b, &tol);
                    rows.extend(g.reports().iter().map(|r| Row::new(me, format!("{} k={k}", case(i)), &r.name).identity(r)));
                }
            }
            Err(e) => rows.push(Row::new(me, case(i), "gk").error(e)),
        }
        rows
    });
    Ok(Outcome { rows, tables: vec![] })
}

fn orbits(ctx: &Ctx, list: &str) -> Result<Vec<(ClassLabel, Result<PeriodicOrbit, maglab::Error>)>, CliError> {
    let classes = ctx.cfg.classes(list)?;
    Ok(classes.into_par_iter().map(|c| {
        let o = find_periodic_orbit(&ctx.sys, &c);
        (c, o)
    }).collect())
}

fn riccati(ctx: &Ctx) -> Result<Outcome, CliError> {
    let me = find("riccati").unwrap();
    let mut out = Outcome::default();
    let constant = ctx.sys.kappa().constant_value().filter(|_| matches!(ctx.sys.surface(), Surface::Bolza(_)));
    let mut t = Table::new("riccati", &["class", "branch", "t", "r"]);
    let found = orbits(ctx, &ctx.cfg.spectrum.classes)?;
    let solved: Vec<_> = found
        .par_iter()
        .map(|(c, o)| {
            let o = o.as_ref().map_err(|e| e.to_string())?;
            let p = riccati_solve(&ctx.sys, o, Branch::Plus).map_err(|e| e.to_string())?;
            let m = riccati_solve(&ctx.sys, o, Branch::Minus).map_err(|e| e.to_string())?;
            Ok::<_, String>((c.key(), p, m))
        })
        .collect();
    for ((c, _), r) in found.iter().zip(solved) {
        let key = c.key();
        let (_, p, m) = match r {
            Ok(v) => v,
            Err(e) => {
                out.rows.push(Row::new(me, &key, "riccati").error(e));
                continue;
            }
        };
        for s in [&p, &m] {
            let b = if s.branch == Branch::Plus { "plus" } else { "minus" };
            out.rows.push(Row::new(me, &key, format!("periodicity_{b}")).at_most(s.periodicity_defect, RICCATI_TOL));
            out.rows.push(Row::new(me, &key, format!("equation_{b}")).at_most(s.equation_residual, 1e-6));
            if let Some(kappa) = constant {
                let c = (1.0 - kappa * kappa).sqrt();
                let want = if s.branch == Branch::Plus { c } else { -c };
                let dev = s.values.iter().map(|r| (r - want).abs()).fold(0.0, f64::max);
                out.rows.push(Row::new(me, &key, format!("closed_form_{b}")).at_most(dev, 1e-8));
            }
            for (tt, r) in s.times.iter().zip(&s.values).step_by(8) {
                t.push(vec![key.clone(), b.into(), num(*tt), num(*r)]);
            }
        }
        match branch_separation(&p, &m) {
            Ok(gap) => out.rows.push(Row::new(me, &key, "branches_separate").holds(gap > 0.0)),
            Err(e) => out.rows.push(Row::new(me, &key, "branches_separate").error(e)),
        }
    }
    out.tables.push(t);
    // the norm identity needs a global solution; for constant κ on the
    // Bolza surface it is the constant ±√(1 − κ²)
    if let Some(kappa) = constant {
        if kappa.abs() < 1.0 {
            let fns = ctx.functions()?;
            let quad = ctx.quadrature();
            let c = (1.0 - kappa * kappa).sqrt();
            out.rows.extend(per_member(&fns, |i, u| {
                let mut rows = Vec::new();
                for r0 in [c, -c] {
                    let name = if r0 > 0.0 { "plus" } else { "minus" };
                    match riccati_norm_identity(&ctx.sys, &quad, u, &PhaseFunction::real_constant(r0)) {
                        Ok(reps) => rows.extend(reps.iter().map(|r| Row::new(me, case(i), format!("{}_{name}", r.name)).identity(r))),
                        Err(e) => rows.push(Row::new(me, case(i), "riccati_norm").error(e)),
                    }
                }
                rows
            }));
        }
    }
    Ok(out)
}

fn weight_rows(me: &Battery, sigmas: &[f64], k_max: usize) -> Vec<Row> {
    let mut rows = Vec::new();
    for &sigma in sigmas {
        let key = format!("sigma={sigma}");
        match CarlemanWeights::<f64>::new(sigma, k_max) {
            Ok(w) => {
                let c = w.certify();
                rows.push(Row::new(me, &key, "weights_finite").holds(c.all_finite));
                rows.push(Row::new(me, &key, "two_step_strict").holds(c.two_step > 0.0));
                rows.push(Row::new(me, &key, "factorial_step_strict").holds(c.factorial_step > 0.0));
                rows.push(Row::new(me, &key, "sigma_step").holds(c.sigma_step >= 0.0));
            }
            Err(e) => rows.push(Row::new(me, &key, "weights").error(e)),
        }
    }
    let w = CarlemanWeights::<f64>::new(1.0, k_max).expect("positive sigma");
    let e = std::f64::consts::E;
    let g1 = w.log_gamma_sq(1).exp();
    let g2 = w.log_gamma_sq(2).exp();
    rows.push(Row::new(me, "sigma=1", "gamma1_sq_is_8e").at_most((g1 / (8.0 * e) - 1.0).abs(), 1e-12));
    rows.push(Row::new(me, "sigma=1", "gamma2_sq_is_128e2").at_most((g2 / (128.0 * e * e) - 1.0).abs(), 1e-12));
    rows.push(Row::new(me, "sigma=1", "16gamma1_sq_below_gamma2_sq").holds(16.0 * g1 < g2));
    rows
}

/// Estimate and engine verdicts at one `σ` over the battery; also fills a
/// ratio table.
fn carleman_members(
    me: &Battery,
    ctx: &Ctx,
    fns: &[PhaseFunction],
    quad: &Quadrature,
    nb: &NegativityBounds,
    sigma: f64,
    t: &mut Table,
) -> Vec<Row> {
    let c = &ctx.cfg.carleman;
    let w = match CarlemanWeights::<f64>::new(sigma, c.k_max) {
        Ok(w) => w,
        Err(e) => return vec![Row::new(me, format!("sigma={sigma}"), "weights").error(e)],
    };
    let tol = Tolerance::inequality(ctx.sys.backend());
    let per: Vec<(Vec<Row>, Option<(f64, bool)>)> = fns
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let key = format!("{} sigma={sigma}", case(i));
            let data = match ModeData::harvest(&ctx.sys, quad, u) {
                Ok(d) => d,
                Err(e) => return (vec![Row::new(me, key, "carleman").error(e)], None),
            };
            let est = estimate_from_data(&data, &w, nb.a, c.n);
            let mut rows = vec![Row::new(me, &key, "ratio").at_most(est.ratio(), 1.0 + CARLEMAN_TOL)];
            match weighted_summation_engine(&data, &w, nb.a, c.n, &tol) {
                Ok(eng) => {
                    rows.push(Row::new(me, &key, "engine_hypotheses").holds(eng.hypotheses_hold));
                    rows.push(Row::new(me, &key, "engine_coefficients").holds(eng.coefficients_nonnegative));
                    rows.push(Row::new(me, &key, "engine_agrees").holds(eng.certified == est.pass));
                }
                Err(e) => rows.push(Row::new(me, &key, "engine").error(e)),
            }
            (rows, Some((est.ratio(), est.pass)))
        })
        .collect();
    let mut rows = Vec::new();
    for (i, (r, stat)) in per.into_iter().enumerate() {
        rows.extend(r);
        if let Some((ratio, pass)) = stat {
            t.push(vec![num(sigma), case(i), num(ratio), pass.to_string()]);
        }
    }
    rows
}

fn carleman(ctx: &Ctx) -> Result<Outcome, CliError> {
    let me = find("carleman").unwrap();
    let c = &ctx.cfg.carleman;
    let fns = ctx.functions()?;
    let mut out = Outcome { rows: weight_rows(me, &c.sweep, c.k_max), tables: vec![] };
    let nb = match ctx.negativity() {
        Ok(nb) => nb,
        Err(e) => {
            out.extend(refused(me, e));
            return Ok(out);
        }
    };
    let quad = ctx.quadrature();
    let mut t = Table::new("carleman_ratios", &["sigma", "case", "ratio", "pass"]);
    out.rows.extend(carleman_members(me, ctx, &fns, &quad, &nb, c.sigma, &mut t));
    out.tables.push(t);
    Ok(out)
}

/// Weights and the estimate for every `σ` of the sweep list.
pub fn carleman_sweep(ctx: &Ctx) -> Result<Outcome, CliError> {
    let me = find("carleman").unwrap();
    let c = &ctx.cfg.carleman;
    let fns = ctx.functions()?;
    let mut out = Outcome { rows: weight_rows(me, &c.sweep, c.k_max), tables: vec![] };
    let nb = match ctx.negativity() {
        Ok(nb) => nb,
        Err(e) => {
            out.extend(refused(me, e));
            return Ok(out);
        }
    };
    let quad = ctx.quadrature();
    let mut t = Table::new("carleman_sweep", &["sigma", "case", "ratio", "pass"]);
    for &sigma in &c.sweep {
        out.rows.extend(carleman_members(me, ctx, &fns, &quad, &nb, sigma, &mut t));
    }
    out.tables.push(t);
    Ok(out)
}

fn chain(ctx: &Ctx) -> Result<Outcome, CliError> {
    let me = find("chain").unwrap();
    let fns = ctx.functions()?;
    let neg: Negativity = match ctx.sys.negativity_bounds(ctx.cfg.resolution.negativity) {
        Ok(n) => n,
        Err(e) => return Ok(refused(me, e)),
    };
    if let Err(e) = neg.bounds() {
        return Ok(refused(me, e));
    }
    let quad = ctx.quadrature();
    let n = ctx.cfg.carleman.n;
    let rows = per_member(&fns, |i, y| match contraction_chain(&ctx.sys, &quad, &neg, y, n, None) {
        Ok(r) => {
            let key = format!("{} sigma={:.6}", case(i), r.sigma);
            let mut rows = vec![
                Row::new(me, &key, "chain_constant").at_most(r.constant, 1.0 + 1e-12),
                Row::new(me, &key, "first_estimate").at_most(r.first.ratio(), 1.0 + CARLEMAN_TOL),
                Row::new(me, &key, "second_estimate").at_most(r.second.ratio(), 1.0 + CARLEMAN_TOL),
            ];
            rows.extend(r.chained.iter().map(|c| Row::new(me, &key, &c.name).at_most(c.ratio(), 1.0 + CARLEMAN_TOL)));
            rows
        }
        Err(e) => vec![Row::new(me, case(i), "chain").error(e)],
    });
    Ok(Outcome { rows, tables: vec![] })
}

/// `2 arccosh(1 + √2)`.
pub fn bolza_systole() -> f64 {
    2.0 * (1.0 + SQRT_2).acosh()
}

fn orbit(ctx: &Ctx) -> Result<Outcome, CliError> {
    let me = find("orbit").unwrap();
    let mut out = Outcome::default();
    let bolza = ctx.sys.surface().as_bolza().cloned();
    let constant = ctx.sys.kappa().constant_value();
    let law = constant.filter(|k| bolza.is_some() && k.abs() < 1.0);
    let negative = ctx.negativity().is_ok();
    let flat_geodesic = matches!(ctx.sys.surface(), Surface::Torus(t) if t.is_flat()) && constant == Some(0.0);
    let found = orbits(ctx, &ctx.cfg.spectrum.classes)?;
    let mono: Vec<_> = found
        .par_iter()
        .map(|(_, o)| o.as_ref().map_err(|e| e.to_string()).and_then(|o| monodromy(&ctx.sys, o).map_err(|e| e.to_string())))
        .collect();
    let mut t = Table::new("orbits", &["class", "period", "closure_defect", "trace", "det", "lambda_max", "oracle_period"]);
    for ((c, o), m) in found.iter().zip(mono) {
        let key = c.key();
        let (o, m) = match (o, m) {
            (Ok(o), Ok(m)) => (o, m),
            (Err(e), _) => {
                out.rows.push(Row::new(me, &key, "orbit").error(e));
                continue;
            }
            (_, Err(e)) => {
                out.rows.push(Row::new(me, &key, "monodromy").error(e));
                continue;
            }
        };
        out.rows.push(Row::new(me, &key, "closure").at_most(o.closure_defect, 1e-9));
        out.rows.push(Row::new(me, &key, "det_one").at_most((m.det - 1.0).abs(), 1e-8));
        if negative {
            out.rows.push(Row::new(me, &key, "hyperbolic").holds(m.is_hyperbolic()));
        }
        let deck = Deck::for_class(c, bolza.as_deref()).ok();
        let ell = deck.map(|d| d.geodesic_length());
        let mut oracle = None;
        if let (Some(kappa), Some(ell)) = (law, ell) {
            let q = (1.0 - kappa * kappa).sqrt();
            oracle = Some(ell / q);
            out.rows.push(Row::new(me, &key, "hypercycle_length").at_most((o.period * q / ell - 1.0).abs(), 1e-6));
            let lam = m.eigenvalues[0].re;
            out.rows.push(Row::new(me, &key, "eigenvalue_max").at_most((lam / ell.exp() - 1.0).abs(), 1e-5));
            let mu = m.eigenvalues[1].re;
            out.rows.push(Row::new(me, &key, "eigenvalue_min").at_most((mu / (-ell).exp() - 1.0).abs(), 1e-5));
            if matches!(c, ClassLabel::Bolza { word } if word.len() == 1) {
                out.rows.push(Row::new(me, &key, "systole").at_most((o.period * q - bolza_systole()).abs(), 1e-6));
            }
        }
        if flat_geodesic {
            let ell = ell.unwrap_or(f64::NAN);
            oracle = Some(ell);
            out.rows.push(Row::new(me, &key, "flat_length").at_most((o.period / ell - 1.0).abs(), 1e-9));
        }
        t.push(vec![
            key.clone(),
            num(o.period),
            num(o.closure_defect),
            num(m.trace),
            num(m.det),
            num(m.eigenvalues[0].re),
            num(oracle),
        ]);
    }
    out.tables.push(t);
    Ok(out)
}

fn jacobi(ctx: &Ctx) -> Result<Outcome, CliError> {
    crate::deform::jacobi_rows(ctx, find("jacobi").unwrap())
}

fn livsic(ctx: &Ctx) -> Result<Outcome, CliError> {
    crate::deform::livsic_rows(ctx, find("livsic").unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Backend, KappaSpec, TrigTermSpec};

    fn torus_cfg() -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.system.backend = Backend::FlatTorus;
        c.system.kappa = KappaSpec::Trig { terms: vec![TrigTermSpec { m: 1, n: 1, cos: 0.2, sin: 0.1 }] };
        c.spectrum.classes = "(1,0)".into();
        c.deform.classes = "(1,0)".into();
        c.battery.count = 3;
        c.resolution.torus = 8;
        c
    }

    #[test]
    fn names_are_unique_and_anchored() {
        let mut names: Vec<_> = BATTERIES.iter().map(|b| b.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), BATTERIES.len());
        assert!(BATTERIES.iter().all(|b| !b.anchor.is_empty()));
        assert!(find("pestov").is_some_and(|b| b.randomized));
        assert!(find("orbit").is_some_and(|b| !b.randomized));
        assert!(find("missing").is_none());
    }

    #[test]
    fn case_labels_sort_in_member_order() {
        assert_eq!(case(7), "u007");
        assert!(case(9) < case(10));
    }

    #[test]
    fn systole_matches_closed_form() {
        assert!((bolza_systole() - 3.057_141_839_903_5).abs() < 1e-9);
    }

    #[test]
    fn weight_rows_pass_for_positive_sigma() {
        let rows = weight_rows(find("carleman").unwrap(), &[0.5, 2.0], 32);
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.pass), "{rows:?}");
    }

    #[test]
    fn torus_structural_and_fourier() {
        let cfg = torus_cfg();
        let ctx = Ctx::new(&cfg).unwrap();
        for name in ["structural", "fourier", "pestov"] {
            let o = run(find(name).unwrap(), &ctx).unwrap();
            assert!(!o.rows.is_empty());
            assert!(o.pass(), "{name}: {:?}", o.failures().collect::<Vec<_>>());
            assert!(o.rows.iter().all(|r| r.battery == name));
        }
    }

    #[test]
    fn battery_rows_follow_member_order() {
        let cfg = torus_cfg();
        let ctx = Ctx::new(&cfg).unwrap();
        let o = run(find("structural").unwrap(), &ctx).unwrap();
        let cases: Vec<&str> = o.rows.iter().map(|r| r.case.as_str()).collect();
        let mut sorted = cases.clone();
        sorted.sort();
        assert_eq!(cases, sorted);
    }
}
