use std::collections::BTreeMap;
use std::rc::Rc;

use num_complex::Complex64;

use super::{FrameOp, Node, PhaseFunction, MAX_DERIVATIVE_DEPTH};
use crate::error::{Error, Result};
use crate::geometry::{BasePoint, MagneticSystem, PhasePoint, PointCtx};
use crate::jet::Jet;

type C64 = Complex64;

/// Taylor jets of each fiber mode at one base point.
pub type ModeJets = BTreeMap<i32, Jet<C64>>;

const I: C64 = C64::new(0.0, 1.0);
const HALF: C64 = C64::new(0.5, 0.0);

fn dz(f: &Jet<C64>) -> Jet<C64> {
    (f.dx() - f.dy() * I) * HALF
}

fn dzb(f: &Jet<C64>) -> Jet<C64> {
    (f.dx() + f.dy() * I) * HALF
}

fn accumulate(out: &mut ModeJets, k: i32, j: Jet<C64>) {
    match out.get_mut(&k) {
        Some(e) => *e += j,
        None => {
            out.insert(k, j);
        }
    }
}

fn kf(k: i32) -> C64 {
    C64::new(k as f64, 0.0)
}

/// `η⁺`: mode `k` goes to `k + 1` as `e^{-λ}(∂_z f - k λ_z f)`.
pub(crate) fn eta_plus(ctx: &PointCtx, u: &ModeJets) -> ModeJets {
    let mut out = ModeJets::new();
    for (&k, f) in u {
        let j = ctx.em * (dz(f) - ctx.lz * *f * kf(k));
        accumulate(&mut out, k + 1, j);
    }
    out
}

/// `η⁻`: mode `k` goes to `k - 1` as `e^{-λ}(∂_z̄ f + k λ_z̄ f)`.
pub(crate) fn eta_minus(ctx: &PointCtx, u: &ModeJets) -> ModeJets {
    let mut out = ModeJets::new();
    for (&k, f) in u {
        let j = ctx.em * (dzb(f) + ctx.lzb * *f * kf(k));
        accumulate(&mut out, k - 1, j);
    }
    out
}

fn combine(a: ModeJets, ca: C64, b: ModeJets, cb: C64) -> ModeJets {
    let mut out = ModeJets::new();
    for (k, j) in a {
        accumulate(&mut out, k, j * ca);
    }
    for (k, j) in b {
        accumulate(&mut out, k, j * cb);
    }
    out
}

fn apply_v(u: &ModeJets) -> ModeJets {
    u.iter().filter(|(k, _)| **k != 0).map(|(&k, f)| (k, *f * C64::new(0.0, k as f64))).collect()
}

pub(crate) fn apply_op(ctx: &PointCtx, op: FrameOp, u: &ModeJets) -> ModeJets {
    let one = C64::new(1.0, 0.0);
    match op {
        FrameOp::V => apply_v(u),
        FrameOp::EtaPlus => eta_plus(ctx, u),
        FrameOp::EtaMinus => eta_minus(ctx, u),
        FrameOp::X => combine(eta_plus(ctx, u), one, eta_minus(ctx, u), one),
        FrameOp::Xperp => combine(eta_plus(ctx, u), I, eta_minus(ctx, u), -I),
        FrameOp::F => {
            let mut out = combine(eta_plus(ctx, u), one, eta_minus(ctx, u), one);
            for (k, f) in apply_v(u) {
                accumulate(&mut out, k, ctx.kappa * f);
            }
            out
        }
    }
}

/// Evaluates phase functions at a single base point, sharing common
/// subexpressions between calls.
pub(crate) struct PointEvaluator<'a> {
    sys: &'a MagneticSystem,
    base: BasePoint,
    order: usize,
    ctx: PointCtx,
    // few distinct nodes per expression, so a linear scan beats hashing
    memo: Vec<(usize, Rc<ModeJets>)>,
}

impl<'a> PointEvaluator<'a> {
    pub fn new(sys: &'a MagneticSystem, base: BasePoint, order: usize) -> Result<Self> {
        if order > MAX_DERIVATIVE_DEPTH {
            return Err(Error::Representation(format!(
                "derivative nesting {order} exceeds {MAX_DERIVATIVE_DEPTH}"
            )));
        }
        let ctx = sys.point_ctx(base, order)?;
        Ok(Self { sys, base, order, ctx, memo: Vec::new() })
    }

    pub fn eval(&mut self, u: &PhaseFunction) -> Result<Rc<ModeJets>> {
        if let Some((_, v)) = self.memo.iter().find(|(k, _)| *k == u.key()) {
            return Ok(v.clone());
        }
        let o = self.order;
        let out: ModeJets = match u.node() {
            Node::Constant(c) => BTreeMap::from([(0, Jet::constant(*c, o))]),
            Node::Torus(modes) => modes.iter().map(|(&k, p)| (k, p.jet(self.base.x, self.base.y, o))).collect(),
            Node::Atoms(prepared) => {
                let surface = self.sys.surface().as_bolza().ok_or_else(|| Error::BackendMismatch {
                    expected: "bolza".into(),
                    found: self.sys.backend().to_string(),
                })?;
                prepared.mode_jets(surface, self.base.z(), o)
            }
            Node::Kappa => BTreeMap::from([(0, self.ctx.kappa)]),
            Node::GaussCurvature => BTreeMap::from([(0, self.ctx.gauss)]),
            Node::MagneticCurvature => {
                let ctx = &self.ctx;
                let k0 = ctx.gauss + ctx.kappa * ctx.kappa;
                // -X⊥κ = -i(η⁺κ - η⁻κ)
                let up = ctx.em * dz(&ctx.kappa) * (-I);
                let dn = ctx.em * dzb(&ctx.kappa) * I;
                BTreeMap::from([(-1, dn), (0, k0), (1, up)])
            }
            Node::Op(op, child) => {
                let c = self.eval(child)?;
                apply_op(&self.ctx, *op, &c)
            }
            Node::Sum(terms) => {
                let mut out = ModeJets::new();
                for (c, t) in terms {
                    let m = self.eval(t)?;
                    for (&k, j) in m.iter() {
                        accumulate(&mut out, k, *j * *c);
                    }
                }
                out
            }
            Node::Product(a, b) => {
                let ma = self.eval(a)?;
                let mb = self.eval(b)?;
                let mut out = ModeJets::new();
                for (&ka, ja) in ma.iter() {
                    for (&kb, jb) in mb.iter() {
                        accumulate(&mut out, ka + kb, *ja * *jb);
                    }
                }
                out
            }
            Node::Project(k, child) => {
                let c = self.eval(child)?;
                c.get(k).map(|j| BTreeMap::from([(*k, *j)])).unwrap_or_default()
            }
        };
        let out = Rc::new(out);
        self.memo.push((u.key(), out.clone()));
        Ok(out)
    }

    /// Mode values (order-zero coefficients).
    pub fn values(&mut self, u: &PhaseFunction) -> Result<Vec<(i32, C64)>> {
        Ok(self.eval(u)?.iter().map(|(&k, j)| (k, j.value())).collect())
    }
}

/// Values of the fiber modes `u_k` at a base point.
pub fn mode_values(sys: &MagneticSystem, u: &PhaseFunction, p: BasePoint) -> Result<BTreeMap<i32, C64>> {
    u.check_backend(sys)?;
    let mut ev = PointEvaluator::new(sys, p, u.derivative_depth())?;
    Ok(ev.values(u)?.into_iter().collect())
}

/// `u(x, y, θ) = Σ_k u_k(x, y) e^{ikθ}`.
pub fn evaluate(sys: &MagneticSystem, u: &PhaseFunction, p: PhasePoint) -> Result<C64> {
    let modes = mode_values(sys, u, p.base())?;
    Ok(modes.iter().map(|(&k, v)| v * C64::from_polar(1.0, k as f64 * p.theta)).sum())
}
