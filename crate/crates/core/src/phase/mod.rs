//! Functions on the unit tangent bundle and the frame operators acting on them.
//!
//! A [`PhaseFunction`] is an immutable expression: leaves are exactly
//! evaluable fiber-mode data (trigonometric polynomials on the torus,
//! periodized bumps on the Bolza surface, or the intensity and curvature of
//! the system), inner nodes are frame operators, linear combinations,
//! products and mode projections. Evaluation at a base point propagates
//! bivariate Taylor jets through the tree, so derivatives are exact to
//! roundoff.

mod eval;
mod quadrature;
mod serial;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BackendKind, BolzaSurface, BumpAtom, MagneticSystem, PreparedAtoms, TrigPoly2};

pub use eval::{evaluate, mode_values, ModeJets};
pub use quadrature::{Quadrature, Sampled};
pub use serial::{FunctionFile, ModeEntry};

type C64 = Complex64;

/// Deepest supported nesting of derivative operators.
pub const MAX_DERIVATIVE_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameOp {
    X,
    Xperp,
    V,
    F,
    EtaPlus,
    EtaMinus,
}

impl FrameOp {
    pub const ALL: [FrameOp; 6] = [FrameOp::X, FrameOp::Xperp, FrameOp::V, FrameOp::F, FrameOp::EtaPlus, FrameOp::EtaMinus];

    pub fn name(&self) -> &'static str {
        match self {
            FrameOp::X => "X",
            FrameOp::Xperp => "Xperp",
            FrameOp::V => "V",
            FrameOp::F => "F",
            FrameOp::EtaPlus => "eta_plus",
            FrameOp::EtaMinus => "eta_minus",
        }
    }

    fn differentiates(&self) -> bool {
        !matches!(self, FrameOp::V)
    }

    fn shift_modes(&self, modes: &BTreeSet<i32>) -> BTreeSet<i32> {
        let mut out = BTreeSet::new();
        for &k in modes {
            match self {
                FrameOp::V => {
                    if k != 0 {
                        out.insert(k);
                    }
                }
                FrameOp::EtaPlus => {
                    out.insert(k + 1);
                }
                FrameOp::EtaMinus => {
                    out.insert(k - 1);
                }
                FrameOp::X | FrameOp::Xperp => {
                    out.insert(k + 1);
                    out.insert(k - 1);
                }
                FrameOp::F => {
                    out.insert(k + 1);
                    out.insert(k - 1);
                    if k != 0 {
                        out.insert(k);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for FrameOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which backend a function is tied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendTag {
    /// Built only from constants and system quantities.
    Any,
    Only(BackendKind),
    /// Combines leaves from different backends; unusable.
    Mixed,
}

impl BackendTag {
    fn join(self, other: BackendTag) -> BackendTag {
        match (self, other) {
            (BackendTag::Any, t) | (t, BackendTag::Any) => t,
            (BackendTag::Only(a), BackendTag::Only(b)) if a == b => BackendTag::Only(a),
            _ => BackendTag::Mixed,
        }
    }
}

#[derive(Debug)]
pub(crate) enum Node {
    Constant(C64),
    Torus(BTreeMap<i32, TrigPoly2>),
    Atoms(Arc<PreparedAtoms>),
    Kappa,
    GaussCurvature,
    MagneticCurvature,
    Op(FrameOp, PhaseFunction),
    Sum(Vec<(C64, PhaseFunction)>),
    Product(PhaseFunction, PhaseFunction),
    Project(i32, PhaseFunction),
}

/// Immutable smooth function on the unit tangent bundle with finitely many
/// fiber modes. Cloning is cheap.
#[derive(Clone)]
pub struct PhaseFunction {
    node: Arc<Node>,
    backend: BackendTag,
    modes: Arc<BTreeSet<i32>>,
    depth: usize,
}

impl fmt::Debug for PhaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseFunction")
            .field("backend", &self.backend)
            .field("modes", &self.modes)
            .field("depth", &self.depth)
            .finish()
    }
}

impl PhaseFunction {
    fn build(node: Node, backend: BackendTag, modes: BTreeSet<i32>, depth: usize) -> Self {
        Self { node: Arc::new(node), backend, modes: Arc::new(modes), depth }
    }

    pub fn zero() -> Self {
        Self::build(Node::Sum(Vec::new()), BackendTag::Any, BTreeSet::new(), 0)
    }

    pub fn constant(c: C64) -> Self {
        if c == C64::new(0.0, 0.0) {
            return Self::zero();
        }
        Self::build(Node::Constant(c), BackendTag::Any, BTreeSet::from([0]), 0)
    }

    pub fn real_constant(c: f64) -> Self {
        Self::constant(C64::new(c, 0.0))
    }

    /// Torus function `Σ_k p_k(x, y) e^{ikθ}`; zero polynomials are dropped.
    pub fn torus(modes: BTreeMap<i32, TrigPoly2>) -> Self {
        let modes: BTreeMap<i32, TrigPoly2> = modes.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        if modes.is_empty() {
            return Self::zero();
        }
        let keys = modes.keys().copied().collect();
        Self::build(Node::Torus(modes), BackendTag::Only(BackendKind::Torus), keys, 0)
    }

    /// Single torus mode `p(x, y) e^{ikθ}`.
    pub fn torus_mode(k: i32, p: TrigPoly2) -> Self {
        Self::torus(BTreeMap::from([(k, p)]))
    }

    /// `e^{ikθ}` on the torus.
    pub fn fiber_exp(k: i32) -> Self {
        Self::torus_mode(k, TrigPoly2::constant(1.0))
    }

    /// Periodized bump atoms on the Bolza surface.
    pub fn atoms(surface: &BolzaSurface, atoms: Vec<BumpAtom>) -> Result<Self> {
        let atoms: Vec<BumpAtom> = atoms.into_iter().filter(|a| a.weight != C64::new(0.0, 0.0)).collect();
        if atoms.is_empty() {
            return Ok(Self::zero());
        }
        let prepared = PreparedAtoms::new(surface, atoms)?;
        let keys = prepared.modes().collect();
        Ok(Self::build(Node::Atoms(Arc::new(prepared)), BackendTag::Only(BackendKind::Bolza), keys, 0))
    }

    /// `κ∘π`.
    pub fn kappa() -> Self {
        Self::build(Node::Kappa, BackendTag::Any, BTreeSet::from([0]), 0)
    }

    /// `K∘π`.
    pub fn gaussian_curvature() -> Self {
        Self::build(Node::GaussCurvature, BackendTag::Any, BTreeSet::from([0]), 0)
    }

    /// `𝕂 = K - X⊥κ + κ²`.
    pub fn magnetic_curvature() -> Self {
        Self::build(Node::MagneticCurvature, BackendTag::Any, BTreeSet::from([-1, 0, 1]), 0)
    }

    pub fn apply(&self, op: FrameOp) -> Self {
        if self.is_structurally_zero() {
            return Self::zero();
        }
        let modes = op.shift_modes(&self.modes);
        if modes.is_empty() {
            return Self::zero();
        }
        let depth = self.depth + usize::from(op.differentiates());
        Self::build(Node::Op(op, self.clone()), self.backend, modes, depth)
    }

    pub fn x(&self) -> Self {
        self.apply(FrameOp::X)
    }

    pub fn xperp(&self) -> Self {
        self.apply(FrameOp::Xperp)
    }

    pub fn v(&self) -> Self {
        self.apply(FrameOp::V)
    }

    pub fn f(&self) -> Self {
        self.apply(FrameOp::F)
    }

    pub fn eta_plus(&self) -> Self {
        self.apply(FrameOp::EtaPlus)
    }

    pub fn eta_minus(&self) -> Self {
        self.apply(FrameOp::EtaMinus)
    }

    /// `Σ c_i u_i`.
    pub fn linear(terms: Vec<(C64, PhaseFunction)>) -> Self {
        let terms: Vec<(C64, PhaseFunction)> = terms
            .into_iter()
            .filter(|(c, u)| *c != C64::new(0.0, 0.0) && !u.is_structurally_zero())
            .collect();
        if terms.is_empty() {
            return Self::zero();
        }
        let backend = terms.iter().fold(BackendTag::Any, |b, (_, u)| b.join(u.backend));
        let modes = terms.iter().flat_map(|(_, u)| u.modes.iter().copied()).collect();
        let depth = terms.iter().map(|(_, u)| u.depth).max().unwrap_or(0);
        Self::build(Node::Sum(terms), backend, modes, depth)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::linear(vec![(C64::new(1.0, 0.0), self.clone()), (C64::new(1.0, 0.0), other.clone())])
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::linear(vec![(C64::new(1.0, 0.0), self.clone()), (C64::new(-1.0, 0.0), other.clone())])
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::linear(vec![(c, self.clone())])
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_structurally_zero() || other.is_structurally_zero() {
            return Self::zero();
        }
        let mut modes = BTreeSet::new();
        for &a in self.modes.iter() {
            for &b in other.modes.iter() {
                modes.insert(a + b);
            }
        }
        Self::build(
            Node::Product(self.clone(), other.clone()),
            self.backend.join(other.backend),
            modes,
            self.depth.max(other.depth),
        )
    }

    /// The `k`-th fiber mode `u_k`.
    pub fn project(&self, k: i32) -> Self {
        if !self.modes.contains(&k) {
            return Self::zero();
        }
        Self::build(Node::Project(k, self.clone()), self.backend, BTreeSet::from([k]), self.depth)
    }

    /// Modes that may be nonzero, read off the structure.
    pub fn structural_modes(&self) -> &BTreeSet<i32> {
        &self.modes
    }

    /// `max |k|` over the structural modes.
    pub fn structural_degree(&self) -> u32 {
        self.modes.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn backend(&self) -> BackendTag {
        self.backend
    }

    /// Nesting depth of derivative operators.
    pub fn derivative_depth(&self) -> usize {
        self.depth
    }

    pub(crate) fn node(&self) -> &Node {
        &self.node
    }

    pub(crate) fn key(&self) -> usize {
        Arc::as_ptr(&self.node) as usize
    }

    /// Fails unless the function can be evaluated on `system`.
    pub fn check_backend(&self, system: &MagneticSystem) -> Result<()> {
        match self.backend {
            BackendTag::Any => Ok(()),
            BackendTag::Only(b) if b == system.backend() => Ok(()),
            BackendTag::Only(b) => Err(Error::BackendMismatch { expected: system.backend().to_string(), found: b.to_string() }),
            BackendTag::Mixed => Err(Error::BackendMismatch {
                expected: system.backend().to_string(),
                found: "mixed backends".into(),
            }),
        }
    }

    /// Whether mode `-k` is the conjugate of mode `k`, for leaf data; `None`
    /// for composite expressions.
    pub fn real_flag(&self) -> Option<bool> {
        match &*self.node {
            Node::Constant(c) => Some(c.im == 0.0),
            Node::Torus(m) => Some(m.iter().all(|(k, p)| {
                let q = m.get(&-k).cloned().unwrap_or_default();
                p.conj().plus(&q.scaled(C64::new(-1.0, 0.0))).terms().all(|(_, c)| c.norm() <= 1e-14)
            })),
            Node::Atoms(p) => {
                let atoms = p.atoms();
                Some(atoms.iter().all(|a| {
                    let c = a.conjugate();
                    if a.mode == 0 {
                        a.weight.im == 0.0 || atoms.iter().any(|b| *b == c && !std::ptr::eq(a, b))
                    } else {
                        atoms.contains(&c)
                    }
                }))
            }
            Node::Kappa | Node::GaussCurvature | Node::MagneticCurvature => Some(true),
            _ => None,
        }
    }
}

/// Backend-checked operator application.
pub fn apply(system: &MagneticSystem, op: FrameOp, u: &PhaseFunction) -> Result<PhaseFunction> {
    u.check_backend(system)?;
    let out = u.apply(op);
    if out.depth > MAX_DERIVATIVE_DEPTH {
        return Err(Error::Representation(format!(
            "derivative nesting {} exceeds {MAX_DERIVATIVE_DEPTH}",
            out.depth
        )));
    }
    Ok(out)
}

pub fn apply_x(system: &MagneticSystem, u: &PhaseFunction) -> Result<PhaseFunction> {
    apply(system, FrameOp::X, u)
}

pub fn apply_xperp(system: &MagneticSystem, u: &PhaseFunction) -> Result<PhaseFunction> {
    apply(system, FrameOp::Xperp, u)
}

pub fn apply_v(system: &MagneticSystem, u: &PhaseFunction) -> Result<PhaseFunction> {
    apply(system, FrameOp::V, u)
}

pub fn apply_f(system: &MagneticSystem, u: &PhaseFunction) -> Result<PhaseFunction> {
    apply(system, FrameOp::F, u)
}

/// `η⁺` for `raise = true`, `η⁻` otherwise.
pub fn apply_eta(system: &MagneticSystem, u: &PhaseFunction, raise: bool) -> Result<PhaseFunction> {
    apply(system, if raise { FrameOp::EtaPlus } else { FrameOp::EtaMinus }, u)
}

/// Commutator `[A, B]u = A(Bu) - B(Au)`.
pub fn commutator(a: FrameOp, b: FrameOp, u: &PhaseFunction) -> PhaseFunction {
    u.apply(b).apply(a).sub(&u.apply(a).apply(b))
}

#[cfg(test)]
mod tests;
