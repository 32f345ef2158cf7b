use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use maglab::deform::{DeformationFamily, FamilyKind};
use maglab::geometry::{BumpAtom, ConformalTorusMetric, MagneticSystem, ScalarField, Surface, TrigPoly2};
use maglab::orbit::{parse_class_list, ClassLabel};

use crate::CliError;

/// `amp_cos·cos(mx + ny) + amp_sin·sin(mx + ny)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTermSpec {
    pub m: i32,
    pub n: i32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KappaSpec {
    Constant { value: f64 },
    Trig { terms: Vec<TrigTermSpec> },
    Bumps { offset: f64, atoms: Vec<AtomSpec> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    FlatTorus,
    Torus,
    Bolza,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub backend: Backend,
    /// Conformal factor terms of a `torus` backend.
    #[serde(default)]
    pub lambda: Vec<TrigTermSpec>,
    pub kappa: KappaSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryConfig {
    pub names: Vec<String>,
    pub count: usize,
    pub max_degree: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolutionConfig {
    /// Base quadrature resolution: grid points per direction on a torus,
    /// subdivision level on the Bolza surface.
    pub torus: usize,
    pub bolza: usize,
    /// Bolza refinement ladder for residual-vs-resolution tables.
    pub bolza_ladder: Vec<usize>,
    /// Resolution of the negativity certification.
    pub negativity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarlemanConfig {
    pub sigma: f64,
    pub n: u32,
    pub k_max: usize,
    /// Values visited by `carleman-sweep`.
    pub sweep: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub classes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Constant,
    KappaLinear { direction: KappaSpec },
    Conformal { phi: Vec<TrigTermSpec> },
    TorusTranslation { vx: f64, vy: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeformConfig {
    pub family: FamilySpec,
    pub epsilon: f64,
    pub s_grid: Vec<f64>,
    pub h_s: f64,
    pub classes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Mandatory for randomized batteries; an omitted key means no seed.
    #[serde(default)]
    pub seed: Option<u64>,
    pub output_dir: String,
    pub system: SystemConfig,
    pub battery: BatteryConfig,
    pub resolution: ResolutionConfig,
    pub carleman: CarlemanConfig,
    pub spectrum: SpectrumConfig,
    pub deform: DeformConfig,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self { backend: Backend::Bolza, lambda: vec![], kappa: KappaSpec::Constant { value: 0.6 } }
    }
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self { names: crate::batteries::BATTERIES.iter().map(|b| b.name.to_string()).collect(), count: 10, max_degree: 4 }
    }
}

impl Default for ResolutionConfig {
    fn default() -> Self {
        Self { torus: 16, bolza: 4, bolza_ladder: vec![2, 3, 4], negativity: 8 }
    }
}

impl Default for CarlemanConfig {
    fn default() -> Self {
        Self { sigma: 1.0, n: 1, k_max: 64, sweep: vec![0.1, 1.0, 3.0] }
    }
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { classes: "g1..g8".into() }
    }
}

impl Default for DeformConfig {
    fn default() -> Self {
        Self {
            family: FamilySpec::KappaLinear { direction: KappaSpec::Constant { value: 1.0 } },
            epsilon: 0.2,
            s_grid: vec![-0.1, -0.05, 0.0, 0.05, 0.1],
            h_s: 1e-3,
            classes: "g1".into(),
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: Some(1),
            output_dir: "maglab-out".into(),
            system: SystemConfig::default(),
            battery: BatteryConfig::default(),
            resolution: ResolutionConfig::default(),
            carleman: CarlemanConfig::default(),
            spectrum: SpectrumConfig::default(),
            deform: DeformConfig::default(),
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn trig(terms: &[TrigTermSpec]) -> TrigPoly2 {
    terms.iter().fold(TrigPoly2::zero(), |p, t| {
        p.plus(&TrigPoly2::cos(t.cos, t.m, t.n)).plus(&TrigPoly2::sin(t.sin, t.m, t.n))
    })
}

fn finite(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be finite")))
    }
}

impl KappaSpec {
    fn validate(&self, name: &str) -> Result<(), CliError> {
        match self {
            KappaSpec::Constant { value } => finite(name, *value),
            KappaSpec::Trig { terms } => {
                for t in terms {
                    finite(name, t.cos)?;
                    finite(name, t.sin)?;
                    if t.m.abs() > 8 || t.n.abs() > 8 {
                        return Err(bad(format!("{name}: frequencies must satisfy |m|, |n| <= 8")));
                    }
                }
                Ok(())
            }
            KappaSpec::Bumps { offset, atoms } => {
                finite(name, *offset)?;
                for a in atoms {
                    if !(a.radius > 0.0 && a.radius <= 3.0) {
                        return Err(bad(format!("{name}: bump radius must lie in (0, 3]")));
                    }
                    if a.x.hypot(a.y) >= 0.9 {
                        return Err(bad(format!("{name}: bump center must lie in the octagon (|z| < 0.9)")));
                    }
                    finite(name, a.weight)?;
                }
                Ok(())
            }
        }
    }

    pub fn field(&self) -> ScalarField {
        match self {
            KappaSpec::Constant { value } => ScalarField::constant(*value),
            KappaSpec::Trig { terms } => ScalarField::Trig { poly: trig(terms) },
            KappaSpec::Bumps { offset, atoms } => ScalarField::Bumps {
                offset: *offset,
                atoms: atoms
                    .iter()
                    .map(|a| BumpAtom::new(Complex64::new(a.x, a.y), a.radius, 0, Complex64::new(a.weight, 0.0)))
                    .collect(),
            },
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        // TOML integers are signed 64-bit
        if self.seed.is_some_and(|s| s > i64::MAX as u64) {
            return Err(bad("seed must lie in 0..=9223372036854775807"));
        }
        let s = &self.system;
        if s.backend != Backend::Torus && !s.lambda.is_empty() {
            return Err(bad("system.lambda is only meaningful for the torus backend"));
        }
        for t in &s.lambda {
            finite("system.lambda", t.cos)?;
            finite("system.lambda", t.sin)?;
        }
        s.kappa.validate("system.kappa")?;
        for name in &self.battery.names {
            if crate::batteries::find(name).is_none() {
                return Err(bad(format!("unknown battery {name:?}; see list-batteries")));
            }
        }
        if !(1..=1000).contains(&self.battery.count) {
            return Err(bad("battery.count must lie in 1..=1000"));
        }
        if self.battery.max_degree > 8 {
            return Err(bad("battery.max_degree must be at most 8"));
        }
        let r = &self.resolution;
        if !(4..=128).contains(&r.torus) {
            return Err(bad("resolution.torus must lie in 4..=128"));
        }
        if !(1..=8).contains(&r.bolza) || r.bolza_ladder.iter().any(|l| !(1..=8).contains(l)) {
            return Err(bad("Bolza resolutions must lie in 1..=8"));
        }
        if !(2..=64).contains(&r.negativity) {
            return Err(bad("resolution.negativity must lie in 2..=64"));
        }
        let c = &self.carleman;
        for sigma in std::iter::once(&c.sigma).chain(&c.sweep) {
            if !(*sigma > 0.0) || !sigma.is_finite() {
                return Err(bad(format!(
                    "carleman sigma must be positive (got {sigma}): at sigma = 0 the weight step γ_k² > 8|k|γ_(k-1)² is an equality, so the recurrences are not strict"
                )));
            }
        }
        if !(1..=32).contains(&c.n) {
            return Err(bad("carleman.n must lie in 1..=32"));
        }
        if !(8..=512).contains(&c.k_max) {
            return Err(bad("carleman.k_max must lie in 8..=512"));
        }
        parse_class_list(&self.spectrum.classes).map_err(|e| bad(e.to_string()))?;
        let d = &self.deform;
        if !(d.epsilon > 0.0 && d.epsilon <= 1.0) {
            return Err(bad("deform.epsilon must lie in (0, 1]"));
        }
        if !(d.h_s > 0.0 && d.h_s < d.epsilon) {
            return Err(bad("deform.h_s must lie in (0, epsilon)"));
        }
        if d.s_grid.iter().any(|s| !(s.abs() < d.epsilon)) {
            return Err(bad("deform.s_grid must lie inside (-epsilon, epsilon)"));
        }
        match &d.family {
            FamilySpec::KappaLinear { direction } => direction.validate("deform.family.direction")?,
            FamilySpec::Conformal { phi } => {
                for t in phi {
                    finite("deform.family.phi", t.cos)?;
                    finite("deform.family.phi", t.sin)?;
                }
            }
            FamilySpec::TorusTranslation { vx, vy } => {
                finite("deform.family.vx", *vx)?;
                finite("deform.family.vy", *vy)?;
            }
            FamilySpec::Constant => {}
        }
        parse_class_list(&d.classes).map_err(|e| bad(e.to_string()))?;
        Ok(())
    }

    /// Fails when a randomized battery is requested without a seed.
    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| bad("seed is mandatory for randomized batteries"))
    }

    /// Parses a class list and checks it against the backend.
    pub fn classes(&self, list: &str) -> Result<Vec<ClassLabel>, CliError> {
        let classes = parse_class_list(list).map_err(|e| bad(e.to_string()))?;
        let torus = self.system.backend != Backend::Bolza;
        if classes.iter().any(|c| matches!(c, ClassLabel::Torus { .. }) != torus) {
            return Err(bad(format!("class list {list:?} does not match the {:?} backend", self.system.backend)));
        }
        Ok(classes)
    }

    pub fn system(&self) -> Result<MagneticSystem, CliError> {
        let s = &self.system;
        let surface = match s.backend {
            Backend::FlatTorus => Surface::flat_torus(),
            Backend::Torus => Surface::Torus(ConformalTorusMetric::new(trig(&s.lambda)).map_err(|e| bad(e.to_string()))?),
            Backend::Bolza => Surface::bolza(),
        };
        MagneticSystem::new(surface, s.kappa.field()).map_err(|e| bad(e.to_string()))
    }

    pub fn family(&self) -> Result<DeformationFamily, CliError> {
        let kind = match &self.deform.family {
            FamilySpec::Constant => FamilyKind::Constant,
            FamilySpec::KappaLinear { direction } => FamilyKind::KappaLinear { direction: direction.field() },
            FamilySpec::Conformal { phi } => FamilyKind::Conformal { phi: trig(phi) },
            FamilySpec::TorusTranslation { vx, vy } => FamilyKind::TorusTranslation { vx: *vx, vy: *vy },
        };
        DeformationFamily::new(self.system()?, kind, self.deform.epsilon)
            .and_then(|f| f.with_step(self.deform.h_s))
            .map_err(|e| bad(e.to_string()))
    }

    pub fn base_resolution(&self) -> usize {
        match self.system.backend {
            Backend::Bolza => self.resolution.bolza,
            _ => self.resolution.torus,
        }
    }
}
