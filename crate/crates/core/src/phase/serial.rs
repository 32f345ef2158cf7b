use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Node, PhaseFunction};
use crate::error::{Error, Result};
use crate::geometry::{BackendKind, BumpAtom, MagneticSystem, TrigPoly2};

type C64 = Complex64;

/// On-disk form of a leaf phase function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionFile {
    pub backend: BackendKind,
    pub modes: Vec<ModeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub center: C64,
    pub radius: f64,
    pub weight: C64,
    pub exponent: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub k: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<TrigPoly2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomSpec>>,
}

impl PhaseFunction {
    /// Serializable form; only leaf data (constants, torus modes, atoms)
    /// can be written.
    pub fn to_file(&self, backend: BackendKind) -> Result<FunctionFile> {
        let modes = match self.node() {
            Node::Sum(t) if t.is_empty() => Vec::new(),
            Node::Constant(c) => vec![ModeEntry { k: 0, constant: Some(*c), coeffs: None, atoms: None }],
            Node::Torus(m) => m
                .iter()
                .map(|(&k, p)| ModeEntry { k, constant: None, coeffs: Some(p.clone()), atoms: None })
                .collect(),
            Node::Atoms(p) => {
                let mut by_mode: BTreeMap<i32, Vec<AtomSpec>> = BTreeMap::new();
                for a in p.atoms() {
                    by_mode.entry(a.mode).or_default().push(AtomSpec {
                        center: a.center,
                        radius: a.radius,
                        weight: a.weight,
                        exponent: a.exponent,
                    });
                }
                by_mode
                    .into_iter()
                    .map(|(k, atoms)| ModeEntry { k, constant: None, coeffs: None, atoms: Some(atoms) })
                    .collect()
            }
            _ => {
                return Err(Error::Representation(
                    "only constants, torus modes and atom sums can be serialized".into(),
                ))
            }
        };
        Ok(FunctionFile { backend, modes })
    }

    pub fn to_json(&self, backend: BackendKind) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file(backend)?)?)
    }

    pub fn from_file(sys: &MagneticSystem, file: &FunctionFile) -> Result<Self> {
        if file.backend != sys.backend() {
            return Err(Error::BackendMismatch { expected: sys.backend().to_string(), found: file.backend.to_string() });
        }
        let mut parts = Vec::new();
        let mut torus = BTreeMap::new();
        let mut atoms = Vec::new();
        for m in &file.modes {
            if let Some(c) = m.constant {
                if m.k != 0 {
                    return Err(Error::Representation("constant entries must sit in mode 0".into()));
                }
                parts.push(PhaseFunction::constant(c));
            }
            if let Some(p) = &m.coeffs {
                if file.backend != BackendKind::Torus {
                    return Err(Error::Representation("trigonometric coefficients need the torus backend".into()));
                }
                let e: &mut TrigPoly2 = torus.entry(m.k).or_default();
                *e = e.plus(p);
            }
            if let Some(list) = &m.atoms {
                if file.backend != BackendKind::Bolza {
                    return Err(Error::Representation("atoms need the bolza backend".into()));
                }
                for a in list {
                    atoms.push(BumpAtom { center: a.center, radius: a.radius, mode: m.k, weight: a.weight, exponent: a.exponent });
                }
            }
        }
        if !torus.is_empty() {
            parts.push(PhaseFunction::torus(torus));
        }
        if !atoms.is_empty() {
            let b = sys.surface().as_bolza().expect("backend checked");
            parts.push(PhaseFunction::atoms(b, atoms)?);
        }
        Ok(match parts.len() {
            0 => PhaseFunction::zero(),
            1 => parts.pop().expect("one part"),
            _ => PhaseFunction::linear(parts.into_iter().map(|p| (C64::new(1.0, 0.0), p)).collect()),
        })
    }

    pub fn from_json(sys: &MagneticSystem, s: &str) -> Result<Self> {
        let file: FunctionFile = serde_json::from_str(s)?;
        Self::from_file(sys, &file)
    }
}
