//! Compactly supported bumps on the Bolza surface, periodized over the group.
//!
//! An atom of mode `k` contributes to the `k`-th Fourier mode the automorphic
//! sum `Σ_A w · b(d(z, A·c)) · (W̄_A/W_A)^k`, where `A⁻¹ = [[α, β], [β̄, ᾱ]]` and
//! `W_A = β̄z + ᾱ`. The factor makes `Σ_k f_k(z) e^{ikθ}` invariant under the
//! action on directions `θ ↦ θ + arg A'(z)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bolza::{distance_from_origin, BolzaSurface, Su11};
use crate::error::{Error, Result};
use crate::jet::Jet;

type C64 = Complex64;

/// Default profile exponent.
pub const DEFAULT_EXPONENT: u32 = 6;
/// Largest admissible radius.
pub const MAX_RADIUS: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpAtom {
    /// Center in the disk, inside the fundamental octagon.
    pub center: C64,
    /// Hyperbolic support radius.
    pub radius: f64,
    pub mode: i32,
    pub weight: C64,
    #[serde(default = "default_exponent")]
    pub exponent: u32,
}

fn default_exponent() -> u32 {
    DEFAULT_EXPONENT
}

impl BumpAtom {
    pub fn new(center: C64, radius: f64, mode: i32, weight: C64) -> Self {
        Self { center, radius, mode, weight, exponent: DEFAULT_EXPONENT }
    }

    /// The atom whose contribution is the complex conjugate of this one's,
    /// placed in mode `-k`.
    pub fn conjugate(&self) -> Self {
        Self { mode: -self.mode, weight: self.weight.conj(), ..self.clone() }
    }

    fn q_support(&self) -> f64 {
        self.radius.cosh() - 1.0
    }
}

/// `cosh d(z, c) - 1` for disk points.
#[inline]
pub fn cosh_dist_m1(z: C64, c: C64) -> f64 {
    2.0 * (z - c).norm_sqr() / ((1.0 - z.norm_sqr()) * (1.0 - c.norm_sqr()))
}

#[derive(Debug, Clone)]
struct Translate {
    /// Inverse of the translating element.
    inv: Su11<f64>,
    /// Image of the atom center.
    center: C64,
}

/// Atoms together with the group translates that can reach the octagon.
#[derive(Debug, Clone)]
pub struct PreparedAtoms {
    atoms: Vec<BumpAtom>,
    translates: Vec<Vec<Translate>>,
}

impl PreparedAtoms {
    pub fn new(surface: &BolzaSurface, atoms: Vec<BumpAtom>) -> Result<Self> {
        let rf = surface.circumradius();
        let mut translates = Vec::with_capacity(atoms.len());
        for a in &atoms {
            if !(a.radius > 0.0 && a.radius <= MAX_RADIUS) {
                return Err(Error::InvalidParameter(format!(
                    "atom radius {} outside (0, {MAX_RADIUS}]",
                    a.radius
                )));
            }
            if a.exponent < 2 {
                return Err(Error::InvalidParameter("atom profile exponent must be at least 2".into()));
            }
            if !surface.in_fundamental_domain(a.center, 1e-12) {
                return Err(Error::Domain(format!("atom center {} is not in the octagon", a.center)));
            }
            let reach = rf + a.radius + 1e-9;
            if 3.0 * rf + a.radius > surface.element_radius() {
                return Err(Error::Precondition("group element list too short for atom radius".into()));
            }
            let list: Vec<Translate> = surface
                .elements()
                .iter()
                .filter_map(|e| {
                    let c = e.matrix.apply(a.center);
                    (distance_from_origin(c) < reach).then(|| Translate { inv: e.matrix.inverse(), center: c })
                })
                .collect();
            translates.push(list);
        }
        Ok(Self { atoms, translates })
    }

    pub fn atoms(&self) -> &[BumpAtom] {
        &self.atoms
    }

    pub fn modes(&self) -> impl Iterator<Item = i32> + '_ {
        self.atoms.iter().map(|a| a.mode)
    }

    pub fn mode_range(&self) -> Option<(i32, i32)> {
        let lo = self.atoms.iter().map(|a| a.mode).min()?;
        let hi = self.atoms.iter().map(|a| a.mode).max()?;
        Some((lo, hi))
    }

    /// Taylor jets of every present mode at the disk point `z`.
    pub fn mode_jets(&self, surface: &BolzaSurface, z: C64, order: usize) -> BTreeMap<i32, Jet<C64>> {
        let red = surface.reduce(z);
        let g = red.element;
        let trivial = red.steps == 0;
        let g_inv = g.inverse();
        let i = C64::new(0.0, 1.0);
        let zj = Jet::var_x(C64::new(z.re, 0.0), order) + Jet::var_y(C64::new(z.im, 0.0), order) * i;
        let zbj = zj.conj();
        let one = Jet::constant(C64::new(1.0, 0.0), order);
        let inv_one_m_zz = (one - zj * zbj).recip();
        let mut out: BTreeMap<i32, Jet<C64>> = BTreeMap::new();
        for (atom, list) in self.atoms.iter().zip(&self.translates) {
            let q_rho = atom.q_support();
            for t in list {
                if cosh_dist_m1(red.z, t.center) >= q_rho {
                    continue;
                }
                let (inv, c) = if trivial {
                    (t.inv, t.center)
                } else {
                    (t.inv.compose(&g), g_inv.apply(t.center))
                };
                let dz = zj - Jet::constant(c, order);
                let q = (dz * dz.conj()) * inv_one_m_zz * C64::new(2.0 / (1.0 - c.norm_sqr()), 0.0);
                let base = (one - q * C64::new(1.0 / q_rho, 0.0)).powi(atom.exponent as i32);
                let mut term = base * atom.weight;
                if atom.mode != 0 {
                    let w = zj * inv.b.conj() + Jet::constant(inv.a.conj(), order);
                    let ratio = (w.conj() * w.recip()).powi(atom.mode);
                    term = term * ratio;
                }
                let e = out.entry(atom.mode).or_insert_with(|| Jet::zero(order));
                *e += term;
            }
        }
        out
    }

    /// Point values of every present mode.
    pub fn mode_values(&self, surface: &BolzaSurface, z: C64) -> BTreeMap<i32, C64> {
        let red = surface.reduce(z);
        let g = red.element;
        let trivial = red.steps == 0;
        let mut out: BTreeMap<i32, C64> = BTreeMap::new();
        for (atom, list) in self.atoms.iter().zip(&self.translates) {
            let q_rho = atom.q_support();
            for t in list {
                let q = cosh_dist_m1(red.z, t.center);
                if q >= q_rho {
                    continue;
                }
                let mut v = atom.weight * (1.0 - q / q_rho).powi(atom.exponent as i32);
                if atom.mode != 0 {
                    let inv = if trivial { t.inv } else { t.inv.compose(&g) };
                    let w = inv.b.conj() * z + inv.a.conj();
                    v *= (w.conj() / w).powi(atom.mode);
                }
                *out.entry(atom.mode).or_default() += v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surface() -> BolzaSurface {
        BolzaSurface::with_element_radius(9.0)
    }

    fn atoms() -> Vec<BumpAtom> {
        let a = BumpAtom::new(C64::new(0.2, 0.1), 1.2, 2, C64::new(0.7, -0.3));
        let b = BumpAtom::new(C64::new(-0.5, 0.3), 1.4, 0, C64::new(1.0, 0.0));
        vec![a.clone(), a.conjugate(), b]
    }

    #[test]
    fn equivariant_under_side_pairings() {
        let s = surface();
        let p = PreparedAtoms::new(&s, atoms()).unwrap();
        for &z in &s.boundary_samples(3) {
            for g in s.generators() {
                let gz = g.apply(z);
                let phase = g.angle_shift(z);
                let a = p.mode_values(&s, z);
                let b = p.mode_values(&s, gz);
                for (k, v) in &a {
                    let w = b.get(k).copied().unwrap_or_default();
                    let expect = *v * C64::from_polar(1.0, -(*k as f64) * phase);
                    assert!((w - expect).norm() < 1e-10, "k={k} {w} vs {expect}");
                }
            }
        }
    }

    #[test]
    fn conjugate_pair_gives_conjugate_modes() {
        let s = surface();
        let p = PreparedAtoms::new(&s, atoms()).unwrap();
        let z = C64::new(0.1, 0.15);
        let m = p.mode_values(&s, z);
        assert!(m[&2].norm() > 0.1);
        assert!((m[&2].conj() - m[&-2]).norm() < 1e-14);
        assert!(m.get(&0).map_or(true, |v| v.im.abs() < 1e-15));
    }

    #[test]
    fn jets_match_values_and_finite_differences() {
        let s = surface();
        let p = PreparedAtoms::new(&s, atoms()).unwrap();
        let z = C64::new(0.15, 0.05);
        let j = p.mode_jets(&s, z, 2);
        let v = p.mode_values(&s, z);
        let h = 1e-6;
        let vp = p.mode_values(&s, z + h);
        let vm = p.mode_values(&s, z - h);
        for (k, jet) in &j {
            assert!((jet.value() - v[k]).norm() < 1e-13);
            let fd = (vp[k] - vm[k]) / (2.0 * h);
            assert!((jet.dx().value() - fd).norm() < 1e-6, "k={k}");
        }
    }

    #[test]
    fn rejects_bad_atoms() {
        let s = surface();
        let far = BumpAtom::new(C64::new(0.95, 0.0), 1.0, 0, C64::new(1.0, 0.0));
        assert!(PreparedAtoms::new(&s, vec![far]).is_err());
        let wide = BumpAtom::new(C64::new(0.0, 0.0), 2.0, 0, C64::new(1.0, 0.0));
        assert!(PreparedAtoms::new(&s, vec![wide]).is_err());
    }
}
