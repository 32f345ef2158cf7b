use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::flow::Mat3;
use crate::error::{Error, Result};
use crate::geometry::{BolzaSurface, PhasePoint, Su11};

type C64 = Complex64;

/// Free homotopy class of a closed curve.
///
/// Torus classes are integer pairs with sign normalized so that `m > 0` or
/// `m = 0, n > 0`. Bolza classes are words in the eight side pairings
/// (`g1..g4` and their inverses `g5..g8`), freely and cyclically reduced
/// and rotated to the lexicographically smallest cyclic shift.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    Torus { m: i64, n: i64 },
    Bolza { word: Vec<u8> },
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn inverse_letter(j: u8) -> u8 {
    (j + 4) % 8
}

impl ClassLabel {
    pub fn torus(m: i64, n: i64) -> Result<Self> {
        if m == 0 && n == 0 {
            return Err(Error::InvalidParameter("class (0, 0) is contractible".into()));
        }
        let (m, n) = if m < 0 || (m == 0 && n < 0) { (-m, -n) } else { (m, n) };
        Ok(ClassLabel::Torus { m, n })
    }

    pub fn bolza(letters: &[u8]) -> Result<Self> {
        if letters.iter().any(|&j| j >= 8) {
            return Err(Error::InvalidParameter("generator letters run over 0..8".into()));
        }
        let mut w: Vec<u8> = Vec::new();
        for &j in letters {
            if w.last() == Some(&inverse_letter(j)) {
                w.pop();
            } else {
                w.push(j);
            }
        }
        while w.len() >= 2 && w[0] == inverse_letter(w[w.len() - 1]) {
            w.remove(0);
            w.pop();
        }
        if w.is_empty() {
            return Err(Error::InvalidParameter("word reduces to the identity (contractible class)".into()));
        }
        let best = (0..w.len())
            .map(|s| w[s..].iter().chain(&w[..s]).copied().collect::<Vec<u8>>())
            .min()
            .expect("nonempty");
        Ok(ClassLabel::Bolza { word: best })
    }

    /// Single side pairing `g_{j+1}`.
    pub fn generator(j: u8) -> Result<Self> {
        Self::bolza(&[j])
    }

    /// Stable text key: `"(m,n)"` or `"g1.g6"`.
    pub fn key(&self) -> String {
        self.to_string()
    }

    /// `gcd(m, n)` for torus classes; word length for Bolza classes.
    pub fn multiplicity(&self) -> usize {
        match self {
            ClassLabel::Torus { m, n } => gcd(*m, *n) as usize,
            ClassLabel::Bolza { word } => word.len(),
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassLabel::Torus { m, n } => write!(f, "({m},{n})"),
            ClassLabel::Bolza { word } => {
                let parts: Vec<String> = word.iter().map(|j| format!("g{}", j + 1)).collect();
                write!(f, "{}", parts.join("."))
            }
        }
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(inner) = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            if parts.len() == 2 {
                let m = parts[0].parse::<i64>();
                let n = parts[1].parse::<i64>();
                if let (Ok(m), Ok(n)) = (m, n) {
                    return ClassLabel::torus(m, n);
                }
            }
            return Err(Error::InvalidParameter(format!("bad torus class {s:?}")));
        }
        let mut letters = Vec::new();
        for part in t.split(['.', ' ']).filter(|p| !p.is_empty()) {
            let mut rest = part;
            while !rest.is_empty() {
                let body = rest
                    .strip_prefix('g')
                    .ok_or_else(|| Error::InvalidParameter(format!("bad word {s:?}: expected g1..g8")))?;
                let digits: String = body.chars().take_while(|c| c.is_ascii_digit()).collect();
                let j: u8 = digits.parse().map_err(|_| Error::InvalidParameter(format!("bad word {s:?}")))?;
                if !(1..=8).contains(&j) {
                    return Err(Error::InvalidParameter(format!("generator g{j} out of range g1..g8")));
                }
                letters.push(j - 1);
                rest = &body[digits.len()..];
            }
        }
        ClassLabel::bolza(&letters)
    }
}

impl Serialize for ClassLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.key())
    }
}

impl<'de> Deserialize<'de> for ClassLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Expands `"g1..g8"` style ranges and comma separated lists of class keys.
pub fn parse_class_list(s: &str) -> Result<Vec<ClassLabel>> {
    let mut items = Vec::new();
    let (mut depth, mut from) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' | ';' if depth == 0 => {
                items.push(&s[from..i]);
                from = i + 1;
            }
            _ => {}
        }
    }
    items.push(&s[from..]);
    let mut out = Vec::new();
    for item in items.into_iter().map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let num = |x: &str| -> Result<u8> {
                x.trim()
                    .strip_prefix('g')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("bad class range {item:?}")))
            };
            let (lo, hi) = (num(a)?, num(b)?);
            if !(1..=8).contains(&lo) || !(lo..=8).contains(&hi) {
                return Err(Error::InvalidParameter(format!("bad class range {item:?}")));
            }
            for j in lo..=hi {
                out.push(ClassLabel::generator(j - 1)?);
            }
        } else {
            out.push(item.parse()?);
        }
    }
    Ok(out)
}

/// Deck transformation of the phase space attached to a class: the lift
/// condition reads `φ_T(s) = D(s)`.
#[derive(Debug, Clone, Copy)]
pub enum Deck {
    Shift { dx: f64, dy: f64 },
    Mobius(Su11<f64>),
}

impl Deck {
    pub fn for_class(class: &ClassLabel, surface: Option<&BolzaSurface>) -> Result<Self> {
        match (class, surface) {
            (ClassLabel::Torus { m, n }, None) => Ok(Deck::Shift { dx: TAU * *m as f64, dy: TAU * *n as f64 }),
            (ClassLabel::Bolza { word }, Some(b)) => {
                let a = b.word(word);
                if a.translation_length() < 1e-8 {
                    return Err(Error::InvalidParameter(format!("class {class} is not hyperbolic")));
                }
                Ok(Deck::Mobius(a))
            }
            _ => Err(Error::BackendMismatch {
                expected: if surface.is_some() { "bolza class".into() } else { "torus class".into() },
                found: class.key(),
            }),
        }
    }

    pub fn apply(&self, p: PhasePoint) -> PhasePoint {
        match self {
            Deck::Shift { dx, dy } => PhasePoint::new(p.x + dx, p.y + dy, p.theta),
            Deck::Mobius(a) => {
                let z = p.base().z();
                let w = a.apply(z);
                PhasePoint::new(w.re, w.im, p.theta + a.angle_shift(z))
            }
        }
    }

    pub fn jacobian(&self, p: PhasePoint) -> Mat3 {
        match self {
            Deck::Shift { .. } => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            Deck::Mobius(a) => {
                let z = p.base().z();
                let d = a.derivative(z);
                let w = a.b.conj() * z + a.a.conj();
                let g: C64 = -2.0 * a.b.conj() / w;
                [[d.re, -d.im, 0.0], [d.im, d.re, 0.0], [g.im, g.re, 1.0]]
            }
        }
    }

    /// Period of the closed geodesic in the class for a flat or hyperbolic
    /// metric.
    pub fn geodesic_length(&self) -> f64 {
        match self {
            Deck::Shift { dx, dy } => dx.hypot(*dy),
            Deck::Mobius(a) => a.translation_length(),
        }
    }
}

/// Start point and direction on the axis of a hyperbolic disk isometry,
/// closest to the origin, moving toward the attracting fixed point.
pub fn axis_seed(a: &Su11<f64>) -> PhasePoint {
    let (ac, b) = (a.a, a.b);
    let two_i_im = ac - ac.conj();
    let disc = (two_i_im * two_i_im + 4.0 * b.norm_sqr()).sqrt();
    let roots = [(two_i_im + disc) / (2.0 * b.conj()), (two_i_im - disc) / (2.0 * b.conj())];
    let attracting = |xi: C64| (b.conj() * xi + ac.conj()).norm() > 1.0;
    let (plus, minus) = if attracting(roots[0]) { (roots[0], roots[1]) } else { (roots[1], roots[0]) };
    let sum = plus + minus;
    if sum.norm() < 1e-12 {
        let d = plus - minus;
        return PhasePoint::new(0.0, 0.0, d.arg());
    }
    let u = sum / sum.norm();
    let cos2a = (plus * minus.conj()).re.clamp(-1.0, 1.0);
    let alpha = 0.5 * cos2a.acos();
    let rho = (1.0 - alpha.sin()) / alpha.cos();
    let z0 = u * rho;
    let i = C64::new(0.0, 1.0);
    let d = if ((i * u) * (plus - z0).conj()).re > 0.0 { i * u } else { -i * u };
    PhasePoint::new(z0.re, z0.im, d.arg())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_sign_normalization() {
        assert_eq!(ClassLabel::torus(-1, 2).unwrap(), ClassLabel::Torus { m: 1, n: -2 });
        assert_eq!(ClassLabel::torus(0, -3).unwrap(), ClassLabel::Torus { m: 0, n: 3 });
        assert!(ClassLabel::torus(0, 0).is_err());
        assert_eq!("(2, -1)".parse::<ClassLabel>().unwrap().key(), "(2,-1)");
    }

    #[test]
    fn word_reduction() {
        assert!(ClassLabel::bolza(&[0, 4]).is_err());
        assert_eq!(ClassLabel::bolza(&[1, 0, 4, 2]).unwrap(), ClassLabel::bolza(&[1, 2]).unwrap());
        // cyclic reduction and rotation
        assert_eq!(ClassLabel::bolza(&[5, 2, 3, 1]).unwrap(), ClassLabel::bolza(&[2, 3]).unwrap());
        assert_eq!(ClassLabel::bolza(&[3, 1]).unwrap().key(), "g2.g4");
        assert_eq!("g2g4".parse::<ClassLabel>().unwrap().key(), "g2.g4");
        assert!("g9".parse::<ClassLabel>().is_err());
    }

    #[test]
    fn class_ranges() {
        let v = parse_class_list("g1..g8").unwrap();
        assert_eq!(v.len(), 8);
        assert_eq!(v[7].key(), "g8");
        let v = parse_class_list("(1,0), (1,1)").unwrap();
        assert_eq!(v.len(), 2);
        assert!(parse_class_list("").unwrap().is_empty());
    }

    #[test]
    fn deck_jacobian_matches_differences() {
        let b = BolzaSurface::new();
        let d = Deck::for_class(&ClassLabel::bolza(&[0, 1]).unwrap(), Some(&b)).unwrap();
        let p = PhasePoint::new(0.1, -0.2, 0.7);
        let j = d.jacobian(p);
        let h = 1e-6;
        for c in 0..2 {
            let mut q1 = p;
            let mut q0 = p;
            if c == 0 {
                q1.x += h;
                q0.x -= h;
            } else {
                q1.y += h;
                q0.y -= h;
            }
            let (a, bb) = (d.apply(q1), d.apply(q0));
            let fd = [(a.x - bb.x) / (2.0 * h), (a.y - bb.y) / (2.0 * h), (a.theta - bb.theta) / (2.0 * h)];
            for r in 0..3 {
                assert!((fd[r] - j[r][c]).abs() < 1e-7, "r {r} c {c}: {} vs {}", fd[r], j[r][c]);
            }
        }
    }

    #[test]
    fn axis_seed_lies_on_axis() {
        let b = BolzaSurface::new();
        for w in [vec![0u8], vec![0, 1], vec![0, 2], vec![1, 6]] {
            let a = b.word(&w);
            let s = axis_seed(&a);
            let z = s.base().z();
            let az = a.apply(z);
            let len = crate::geometry::bolza::disk_distance(z, az);
            assert!((len - a.translation_length()).abs() < 1e-9, "{w:?}");
        }
        let s = axis_seed(&b.generator(0));
        assert!(s.x.abs() < 1e-12 && s.y.abs() < 1e-12);
    }
}
