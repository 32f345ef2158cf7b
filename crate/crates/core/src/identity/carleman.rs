use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{IdentityReport, Tolerance};
use crate::error::{Error, Result};
use crate::fourier::ModeSpectrum;
use crate::geometry::{MagneticSystem, Negativity};
use crate::lse::{ln_factorial, ln_nonneg, log_sum_exp};
use crate::num::Real;
use crate::phase::{PhaseFunction, Quadrature};

/// Default largest `|k|` tabulated.
pub const DEFAULT_K_MAX: usize = 64;

/// Tolerance of the weighted estimate: `left <= right · (1 + 1e-9)`.
pub const CARLEMAN_TOL: f64 = 1e-9;

/// `γ_k² = 8^|k| |k|! e^{|k|σ}`, stored as logarithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlemanWeights<T: Real = f64> {
    sigma: T,
    log_gamma_sq: Vec<T>,
}

/// Smallest log-domain gaps of the three recurrences over `|k| <= k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightCertificate<T> {
    /// `min ln(γ_k² / (4γ_{k-2}²))`, `|k| >= 3`.
    pub two_step: T,
    /// `min ln(γ_k² / (8|k| γ_{k-1}²))`, `|k| >= 2`.
    pub factorial_step: T,
    /// `min ln(γ_k² / (e^σ γ_{k-1}²))`, `|k| >= 1`.
    pub sigma_step: T,
    pub all_finite: bool,
}

impl<T: Real> WeightCertificate<T> {
    /// The first two gaps must be strictly positive, the third nonnegative.
    pub fn holds(&self) -> bool {
        self.all_finite && self.two_step > T::zero() && self.factorial_step > T::zero() && self.sigma_step >= T::zero()
    }
}

impl<T: Real> CarlemanWeights<T> {
    pub fn new(sigma: T, k_max: usize) -> Result<Self> {
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive and finite (got {sigma:?}); at sigma = 0 the step γ_k² > 8|k|γ_(k-1)² is an equality"
            )));
        }
        let ln8 = T::lit(8.0).ln();
        let log_gamma_sq = (0..=k_max)
            .map(|j| T::from_usize_lossy(j) * (ln8 + sigma) + ln_factorial::<T>(j))
            .collect();
        Ok(Self { sigma, log_gamma_sq })
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn k_max(&self) -> usize {
        self.log_gamma_sq.len() - 1
    }

    /// `ln γ_k²`; symmetric in `k`.
    pub fn log_gamma_sq(&self, k: i32) -> T {
        let j = k.unsigned_abs() as usize;
        match self.log_gamma_sq.get(j) {
            Some(v) => *v,
            None => T::from_usize_lossy(j) * (T::lit(8.0).ln() + self.sigma) + ln_factorial::<T>(j),
        }
    }

    pub fn certify(&self) -> WeightCertificate<T> {
        let lg = |j: usize| self.log_gamma_sq[j];
        let km = self.k_max();
        let mut two = T::infinity();
        let mut fac = T::infinity();
        let mut sig = T::infinity();
        for j in 1..=km {
            sig = sig.min(lg(j) - lg(j - 1) - self.sigma);
            if j >= 2 {
                fac = fac.min(lg(j) - lg(j - 1) - (T::lit(8.0) * T::from_usize_lossy(j)).ln());
            }
            if j >= 3 {
                two = two.min(lg(j) - lg(j - 2) - T::lit(4.0).ln());
            }
        }
        WeightCertificate {
            two_step: two,
            factorial_step: fac,
            sigma_step: sig,
            all_finite: self.log_gamma_sq.iter().all(|v| v.is_finite()),
        }
    }
}

/// Per-mode norms used by the weighted estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeRecord {
    pub k: i32,
    pub u_sq: f64,
    pub eta_plus_sq: f64,
    pub eta_minus_sq: f64,
    pub kappa_u_sq: f64,
    /// `‖(Fu)_k‖²`.
    pub fu_sq: f64,
}

impl ModeRecord {
    /// `‖η u_k‖²` for the η that moves toward mode zero.
    pub fn eta_in_sq(&self) -> f64 {
        if self.k < 0 {
            self.eta_plus_sq
        } else {
            self.eta_minus_sq
        }
    }

    /// `‖η u_k‖²` for the η that moves away from mode zero.
    pub fn eta_out_sq(&self) -> f64 {
        if self.k < 0 {
            self.eta_minus_sq
        } else {
            self.eta_plus_sq
        }
    }
}

/// Mode norms of `u` and of `η±u`, `κu`, `Fu`, keyed by mode.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeData {
    pub records: BTreeMap<i32, ModeRecord>,
}

impl ModeData {
    pub fn harvest(sys: &MagneticSystem, quad: &Quadrature, u: &PhaseFunction) -> Result<Self> {
        let ep = u.eta_plus();
        let em = u.eta_minus();
        let ku = PhaseFunction::kappa().mul(u);
        let fu = u.f();
        let s = quad.sample(sys, &[u, &ep, &em, &ku, &fu])?;
        let n: Vec<BTreeMap<i32, f64>> = s.iter().map(|x| quad.mode_norms_sq(x)).collect();
        let get = |m: &BTreeMap<i32, f64>, k: i32| m.get(&k).copied().unwrap_or(0.0);
        let lo = n.iter().flat_map(|m| m.keys().copied()).min().unwrap_or(0) - 1;
        let hi = n.iter().flat_map(|m| m.keys().copied()).max().unwrap_or(0) + 1;
        let mut records = BTreeMap::new();
        for k in lo..=hi {
            let r = ModeRecord {
                k,
                u_sq: get(&n[0], k),
                eta_plus_sq: get(&n[1], k + 1),
                eta_minus_sq: get(&n[2], k - 1),
                kappa_u_sq: get(&n[3], k),
                fu_sq: get(&n[4], k),
            };
            if r.u_sq + r.eta_plus_sq + r.eta_minus_sq + r.kappa_u_sq + r.fu_sq > 0.0 {
                records.insert(k, r);
            }
        }
        Ok(Self { records })
    }

    pub fn get(&self, k: i32) -> ModeRecord {
        self.records.get(&k).copied().unwrap_or(ModeRecord { k, ..Default::default() })
    }

    /// Largest `|k|` with data.
    pub fn reach(&self) -> u32 {
        self.records.keys().map(|k| k.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn spectrum(&self) -> ModeSpectrum {
        ModeSpectrum::from_norms_sq(self.records.iter().map(|(&k, r)| (k, r.u_sq)).collect())
    }

    pub fn fu_spectrum(&self) -> ModeSpectrum {
        ModeSpectrum::from_norms_sq(self.records.iter().map(|(&k, r)| (k, r.fu_sq)).collect())
    }

    /// `ln Σ_{j >= from} γ_j² x_{sj}` over one side `s = ±1`.
    fn weighted(&self, w: &CarlemanWeights, side: i32, from: u32, x: impl Fn(&ModeRecord) -> f64) -> f64 {
        let reach = self.reach();
        log_sum_exp((from..=reach).map(|j| {
            let k = side * j as i32;
            w.log_gamma_sq(k) + ln_nonneg(x(&self.get(k)))
        }))
    }
}

/// One side (`k >= N` or `k <= -N`) of the weighted estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub side: i32,
    pub report: IdentityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlemanReport {
    pub sigma: f64,
    pub n: u32,
    pub a: f64,
    pub positive: TailReport,
    pub negative: TailReport,
    pub pass: bool,
}

impl CarlemanReport {
    /// Larger of the two tail ratios `left / right`.
    pub fn ratio(&self) -> f64 {
        self.positive.report.ratio().max(self.negative.report.ratio())
    }
}

fn tail(data: &ModeData, w: &CarlemanWeights, a: f64, n: u32, side: i32) -> TailReport {
    let left = data.weighted(w, side, n, |r| r.u_sq);
    let right = (2.0 / a).ln() - w.sigma() + data.weighted(w, side, n + 1, |r| r.fu_sq);
    let name = if side > 0 { "carleman_positive" } else { "carleman_negative" };
    TailReport { side, report: IdentityReport::log_at_most(name, left, right, Tolerance::new("carleman", CARLEMAN_TOL)) }
}

/// The weighted estimate from harvested mode norms with given weights.
pub fn estimate_from_data(data: &ModeData, w: &CarlemanWeights, a: f64, n: u32) -> CarlemanReport {
    let positive = tail(data, w, a, n, 1);
    let negative = tail(data, w, a, n, -1);
    let pass = positive.report.pass && negative.report.pass;
    CarlemanReport { sigma: w.sigma(), n, a, positive, negative, pass }
}

fn check_n(n: u32) -> Result<()> {
    if n < 1 {
        return Err(Error::Precondition("tail index N must be at least 1".into()));
    }
    Ok(())
}

/// `Σ_{±k >= N} γ_k²‖u_k‖² <= (2/(a e^σ)) Σ_{±k >= N+1} γ_k²‖(Fu)_k‖²` on
/// both sides, in log-sum-exp arithmetic.
pub fn carleman_estimate(
    sys: &MagneticSystem,
    quad: &Quadrature,
    negativity: &Negativity,
    u: &PhaseFunction,
    sigma: f64,
    n: u32,
) -> Result<CarlemanReport> {
    check_n(n)?;
    let nb = negativity.bounds()?;
    let w = CarlemanWeights::new(sigma, DEFAULT_K_MAX)?;
    let data = ModeData::harvest(sys, quad, u)?;
    Ok(estimate_from_data(&data, &w, nb.a, n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineSide {
    pub side: i32,
    /// Modes where the η± bound through `Fu` fails on the data.
    pub hypothesis_failures: Vec<i32>,
    /// Smallest `ln(γ_j² / (4γ_{j-2}²))` over `j >= N + 2`.
    pub two_step_gap: f64,
    /// Smallest `ln((j γ_j²/2) / (4 j² γ_{j-1}²))` over `j >= N + 1`.
    pub kappa_gap: f64,
    /// `ln Σ (γ_j² − 4γ_{j-2}²)‖η_in u_j‖²`, `j >= N + 2`.
    pub eta_bracket: f64,
    /// `ln Σ (jγ_j²/2 − 4j²γ_{j-1}²)‖κu_j‖²`, `j >= N + 1`.
    pub kappa_bracket: f64,
    /// `ln Σ (j − 1) a γ_j²‖u_j‖²`, `j >= N`.
    pub u_bracket: f64,
    /// `a Σ jγ_j²‖u_j‖² <= 2 Σ γ_{j-1}²‖(Fu)_j‖²`.
    pub telescoped: IdentityReport,
    pub estimate: IdentityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineReport {
    pub sigma: f64,
    pub n: u32,
    pub a: f64,
    pub positive: EngineSide,
    pub negative: EngineSide,
    pub hypotheses_hold: bool,
    pub coefficients_nonnegative: bool,
    pub certified: bool,
}

/// `ln(e^x − e^y)` for `x >= y`.
fn ln_diff(x: f64, y: f64) -> f64 {
    if y == f64::NEG_INFINITY {
        return x;
    }
    x + (-(y - x).exp()).ln_1p()
}

fn engine_side(data: &ModeData, w: &CarlemanWeights, a: f64, n: u32, side: i32, tol: &Tolerance) -> EngineSide {
    let reach = data.reach().max(n + 2);
    let lg = |j: u32| w.log_gamma_sq(j as i32);
    let mut failures = Vec::new();
    for j in n..=reach {
        let k = side * j as i32;
        if !data.gk(k, a, a, tol).through_f.pass {
            failures.push(k);
        }
    }
    let mut two_gap = f64::INFINITY;
    let mut kap_gap = f64::INFINITY;
    let mut eta_terms = Vec::new();
    let mut kap_terms = Vec::new();
    let mut u_terms = Vec::new();
    let mut lhs_terms = Vec::new();
    let mut rhs_terms = Vec::new();
    for j in n..=reach {
        let r = data.get(side * j as i32);
        let jf = j as f64;
        if j >= n + 2 {
            let other = 4f64.ln() + lg(j - 2);
            two_gap = two_gap.min(lg(j) - other);
            if lg(j) > other {
                eta_terms.push(ln_diff(lg(j), other) + ln_nonneg(r.eta_in_sq()));
            }
        }
        if j >= n + 1 {
            let have = lg(j) + (jf / 2.0).ln();
            let other = (4.0 * jf * jf).ln() + lg(j - 1);
            kap_gap = kap_gap.min(have - other);
            if have > other {
                kap_terms.push(ln_diff(have, other) + ln_nonneg(r.kappa_u_sq));
            }
            rhs_terms.push(2f64.ln() + lg(j - 1) + ln_nonneg(r.fu_sq));
        }
        if j >= 2 {
            u_terms.push(((jf - 1.0) * a).ln() + lg(j) + ln_nonneg(r.u_sq));
        }
        lhs_terms.push((a * jf).ln() + lg(j) + ln_nonneg(r.u_sq));
    }
    let telescoped = IdentityReport::log_at_most(
        "carleman_telescoped",
        log_sum_exp(lhs_terms),
        log_sum_exp(rhs_terms),
        Tolerance::new("carleman", CARLEMAN_TOL),
    );
    EngineSide {
        side,
        hypothesis_failures: failures,
        two_step_gap: two_gap,
        kappa_gap: kap_gap,
        eta_bracket: log_sum_exp(eta_terms),
        kappa_bracket: log_sum_exp(kap_terms),
        u_bracket: log_sum_exp(u_terms),
        telescoped,
        estimate: tail(data, w, a, n, side).report,
    }
}

/// Replays the weighted summation on mode norms alone: checks the η±
/// bound through `Fu` on the data, the signs of the bracket coefficients,
/// and the resulting weighted estimate.
pub fn weighted_summation_engine(
    data: &ModeData,
    weights: &CarlemanWeights,
    a: f64,
    n: u32,
    tol: &Tolerance,
) -> Result<EngineReport> {
    check_n(n)?;
    if !(a > 0.0) {
        return Err(Error::InvalidParameter("negativity constant a must be positive".into()));
    }
    let positive = engine_side(data, weights, a, n, 1, tol);
    let negative = engine_side(data, weights, a, n, -1, tol);
    let hypotheses_hold = positive.hypothesis_failures.is_empty() && negative.hypothesis_failures.is_empty();
    let coefficients_nonnegative = [&positive, &negative].iter().all(|s| s.two_step_gap > 0.0 && s.kappa_gap >= 0.0);
    let certified = hypotheses_hold
        && coefficients_nonnegative
        && positive.telescoped.pass
        && negative.telescoped.pass
        && positive.estimate.pass
        && negative.estimate.pass;
    Ok(EngineReport { sigma: weights.sigma(), n, a, positive, negative, hypotheses_hold, coefficients_nonnegative, certified })
}

/// Degree of `v = Fu` and the tail of `u` beyond it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeReduction {
    pub u_degree: u32,
    pub v_degree: u32,
    pub n: u32,
    /// `Σ_{|k| >= N} ‖u_k‖²`.
    pub tail_mass: f64,
    /// `(2/(a e^σ)) Σ_{|k| >= N+1} γ_k²‖v_k‖² / γ_N²`, summed over both sides.
    pub tail_bound: f64,
    pub carleman: CarlemanReport,
    pub pass: bool,
}

pub fn degree_reduction_check(
    sys: &MagneticSystem,
    quad: &Quadrature,
    negativity: &Negativity,
    u: &PhaseFunction,
    sigma: f64,
) -> Result<DegreeReduction> {
    let nb = negativity.bounds()?;
    let w = CarlemanWeights::new(sigma, DEFAULT_K_MAX)?;
    let data = ModeData::harvest(sys, quad, u)?;
    let v_degree = data.fu_spectrum().degree;
    let u_degree = data.spectrum().degree;
    let n = v_degree.max(1);
    let carleman = estimate_from_data(&data, &w, nb.a, n);
    let tail_mass: f64 = data.records.values().filter(|r| r.k.unsigned_abs() >= n).map(|r| r.u_sq).sum();
    let lgn = w.log_gamma_sq(n as i32);
    let tail_bound = [&carleman.positive, &carleman.negative]
        .iter()
        .map(|t| if t.report.right == f64::NEG_INFINITY { 0.0 } else { (t.report.right - lgn).exp() })
        .sum::<f64>();
    let pass = carleman.pass && tail_mass <= tail_bound * (1.0 + CARLEMAN_TOL);
    Ok(DegreeReduction { u_degree, v_degree, n, tail_mass, tail_bound, carleman, pass })
}

/// Two chained weighted estimates on `(y, Fy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub sigma: f64,
    pub n: u32,
    pub a: f64,
    pub b: f64,
    /// `16b² / (a² e^{2σ})`.
    pub constant: f64,
    pub first: CarlemanReport,
    pub second: CarlemanReport,
    /// `Σ_{±k>=N} γ_k²‖y_k‖² <= (4/(a²e^{2σ})) Σ_{±k>=N+2} γ_k²‖(F²y)_k‖²`
    /// per side.
    pub chained: Vec<IdentityReport>,
    pub pass: bool,
}

impl ChainReport {
    pub fn ratio(&self) -> f64 {
        self.chained.iter().map(|r| r.ratio()).fold(0.0, f64::max)
    }
}

/// Smallest `σ` with `16b²/(a²e^{2σ}) <= 1`.
pub fn chain_sigma(a: f64, b: f64) -> f64 {
    (4.0 * b / a).ln().max(f64::MIN_POSITIVE)
}

/// Chains the weighted estimate for `y` at `N` with the one for `Fy` at
/// `N + 1`. With `sigma = None` the smallest admissible `σ` is used.
pub fn contraction_chain(
    sys: &MagneticSystem,
    quad: &Quadrature,
    negativity: &Negativity,
    y: &PhaseFunction,
    n: u32,
    sigma: Option<f64>,
) -> Result<ChainReport> {
    check_n(n)?;
    let nb = negativity.bounds()?;
    let sigma = sigma.unwrap_or_else(|| chain_sigma(nb.a, nb.b));
    let constant = 16.0 * nb.b * nb.b / (nb.a * nb.a * (2.0 * sigma).exp());
    if constant > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "sigma = {sigma} gives chain constant {constant:.6} > 1"
        )));
    }
    let w = CarlemanWeights::new(sigma, DEFAULT_K_MAX)?;
    let d0 = ModeData::harvest(sys, quad, y)?;
    let d1 = ModeData::harvest(sys, quad, &y.f())?;
    let first = estimate_from_data(&d0, &w, nb.a, n);
    let second = estimate_from_data(&d1, &w, nb.a, n + 1);
    let pre = (4.0 / (nb.a * nb.a)).ln() - 2.0 * sigma;
    let chained: Vec<IdentityReport> = [1, -1]
        .iter()
        .map(|&side| {
            let left = d0.weighted(&w, side, n, |r| r.u_sq);
            let right = pre + d1.weighted(&w, side, n + 2, |r| r.fu_sq);
            let name = if side > 0 { "chain_positive" } else { "chain_negative" };
            IdentityReport::log_at_most(name, left, right, Tolerance::new("carleman", CARLEMAN_TOL))
        })
        .collect();
    let pass = first.pass && second.pass && chained.iter().all(|r| r.pass);
    Ok(ChainReport { sigma, n, a: nb.a, b: nb.b, constant, first, second, chained, pass })
}
