//! Finite-key estimators for the four-intensity protocol.
//!
//! Everything here is a pure function of its inputs. The chain is
//!
//! ```text
//! counts ──► n±, m± (Hoeffding) ──► s_z0, s_z1 ──► s_x1 (random sampling)
//!                                         │             │
//!                         v_x1 ◄──────────┘             ▼
//!                           └──────────► e1_pz (phase error) ──► l, R
//! ```
//!
//! The secrecy parameter is tied to the key length through `eps_sec = kappa * l`,
//! which [`evaluate`] resolves by fixed-point iteration. [`evaluate_at`] runs
//! the same chain at a caller-chosen `eps_sec`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

use crate::error::{domain, Result};
use crate::params::{Basis, Fluctuations, ObservedCounts, SecurityParams, SourceConfig};

/// Binary Shannon entropy in bits.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("x", x, "[0, 1]"));
    }
    Ok(entropy(x))
}

/// Entropy for an argument already known to be in `[0, 1]`.
pub(crate) fn entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// How a total `eps_sec` is split over the error terms of the analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confidence {
    eps_sec: f64,
    terms: u32,
    fluctuations: Fluctuations,
}

impl Confidence {
    /// Fails when `eps_sec` is not in `(0, terms]`, where the Hoeffding
    /// logarithm `ln(terms / eps_sec)` would turn negative.
    pub fn new(eps_sec: f64, terms: u32) -> Result<Self> {
        if !(eps_sec > 0.0 && eps_sec <= terms as f64) {
            return Err(domain("eps_sec", eps_sec, "(0, error_terms]"));
        }
        Ok(Self {
            eps_sec,
            terms,
            fluctuations: Fluctuations::Finite,
        })
    }

    pub fn with_fluctuations(mut self, fluctuations: Fluctuations) -> Self {
        self.fluctuations = fluctuations;
        self
    }

    pub fn eps_sec(&self) -> f64 {
        self.eps_sec
    }

    pub fn terms(&self) -> u32 {
        self.terms
    }

    pub fn is_finite_size(&self) -> bool {
        self.fluctuations == Fluctuations::Finite
    }

    /// Failure probability assigned to each error term.
    pub fn per_term(&self) -> f64 {
        self.eps_sec / self.terms as f64
    }

    /// Hoeffding deviation `sqrt(total / 2 * ln(terms / eps_sec))`.
    pub fn hoeffding(&self, total: f64) -> f64 {
        if !self.is_finite_size() {
            return 0.0;
        }
        (total.max(0.0) / 2.0 * (self.terms as f64 / self.eps_sec).ln()).sqrt()
    }
}

/// Probability that Alice sends an `photons`-photon pulse in `basis`.
///
/// Z sums over `mu`, `v1` (always Z) and the Z share of `omega`; X sums over
/// `v2` (always X) and the X share of `omega`.
pub fn tau(cfg: &SourceConfig, basis: Basis, photons: u32) -> f64 {
    let term = |k: f64, weight: f64| weight * (-k).exp() * poisson_ratio(k, photons);
    match basis {
        Basis::Z => {
            term(cfg.mu, cfg.p_mu)
                + term(cfg.v1, cfg.p_v1)
                + term(cfg.omega, cfg.p_omega * cfg.p_z_given_omega)
        }
        Basis::X => {
            term(cfg.v2, cfg.p_v2) + term(cfg.omega, cfg.p_omega * (1.0 - cfg.p_z_given_omega))
        }
    }
}

/// `k^i / i!`
pub(crate) fn poisson_ratio(k: f64, i: u32) -> f64 {
    (1..=i).fold(1.0, |acc, j| acc * k / j as f64)
}

/// Hoeffding bound on the count a single intensity would produce if every
/// pulse had been sent with it, scaled by `e^k / (P_k P_{W|k})`.
///
/// `total` is the sum over all intensities of the basis (n_Z or m_X), not
/// the per-intensity count.
pub fn scaled_bound(
    count: f64,
    total: f64,
    intensity: f64,
    p_k: f64,
    p_basis_given_k: f64,
    conf: &Confidence,
    sign: Sign,
) -> f64 {
    intensity.exp() / (p_k * p_basis_given_k) * (count + sign.factor() * conf.hoeffding(total))
}

/// `n^±_{Z,k}` for Z-basis detections.
pub fn n_bound(
    count: f64,
    total: f64,
    intensity: f64,
    p_k: f64,
    p_z_given_k: f64,
    conf: &Confidence,
    sign: Sign,
) -> f64 {
    scaled_bound(count, total, intensity, p_k, p_z_given_k, conf, sign)
}

/// `m^±_{X,k}` for X-basis bit errors.
pub fn m_bound(
    count: f64,
    total: f64,
    intensity: f64,
    p_k: f64,
    p_x_given_k: f64,
    conf: &Confidence,
    sign: Sign,
) -> f64 {
    scaled_bound(count, total, intensity, p_k, p_x_given_k, conf, sign)
}

/// An estimator output together with whether a range clamp fired.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounded {
    pub value: f64,
    pub clamped: bool,
}

impl Bounded {
    fn floor_at_zero(raw: f64) -> Self {
        if raw.is_nan() || raw < 0.0 {
            Self {
                value: 0.0,
                clamped: true,
            }
        } else {
            Self {
                value: raw,
                clamped: false,
            }
        }
    }
}

/// Three decoy-state intensities observed in one basis, with the
/// probability that a pulse carries each intensity *and* that basis.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DecoyTriple {
    pub mu: f64,
    pub v: f64,
    pub w: f64,
    pub p_mu: f64,
    pub p_v: f64,
    pub p_w: f64,
    pub n_mu: f64,
    pub n_v: f64,
    pub n_w: f64,
}

impl DecoyTriple {
    fn total(&self) -> f64 {
        self.n_mu + self.n_v + self.n_w
    }

    fn tau(&self, photons: u32) -> f64 {
        [(self.mu, self.p_mu), (self.v, self.p_v), (self.w, self.p_w)]
            .iter()
            .map(|&(k, p)| p * (-k).exp() * poisson_ratio(k, photons))
            .sum()
    }

    fn bound(&self, count: f64, k: f64, p: f64, conf: &Confidence, sign: Sign) -> f64 {
        scaled_bound(count, self.total(), k, p, 1.0, conf, sign)
    }

    /// Vacuum lower bound from the two weakest intensities. Negative lower
    /// count bounds are floored at zero before use.
    pub fn vacuum(&self, conf: &Confidence) -> Bounded {
        let w_minus = self.bound(self.n_w, self.w, self.p_w, conf, Sign::Minus);
        let v_plus = self.bound(self.n_v, self.v, self.p_v, conf, Sign::Plus);
        let raw = self.tau(0) * (self.v * w_minus.max(0.0) - self.w * v_plus) / (self.v - self.w);
        Bounded::floor_at_zero(raw)
    }

    /// Single-photon lower bound given the vacuum bound `s0`.
    pub fn single(&self, s0: f64, conf: &Confidence) -> Bounded {
        let (mu, v, w) = (self.mu, self.v, self.w);
        let denom = mu * (v - w) - v * v + w * w;
        if denom.is_nan() || denom <= 0.0 {
            return Bounded {
                value: 0.0,
                clamped: true,
            };
        }
        let v_minus = self.bound(self.n_v, v, self.p_v, conf, Sign::Minus);
        let w_plus = self.bound(self.n_w, w, self.p_w, conf, Sign::Plus);
        let mu_plus = self.bound(self.n_mu, mu, self.p_mu, conf, Sign::Plus);
        let multi = (v * v - w * w) / (mu * mu) * (mu_plus - s0 / self.tau(0));
        let raw = self.tau(1) * mu * (v_minus.max(0.0) - w_plus - multi) / denom;
        Bounded::floor_at_zero(raw)
    }
}

fn z_triple(cfg: &SourceConfig, counts: &ObservedCounts) -> DecoyTriple {
    DecoyTriple {
        mu: cfg.mu,
        v: cfg.v1,
        w: cfg.omega,
        p_mu: cfg.p_mu,
        p_v: cfg.p_v1,
        p_w: cfg.p_omega * cfg.p_z_given_omega,
        n_mu: counts.n_z_mu,
        n_v: counts.n_z_v1,
        n_w: counts.n_z_omega,
    }
}

/// Lower bound on the vacuum contribution to the sifted Z detections.
pub fn s_z0_lower(cfg: &SourceConfig, counts: &ObservedCounts, conf: &Confidence) -> Bounded {
    z_triple(cfg, counts).vacuum(conf)
}

/// Lower bound on single-photon sifted Z detections, given the `s_z0` bound.
pub fn s_z1_lower(
    cfg: &SourceConfig,
    counts: &ObservedCounts,
    s_z0: f64,
    conf: &Confidence,
) -> Bounded {
    z_triple(cfg, counts).single(s_z0, conf)
}

/// Correction factor `C(x, y, z)` of the random-sampling bound.
pub fn sampling_correction(x: f64, y: f64, z: f64) -> f64 {
    (1.0 / (8.0 * (x + y)) + 1.0 / (12.0 * y)
        - 1.0 / (12.0 * y * z + 1.0)
        - 1.0 / (12.0 * y * (1.0 - z) + 1.0))
        .exp()
}

/// Deviation `g(x, y, z, eps)` for sampling `x` of `x + y` items without
/// replacement when the observed fraction in the remaining `y` is `z`.
///
/// Returns `None` when `z(1 - z) = 0` or a size is non-positive. A logarithm
/// argument below one (failure prefactor already below `eps`) yields zero.
pub fn sampling_deviation(x: f64, y: f64, z: f64, eps: f64) -> Option<f64> {
    let spread = z * (1.0 - z);
    if !(x > 0.0 && y > 0.0 && spread > 0.0 && eps > 0.0) {
        return None;
    }
    let arg =
        (x + y).sqrt() * sampling_correction(x, y, z) / ((2.0 * PI * x * y * spread).sqrt() * eps);
    let log = arg.ln().max(0.0);
    Some((2.0 * (x + y) * spread / (x * y) * log).sqrt())
}

/// Lower bound on single-photon sifted X detections, inferred from `s_z1` by
/// random sampling over the single-photon pulses of both bases.
pub fn s_x1_lower(cfg: &SourceConfig, n_pulses: u64, s_z1: f64, conf: &Confidence) -> Bounded {
    let degenerate = Bounded {
        value: 0.0,
        clamped: true,
    };
    let n = n_pulses as f64;
    let n1_z = n * tau(cfg, Basis::Z, 1) * cfg.p_z_bob;
    let n1_x = n * tau(cfg, Basis::X, 1) * cfg.p_x_bob();
    if !(s_z1 > 0.0 && n1_z > 0.0 && n1_x > 0.0) {
        return degenerate;
    }
    let z = s_z1 / n1_z;
    if !(z > 0.0 && z < 1.0) {
        return degenerate;
    }
    let deviation = if conf.is_finite_size() {
        match sampling_deviation(n1_x, n1_z, z, conf.per_term()) {
            Some(g) => g,
            None => return degenerate,
        }
    } else {
        0.0
    };
    Bounded::floor_at_zero(n1_x * z - 2.0 * n1_x * deviation)
}

/// Upper bound on bit errors among single-photon X detections. Capped at
/// the total X error count; `clamped` reports that cap.
pub fn v_x1_upper(cfg: &SourceConfig, counts: &ObservedCounts, conf: &Confidence) -> Bounded {
    let m_x = counts.m_x();
    let p_x_omega = 1.0 - cfg.p_z_given_omega;
    let v2_plus = m_bound(counts.m_x_v2, m_x, cfg.v2, cfg.p_v2, 1.0, conf, Sign::Plus);
    let omega_minus = m_bound(
        counts.m_x_omega,
        m_x,
        cfg.omega,
        cfg.p_omega,
        p_x_omega,
        conf,
        Sign::Minus,
    );
    let raw = tau(cfg, Basis::X, 1) * (v2_plus - omega_minus.max(0.0)) / (cfg.v2 - cfg.omega);
    let raw = raw.max(0.0);
    if raw > m_x {
        Bounded {
            value: m_x,
            clamped: true,
        }
    } else {
        Bounded {
            value: raw,
            clamped: false,
        }
    }
}

/// Deviation `gamma(a, b, c, d)` between the error rate `b` seen on `c`
/// samples and the rate on the complementary `d` samples, at failure `a`.
/// Symmetric in `c` and `d`.
pub fn phase_deviation(a: f64, b: f64, c: f64, d: f64) -> Option<f64> {
    let spread = b * (1.0 - b);
    if !(a > 0.0 && spread > 0.0 && c > 0.0 && d > 0.0) {
        return None;
    }
    let log = ((c + d) / (c * d * spread * a * a)).log2().max(0.0);
    Some(((c + d) * spread / (c * d * LN_2) * log).sqrt())
}

/// Phase error rate bound on the single-photon Z events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseError {
    pub value: f64,
    /// `v_x1 / s_x1` was zero and replaced by half an error.
    pub regularized: bool,
    /// Bound exceeded 1/2 and was capped.
    pub capped: bool,
}

/// `e1_pz = v_x1 / s_x1 + gamma(...)`, capped at 1/2. `None` when no
/// single-photon events are bounded in either basis.
pub fn phase_error_rate(s_x1: f64, v_x1: f64, s_z1: f64, conf: &Confidence) -> Option<PhaseError> {
    if !(s_x1 > 0.0 && s_z1 > 0.0 && v_x1 >= 0.0) {
        return None;
    }
    let mut b = v_x1 / s_x1;
    let mut regularized = false;
    if !conf.is_finite_size() {
        let capped = b > 0.5;
        return Some(PhaseError {
            value: b.min(0.5),
            regularized,
            capped,
        });
    }
    if b == 0.0 {
        b = 1.0 / (2.0 * s_x1);
        regularized = true;
    }
    if b >= 0.5 {
        return Some(PhaseError {
            value: 0.5,
            regularized,
            capped: true,
        });
    }
    let gamma = phase_deviation(conf.per_term(), b, s_x1, s_z1)?;
    let raw = b + gamma;
    Some(PhaseError {
        value: raw.min(0.5),
        regularized,
        capped: raw > 0.5,
    })
}

/// Error-correction leakage `f * n_z * H(e_z)`.
pub fn lambda_ec(n_z: f64, e_z: f64, f_ec: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&e_z) {
        return Err(domain("e_z", e_z, "[0, 1/2]"));
    }
    Ok(f_ec * n_z * entropy(e_z))
}

/// Unfloored key length; may be negative.
pub fn key_length_real(
    s_z0: f64,
    s_z1: f64,
    e1_pz: f64,
    lambda_ec: f64,
    eps_sec: f64,
    eps_cor: f64,
    terms: u32,
) -> f64 {
    s_z0 + s_z1 * (1.0 - entropy(e1_pz.clamp(0.0, 1.0)))
        - lambda_ec
        - 6.0 * (terms as f64 / eps_sec).log2()
        - (2.0 / eps_cor).log2()
}

/// Secret key length in bits, floored and clamped at zero.
pub fn key_length(
    s_z0: f64,
    s_z1: f64,
    e1_pz: f64,
    lambda_ec: f64,
    eps_sec: f64,
    eps_cor: f64,
    terms: u32,
) -> u64 {
    let raw = key_length_real(s_z0, s_z1, e1_pz, lambda_ec, eps_sec, eps_cor, terms);
    if raw.is_finite() && raw > 0.0 {
        raw.floor() as u64
    } else {
        0
    }
}

/// Which estimator clamps or degeneracies fired during an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub invalid_input: bool,
    pub s_z0_clamped: bool,
    pub s_z1_clamped: bool,
    pub s_x1_degenerate: bool,
    pub v_x1_capped: bool,
    pub e1_regularized: bool,
    pub e1_capped: bool,
    pub e1_undefined: bool,
    pub not_converged: bool,
}

impl Diagnostics {
    /// Short `|`-separated list of raised flags, empty when none.
    pub fn summary(&self) -> String {
        let flags = [
            (self.invalid_input, "invalid_input"),
            (self.s_z0_clamped, "s_z0_clamped"),
            (self.s_z1_clamped, "s_z1_clamped"),
            (self.s_x1_degenerate, "s_x1_degenerate"),
            (self.v_x1_capped, "v_x1_capped"),
            (self.e1_regularized, "e1_regularized"),
            (self.e1_capped, "e1_capped"),
            (self.e1_undefined, "e1_undefined"),
            (self.not_converged, "not_converged"),
        ];
        flags
            .iter()
            .filter(|(on, _)| *on)
            .map(|(_, name)| *name)
            .collect::<Vec<_>>()
            .join("|")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRateReport {
    pub s_z0: f64,
    pub s_z1: f64,
    pub s_x1: f64,
    pub v_x1: f64,
    pub e1_pz: f64,
    pub lambda_ec: f64,
    /// Secret key length in bits.
    pub l: u64,
    /// `l` before flooring, at the final `eps_sec`; negative when no key.
    pub l_real: f64,
    /// `l / N`
    pub rate: f64,
    /// `eps_sec` the estimators were evaluated at.
    pub eps_sec: f64,
    pub iterations: u32,
    pub feasible: bool,
    pub diagnostics: Diagnostics,
}

impl KeyRateReport {
    pub(crate) fn infeasible(diagnostics: Diagnostics) -> Self {
        Self {
            s_z0: 0.0,
            s_z1: 0.0,
            s_x1: 0.0,
            v_x1: 0.0,
            e1_pz: 0.5,
            lambda_ec: 0.0,
            l: 0,
            l_real: f64::NEG_INFINITY,
            rate: 0.0,
            eps_sec: 0.0,
            iterations: 0,
            feasible: false,
            diagnostics,
        }
    }
}

/// Estimator outputs at one `eps_sec`, shared with the baseline protocol.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stage {
    pub s_z0: f64,
    pub s_z1: f64,
    pub s_x1: f64,
    pub v_x1: f64,
    pub e1_pz: f64,
    pub lambda_ec: f64,
    pub diagnostics: Diagnostics,
}

impl Stage {
    fn usable(&self) -> bool {
        !(self.diagnostics.e1_undefined || self.diagnostics.invalid_input) && self.s_z1 > 0.0
    }

    fn key_real(&self, eps_sec: f64, sec: &SecurityParams) -> f64 {
        if !self.usable() {
            return f64::NEG_INFINITY;
        }
        key_length_real(
            self.s_z0,
            self.s_z1,
            self.e1_pz,
            self.lambda_ec,
            eps_sec,
            sec.eps_cor,
            sec.error_terms,
        )
    }

    pub(crate) fn report(
        &self,
        eps_sec: f64,
        n_pulses: u64,
        sec: &SecurityParams,
        iterations: u32,
    ) -> KeyRateReport {
        let l_real = self.key_real(eps_sec, sec);
        let l = if l_real.is_finite() && l_real > 0.0 {
            l_real.floor() as u64
        } else {
            0
        };
        KeyRateReport {
            s_z0: self.s_z0,
            s_z1: self.s_z1,
            s_x1: self.s_x1,
            v_x1: self.v_x1,
            e1_pz: self.e1_pz,
            lambda_ec: self.lambda_ec,
            l,
            l_real,
            rate: l as f64 / n_pulses as f64,
            eps_sec,
            iterations,
            feasible: self.usable(),
            diagnostics: self.diagnostics,
        }
    }
}

pub(crate) const MAX_FIXED_POINT_ITERATIONS: u32 = 50;

/// Resolves `eps_sec = kappa * l`, starting from `kappa * N * 1e-3` and
/// iterating `l <- l(kappa * l)` until successive lengths differ by at most
/// one bit. `l = 0` is a fixed point by itself.
pub(crate) fn solve_fixed_point(
    n_pulses: u64,
    sec: &SecurityParams,
    stage_at: impl Fn(f64) -> Stage,
) -> KeyRateReport {
    let terms = sec.error_terms as f64;
    let clamp_eps = |eps: f64| eps.min(terms);
    let mut eps = clamp_eps(sec.kappa * n_pulses as f64 * 1e-3);
    let mut prev: Option<u64> = None;
    for it in 1..=MAX_FIXED_POINT_ITERATIONS {
        let stage = stage_at(eps);
        let report = stage.report(eps, n_pulses, sec, it);
        if !report.feasible || report.l == 0 {
            return report;
        }
        if let Some(p) = prev {
            if report.l.abs_diff(p) <= 1 {
                return report;
            }
        }
        prev = Some(report.l);
        eps = clamp_eps(sec.kappa * report.l as f64);
    }
    let mut d = stage_at(eps).diagnostics;
    d.not_converged = true;
    KeyRateReport::infeasible(d)
}

/// Real-valued variant of [`solve_fixed_point`] without the floor, used as
/// a smooth optimizer objective. Returns the key length in bits, negative
/// when the estimators give no key, `-inf` when they are undefined.
pub(crate) fn solve_fixed_point_real(
    n_pulses: u64,
    sec: &SecurityParams,
    stage_at: impl Fn(f64) -> Stage,
) -> f64 {
    let terms = sec.error_terms as f64;
    let mut eps = (sec.kappa * n_pulses as f64 * 1e-3).min(terms);
    let mut prev = f64::NAN;
    for _ in 0..MAX_FIXED_POINT_ITERATIONS {
        let l = stage_at(eps).key_real(eps, sec);
        if !l.is_finite() || l <= 1.0 {
            return l;
        }
        if (l - prev).abs() <= 1e-6 * l.max(1.0) {
            return l;
        }
        prev = l;
        eps = (sec.kappa * l).min(terms);
    }
    prev
}

fn stage(
    cfg: &SourceConfig,
    counts: &ObservedCounts,
    n_pulses: u64,
    sec: &SecurityParams,
    eps_sec: f64,
) -> Stage {
    let mut d = Diagnostics::default();
    let conf = match Confidence::new(eps_sec, sec.error_terms) {
        Ok(c) => c.with_fluctuations(sec.fluctuations),
        Err(_) => {
            d.invalid_input = true;
            return Stage {
                s_z0: 0.0,
                s_z1: 0.0,
                s_x1: 0.0,
                v_x1: 0.0,
                e1_pz: 0.5,
                lambda_ec: 0.0,
                diagnostics: d,
            };
        }
    };
    let s_z0 = s_z0_lower(cfg, counts, &conf);
    let s_z1 = s_z1_lower(cfg, counts, s_z0.value, &conf);
    let s_x1 = s_x1_lower(cfg, n_pulses, s_z1.value, &conf);
    let v_x1 = v_x1_upper(cfg, counts, &conf);
    d.s_z0_clamped = s_z0.clamped;
    d.s_z1_clamped = s_z1.clamped;
    d.s_x1_degenerate = s_x1.clamped;
    d.v_x1_capped = v_x1.clamped;
    let e1 = match phase_error_rate(s_x1.value, v_x1.value, s_z1.value, &conf) {
        Some(e) => {
            d.e1_regularized = e.regularized;
            d.e1_capped = e.capped;
            e.value
        }
        None => {
            d.e1_undefined = true;
            0.5
        }
    };
    // e_z <= 1/2 holds for any physical channel; cap so a pathological
    // count vector cannot make the leakage term shrink.
    let lambda = lambda_ec(counts.n_z(), counts.e_z().min(0.5), sec.f_ec).unwrap_or(f64::INFINITY);
    Stage {
        s_z0: s_z0.value,
        s_z1: s_z1.value,
        s_x1: s_x1.value,
        v_x1: v_x1.value,
        e1_pz: e1,
        lambda_ec: lambda,
        diagnostics: d,
    }
}

fn inputs_valid(cfg: &SourceConfig, counts: &ObservedCounts, sec: &SecurityParams) -> bool {
    cfg.validate().is_ok() && counts.validate().is_ok() && sec.validate().is_ok()
}

/// Full pipeline with `eps_sec = kappa * l` resolved self-consistently.
pub fn evaluate(
    cfg: &SourceConfig,
    counts: &ObservedCounts,
    n_pulses: u64,
    sec: &SecurityParams,
) -> KeyRateReport {
    if !inputs_valid(cfg, counts, sec) || n_pulses == 0 {
        return KeyRateReport::infeasible(Diagnostics {
            invalid_input: true,
            ..Default::default()
        });
    }
    solve_fixed_point(n_pulses, sec, |eps| stage(cfg, counts, n_pulses, sec, eps))
}

/// Full pipeline at a fixed `eps_sec` (no self-consistency with `l`).
pub fn evaluate_at(
    cfg: &SourceConfig,
    counts: &ObservedCounts,
    n_pulses: u64,
    sec: &SecurityParams,
    eps_sec: f64,
) -> KeyRateReport {
    if !inputs_valid(cfg, counts, sec) || n_pulses == 0 {
        return KeyRateReport::infeasible(Diagnostics {
            invalid_input: true,
            ..Default::default()
        });
    }
    stage(cfg, counts, n_pulses, sec, eps_sec).report(eps_sec, n_pulses, sec, 1)
}

/// Unfloored key length at the self-consistent `eps_sec`; the optimizer's
/// objective.
pub fn key_length_smooth(
    cfg: &SourceConfig,
    counts: &ObservedCounts,
    n_pulses: u64,
    sec: &SecurityParams,
) -> f64 {
    if !inputs_valid(cfg, counts, sec) || n_pulses == 0 {
        return f64::NEG_INFINITY;
    }
    solve_fixed_point_real(n_pulses, sec, |eps| stage(cfg, counts, n_pulses, sec, eps))
}
