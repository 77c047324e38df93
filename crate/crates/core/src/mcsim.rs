//! Event-level Monte Carlo of the four-intensity protocol.
//!
//! Each pulse draws an intensity, Alice's and Bob's bases, a Poisson photon
//! number `n`, and a click outcome. Given `n`, a signal click happens with
//! probability `1 - (1 - eta)^n`; otherwise a dark click with `2 p_dc`.
//! Signal clicks err with `e_mis + p_dc` (misalignment plus a coincident
//! dark count in the wrong detector), dark-only clicks err half the time,
//! and every click spawns an after-pulse with `p_ap` that carries a random
//! bit. Averaged over `n` these rates reproduce [`crate::channel`] exactly.
//!
//! [`simulate`] walks pulses one by one. [`simulate_aggregated`] draws the
//! same joint distribution through sequential binomial splits and is what
//! [`validate_bounds`] uses for large trial counts.
//!
//! Randomness comes from ChaCha8 seeded with a 64-bit seed; trial `i` of a
//! batch uses stream `i`, so trials are independent and reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, Confidence};
use crate::channel::transmittance;
use crate::params::{Basis, ObservedCounts, SecurityParams, SourceConfig, SystemParams};

/// Photon numbers at or above this share the last histogram bin.
pub const HISTOGRAM_BINS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Intensity {
    Mu,
    V1,
    V2,
    Omega,
}

impl Intensity {
    pub const ALL: [Intensity; 4] = [
        Intensity::Mu,
        Intensity::V1,
        Intensity::V2,
        Intensity::Omega,
    ];

    fn index(self) -> usize {
        self as usize
    }

    fn mean(self, cfg: &SourceConfig) -> f64 {
        match self {
            Intensity::Mu => cfg.mu,
            Intensity::V1 => cfg.v1,
            Intensity::V2 => cfg.v2,
            Intensity::Omega => cfg.omega,
        }
    }

    fn probability(self, cfg: &SourceConfig) -> f64 {
        match self {
            Intensity::Mu => cfg.p_mu,
            Intensity::V1 => cfg.p_v1,
            Intensity::V2 => cfg.p_v2,
            Intensity::Omega => cfg.p_omega,
        }
    }

    fn p_alice(self, cfg: &SourceConfig, basis: Basis) -> f64 {
        let pz = match self {
            Intensity::Mu | Intensity::V1 => 1.0,
            Intensity::V2 => 0.0,
            Intensity::Omega => cfg.p_z_given_omega,
        };
        match basis {
            Basis::Z => pz,
            Basis::X => 1.0 - pz,
        }
    }
}

/// The five sifted classes (basis, intensity) the protocol observes.
pub const SIFTED_CLASSES: [(Basis, Intensity); 5] = [
    (Basis::Z, Intensity::Mu),
    (Basis::Z, Intensity::V1),
    (Basis::Z, Intensity::Omega),
    (Basis::X, Intensity::V2),
    (Basis::X, Intensity::Omega),
];

fn class_index(basis: Basis, intensity: Intensity) -> Option<usize> {
    SIFTED_CLASSES.iter().position(|&c| c == (basis, intensity))
}

/// Ground truth for one sifted class, binned by photon number.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassTally {
    /// Pulses of this class sent with matching bases.
    pub sent: u64,
    pub sent_by_photons: Vec<u64>,
    pub detections_by_photons: Vec<u64>,
    pub errors_by_photons: Vec<u64>,
}

impl ClassTally {
    fn new() -> Self {
        Self {
            sent: 0,
            sent_by_photons: vec![0; HISTOGRAM_BINS],
            detections_by_photons: vec![0; HISTOGRAM_BINS],
            errors_by_photons: vec![0; HISTOGRAM_BINS],
        }
    }

    pub fn detections(&self) -> u64 {
        self.detections_by_photons.iter().sum()
    }

    pub fn errors(&self) -> u64 {
        self.errors_by_photons.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthTally {
    /// Indexed like [`SIFTED_CLASSES`].
    pub classes: Vec<ClassTally>,
    /// Pulses sent per intensity (mu, v1, v2, omega), sifted or not.
    pub sent_by_intensity: [u64; 4],
}

impl TruthTally {
    fn new() -> Self {
        Self {
            classes: (0..SIFTED_CLASSES.len())
                .map(|_| ClassTally::new())
                .collect(),
            sent_by_intensity: [0; 4],
        }
    }

    fn sum_basis(&self, basis: Basis, f: impl Fn(&ClassTally) -> u64) -> u64 {
        SIFTED_CLASSES
            .iter()
            .zip(&self.classes)
            .filter(|((b, _), _)| *b == basis)
            .map(|(_, c)| f(c))
            .sum()
    }

    /// Sifted Z detections from vacuum pulses.
    pub fn s_z0(&self) -> u64 {
        self.sum_basis(Basis::Z, |c| c.detections_by_photons[0])
    }

    pub fn s_z1(&self) -> u64 {
        self.sum_basis(Basis::Z, |c| c.detections_by_photons[1])
    }

    pub fn s_x1(&self) -> u64 {
        self.sum_basis(Basis::X, |c| c.detections_by_photons[1])
    }

    /// Bit errors among single-photon X detections.
    pub fn v_x1(&self) -> u64 {
        self.sum_basis(Basis::X, |c| c.errors_by_photons[1])
    }

    /// Bit errors among single-photon Z detections. With identical detectors
    /// in both bases this is the phase-error proxy the bound targets.
    pub fn c_z1(&self) -> u64 {
        self.sum_basis(Basis::Z, |c| c.errors_by_photons[1])
    }

    pub fn observed(&self) -> ObservedCounts {
        let n = |i: usize| self.classes[i].detections() as f64;
        let m = |i: usize| self.classes[i].errors() as f64;
        ObservedCounts {
            n_z_mu: n(0),
            n_z_v1: n(1),
            n_z_omega: n(2),
            m_z_mu: m(0),
            m_z_v1: m(1),
            m_z_omega: m(2),
            n_x_v2: n(3),
            n_x_omega: n(4),
            m_x_v2: m(3),
            m_x_omega: m(4),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub counts: ObservedCounts,
    pub truth: TruthTally,
}

impl Simulation {
    fn from_truth(truth: TruthTally) -> Self {
        Self {
            counts: truth.observed(),
            truth,
        }
    }
}

/// Generator for trial `stream` of the batch identified by `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Poisson CDF up to the point where it rounds to one.
fn poisson_cdf(mean: f64) -> Vec<f64> {
    let mut cdf = Vec::new();
    let mut p = (-mean).exp();
    let mut acc = 0.0;
    let mut n = 0u32;
    loop {
        acc += p;
        cdf.push(acc.min(1.0));
        n += 1;
        p *= mean / n as f64;
        if acc >= 1.0 - 1e-17 || p == 0.0 || n > 200 {
            break;
        }
    }
    *cdf.last_mut().unwrap() = 1.0;
    cdf
}

struct PulseModel {
    eta: f64,
    p_dc: f64,
    p_ap: f64,
    e_mis: f64,
}

impl PulseModel {
    fn new(sys: &SystemParams) -> Self {
        Self {
            eta: transmittance(sys),
            p_dc: sys.p_dc,
            p_ap: sys.p_ap,
            e_mis: sys.e_mis,
        }
    }

    /// `(P(signal click), P(dark-only click))` for `n` photons.
    fn click(&self, n: usize) -> (f64, f64) {
        let miss = (1.0 - self.eta).powi(n as i32);
        (1.0 - miss, miss * 2.0 * self.p_dc)
    }
}

/// Simulates `sys.n_pulses` pulses one at a time.
pub fn simulate(cfg: &SourceConfig, sys: &SystemParams, seed: u64) -> Simulation {
    simulate_with(cfg, sys, &mut trial_rng(seed, 0))
}

pub fn simulate_with<R: Rng>(cfg: &SourceConfig, sys: &SystemParams, rng: &mut R) -> Simulation {
    let model = PulseModel::new(sys);
    let mut truth = TruthTally::new();
    let mut cumulative = [0.0; 4];
    let mut acc = 0.0;
    for (slot, k) in cumulative.iter_mut().zip(Intensity::ALL) {
        acc += k.probability(cfg);
        *slot = acc;
    }
    let cdfs: Vec<Vec<f64>> = Intensity::ALL
        .iter()
        .map(|k| poisson_cdf(k.mean(cfg)))
        .collect();
    let clicks: Vec<(f64, f64)> = (0..HISTOGRAM_BINS + 64).map(|n| model.click(n)).collect();

    for _ in 0..sys.n_pulses {
        let u: f64 = rng.random::<f64>() * acc;
        let slot = cumulative.iter().position(|&c| u < c).unwrap_or(3);
        let intensity = Intensity::ALL[slot];
        truth.sent_by_intensity[slot] += 1;

        let alice = if rng.random::<f64>() < intensity.p_alice(cfg, Basis::Z) {
            Basis::Z
        } else {
            Basis::X
        };
        let bob = if rng.random::<f64>() < cfg.p_z_bob {
            Basis::Z
        } else {
            Basis::X
        };
        if alice != bob {
            continue;
        }
        let class = class_index(alice, intensity).expect("sifted class");

        let u: f64 = rng.random();
        let cdf = &cdfs[slot];
        let photons = cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1);
        let bin = photons.min(HISTOGRAM_BINS - 1);
        let tally = &mut truth.classes[class];
        tally.sent += 1;
        tally.sent_by_photons[bin] += 1;

        let (signal, dark) = if photons < clicks.len() {
            clicks[photons]
        } else {
            model.click(photons)
        };
        let u: f64 = rng.random();
        let error_prob = if u < signal {
            model.e_mis + model.p_dc
        } else if u < signal + dark {
            0.5
        } else {
            continue;
        };
        let mut detections = 1;
        let mut errors = u64::from(rng.random::<f64>() < error_prob);
        if rng.random::<f64>() < model.p_ap {
            detections += 1;
            errors += u64::from(rng.random::<f64>() < 0.5);
        }
        tally.detections_by_photons[bin] += detections;
        tally.errors_by_photons[bin] += errors;
    }
    Simulation::from_truth(truth)
}

fn binomial<R: Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

/// Same distribution as [`simulate`], drawn class by class with binomial
/// splits instead of per-pulse draws.
pub fn simulate_aggregated(
    cfg: &SourceConfig,
    sys: &SystemParams,
    seed: u64,
    stream: u64,
) -> Simulation {
    simulate_aggregated_with(cfg, sys, &mut trial_rng(seed, stream))
}

pub fn simulate_aggregated_with<R: Rng>(
    cfg: &SourceConfig,
    sys: &SystemParams,
    rng: &mut R,
) -> Simulation {
    let model = PulseModel::new(sys);
    let mut truth = TruthTally::new();

    let mut remaining = sys.n_pulses;
    let mut mass = 1.0;
    for (i, k) in Intensity::ALL.iter().enumerate() {
        let p = k.probability(cfg);
        let count = if i == 3 {
            remaining
        } else {
            binomial(rng, remaining, (p / mass).min(1.0))
        };
        truth.sent_by_intensity[k.index()] = count;
        remaining -= count;
        mass -= p;
    }

    let mut omega_in_z = 0;
    for (class, &(basis, intensity)) in SIFTED_CLASSES.iter().enumerate() {
        let sent = truth.sent_by_intensity[intensity.index()];
        let alice = match (intensity, basis) {
            (Intensity::Omega, Basis::Z) => {
                omega_in_z = binomial(rng, sent, cfg.p_z_given_omega);
                omega_in_z
            }
            (Intensity::Omega, Basis::X) => sent - omega_in_z,
            _ => sent,
        };
        let p_bob = match basis {
            Basis::Z => cfg.p_z_bob,
            Basis::X => cfg.p_x_bob(),
        };
        let matched = binomial(rng, alice, p_bob);
        fill_class(
            &mut truth.classes[class],
            matched,
            intensity.mean(cfg),
            &model,
            rng,
        );
    }
    Simulation::from_truth(truth)
}

fn fill_class<R: Rng>(
    tally: &mut ClassTally,
    pulses: u64,
    mean: f64,
    model: &PulseModel,
    rng: &mut R,
) {
    tally.sent = pulses;
    let mut remaining = pulses;
    let mut tail = 1.0;
    let mut p_n = (-mean).exp();
    let mut n = 0usize;
    while remaining > 0 {
        let count = if tail <= p_n || tail <= 0.0 {
            remaining
        } else {
            binomial(rng, remaining, (p_n / tail).min(1.0))
        };
        remaining -= count;
        tail -= p_n;
        if count > 0 {
            let bin = n.min(HISTOGRAM_BINS - 1);
            let (signal, dark) = model.click(n);
            let signal_clicks = binomial(rng, count, signal);
            let dark_clicks = binomial(
                rng,
                count - signal_clicks,
                dark / (1.0 - signal).max(f64::MIN_POSITIVE),
            );
            let clicks = signal_clicks + dark_clicks;
            let after = binomial(rng, clicks, model.p_ap);
            let errors = binomial(rng, signal_clicks, model.e_mis + model.p_dc)
                + binomial(rng, dark_clicks, 0.5)
                + binomial(rng, after, 0.5);
            tally.sent_by_photons[bin] += count;
            tally.detections_by_photons[bin] += clicks + after;
            tally.errors_by_photons[bin] += errors;
        }
        n += 1;
        p_n *= mean / n as f64;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    SZ0,
    SZ1,
    SX1,
    VX1,
    PhaseError,
}

impl BoundKind {
    pub const ALL: [BoundKind; 5] = [
        BoundKind::SZ0,
        BoundKind::SZ1,
        BoundKind::SX1,
        BoundKind::VX1,
        BoundKind::PhaseError,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::SZ0 => "s_z0_lower",
            BoundKind::SZ1 => "s_z1_lower",
            BoundKind::SX1 => "s_x1_lower",
            BoundKind::VX1 => "v_x1_upper",
            BoundKind::PhaseError => "e1_pz_upper",
        }
    }
}

/// Per-bound violation tallies over a batch of simulated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub trials: u64,
    pub eps_sec: f64,
    /// Trials in which the bound was defined, indexed like [`BoundKind::ALL`].
    pub evaluated: [u64; 5],
    pub violations: [u64; 5],
}

impl ValidationReport {
    pub fn frequency(&self, kind: BoundKind) -> f64 {
        let i = kind as usize;
        if self.evaluated[i] == 0 {
            0.0
        } else {
            self.violations[i] as f64 / self.evaluated[i] as f64
        }
    }

    pub fn max_frequency(&self) -> f64 {
        BoundKind::ALL
            .iter()
            .map(|&k| self.frequency(k))
            .fold(0.0, f64::max)
    }
}

fn check_trial(
    cfg: &SourceConfig,
    sys: &SystemParams,
    sec: &SecurityParams,
    eps_sec: f64,
    seed: u64,
    trial: u64,
) -> ([u64; 5], [u64; 5]) {
    let sim = simulate_aggregated(cfg, sys, seed, trial);
    let report = bounds::evaluate_at(cfg, &sim.counts, sys.n_pulses, sec, eps_sec);
    let t = &sim.truth;
    let mut evaluated = [0u64; 5];
    let mut violations = [0u64; 5];
    if report.diagnostics.invalid_input {
        return (evaluated, violations);
    }
    let mut record = |kind: BoundKind, violated: bool| {
        evaluated[kind as usize] += 1;
        violations[kind as usize] += u64::from(violated);
    };
    record(BoundKind::SZ0, report.s_z0 > t.s_z0() as f64);
    record(BoundKind::SZ1, report.s_z1 > t.s_z1() as f64);
    record(BoundKind::VX1, report.v_x1 < t.v_x1() as f64);
    if !report.diagnostics.s_x1_degenerate {
        record(BoundKind::SX1, report.s_x1 > t.s_x1() as f64);
    }
    if !report.diagnostics.e1_undefined && t.s_z1() > 0 {
        let truth_rate = t.c_z1() as f64 / t.s_z1() as f64;
        record(BoundKind::PhaseError, truth_rate > report.e1_pz);
    }
    (evaluated, violations)
}

/// Simulates `trials` independent runs, evaluates every estimator at the
/// fixed `eps_sec`, and counts how often each bound falls on the wrong side
/// of the simulated ground truth.
pub fn validate_bounds(
    cfg: &SourceConfig,
    sys: &SystemParams,
    sec: &SecurityParams,
    eps_sec: f64,
    trials: u64,
    seed: u64,
) -> ValidationReport {
    let (evaluated, violations) = (0..trials)
        .into_par_iter()
        .map(|trial| check_trial(cfg, sys, sec, eps_sec, seed, trial))
        .reduce(
            || ([0u64; 5], [0u64; 5]),
            |(mut ea, mut va), (eb, vb)| {
                for i in 0..5 {
                    ea[i] += eb[i];
                    va[i] += vb[i];
                }
                (ea, va)
            },
        );
    ValidationReport {
        trials,
        eps_sec,
        evaluated,
        violations,
    }
}

/// Outcome of a direct sampling-without-replacement experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingOracleReport {
    pub trials: u64,
    pub evaluated: u64,
    pub violations: u64,
}

impl SamplingOracleReport {
    pub fn frequency(&self) -> f64 {
        if self.evaluated == 0 {
            0.0
        } else {
            self.violations as f64 / self.evaluated as f64
        }
    }
}

/// A population of `sample + rest` items holds `marked` marked ones; a
/// uniformly random subset of size `sample` is drawn. Counts how often the
/// marked count in the subset falls below
/// `sample * z - 2 * sample * g(sample, rest, z, eps)`, with `z` the marked
/// fraction observed in the rest.
pub fn sampling_oracle(
    sample: u64,
    rest: u64,
    marked: u64,
    eps: f64,
    trials: u64,
    seed: u64,
) -> SamplingOracleReport {
    let dist = Hypergeometric::new(sample + rest, marked, sample).expect("valid population");
    let mut rng = trial_rng(seed, 0);
    let (x, y) = (sample as f64, rest as f64);
    let mut evaluated = 0;
    let mut violations = 0;
    for _ in 0..trials {
        let in_sample = dist.sample(&mut rng);
        let z = (marked - in_sample) as f64 / y;
        let Some(g) = bounds::sampling_deviation(x, y, z, eps) else {
            continue;
        };
        evaluated += 1;
        if (in_sample as f64) < x * z - 2.0 * x * g {
            violations += 1;
        }
    }
    SamplingOracleReport {
        trials,
        evaluated,
        violations,
    }
}

/// `errors` bit errors are spread over `test + key` single-photon events
/// and a uniformly random `test` of them is revealed. Counts how often the
/// error rate on the unrevealed `key` events exceeds the phase-error bound
/// built from the revealed ones at failure probability `eps_per_term`.
pub fn phase_error_oracle(
    test: u64,
    key: u64,
    errors: u64,
    eps_per_term: f64,
    trials: u64,
    seed: u64,
) -> SamplingOracleReport {
    let dist = Hypergeometric::new(test + key, errors, test).expect("valid population");
    let mut rng = trial_rng(seed, 0);
    // one error term, eps_sec = eps_per_term
    let conf = Confidence::new(eps_per_term, 1).expect("eps in (0, 1]");
    let mut evaluated = 0;
    let mut violations = 0;
    for _ in 0..trials {
        let revealed = dist.sample(&mut rng);
        let Some(e1) = bounds::phase_error_rate(test as f64, revealed as f64, key as f64, &conf)
        else {
            continue;
        };
        evaluated += 1;
        let hidden_rate = (errors - revealed) as f64 / key as f64;
        if hidden_rate > e1.value {
            violations += 1;
        }
    }
    SamplingOracleReport {
        trials,
        evaluated,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel;

    fn small_sys() -> SystemParams {
        SystemParams::default()
            .with_length(10.0)
            .with_pulses(200_000)
    }

    #[test]
    fn dark_vacuum_never_clicks() {
        let cfg = SourceConfig {
            mu: 0.0,
            v1: 0.0,
            v2: 0.0,
            omega: 0.0,
            ..SourceConfig::reference_four()
        };
        let sys = SystemParams {
            p_dc: 0.0,
            ..SystemParams::default().with_pulses(1_000_000)
        };
        let sim = simulate(&cfg, &sys, 3);
        assert_eq!(sim.counts, ObservedCounts::default());
        let sim = simulate_aggregated(&cfg, &sys, 3, 0);
        assert_eq!(sim.counts, ObservedCounts::default());
    }

    #[test]
    fn histograms_sum_to_sifted_counts() {
        let cfg = SourceConfig::reference_four();
        for sim in [
            simulate(&cfg, &small_sys(), 1),
            simulate_aggregated(&cfg, &small_sys(), 1, 0),
        ] {
            let c = sim.truth.observed();
            assert_eq!(c, sim.counts);
            for class in &sim.truth.classes {
                assert_eq!(class.sent, class.sent_by_photons.iter().sum::<u64>());
                assert!(class.errors() <= class.detections());
            }
            assert_eq!(
                sim.truth.sent_by_intensity.iter().sum::<u64>(),
                small_sys().n_pulses
            );
            assert!(sim.truth.s_z1() as f64 <= sim.counts.n_z());
            assert!(sim.truth.v_x1() <= sim.truth.s_x1());
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let cfg = SourceConfig::reference_four();
        assert_eq!(
            simulate(&cfg, &small_sys(), 9),
            simulate(&cfg, &small_sys(), 9)
        );
        assert_ne!(
            simulate(&cfg, &small_sys(), 9).counts,
            simulate(&cfg, &small_sys(), 10).counts
        );
        assert_eq!(
            simulate_aggregated(&cfg, &small_sys(), 9, 4),
            simulate_aggregated(&cfg, &small_sys(), 9, 4)
        );
    }

    #[test]
    fn intensity_marginals_within_three_sigma() {
        let cfg = SourceConfig::reference_four();
        let sys = small_sys().with_pulses(1_000_000);
        let sim = simulate(&cfg, &sys, 21);
        let n = sys.n_pulses as f64;
        for k in Intensity::ALL {
            let p = k.probability(&cfg);
            let sigma = (n * p * (1.0 - p)).sqrt();
            let got = sim.truth.sent_by_intensity[k.index()] as f64;
            assert!(
                (got - n * p).abs() < 3.0 * sigma,
                "{k:?}: {got} vs {}",
                n * p
            );
        }
    }

    #[test]
    fn both_samplers_agree_with_channel_means() {
        // averages over a handful of runs; the acceptance suite does the 3-sigma sweep
        let cfg = SourceConfig::reference_four();
        let sys = SystemParams::default()
            .with_length(0.0)
            .with_pulses(2_000_000);
        let expected = channel::expected_counts(&cfg, &sys);
        let a = simulate(&cfg, &sys, 5).counts;
        let b = simulate_aggregated(&cfg, &sys, 5, 0).counts;
        for (e, got) in [
            (expected.n_z_mu, a.n_z_mu),
            (expected.n_z_mu, b.n_z_mu),
            (expected.m_z_v1, b.m_z_v1),
        ] {
            assert!((got - e).abs() < 4.0 * e.sqrt(), "{got} vs {e}");
        }
    }

    #[test]
    fn validation_is_deterministic() {
        let cfg = SourceConfig::reference_four();
        let sys = SystemParams::default()
            .with_length(0.0)
            .with_pulses(100_000);
        let sec = SecurityParams::four_intensity();
        let a = validate_bounds(&cfg, &sys, &sec, 1e-3, 50, 11);
        let b = validate_bounds(&cfg, &sys, &sec, 1e-3, 50, 11);
        assert_eq!(a, b);
        assert_eq!(a.trials, 50);
    }

    #[test]
    fn sampling_oracles_rarely_fail() {
        let r = sampling_oracle(2_000, 20_000, 1_100, 1e-3, 20_000, 1);
        assert!(r.evaluated > 19_000);
        assert!(r.frequency() <= 1e-3);
        let r = phase_error_oracle(2_000, 20_000, 660, 1e-3, 20_000, 2);
        assert!(r.frequency() <= 1e-3);
    }
}
