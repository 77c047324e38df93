//! Source-parameter optimization.
//!
//! The key length is maximized over intensities, intensity probabilities and
//! the Z-basis probability, with `omega` held fixed. Every search runs in an
//! unconstrained coordinate system where any point maps to a valid source:
//!
//! - `v1 = omega + e^a`, `mu = v1 + omega + e^b`, `v2 = omega + e^c`
//! - intensity probabilities are a softmax with the `omega` logit pinned at 0
//! - `P_Z` is a logistic
//!
//! Nelder-Mead is started from a scrambled Halton design. The design is a
//! prefix sequence, so asking for more restarts only adds starting points
//! and never makes the result worse. The objective is the real-valued key
//! length (no floor), which keeps the surface continuous.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline3::{evaluate3, key_length_smooth3};
use crate::bounds::{evaluate, key_length_smooth, KeyRateReport};
use crate::channel::{expected_counts, expected_counts3};
use crate::mcsim::trial_rng;
use crate::params::{SecurityParams, SourceConfig, SourceConfig3, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Three,
    Four,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Three => "three",
            Protocol::Four => "four",
        }
    }

    pub fn security(self) -> SecurityParams {
        match self {
            Protocol::Three => SecurityParams::three_intensity(),
            Protocol::Four => SecurityParams::four_intensity(),
        }
    }

    fn dims(self) -> usize {
        match self {
            Protocol::Three => 5,
            Protocol::Four => 7,
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A source configuration of either protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "lowercase")]
pub enum Source {
    Three(SourceConfig3),
    Four(SourceConfig),
}

impl Source {
    pub fn protocol(&self) -> Protocol {
        match self {
            Source::Three(_) => Protocol::Three,
            Source::Four(_) => Protocol::Four,
        }
    }

    pub fn omega(&self) -> f64 {
        match self {
            Source::Three(c) => c.omega,
            Source::Four(c) => c.omega,
        }
    }

    pub fn p_z(&self) -> f64 {
        match self {
            Source::Three(c) => c.p_z_alice,
            Source::Four(c) => c.p_z_bob,
        }
    }

    /// Exact key-rate report from channel-model counts.
    pub fn evaluate(&self, sys: &SystemParams, sec: &SecurityParams) -> KeyRateReport {
        match self {
            Source::Three(c) => evaluate3(c, &expected_counts3(c, sys), sys.n_pulses, sec),
            Source::Four(c) => evaluate(c, &expected_counts(c, sys), sys.n_pulses, sec),
        }
    }

    /// Real-valued key length used as the search objective.
    pub fn objective(&self, sys: &SystemParams, sec: &SecurityParams) -> f64 {
        match self {
            Source::Three(c) => key_length_smooth3(c, &expected_counts3(c, sys), sys.n_pulses, sec),
            Source::Four(c) => key_length_smooth(c, &expected_counts(c, sys), sys.n_pulses, sec),
        }
    }

    /// Named parameters in a fixed order.
    pub fn named_parameters(&self) -> Vec<(&'static str, f64)> {
        match self {
            Source::Three(c) => vec![
                ("mu", c.mu),
                ("v", c.v),
                ("omega", c.omega),
                ("p_mu", c.p_mu),
                ("p_v", c.p_v),
                ("p_omega", c.p_omega),
                ("p_z", c.p_z_alice),
            ],
            Source::Four(c) => vec![
                ("mu", c.mu),
                ("v1", c.v1),
                ("v2", c.v2),
                ("omega", c.omega),
                ("p_mu", c.p_mu),
                ("p_v1", c.p_v1),
                ("p_v2", c.p_v2),
                ("p_omega", c.p_omega),
                ("p_z", c.p_z_bob),
            ],
        }
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.named_parameters()
            .into_iter()
            .map(|(_, v)| v)
            .collect()
    }

    /// `name=value` pairs separated by `;`.
    pub fn describe(&self) -> String {
        self.named_parameters()
            .iter()
            .map(|(k, v)| format!("{k}={v:e}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    fn encode(&self) -> Vec<f64> {
        let logit = |p: f64| (p / (1.0 - p)).ln();
        match self {
            Source::Three(c) => vec![
                (c.v - c.omega).ln(),
                (c.mu - c.v - c.omega).ln(),
                (c.p_mu / c.p_omega).ln(),
                (c.p_v / c.p_omega).ln(),
                logit(c.p_z_alice),
            ],
            Source::Four(c) => vec![
                (c.v1 - c.omega).ln(),
                (c.mu - c.v1 - c.omega).ln(),
                (c.v2 - c.omega).ln(),
                (c.p_mu / c.p_omega).ln(),
                (c.p_v1 / c.p_omega).ln(),
                (c.p_v2 / c.p_omega).ln(),
                logit(c.p_z_bob),
            ],
        }
    }

    fn decode(protocol: Protocol, omega: f64, x: &[f64]) -> Source {
        let logistic = |t: f64| 1.0 / (1.0 + (-t).exp());
        match protocol {
            Protocol::Three => {
                let v = omega + x[0].exp();
                let mu = v + omega + x[1].exp();
                let p = softmax(&[x[2], x[3], 0.0]);
                Source::Three(SourceConfig3::from_free(
                    mu,
                    v,
                    omega,
                    p[0],
                    p[1],
                    logistic(x[4]),
                ))
            }
            Protocol::Four => {
                let v1 = omega + x[0].exp();
                let mu = v1 + omega + x[1].exp();
                let v2 = omega + x[2].exp();
                let p = softmax(&[x[3], x[4], x[5], 0.0]);
                let mut cfg =
                    SourceConfig::from_free(mu, v1, v2, omega, p[0], p[1], p[2], logistic(x[6]));
                cfg.p_omega = p[3];
                Source::Four(cfg)
            }
        }
    }

    fn valid(&self) -> bool {
        match self {
            Source::Three(c) => c.validate().is_ok(),
            Source::Four(c) => c.validate().is_ok(),
        }
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = e.iter().sum();
    e.iter().map(|v| v / sum).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub max_evaluations: usize,
    /// Stop once the simplex spread in objective falls below this many bits.
    pub f_tol: f64,
    /// Edge length of the starting simplex in search coordinates.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evaluations: 3000,
            f_tol: 1e-4,
            initial_step: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` with the standard Nelder-Mead moves. Non-finite values
/// count as `+inf`.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, start: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let n = start.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += opts.initial_step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p)).collect();
    let mut evaluations = n + 1;
    let mut converged = false;

    while evaluations < opts.max_evaluations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        if values[0].is_finite() && spread.abs() <= opts.f_tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(1.0);
        let fr = eval(&reflected);
        evaluations += 1;
        if fr < values[0] {
            let expanded = along(2.0);
            let fe = eval(&expanded);
            evaluations += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let p = along(0.5);
            let v = eval(&p);
            (p, v)
        } else {
            let p = along(-0.5);
            let v = eval(&p);
            (p, v)
        };
        evaluations += 1;
        if fc < fr.min(values[n]) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = best
                .iter()
                .zip(&simplex[i])
                .map(|(b, p)| b + 0.5 * (p - b))
                .collect();
            values[i] = eval(&simplex[i]);
        }
        evaluations += n;
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        evaluations,
        converged,
    }
}

const PRIMES: [u32; 7] = [2, 3, 5, 7, 11, 13, 17];

fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while index > 0 {
        out += (index % b) as f64 * inv;
        index /= b;
        inv /= base as f64;
    }
    out
}

/// Point `index` of a Halton sequence in `dims` dimensions, shifted modulo
/// one by `shift`.
pub fn halton(index: u64, dims: usize, shift: &[f64]) -> Vec<f64> {
    (0..dims)
        .map(|d| (radical_inverse(index, PRIMES[d]) + shift[d]).fract())
        .collect()
}

/// Maps a point of the unit cube to a starting source.
fn start_point(protocol: Protocol, omega: f64, u: &[f64]) -> Source {
    match protocol {
        Protocol::Three => {
            let mu = 0.15 + 0.75 * u[0];
            let v = omega + (mu - 2.0 * omega) * (0.1 + 0.75 * u[1]);
            let w = [0.1 + u[2], 0.1 + u[3], 0.25];
            let s: f64 = w.iter().sum();
            Source::Three(SourceConfig3::from_free(
                mu,
                v,
                omega,
                w[0] / s,
                w[1] / s,
                0.5 + 0.45 * u[4],
            ))
        }
        Protocol::Four => {
            let mu = 0.15 + 0.75 * u[0];
            let v1 = omega + (mu - 2.0 * omega) * (0.1 + 0.75 * u[1]);
            let v2 = 0.05 + 0.6 * u[2];
            let w = [0.1 + u[3], 0.1 + u[4], 0.05 + 0.5 * u[5], 0.25];
            let s: f64 = w.iter().sum();
            let mut cfg = SourceConfig::from_free(
                mu,
                v1,
                v2,
                omega,
                w[0] / s,
                w[1] / s,
                w[2] / s,
                0.5 + 0.45 * u[6],
            );
            cfg.p_omega = w[3] / s;
            Source::Four(cfg)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptProblem {
    pub protocol: Protocol,
    pub sys: SystemParams,
    pub sec: SecurityParams,
    pub omega: f64,
    pub restarts: usize,
    pub seed: u64,
    pub nelder_mead: NelderMeadOptions,
}

impl OptProblem {
    /// Defaults: `omega = 2e-4`, 20 restarts, seed 0.
    pub fn new(protocol: Protocol, sys: SystemParams) -> Self {
        Self {
            protocol,
            sys,
            sec: protocol.security(),
            omega: 2e-4,
            restarts: 20,
            seed: 0,
            nelder_mead: NelderMeadOptions::default(),
        }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn at_distance(mut self, length_km: f64) -> Self {
        self.sys = self.sys.with_length(length_km);
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let src = Source::decode(self.protocol, self.omega, x);
        if !src.valid() {
            return f64::INFINITY;
        }
        -src.objective(&self.sys, &self.sec)
    }

    fn shift(&self) -> Vec<f64> {
        let mut rng = trial_rng(self.seed, u64::MAX);
        (0..self.protocol.dims())
            .map(|_| rng.random::<f64>())
            .collect()
    }

    /// Starting points: the warm starts first, then the Halton design.
    fn starts(&self, warm: &[Source]) -> Vec<Vec<f64>> {
        let shift = self.shift();
        let mut out: Vec<Vec<f64>> = warm
            .iter()
            .filter(|s| s.protocol() == self.protocol)
            .map(|s| match *s {
                Source::Three(c) => Source::Three(SourceConfig3 {
                    omega: self.omega,
                    ..c
                }),
                Source::Four(c) => Source::Four(SourceConfig {
                    omega: self.omega,
                    ..c
                }),
            })
            .filter(|s| s.valid())
            .map(|s| s.encode())
            .collect();
        for r in 0..self.restarts {
            let u = halton(r as u64 + 1, self.protocol.dims(), &shift);
            out.push(start_point(self.protocol, self.omega, &u).encode());
        }
        out
    }

    fn search(&self, start: &[f64]) -> Minimum {
        let first = nelder_mead(|x| self.objective(x), start, &self.nelder_mead);
        // one restart from the optimum shakes NM out of a collapsed simplex
        let second = nelder_mead(|x| self.objective(x), &first.x, &self.nelder_mead);
        Minimum {
            evaluations: first.evaluations + second.evaluations,
            ..if second.value <= first.value {
                second
            } else {
                first
            }
        }
    }

    pub fn solve(&self) -> OptResult {
        self.solve_from(&[])
    }

    /// Like [`OptProblem::solve`], also starting from each of `warm`.
    pub fn solve_from(&self, warm: &[Source]) -> OptResult {
        let starts = self.starts(warm);
        let runs: Vec<Minimum> = starts.par_iter().map(|s| self.search(s)).collect();
        // max objective; equal objectives go to the lexicographically smaller source
        let key = |m: &Minimum| Source::decode(self.protocol, self.omega, &m.x).parameters();
        let best = (0..runs.len())
            .reduce(|a, b| match runs[b].value.total_cmp(&runs[a].value) {
                std::cmp::Ordering::Less => b,
                std::cmp::Ordering::Greater => a,
                std::cmp::Ordering::Equal => {
                    let (ka, kb) = (key(&runs[a]), key(&runs[b]));
                    if kb
                        .iter()
                        .zip(&ka)
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        == Some(std::cmp::Ordering::Less)
                    {
                        b
                    } else {
                        a
                    }
                }
            })
            .unwrap_or(0);
        let source = Source::decode(self.protocol, self.omega, &runs[best].x);
        let report = source.evaluate(&self.sys, &self.sec);
        OptResult {
            source,
            objective: -runs[best].value,
            report,
            evaluations: runs.iter().map(|m| m.evaluations).sum(),
            converged: runs[best].converged,
            start_objectives: runs.iter().map(|m| -m.value).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub source: Source,
    /// Real-valued key length at the optimum.
    pub objective: f64,
    pub report: KeyRateReport,
    pub evaluations: usize,
    pub converged: bool,
    /// Best objective reached from each start, in start order.
    pub start_objectives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub distance_km: f64,
    pub omega: f64,
    pub result: OptResult,
}

/// Optimizes at every `(distance, omega)` pair. Along each axis the previous
/// optimum is added as a warm start. Output is ordered by omega, then
/// distance.
pub fn scan(template: &OptProblem, distances: &[f64], omegas: &[f64]) -> Vec<ScanPoint> {
    let mut out = Vec::with_capacity(distances.len() * omegas.len());
    let mut previous_row: Vec<Option<Source>> = vec![None; distances.len()];
    for &omega in omegas {
        let mut previous: Option<Source> = None;
        for (i, &distance) in distances.iter().enumerate() {
            let problem = OptProblem {
                sys: template.sys.with_length(distance),
                ..*template
            }
            .with_omega(omega);
            let warm: Vec<Source> = previous
                .iter()
                .chain(previous_row[i].iter())
                .copied()
                .collect();
            let result = problem.solve_from(&warm);
            previous = Some(result.source);
            previous_row[i] = Some(result.source);
            out.push(ScanPoint {
                distance_km: distance,
                omega,
                result,
            });
        }
    }
    out
}
