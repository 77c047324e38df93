//! Batch front end behind the `decoy-qkd` binary.
//!
//! Every subcommand produces a CSV table and, optionally, a JSON manifest
//! recording the inputs. [`execute`] returns both in memory; [`run`] writes
//! them out. Reals are printed in shortest round-trip form, rows are sorted
//! by `(protocol, distance, omega)`, and nothing time-dependent is recorded,
//! so identical inputs give byte-identical files.
//!
//! Config files hold `key = value` lines with `#` comments. Source keys may
//! carry a `four.` or `three.` prefix to target one protocol; unprefixed
//! keys apply to both.
//!
//! ```text
//! # system
//! p_dc = 6e-7
//! pulses = 1e9
//! # source
//! four.mu = 0.47
//! three.mu = 0.551
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bounds::KeyRateReport;
use crate::error::{Error, Result};
use crate::mcsim::{validate_bounds, BoundKind};
use crate::optimizer::{scan, OptProblem, Protocol, Source};
use crate::params::{Fluctuations, SecurityParams, SourceConfig, SourceConfig3, SystemParams};

#[derive(Debug, Clone, Parser)]
#[command(
    name = "decoy-qkd",
    version,
    about = "Finite-key rates for decoy-state BB84"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Key rate at the configured source parameters
    Evaluate(EvaluateArgs),
    /// Optimize source parameters at one distance
    Optimize(OptimizeArgs),
    /// Optimize over a distance grid and optionally an omega grid
    Scan(ScanArgs),
    /// Monte Carlo check of every estimator against simulated ground truth
    McValidate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolChoice {
    Three,
    Four,
    Both,
}

impl ProtocolChoice {
    fn protocols(self) -> Vec<Protocol> {
        match self {
            ProtocolChoice::Three => vec![Protocol::Three],
            ProtocolChoice::Four => vec![Protocol::Four],
            ProtocolChoice::Both => vec![Protocol::Three, Protocol::Four],
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// `key = value` config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ProtocolChoice::Both)]
    pub protocol: ProtocolChoice,
    /// Pulses sent, e.g. 1e9
    #[arg(long, value_parser = parse_count)]
    pub pulses: Option<u64>,
    /// CSV destination (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON manifest destination
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Fiber length in km [default: 100, or distance_km from the config]
    #[arg(long)]
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Fiber length in km [default: 100, or distance_km from the config]
    #[arg(long)]
    pub distance: Option<f64>,
    /// Weakest decoy intensity, held fixed
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `start:stop:step`, a comma list, or one value
    #[arg(long, default_value = "0:100:10")]
    pub distances: String,
    /// `start:stop:log` (4 points per decade), `start:stop:logN`, a comma
    /// list, or one value
    #[arg(long)]
    pub omega: Option<String>,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Fiber length in km [default: 0]
    #[arg(long)]
    pub distance: Option<f64>,
    #[arg(long, value_parser = parse_count, default_value = "1e4")]
    pub trials: u64,
    /// Fixed secrecy parameter the estimators are evaluated at
    #[arg(long, default_value_t = 1e-3)]
    pub eps_sec: f64,
}

/// Parses a positive integer written plainly or in scientific notation.
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("not a non-negative integer: {s}"))
    }
}

fn parse_real(s: &str) -> Result<f64> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("not a number: {s:?}")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Config(format!("not finite: {s:?}")))
    }
}

fn list_or_single(spec: &str) -> Option<Result<Vec<f64>>> {
    if spec.contains(':') {
        None
    } else {
        Some(spec.split(',').map(parse_real).collect())
    }
}

/// `start:stop:step` with both ends included, a comma list, or one value.
pub fn parse_linear_grid(spec: &str) -> Result<Vec<f64>> {
    if let Some(v) = list_or_single(spec) {
        return v;
    }
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, step] = parts[..] else {
        return Err(Error::Config(format!(
            "grid {spec:?} is not start:stop:step"
        )));
    };
    let (a, b, step) = (parse_real(a)?, parse_real(b)?, parse_real(step)?);
    if step <= 0.0 || b < a {
        return Err(Error::Config(format!(
            "grid {spec:?} needs stop >= start and step > 0"
        )));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + step * i as f64).collect())
}

/// `start:stop:log` or `start:stop:logN`: `N` points per decade (default 4),
/// both ends included. Comma lists and single values pass through.
pub fn parse_log_grid(spec: &str) -> Result<Vec<f64>> {
    if let Some(v) = list_or_single(spec) {
        return v;
    }
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, kind] = parts[..] else {
        return Err(Error::Config(format!(
            "grid {spec:?} is not start:stop:log[N]"
        )));
    };
    let Some(per_decade) = kind.strip_prefix("log") else {
        return Err(Error::Config(format!(
            "grid {spec:?} must end in log or logN"
        )));
    };
    let per_decade = if per_decade.is_empty() {
        4
    } else {
        parse_count(per_decade).map_err(Error::Config)?
    };
    let (a, b) = (parse_real(a)?, parse_real(b)?);
    if !(a > 0.0 && b >= a && per_decade > 0) {
        return Err(Error::Config(format!(
            "grid {spec:?} needs 0 < start <= stop"
        )));
    }
    let steps = ((b / a).log10() * per_decade as f64).round().max(0.0) as usize;
    if steps == 0 {
        return Ok(vec![a]);
    }
    let (la, lb) = (a.log10(), b.log10());
    Ok((0..=steps)
        .map(|i| match i {
            0 => a,
            i if i == steps => b,
            i => 10f64.powf(la + (lb - la) * i as f64 / steps as f64),
        })
        .collect())
}

/// Everything a config file can set. Defaults are the reference system
/// and the 100 km optimal sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub sys: SystemParams,
    pub distance_km: Option<f64>,
    pub eps_cor: f64,
    pub kappa: f64,
    pub f_ec: f64,
    pub fluctuations: Fluctuations,
    pub four: SourceConfig,
    pub three: SourceConfig3,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sec = SecurityParams::four_intensity();
        Self {
            sys: SystemParams::default(),
            distance_km: None,
            eps_cor: sec.eps_cor,
            kappa: sec.kappa,
            f_ec: sec.f_ec,
            fluctuations: sec.fluctuations,
            four: SourceConfig::reference_four(),
            three: SourceConfig3::reference_three(),
        }
    }
}

impl RunConfig {
    pub fn security(&self, protocol: Protocol) -> SecurityParams {
        SecurityParams {
            eps_cor: self.eps_cor,
            kappa: self.kappa,
            f_ec: self.f_ec,
            fluctuations: self.fluctuations,
            ..protocol.security()
        }
    }

    pub fn source(&self, protocol: Protocol) -> Source {
        match protocol {
            Protocol::Three => Source::Three(self.three),
            Protocol::Four => Source::Four(self.four),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            cfg.set(key, value).map_err(|e| match e {
                Error::Config(msg) => err(msg),
                other => err(other.to_string()),
            })?;
        }
        cfg.four.p_omega = 1.0 - cfg.four.p_mu - cfg.four.p_v1 - cfg.four.p_v2;
        cfg.three.p_omega = 1.0 - cfg.three.p_mu - cfg.three.p_v;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let (scope, name) = match key.split_once('.') {
            Some((s @ ("four" | "three"), n)) => (Some(s), n),
            Some(_) => return Err(Error::Config(format!("unknown key {key:?}"))),
            None => (None, key),
        };
        let four = scope != Some("three");
        let three = scope != Some("four");
        let source_key = [
            "mu", "v1", "v2", "v", "omega", "p_mu", "p_v1", "p_v2", "p_v", "p_z",
        ]
        .contains(&name);
        if scope.is_some() && !source_key {
            return Err(Error::Config(format!(
                "{key:?}: only source keys take a protocol prefix"
            )));
        }
        match name {
            "fluctuations" => {
                self.fluctuations = match value {
                    "finite" => Fluctuations::Finite,
                    "asymptotic" => Fluctuations::Asymptotic,
                    _ => {
                        return Err(Error::Config(format!(
                            "fluctuations must be finite or asymptotic, got {value:?}"
                        )))
                    }
                };
                return Ok(());
            }
            "pulses" => {
                self.sys.n_pulses = parse_count(value).map_err(Error::Config)?;
                return Ok(());
            }
            _ => {}
        }
        let x = parse_real(value)?;
        match name {
            "p_dc" => self.sys.p_dc = x,
            "p_ap" => self.sys.p_ap = x,
            "e_mis" => self.sys.e_mis = x,
            "eta_b" => self.sys.eta_b = x,
            "alpha" => self.sys.alpha = x,
            "distance_km" => self.distance_km = Some(x),
            "eps_cor" => self.eps_cor = x,
            "kappa" => self.kappa = x,
            "f_ec" => self.f_ec = x,
            "mu" | "omega" | "p_mu" | "p_z" => {
                if four {
                    match name {
                        "mu" => self.four.mu = x,
                        "omega" => self.four.omega = x,
                        "p_mu" => self.four.p_mu = x,
                        _ => {
                            self.four.p_z_bob = x;
                            self.four.p_z_given_omega = x;
                        }
                    }
                }
                if three {
                    match name {
                        "mu" => self.three.mu = x,
                        "omega" => self.three.omega = x,
                        "p_mu" => self.three.p_mu = x,
                        _ => {
                            self.three.p_z_alice = x;
                            self.three.p_z_bob = x;
                        }
                    }
                }
            }
            "v1" | "v2" | "p_v1" | "p_v2" if four => match name {
                "v1" => self.four.v1 = x,
                "v2" => self.four.v2 = x,
                "p_v1" => self.four.p_v1 = x,
                _ => self.four.p_v2 = x,
            },
            "v" | "p_v" if three => match name {
                "v" => self.three.v = x,
                _ => self.three.p_v = x,
            },
            "v1" | "v2" | "p_v1" | "p_v2" | "v" | "p_v" => {
                return Err(Error::Config(format!(
                    "{key:?} does not belong to that protocol"
                )))
            }
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub distance_km: f64,
    pub protocol: Protocol,
    pub source: Source,
    pub report: KeyRateReport,
}

pub const CSV_HEADER: [&str; 19] = [
    "distance_km",
    "protocol",
    "omega",
    "rate",
    "key_length",
    "mu",
    "v1",
    "v2",
    "v",
    "p_mu",
    "p_v1",
    "p_v2",
    "p_v",
    "p_omega",
    "p_z",
    "e1_pz",
    "s_z1",
    "feasible",
    "flags",
];

fn real(x: f64) -> String {
    format!("{x:e}")
}

impl Row {
    fn record(&self) -> Vec<String> {
        let params = self.source.named_parameters();
        let get = |k: &str| {
            params
                .iter()
                .find(|(n, _)| *n == k)
                .map(|&(_, v)| real(v))
                .unwrap_or_default()
        };
        let mut out = vec![
            format!("{}", self.distance_km),
            self.protocol.name().to_string(),
            real(self.source.omega()),
            real(self.report.rate),
            self.report.l.to_string(),
        ];
        out.extend(
            [
                "mu", "v1", "v2", "v", "p_mu", "p_v1", "p_v2", "p_v", "p_omega", "p_z",
            ]
            .map(get),
        );
        out.extend([
            real(self.report.e1_pz),
            real(self.report.s_z1),
            self.report.feasible.to_string(),
            self.report.diagnostics.summary(),
        ]);
        out
    }
}

/// Sorts by `(protocol, distance, omega)` and renders RFC 4180 CSV.
pub fn rows_to_csv(rows: &mut [Row]) -> Result<String> {
    rows.sort_by(|a, b| {
        a.protocol
            .cmp(&b.protocol)
            .then(a.distance_km.total_cmp(&b.distance_km))
            .then(a.source.omega().total_cmp(&b.source.omega()))
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for row in rows.iter() {
        w.write_record(row.record())?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: String,
    pub manifest: serde_json::Value,
}

fn load_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(n) = common.pulses {
        cfg.sys.n_pulses = n;
    }
    Ok(cfg)
}

fn check_distance(d: f64) -> Result<f64> {
    if d.is_finite() && d >= 0.0 {
        Ok(d)
    } else {
        Err(Error::Config(format!("distance must be >= 0 km, got {d}")))
    }
}

fn base_manifest(command: &str, common: &CommonArgs, cfg: &RunConfig) -> serde_json::Value {
    let protocols = common.protocol.protocols();
    let security: serde_json::Map<String, serde_json::Value> = protocols
        .iter()
        .map(|p| {
            (
                p.name().to_string(),
                serde_json::to_value(cfg.security(*p)).expect("serializable"),
            )
        })
        .collect();
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "protocols": protocols.iter().map(|p| p.name()).collect::<Vec<_>>(),
        "system": cfg.sys,
        "security": security,
        "seed": common.seed,
        "config": common.config.as_ref().map(|p| p.display().to_string()),
        "float_format": "shortest round-trip, scientific",
    })
}

fn extend(manifest: &mut serde_json::Value, extra: serde_json::Value) {
    if let (Some(m), serde_json::Value::Object(e)) = (manifest.as_object_mut(), extra) {
        m.extend(e);
    }
}

fn validate_source(source: &Source) -> Result<()> {
    match source {
        Source::Three(c) => c.validate(),
        Source::Four(c) => c.validate(),
    }
}

/// Runs a subcommand and returns its CSV and manifest.
pub fn execute(cli: &Cli) -> Result<RunOutput> {
    match &cli.command {
        Command::Evaluate(a) => {
            let cfg = load_config(&a.common)?;
            cfg.sys.validate()?;
            let distance = check_distance(a.distance.or(cfg.distance_km).unwrap_or(100.0))?;
            let sys = cfg.sys.with_length(distance);
            let mut rows = Vec::new();
            for protocol in a.common.protocol.protocols() {
                let source = cfg.source(protocol);
                validate_source(&source)?;
                let report = source.evaluate(&sys, &cfg.security(protocol));
                rows.push(Row {
                    distance_km: distance,
                    protocol,
                    source,
                    report,
                });
            }
            let mut manifest = base_manifest("evaluate", &a.common, &cfg);
            let sources: Vec<_> = rows.iter().map(|r| r.source).collect();
            extend(
                &mut manifest,
                json!({ "distance_km": distance, "sources": sources }),
            );
            Ok(RunOutput {
                csv: rows_to_csv(&mut rows)?,
                manifest,
            })
        }
        Command::Optimize(a) => {
            let cfg = load_config(&a.common)?;
            cfg.sys.validate()?;
            let distance = check_distance(a.distance.or(cfg.distance_km).unwrap_or(100.0))?;
            let mut rows = Vec::new();
            for protocol in a.common.protocol.protocols() {
                let omega = a.omega.unwrap_or(cfg.source(protocol).omega());
                let problem = problem(&cfg, protocol, a.restarts, a.common.seed)
                    .with_omega(omega)
                    .at_distance(distance);
                let r = problem.solve();
                rows.push(Row {
                    distance_km: distance,
                    protocol,
                    source: r.source,
                    report: r.report,
                });
            }
            let mut manifest = base_manifest("optimize", &a.common, &cfg);
            extend(
                &mut manifest,
                json!({ "distance_km": distance, "restarts": a.restarts }),
            );
            Ok(RunOutput {
                csv: rows_to_csv(&mut rows)?,
                manifest,
            })
        }
        Command::Scan(a) => {
            let cfg = load_config(&a.common)?;
            cfg.sys.validate()?;
            let distances = parse_linear_grid(&a.distances)?;
            for &d in &distances {
                check_distance(d)?;
            }
            let mut rows = Vec::new();
            let mut omega_grids = serde_json::Map::new();
            for protocol in a.common.protocol.protocols() {
                let omegas = match &a.omega {
                    Some(spec) => parse_log_grid(spec)?,
                    None => vec![cfg.source(protocol).omega()],
                };
                if omegas.iter().any(|&w| w.is_nan() || w < 0.0) {
                    return Err(Error::Config("omega must be >= 0".into()));
                }
                omega_grids.insert(protocol.name().into(), json!(omegas));
                let template = problem(&cfg, protocol, a.restarts, a.common.seed);
                for p in scan(&template, &distances, &omegas) {
                    rows.push(Row {
                        distance_km: p.distance_km,
                        protocol,
                        source: p.result.source,
                        report: p.result.report,
                    });
                }
            }
            let mut manifest = base_manifest("scan", &a.common, &cfg);
            extend(
                &mut manifest,
                json!({ "distances_km": distances, "omegas": omega_grids, "restarts": a.restarts }),
            );
            Ok(RunOutput {
                csv: rows_to_csv(&mut rows)?,
                manifest,
            })
        }
        Command::McValidate(a) => {
            let mut cfg = load_config(&a.common)?;
            if a.common.pulses.is_none() {
                cfg.sys.n_pulses = 1_000_000;
            }
            if a.common.protocol != ProtocolChoice::Four {
                return Err(Error::Config(
                    "mc-validate simulates the four-intensity protocol; pass --protocol four"
                        .into(),
                ));
            }
            cfg.sys.validate()?;
            cfg.four.validate()?;
            let distance = check_distance(a.distance.or(cfg.distance_km).unwrap_or(0.0))?;
            if !(a.eps_sec > 0.0 && a.eps_sec < 1.0) {
                return Err(Error::Config(format!(
                    "eps_sec must lie in (0, 1), got {}",
                    a.eps_sec
                )));
            }
            let sys = cfg.sys.with_length(distance);
            let sec = cfg.security(Protocol::Four);
            let report = validate_bounds(&cfg.four, &sys, &sec, a.eps_sec, a.trials, a.common.seed);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "bound",
                "trials",
                "evaluated",
                "violations",
                "frequency",
                "eps_sec",
                "pass",
            ])?;
            for kind in BoundKind::ALL {
                let i = kind as usize;
                let freq = report.frequency(kind);
                w.write_record([
                    kind.name().to_string(),
                    report.trials.to_string(),
                    report.evaluated[i].to_string(),
                    report.violations[i].to_string(),
                    real(freq),
                    real(a.eps_sec),
                    (freq <= a.eps_sec).to_string(),
                ])?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            let mut manifest = base_manifest("mc-validate", &a.common, &cfg);
            extend(
                &mut manifest,
                json!({
                    "distance_km": distance,
                    "trials": a.trials,
                    "eps_sec": a.eps_sec,
                    "source": Source::Four(cfg.four),
                }),
            );
            Ok(RunOutput {
                csv: String::from_utf8(bytes).expect("csv output is utf-8"),
                manifest,
            })
        }
    }
}

fn problem(cfg: &RunConfig, protocol: Protocol, restarts: usize, seed: u64) -> OptProblem {
    OptProblem {
        sec: cfg.security(protocol),
        ..OptProblem::new(protocol, cfg.sys)
    }
    .with_omega(cfg.source(protocol).omega())
    .with_restarts(restarts)
    .with_seed(seed)
}

fn common(cli: &Cli) -> &CommonArgs {
    match &cli.command {
        Command::Evaluate(a) => &a.common,
        Command::Optimize(a) => &a.common,
        Command::Scan(a) => &a.common,
        Command::McValidate(a) => &a.common,
    }
}

/// [`execute`], then writes the CSV (to stdout without `--out`) and the
/// manifest if requested.
pub fn run(cli: &Cli) -> Result<()> {
    let out = execute(cli)?;
    let c = common(cli);
    match &c.out {
        Some(path) => fs::write(path, &out.csv)?,
        None => std::io::stdout().write_all(out.csv.as_bytes())?,
    }
    if let Some(path) = &c.manifest {
        let mut text = serde_json::to_string_pretty(&out.manifest)?;
        text.push('\n');
        fs::write(path, text)?;
    }
    Ok(())
}
