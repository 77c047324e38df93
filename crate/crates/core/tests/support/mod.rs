//! Property checks shared by the proptest suite and the acceptance runner.
//! Each check returns `Err` with a description of the counterexample.
#![allow(dead_code)]

use decoy_qkd::baseline3::evaluate3_at;
use decoy_qkd::bounds::{
    binary_entropy, evaluate, evaluate_at, m_bound, n_bound, phase_deviation, Confidence,
    KeyRateReport, Sign,
};
use decoy_qkd::{
    channel, ObservedCounts, ObservedCounts3, SecurityParams, SourceConfig, SourceConfig3,
    SystemParams,
};

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Maps the unit cube onto valid four-intensity sources around the
/// practically interesting region.
pub fn source_from_unit(u: [f64; 7]) -> SourceConfig {
    let omega = 2e-4;
    let mu = 0.15 + 0.75 * u[0];
    let v1 = omega + (mu - 2.0 * omega) * (0.1 + 0.8 * u[1]);
    let v2 = 0.02 + 0.6 * u[2];
    let w = [0.05 + u[3], 0.05 + u[4], 0.05 + u[5], 0.2];
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
    cfg
}

pub fn source3_from_unit(u: [f64; 5]) -> SourceConfig3 {
    let omega = 2e-4;
    let mu = 0.15 + 0.75 * u[0];
    let v = omega + (mu - 2.0 * omega) * (0.1 + 0.8 * u[1]);
    let w = [0.05 + u[2], 0.05 + u[3], 0.2];
    let s: f64 = w.iter().sum();
    SourceConfig3::from_free(mu, v, omega, w[0] / s, w[1] / s, 0.5 + 0.45 * u[4])
}

/// Counts from raw fuzz: detections are free, errors a fraction of them.
pub fn fuzz_counts(det: [f64; 5], err_frac: [f64; 5]) -> ObservedCounts {
    ObservedCounts {
        n_z_mu: det[0],
        n_z_v1: det[1],
        n_z_omega: det[2],
        m_z_mu: det[0] * err_frac[0],
        m_z_v1: det[1] * err_frac[1],
        m_z_omega: det[2] * err_frac[2],
        n_x_v2: det[3],
        n_x_omega: det[4],
        m_x_v2: det[3] * err_frac[3],
        m_x_omega: det[4] * err_frac[4],
    }
}

pub fn fuzz_counts3(det: [f64; 6], err_frac: [f64; 6]) -> ObservedCounts3 {
    ObservedCounts3 {
        n_z_mu: det[0],
        n_z_v: det[1],
        n_z_omega: det[2],
        m_z_mu: det[0] * err_frac[0],
        m_z_v: det[1] * err_frac[1],
        m_z_omega: det[2] * err_frac[2],
        n_x_mu: det[3],
        n_x_v: det[4],
        n_x_omega: det[5],
        m_x_mu: det[3] * err_frac[3],
        m_x_v: det[4] * err_frac[4],
        m_x_omega: det[5] * err_frac[5],
    }
}

pub fn entropy_symmetry(x: f64) -> Check {
    let a = binary_entropy(x).map_err(|e| e.to_string())?;
    let b = binary_entropy(1.0 - x).map_err(|e| e.to_string())?;
    ensure(
        (a - b).abs() <= 1e-12 && (0.0..=1.0 + 1e-15).contains(&a),
        || format!("H({x}) = {a}, H(1 - x) = {b}"),
    )
}

/// `upper - lower = 2 e^k / (p_k p_W) * sqrt(total / 2 * ln(terms / eps))`
pub fn bound_gap_identity(count: f64, total: f64, k: f64, p: f64, pb: f64, eps: f64) -> Check {
    let conf = Confidence::new(eps, 17).map_err(|e| e.to_string())?;
    let want = 2.0 * k.exp() / (p * pb) * (total / 2.0 * (17.0 / eps).ln()).sqrt();
    for (name, f) in [
        ("n", n_bound as fn(_, _, _, _, _, _, _) -> f64),
        ("m", m_bound),
    ] {
        let gap = f(count, total, k, p, pb, &conf, Sign::Plus)
            - f(count, total, k, p, pb, &conf, Sign::Minus);
        ensure((gap - want).abs() <= 1e-9 * want.max(1.0), || {
            format!("{name}_bound gap {gap} vs {want} (count {count}, total {total}, k {k}, p {p}, pb {pb}, eps {eps})")
        })?;
    }
    Ok(())
}

pub fn gamma_symmetry(a: f64, b: f64, c: f64, d: f64) -> Check {
    let x = phase_deviation(a, b, c, d);
    let y = phase_deviation(a, b, d, c);
    match (x, y) {
        (Some(x), Some(y)) => ensure((x - y).abs() <= 1e-12 * x.abs().max(1e-300), || {
            format!("gamma({a}, {b}, {c}, {d}) = {x} but swapped = {y}")
        }),
        (None, None) => Ok(()),
        _ => Err(format!(
            "gamma({a}, {b}, {c}, {d}) defined on one side only: {x:?} vs {y:?}"
        )),
    }
}

fn report_in_range(r: &KeyRateReport, m_x: f64, what: &str) -> Check {
    let ok = r.rate >= 0.0
        && r.rate.is_finite()
        && r.s_z0 >= 0.0
        && r.s_z1 >= 0.0
        && r.s_x1 >= 0.0
        && r.v_x1 >= 0.0
        && r.v_x1 <= m_x
        && (0.0..=0.5).contains(&r.e1_pz)
        && r.lambda_ec >= 0.0
        && (r.l == 0 || r.feasible);
    ensure(ok, || format!("{what}: out-of-range report {r:?}"))
}

/// Every estimator stays in range for arbitrary counts; rates are never
/// negative.
pub fn clamp_discipline(cfg: &SourceConfig, counts: &ObservedCounts, eps: f64) -> Check {
    let sec = SecurityParams::four_intensity();
    report_in_range(
        &evaluate_at(cfg, counts, 1_000_000_000, &sec, eps),
        counts.m_x(),
        "evaluate_at",
    )?;
    report_in_range(
        &evaluate(cfg, counts, 1_000_000_000, &sec),
        counts.m_x(),
        "evaluate",
    )
}

pub fn clamp_discipline3(cfg: &SourceConfig3, counts: &ObservedCounts3, eps: f64) -> Check {
    let sec = SecurityParams::three_intensity();
    report_in_range(
        &evaluate3_at(cfg, counts, 1_000_000_000, &sec, eps),
        counts.m_x(),
        "evaluate3_at",
    )
}

/// A looser secrecy target never shortens the key.
pub fn eps_monotone(cfg: &SourceConfig, distance: f64, eps_lo: f64, eps_hi: f64) -> Check {
    let sys = SystemParams::default().with_length(distance);
    let counts = channel::expected_counts(cfg, &sys);
    let sec = SecurityParams::four_intensity();
    let lo = evaluate_at(cfg, &counts, sys.n_pulses, &sec, eps_lo);
    let hi = evaluate_at(cfg, &counts, sys.n_pulses, &sec, eps_hi);
    ensure(lo.l <= hi.l, || {
        format!(
            "l({eps_lo:e}) = {} > l({eps_hi:e}) = {} at {distance} km for {cfg:?}",
            lo.l, hi.l
        )
    })
}

/// The self-consistent length reproduces itself within one bit.
pub fn fixed_point_residual(cfg: &SourceConfig, distance: f64) -> Check {
    let sys = SystemParams::default().with_length(distance);
    let counts = channel::expected_counts(cfg, &sys);
    let sec = SecurityParams::four_intensity();
    let r = evaluate(cfg, &counts, sys.n_pulses, &sec);
    if r.l == 0 {
        return Ok(());
    }
    let again = evaluate_at(cfg, &counts, sys.n_pulses, &sec, sec.kappa * r.l as f64);
    ensure(again.l.abs_diff(r.l) <= 1, || {
        format!(
            "l = {} but l(kappa l) = {} at {distance} km for {cfg:?}",
            r.l, again.l
        )
    })
}
