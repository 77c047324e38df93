//! The aggregated sampler must match the pulse-by-pulse simulator in
//! distribution, and both must match closed-form single-photon yields.

use decoy_qkd::channel::transmittance;
use decoy_qkd::mcsim::{simulate_aggregated, simulate_with, trial_rng, Simulation};
use decoy_qkd::{SourceConfig, SystemParams};

const RUNS: u64 = 200;

fn moments(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn stats(sims: &[Simulation]) -> Vec<(&'static str, (f64, f64))> {
    let pick = |f: fn(&Simulation) -> f64| moments(&sims.iter().map(f).collect::<Vec<_>>());
    vec![
        ("n_z_mu", pick(|s| s.counts.n_z_mu)),
        ("n_z_v1", pick(|s| s.counts.n_z_v1)),
        ("m_z_mu", pick(|s| s.counts.m_z_mu)),
        ("n_x_v2", pick(|s| s.counts.n_x_v2)),
        ("m_x_v2", pick(|s| s.counts.m_x_v2)),
        ("s_z1", pick(|s| s.truth.s_z1() as f64)),
        ("s_x1", pick(|s| s.truth.s_x1() as f64)),
        ("v_x1", pick(|s| s.truth.v_x1() as f64)),
    ]
}

#[test]
fn aggregated_and_pulse_level_samplers_agree() {
    let cfg = SourceConfig::reference_four();
    let sys = SystemParams::default()
        .with_length(10.0)
        .with_pulses(100_000);
    let pulse: Vec<Simulation> = (0..RUNS)
        .map(|i| simulate_with(&cfg, &sys, &mut trial_rng(100, i)))
        .collect();
    let agg: Vec<Simulation> = (0..RUNS)
        .map(|i| simulate_aggregated(&cfg, &sys, 200, i))
        .collect();
    for ((name, (m1, v1)), (_, (m2, v2))) in stats(&pulse).into_iter().zip(stats(&agg)) {
        let se = ((v1 + v2) / RUNS as f64).sqrt();
        assert!(
            (m1 - m2).abs() < 4.0 * se,
            "{name}: means {m1} vs {m2} (se {se})"
        );
        let ratio = v1 / v2;
        assert!(
            (0.6..1.65).contains(&ratio),
            "{name}: variances {v1} vs {v2}"
        );
    }
}

#[test]
fn single_photon_truth_matches_closed_form() {
    let cfg = SourceConfig::reference_four();
    let sys = SystemParams::default()
        .with_length(25.0)
        .with_pulses(20_000_000);
    let eta = transmittance(&sys);
    let yield1 = (1.0 - (1.0 - 2.0 * sys.p_dc) * (1.0 - eta)) * (1.0 + sys.p_ap);
    let one = |k: f64| k * (-k).exp();
    let n = sys.n_pulses as f64;
    let s_z1 = n
        * cfg.p_z_bob
        * (cfg.p_mu * one(cfg.mu)
            + cfg.p_v1 * one(cfg.v1)
            + cfg.p_omega * cfg.p_z_given_omega * one(cfg.omega))
        * yield1;
    let s_x1 = n
        * cfg.p_x_bob()
        * (cfg.p_v2 * one(cfg.v2) + cfg.p_omega * (1.0 - cfg.p_z_given_omega) * one(cfg.omega))
        * yield1;
    let sim = simulate_aggregated(&cfg, &sys, 9, 0);
    for (name, expected, got) in [
        ("s_z1", s_z1, sim.truth.s_z1()),
        ("s_x1", s_x1, sim.truth.s_x1()),
    ] {
        let z = (got as f64 - expected) / expected.sqrt();
        assert!(z.abs() < 4.0, "{name}: {got} vs {expected}");
    }
}
