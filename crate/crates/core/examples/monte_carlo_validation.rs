//! Checks every estimator against simulated ground truth.
//!
//! Each trial simulates a full run, evaluates the bounds at a fixed
//! `eps_sec`, and compares them with the true vacuum/single-photon tallies.
//! A second pass with all deviation terms switched off shows how often the
//! bare decoy estimates land on the wrong side.
//!
//! ```text
//! cargo run --release --example monte_carlo_validation -- [trials] [distance_km]
//! ```

use decoy_qkd::mcsim::{simulate_aggregated, validate_bounds, BoundKind};
use decoy_qkd::{bounds, SecurityParams, SourceConfig, SystemParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let distance = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let cfg = SourceConfig::reference_four();
    let sys = SystemParams::default()
        .with_length(distance)
        .with_pulses(1_000_000);
    let eps = 1e-3;

    let sim = simulate_aggregated(&cfg, &sys, 1, 0);
    let report = bounds::evaluate_at(
        &cfg,
        &sim.counts,
        sys.n_pulses,
        &SecurityParams::four_intensity(),
        eps,
    );
    let t = &sim.truth;
    println!("one trial at {distance} km, N = {}:", sys.n_pulses);
    println!("  s_z0  bound {:>12.2}  truth {:>8}", report.s_z0, t.s_z0());
    println!("  s_z1  bound {:>12.2}  truth {:>8}", report.s_z1, t.s_z1());
    println!("  s_x1  bound {:>12.2}  truth {:>8}", report.s_x1, t.s_x1());
    println!("  v_x1  bound {:>12.2}  truth {:>8}", report.v_x1, t.v_x1());
    println!(
        "  e1    bound {:>12.5}  truth {:>8.5}",
        report.e1_pz,
        t.c_z1() as f64 / t.s_z1() as f64
    );

    for (label, sec) in [
        ("finite-size bounds", SecurityParams::four_intensity()),
        (
            "deviation terms off",
            SecurityParams::four_intensity().asymptotic(),
        ),
    ] {
        let r = validate_bounds(&cfg, &sys, &sec, eps, trials, 7);
        println!("{label}, {trials} trials, eps_sec = {eps:e}:");
        for kind in BoundKind::ALL {
            let i = kind as usize;
            println!(
                "  {:<12} violations {:>6} / {:<6} = {:.4}",
                kind.name(),
                r.violations[i],
                r.evaluated[i],
                r.frequency(kind)
            );
        }
    }
}
