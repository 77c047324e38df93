//! Expected sifted counts from the channel model next to one pulse-by-pulse
//! simulation of the same link.
//!
//! ```text
//! cargo run --release --example channel_counts -- [distance_km] [pulses]
//! ```

use decoy_qkd::{channel, mcsim, SourceConfig, SystemParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let distance = args.next().and_then(|s| s.parse().ok()).unwrap_or(50.0);
    let pulses = args
        .next()
        .and_then(|s| s.parse::<f64>().ok())
        .unwrap_or(1e7) as u64;
    let cfg = SourceConfig::reference_four();
    let sys = SystemParams::default()
        .with_length(distance)
        .with_pulses(pulses);
    println!(
        "eta = {:.4e} at {distance} km, N = {pulses}",
        channel::transmittance(&sys)
    );

    let expected = channel::expected_counts(&cfg, &sys);
    let t = std::time::Instant::now();
    let sim = mcsim::simulate(&cfg, &sys, 1);
    println!("simulated in {:.2?}", t.elapsed());
    let rows = [
        ("n_z_mu", expected.n_z_mu, sim.counts.n_z_mu),
        ("n_z_v1", expected.n_z_v1, sim.counts.n_z_v1),
        ("n_z_omega", expected.n_z_omega, sim.counts.n_z_omega),
        ("m_z_mu", expected.m_z_mu, sim.counts.m_z_mu),
        ("m_z_v1", expected.m_z_v1, sim.counts.m_z_v1),
        ("m_z_omega", expected.m_z_omega, sim.counts.m_z_omega),
        ("n_x_v2", expected.n_x_v2, sim.counts.n_x_v2),
        ("n_x_omega", expected.n_x_omega, sim.counts.n_x_omega),
        ("m_x_v2", expected.m_x_v2, sim.counts.m_x_v2),
        ("m_x_omega", expected.m_x_omega, sim.counts.m_x_omega),
    ];
    println!(
        "{:<10} {:>14} {:>10} {:>8}",
        "count", "expected", "simulated", "z"
    );
    for (name, e, s) in rows {
        println!(
            "{name:<10} {e:>14.2} {s:>10} {:>8.2}",
            (s - e) / e.sqrt().max(1e-300)
        );
    }
    println!(
        "single-photon truth: s_z1 = {}, s_x1 = {}, v_x1 = {}",
        sim.truth.s_z1(),
        sim.truth.s_x1(),
        sim.truth.v_x1()
    );
}
