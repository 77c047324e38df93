//! Both protocols at their 100 km optimal parameters: every estimator in
//! the chain, the self-consistent `eps_sec`, and the final rates.
//!
//! ```text
//! cargo run --release --example evaluate_reference -- [distance_km]
//! ```

use decoy_qkd::baseline3::evaluate3;
use decoy_qkd::bounds::{evaluate, KeyRateReport};
use decoy_qkd::{channel, SecurityParams, SourceConfig, SourceConfig3, SystemParams};

fn show(name: &str, r: &KeyRateReport) {
    println!("{name}");
    println!("  s_z0 >= {:.2}", r.s_z0);
    println!("  s_z1 >= {:.2}", r.s_z1);
    println!("  s_x1 >= {:.2}", r.s_x1);
    println!("  v_x1 <= {:.2}", r.v_x1);
    println!("  e1   <= {:.5}", r.e1_pz);
    println!("  leak  = {:.1} bits", r.lambda_ec);
    println!(
        "  eps_sec = {:.4e} after {} iterations",
        r.eps_sec, r.iterations
    );
    println!("  l = {} bits, R = {:.4e}", r.l, r.rate);
    let flags = r.diagnostics.summary();
    if !flags.is_empty() {
        println!("  flags: {flags}");
    }
}

fn main() {
    let distance = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100.0);
    let sys = SystemParams::default().with_length(distance);
    println!("{distance} km, N = {:e}\n", sys.n_pulses as f64);

    let c4 = SourceConfig::reference_four();
    let counts = channel::expected_counts(&c4, &sys);
    let r4 = evaluate(
        &c4,
        &counts,
        sys.n_pulses,
        &SecurityParams::four_intensity(),
    );
    show("four-intensity (17 error terms)", &r4);

    let c3 = SourceConfig3::reference_three();
    let counts3 = channel::expected_counts3(&c3, &sys);
    let r3 = evaluate3(
        &c3,
        &counts3,
        sys.n_pulses,
        &SecurityParams::three_intensity(),
    );
    show("\nthree-intensity (21 error terms)", &r3);

    println!("\nR4/R3 = {:.4}", r4.rate / r3.rate);
}
