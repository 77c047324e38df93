//! Direct hypergeometric experiments against the random-sampling bound used
//! for `s_x1` and the phase-error bound.
//!
//! ```text
//! cargo run --release --example sampling_oracle -- [trials]
//! ```

use decoy_qkd::mcsim::{phase_error_oracle, sampling_oracle};

fn main() {
    let trials = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100_000);
    println!("single-photon split (X sample vs Z rest), bound fails with prob <= eps:");
    for &(x, y, marked, eps) in &[
        (1_000u64, 10_000u64, 600u64, 1e-2),
        (5_000, 50_000, 9_000, 1e-3),
        (20_000, 150_000, 30_000, 1e-4),
    ] {
        let r = sampling_oracle(x, y, marked, eps, trials, 1);
        println!(
            "  x = {x:>6}, y = {y:>7}, marked = {marked:>6}, eps = {eps:e}: {} / {} violations ({:.2e})",
            r.violations,
            r.evaluated,
            r.frequency()
        );
    }
    println!("phase errors (revealed test vs hidden key events):");
    for &(test, key, errors, eps) in &[
        (1_000u64, 10_000u64, 300u64, 1e-2),
        (6_500, 75_000, 2_500, 1e-3),
        (10_000, 50_000, 600, 1e-4),
    ] {
        let r = phase_error_oracle(test, key, errors, eps, trials, 2);
        println!(
            "  c = {test:>6}, d = {key:>7}, errors = {errors:>5}, eps = {eps:e}: {} / {} violations ({:.2e})",
            r.violations,
            r.evaluated,
            r.frequency()
        );
    }
}
