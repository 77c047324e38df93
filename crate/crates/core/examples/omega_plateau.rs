//! Optimized rate against the weakest decoy `omega` at 20, 60 and 100 km.
//!
//! ```text
//! cargo run --release --example omega_plateau
//! ```

use decoy_qkd::optimizer::{scan, OptProblem, Protocol};
use decoy_qkd::SystemParams;

fn main() {
    let omegas: Vec<f64> = (0..=8).map(|i| 1e-5 * 10f64.powf(i as f64 / 4.0)).collect();
    let distances = [20.0, 60.0, 100.0];
    for protocol in [Protocol::Four, Protocol::Three] {
        let points = scan(
            &OptProblem::new(protocol, SystemParams::default()),
            &distances,
            &omegas,
        );
        for &d in &distances {
            let rates: Vec<f64> = points
                .iter()
                .filter(|p| p.distance_km == d)
                .map(|p| p.result.report.rate)
                .collect();
            let max = rates.iter().cloned().fold(f64::MIN, f64::max);
            let min = rates.iter().cloned().fold(f64::MAX, f64::min);
            println!(
                "{protocol:>5} {d:>5.0} km  spread {:.3}%",
                100.0 * (max - min) / max
            );
            for (w, r) in omegas.iter().zip(&rates) {
                println!("      omega {w:.3e}  R {r:.5e}");
            }
        }
    }
}
