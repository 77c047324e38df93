//! Optimizes both protocols at 100 km and prints the improvement ratio.
//!
//! ```text
//! cargo run --release --example optimize_100km -- [restarts]
//! ```

use decoy_qkd::optimizer::{OptProblem, Protocol};
use decoy_qkd::SystemParams;

fn main() {
    let restarts = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20);
    let sys = SystemParams::default().with_length(100.0);
    let mut rates = Vec::new();
    for protocol in [Protocol::Four, Protocol::Three] {
        let t = std::time::Instant::now();
        let r = OptProblem::new(protocol, sys)
            .with_restarts(restarts)
            .solve();
        println!(
            "{protocol:>5}: R = {:.4e}  l = {}  ({} evaluations, {:.2?})",
            r.report.rate,
            r.report.l,
            r.evaluations,
            t.elapsed()
        );
        println!("       {}", r.source.describe());
        rates.push(r.report.rate);
    }
    println!("R4/R3 = {:.4}", rates[0] / rates[1]);
}
