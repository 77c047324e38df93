//! Optimized key rate of both protocols from 0 to 100 km and their ratio.
//!
//! ```text
//! cargo run --release --example distance_scan
//! ```

use decoy_qkd::optimizer::{scan, OptProblem, Protocol};
use decoy_qkd::SystemParams;

fn main() {
    let distances: Vec<f64> = (0..=10).map(|i| 10.0 * i as f64).collect();
    let sys = SystemParams::default();
    let four = scan(&OptProblem::new(Protocol::Four, sys), &distances, &[2e-4]);
    let three = scan(&OptProblem::new(Protocol::Three, sys), &distances, &[2e-4]);
    println!(
        "{:>6} {:>12} {:>12} {:>7} {:>7} {:>7}",
        "L/km", "R4", "R3", "R4/R3", "P_Z(4)", "P_Z(3)"
    );
    for (a, b) in four.iter().zip(&three) {
        println!(
            "{:>6.0} {:>12.4e} {:>12.4e} {:>7.4} {:>7.4} {:>7.4}",
            a.distance_km,
            a.result.report.rate,
            b.result.report.rate,
            a.result.report.rate / b.result.report.rate,
            a.result.source.p_z(),
            b.result.source.p_z()
        );
    }
}
