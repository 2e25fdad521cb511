//! Grid search for the rotation angles of the PL = 4 combining matrix,
//! compared against the evenly spaced default angles.
//!
//! ```text
//! cargo run --release --example optimize_angles -- [steps_per_pi]
//! ```

use std::f64::consts::PI;

use qosf::angleopt::{coding_gain_metric, optimize_angles, GainMetric};
use qosf::codec::RotationAngles;
use qosf::config::default_rotation_angles;
use qosf::Constellation;

fn main() -> qosf::Result<()> {
    let steps: f64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(36.0);
    let pl = 4;
    let default = RotationAngles::new(default_rotation_angles(pl))?;
    for constellation in [Constellation::Bpsk, Constellation::Qpsk] {
        for metric in [
            GainMetric::MinProductDistance,
            GainMetric::MinComponentEuclidean,
        ] {
            let base = coding_gain_metric(&default, constellation, pl, metric)?;
            let report = optimize_angles(constellation, pl, metric, PI / steps)?;
            println!(
                "{} {}: default angles {base:.4}, optimised {:.4} at {:.4?} ({} evaluations)",
                constellation.name(),
                metric.name(),
                report.metric_value,
                report.best_angles.as_slice(),
                report.evaluations
            );
        }
    }
    Ok(())
}
