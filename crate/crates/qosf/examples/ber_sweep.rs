//! Runs a BER sweep of the proposed code, writes its results file, reads it
//! back and emits tab-separated plot data next to it.
//!
//! ```text
//! cargo run --release --example ber_sweep -- [out_dir]
//! ```

use std::path::PathBuf;

use qosf::harness::{
    emit_plot_data, estimate_diversity_order, read_results, run_sweep, write_results, Scheme,
    SweepSpec,
};
use qosf::SystemConfig;

fn main() -> qosf::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&dir)?;

    let mut results = Vec::new();
    for delay_us in [5.0, 20.0] {
        let mut spec = SweepSpec::new(SystemConfig::two_ray(delay_us * 1e-6), Scheme::Proposed);
        spec.snr_db_points = vec![0.0, 3.0, 6.0, 9.0];
        spec.min_bit_errors = 100;
        spec.scenario_label = format!("proposed-{delay_us}us");
        let result = run_sweep(&spec)?;
        let path = dir.join(format!("{}.csv", spec.scenario_label));
        write_results(&result, &path)?;
        let back = read_results(&path)?;
        println!(
            "{} ({:.1} s) -> {}",
            spec.scenario_label,
            result.wall_time_s,
            path.display()
        );
        for p in &back.points {
            println!("  {:>4.1} dB  {:.3e}", p.snr_db, p.ber);
        }
        if let Ok(d) = estimate_diversity_order(&back.points, 3) {
            println!("  slope over the last 3 points: {d:.2}");
        }
        results.push(back);
    }
    let plot = dir.join("plot.tsv");
    emit_plot_data(&results, &plot)?;
    println!("plot data -> {}", plot.display());
    Ok(())
}
