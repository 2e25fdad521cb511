//! Sweeps the proposed code and both baselines on the same channel and
//! noise draws and prints BER, the SNR needed for BER 1e-3 and the
//! estimated diversity order of each.
//!
//! ```text
//! cargo run --release --example compare_schemes -- [max_delay_us] [min_errors]
//! ```

use qosf::harness::{estimate_diversity_order, run_sweep, snr_at_ber, Scheme, SweepSpec};
use qosf::SystemConfig;

fn main() -> qosf::Result<()> {
    let mut args = std::env::args().skip(1);
    let delay_us: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(20.0);
    let min_errors: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(200);

    let config = SystemConfig::two_ray(delay_us * 1e-6);
    println!(
        "two-ray channel, max delay {delay_us} us, {} tones",
        config.num_subcarriers
    );
    for scheme in Scheme::ALL {
        let mut spec = SweepSpec::new(config.clone(), scheme);
        spec.min_bit_errors = min_errors;
        spec.max_ofdm_blocks = 40_000;
        let result = run_sweep(&spec)?;
        println!("\n{} ({:.1} s)", scheme.name(), result.wall_time_s);
        for p in &result.points {
            println!(
                "  {:>5.1} dB  ber {:.3e}  ({} errors / {} bits)",
                p.snr_db, p.ber, p.bit_errors, p.bits_simulated
            );
        }
        let usable: Vec<_> = result
            .points
            .iter()
            .filter(|p| p.ber >= 1e-4)
            .cloned()
            .collect();
        match snr_at_ber(&result.points, 1e-3) {
            Some(s) => println!("  BER 1e-3 at {s:.2} dB"),
            None => println!("  BER 1e-3 not bracketed"),
        }
        if let Ok(d) = estimate_diversity_order(&usable, 3) {
            println!("  diversity order (last 3 points with BER >= 1e-4): {d:.2}");
        }
    }
    Ok(())
}
