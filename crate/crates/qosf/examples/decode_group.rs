//! Sends one block through a noisy channel and compares the exhaustive and
//! decoupled ML detectors, first on a frequency-selective channel and then
//! on a flat one where the decoupled search is exact.
//!
//! ```text
//! cargo run --example decode_group -- [snr_db]
//! ```

use qosf::channel::{apply, draw_channel, frequency_response};
use qosf::codec::QosfCode;
use qosf::decoder::Detector;
use qosf::primitives::modulate;
use qosf::{DecoderMode, SystemConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> qosf::Result<()> {
    let snr_db: f64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(6.0);
    let snr_linear = 10f64.powf(snr_db / 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for delay_us in [20.0, 0.0] {
        let config = SystemConfig::two_ray(delay_us * 1e-6);
        let code = QosfCode::from_config(&config)?;
        let detector = Detector::new(&code, config.constellation)?;
        let blocks = 200;
        let mut errors = [0usize; 2];
        let mut disagreements = 0;
        for _ in 0..blocks {
            let bits: Vec<u8> = (0..code.symbols_per_codeword())
                .map(|_| rng.random_range(0..2u8))
                .collect();
            let cw = code.encode(&modulate(&bits, config.constellation)?)?;
            let grid = frequency_response(&draw_channel(&config, &mut rng), &config);
            let rx = apply(&cw, &grid, snr_linear, &mut rng, false)?;
            let ex = detector.decode(&rx, &grid, DecoderMode::Exhaustive)?;
            let de = detector.decode(&rx, &grid, DecoderMode::Decoupled)?;
            errors[0] += bits.iter().zip(&ex).filter(|(a, b)| a != b).count();
            errors[1] += bits.iter().zip(&de).filter(|(a, b)| a != b).count();
            disagreements += usize::from(ex != de);
        }
        let total = blocks * code.symbols_per_codeword();
        println!(
            "delay {delay_us:>4} us, {snr_db} dB: exhaustive BER {:.2e}, decoupled BER {:.2e}, {disagreements}/{blocks} blocks differ",
            errors[0] as f64 / total as f64,
            errors[1] as f64 / total as f64
        );
    }
    Ok(())
}
