//! Encodes one OFDM symbol's worth of BPSK data for two radiation states and
//! prints the per-state codewords of the first symbol group together with the
//! combining matrix.
//!
//! ```text
//! cargo run --example encode_codeword
//! ```

use qosf::codec::QosfCode;
use qosf::primitives::modulate;
use qosf::SystemConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> qosf::Result<()> {
    let config = SystemConfig::two_ray(20e-6);
    let code = QosfCode::from_config(&config)?;
    println!(
        "{} states x {} tones, {} groups of {} symbols, kappa = {:.4}",
        code.num_states(),
        code.num_subcarriers(),
        code.num_groups(),
        code.group_len(),
        code.kappa()
    );
    println!("theta = {:?}", code.theta());

    let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
    let n_bits = code.symbols_per_codeword() * config.constellation.bits_per_symbol();
    let bits: Vec<u8> = (0..n_bits).map(|_| rng.random_range(0..2u8)).collect();
    let symbols = modulate(&bits, config.constellation)?;
    let cw = code.encode(&symbols)?;

    let first: Vec<String> = symbols[..code.group_len()]
        .iter()
        .map(|&z| qosf::codec::format_complex(z))
        .collect();
    println!("first group symbols: {}", first.join("  "));
    for (p, c) in cw.states.iter().enumerate() {
        println!("state {}:", p + 1);
        for i in 0..c.rows() {
            let row: Vec<String> = (0..code.tones_per_group())
                .map(|n| qosf::codec::format_complex(c[(i, n)]))
                .collect();
            println!("  tx{}: {}", i + 1, row.join("  "));
        }
    }
    Ok(())
}
