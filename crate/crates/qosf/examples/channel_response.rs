//! Draws a two-ray Rayleigh channel for each radiation state and shows how
//! the delay spread decorrelates the frequency response across tones.
//!
//! ```text
//! cargo run --example channel_response -- [max_delay_us]
//! ```

use qosf::channel::{draw_channel, frequency_response, validate_against_time_domain};
use qosf::{Complex, SystemConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qosf::Result<()> {
    let delay_us: f64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(20.0);
    let config = SystemConfig::two_ray(delay_us * 1e-6);
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);

    let real = draw_channel(&config, &mut rng);
    let grid = frequency_response(&real, &config);
    println!(
        "max |DFT(h) - H| = {:.2e}",
        validate_against_time_domain(&real, &config)?
    );
    for p in 0..config.num_states {
        println!("state {}, tx1 -> rx1:", p + 1);
        for n in (0..config.num_subcarriers).step_by(16) {
            let h = grid.get(p, n, 0, 0);
            println!(
                "  tone {n:>3}: |H| = {:.3}  arg = {:+.3}",
                h.norm(),
                h.arg()
            );
        }
    }

    // empirical correlation E[H(n) H*(n+k)] averaged over draws and tones
    let draws = 2000;
    let lags = [1usize, 2, 4, 8, 16, 32, 64];
    let mut acc = vec![Complex::new(0.0, 0.0); lags.len()];
    let mut power = 0.0;
    for _ in 0..draws {
        let g = frequency_response(&draw_channel(&config, &mut rng), &config);
        for n in 0..config.num_subcarriers {
            let h = g.get(0, n, 0, 0);
            power += h.norm_sqr();
            for (a, &k) in acc.iter_mut().zip(&lags) {
                *a += h * g.get(0, (n + k) % config.num_subcarriers, 0, 0).conj();
            }
        }
    }
    println!("tone correlation at {delay_us} us delay spread:");
    for (a, k) in acc.iter().zip(lags) {
        println!("  lag {k:>2}: |rho| = {:.3}", a.norm() / power);
    }
    Ok(())
}
