//! Statistical checks of the two-ray Rayleigh channel: unit average gain,
//! tone correlation following the delay spread, independent states.

use qosf::channel::{draw_channel, frequency_response};
use qosf::{Complex, SystemConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DRAWS: usize = 4000;

struct Moments {
    power: f64,
    lag2: Complex,
    cross_state: Complex,
}

fn moments(delay_s: f64, seed: u64) -> Moments {
    let config = SystemConfig::two_ray(delay_s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nc = config.num_subcarriers;
    let (mut power, mut lag2, mut cross) = (0.0, Complex::new(0.0, 0.0), Complex::new(0.0, 0.0));
    for _ in 0..DRAWS {
        let g = frequency_response(&draw_channel(&config, &mut rng), &config);
        for n in 0..nc {
            let h = g.get(0, n, 0, 0);
            power += h.norm_sqr();
            lag2 += h * g.get(0, (n + 2) % nc, 0, 0).conj();
            cross += h * g.get(1, n, 0, 0).conj();
        }
    }
    let norm = (DRAWS * nc) as f64;
    Moments {
        power: power / norm,
        lag2: lag2 / norm,
        cross_state: cross / norm,
    }
}

/// `|Σ σ_l² e^{−j2π k Δf τ_l}|` for the equal-power two-ray profile.
fn expected_lag_correlation(delay_s: f64, lag: f64) -> f64 {
    (std::f64::consts::PI * lag * delay_s / 128e-6).cos().abs()
}

#[test]
fn average_gain_is_unity() {
    for delay in [0.0, 5e-6, 20e-6] {
        let m = moments(delay, 1);
        assert!(
            (m.power - 1.0).abs() < 0.05,
            "delay {delay}: power {}",
            m.power
        );
    }
}

#[test]
fn tone_correlation_tracks_delay_spread() {
    let narrow = moments(5e-6, 2);
    let wide = moments(20e-6, 3);
    assert!((narrow.lag2.norm() - expected_lag_correlation(5e-6, 2.0)).abs() < 0.05);
    assert!((wide.lag2.norm() - expected_lag_correlation(20e-6, 2.0)).abs() < 0.05);
    assert!(wide.lag2.norm() < narrow.lag2.norm());
}

#[test]
fn states_are_uncorrelated() {
    let m = moments(20e-6, 4);
    assert!(
        m.cross_state.norm() < 0.02,
        "cross-state correlation {}",
        m.cross_state.norm()
    );
}
