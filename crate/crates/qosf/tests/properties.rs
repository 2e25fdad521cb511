//! Property tests of the codec, modulation and results persistence.

use std::f64::consts::PI;
use std::path::Path;

use proptest::prelude::*;
use qosf::codec::{QosfCode, RotationAngles};
use qosf::harness::{
    format_results, parse_results, BerPoint, Scheme, SweepResult, SweepSpec, CODE_VERSION,
};
use qosf::primitives::{demodulate, modulate};
use qosf::{Complex, Constellation, SystemConfig};

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex>> {
    prop::collection::vec(
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex::new(a, b)),
        len,
    )
}

fn shape() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    prop_oneof![
        Just((1usize, 1usize)),
        Just((1, 2)),
        Just((2, 1)),
        Just((2, 2)),
        Just((2, 4)),
        Just((4, 2))
    ]
    .prop_flat_map(|(p, l)| {
        (
            Just(p),
            Just(l),
            prop::collection::vec(0.0..2.0 * PI, p * l - 1),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoding_is_real_linear(
        ((p, l, angles), x, y) in shape().prop_flat_map(|(p, l, angles)| {
            let n = 4 * p * l;
            (Just((p, l, angles)), complex_vec(n), complex_vec(n))
        }),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        // two groups per codeword
        let code = QosfCode::new(p, l, 4 * l, &RotationAngles::new(angles).unwrap()).unwrap();
        let mix: Vec<Complex> = x.iter().zip(&y).map(|(x, y)| x * a + y * b).collect();
        let (cx, cy, cm) = (code.encode(&x).unwrap(), code.encode(&y).unwrap(), code.encode(&mix).unwrap());
        for s in 0..p {
            let parts = cx.states[s].as_slice().iter().zip(cy.states[s].as_slice());
            for (g, (u, v)) in cm.states[s].as_slice().iter().zip(parts) {
                prop_assert!((g - (u * a + v * b)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn codeword_energy_is_twice_symbol_energy((p, l, angles) in shape(), seed in any::<u64>()) {
        let code = QosfCode::new(p, l, 2 * l, &RotationAngles::new(angles).unwrap()).unwrap();
        let n = code.symbols_per_codeword();
        let x: Vec<Complex> = (0..n)
            .map(|k| {
                let t = (seed.wrapping_mul(k as u64 + 1) % 1000) as f64 / 100.0;
                Complex::from_polar(1.0 + t.sin().abs(), t)
            })
            .collect();
        let cw = code.encode(&x).unwrap();
        let symbol_energy: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let codeword_energy: f64 = cw.states.iter().flat_map(|m| m.as_slice()).map(|z| z.norm_sqr()).sum();
        prop_assert!((codeword_energy - 2.0 * symbol_energy).abs() < 1e-9 * symbol_energy.max(1.0));
    }

    #[test]
    fn modulation_round_trips(bits in prop::collection::vec(0u8..2, 0..64).prop_map(|mut b| { if b.len() % 2 == 1 { b.pop(); } b })) {
        for c in [Constellation::Bpsk, Constellation::Qpsk] {
            let symbols = modulate(&bits, c).unwrap();
            prop_assert_eq!(demodulate(&symbols, c), bits.clone());
        }
    }

    #[test]
    fn results_round_trip(
        points in prop::collection::vec((-10.0f64..40.0, 1u64..1_000_000_000, 0u64..1000), 1..8),
        seed in 0u64..(i64::MAX as u64),
    ) {
        let mut config = SystemConfig::two_ray(20e-6);
        config.master_seed = seed;
        let mut spec = SweepSpec::new(config, Scheme::QosfP1);
        spec.snr_db_points = points.iter().map(|p| p.0).collect();
        let result = SweepResult {
            points: points.iter().map(|&(s, n, e)| BerPoint::new(s, n.max(e), e)).collect(),
            spec,
            wall_time_s: 0.0,
            code_version: CODE_VERSION.to_string(),
            master_seed: seed,
        };
        let text = format_results(&result);
        let back = parse_results(&text, Path::new("mem")).unwrap();
        prop_assert_eq!(format_results(&back), text);
        prop_assert_eq!(back.points.len(), result.points.len());
        for (a, b) in back.points.iter().zip(&result.points) {
            prop_assert_eq!((a.bits_simulated, a.bit_errors), (b.bits_simulated, b.bit_errors));
            prop_assert_eq!(a.snr_db, b.snr_db);
        }
    }
}
