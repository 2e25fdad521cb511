//! Codewords checked against golden files produced by an independent NumPy
//! implementation of the encoder (P = 2, L = 2, eight tones).

use std::f64::consts::PI;

use qosf::codec::{QosfCode, RotationAngles, SfCodeword};
use qosf::primitives::modulate;
use qosf::{Complex, Constellation};

struct Golden {
    bits: Vec<u8>,
    entries: Vec<(usize, usize, usize, Complex)>,
}

fn load(name: &str) -> Golden {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let bits = header
        .rsplit(' ')
        .next()
        .unwrap()
        .bytes()
        .map(|b| b - b'0')
        .collect();
    let entries = lines
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            let idx = |k: usize| f[k].parse::<usize>().unwrap();
            let val = |k: usize| f[k].parse::<f64>().unwrap();
            (idx(0), idx(1), idx(2), Complex::new(val(3), val(4)))
        })
        .collect();
    Golden { bits, entries }
}

fn code() -> QosfCode {
    let angles = RotationAngles::new(vec![PI / 4.0, PI / 2.0, 3.0 * PI / 4.0]).unwrap();
    QosfCode::new(2, 2, 8, &angles).unwrap()
}

fn check(name: &str, constellation: Constellation) -> SfCodeword {
    let golden = load(name);
    let cw = code()
        .encode(&modulate(&golden.bits, constellation).unwrap())
        .unwrap();
    assert_eq!(golden.entries.len(), 2 * 2 * 8);
    for &(p, i, n, want) in &golden.entries {
        let got = cw.states[p][(i, n)];
        assert!(
            (got - want).norm() < 1e-12,
            "state {p} tx {i} tone {n}: {got} vs {want}"
        );
    }
    cw
}

#[test]
fn bpsk_matches_golden() {
    check("golden_p2l2_nc8_bpsk.txt", Constellation::Bpsk);
}

#[test]
fn qpsk_matches_golden() {
    check("golden_p2l2_nc8_qpsk.txt", Constellation::Qpsk);
}

#[test]
fn golden_codeword_survives_text_round_trip() {
    let cw = check("golden_p2l2_nc8_qpsk.txt", Constellation::Qpsk);
    let back = SfCodeword::from_text(&cw.to_text(), 2, cw.num_groups).unwrap();
    for (a, b) in cw.states.iter().zip(&back.states) {
        assert!(a.max_abs_diff(b) < 1e-12);
    }
}
