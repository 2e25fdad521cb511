//! Coding-gain metrics of rotation-angle sets and a grid search over them.
//!
//! For two symbol vectors `s ≠ s'` of length `pl`, let `v = Θ(s − s')`
//! (unnormalised `Θ`). Two metrics are offered:
//!
//! - [`GainMetric::MinProductDistance`]: `min Π_k |v_k|` over all pairs.
//! - [`GainMetric::MinComponentEuclidean`]: `min_k |v_k|` over pairs that
//!   differ in exactly one position.
//!
//! The full-vector distance `‖v‖ = √pl·‖s − s'‖` does not depend on the
//! angles at all, so it is not offered as an objective.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{build_theta, RotationAngles};
use crate::primitives::{Complex, ComplexMatrix, Constellation};
use crate::{Error, Result};

/// Default cap on grid evaluations in [`optimize_angles`].
pub const DEFAULT_GRID_CAP: u128 = 10_000_000;

const MAX_DIFFERENCE_VECTORS: u128 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainMetric {
    MinProductDistance,
    MinComponentEuclidean,
}

impl GainMetric {
    pub fn name(self) -> &'static str {
        match self {
            GainMetric::MinProductDistance => "min_product_distance",
            GainMetric::MinComponentEuclidean => "min_component_euclidean",
        }
    }
}

impl std::str::FromStr for GainMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "min_product_distance" | "product" => Ok(GainMetric::MinProductDistance),
            "min_component_euclidean" | "euclidean" => Ok(GainMetric::MinComponentEuclidean),
            other => Err(Error::InvalidConfig(format!("unknown metric {other:?}"))),
        }
    }
}

/// Nonzero difference vectors `s − s'` needed by a metric, up to sign
/// (both metrics are invariant to negating `d`).
#[derive(Debug, Clone)]
pub struct DifferenceSet {
    pl: usize,
    vectors: Vec<Vec<Complex>>,
}

impl DifferenceSet {
    pub fn new(constellation: Constellation, pl: usize, metric: GainMetric) -> Result<Self> {
        if !pl.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(pl));
        }
        let diffs = scalar_differences(constellation);
        let count = (0..pl).fold(1u128, |acc, _| acc.saturating_mul(diffs.len() as u128));
        if metric == GainMetric::MinProductDistance && count > MAX_DIFFERENCE_VECTORS {
            return Err(Error::UnsupportedSize(format!(
                "{} with pl = {pl} needs {count} difference vectors",
                constellation.name()
            )));
        }
        let mut vectors = Vec::new();
        match metric {
            GainMetric::MinProductDistance => {
                let mut digits = vec![0usize; pl];
                'outer: loop {
                    let d: Vec<Complex> = digits.iter().map(|&k| diffs[k]).collect();
                    if let Some(first) = d.iter().find(|z| z.norm_sqr() > 0.0) {
                        // keep one of each ±d pair
                        if first.re > 0.0 || (first.re == 0.0 && first.im > 0.0) {
                            vectors.push(d);
                        }
                    }
                    for k in (0..pl).rev() {
                        digits[k] += 1;
                        if digits[k] < diffs.len() {
                            continue 'outer;
                        }
                        digits[k] = 0;
                    }
                    break;
                }
            }
            GainMetric::MinComponentEuclidean => {
                for pos in 0..pl {
                    for &delta in diffs.iter().filter(|z| z.norm_sqr() > 0.0) {
                        let mut d = vec![Complex::new(0.0, 0.0); pl];
                        d[pos] = delta;
                        vectors.push(d);
                    }
                }
            }
        }
        Ok(Self { pl, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    fn evaluate(&self, theta: &ComplexMatrix, metric: GainMetric) -> f64 {
        let mut best = f64::INFINITY;
        for d in &self.vectors {
            let value = match metric {
                GainMetric::MinProductDistance => {
                    let mut prod = 1.0;
                    for r in 0..self.pl {
                        let v: Complex = theta.row(r).iter().zip(d).map(|(a, b)| a * b).sum();
                        prod *= v.norm();
                    }
                    prod
                }
                GainMetric::MinComponentEuclidean => (0..self.pl)
                    .map(|r| {
                        theta
                            .row(r)
                            .iter()
                            .zip(d)
                            .map(|(a, b)| a * b)
                            .sum::<Complex>()
                            .norm()
                    })
                    .fold(f64::INFINITY, f64::min),
            };
            best = best.min(value);
        }
        best
    }
}

/// Distinct values of `a − b` for constellation points `a`, `b`, zero
/// included.
fn scalar_differences(constellation: Constellation) -> Vec<Complex> {
    let pts = constellation.points();
    let mut out: Vec<Complex> = Vec::new();
    for a in pts {
        for b in pts {
            let d = a - b;
            if !out.iter().any(|z| (z - d).norm() < 1e-12) {
                out.push(d);
            }
        }
    }
    out
}

pub fn coding_gain_metric(
    angles: &RotationAngles,
    constellation: Constellation,
    pl: usize,
    metric: GainMetric,
) -> Result<f64> {
    let set = DifferenceSet::new(constellation, pl, metric)?;
    let theta = build_theta(angles, pl)?;
    Ok(set.evaluate(&theta, metric))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleSearchReport {
    pub best_angles: RotationAngles,
    pub constellation: Constellation,
    pub pl: usize,
    pub metric_name: GainMetric,
    pub metric_value: f64,
    pub grid_resolution: f64,
    pub evaluations: u64,
}

impl AngleSearchReport {
    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let angles: Vec<String> = self
            .best_angles
            .as_slice()
            .iter()
            .map(|a| a.to_string())
            .collect();
        let in_pi: Vec<String> = self
            .best_angles
            .as_slice()
            .iter()
            .map(|a| format!("{:.6}", a / PI))
            .collect();
        let mut out = String::new();
        let _ = writeln!(out, "metric_name: {}", self.metric_name.name());
        let _ = writeln!(out, "metric_value: {}", self.metric_value);
        let _ = writeln!(out, "constellation: {}", self.constellation.name());
        let _ = writeln!(out, "pl: {}", self.pl);
        let _ = writeln!(out, "best_angles: {}", angles.join(","));
        let _ = writeln!(out, "best_angles_over_pi: {}", in_pi.join(","));
        let _ = writeln!(out, "grid_resolution: {}", self.grid_resolution);
        let _ = writeln!(out, "evaluations: {}", self.evaluations);
        out
    }
}

/// Grid search over `[0, π)^{pl−1}` at `resolution`, then one pass of
/// coordinate descent with step `resolution/10` (±10 steps per coordinate).
/// Ties go to the lexicographically smallest angle tuple.
pub fn optimize_angles(
    constellation: Constellation,
    pl: usize,
    metric: GainMetric,
    resolution: f64,
) -> Result<AngleSearchReport> {
    optimize_angles_with_cap(constellation, pl, metric, resolution, DEFAULT_GRID_CAP)
}

pub fn optimize_angles_with_cap(
    constellation: Constellation,
    pl: usize,
    metric: GainMetric,
    resolution: f64,
    cap: u128,
) -> Result<AngleSearchReport> {
    if !pl.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(pl));
    }
    let steps = grid_steps(resolution)?;
    let dims = pl - 1;
    let size = (0..dims).fold(1u128, |acc, _| acc.saturating_mul(steps as u128));
    if size > cap {
        return Err(Error::GridTooLarge { size, cap });
    }
    let set = DifferenceSet::new(constellation, pl, metric)?;
    let u = crate::primitives::hadamard(pl)?;
    let eval = |angles: &[f64]| -> f64 {
        let theta = rotated(&u, angles);
        set.evaluate(&theta, metric)
    };
    let grid_angle = |k: usize| k as f64 * PI / steps as f64;
    let point = |mut idx: u128| -> Vec<f64> {
        let mut a = vec![0.0; dims];
        for slot in a.iter_mut().rev() {
            *slot = grid_angle((idx % steps as u128) as usize);
            idx /= steps as u128;
        }
        a
    };

    // grid index order is lexicographic angle order, so the smallest index
    // wins ties
    let (best_idx, best_value) = (0..size as u64)
        .into_par_iter()
        .map(|idx| (idx, eval(&point(idx as u128))))
        .reduce(
            || (u64::MAX, f64::NEG_INFINITY),
            |a, b| {
                if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    let mut evaluations = size as u64;
    let mut best = point(best_idx as u128);
    let mut best_value = best_value;

    let step = resolution / 10.0;
    for k in 0..dims {
        let origin = best[k];
        for j in -10i32..=10 {
            if j == 0 {
                continue;
            }
            let mut cand = best.clone();
            cand[k] = wrap(origin + j as f64 * step);
            let value = eval(&cand);
            evaluations += 1;
            if value > best_value || (value == best_value && lex_less(&cand, &best)) {
                best = cand;
                best_value = value;
            }
        }
    }

    Ok(AngleSearchReport {
        best_angles: RotationAngles::wrapped(best),
        constellation,
        pl,
        metric_name: metric,
        metric_value: best_value,
        grid_resolution: resolution,
        evaluations,
    })
}

fn grid_steps(resolution: f64) -> Result<usize> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let ratio = PI / resolution;
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-9 * ratio || steps < 1.0 {
        return Err(Error::InvalidConfig(format!(
            "resolution {resolution} does not divide π"
        )));
    }
    Ok(steps as usize)
}

fn rotated(u: &ComplexMatrix, angles: &[f64]) -> ComplexMatrix {
    let mut theta = u.clone();
    for (k, &a) in angles.iter().enumerate() {
        let phase = Complex::from_polar(1.0, a);
        for r in 0..u.rows() {
            theta[(r, k + 1)] = u[(r, k + 1)] * phase;
        }
    }
    theta
}

fn wrap(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn default_set() -> RotationAngles {
        RotationAngles::new(vec![FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4]).unwrap()
    }

    #[test]
    fn difference_set_sizes() {
        // BPSK differences {0, ±2}: (3^4 − 1) / 2 vectors up to sign
        let s = DifferenceSet::new(Constellation::Bpsk, 4, GainMetric::MinProductDistance).unwrap();
        assert_eq!(s.len(), 40);
        // QPSK differences: 9 distinct values
        let s = DifferenceSet::new(Constellation::Qpsk, 4, GainMetric::MinProductDistance).unwrap();
        assert_eq!(s.len(), (9usize.pow(4) - 1) / 2);
        let s =
            DifferenceSet::new(Constellation::Bpsk, 4, GainMetric::MinComponentEuclidean).unwrap();
        assert_eq!(s.len(), 8);
        assert!(matches!(
            DifferenceSet::new(Constellation::Qpsk, 8, GainMetric::MinProductDistance),
            Err(Error::UnsupportedSize(_))
        ));
        assert!(matches!(
            DifferenceSet::new(Constellation::Bpsk, 3, GainMetric::MinProductDistance),
            Err(Error::NotPowerOfTwo(3))
        ));
    }

    #[test]
    fn zero_angles_have_zero_product_distance() {
        let m = coding_gain_metric(
            &RotationAngles::new(vec![0.0; 3]).unwrap(),
            Constellation::Bpsk,
            4,
            GainMetric::MinProductDistance,
        )
        .unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn default_angles_are_positive() {
        let m = coding_gain_metric(
            &default_set(),
            Constellation::Bpsk,
            4,
            GainMetric::MinProductDistance,
        )
        .unwrap();
        assert!(m > 1.0, "{m}");
    }

    #[test]
    fn component_metric_is_two_for_bpsk() {
        // single-position differences map to ±2·(unit-modulus column)
        let m = coding_gain_metric(
            &default_set(),
            Constellation::Bpsk,
            4,
            GainMetric::MinComponentEuclidean,
        )
        .unwrap();
        assert!((m - 2.0).abs() < 1e-12);
    }

    #[test]
    fn metric_is_pi_periodic_per_coordinate() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let base: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..PI)).collect();
            let m0 = coding_gain_metric(
                &RotationAngles::new(base.clone()).unwrap(),
                Constellation::Qpsk,
                4,
                GainMetric::MinProductDistance,
            )
            .unwrap();
            for k in 0..3 {
                let mut shifted = base.clone();
                shifted[k] += PI;
                let m1 = coding_gain_metric(
                    &RotationAngles::new(shifted).unwrap(),
                    Constellation::Qpsk,
                    4,
                    GainMetric::MinProductDistance,
                )
                .unwrap();
                assert!((m0 - m1).abs() < 1e-9 * m0.max(1.0), "{m0} vs {m1}");
            }
        }
    }

    #[test]
    fn coarse_search_is_self_consistent() {
        let report = optimize_angles(
            Constellation::Bpsk,
            4,
            GainMetric::MinProductDistance,
            FRAC_PI_4,
        )
        .unwrap();
        let again = coding_gain_metric(
            &report.best_angles,
            Constellation::Bpsk,
            4,
            GainMetric::MinProductDistance,
        )
        .unwrap();
        assert!((again - report.metric_value).abs() < 1e-12);
        let mut best_grid: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let angles = RotationAngles::new(vec![
                        a as f64 * FRAC_PI_4,
                        b as f64 * FRAC_PI_4,
                        c as f64 * FRAC_PI_4,
                    ])
                    .unwrap();
                    best_grid = best_grid.max(
                        coding_gain_metric(
                            &angles,
                            Constellation::Bpsk,
                            4,
                            GainMetric::MinProductDistance,
                        )
                        .unwrap(),
                    );
                }
            }
        }
        assert!(report.metric_value >= best_grid);
        assert_eq!(report.evaluations, 64 + 3 * 20);
    }

    #[test]
    fn search_is_deterministic() {
        let a = optimize_angles(
            Constellation::Bpsk,
            4,
            GainMetric::MinProductDistance,
            PI / 12.0,
        )
        .unwrap();
        let b = optimize_angles(
            Constellation::Bpsk,
            4,
            GainMetric::MinProductDistance,
            PI / 12.0,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn search_errors() {
        assert!(matches!(
            optimize_angles(Constellation::Bpsk, 4, GainMetric::MinProductDistance, 0.3),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            optimize_angles_with_cap(
                Constellation::Bpsk,
                4,
                GainMetric::MinProductDistance,
                PI / 36.0,
                1000
            ),
            Err(Error::GridTooLarge {
                size: 46656,
                cap: 1000
            })
        ));
        assert!(matches!(
            optimize_angles(
                Constellation::Bpsk,
                6,
                GainMetric::MinProductDistance,
                PI / 4.0
            ),
            Err(Error::NotPowerOfTwo(6))
        ));
    }

    #[test]
    fn report_text_has_key_value_lines() {
        let r = optimize_angles(
            Constellation::Bpsk,
            2,
            GainMetric::MinProductDistance,
            PI / 4.0,
        )
        .unwrap();
        let text = r.to_text();
        assert!(text.lines().all(|l| l.contains(": ")));
        assert!(text.contains("metric_name: min_product_distance"));
    }
}
