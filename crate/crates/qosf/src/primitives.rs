//! Numeric building blocks: complex scalars, small dense complex matrices,
//! Sylvester Hadamard matrices and the BPSK/QPSK symbol mappers.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Complex = num_complex::Complex64;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn diagonal(entries: &[Complex]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Complex] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    /// Hermitian (conjugate) transpose.
    pub fn adjoint(&self) -> Self {
        let mut t = self.transpose();
        t.data.iter_mut().for_each(|z| *z = z.conj());
        t
    }

    pub fn scale(&self, k: Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * k).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex]) -> Result<Vec<Complex>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix dimensions must agree")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(r) {
                write!(f, "{:>+.4}{:+.4}j  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Sylvester-ordered ±1 Hadamard matrix as integers: entry (r, c) is
/// `(-1)^popcount(r & c)`.
pub fn hadamard_signs(order: usize) -> Result<Vec<Vec<i32>>> {
    if !order.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(order));
    }
    Ok((0..order)
        .map(|r| {
            (0..order)
                .map(|c| if (r & c).count_ones() % 2 == 0 { 1 } else { -1 })
                .collect()
        })
        .collect())
}

/// Sylvester-ordered real Hadamard matrix, `H * H^T = order * I`.
pub fn hadamard(order: usize) -> Result<ComplexMatrix> {
    let signs = hadamard_signs(order)?;
    let rows: Vec<Vec<Complex>> = signs
        .iter()
        .map(|r| r.iter().map(|&s| Complex::new(s as f64, 0.0)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows)
}

/// Symbol alphabet. Points are enumerated in a fixed order which also
/// defines decoder tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constellation {
    Bpsk,
    Qpsk,
}

const BPSK_POINTS: [Complex; 2] = [Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)];

// Gray labelled: bit pair (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2),
// listed in label order 00, 01, 10, 11.
const QPSK_POINTS: [Complex; 4] = [
    Complex::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    Complex::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    Complex::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    Complex::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
];

impl Constellation {
    pub fn points(self) -> &'static [Complex] {
        match self {
            Constellation::Bpsk => &BPSK_POINTS,
            Constellation::Qpsk => &QPSK_POINTS,
        }
    }

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Constellation::Bpsk => 1,
            Constellation::Qpsk => 2,
        }
    }

    pub fn size(self) -> usize {
        self.points().len()
    }

    pub fn name(self) -> &'static str {
        match self {
            Constellation::Bpsk => "bpsk",
            Constellation::Qpsk => "qpsk",
        }
    }

    /// Index of the nearest point; ties go to the lowest index.
    pub fn nearest_index(self, z: Complex) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points().iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

impl std::str::FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Constellation::Bpsk),
            "qpsk" => Ok(Constellation::Qpsk),
            other => Err(Error::InvalidConfig(format!(
                "unknown constellation {other:?}"
            ))),
        }
    }
}

/// Maps bits (0/1, most significant first within a symbol) to unit-energy
/// symbols.
pub fn modulate(bits: &[u8], constellation: Constellation) -> Result<Vec<Complex>> {
    let k = constellation.bits_per_symbol();
    if !bits.len().is_multiple_of(k) {
        return Err(Error::OddBitCount(bits.len()));
    }
    let points = constellation.points();
    Ok(bits
        .chunks_exact(k)
        .map(|chunk| {
            let label = chunk
                .iter()
                .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
            points[label]
        })
        .collect())
}

/// Hard-decision nearest-point demapper.
pub fn demodulate(symbols: &[Complex], constellation: Constellation) -> Vec<u8> {
    let k = constellation.bits_per_symbol();
    let mut bits = Vec::with_capacity(symbols.len() * k);
    for &z in symbols {
        let label = constellation.nearest_index(z);
        for shift in (0..k).rev() {
            bits.push(((label >> shift) & 1) as u8);
        }
    }
    bits
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn hadamard_small_orders() {
        assert_eq!(hadamard_signs(1).unwrap(), vec![vec![1]]);
        assert_eq!(hadamard_signs(2).unwrap(), vec![vec![1, 1], vec![1, -1]]);
        assert_eq!(
            hadamard_signs(4).unwrap(),
            vec![
                vec![1, 1, 1, 1],
                vec![1, -1, 1, -1],
                vec![1, 1, -1, -1],
                vec![1, -1, -1, 1],
            ]
        );
        assert!(matches!(hadamard(3), Err(Error::NotPowerOfTwo(3))));
        assert!(matches!(hadamard(0), Err(Error::NotPowerOfTwo(0))));
    }

    #[test]
    fn hadamard_is_sylvester_doubling() {
        // H_{2n} = [[H_n, H_n], [H_n, -H_n]]
        for n in [1usize, 2, 4, 8, 16] {
            let h = hadamard_signs(n).unwrap();
            let h2 = hadamard_signs(2 * n).unwrap();
            for r in 0..n {
                for col in 0..n {
                    assert_eq!(h2[r][col], h[r][col]);
                    assert_eq!(h2[r][col + n], h[r][col]);
                    assert_eq!(h2[r + n][col], h[r][col]);
                    assert_eq!(h2[r + n][col + n], -h[r][col]);
                }
            }
        }
    }

    #[test]
    fn hadamard_orthogonality_is_exact() {
        for n in [1usize, 2, 4, 8, 16, 32] {
            let h = hadamard_signs(n).unwrap();
            for a in 0..n {
                for b in 0..n {
                    let dot: i32 = (0..n).map(|k| h[a][k] * h[b][k]).sum();
                    assert_eq!(dot, if a == b { n as i32 } else { 0 });
                }
            }
        }
    }

    #[test]
    fn modulate_conventions() {
        assert_eq!(
            modulate(&[0], Constellation::Bpsk).unwrap(),
            vec![c(1.0, 0.0)]
        );
        assert_eq!(
            modulate(&[1], Constellation::Bpsk).unwrap(),
            vec![c(-1.0, 0.0)]
        );
        let q = modulate(&[0, 0], Constellation::Qpsk).unwrap();
        assert!((q[0] - c(1.0, 1.0) / 2f64.sqrt()).norm() < 1e-15);
        assert!(matches!(
            modulate(&[0, 1, 1], Constellation::Qpsk),
            Err(Error::OddBitCount(3))
        ));
    }

    #[test]
    fn qpsk_labels_are_gray() {
        let pts = Constellation::Qpsk.points();
        for a in 0..4usize {
            for b in 0..4usize {
                let nearest_neighbours = ((pts[a] - pts[b]).norm() - 2f64.sqrt()).abs() < 1e-12;
                if nearest_neighbours {
                    assert_eq!((a ^ b).count_ones(), 1, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn demodulate_decisions_and_ties() {
        assert_eq!(demodulate(&[c(1.0, 0.0)], Constellation::Bpsk), vec![0]);
        assert_eq!(demodulate(&[c(-0.2, 0.0)], Constellation::Bpsk), vec![1]);
        assert_eq!(demodulate(&[c(0.0, 0.0)], Constellation::Bpsk), vec![0]);
        assert_eq!(demodulate(&[c(0.0, 0.0)], Constellation::Qpsk), vec![0, 0]);
        assert_eq!(
            demodulate(&[c(-0.3, -0.1)], Constellation::Qpsk),
            vec![1, 1]
        );
    }

    #[test]
    fn round_trip_exhaustive_up_to_16_bits() {
        for constellation in [Constellation::Bpsk, Constellation::Qpsk] {
            for len in 0..=16usize {
                if len % constellation.bits_per_symbol() != 0 {
                    continue;
                }
                for word in 0u32..(1 << len) {
                    let bits: Vec<u8> = (0..len).map(|i| ((word >> i) & 1) as u8).collect();
                    let syms = modulate(&bits, constellation).unwrap();
                    assert_eq!(demodulate(&syms, constellation), bits);
                }
            }
        }
    }

    #[test]
    fn unit_average_energy() {
        for constellation in [Constellation::Bpsk, Constellation::Qpsk] {
            let pts = constellation.points();
            let e: f64 = pts.iter().map(|p| p.norm_sqr()).sum::<f64>() / pts.len() as f64;
            assert!((e - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_ops() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 1.0), c(0.0, 2.0)],
            vec![c(3.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let i = ComplexMatrix::identity(2);
        assert_eq!(&a * &i, a);
        assert_eq!(a.adjoint()[(0, 1)], c(3.0, 0.0));
        assert_eq!(a.adjoint()[(1, 0)], c(0.0, -2.0));
        assert_eq!(
            a.mul_vec(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap(),
            vec![c(1.0, 3.0), c(3.0, 0.0)]
        );
        assert!(a.mul_vec(&[c(1.0, 0.0)]).is_err());
        assert!(ComplexMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![]]).is_err());
    }
}
