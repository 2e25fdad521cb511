//! QOSF encoder.
//!
//! Each group of `2·P·L` source symbols is split into its odd and even
//! positions, both halves are combined by `Θ = U·diag(1, e^{jθ1}, …)` with
//! `U` the Sylvester Hadamard matrix, and the combined symbols are laid out
//! as `L` stacked Alamouti blocks per radiation state:
//!
//! ```text
//! G_p = [ A(S_{2(p-1)L+1}, S_{2(p-1)L+2}) ]      A(x1, x2) = [  x1   x2  ]
//!       [             ...                 ]                  [ -x2*  x1* ]
//!       [ A(S_{2pL-1},     S_{2pL})       ]
//! ```
//!
//! `C_p` is the concatenation of the `G_p^T` of every group followed by
//! zero padding. Combined symbols are scaled by `κ = 1/√(PL)` so every
//! non-padding codeword entry has unit average energy.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::config::SystemConfig;
use crate::primitives::{hadamard, Complex, ComplexMatrix};
use crate::{Error, Result};

/// Transmit antennas the code is constructed for.
pub const NUM_TX: usize = 2;

/// `P·L − 1` rotation angles, each in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationAngles(Vec<f64>);

impl RotationAngles {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if let Some(bad) = angles
            .iter()
            .find(|a| !(a.is_finite() && (0.0..2.0 * PI).contains(*a)))
        {
            return Err(Error::InvalidConfig(format!(
                "rotation angle {bad} outside [0, 2π)"
            )));
        }
        Ok(Self(angles))
    }

    /// Wraps arbitrary finite angles into `[0, 2π)`.
    pub fn wrapped(angles: impl IntoIterator<Item = f64>) -> Self {
        Self(
            angles
                .into_iter()
                .map(|a| {
                    let w = a.rem_euclid(2.0 * PI);
                    if w >= 2.0 * PI {
                        0.0
                    } else {
                        w
                    }
                })
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One group of `2·P·L` source symbols `s_1..s_{2PL}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGroup(pub Vec<Complex>);

/// Combined symbols `S_1..S_{2PL}` of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedGroup(pub Vec<Complex>);

/// `Θ = hadamard(pl) · diag(1, e^{jθ1}, …, e^{jθ_{pl−1}})`.
pub fn build_theta(angles: &RotationAngles, pl: usize) -> Result<ComplexMatrix> {
    let u = hadamard(pl)?;
    if angles.len() + 1 != pl {
        return Err(Error::LengthMismatch {
            what: "rotation angles",
            expected: pl - 1,
            actual: angles.len(),
        });
    }
    let diag: Vec<Complex> = std::iter::once(Complex::new(1.0, 0.0))
        .chain(
            angles
                .as_slice()
                .iter()
                .map(|&a| Complex::from_polar(1.0, a)),
        )
        .collect();
    Ok(&u * &ComplexMatrix::diagonal(&diag))
}

/// Applies `κ·Θ` separately to the odd (`s_1, s_3, …`) and even
/// (`s_2, s_4, …`) positions of the group, with `κ = 1/√pl`.
pub fn combine(group: &SymbolGroup, theta: &ComplexMatrix) -> Result<CombinedGroup> {
    let pl = theta.rows();
    if theta.cols() != pl {
        return Err(Error::DimensionMismatch(format!(
            "theta must be square, got {}x{}",
            pl,
            theta.cols()
        )));
    }
    if group.0.len() != 2 * pl {
        return Err(Error::LengthMismatch {
            what: "symbol group",
            expected: 2 * pl,
            actual: group.0.len(),
        });
    }
    let kappa = 1.0 / (pl as f64).sqrt();
    let odd: Vec<Complex> = group.0.iter().step_by(2).copied().collect();
    let even: Vec<Complex> = group.0.iter().skip(1).step_by(2).copied().collect();
    let odd = theta.mul_vec(&odd)?;
    let even = theta.mul_vec(&even)?;
    let mut combined = Vec::with_capacity(2 * pl);
    for (o, e) in odd.into_iter().zip(even) {
        combined.push(o * kappa);
        combined.push(e * kappa);
    }
    Ok(CombinedGroup(combined))
}

/// The Alamouti block `[[x1, x2], [−x2*, x1*]]`.
pub fn alamouti(x1: Complex, x2: Complex) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![x1, x2], vec![-x2.conj(), x1.conj()]]).expect("2x2 literal")
}

/// Stack of `depth` Alamouti blocks for radiation state `state` (1-based):
/// block `k` is `A(S_{2(p−1)·depth+2k−1}, S_{2(p−1)·depth+2k})`.
pub fn encode_group(
    combined: &CombinedGroup,
    state: usize,
    num_states: usize,
    depth: usize,
) -> Result<ComplexMatrix> {
    if state == 0 || state > num_states {
        return Err(Error::StateOutOfRange { state, num_states });
    }
    let expected = 2 * num_states * depth;
    if combined.0.len() != expected {
        return Err(Error::LengthMismatch {
            what: "combined group",
            expected,
            actual: combined.0.len(),
        });
    }
    let mut g = ComplexMatrix::zeros(depth * NUM_TX, NUM_TX);
    for k in 0..depth {
        let base = 2 * (state - 1) * depth + 2 * k;
        let block = alamouti(combined.0[base], combined.0[base + 1]);
        for r in 0..2 {
            for c in 0..2 {
                g[(2 * k + r, c)] = block[(r, c)];
            }
        }
    }
    Ok(g)
}

/// Where a codeword entry comes from: `sign · S_index` or its conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntrySource {
    /// 0-based index into the combined group.
    pub index: usize,
    pub conjugate: bool,
    pub negate: bool,
}

impl EntrySource {
    pub fn apply(self, combined: Complex) -> Complex {
        let z = if self.conjugate {
            combined.conj()
        } else {
            combined
        };
        if self.negate {
            -z
        } else {
            z
        }
    }
}

/// Per-state space-frequency codewords `C_1..C_P`, each `Mt × Nc`.
#[derive(Debug, Clone, PartialEq)]
pub struct SfCodeword {
    pub states: Vec<ComplexMatrix>,
    pub num_groups: usize,
}

impl SfCodeword {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_subcarriers(&self) -> usize {
        self.states.first().map_or(0, ComplexMatrix::cols)
    }

    /// Text dump: one line per (state, antenna) pair in state-major order,
    /// entries written as `re+imj` and separated by commas.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# states={} tx={} subcarriers={}",
            self.num_states(),
            NUM_TX,
            self.num_subcarriers()
        );
        for c in &self.states {
            for i in 0..c.rows() {
                let line: Vec<String> = c.row(i).iter().map(|&z| format_complex(z)).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
        }
        out
    }

    /// Parses [`SfCodeword::to_text`] output. Lines starting with `#` are
    /// skipped; `num_groups` must be supplied since the dump doesn't carry it.
    pub fn from_text(text: &str, num_tx: usize, num_groups: usize) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|tok| parse_complex(tok.trim()))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Parse {
                    path: "<codeword>".into(),
                    line: lineno + 1,
                    message: "malformed complex entry".into(),
                })?;
            rows.push(row);
        }
        if num_tx == 0 || rows.len() % num_tx != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} rows is not a multiple of {num_tx} antennas",
                rows.len()
            )));
        }
        let states = rows
            .chunks(num_tx)
            .map(ComplexMatrix::from_rows)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { states, num_groups })
    }
}

pub fn format_complex(z: Complex) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", z.re, sign, z.im.abs())
}

pub fn parse_complex(s: &str) -> Option<Complex> {
    let body = s.strip_suffix('j')?;
    // split at the sign that starts the imaginary part
    let split = body
        .char_indices()
        .skip(1)
        .filter(|&(i, ch)| {
            (ch == '+' || ch == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E')
        })
        .map(|(i, _)| i)
        .last()?;
    let re: f64 = body[..split].parse().ok()?;
    let im: f64 = body[split..].parse().ok()?;
    Some(Complex::new(re, im))
}

/// A concrete QOSF code: `num_states` radiation states, `depth` Alamouti
/// blocks per state and group, and the combining matrix.
///
/// `depth` is the number of channel paths `L` for the stacked codes;
/// the spatial-only Alamouti baseline is `num_states = depth = 1`.
#[derive(Debug, Clone)]
pub struct QosfCode {
    num_states: usize,
    depth: usize,
    num_subcarriers: usize,
    theta: ComplexMatrix,
    kappa: f64,
}

impl QosfCode {
    pub fn new(
        num_states: usize,
        depth: usize,
        num_subcarriers: usize,
        angles: &RotationAngles,
    ) -> Result<Self> {
        if num_states == 0 || depth == 0 {
            return Err(Error::InvalidConfig(
                "num_states and depth must be positive".into(),
            ));
        }
        let pl = num_states * depth;
        let theta = build_theta(angles, pl)?;
        if num_subcarriers < depth * NUM_TX {
            return Err(Error::InvalidConfig(format!(
                "{num_subcarriers} subcarriers cannot hold one group of {}",
                depth * NUM_TX
            )));
        }
        Ok(Self {
            num_states,
            depth,
            num_subcarriers,
            theta,
            kappa: 1.0 / (pl as f64).sqrt(),
        })
    }

    pub fn from_config(config: &SystemConfig) -> Result<Self> {
        if config.num_tx != NUM_TX {
            return Err(Error::UnsupportedTxCount(config.num_tx));
        }
        Self::new(
            config.num_states,
            config.num_paths,
            config.num_subcarriers,
            &RotationAngles::new(config.rotation_angles.clone())?,
        )
    }

    /// Plain Alamouti blocks on adjacent subcarrier pairs: one state, no
    /// stacking, no rotation.
    pub fn alamouti_sf(num_subcarriers: usize) -> Result<Self> {
        Self::new(1, 1, num_subcarriers, &RotationAngles::new(Vec::new())?)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    pub fn pl(&self) -> usize {
        self.num_states * self.depth
    }

    /// Source symbols per group, `2·P·L`.
    pub fn group_len(&self) -> usize {
        2 * self.pl()
    }

    /// Subcarriers per group in every state, `L·Mt`.
    pub fn tones_per_group(&self) -> usize {
        self.depth * NUM_TX
    }

    pub fn num_groups(&self) -> usize {
        self.num_subcarriers / self.tones_per_group()
    }

    /// Source symbols carried by one codeword (all states).
    pub fn symbols_per_codeword(&self) -> usize {
        self.num_groups() * self.group_len()
    }

    pub fn theta(&self) -> &ComplexMatrix {
        &self.theta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Source of entry (tx antenna `tx`, tone `tone` within a group) in
    /// 0-based state `state`.
    pub fn entry_source(&self, state: usize, tone: usize, tx: usize) -> EntrySource {
        debug_assert!(state < self.num_states && tone < self.tones_per_group() && tx < NUM_TX);
        let a = 2 * state * self.depth + (tone / 2) * 2;
        match (tone % 2, tx) {
            (0, 0) => EntrySource {
                index: a,
                conjugate: false,
                negate: false,
            },
            (0, _) => EntrySource {
                index: a + 1,
                conjugate: false,
                negate: false,
            },
            (_, 0) => EntrySource {
                index: a + 1,
                conjugate: true,
                negate: true,
            },
            (_, _) => EntrySource {
                index: a,
                conjugate: true,
                negate: false,
            },
        }
    }

    pub fn combine(&self, group: &SymbolGroup) -> Result<CombinedGroup> {
        combine(group, &self.theta)
    }

    pub fn encode(&self, symbols: &[Complex]) -> Result<SfCodeword> {
        let expected = self.symbols_per_codeword();
        if symbols.len() != expected {
            return Err(Error::LengthMismatch {
                what: "codeword symbols",
                expected,
                actual: symbols.len(),
            });
        }
        let tones = self.tones_per_group();
        let mut states = vec![ComplexMatrix::zeros(NUM_TX, self.num_subcarriers); self.num_states];
        for (m, chunk) in symbols.chunks_exact(self.group_len()).enumerate() {
            let combined = self.combine(&SymbolGroup(chunk.to_vec()))?;
            for (p, c) in states.iter_mut().enumerate() {
                let g = encode_group(&combined, p + 1, self.num_states, self.depth)?;
                let gt = g.transpose();
                for i in 0..NUM_TX {
                    for t in 0..tones {
                        c[(i, m * tones + t)] = gt[(i, t)];
                    }
                }
            }
        }
        Ok(SfCodeword {
            states,
            num_groups: self.num_groups(),
        })
    }
}

/// Encodes with the code described by `config`.
pub fn encode(symbols: &[Complex], config: &SystemConfig) -> Result<SfCodeword> {
    QosfCode::from_config(config)?.encode(symbols)
}
