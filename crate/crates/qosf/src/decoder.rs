//! Maximum-likelihood detection of QOSF symbol groups.
//!
//! The channel matrix is block diagonal over subcarriers, so each group of
//! `L·Mt` tones (in every state) is detected on its own. Two searches are
//! provided:
//!
//! - exhaustive: minimises `Σ |y − √(γ/Mt)·Σ_i H_i c_i|²` over all
//!   `|A|^{2PL}` candidate groups;
//! - decoupled: drops the odd/even cross terms and searches the odd and even
//!   halves separately (`2·|A|^{PL}` candidates). This is exact whenever the
//!   channel is equal on the two tones of every Alamouti pair.
//!
//! Every tone carries exactly one entry derived from the odd half and one
//! derived from the even half, so a candidate's noiseless observation splits
//! as `u(odd) + w(even)`; both searches are built on those per-half tables.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelFrequencyGrid, ReceivedBlock};
use crate::codec::{QosfCode, NUM_TX};
use crate::config::SystemConfig;
use crate::primitives::{demodulate, Complex, Constellation};
use crate::{Error, Result};

/// Default cap on the number of candidates a single search may enumerate.
pub const DEFAULT_SEARCH_CAP: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderMode {
    Exhaustive,
    Decoupled,
}

impl DecoderMode {
    pub fn name(self) -> &'static str {
        match self {
            DecoderMode::Exhaustive => "exhaustive",
            DecoderMode::Decoupled => "decoupled",
        }
    }
}

impl std::str::FromStr for DecoderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(DecoderMode::Exhaustive),
            "decoupled" => Ok(DecoderMode::Decoupled),
            other => Err(Error::InvalidConfig(format!(
                "unknown decoder mode {other:?}"
            ))),
        }
    }
}

/// Received samples and channel of one group window, all states.
///
/// `y` is `[state][tone][rx]`, `h` is `[state][tone][rx][tx]`, tones being
/// the group's `L·Mt` subcarriers.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupObservation {
    pub num_states: usize,
    pub tones: usize,
    pub num_rx: usize,
    pub y: Vec<Complex>,
    pub h: Vec<Complex>,
    pub snr_linear: f64,
}

impl GroupObservation {
    /// Cuts group `m`'s window `[m·L·Mt, (m+1)·L·Mt)` out of a full block.
    pub fn extract(
        received: &ReceivedBlock,
        grid: &ChannelFrequencyGrid,
        code: &QosfCode,
        m: usize,
    ) -> Result<Self> {
        let tones = code.tones_per_group();
        check_block(received, grid, code)?;
        if m >= code.num_groups() {
            return Err(Error::DimensionMismatch(format!(
                "group {m} out of range (code has {})",
                code.num_groups()
            )));
        }
        let nr = received.num_rx;
        let mut y = Vec::with_capacity(code.num_states() * tones * nr);
        let mut h = Vec::with_capacity(code.num_states() * tones * nr * NUM_TX);
        for p in 0..code.num_states() {
            for t in 0..tones {
                let n = m * tones + t;
                for j in 0..nr {
                    y.push(received.get(p, n, j));
                    for i in 0..NUM_TX {
                        h.push(grid.get(p, n, j, i));
                    }
                }
            }
        }
        Ok(Self {
            num_states: code.num_states(),
            tones,
            num_rx: nr,
            y,
            h,
            snr_linear: received.snr_linear,
        })
    }

    pub fn h(&self, state: usize, tone: usize, rx: usize, tx: usize) -> Complex {
        self.h[((state * self.tones + tone) * self.num_rx + rx) * NUM_TX + tx]
    }
}

fn check_block(
    received: &ReceivedBlock,
    grid: &ChannelFrequencyGrid,
    code: &QosfCode,
) -> Result<()> {
    let ok = received.num_states == code.num_states()
        && grid.num_states == code.num_states()
        && received.num_subcarriers == code.num_subcarriers()
        && grid.num_subcarriers == code.num_subcarriers()
        && received.num_rx == grid.num_rx
        && grid.num_tx == NUM_TX;
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "received {}x{}x{}, channel {}x{}x{}x{}, code {} states x {} tones",
            received.num_states,
            received.num_subcarriers,
            received.num_rx,
            grid.num_states,
            grid.num_subcarriers,
            grid.num_rx,
            grid.num_tx,
            code.num_states(),
            code.num_subcarriers()
        )))
    }
}

/// Search machinery for one code and constellation. Holds the combined
/// symbols `κ·Θ·v` of every half-group candidate `v`; reusable across groups
/// and blocks and safe to share between threads.
#[derive(Debug, Clone)]
pub struct Detector {
    code: QosfCode,
    constellation: Constellation,
    cap: u128,
    half_len: usize,
    /// `[candidate][k]`, candidates in lexicographic digit order.
    half_combined: Vec<Vec<Complex>>,
    half_digits: Vec<Vec<usize>>,
    /// Position of each half candidate's digits in the full lexicographic
    /// order, so `odd_keys[o] + even_keys[e]` ranks the interleaved group.
    odd_keys: Vec<usize>,
    even_keys: Vec<usize>,
}

impl Detector {
    pub fn new(code: &QosfCode, constellation: Constellation) -> Result<Self> {
        Self::with_cap(code, constellation, DEFAULT_SEARCH_CAP)
    }

    pub fn with_cap(code: &QosfCode, constellation: Constellation, cap: u128) -> Result<Self> {
        let q = constellation.size() as u128;
        let half_len = code.pl();
        let half_size = checked_pow(q, half_len);
        if half_size > cap {
            return Err(Error::SearchSpaceTooLarge {
                size: half_size,
                cap,
            });
        }
        let points = constellation.points();
        let theta = code.theta();
        let kappa = code.kappa();
        let half_size = half_size as usize;
        let mut half_combined = Vec::with_capacity(half_size);
        let mut half_digits = Vec::with_capacity(half_size);
        for idx in 0..half_size {
            let digits = to_digits(idx, q as usize, half_len);
            let v: Vec<Complex> = digits.iter().map(|&d| points[d]).collect();
            let mut combined = theta.mul_vec(&v)?;
            combined.iter_mut().for_each(|z| *z *= kappa);
            half_combined.push(combined);
            half_digits.push(digits);
        }
        let q = q as usize;
        let spread = |digits: &Vec<usize>, offset: usize| -> usize {
            digits
                .iter()
                .enumerate()
                .map(|(k, &d)| {
                    d.saturating_mul(q.saturating_pow((2 * (half_len - 1 - k) + offset) as u32))
                })
                .fold(0usize, usize::saturating_add)
        };
        let odd_keys = half_digits.iter().map(|d| spread(d, 1)).collect();
        let even_keys = half_digits.iter().map(|d| spread(d, 0)).collect();
        Ok(Self {
            code: code.clone(),
            constellation,
            cap,
            half_len,
            half_combined,
            half_digits,
            odd_keys,
            even_keys,
        })
    }

    pub fn code(&self) -> &QosfCode {
        &self.code
    }

    pub fn constellation(&self) -> Constellation {
        self.constellation
    }

    fn check_obs(&self, obs: &GroupObservation) -> Result<()> {
        let tones = self.code.tones_per_group();
        let rows = self.code.num_states() * tones * obs.num_rx;
        if obs.num_states != self.code.num_states()
            || obs.tones != tones
            || obs.y.len() != rows
            || obs.h.len() != rows * NUM_TX
        {
            return Err(Error::DimensionMismatch(format!(
                "observation {} states x {} tones does not fit the code ({} x {})",
                obs.num_states,
                obs.tones,
                self.code.num_states(),
                tones
            )));
        }
        Ok(())
    }

    /// Per-half noiseless contributions, flat `[candidate][row]` (odd half
    /// when `parity == 0`), rows ordered `[state][tone][rx]`.
    fn half_tables(&self, obs: &GroupObservation, parity: usize) -> Vec<Complex> {
        let amp = (obs.snr_linear / NUM_TX as f64).sqrt();
        let rows = obs.y.len();
        // (row, scaled channel, source) triples that draw on this half
        let mut taps = Vec::with_capacity(rows);
        let mut row = 0;
        for p in 0..obs.num_states {
            for t in 0..obs.tones {
                for j in 0..obs.num_rx {
                    for i in 0..NUM_TX {
                        let src = self.code.entry_source(p, t, i);
                        if src.index % 2 == parity {
                            taps.push((row, obs.h(p, t, j, i) * amp, src));
                        }
                    }
                    row += 1;
                }
            }
        }
        let mut table = vec![Complex::new(0.0, 0.0); self.half_combined.len() * rows];
        for (u, combined) in table.chunks_exact_mut(rows).zip(&self.half_combined) {
            for &(r, h, src) in &taps {
                u[r] += h * src.apply(combined[src.index / 2]);
            }
        }
        table
    }

    /// Exhaustive ML search; returns constellation indices of `s_1..s_{2PL}`.
    /// Ties go to the lexicographically first candidate.
    pub fn exhaustive_indices(&self, obs: &GroupObservation) -> Result<Vec<usize>> {
        self.check_obs(obs)?;
        let full = checked_pow(self.constellation.size() as u128, 2 * self.half_len);
        if full > self.cap {
            return Err(Error::SearchSpaceTooLarge {
                size: full,
                cap: self.cap,
            });
        }
        let rows = obs.y.len();
        let odd = self.half_tables(obs, 0);
        let even = self.half_tables(obs, 1);
        let even_energy: Vec<f64> = even
            .chunks_exact(rows)
            .map(|w| w.iter().map(Complex::norm_sqr).sum())
            .collect();

        // |y − u − w|² = |y − u|² − 2·Re⟨y − u, w⟩ + |w|²
        let mut resid = vec![Complex::new(0.0, 0.0); rows];
        let mut best = (f64::INFINITY, usize::MAX, 0usize, 0usize);
        for (o, u) in odd.chunks_exact(rows).enumerate() {
            for ((r, y), u) in resid.iter_mut().zip(&obs.y).zip(u) {
                *r = y - u;
            }
            let base: f64 = resid.iter().map(Complex::norm_sqr).sum();
            for (e, w) in even.chunks_exact(rows).enumerate() {
                let cross: f64 = resid
                    .iter()
                    .zip(w)
                    .map(|(r, w)| r.re * w.re + r.im * w.im)
                    .sum();
                let metric = base - 2.0 * cross + even_energy[e];
                if metric <= best.0 {
                    let key = self.odd_keys[o] + self.even_keys[e];
                    if metric < best.0 || key < best.1 {
                        best = (metric, key, o, e);
                    }
                }
            }
        }
        Ok(self.interleave(best.2, best.3))
    }

    /// Decoupled search: independent minimisation of the odd-only and
    /// even-only parts of the metric.
    pub fn decoupled_indices(&self, obs: &GroupObservation) -> Result<Vec<usize>> {
        self.check_obs(obs)?;
        let rows = obs.y.len();
        let pick = |table: Vec<Complex>| -> usize {
            let mut best = (f64::INFINITY, 0usize);
            for (idx, u) in table.chunks_exact(rows).enumerate() {
                let metric: f64 = obs
                    .y
                    .iter()
                    .zip(u)
                    .map(|(y, u)| u.norm_sqr() - 2.0 * (y.re * u.re + y.im * u.im))
                    .sum();
                if metric < best.0 {
                    best = (metric, idx);
                }
            }
            best.1
        };
        let o = pick(self.half_tables(obs, 0));
        let e = pick(self.half_tables(obs, 1));
        Ok(self.interleave(o, e))
    }

    pub fn decode_group_indices(
        &self,
        obs: &GroupObservation,
        mode: DecoderMode,
    ) -> Result<Vec<usize>> {
        match mode {
            DecoderMode::Exhaustive => self.exhaustive_indices(obs),
            DecoderMode::Decoupled => self.decoupled_indices(obs),
        }
    }

    fn interleave(&self, odd: usize, even: usize) -> Vec<usize> {
        self.half_digits[odd]
            .iter()
            .zip(&self.half_digits[even])
            .flat_map(|(&a, &b)| [a, b])
            .collect()
    }

    fn to_symbols(&self, indices: &[usize]) -> Vec<Complex> {
        let points = self.constellation.points();
        indices.iter().map(|&d| points[d]).collect()
    }

    /// Detected symbols of every group, in stream order.
    pub fn decode_symbols(
        &self,
        received: &ReceivedBlock,
        grid: &ChannelFrequencyGrid,
        mode: DecoderMode,
    ) -> Result<Vec<Complex>> {
        check_block(received, grid, &self.code)?;
        let mut out = Vec::with_capacity(self.code.symbols_per_codeword());
        for m in 0..self.code.num_groups() {
            let obs = GroupObservation::extract(received, grid, &self.code, m)?;
            let idx = self.decode_group_indices(&obs, mode)?;
            out.extend(self.to_symbols(&idx));
        }
        Ok(out)
    }

    pub fn decode(
        &self,
        received: &ReceivedBlock,
        grid: &ChannelFrequencyGrid,
        mode: DecoderMode,
    ) -> Result<Vec<u8>> {
        let symbols = self.decode_symbols(received, grid, mode)?;
        Ok(demodulate(&symbols, self.constellation))
    }
}

fn checked_pow(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
}

fn to_digits(mut idx: usize, base: usize, len: usize) -> Vec<usize> {
    let mut digits = vec![0; len];
    for d in digits.iter_mut().rev() {
        *d = idx % base;
        idx /= base;
    }
    digits
}

/// Exhaustive ML detection of one group.
pub fn ml_decode_group(
    obs: &GroupObservation,
    code: &QosfCode,
    constellation: Constellation,
) -> Result<Vec<Complex>> {
    let det = Detector::new(code, constellation)?;
    let idx = det.exhaustive_indices(obs)?;
    Ok(det.to_symbols(&idx))
}

/// Decoupled odd/even ML detection of one group.
pub fn decoupled_ml_decode_group(
    obs: &GroupObservation,
    code: &QosfCode,
    constellation: Constellation,
) -> Result<Vec<Complex>> {
    let det = Detector::new(code, constellation)?;
    let idx = det.decoupled_indices(obs)?;
    Ok(det.to_symbols(&idx))
}

/// Decodes a full block with the code described by `config`.
pub fn decode(
    received: &ReceivedBlock,
    grid: &ChannelFrequencyGrid,
    config: &SystemConfig,
    mode: DecoderMode,
) -> Result<Vec<u8>> {
    let code = QosfCode::from_config(config)?;
    Detector::new(&code, config.constellation)?.decode(received, grid, mode)
}
