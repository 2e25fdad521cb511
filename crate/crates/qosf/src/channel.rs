//! Per-state frequency-selective Rayleigh channels and the frequency-domain
//! received-signal model
//!
//! ```text
//! H_p^{i,j}(n) = Σ_l α_p^{i,j}(l) · exp(−j2π n Δf τ_{l,p})
//! y_p^j(n)     = √(γ/Mt) · Σ_i H_p^{i,j}(n) c_p^i(n) + z_p^j(n)
//! ```
//!
//! The cyclic prefix covers the delay spread and the channel is static over
//! an OFDM symbol, so the time-domain CP/FFT chain is not simulated;
//! [`validate_against_time_domain`] checks the equivalence.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::codec::SfCodeword;
use crate::config::SystemConfig;
use crate::primitives::Complex;
use crate::{Error, Result};

/// Tap amplitudes `α_p^{i,j}(l)`, stored `[state][rx][tx][path]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub num_states: usize,
    pub num_rx: usize,
    pub num_tx: usize,
    pub num_paths: usize,
    pub taps: Vec<Complex>,
    pub delays_s: Vec<Vec<f64>>,
    pub path_powers: Vec<Vec<f64>>,
}

impl ChannelRealization {
    pub fn tap(&self, state: usize, rx: usize, tx: usize, path: usize) -> Complex {
        self.taps[((state * self.num_rx + rx) * self.num_tx + tx) * self.num_paths + path]
    }

    pub fn tap_mut(&mut self, state: usize, rx: usize, tx: usize, path: usize) -> &mut Complex {
        &mut self.taps[((state * self.num_rx + rx) * self.num_tx + tx) * self.num_paths + path]
    }
}

/// `H_p^{i,j}(n)`, stored `[state][subcarrier][rx][tx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFrequencyGrid {
    pub num_states: usize,
    pub num_subcarriers: usize,
    pub num_rx: usize,
    pub num_tx: usize,
    pub response: Vec<Complex>,
}

impl ChannelFrequencyGrid {
    pub fn zeros(num_states: usize, num_subcarriers: usize, num_rx: usize, num_tx: usize) -> Self {
        Self {
            num_states,
            num_subcarriers,
            num_rx,
            num_tx,
            response: vec![Complex::new(0.0, 0.0); num_states * num_subcarriers * num_rx * num_tx],
        }
    }

    fn offset(&self, state: usize, n: usize, rx: usize, tx: usize) -> usize {
        ((state * self.num_subcarriers + n) * self.num_rx + rx) * self.num_tx + tx
    }

    pub fn get(&self, state: usize, n: usize, rx: usize, tx: usize) -> Complex {
        self.response[self.offset(state, n, rx, tx)]
    }

    pub fn set(&mut self, state: usize, n: usize, rx: usize, tx: usize, value: Complex) {
        let k = self.offset(state, n, rx, tx);
        self.response[k] = value;
    }
}

/// `y_p^j(n)`, stored `[state][subcarrier][rx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock {
    pub num_states: usize,
    pub num_subcarriers: usize,
    pub num_rx: usize,
    pub samples: Vec<Complex>,
    pub snr_linear: f64,
}

impl ReceivedBlock {
    pub fn get(&self, state: usize, n: usize, rx: usize) -> Complex {
        self.samples[(state * self.num_subcarriers + n) * self.num_rx + rx]
    }

    pub fn get_mut(&mut self, state: usize, n: usize, rx: usize) -> &mut Complex {
        &mut self.samples[(state * self.num_subcarriers + n) * self.num_rx + rx]
    }
}

/// Circularly-symmetric complex Gaussian with `E|z|² = variance`.
pub fn complex_gaussian(rng: &mut impl Rng, variance: f64) -> Complex {
    let sigma = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(sigma * re, sigma * im)
}

/// Draws independent taps with variance `path_powers[p][l]`, in
/// `[state][rx][tx][path]` order so the first state's taps don't depend on
/// how many states are drawn.
pub fn draw_channel(config: &SystemConfig, rng: &mut impl Rng) -> ChannelRealization {
    let (np, nr, nt, nl) = (
        config.num_states,
        config.num_rx,
        config.num_tx,
        config.num_paths,
    );
    let mut taps = Vec::with_capacity(np * nr * nt * nl);
    for p in 0..np {
        for _ in 0..nr {
            for _ in 0..nt {
                for l in 0..nl {
                    taps.push(complex_gaussian(rng, config.path_powers[p][l]));
                }
            }
        }
    }
    ChannelRealization {
        num_states: np,
        num_rx: nr,
        num_tx: nt,
        num_paths: nl,
        taps,
        delays_s: config.delays_s.clone(),
        path_powers: config.path_powers.clone(),
    }
}

pub fn frequency_response(
    real: &ChannelRealization,
    config: &SystemConfig,
) -> ChannelFrequencyGrid {
    ToneResponder::new(config).response(real)
}

/// Precomputed `e^{−j2π n Δf τ_{l,p}}` for every state, tone and path of a
/// config, for evaluating many realizations with the same delay profile.
#[derive(Debug, Clone)]
pub struct ToneResponder {
    num_subcarriers: usize,
    num_paths: usize,
    /// `[state][tone][path]`
    phasors: Vec<Complex>,
}

impl ToneResponder {
    pub fn new(config: &SystemConfig) -> Self {
        let nc = config.num_subcarriers;
        let df = config.subcarrier_spacing_hz();
        let phasors = config
            .delays_s
            .iter()
            .flat_map(|delays| {
                (0..nc).flat_map(move |n| {
                    delays
                        .iter()
                        .map(move |&tau| Complex::from_polar(1.0, -2.0 * PI * n as f64 * df * tau))
                })
            })
            .collect();
        Self {
            num_subcarriers: nc,
            num_paths: config.num_paths,
            phasors,
        }
    }

    pub fn response(&self, real: &ChannelRealization) -> ChannelFrequencyGrid {
        let (nc, nl) = (self.num_subcarriers, self.num_paths);
        assert_eq!(
            real.num_paths, nl,
            "realization and responder disagree on path count"
        );
        assert!(
            self.phasors.len() >= real.num_states * nc * nl,
            "realization has more states than the responder"
        );
        let mut grid = ChannelFrequencyGrid::zeros(real.num_states, nc, real.num_rx, real.num_tx);
        for p in 0..real.num_states {
            for n in 0..nc {
                let ph = &self.phasors[(p * nc + n) * nl..][..nl];
                for j in 0..real.num_rx {
                    for i in 0..real.num_tx {
                        let h: Complex = (0..nl).map(|l| real.tap(p, j, i, l) * ph[l]).sum();
                        grid.set(p, n, j, i, h);
                    }
                }
            }
        }
        grid
    }
}

/// Applies the channel and, unless `noiseless`, unit-variance complex AWGN.
/// Noise is drawn in `[state][subcarrier][rx]` order.
pub fn apply(
    cw: &SfCodeword,
    grid: &ChannelFrequencyGrid,
    snr_linear: f64,
    rng: &mut impl Rng,
    noiseless: bool,
) -> Result<ReceivedBlock> {
    let nc = cw.num_subcarriers();
    let nt = cw.states.first().map_or(0, |c| c.rows());
    if cw.num_states() != grid.num_states || nc != grid.num_subcarriers || nt != grid.num_tx {
        return Err(Error::DimensionMismatch(format!(
            "codeword is {} states x {} tx x {} tones, channel is {} x {} x {}",
            cw.num_states(),
            nt,
            nc,
            grid.num_states,
            grid.num_tx,
            grid.num_subcarriers
        )));
    }
    let amp = (snr_linear / nt as f64).sqrt();
    let nr = grid.num_rx;
    let mut samples = Vec::with_capacity(cw.num_states() * nc * nr);
    for (p, c) in cw.states.iter().enumerate() {
        for n in 0..nc {
            for j in 0..nr {
                let signal: Complex = (0..nt).map(|i| grid.get(p, n, j, i) * c[(i, n)]).sum();
                let noise = if noiseless {
                    Complex::new(0.0, 0.0)
                } else {
                    complex_gaussian(rng, 1.0)
                };
                samples.push(signal * amp + noise);
            }
        }
    }
    Ok(ReceivedBlock {
        num_states: cw.num_states(),
        num_subcarriers: nc,
        num_rx: nr,
        samples,
        snr_linear,
    })
}

/// Max over tones, states and antenna pairs of `|DFT(h)(n) − H(n)|`, where
/// `h` is the sampled impulse response with each tap placed at
/// `τ / (Ts/Nc)`.
pub fn validate_against_time_domain(
    real: &ChannelRealization,
    config: &SystemConfig,
) -> Result<f64> {
    let nc = config.num_subcarriers;
    let ts = config.sample_period_s();
    let mut positions = Vec::with_capacity(real.num_states);
    for delays in &real.delays_s {
        let pos = delays
            .iter()
            .map(|&tau| {
                let k = tau / ts;
                let r = k.round();
                if (k - r).abs() > 1e-9 * k.abs().max(1.0) || r < 0.0 {
                    Err(Error::NonIntegerDelay { delay_samples: k })
                } else {
                    Ok(r as usize % nc)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        positions.push(pos);
    }
    let grid = frequency_response(real, config);
    let mut worst: f64 = 0.0;
    for (p, pos) in positions.iter().enumerate() {
        for j in 0..real.num_rx {
            for i in 0..real.num_tx {
                let mut impulse = vec![Complex::new(0.0, 0.0); nc];
                for (l, &k) in pos.iter().enumerate() {
                    impulse[k] += real.tap(p, j, i, l);
                }
                for n in 0..nc {
                    let dft: Complex = impulse
                        .iter()
                        .enumerate()
                        .map(|(k, &h)| {
                            h * Complex::from_polar(
                                1.0,
                                -2.0 * PI * ((n * k) % nc) as f64 / nc as f64,
                            )
                        })
                        .sum();
                    worst = worst.max((dft - grid.get(p, n, j, i)).norm());
                }
            }
        }
    }
    Ok(worst)
}
