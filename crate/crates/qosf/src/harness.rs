//! Monte Carlo BER engine.
//!
//! Every OFDM block draws its bits, channel and noise from three ChaCha
//! streams seeded by `(master_seed, snr_index, block_index, stream)`, so a
//! sweep is a pure function of its spec: the worker count and scheduling
//! only change how fast it runs. Blocks are simulated in parallel batches
//! and then accumulated in block order until `min_bit_errors` is reached or
//! `max_ofdm_blocks` have been run.
//!
//! With common random numbers (the default) two schemes simulated with the
//! same seed see the same first-state channel and noise in every block.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{apply, draw_channel, ToneResponder};
use crate::codec::QosfCode;
use crate::config::SystemConfig;
use crate::decoder::{DecoderMode, Detector};
use crate::primitives::{modulate, Constellation};
use crate::{Error, Result};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "QOSF_WORKERS";

const RESULTS_FORMAT: &str = "qosf-ber-results v1";
const CSV_HEADER: &str = "snr_db,bits,errors,ber";

/// Transmission scheme simulated over a [`SystemConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// The QOSF code over all configured radiation states.
    Proposed,
    /// The same code restricted to one radiation state (quasi-orthogonal SF
    /// baseline), angles `k·π/L`.
    QosfP1,
    /// Alamouti blocks on adjacent tone pairs, one state, no rotation.
    AlamoutiSf,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Proposed, Scheme::QosfP1, Scheme::AlamoutiSf];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::QosfP1 => "qosf-p1",
            Scheme::AlamoutiSf => "alamouti-sf",
        }
    }

    /// Config actually seen by the channel for this scheme.
    pub fn link_config(self, config: &SystemConfig) -> SystemConfig {
        match self {
            Scheme::Proposed => config.clone(),
            Scheme::QosfP1 | Scheme::AlamoutiSf => config.single_state(),
        }
    }

    pub fn code(self, config: &SystemConfig) -> Result<QosfCode> {
        match self {
            Scheme::Proposed | Scheme::QosfP1 => QosfCode::from_config(&self.link_config(config)),
            Scheme::AlamoutiSf => QosfCode::alamouti_sf(config.num_subcarriers),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown scheme {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub config: SystemConfig,
    pub scheme: Scheme,
    /// Strictly increasing.
    pub snr_db_points: Vec<f64>,
    pub min_bit_errors: u64,
    pub max_ofdm_blocks: u64,
    pub decoder_mode: DecoderMode,
    pub scenario_label: String,
    /// Skip the additive noise entirely.
    pub noiseless: bool,
    /// Share channel/noise streams with other schemes run from the same
    /// seed. When false the streams are also keyed by scheme and label.
    pub common_random_numbers: bool,
}

/// 0, 2, …, 20 dB.
pub fn default_snr_grid() -> Vec<f64> {
    (0..=10).map(|k| 2.0 * k as f64).collect()
}

impl SweepSpec {
    pub fn new(config: SystemConfig, scheme: Scheme) -> Self {
        Self {
            config,
            scheme,
            snr_db_points: default_snr_grid(),
            min_bit_errors: 200,
            max_ofdm_blocks: 100_000,
            decoder_mode: DecoderMode::Exhaustive,
            scenario_label: scheme.name().to_string(),
            noiseless: false,
            common_random_numbers: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.snr_db_points.is_empty() {
            return Err(Error::InvalidSpec("no SNR points".into()));
        }
        if self.snr_db_points.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidSpec("SNR points must be finite".into()));
        }
        if self.snr_db_points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec(
                "SNR points must be strictly increasing".into(),
            ));
        }
        if self.min_bit_errors == 0 {
            return Err(Error::InvalidSpec(
                "min_bit_errors must be at least 1".into(),
            ));
        }
        if self.max_ofdm_blocks == 0 {
            return Err(Error::InvalidSpec(
                "max_ofdm_blocks must be at least 1".into(),
            ));
        }
        validate_label(&self.scenario_label)
    }

    fn stream_key(&self) -> u64 {
        if self.common_random_numbers {
            self.config.master_seed
        } else {
            let mut h = self.config.master_seed ^ 0x5bd1_e995;
            for b in self
                .scheme
                .name()
                .bytes()
                .chain([0u8])
                .chain(self.scenario_label.bytes())
            {
                h = splitmix64(h ^ b as u64);
            }
            h
        }
    }
}

fn validate_label(label: &str) -> Result<()> {
    if label.is_empty()
        || label.chars().any(|c| c.is_control() || c == ',')
        || label.trim() != label
    {
        return Err(Error::InvalidSpec(format!(
            "scenario label {label:?} must be non-empty, trimmed and free of commas and control characters"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bits_simulated: u64,
    pub bit_errors: u64,
    pub ber: f64,
}

impl BerPoint {
    pub fn new(snr_db: f64, bits_simulated: u64, bit_errors: u64) -> Self {
        let ber = if bits_simulated == 0 {
            0.0
        } else {
            bit_errors as f64 / bits_simulated as f64
        };
        Self {
            snr_db,
            bits_simulated,
            bit_errors,
            ber,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub points: Vec<BerPoint>,
    /// Not persisted by [`write_results`]; reads back as 0.
    pub wall_time_s: f64,
    pub code_version: String,
    pub master_seed: u64,
}

/// Stream identifiers mixed into per-block seeds.
#[derive(Debug, Clone, Copy)]
enum Stream {
    Bits = 1,
    Channel = 2,
    Noise = 3,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn block_rng(key: u64, snr_index: usize, block: u64, stream: Stream) -> ChaCha8Rng {
    let mut h = splitmix64(key);
    h = splitmix64(h ^ snr_index as u64);
    h = splitmix64(h ^ block);
    h = splitmix64(h ^ stream as u64);
    ChaCha8Rng::seed_from_u64(h)
}

/// Everything needed to simulate blocks of one spec; built once per sweep.
struct Link<'a> {
    spec: &'a SweepSpec,
    config: SystemConfig,
    code: QosfCode,
    detector: Detector,
    responder: ToneResponder,
    key: u64,
}

impl<'a> Link<'a> {
    fn new(spec: &'a SweepSpec) -> Result<Self> {
        spec.validate()?;
        let config = spec.scheme.link_config(&spec.config);
        let code = spec.scheme.code(&spec.config)?;
        let detector = Detector::new(&code, config.constellation)?;
        Ok(Self {
            spec,
            responder: ToneResponder::new(&config),
            config,
            code,
            detector,
            key: spec.stream_key(),
        })
    }

    fn constellation(&self) -> Constellation {
        self.config.constellation
    }

    fn bits_per_block(&self) -> u64 {
        (self.code.symbols_per_codeword() * self.constellation().bits_per_symbol()) as u64
    }

    fn run_block(&self, snr_index: usize, snr_linear: f64, block: u64) -> Result<u64> {
        let n_bits = self.bits_per_block() as usize;
        let mut bit_rng = block_rng(self.key, snr_index, block, Stream::Bits);
        let bits: Vec<u8> = (0..n_bits).map(|_| bit_rng.random_range(0..2u8)).collect();
        let symbols = modulate(&bits, self.constellation())?;
        let cw = self.code.encode(&symbols)?;

        let mut chan_rng = block_rng(self.key, snr_index, block, Stream::Channel);
        let realization = draw_channel(&self.config, &mut chan_rng);
        let grid = self.responder.response(&realization);

        let mut noise_rng = block_rng(self.key, snr_index, block, Stream::Noise);
        let rx = apply(&cw, &grid, snr_linear, &mut noise_rng, self.spec.noiseless)?;
        let decoded = self.detector.decode(&rx, &grid, self.spec.decoder_mode)?;
        Ok(bits.iter().zip(&decoded).filter(|(a, b)| a != b).count() as u64)
    }

    fn run_point(&self, snr_index: usize) -> Result<BerPoint> {
        let snr_db = self.spec.snr_db_points[snr_index];
        let snr_linear = 10f64.powf(snr_db / 10.0);
        let bits_per_block = self.bits_per_block();
        let mut blocks = 0u64;
        let mut errors = 0u64;
        let mut batch = 8u64;
        'outer: while blocks < self.spec.max_ofdm_blocks {
            let end = (blocks + batch).min(self.spec.max_ofdm_blocks);
            let per_block = (blocks..end)
                .into_par_iter()
                .map(|b| self.run_block(snr_index, snr_linear, b))
                .collect::<Result<Vec<u64>>>()?;
            // accumulate in block order so the stopping block is independent
            // of batching
            for e in per_block {
                blocks += 1;
                errors += e;
                if errors >= self.spec.min_bit_errors {
                    break 'outer;
                }
            }
            batch = (batch * 2).min(1024);
        }
        Ok(BerPoint::new(snr_db, blocks * bits_per_block, errors))
    }
}

/// Simulates the spec's `snr_index`-th SNR point in the current rayon pool.
pub fn run_point(spec: &SweepSpec, snr_index: usize) -> Result<BerPoint> {
    if snr_index >= spec.snr_db_points.len() {
        return Err(Error::InvalidSpec(format!(
            "SNR index {snr_index} out of range"
        )));
    }
    Link::new(spec)?.run_point(snr_index)
}

/// Worker count from `QOSF_WORKERS`, or the number of available cores.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with_workers(spec, worker_count())
}

pub fn run_sweep_with_workers(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    let link = Link::new(spec)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let points = pool.install(|| {
        (0..spec.snr_db_points.len())
            .map(|k| link.run_point(k))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepResult {
        spec: spec.clone(),
        points,
        wall_time_s: start.elapsed().as_secs_f64(),
        code_version: CODE_VERSION.to_string(),
        master_seed: spec.config.master_seed,
    })
}

/// Diversity order `−10 × slope` of the least-squares fit of `log10(ber)`
/// against `snr_db`, over the `window` highest-SNR points with nonzero BER.
pub fn estimate_diversity_order(points: &[BerPoint], window: usize) -> Result<f64> {
    let mut usable: Vec<&BerPoint> = points.iter().filter(|p| p.ber > 0.0).collect();
    usable.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    let tail = &usable[usable.len().saturating_sub(window)..];
    if tail.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 points with nonzero BER, have {}",
            tail.len()
        )));
    }
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.snr_db).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.ber.log10()).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|p| (p.snr_db - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all points share one SNR".into()));
    }
    let sxy: f64 = tail
        .iter()
        .map(|p| (p.snr_db - mx) * (p.ber.log10() - my))
        .sum();
    Ok(-10.0 * sxy / sxx)
}

/// SNR (dB) at which the curve crosses `target`, interpolating `log10(ber)`
/// linearly between the first bracketing pair of points.
pub fn snr_at_ber(points: &[BerPoint], target: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.ber <= 0.0 || b.ber <= 0.0 || !(a.ber >= target && b.ber <= target) {
            return None;
        }
        let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
        if la == lb {
            return Some(a.snr_db);
        }
        Some(a.snr_db + (lt - la) / (lb - la) * (b.snr_db - a.snr_db))
    })
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn join_rows(rows: &[Vec<f64>]) -> String {
    rows.iter()
        .map(|r| join_f64(r))
        .collect::<Vec<_>>()
        .join(";")
}

/// Results file text: `# key: value` header lines, then CSV rows.
pub fn format_results(result: &SweepResult) -> String {
    let spec = &result.spec;
    let cfg = &spec.config;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "# {k}: {v}");
    };
    kv("format", RESULTS_FORMAT.into());
    kv("code_version", result.code_version.clone());
    kv("master_seed", result.master_seed.to_string());
    kv("scenario_label", spec.scenario_label.clone());
    kv("scheme", spec.scheme.name().into());
    kv("decoder_mode", spec.decoder_mode.name().into());
    kv("min_bit_errors", spec.min_bit_errors.to_string());
    kv("max_ofdm_blocks", spec.max_ofdm_blocks.to_string());
    kv("noiseless", spec.noiseless.to_string());
    kv(
        "common_random_numbers",
        spec.common_random_numbers.to_string(),
    );
    kv("snr_db_points", join_f64(&spec.snr_db_points));
    kv("config.num_tx", cfg.num_tx.to_string());
    kv("config.num_rx", cfg.num_rx.to_string());
    kv("config.num_states", cfg.num_states.to_string());
    kv("config.num_paths", cfg.num_paths.to_string());
    kv("config.num_subcarriers", cfg.num_subcarriers.to_string());
    kv("config.cp_len", cfg.cp_len.to_string());
    kv(
        "config.symbol_duration_s",
        format!("{:?}", cfg.symbol_duration_s),
    );
    kv("config.delays_s", join_rows(&cfg.delays_s));
    kv("config.path_powers", join_rows(&cfg.path_powers));
    kv("config.constellation", cfg.constellation.name().into());
    kv("config.rotation_angles", join_f64(&cfg.rotation_angles));
    kv("config.master_seed", cfg.master_seed.to_string());
    kv("points", result.points.len().to_string());
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in &result.points {
        let _ = writeln!(
            out,
            "{:?},{},{},{:.5e}",
            p.snr_db, p.bits_simulated, p.bit_errors, p.ber
        );
    }
    out
}

pub fn write_results(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_results(result))?;
    Ok(())
}

pub fn read_results(path: impl AsRef<Path>) -> Result<SweepResult> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_results(&text, path)
}

/// Parses [`format_results`] output; `path` is only used in error messages.
pub fn parse_results(text: &str, path: &Path) -> Result<SweepResult> {
    let err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    let mut header: Vec<(usize, String, String)> = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut csv_line = None;
    for (no, line) in lines.by_ref() {
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest
                .split_once(": ")
                .ok_or_else(|| err(no, "header line is not '# key: value'".into()))?;
            header.push((no, k.to_string(), v.to_string()));
        } else if line == CSV_HEADER {
            csv_line = Some(no);
            break;
        } else {
            return Err(err(no, format!("expected header or {CSV_HEADER:?}")));
        }
    }
    let last_line = text.lines().count();
    let csv_line =
        csv_line.ok_or_else(|| err(last_line, format!("missing column line {CSV_HEADER:?}")))?;

    let lookup = |key: &str| -> Result<(usize, &str)> {
        header
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(no, _, v)| (*no, v.as_str()))
            .ok_or_else(|| err(csv_line, format!("missing header key {key:?}")))
    };
    fn parse_val<T: FromStr>(v: &str) -> Option<T> {
        v.trim().parse().ok()
    }
    macro_rules! field {
        ($key:expr, $ty:ty) => {{
            let (no, v) = lookup($key)?;
            parse_val::<$ty>(v).ok_or_else(|| err(no, format!("bad value for {}: {v:?}", $key)))?
        }};
    }
    let list = |key: &str| -> Result<Vec<f64>> {
        let (no, v) = lookup(key)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|t| {
                parse_val::<f64>(t).ok_or_else(|| err(no, format!("bad number {t:?} in {key}")))
            })
            .collect()
    };
    let rows = |key: &str| -> Result<Vec<Vec<f64>>> {
        let (no, v) = lookup(key)?;
        v.split(';')
            .map(|row| {
                row.split(',')
                    .map(|t| {
                        parse_val::<f64>(t)
                            .ok_or_else(|| err(no, format!("bad number {t:?} in {key}")))
                    })
                    .collect()
            })
            .collect()
    };

    for (no, k, _) in &header {
        if !KNOWN_KEYS.contains(&k.as_str()) {
            return Err(err(*no, format!("unknown header key {k:?}")));
        }
    }
    let (fmt_line, fmt) = lookup("format")?;
    if fmt != RESULTS_FORMAT {
        return Err(err(fmt_line, format!("unsupported format {fmt:?}")));
    }

    let config = SystemConfig {
        num_tx: field!("config.num_tx", usize),
        num_rx: field!("config.num_rx", usize),
        num_states: field!("config.num_states", usize),
        num_paths: field!("config.num_paths", usize),
        num_subcarriers: field!("config.num_subcarriers", usize),
        cp_len: field!("config.cp_len", usize),
        symbol_duration_s: field!("config.symbol_duration_s", f64),
        delays_s: rows("config.delays_s")?,
        path_powers: rows("config.path_powers")?,
        constellation: field!("config.constellation", Constellation),
        rotation_angles: list("config.rotation_angles")?,
        master_seed: field!("config.master_seed", u64),
    };
    let spec = SweepSpec {
        config,
        scheme: field!("scheme", Scheme),
        snr_db_points: list("snr_db_points")?,
        min_bit_errors: field!("min_bit_errors", u64),
        max_ofdm_blocks: field!("max_ofdm_blocks", u64),
        decoder_mode: field!("decoder_mode", DecoderMode),
        scenario_label: lookup("scenario_label")?.1.to_string(),
        noiseless: field!("noiseless", bool),
        common_random_numbers: field!("common_random_numbers", bool),
    };
    let expected_points: usize = field!("points", usize);

    let mut points = Vec::with_capacity(expected_points);
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(err(
                no,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        let snr_db: f64 =
            parse_val(fields[0]).ok_or_else(|| err(no, format!("bad snr_db {:?}", fields[0])))?;
        let bits: u64 =
            parse_val(fields[1]).ok_or_else(|| err(no, format!("bad bits {:?}", fields[1])))?;
        let errors: u64 =
            parse_val(fields[2]).ok_or_else(|| err(no, format!("bad errors {:?}", fields[2])))?;
        let ber: f64 =
            parse_val(fields[3]).ok_or_else(|| err(no, format!("bad ber {:?}", fields[3])))?;
        if bits == 0 || errors > bits {
            return Err(err(no, format!("inconsistent counts {errors}/{bits}")));
        }
        let point = BerPoint::new(snr_db, bits, errors);
        if (point.ber - ber).abs() > 1e-5 * point.ber.max(f64::MIN_POSITIVE) {
            return Err(err(no, format!("ber {ber} does not match {errors}/{bits}")));
        }
        points.push(point);
    }
    if points.len() != expected_points {
        return Err(err(
            last_line,
            format!(
                "expected {expected_points} data rows, found {} (truncated file?)",
                points.len()
            ),
        ));
    }
    Ok(SweepResult {
        master_seed: field!("master_seed", u64),
        code_version: lookup("code_version")?.1.to_string(),
        spec,
        points,
        wall_time_s: 0.0,
    })
}

const KNOWN_KEYS: &[&str] = &[
    "format",
    "code_version",
    "master_seed",
    "scenario_label",
    "scheme",
    "decoder_mode",
    "min_bit_errors",
    "max_ofdm_blocks",
    "noiseless",
    "common_random_numbers",
    "snr_db_points",
    "config.num_tx",
    "config.num_rx",
    "config.num_states",
    "config.num_paths",
    "config.num_subcarriers",
    "config.cp_len",
    "config.symbol_duration_s",
    "config.delays_s",
    "config.path_powers",
    "config.constellation",
    "config.rotation_angles",
    "config.master_seed",
    "points",
];

/// Tab-separated table: `snr_db` then one BER column per scenario label.
/// SNRs missing from a series are written as `NA`.
pub fn format_plot_data(results: &[SweepResult]) -> Result<String> {
    if results.is_empty() {
        return Err(Error::InsufficientData("no results to plot".into()));
    }
    let mut labels: Vec<&str> = Vec::new();
    for r in results {
        let label = r.spec.scenario_label.as_str();
        if labels.contains(&label) {
            return Err(Error::LabelCollision(label.to_string()));
        }
        labels.push(label);
    }
    let mut snrs: Vec<f64> = results
        .iter()
        .flat_map(|r| r.points.iter().map(|p| p.snr_db))
        .collect();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();

    let mut out = String::from("snr_db");
    for l in &labels {
        out.push('\t');
        out.push_str(l);
    }
    out.push('\n');
    for snr in snrs {
        let _ = write!(out, "{snr:?}");
        for r in results {
            match r.points.iter().find(|p| p.snr_db == snr) {
                Some(p) => {
                    let _ = write!(out, "\t{:.5e}", p.ber);
                }
                None => out.push_str("\tNA"),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_plot_data(results: &[SweepResult], path: impl AsRef<Path>) -> Result<()> {
    let text = format_plot_data(results)?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(scheme: Scheme) -> SweepSpec {
        let mut spec = SweepSpec::new(SystemConfig::two_ray(20e-6), scheme);
        spec.snr_db_points = vec![0.0, 6.0];
        spec.min_bit_errors = 50;
        spec.max_ofdm_blocks = 20;
        spec
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("qosf".parse::<Scheme>().is_err());
    }

    #[test]
    fn scheme_codes() {
        let cfg = SystemConfig::two_ray(5e-6);
        let p = Scheme::Proposed.code(&cfg).unwrap();
        assert_eq!((p.num_states(), p.depth()), (2, 2));
        let q = Scheme::QosfP1.code(&cfg).unwrap();
        assert_eq!((q.num_states(), q.depth(), q.num_groups()), (1, 2, 32));
        let a = Scheme::AlamoutiSf.code(&cfg).unwrap();
        assert_eq!((a.num_states(), a.depth(), a.num_groups()), (1, 1, 64));
        // every scheme is rate one per state
        for s in Scheme::ALL {
            let code = s.code(&cfg).unwrap();
            assert_eq!(
                code.symbols_per_codeword(),
                code.num_states() * cfg.num_subcarriers
            );
        }
    }

    #[test]
    fn spec_validation() {
        let mut spec = small_spec(Scheme::Proposed);
        spec.snr_db_points.clear();
        assert!(matches!(
            run_sweep_with_workers(&spec, 1),
            Err(Error::InvalidSpec(_))
        ));
        spec.snr_db_points = vec![2.0, 2.0];
        assert!(matches!(spec.validate(), Err(Error::InvalidSpec(_))));
        spec.snr_db_points = vec![2.0, 4.0];
        spec.min_bit_errors = 0;
        assert!(matches!(spec.validate(), Err(Error::InvalidSpec(_))));
        spec.min_bit_errors = 1;
        spec.scenario_label = "a,b".into();
        assert!(matches!(spec.validate(), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn noiseless_point_has_no_errors() {
        let mut spec = small_spec(Scheme::Proposed);
        spec.noiseless = true;
        spec.max_ofdm_blocks = 10;
        let p = run_point(&spec, 0).unwrap();
        assert_eq!(p.bit_errors, 0);
        assert_eq!(p.bits_simulated, 10 * 256);
        assert_eq!(p.ber, 0.0);
    }

    #[test]
    fn very_low_snr_is_chance_level() {
        let mut spec = small_spec(Scheme::Proposed);
        spec.snr_db_points = vec![-40.0];
        spec.min_bit_errors = 20_000;
        spec.max_ofdm_blocks = 1_000;
        let p = run_point(&spec, 0).unwrap();
        assert!((p.ber - 0.5).abs() < 0.02, "{}", p.ber);
    }

    #[test]
    fn stops_at_min_errors() {
        let mut spec = small_spec(Scheme::QosfP1);
        spec.min_bit_errors = 100;
        spec.max_ofdm_blocks = 1000;
        let p = run_point(&spec, 0).unwrap();
        assert!(p.bit_errors >= 100);
        // the last block can add at most one block's worth of bits
        assert!(p.bit_errors < 100 + 128);
    }

    #[test]
    fn sweep_is_deterministic_across_workers() {
        let spec = small_spec(Scheme::Proposed);
        let a = run_sweep_with_workers(&spec, 1).unwrap();
        let b = run_sweep_with_workers(&spec, 4).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(format_results(&a), format_results(&b));
        assert_eq!(
            a.points.iter().map(|p| p.snr_db).collect::<Vec<_>>(),
            spec.snr_db_points
        );
    }

    #[test]
    fn independent_streams_differ() {
        let mut a = small_spec(Scheme::Proposed);
        a.min_bit_errors = 1_000_000;
        a.max_ofdm_blocks = 4;
        let mut b = a.clone();
        b.common_random_numbers = false;
        let ra = run_sweep_with_workers(&a, 2).unwrap();
        let rb = run_sweep_with_workers(&b, 2).unwrap();
        assert_ne!(ra.points[0].bit_errors, rb.points[0].bit_errors);
    }

    #[test]
    fn diversity_of_synthetic_curves() {
        let curve = |slope: f64| -> Vec<BerPoint> {
            (0..=10)
                .map(|k| {
                    let snr = 2.0 * k as f64;
                    BerPoint {
                        snr_db: snr,
                        bits_simulated: 1,
                        bit_errors: 0,
                        ber: 10f64.powf(-snr / slope),
                    }
                })
                .collect()
        };
        assert!((estimate_diversity_order(&curve(10.0), 3).unwrap() - 1.0).abs() < 1e-9);
        assert!((estimate_diversity_order(&curve(5.0), 3).unwrap() - 2.0).abs() < 1e-9);
        let one = vec![BerPoint::new(0.0, 10, 1), BerPoint::new(2.0, 10, 0)];
        assert!(matches!(
            estimate_diversity_order(&one, 3),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn interpolated_crossing() {
        let pts = vec![
            BerPoint {
                snr_db: 0.0,
                bits_simulated: 1,
                bit_errors: 0,
                ber: 1e-1,
            },
            BerPoint {
                snr_db: 10.0,
                bits_simulated: 1,
                bit_errors: 0,
                ber: 1e-3,
            },
            BerPoint {
                snr_db: 20.0,
                bits_simulated: 1,
                bit_errors: 0,
                ber: 1e-5,
            },
        ];
        assert!((snr_at_ber(&pts, 1e-2).unwrap() - 5.0).abs() < 1e-12);
        assert!((snr_at_ber(&pts, 1e-4).unwrap() - 15.0).abs() < 1e-12);
        assert_eq!(snr_at_ber(&pts, 1e-7), None);
    }

    fn sample_result() -> SweepResult {
        let spec = small_spec(Scheme::Proposed);
        SweepResult {
            points: vec![
                BerPoint::new(0.0, 2560, 300),
                BerPoint::new(6.0, 51200, 201),
            ],
            spec,
            wall_time_s: 0.0,
            code_version: CODE_VERSION.into(),
            master_seed: 1,
        }
    }

    #[test]
    fn results_round_trip() {
        let r = sample_result();
        let text = format_results(&r);
        assert!(text.contains("\n6.0,51200,201,3.92578e-3\n"), "{text}");
        let back = parse_results(&text, Path::new("x")).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn results_header_only_when_no_points() {
        let mut r = sample_result();
        r.points.clear();
        let text = format_results(&r);
        assert!(text.ends_with(&format!("{CSV_HEADER}\n")));
        assert_eq!(parse_results(&text, Path::new("x")).unwrap(), r);
    }

    #[test]
    fn truncated_results_name_the_line() {
        let text = format_results(&sample_result());
        let cut = &text[..text.len() - 12];
        match parse_results(cut, Path::new("r.csv")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, cut.lines().count()),
            other => panic!("{other:?}"),
        }
        let without_last_row: String = text
            .lines()
            .take(text.lines().count() - 1)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(
            parse_results(&without_last_row, Path::new("r.csv")),
            Err(Error::Parse { .. })
        ));
        let bad = text.replace("# scheme: proposed", "# scheme: nope");
        match parse_results(&bad, Path::new("r.csv")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn plot_data_layout() {
        let mut a = sample_result();
        a.spec.scenario_label = "a".into();
        let mut b = sample_result();
        b.spec.scenario_label = "b".into();
        b.points.pop();
        b.points.push(BerPoint::new(8.0, 100, 1));
        let text = format_plot_data(&[a.clone(), b.clone()]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "snr_db\ta\tb");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].ends_with("\tNA"));
        assert!(lines[3].starts_with("8.0\tNA\t"));
        assert_eq!(
            format_plot_data(&[a.clone()])
                .unwrap()
                .lines()
                .next()
                .unwrap()
                .split('\t')
                .count(),
            2
        );
        assert!(matches!(
            format_plot_data(&[a.clone(), a]),
            Err(Error::LabelCollision(_))
        ));
        assert!(format_plot_data(&[]).is_err());
    }
}
