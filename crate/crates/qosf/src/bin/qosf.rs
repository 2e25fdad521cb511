//! Command-line front end: `encode`, `simulate`, `optimize-angles`, `report`.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 when a runtime cap
//! (search space or angle grid) is exceeded, 1 otherwise.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qosf::harness::{self, Scheme, SweepSpec};
use qosf::{angleopt, codec, primitives, DecoderMode, Error, GainMetric, Result, SystemConfig};

#[derive(Parser)]
#[command(name = "qosf", version, about = "QOSF space-frequency code simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a bits file (characters '0'/'1', whitespace ignored) and dump
    /// the per-state codewords.
    Encode {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        bits: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a BER sweep and write a results file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// SNR points in dB: comma-separated list or start:stop:step.
        #[arg(long, default_value = "0:20:2")]
        snr: String,
        /// proposed, qosf-p1 or alamouti-sf.
        #[arg(long, default_value = "proposed")]
        scenario: String,
        /// exhaustive or decoupled.
        #[arg(long, default_value = "exhaustive")]
        decoder: String,
        /// Overrides the config's master_seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        min_errors: u64,
        #[arg(long, default_value_t = 100_000)]
        max_blocks: u64,
        /// Series label; defaults to the scenario name.
        #[arg(long)]
        label: Option<String>,
        /// Draw streams independently per scenario instead of sharing them.
        #[arg(long)]
        independent: bool,
    },
    /// Grid search for rotation angles maximising a coding-gain metric.
    OptimizeAngles {
        #[arg(long, default_value_t = 4)]
        pl: usize,
        /// min-product-distance or min-component-euclidean.
        #[arg(long, default_value = "min-product-distance")]
        metric: String,
        /// Grid step in radians, either a number or "pi/N".
        #[arg(long, default_value = "pi/36")]
        resolution: String,
        #[arg(long, default_value = "bpsk")]
        constellation: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge results files into plot data and print diversity estimates.
    Report {
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Points used for the diversity slope.
        #[arg(long, default_value_t = 3)]
        window: usize,
        /// Only points with BER at or above this floor enter the slope.
        #[arg(long, default_value_t = 1e-4)]
        ber_floor: f64,
    },
}

fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidSpec(format!("cannot parse SNR list {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|k| start + k as f64 * step).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

fn parse_resolution(s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase();
    let value = if let Some(den) = t.strip_prefix("pi/") {
        den.parse::<f64>().map(|d| PI / d)
    } else {
        t.parse::<f64>()
    };
    value.map_err(|_| Error::InvalidConfig(format!("cannot parse resolution {s:?}")))
}

fn write_or_print(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode { config, bits, out } => {
            let config = SystemConfig::load(&config)?;
            let text = std::fs::read_to_string(&bits)?;
            let bits = text
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    other => Err(Error::InvalidConfig(format!(
                        "bits file contains {other:?}"
                    ))),
                })
                .collect::<Result<Vec<u8>>>()?;
            let symbols = primitives::modulate(&bits, config.constellation)?;
            let cw = codec::encode(&symbols, &config)?;
            write_or_print(&cw.to_text(), out.as_ref())
        }
        Command::Simulate {
            config,
            snr,
            scenario,
            decoder,
            seed,
            out,
            min_errors,
            max_blocks,
            label,
            independent,
        } => {
            let mut config = SystemConfig::load(&config)?;
            if let Some(seed) = seed {
                config.master_seed = seed;
            }
            let scheme: Scheme = scenario.parse()?;
            let mut spec = SweepSpec::new(config, scheme);
            spec.snr_db_points = parse_snr_list(&snr)?;
            spec.decoder_mode = decoder.parse::<DecoderMode>()?;
            spec.min_bit_errors = min_errors;
            spec.max_ofdm_blocks = max_blocks;
            spec.common_random_numbers = !independent;
            if let Some(label) = label {
                spec.scenario_label = label;
            }
            let result = harness::run_sweep(&spec)?;
            harness::write_results(&result, &out)?;
            eprintln!(
                "{}: {} points in {:.1} s -> {}",
                spec.scenario_label,
                result.points.len(),
                result.wall_time_s,
                out.display()
            );
            Ok(())
        }
        Command::OptimizeAngles {
            pl,
            metric,
            resolution,
            constellation,
            out,
        } => {
            let metric: GainMetric = metric.parse()?;
            let report = angleopt::optimize_angles(
                constellation.parse()?,
                pl,
                metric,
                parse_resolution(&resolution)?,
            )?;
            write_or_print(&report.to_text(), out.as_ref())
        }
        Command::Report {
            results,
            out,
            window,
            ber_floor,
        } => {
            let results = results
                .iter()
                .map(harness::read_results)
                .collect::<Result<Vec<_>>>()?;
            harness::emit_plot_data(&results, &out)?;
            for r in &results {
                let usable: Vec<_> = r
                    .points
                    .iter()
                    .filter(|p| p.ber >= ber_floor)
                    .cloned()
                    .collect();
                let order = harness::estimate_diversity_order(&usable, window)
                    .map(|d| format!("{d:.3}"))
                    .unwrap_or_else(|e| format!("n/a ({e})"));
                let at_1e3 = harness::snr_at_ber(&r.points, 1e-3)
                    .map(|s| format!("{s:.2} dB"))
                    .unwrap_or_else(|| "n/a".into());
                println!(
                    "{}: diversity_order={} snr_at_ber_1e-3={}",
                    r.spec.scenario_label, order, at_1e3
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else if e.is_cap_breach() {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
