use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use papr_core::harness::{
    format_sig6, load_config, run_ccdf_experiment_on, threshold_grid, to_csv, to_json,
    write_results, OutputFormat, RandomStream, SimConfig,
};
use papr_core::link::{propagate, rayleigh_channel, Method, Transceiver};
use papr_core::metrics::theoretical_ccdf;
use papr_core::modem::generate_bits;
use papr_core::{selftest, Error};

#[derive(Parser)]
#[command(
    name = "papr",
    version,
    about = "PAPR reduction experiments for STBC MIMO-OFDM"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo CCDF of PAPR for the selected methods.
    Ccdf(CcdfArgs),
    /// Closed-form CCDF for independent Nyquist-rate samples.
    Theory(TheoryArgs),
    /// Noiseless transmit/receive bit-exactness check.
    Roundtrip(RoundtripArgs),
    /// Brute-force oracles for the worked examples.
    Selftest,
}

/// Flags mirror the configuration-file keys.
#[derive(Args, Default)]
struct ConfigFlags {
    /// key=value configuration file (or a JSON result to re-run).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n_used: Option<usize>,
    #[arg(long)]
    oversample: Option<usize>,
    #[arg(long)]
    n_tx: Option<usize>,
    #[arg(long)]
    n_rx: Option<usize>,
    /// Comma-separated subset of none,clip,slm,pts.
    #[arg(long)]
    methods: Option<String>,
    /// Clipping ratio in dB.
    #[arg(long, conflicts_with = "cr_linear")]
    cr_db: Option<f64>,
    /// Clipping ratio as a linear amplitude factor.
    #[arg(long)]
    cr_linear: Option<f64>,
    #[arg(long)]
    clip_iterations: Option<usize>,
    #[arg(long)]
    slm_routes: Option<usize>,
    #[arg(long)]
    pts_subblocks: Option<usize>,
    /// adjacent | interleaved
    #[arg(long)]
    pts_scheme: Option<String>,
    /// greedy | exhaustive
    #[arg(long)]
    pts_strategy: Option<String>,
    #[arg(long)]
    allow_exhaustive: bool,
    #[arg(long)]
    symbols: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threshold_start: Option<f64>,
    #[arg(long)]
    threshold_stop: Option<f64>,
    #[arg(long)]
    threshold_step: Option<f64>,
    /// Also record receive-side CCDFs.
    #[arg(long)]
    receive: bool,
    #[arg(long)]
    rx_noise_power: Option<f64>,
}

impl ConfigFlags {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        put("n", self.n.map(|v| v.to_string()));
        put("n-used", self.n_used.map(|v| v.to_string()));
        put("oversample", self.oversample.map(|v| v.to_string()));
        put("n-tx", self.n_tx.map(|v| v.to_string()));
        put("n-rx", self.n_rx.map(|v| v.to_string()));
        put("methods", self.methods.clone());
        put("cr-db", self.cr_db.map(|v| v.to_string()));
        put("cr-linear", self.cr_linear.map(|v| v.to_string()));
        put(
            "clip-iterations",
            self.clip_iterations.map(|v| v.to_string()),
        );
        put("slm-routes", self.slm_routes.map(|v| v.to_string()));
        put("pts-subblocks", self.pts_subblocks.map(|v| v.to_string()));
        put("pts-scheme", self.pts_scheme.clone());
        put("pts-strategy", self.pts_strategy.clone());
        put(
            "allow-exhaustive",
            self.allow_exhaustive.then(|| "true".into()),
        );
        put("symbols", self.symbols.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put(
            "threshold-start",
            self.threshold_start.map(|v| v.to_string()),
        );
        put("threshold-stop", self.threshold_stop.map(|v| v.to_string()));
        put("threshold-step", self.threshold_step.map(|v| v.to_string()));
        put("receive", self.receive.then(|| "true".into()));
        put("rx-noise-power", self.rx_noise_power.map(|v| v.to_string()));
        out
    }

    fn load(&self) -> Result<SimConfig, Error> {
        load_config(self.config.as_deref(), &self.overrides())
    }
}

#[derive(Args)]
struct CcdfArgs {
    #[command(flatten)]
    config: ConfigFlags,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core). Does not change results.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct TheoryArgs {
    #[arg(long, default_value_t = 512)]
    n: usize,
    /// Number of transmit antennas.
    #[arg(long, default_value_t = 1)]
    n_tx: usize,
    #[arg(long, default_value_t = 4.0)]
    threshold_start: f64,
    #[arg(long, default_value_t = 13.0)]
    threshold_stop: f64,
    #[arg(long, default_value_t = 0.1)]
    threshold_step: f64,
}

#[derive(Args)]
struct RoundtripArgs {
    #[command(flatten)]
    config: ConfigFlags,
    /// Frames per method.
    #[arg(long, default_value_t = 100)]
    frames: u64,
}

fn ccdf(args: &CcdfArgs) -> Result<(), Error> {
    let format: OutputFormat = args.format.parse()?;
    let cfg = args.config.load()?;
    let rs = run_ccdf_experiment_on(&cfg, args.threads)?;
    eprintln!("{}", rs.metadata.clip_ratio);
    if let Some(model) = &rs.metadata.receive_model {
        eprintln!("note: {model}");
    }
    for w in &rs.metadata.warnings {
        eprintln!("warning: {w}");
    }
    let rx = rs.receive.iter().flatten().map(|c| ("rx ", c));
    for (side, c) in rs.transmit.iter().map(|c| ("", c)).chain(rx) {
        let levels: Vec<String> = c
            .levels
            .iter()
            .map(|q| format!("{:.0e}: {:.4} dB", q.probability, q.papr_db))
            .collect();
        let label = format!("{side}{}", c.method);
        eprintln!("{label:>8}  {}", levels.join("  "));
    }
    eprintln!("elapsed {:.2?}", rs.elapsed);
    match &args.out {
        Some(path) => write_results(&rs, format, path),
        None => {
            let text = match format {
                OutputFormat::Csv => to_csv(&rs),
                OutputFormat::Json => to_json(&rs)?,
            };
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn theory(args: &TheoryArgs) -> Result<(), Error> {
    if args.n == 0 || args.n_tx == 0 {
        return Err(Error::Config {
            key: "n".into(),
            message: "n and n-tx must be positive".into(),
        });
    }
    let grid = threshold_grid(
        args.threshold_start,
        args.threshold_stop,
        args.threshold_step,
    )?;
    let mut out = String::from("threshold_db,ccdf_theory\n");
    for t in grid {
        out.push_str(&format!(
            "{},{}\n",
            format_sig6(t),
            format_sig6(theoretical_ccdf(args.n, args.n_tx, t))
        ));
    }
    print!("{out}");
    Ok(())
}

/// Returns the number of frames that failed to round-trip.
fn roundtrip(args: &RoundtripArgs) -> Result<usize, Error> {
    let cfg = args.config.load()?;
    let link = Transceiver::new(&cfg)?;
    let mut failures = 0;
    for method in [Method::None, Method::Slm, Method::Pts] {
        let mut bad = 0;
        for frame in 0..args.frames {
            let mut stream = RandomStream::new(cfg.seed, frame);
            let bits: Vec<_> = (0..cfg.n_tx)
                .map(|_| generate_bits(&mut stream, link.bits_per_block()))
                .collect();
            let tx = link.transmit_frame(&bits, method)?;
            let channels: Vec<_> = (0..cfg.n_rx)
                .map(|_| rayleigh_channel(&mut stream))
                .collect();
            let rx = propagate(&tx, &channels, 0.0, &mut stream)?;
            if link.recover_data(&rx, &tx.side)? != bits {
                bad += 1;
            }
        }
        println!("{method:>5}: {bad} of {} frames differ", args.frames);
        failures += bad;
    }
    Ok(failures)
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    if err.is_config() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ccdf(args) => ccdf(args),
        Command::Theory(args) => theory(args),
        Command::Roundtrip(args) => match roundtrip(args) {
            Ok(0) => Ok(()),
            Ok(n) => {
                eprintln!("round trip failed on {n} frames");
                return ExitCode::from(2);
            }
            Err(e) => Err(e),
        },
        Command::Selftest => {
            let checks = selftest::run();
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                return ExitCode::from(2);
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
