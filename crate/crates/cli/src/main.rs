//! `iftem`: Monte Carlo SEP sweeps for the IF-TEM PAM receiver.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iftem_core::experiment::{
    run_experiment, to_csv, to_svg, trace_trial, write_atomic, ExperimentConfig, SepResult,
};

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "iftem",
    about = "IF-TEM receiver for PAM over AWGN: Monte Carlo symbol error rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the sweep and write sep.csv and sep.svg.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory, created if missing.
        #[arg(long, env = "IFTEM_OUT_DIR", default_value = ".")]
        out_dir: PathBuf,
    },
    /// Simulate one block and dump every receiver stage.
    Trace {
        #[command(flatten)]
        config: ConfigArgs,
        /// Grid point index, bandwidth-major.
        #[arg(long, default_value_t = 0)]
        point: usize,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Check a config and print it with overrides applied.
    ValidateConfig {
        #[command(flatten)]
        config: ConfigArgs,
    },
    Version,
}

/// Config file plus one flag per config key; flags win over the file.
#[derive(Debug, Args)]
struct ConfigArgs {
    /// TOML config file. Defaults are used for any key it leaves out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Constellation size.
    #[arg(long, value_name = "M")]
    m: Option<String>,
    /// Symbols per block.
    #[arg(long, value_name = "L")]
    l: Option<String>,
    /// Comma-separated 3 dB bandwidth-symbol time products.
    #[arg(long = "b3db_tsym", alias = "b3db-tsym", value_name = "LIST")]
    b3db_tsym: Option<String>,
    /// Comma-separated Eb/N0 values in dB; `inf` is noiseless.
    #[arg(
        long = "ebn0_db",
        alias = "ebn0-db",
        value_name = "LIST",
        allow_hyphen_values = true
    )]
    ebn0_db: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(
        long = "target_firings_per_symbol",
        alias = "target-firings-per-symbol"
    )]
    target_firings_per_symbol: Option<String>,
    #[arg(long = "bias_margin", alias = "bias-margin")]
    bias_margin: Option<String>,
    #[arg(long = "dt_divisor", alias = "dt-divisor")]
    dt_divisor: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    workers: Option<String>,
    #[arg(long = "cond_cap", alias = "cond-cap")]
    cond_cap: Option<String>,
}

impl ConfigArgs {
    fn overrides(&self) -> [(&'static str, &Option<String>); 11] {
        [
            ("m", &self.m),
            ("l", &self.l),
            ("b3db_tsym", &self.b3db_tsym),
            ("ebn0_db", &self.ebn0_db),
            ("trials", &self.trials),
            ("target_firings_per_symbol", &self.target_firings_per_symbol),
            ("bias_margin", &self.bias_margin),
            ("dt_divisor", &self.dt_divisor),
            ("seed", &self.seed),
            ("workers", &self.workers),
            ("cond_cap", &self.cond_cap),
        ]
    }

    fn resolve(&self) -> Result<ExperimentConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path).map_err(|e| e.to_string())?,
            None => ExperimentConfig::default(),
        };
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|e| e.to_string())?;
            }
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("iftem: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run { config, out_dir } => match config.resolve() {
            Ok(cfg) => run(&cfg, &out_dir),
            Err(msg) => fail(EXIT_CONFIG, msg),
        },
        Command::Trace {
            config,
            point,
            trial,
        } => match config.resolve() {
            Ok(cfg) => match trace_trial(&cfg, point, trial) {
                Ok(report) => {
                    print!("{report}");
                    ExitCode::SUCCESS
                }
                Err(e @ iftem_core::Error::Config(_)) => fail(EXIT_CONFIG, e),
                Err(e) => fail(EXIT_RUNTIME, e),
            },
            Err(msg) => fail(EXIT_CONFIG, msg),
        },
        Command::ValidateConfig { config } => match config.resolve() {
            Ok(cfg) => {
                print!("{}", cfg.to_toml());
                ExitCode::SUCCESS
            }
            Err(msg) => fail(EXIT_CONFIG, msg),
        },
        Command::Version => {
            println!("iftem {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
    }
}

fn run(cfg: &ExperimentConfig, out_dir: &Path) -> ExitCode {
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return fail(
            EXIT_RUNTIME,
            format!("cannot create {}: {e}", out_dir.display()),
        );
    }
    let results = match run_experiment(cfg) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_RUNTIME, e),
    };
    let files = [
        ("sep.csv", to_csv(&results)),
        ("sep.svg", to_svg(&results)),
        ("config.toml", cfg.to_toml()),
    ];
    for (name, contents) in &files {
        let path = out_dir.join(name);
        if let Err(e) = write_atomic(&path, contents.as_bytes()) {
            return fail(
                EXIT_RUNTIME,
                format!("cannot write {}: {e}", path.display()),
            );
        }
    }
    print!("{}", summary(&results));
    println!("wrote {}", out_dir.join("sep.csv").display());
    ExitCode::SUCCESS
}

fn summary(results: &[SepResult]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>9} {:>8} {:>9} {:>8} {:>11} {:>23} {:>7} {:>7}",
        "B·T", "Eb/N0", "symbols", "errors", "SEP", "95% CI", "deficit", "illcond"
    );
    for r in results {
        let _ = writeln!(
            s,
            "{:>9} {:>8} {:>9} {:>8} {:>11.4e} {:>23} {:>7} {:>7}",
            r.b3db_tsym,
            r.ebn0_db,
            r.symbols,
            r.errors,
            r.sep,
            format!("[{:.3e}, {:.3e}]", r.ci95_lo, r.ci95_hi),
            r.deficit_count,
            r.illcond_count
        );
    }
    s
}
