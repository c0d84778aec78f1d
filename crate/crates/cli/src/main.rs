use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crcm_cli::config::ExperimentConfig;
use crcm_cli::run::{run_experiment, Command};
use crcm_cli::validate::validate_config;
use crcm_cli::{CliError, Model};

#[derive(Parser)]
#[command(name = "crcm", version, about = "Simulation and checks for the continuum random cluster model")]
struct Cli {
    /// Experiment config (JSON); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overwrite a non-empty output directory.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Draw samples and write them as a sample stream.
    Sample(Overrides),
    /// Draw samples and run the configured analyses.
    Analyze {
        #[command(flatten)]
        overrides: Overrides,
        /// Exit with status 4 if any report fails.
        #[arg(long)]
        assert: bool,
    },
    /// Crossing curve over the z grid, plus analyses at each grid point.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated intensities, overriding the config grid.
        #[arg(long, value_delimiter = ',')]
        z_grid: Option<Vec<f64>>,
    },
    /// Check a config against the model hypotheses.
    Validate(Overrides),
}

#[derive(Args)]
struct Overrides {
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long)]
    z: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// `dirac:R`, `uniform:A:B`, `power:EXPONENT:CUTOFF` or `table:PATH`.
    #[arg(long)]
    radius_law: Option<String>,
    /// Side `L` of the cube `[0, L]^d`, or `lo1,lo2,..:hi1,hi2,..`.
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long)]
    thin: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
}

fn parse_coords(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::Config(format!("--window: bad number `{x}`"))))
        .collect()
}

impl Overrides {
    fn apply(&self, c: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(m) = self.model {
            c.model = m;
        }
        let p = &mut c.params;
        p.z = self.z.unwrap_or(p.z);
        p.q = self.q.unwrap_or(p.q);
        if let Some(l) = &self.radius_law {
            p.radius_law = l.clone();
        }
        p.dimension = self.dimension.unwrap_or(p.dimension);
        if let Some(w) = &self.window {
            match w.split_once(':') {
                Some((lo, hi)) => {
                    let (lo, hi) = (parse_coords(lo)?, parse_coords(hi)?);
                    p.dimension = lo.len();
                    p.lower = Some(lo);
                    p.upper = Some(hi);
                    p.side = None;
                }
                None => {
                    p.side = Some(w.trim().parse().map_err(|_| CliError::Config(format!("--window: bad side `{w}`")))?);
                    p.lower = None;
                    p.upper = None;
                }
            }
        }
        let s = &mut c.sampler;
        s.steps = self.steps.unwrap_or(s.steps);
        s.burn_in = self.burn_in.or(s.burn_in);
        s.thin = self.thin.unwrap_or(s.thin);
        c.replicas = self.replicas.unwrap_or(c.replicas);
        Ok(())
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut c = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    if let Some(o) = &cli.out {
        c.output_dir = o.clone();
    }
    Ok(c)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(e.to_string()))?;
    }
    let mut config = load(cli)?;
    let (command, assert) = match &cli.verb {
        Verb::Validate(o) => {
            o.apply(&mut config)?;
            let report = validate_config(&config);
            for f in &report.findings {
                println!("{f}");
            }
            if report.has_errors() {
                return Err(CliError::Config("config failed validation".into()));
            }
            match report.regime {
                Some(r) => println!("ok (case {r:?})"),
                None => println!("ok (outside cases C1 and C2)"),
            }
            return Ok(());
        }
        Verb::Sample(o) => {
            o.apply(&mut config)?;
            (Command::Sample, false)
        }
        Verb::Analyze { overrides, assert } => {
            overrides.apply(&mut config)?;
            (Command::Analyze, *assert)
        }
        Verb::Sweep { overrides, z_grid } => {
            overrides.apply(&mut config)?;
            if let Some(g) = z_grid {
                config.z_grid = g.clone();
            }
            (Command::Sweep, false)
        }
    };
    for f in &validate_config(&config).findings {
        eprintln!("{f}");
    }
    let summary = run_experiment(command, &config, cli.force)?;
    for (name, file) in &summary.reports {
        let status = if file.all_passed() { "pass" } else { "FAIL" };
        println!("{name}: {status}");
    }
    println!("wrote {}", config.output_dir.join("manifest.json").display());
    let failed = summary.failed_reports();
    if assert && !failed.is_empty() {
        return Err(CliError::AssertFailed(format!("failed reports: {}", failed.join(", "))));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
