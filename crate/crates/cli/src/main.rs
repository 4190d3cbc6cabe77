//! `quantos` command-line front end.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

pub const THREADS_ENV: &str = "QUANTOS_THREADS";

#[derive(Parser, Debug)]
#[command(name = "quantos", version, about = "Non-Hermitian topological sensor sweeps")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV files and the manifest.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(flatten)]
    model: ModelArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    #[arg(long, global = true, allow_negative_numbers = true)]
    t1: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    t2: Option<f64>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Boundary coupling between the first and last mode.
    #[arg(long, global = true)]
    big_gamma: Option<f64>,
    #[arg(long, global = true)]
    n_modes: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    omega: Option<f64>,
    #[arg(long, global = true)]
    probe_amplitude: Option<f64>,
    #[arg(long, global = true)]
    probe_port: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the spectral winding number of the Bloch Hamiltonian.
    Winding {
        #[arg(long)]
        n_k: Option<usize>,
    },
    /// Winding number over a (t1, t2) grid -> phase.csv.
    PhaseDiagram {
        #[arg(long)]
        t1_points: Option<usize>,
        #[arg(long)]
        t2_points: Option<usize>,
        #[arg(long)]
        t1_max: Option<f64>,
        #[arg(long)]
        t2_max: Option<f64>,
    },
    /// Fisher information versus system size -> fisher_n.csv, fit.csv.
    FisherScaling {
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        /// Extend the sweep until the information saturates.
        #[arg(long)]
        saturate: bool,
    },
    /// Growth rate versus t1 -> alpha_t1.csv.
    ResonanceT1 {
        #[arg(long, value_delimiter = ',')]
        t1_values: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        omega_values: Option<Vec<f64>>,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Fisher information versus frequency -> fisher_omega.csv.
    ResonanceOmega {
        #[arg(long, value_delimiter = ',')]
        n_values: Option<Vec<usize>>,
        #[arg(long)]
        omega_min: Option<f64>,
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long)]
        omega_points: Option<usize>,
        #[arg(long)]
        mirrored: bool,
    },
    /// Classical edge-mode shift versus system size -> classical.csv.
    ClassicalShift {
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Batch maximum-likelihood check of the Cramer-Rao bound -> cr.csv.
    ValidateCr {
        #[arg(long)]
        n_samples: Option<usize>,
        #[arg(long)]
        batches: Option<usize>,
    },
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Cli {
    fn resolve(&self) -> Result<RunConfig, commands::Failure> {
        let mut c = RunConfig::load(self.config.as_deref()).map_err(|e| commands::Failure::Config(e.to_string()))?;
        set(&mut c.output_dir, self.out.clone());
        set(&mut c.seed, self.seed);
        let m = &self.model;
        set(&mut c.model.t1, m.t1);
        set(&mut c.model.t2, m.t2);
        set(&mut c.model.gamma, m.gamma);
        set(&mut c.model.big_gamma, m.big_gamma);
        set(&mut c.model.n_modes, m.n_modes);
        set(&mut c.model.omega, m.omega);
        set(&mut c.model.probe_amplitude, m.probe_amplitude);
        set(&mut c.model.probe_port, m.probe_port);
        match &self.command {
            Command::Winding { n_k } => set(&mut c.winding.n_k, *n_k),
            Command::PhaseDiagram {
                t1_points,
                t2_points,
                t1_max,
                t2_max,
            } => {
                let pd = &mut c.phase_diagram;
                set(&mut pd.t1_points, *t1_points);
                set(&mut pd.t2_points, *t2_points);
                set(&mut pd.t1_max, *t1_max);
                set(&mut pd.t2_max, *t2_max);
            }
            Command::FisherScaling { n_min, n_max, saturate } => {
                let fs = &mut c.fisher_scaling;
                set(&mut fs.n_min, *n_min);
                set(&mut fs.n_max, *n_max);
                fs.saturate |= *saturate;
            }
            Command::ResonanceT1 {
                t1_values,
                omega_values,
                n_min,
                n_max,
            } => {
                let r = &mut c.resonance_t1;
                set(&mut r.t1_values, t1_values.clone());
                set(&mut r.omega_values, omega_values.clone());
                set(&mut r.n_min, *n_min);
                set(&mut r.n_max, *n_max);
            }
            Command::ResonanceOmega {
                n_values,
                omega_min,
                omega_max,
                omega_points,
                mirrored,
            } => {
                let r = &mut c.resonance_omega;
                set(&mut r.n_values, n_values.clone());
                set(&mut r.omega_min, *omega_min);
                set(&mut r.omega_max, *omega_max);
                set(&mut r.omega_points, *omega_points);
                r.mirrored |= *mirrored;
            }
            Command::ClassicalShift { n_min, n_max } => {
                set(&mut c.classical_shift.n_min, *n_min);
                set(&mut c.classical_shift.n_max, *n_max);
            }
            Command::ValidateCr { n_samples, batches } => {
                set(&mut c.validate_cr.n_samples, *n_samples);
                set(&mut c.validate_cr.batches, *batches);
            }
        }
        Ok(c)
    }

    fn name(&self) -> &'static str {
        match self.command {
            Command::Winding { .. } => "winding",
            Command::PhaseDiagram { .. } => "phase-diagram",
            Command::FisherScaling { .. } => "fisher-scaling",
            Command::ResonanceT1 { .. } => "resonance-t1",
            Command::ResonanceOmega { .. } => "resonance-omega",
            Command::ClassicalShift { .. } => "classical-shift",
            Command::ValidateCr { .. } => "validate-cr",
        }
    }
}

fn configure_threads() -> Result<(), commands::Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| commands::Failure::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| commands::Failure::Config(format!("thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<(), commands::Failure> {
    let start = Instant::now();
    configure_threads()?;
    let config = cli.resolve()?;
    config.model.validate()?;
    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| commands::Failure::Io(format!("{}: {e}", config.output_dir.display())))?;
    match cli.command {
        Command::Winding { .. } => commands::winding(&config)?,
        Command::PhaseDiagram { .. } => commands::phase_diagram(&config)?,
        Command::FisherScaling { .. } => commands::fisher_scaling(&config)?,
        Command::ResonanceT1 { .. } => commands::resonance_t1(&config)?,
        Command::ResonanceOmega { .. } => commands::resonance_omega(&config)?,
        Command::ClassicalShift { .. } => commands::classical_shift(&config)?,
        Command::ValidateCr { .. } => commands::validate_cr(&config)?,
    }
    commands::write_manifest(&config, cli.name(), start.elapsed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("quantos {}: {f}", cli.name());
            ExitCode::from(f.exit_code())
        }
    }
}
