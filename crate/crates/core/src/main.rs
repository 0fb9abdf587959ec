use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qkr::analysis::ResonanceScanOptions;
use qkr::harness::{
    self, cli_compare_analytic, cli_oracle, cli_resonance_scan, cli_sweep_coupling, load_config,
    run_evolve, SweepOptions, DEFAULT_COUPLINGS, DEFAULT_DETUNINGS, OUTPUT_ROOT_ENV,
};
use qkr::{Error, SystemConfig};

#[derive(Parser)]
#[command(name = "qkr", version, about = "Entanglement dynamics of interacting kicked rotors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config; the two-rotor reference when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted-key override, e.g. `rotors.1.kick_strength=0`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, env = OUTPUT_ROOT_ENV, default_value = harness::DEFAULT_OUTPUT_ROOT)]
    out: PathBuf,
    /// Worker threads for multi-run commands (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Schmidt eigenvalues recorded per kick.
    #[arg(long)]
    top_k: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<SystemConfig, Error> {
        let mut config = load_config(self.config.as_deref(), &self.overrides)?;
        if let Some(k) = self.top_k {
            config.observe_top_k = k;
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one configuration and write its trace.
    Evolve(Common),
    /// Compare the engine with the dense two-rotor oracle.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        steps: usize,
    },
    /// Crossover time over a list of couplings.
    SweepCoupling {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        couplings: Option<Vec<f64>>,
        /// Keep the configured horizon for every coupling instead of
        /// scaling it by `K_config / K`.
        #[arg(long)]
        fixed_horizon: bool,
    },
    /// Dominant late-time frequency over a list of detunings.
    ResonanceScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eps: Option<Vec<f64>>,
        /// Start of the late-time window; the resonant crossover when omitted.
        #[arg(long)]
        t_min: Option<f64>,
    },
    /// Analytic linear entropy, with the numerical curve unless `--analytic-only`.
    CompareAnalytic {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        analytic_only: bool,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 3,
        Error::Invalid(_) | Error::Config(_) => 2,
        Error::Usage(_) => 64,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Evolve(common) => {
            let config = common.load()?;
            let (record, trace) = run_evolve(&config, &common.out)?;
            println!(
                "{} kicks, final S_vN = {:.6}, wrote {}",
                config.horizon,
                trace.records.last().map_or(0.0, |r| r.s_vn),
                record.files[0].display()
            );
            if let Some(t) = trace.edge_trip {
                eprintln!("warning: momentum grid edge reached at kick {t}");
            }
        }
        Command::Oracle { common, steps } => {
            let config = common.load()?;
            let r = cli_oracle(&config, steps, &common.out)?;
            println!(
                "state {:.3e}  S_vN {:.3e}  S_lin {:.3e}  unitarity {:.3e}",
                r.state_deviation, r.von_neumann_deviation, r.linear_entropy_deviation, r.unitarity_deviation
            );
        }
        Command::SweepCoupling { common, couplings, fixed_horizon } => {
            let config = common.load()?;
            let ks = couplings.unwrap_or_else(|| DEFAULT_COUPLINGS.to_vec());
            let opts = SweepOptions {
                workers: common.workers,
                scale_horizon: !fixed_horizon,
            };
            let (_, result) = cli_sweep_coupling(&config, &ks, opts, &common.out)?;
            for p in &result.points {
                match &p.fit {
                    Some(f) => println!("K = {:<8} t* = {:8.2}  mu = {:.3}", p.coupling, f.t_star, f.mu),
                    None => println!("K = {:<8} {}", p.coupling, p.error.as_deref().unwrap_or("")),
                }
            }
            println!("slope {:.4}  S* spread {:.2}%", result.slope, 100.0 * result.s_star_spread);
        }
        Command::ResonanceScan { common, eps, t_min } => {
            let config = common.load()?;
            let eps = eps.unwrap_or_else(|| DEFAULT_DETUNINGS.to_vec());
            let opts = ResonanceScanOptions {
                t_min,
                workers: common.workers,
            };
            let (_, curve) = cli_resonance_scan(&config, &eps, opts, &common.out)?;
            for p in &curve.samples {
                println!("eps = {:<8e} nu = {:.5}", p.detuning, p.nu);
            }
            match curve.q_factor {
                Some(q) => println!("half width {:e}, Q = {q:.3e}", curve.half_width_eps.unwrap_or(0.0)),
                None => println!("no drop below half of nu(0) in the scanned range"),
            }
        }
        Command::CompareAnalytic { common, analytic_only } => {
            let config = common.load()?;
            let (record, cmp) = cli_compare_analytic(&config, !analytic_only, &common.out)?;
            if let Some(d) = cmp.max_deviation {
                println!("max |S_lin numeric - analytic| = {d:.3e}");
            }
            println!("wrote {}", record.files[0].display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qkr: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
