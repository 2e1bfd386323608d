use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aggsim::config::parse_list;
use aggsim::{convergence_study, run_scenario, sp_sweep, Error, SimulationConfig, StudyMode};

#[derive(Parser)]
#[command(name = "aggsim", version, about = "LTP simulations of the aggregation equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override a configuration key, e.g. `--set h=0.02`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSVs.
    Run(ConfigArgs),
    /// Convergence study over a list of grid sizes.
    Converge {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long, value_name = "LIST")]
        h: String,
        #[arg(long, default_value = "vs_exact")]
        mode: String,
    },
    /// Compare LTP with fixed-radius particles.
    Sweep {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long, value_name = "LIST")]
        eps: Option<String>,
    },
    /// Check a configuration file and print the effective settings.
    Validate(ConfigArgs),
}

fn load(args: &ConfigArgs) -> Result<SimulationConfig, Error> {
    let mut cfg = SimulationConfig::from_file(&args.config)?;
    for s in &args.set {
        cfg.apply_override(s)?;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(args) => {
            let cfg = load(&args)?;
            let art = run_scenario(&cfg)?;
            art.write(&cfg.output_dir)?;
            match art.stop {
                // outputs up to the rejected step are kept, but the run failed
                Some(stop) if stop.rejected => return Err(Error::StepRejected { step: stop.step, reason: stop.reason }),
                Some(stop) => println!("stopped at step {}: {}", stop.step, stop.reason),
                None => println!("completed {} steps", art.requested_steps),
            }
        }
        Command::Converge { args, h, mode } => {
            let cfg = load(&args)?;
            let hs = parse_list("--h", &h)?;
            let report = convergence_study(&cfg, &hs, mode.parse::<StudyMode>()?)?;
            report.write(&cfg.output_dir)?;
            for (metric, fit) in &report.rates {
                println!("{metric}: slope {:.4} (residual {:.2e})", fit.slope, fit.residual);
            }
        }
        Command::Sweep { args, eps } => {
            let cfg = load(&args)?;
            let eps = match eps {
                Some(list) => parse_list("--eps", &list)?,
                None => cfg.sp_epsilon.clone(),
            };
            let report = sp_sweep(&cfg, &eps)?;
            report.write(&cfg.output_dir)?;
            println!("LTP Linf {:.6e}, best SP Linf {:.6e}", report.ltp.linf, report.best_sp_linf());
        }
        Command::Validate(args) => {
            let cfg = load(&args)?;
            print!("{}", cfg.to_text());
            println!("# steps = {}", cfg.steps()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) | Error::Unsupported(_) | Error::UnsupportedPotential(_) => {
                    ExitCode::from(2)
                }
                Error::Io(_) => ExitCode::from(1),
                _ => ExitCode::from(3),
            }
        }
    }
}
