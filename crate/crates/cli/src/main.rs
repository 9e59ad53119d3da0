use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qmarket_cli::output::write_file;
use qmarket_cli::run::{self, CriticalArgs, SweepSpec};
use qmarket_cli::{CliError, CliResult, ExperimentConfig};

#[derive(Parser)]
#[command(name = "qmarket", version, about = "Operator models of a two-trader market")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one CSV (and SVG) per trader for a configuration.
    Simulate { config: PathBuf },
    /// Evaluate an objective over a one- or two-parameter grid.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        sweep: PathBuf,
    },
    /// Compare the closed forms with their exact or discretised references.
    OracleCheck { config: PathBuf },
    /// Emit the closed-market figure series.
    Figures {
        #[arg(long, default_value = "figures")]
        out: PathBuf,
    },
    /// Critical LoI coupling of trader 1 at which both increments agree.
    Critical {
        #[arg(long)]
        omega1: f64,
        #[arg(long)]
        omega2: f64,
        #[arg(long)]
        gamma2: f64,
        #[arg(long, default_value_t = 1.0)]
        omega_s: f64,
        #[arg(long, default_value_t = 2.0)]
        omega_c: f64,
        #[arg(long, default_value_t = 1.0)]
        omega_r: f64,
        #[arg(long = "lambda", default_value_t = 0.1)]
        lambda_inf: f64,
        #[arg(long, default_value_t = 5.0)]
        loi: f64,
        /// Upper end of the bisection bracket (default: gamma2).
        #[arg(long)]
        upper: Option<f64>,
    },
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            for path in run::simulate(&cfg)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Sweep { config, sweep } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", config.display())))?;
            let base: serde_json::Value = serde_json::from_str(&text)?;
            let spec = SweepSpec::load(&sweep)?;
            let table = run::sweep(&base, &spec)?;
            write_file(&spec.output, &table)?;
            println!("wrote {}", spec.output.display());
        }
        Command::OracleCheck { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run::oracle_check(&cfg)?;
            let path = cfg.output().dir.join("oracle_report.txt");
            write_file(&path, &report.text)?;
            print!("{}", report.text);
            if !report.passed {
                return Err(CliError::tolerance(format!(
                    "oracle check failed; see {}",
                    path.display()
                )));
            }
        }
        Command::Figures { out } => {
            for path in run::figures(&out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Critical {
            omega1,
            omega2,
            gamma2,
            omega_s,
            omega_c,
            omega_r,
            lambda_inf,
            loi,
            upper,
        } => {
            let args = CriticalArgs {
                omega1,
                omega2,
                gamma2,
                omega_s,
                omega_c,
                omega_r_slope: omega_r,
                lambda_inf,
                loi,
                upper,
            };
            print!("{}", run::critical(&args)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", CliError::config(e.to_string().trim_end()).to_line());
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_line());
            ExitCode::from(e.kind.exit_code())
        }
    }
}
