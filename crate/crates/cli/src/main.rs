use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use psfem::Regime;
use psfem_cli::config::{RunConfig, StudyConfig};
use psfem_cli::table::{self, TableFilter};
use psfem_cli::{output_root, parse_regime, run, study, CliError};

/// Nonlinear hyperelastic benchmarks in plane stress, plane strain, flatland and 3D.
///
/// Output goes under $PSFEM_OUTPUT_ROOT (default ./psfem-output).
/// Exit codes: 0 success, 1 solver or I/O failure, 2 configuration error.
#[derive(Parser)]
#[command(name = "psfem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a run config.
    Run { config: PathBuf },
    /// Tip displacement grid of the Cook panel next to the reference values.
    CookTable {
        #[arg(long = "regime", value_parser = parse_regime)]
        regimes: Vec<Regime>,
        #[arg(long = "order")]
        orders: Vec<usize>,
        #[arg(long = "n")]
        n: Vec<usize>,
        #[arg(long = "load")]
        loads: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run a refinement or thickness study.
    Convergence {
        study: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Write the mesh of a run config and a `run.toml` that solves it via `scenario = "mesh"`.
    Mesh { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    let root = output_root();
    match command {
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            let out = run::execute(&cfg, &root)?;
            let parts: Vec<String> = out.summary.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("{}: {}", cfg.name, parts.join(" "));
            println!("output: {}", out.dir.display());
        }
        Command::CookTable { regimes, orders, n, loads, jobs } => {
            let d = TableFilter::default();
            let filter = TableFilter {
                regimes: pick(regimes, d.regimes),
                orders: pick(orders, d.orders),
                n: pick(n, d.n),
                loads: pick(loads, d.loads),
            };
            if filter.orders.iter().any(|o| !(1..=2).contains(o)) || filter.n.contains(&0) {
                return Err(CliError::config("cook-table", "orders must be 1 or 2 and n positive"));
            }
            let cells = table::cook_table(&filter, jobs)?;
            std::fs::create_dir_all(&root)?;
            std::fs::write(root.join("cook-table.csv"), table::to_csv(&cells))?;
            let md = table::to_markdown(&cells);
            std::fs::write(root.join("cook-table.md"), &md)?;
            print!("{md}");
        }
        Command::Convergence { study: path, jobs } => {
            let cfg = StudyConfig::load(&path)?;
            let rows = study::run_study(&cfg, jobs)?;
            let dir = root.join(&cfg.name);
            std::fs::create_dir_all(&dir)?;
            let csv = study::to_csv(&rows);
            std::fs::write(dir.join("convergence.csv"), &csv)?;
            print!("{csv}");
        }
        Command::Mesh { config } => {
            let cfg = RunConfig::load(&config)?;
            println!("{}", run::export_mesh(&cfg, &root)?.display());
        }
    }
    Ok(())
}

fn pick<T>(given: Vec<T>, default: Vec<T>) -> Vec<T> {
    if given.is_empty() {
        default
    } else {
        given
    }
}
