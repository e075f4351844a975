use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use schwarp::config::RunConfig;
use schwarp::driver;
use schwarp::error::Error;

/// Absorbing-boundary Schrödinger dynamics and their Schrödingerized form.
#[derive(Parser)]
#[command(name = "schwarp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment and emit snapshot CSVs plus a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure the lifted Hamiltonian and report the query-complexity
    /// estimate as JSON.
    Complexity {
        #[arg(long)]
        config: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error of the lifted pipeline against the direct solver for a sequence
    /// of p-grid sizes; CSV columns M,dp,rel_l2.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        /// Write the CSV here instead of <out_dir>/convergence.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// rel_l2 / max_abs difference of two snapshot files as JSON.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Fail with exit code 4 when rel_l2 exceeds this.
        #[arg(long)]
        max_rel_l2: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn real_main() -> Result<u8, Error> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let out_dir = out.unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
            let summary = driver::run_command(&cfg, &out_dir)?;
            for s in &summary.manifest.snapshots {
                println!("wrote {} (t = {}, norm = {:.6e})", s.file, s.time, s.norm);
            }
            for c in &summary.manifest.comparisons {
                println!(
                    "t = {}: rel_l2 = {:.6e}, max_abs = {:.6e}",
                    c.time, c.rel_l2, c.max_abs
                );
            }
            println!("manifest: {}", out_dir.join("manifest.json").display());
            if summary.self_test_failed {
                eprintln!("self-test: rel_l2 exceeded the configured threshold");
                return Ok(4);
            }
            Ok(0)
        }
        Command::Complexity { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let report = driver::complexity_command(&cfg)?;
            let text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
            match out {
                Some(path) => std::fs::write(path, text + "\n").map_err(Error::from)?,
                None => println!("{text}"),
            }
            Ok(0)
        }
        Command::Convergence { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let table = driver::convergence_command(&cfg)?;
            let path = out.unwrap_or_else(|| PathBuf::from(&cfg.out_dir).join("convergence.csv"));
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent).map_err(Error::from)?;
                }
            }
            driver::write_convergence_csv(&path, &table)?;
            for row in &table.rows {
                println!("M = {:4}  dp = {:.6e}  rel_l2 = {:.6e}", row.m, row.dp, row.rel_l2);
            }
            println!("monotone_decrease = {}", table.monotone_decrease);
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Compare {
            a,
            b,
            max_rel_l2,
            out,
        } => {
            let (rel_l2, max_abs) = driver::compare_snapshots(&a, &b)?;
            let report = serde_json::json!({ "rel_l2": rel_l2, "max_abs": max_abs });
            let text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
            match out {
                Some(path) => std::fs::write(path, text + "\n").map_err(Error::from)?,
                None => println!("{text}"),
            }
            if let Some(tol) = max_rel_l2 {
                if rel_l2 > tol {
                    eprintln!("compare: rel_l2 {rel_l2:.6e} exceeds threshold {tol:.6e}");
                    return Ok(4);
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
