use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use soliton_lab::run::{self, exit, GridAxis, RunConfig};
use soliton_lab::Error;

#[derive(Parser)]
#[command(name = "soliton-lab", version, about = "Integrate and check cohomogeneity-one soliton trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one config and write trajectory.csv, report.json and manifest.json.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a grid of configs, one cell directory each, plus sweep_summary.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// PARAM=start:step:count with PARAM one of C, epsilon, initial[i].
        #[arg(long = "grid", required = true)]
        grids: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Bracket the largest C for which -du(tau) >= c.
    ProbeC0 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scalar curvature and Ricci eigenvalues of a decomposition file.
    Curvature {
        #[arg(long)]
        decomposition: PathBuf,
        /// Comma-separated scalings, one per summand.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    run::error_exit_code(e)
}

/// Any failure to read or validate the config is a usage error.
fn load(path: &std::path::Path) -> Result<RunConfig, i32> {
    RunConfig::load(path).map_err(|e| {
        eprintln!("error: {e}");
        exit::CONFIG
    })
}

fn solve(config: PathBuf, out: PathBuf) -> i32 {
    let cfg = match load(&config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    match run::solve_to_dir(&cfg, &out) {
        Ok(res) => {
            println!(
                "{} t_end={:.6} -du={:.6} residual={:.3e} -> {}",
                res.verdict.name(),
                res.diagnostics.t_end,
                res.diagnostics.terminal_minus_du,
                res.diagnostics.max_conservation_residual,
                out.display()
            );
            res.exit_code
        }
        Err(e) => fail(&e),
    }
}

fn sweep(config: PathBuf, grids: Vec<String>, out: PathBuf, jobs: usize) -> i32 {
    let cfg = match load(&config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let axes: Result<Vec<GridAxis>, Error> = grids.iter().map(|g| g.parse()).collect();
    let axes = match axes {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    match run::run_sweep(&cfg, &axes, &out, jobs) {
        Ok(cells) => {
            let failed = cells.iter().filter(|c| c.error.is_some()).count();
            let complete = cells
                .iter()
                .filter(|c| c.verdict.as_deref() == Some("numerically_complete"))
                .count();
            println!(
                "{} cells, {complete} numerically complete, {failed} failed -> {}",
                cells.len(),
                out.join("sweep_summary.csv").display()
            );
            if failed > 0 {
                exit::FAILURE
            } else {
                exit::OK
            }
        }
        Err(e) => fail(&e),
    }
}

fn probe(config: PathBuf, c: f64, tau: f64, out: PathBuf) -> i32 {
    let cfg = match load(&config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    match run::probe_to_dir(&cfg, c, tau, &out) {
        Ok(r) => {
            println!(
                "empirical_C0={:.6e} failing_C={:.6e} c_star={} -> {}",
                r.empirical_c0,
                r.failing_c,
                r.c_star.map_or("none".to_string(), |v| format!("{v:.6}")),
                out.display()
            );
            exit::OK
        }
        Err(e) => fail(&e),
    }
}

fn curvature(path: PathBuf, x: String) -> i32 {
    let out = run::parse_list(&x).and_then(|x| run::curvature_from_file(&path, &x));
    match out {
        Ok(o) => {
            println!("{}", serde_json::to_string_pretty(&o).expect("output serializes"));
            if o.validation.is_clean() {
                exit::OK
            } else {
                eprintln!("decomposition failed validation:");
                for v in &o.validation.violations {
                    eprintln!("  {v:?}");
                }
                exit::DATA
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit::CONFIG
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Solve { config, out } => solve(config, out),
        Command::Sweep {
            config,
            grids,
            out,
            jobs,
        } => sweep(config, grids, out, jobs),
        Command::ProbeC0 { config, c, tau, out } => probe(config, c, tau, out),
        Command::Curvature { decomposition, x } => curvature(decomposition, x),
    };
    ExitCode::from(code as u8)
}
