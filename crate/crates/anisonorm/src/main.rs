use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use anisonorm::cli::{self, CliError, CmdOutput, Method};

/// Anisotropic norm analysis of finite-horizon linear discrete
/// time-varying systems.
#[derive(Parser)]
#[command(name = "anisonorm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the a-anisotropic norm together with the classical norms.
    Norm {
        /// System description file (JSON).
        system_file: PathBuf,
        /// Anisotropy bound on the input, in nats.
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        /// Root-finding tolerance (default 1e-10, or ANISONORM_TOL).
        #[arg(long)]
        tol: Option<f64>,
        /// Computation path: dense oracle, Riccati recursion, or both.
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        /// Optional path for the JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide the bound |||F|||_a <= gamma and report the witness.
    Check {
        system_file: PathBuf,
        /// Threshold gamma.
        #[arg(long)]
        gamma: f64,
        /// Anisotropy bound on the input, in nats.
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        /// Decision tolerance on the margin (default 1e-9).
        #[arg(long)]
        tol: Option<f64>,
        /// Optional path for the JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate both norm computations over an anisotropy grid (CSV).
    Sweep {
        system_file: PathBuf,
        /// Comma-separated anisotropy values, e.g. "0,0.05,0.5,5".
        #[arg(long)]
        grid: String,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Root-finding tolerance (default 1e-10).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Emit the anisotropy, gain and decision curves on a q-grid (CSV).
    Plotdata {
        system_file: PathBuf,
        /// Threshold gamma for the decision curve.
        #[arg(long)]
        gamma: f64,
        /// Number of grid points (at least 2).
        #[arg(long, default_value_t = 200)]
        q_points: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Test whether the system is outer, with per-step residuals.
    Outer {
        system_file: PathBuf,
        /// Max-abs residual tolerance (default 1e-8).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Spectral factor H at a feasible q, written as a system file.
    Factor {
        system_file: PathBuf,
        /// Riccati parameter q.
        #[arg(long)]
        q: f64,
        /// Output path for the H realization.
        #[arg(long)]
        out: PathBuf,
        /// Outerness tolerance for the completed system (default 1e-8).
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn run(command: Command) -> Result<CmdOutput, CliError> {
    match command {
        Command::Norm {
            system_file,
            a,
            tol,
            method,
            out,
        } => cli::cmd_norm(&system_file, a, tol, method, out.as_deref()),
        Command::Check {
            system_file,
            gamma,
            a,
            tol,
            out,
        } => cli::cmd_check(&system_file, gamma, a, tol, out.as_deref()),
        Command::Sweep {
            system_file,
            grid,
            out,
            tol,
        } => cli::cmd_sweep(&system_file, &grid, &out, tol),
        Command::Plotdata {
            system_file,
            gamma,
            q_points,
            out,
            tol,
        } => cli::cmd_plotdata(&system_file, gamma, q_points, &out, tol),
        Command::Outer { system_file, tol } => cli::cmd_outer(&system_file, tol),
        Command::Factor {
            system_file,
            q,
            out,
            tol,
        } => cli::cmd_factor(&system_file, q, &out, tol),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(output) => {
            print!("{}", output.text);
            ExitCode::from(output.exit_code as u8)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
