//! `normalform`: batch driver for normal-form computations.
//!
//! Exit status: 0 on success, 1 on input errors, 2 when a certificate fails.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "normalform", version, about = "Truncated formal normal forms with certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Poincaré–Dulac normalization of `ẋ = diag(λ)x + R(x)`.
    VfNormalize(RunArgs),
    /// Resonances, Poincaré domain and denominator growth for `λ`.
    VfDiagnose(RunArgs),
    /// Normal form of `f₀ + R` with `f₀` homogeneous.
    SingNormalize(RunArgs),
    /// Normal form of a frame, metric or conformal structure.
    GeomNormalize(RunArgs),
    /// Majorant series from model parameters or from a vector-field run.
    Majorant(RunArgs),
    /// Gevrey-order fit of a `degree,norm` CSV.
    GevreyFit(RunArgs),
    /// Seeded randomized self-checks.
    Verify(RunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Problem file (JSON; CSV for gevrey-fit).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Directory for report.json and CSV tables; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Truncation degree, overriding the problem file.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Scalar mode: exact, gaussian, float or complex.
    #[arg(long, default_value = "exact")]
    pub mode: String,
    /// Resonance and membership tolerance for floating modes.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed for generated perturbations and self-checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Geometric kind: frame, metric or conformal.
    #[arg(long)]
    pub kind: Option<String>,
    /// Eigenvalues as a comma list, e.g. `1,2` or `1/2,3`.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Fit window `lo,hi`.
    #[arg(long)]
    pub window: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::VfNormalize(a) => commands::vf_normalize(a),
        Command::VfDiagnose(a) => commands::vf_diagnose(a),
        Command::SingNormalize(a) => commands::sing_normalize(a),
        Command::GeomNormalize(a) => commands::geom_normalize(a),
        Command::Majorant(a) => commands::majorant(a),
        Command::GevreyFit(a) => commands::gevrey_fit(a),
        Command::Verify(a) => commands::verify(a),
    };
    let args = match &cli.command {
        Command::VfNormalize(a)
        | Command::VfDiagnose(a)
        | Command::SingNormalize(a)
        | Command::GeomNormalize(a)
        | Command::Majorant(a)
        | Command::GevreyFit(a)
        | Command::Verify(a) => a,
    };
    match result.and_then(|run| io::emit(&run, args.output.as_deref()).map(|_| run.passed)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("certificate failed; see the report");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
