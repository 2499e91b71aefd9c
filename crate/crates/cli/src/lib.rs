//! Command-line driver: parses flags, merges an optional JSON config, runs one
//! check family and writes a CSV or JSON report.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check fails,
//! 2 on usage or parameter errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod report;

use commands::{BesselParams, CatalogParams, EigParams, GeometryParams, IdentityParams, RayleighParams, SharpnessParams};
pub use report::{emit_report, Cell, Format, Report};

/// Why a run did not succeed.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Bad flags, parameters outside a hypothesis, unreadable or unwritable files.
    Usage(String),
    /// A numerical check could not be certified.
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Check(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "error: {m}"),
            Failure::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<hardylab_core::Error> for Failure {
    fn from(e: hardylab_core::Error) -> Self {
        use hardylab_core::Error as E;
        match e {
            E::ParameterDomain(_)
            | E::Hypothesis(_)
            | E::Unsupported(_)
            | E::InvalidProfile(_)
            | E::SingularPoint
            | E::Serialization(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hardylab", version, about = "Numerical checks of sharp weighted Hardy inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Output and config options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format; each subcommand has its own default.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// JSON object of parameters; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integral remainder identity for |f|^p + (p-1)|g|^p - p|g|^{p-2}Re(conj(g) f).
    ///
    /// Checks, per sampled pair in C^h: the remainder equals the sum of the
    /// real-part integral w and the imaginary-part integral w~ (relative
    /// residual <= 1e-9), and both integrals are nonnegative.
    Identity {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: IdentityParams,
    },
    /// Bessel pair certification for a catalog scenario.
    ///
    /// Checks that the closed-form extremal solves
    /// (r^k V |phi'|^{p-2} phi')' + lambda r^k W |phi|^{p-2} phi = 0, that
    /// integrating from its initial data reproduces it, and that it stays positive.
    Bessel {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: BesselParams,
    },
    /// Dirichlet eigenvalue of the weighted radial p-Laplacian on an annulus.
    ///
    /// Checks lambda_1 > |(Q - p theta)/p|^p and the nodal count of the
    /// eigenfunction (which - 1 interior zeros).
    Eig {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: EigParams,
    },
    /// Cut-off sweep of the truncated extremal toward the sharp constant.
    ///
    /// Checks that every quotient is at least the sharp constant, that the
    /// deficit decreases with epsilon, and that deficit * ln(1/(4 eps^2)) stays
    /// within a factor 2 (logarithmic convergence rate).
    Sharpness {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: SharpnessParams,
    },
    /// Gauge geometries: Euclidean, Heisenberg-Greiner, Baouendi-Grushin, cylindrical split.
    ///
    /// Checks: closed-form horizontal gauge gradients against finite
    /// differences, degree-one homogeneity of the gauge under the dilations,
    /// R^Q scaling of int_{d<R} |grad_L d|^alpha, orthogonality of the Greiner
    /// t-column to z, the strip inequality for d = e^y cos x, Vandermonde
    /// harmonicity and spherical eigenvalue with the sector quotient, and the
    /// direct multi-dimensional quotient against its radial reduction.
    Geometry {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: GeometryParams,
    },
    /// Random-profile sampling of a catalog inequality.
    ///
    /// Checks that the radial Rayleigh quotient of every seeded profile is at
    /// least the sharp constant (relative tolerance 1e-8).
    Rayleigh {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: RayleighParams,
    },
    /// Catalog scenarios with their exponents and sharp constants.
    Catalog {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: CatalogParams,
    },
}

/// Caps the worker pool from `HARDYLAB_THREADS`.
fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("HARDYLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Failure::Usage(format!("HARDYLAB_THREADS = '{v}' is not a positive integer")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Failure::Usage(format!("thread pool: {e}")))
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<Vec<String>, Failure> {
    let (io, outcome) = thread_pool()?.install(|| commands::dispatch(cli.command))?;
    emit_report(&outcome.report, io.format.unwrap_or(outcome.default_format), io.out.as_deref(), stdout)?;
    Ok(outcome.failed_checks)
}

/// Runs the command line `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(stdout, "{e}");
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        2
                    } else {
                        0
                    }
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    2
                }
            };
        }
    };
    match execute(cli, stdout) {
        Ok(failed) if failed.is_empty() => 0,
        Ok(failed) => {
            for f in &failed {
                let _ = writeln!(stderr, "{}", Failure::Check(f.clone()));
            }
            1
        }
        Err(f) => {
            let _ = writeln!(stderr, "{f}");
            f.exit_code()
        }
    }
}
