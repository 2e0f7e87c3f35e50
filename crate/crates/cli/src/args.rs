use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ccd-lab", version, about = "Concurrence canonical decompositions, capacities and spin-chain checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Concurrence canonical decomposition v = k1 a k2.
    Ccd(Opts),
    /// Concurrence capacity with witness states.
    Capacity(Opts),
    /// Concurrence spectrum of a unitary (or concurrence of a named state).
    Spectrum(Opts),
    /// Time-reversal polar decomposition v = exp(i Hp) exp(i Hk).
    Polar(Opts),
    /// Spin-chain reports.
    Spinchain {
        #[command(subcommand)]
        action: ChainAction,
    },
    /// Monte Carlo estimate of the maximal-capacity fraction (odd n).
    McCapacity(Opts),
    /// Structured eigendecomposition of a J-skew-symmetric Hamiltonian.
    Symeig(Opts),
}

#[derive(Debug, Subcommand)]
pub enum ChainAction {
    /// Degeneracy structure and eigenstate concurrences.
    Kramers(Opts),
    /// Minimal time to maximal capacity under the periodic Ising chain.
    Tmin(Opts),
    /// Ground-state sweep of the XY chain over the field strength.
    Sweep(Opts),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Example {
    Cphase,
    Cnot,
    Ghz,
    W,
    W4,
    Xxx,
    Xy,
    Ising,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Xxx,
    Xy,
    Xyz,
    Ising,
    XyField,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Args)]
pub struct Opts {
    /// Number of qubits (sites).
    #[arg(long)]
    pub n: Option<usize>,
    /// Matrix file in the shared JSON format.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Draw a Haar-random input from --seed.
    #[arg(long)]
    pub random: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub example: Option<Example>,
    /// Time or gate parameter; `lo:step:hi` gives a sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Ising / chain coupling.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub jz: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub jx: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub jy: Option<f64>,
    /// XY anisotropy.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub g: f64,
    /// Field strength, single value or `lo:step:hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_unitary: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_cluster: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_hull: f64,
    /// Worker threads; falls back to CCD_LAB_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Run cross-checks and fail on mismatch.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Half dimension of a random J-skew-symmetric Hamiltonian.
    #[arg(long)]
    pub ell: Option<usize>,
    /// Grid points for the t_min sweep.
    #[arg(long, default_value_t = 400)]
    pub points: usize,
}

/// `x` or `lo:step:hi` (inclusive, computed as `lo + k step`).
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}"));
    match parts.as_slice() {
        [x] => Ok(vec![num(x)?]),
        [lo, step, hi] => {
            let (lo, step, hi) = (num(lo)?, num(step)?, num(hi)?);
            if step.is_nan() || step <= 0.0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
                return Err(format!("invalid range {s:?}"));
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(format!("range {s:?} has too many points"));
            }
            Ok((0..count).map(|k| lo + k as f64 * step).collect())
        }
        _ => Err(format!("expected a number or lo:step:hi, got {s:?}")),
    }
}
