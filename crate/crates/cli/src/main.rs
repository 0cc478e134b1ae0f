//! `invcorr`: kernels, distributions, samplers and comparison runs for
//! k-increasing subsequences of random involutions.

mod commands;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use table::{error_record, Format};

#[derive(Debug, Parser)]
#[command(name = "invcorr", version, about = "Correlation kernels, gap probabilities and Monte Carlo for random involutions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Random seed for sampling commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Random stream id for sampling commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub stream: u64,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true, env = "INVCORR_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    /// Uniform involution with fixed (n, m).
    Fixed,
    /// n ~ Poisson(Q/2), m ~ Poisson(√(αQ)).
    Poisson,
    /// Symmetric geometric weight matrix on an M × M grid.
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Regime {
    Finite,
    Poisson,
    Airy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Centring {
    /// 2√N and N^{1/6}, N = 2n + m.
    Size,
    /// 2√(2n) and (2n)^{1/6}.
    Pairs,
}

/// Soft-edge parameter, given as `u` or as `w = −u/4`.
#[derive(Debug, Clone, Copy, Args)]
#[group(required = true, multiple = false)]
pub struct SoftEdge {
    #[arg(long, allow_negative_numbers = true)]
    pub u: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub w: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw involutions or geometric-model shapes.
    Sample {
        #[arg(long, value_enum, default_value_t = Model::Fixed)]
        model: Model,
        /// Two-cycles (fixed model).
        #[arg(long, default_value_t = 0)]
        n: usize,
        /// Fixed points (fixed model).
        #[arg(long, default_value_t = 0)]
        m: usize,
        /// Poisson parameter Q (poisson model).
        #[arg(long = "poisson-q")]
        poisson_q: Option<f64>,
        /// Fixed-point weight α (poisson and geometric models).
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Grid size M (geometric model, even).
        #[arg(long)]
        grid: Option<usize>,
        /// Off-diagonal ratio q (geometric model).
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        /// Omit the involution word.
        #[arg(long)]
        shape_only: bool,
    },
    /// Finite-model kernel blocks at all pairs of x and y.
    KernelFinite {
        /// Grid size M (even).
        #[arg(long)]
        m: usize,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        x: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        y: Vec<i64>,
    },
    /// Poissonized Bessel-kernel blocks at all pairs of x and y.
    KernelPoisson {
        /// Poisson parameter Q.
        #[arg(long = "poisson-q")]
        poisson_q: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        x: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        y: Vec<i64>,
    },
    /// Soft-edge kernel blocks at all pairs of x and y.
    KernelAiry {
        #[command(flatten)]
        edge: SoftEdge,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        y: Vec<f64>,
    },
    /// Soft-edge joint distribution of the largest scaled rows.
    Gap {
        #[command(flatten)]
        edge: SoftEdge,
        /// Decreasing thresholds s_1 > s_2 > … .
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        s: Vec<f64>,
        /// Truncation order of the Fredholm series.
        #[arg(long, default_value_t = 12)]
        terms: usize,
        /// Quadrature nodes per interval (doubled for the convergence check).
        #[arg(long)]
        nodes: Option<usize>,
        /// Upper integration limit.
        #[arg(long)]
        cutoff: Option<f64>,
    },
    /// One-point density over a range.
    Density {
        #[arg(long, value_enum)]
        regime: Regime,
        /// Grid size M (finite regime).
        #[arg(long)]
        m: Option<usize>,
        /// Ratio q (finite regime).
        #[arg(long)]
        q: Option<f64>,
        /// Poisson parameter Q (poisson regime).
        #[arg(long = "poisson-q")]
        poisson_q: Option<f64>,
        /// Fixed-point weight α (finite and poisson regimes).
        #[arg(long)]
        alpha: Option<f64>,
        /// Soft-edge w (airy regime).
        #[arg(long, allow_negative_numbers = true)]
        w: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        /// Step (airy regime; the lattice regimes use step 1).
        #[arg(long, default_value_t = 0.25)]
        step: f64,
    },
    /// Empirical scaled rows against the soft-edge distribution.
    Compare {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        w: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Thresholds for the joint check.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0,-1")]
        s: Vec<f64>,
        /// KS tolerance for the verdict.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Centring::Size)]
        centring: Centring,
        /// Truncation order of the Fredholm series.
        #[arg(long, default_value_t = 12)]
        terms: usize,
    },
    /// Fixed-size against Poissonized λ_1 at matched means.
    Depoissonize {
        /// Poisson parameter Q.
        #[arg(long = "poisson-q")]
        poisson_q: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        w: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sample { .. } => "sample",
            Command::KernelFinite { .. } => "kernel-finite",
            Command::KernelPoisson { .. } => "kernel-poisson",
            Command::KernelAiry { .. } => "kernel-airy",
            Command::Gap { .. } => "gap",
            Command::Density { .. } => "density",
            Command::Compare { .. } => "compare",
            Command::Depoissonize { .. } => "depoissonize",
        }
    }
}

fn fail(kind: &str, message: &str, command: Option<&str>, code: u8) -> ExitCode {
    eprintln!("{}", error_record(kind, message, command));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => return fail("config", e.to_string().trim(), None, 2),
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            return fail("config", &e.to_string(), None, 2);
        }
    }
    let name = cli.command.name();
    let table = match commands::run(&cli) {
        Ok(t) => t,
        Err(commands::CliError::Config(msg)) => return fail("config", &msg, Some(name), 2),
        Err(commands::CliError::Module(e)) => return fail(e.kind(), &e.to_string(), Some(name), 1),
    };
    let written = match &cli.output {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            table.write(cli.format, &mut w)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            table.write(cli.format, &mut w).and_then(|_| w.flush())
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => fail("io", &e.to_string(), Some(name), 3),
    }
}
