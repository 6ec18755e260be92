mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Config;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameter values.
    Usage(String),
    /// A computation failed one of its checks.
    Compute(rmt_lab::Error),
    Io(String),
    Internal(String),
}

impl From<rmt_lab::Error> for CliError {
    fn from(e: rmt_lab::Error) -> Self {
        match e {
            rmt_lab::Error::RejectedParams(_) => CliError::Usage(format!("{} ({e})", e.kind())),
            e => CliError::Compute(e),
        }
    }
}

#[derive(Parser)]
#[command(name = "rmt-lab", version, about = "Numerical laboratory for the coupled two-matrix product model")]
struct Cli {
    /// TOML file with the same keys as the long flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for the run's files and manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub kappa: Option<i64>,
    #[arg(long)]
    pub nu: Option<i64>,
    #[arg(long)]
    pub n: Option<i64>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Endpoints p, q and the critical points t±.
    Endpoints {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// The four branches of the spectral curve at one point.
    Curve {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long = "z-re", allow_hyphen_values = true)]
        z_re: Option<f64>,
        #[arg(long = "z-im", allow_hyphen_values = true)]
        z_im: Option<f64>,
        /// Boundary value from above (`plus`) or below (`minus`) for real z.
        #[arg(long)]
        side: Option<String>,
    },
    /// Traced contour arcs in the t-plane.
    Contours {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        which: Option<String>,
        #[arg(long)]
        npoints: Option<usize>,
        #[arg(long)]
        ratio: Option<f64>,
    },
    /// Density table with endpoint exponent fits.
    Density {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        measure: Option<String>,
        #[arg(long)]
        npoints: Option<usize>,
    },
    /// Equilibrium checks; with no selection all of them run.
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        variational: bool,
        #[arg(long)]
        masses: bool,
        #[arg(long)]
        balayage: bool,
    },
    /// Special function values.
    Special {
        /// meijer, meijer-series, bessel-i, bessel-k or log-gamma.
        #[arg(long = "fn")]
        function: Option<String>,
        #[arg(long)]
        m: Option<u32>,
        /// Comma-separated b₁,b₂,b₃.
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[arg(long)]
        zeta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        abscissa: Option<f64>,
        #[arg(long)]
        order: Option<u32>,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        re: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        im: Option<f64>,
    },
    /// One kernel value, hard-edge limit or finite n.
    Kernel {
        #[command(flatten)]
        params: ParamArgs,
        /// hard-edge or finite-n.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        nu1: Option<u32>,
        #[arg(long)]
        nu2: Option<u32>,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        y: Option<f64>,
        /// gauss or tanh-sinh, for the hard-edge integral.
        #[arg(long)]
        route: Option<String>,
    },
    /// Monte Carlo ensemble of squared singular values.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Use the τ construction; (α, β) are derived from τ.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Finite-n kernels against their limits across n.
    Compare {
        #[command(flatten)]
        params: ParamArgs,
        /// global or hard-edge.
        #[arg(long)]
        what: Option<String>,
        /// Comma-separated even sizes.
        #[arg(long)]
        ns: Option<String>,
        /// Comma-separated x in (0, p) for the global comparison.
        #[arg(long)]
        xs: Option<String>,
        /// Semicolon-separated x,y pairs for the hard-edge comparison.
        #[arg(long)]
        pairs: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Endpoints { .. } => "endpoints",
            Command::Curve { .. } => "curve",
            Command::Contours { .. } => "contours",
            Command::Density { .. } => "density",
            Command::Verify { .. } => "verify",
            Command::Special { .. } => "special",
            Command::Kernel { .. } => "kernel",
            Command::Simulate { .. } => "simulate",
            Command::Compare { .. } => "compare",
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("RMT_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("RMT_LAB_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let cfg = Config::load(cli.config.as_deref())?;
    let out: PathBuf = cfg.or(cli.out, "out", PathBuf::from("rmt-lab-out"))?;
    let name = cli.command.name();
    let run = commands::execute(&cli.command, &cfg)?;
    let primary = run.outputs.commit(&out, name, run.params, run.seed)?;
    if let Some(text) = primary {
        print!("{text}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(e)) => {
            eprintln!("error: {}: {e}", e.kind());
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) | Err(CliError::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
