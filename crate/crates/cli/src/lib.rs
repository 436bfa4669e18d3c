//! Command-line front end: argument parsing, config-file defaults, and
//! exit-code policy. All computation renders to a string first, so a
//! failing run never leaves a partial output file behind.

use std::env;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use relaytree::{Error as CoreError, FailureSchedule};

mod config;
mod render;

/// Exit codes: 0 ok, 2 configuration error, 3 domain error, 4 I/O failure.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(CoreError),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(
                CoreError::ScheduleParse { .. } | CoreError::ScheduleTooShort { .. },
            ) => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn parse_schedule(s: &str) -> Result<FailureSchedule, CoreError> {
    s.parse()
}

/// Detection performance of balanced binary relay trees with failing
/// nodes and links.
#[derive(Parser, Debug)]
#[command(name = "relaytree", version, arg_required_else_help = true)]
pub struct Cli {
    /// Defaults file with `key = value` lines (keys are long flag names);
    /// explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted. Relative paths land under
    /// $RELAYTREE_OUT_DIR when that variable is set.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

/// Tree and sensor configuration shared by the trajectory commands.
#[derive(Args, Debug)]
pub struct TreeArgs {
    /// Sensor type I error α₀.
    #[arg(long)]
    pub alpha0: f64,
    /// Sensor type II error β₀.
    #[arg(long)]
    pub beta0: f64,
    /// Failure schedule: constant:p=0.1, quadratic:p0=0.1,
    /// geometric:p0=0.1,r=0.5, explicit:0.1,0.01,... or raw:(n,l);(n,l);...
    #[arg(long, value_parser = parse_schedule)]
    pub schedule: FailureSchedule,
    /// Tree height (number of fusion levels).
    #[arg(long)]
    pub height: Option<u32>,
    /// Sensor count N (a power of two); alternative to --height.
    #[arg(long)]
    pub sensors: Option<u64>,
}

impl TreeArgs {
    /// Exactly one of --height / --sensors, with N a power of two.
    pub fn resolve_height(&self) -> Result<usize, CliError> {
        match (self.height, self.sensors) {
            (Some(h), None) => Ok(h as usize),
            (None, Some(n)) => {
                if n >= 2 && n.is_power_of_two() {
                    Ok(n.trailing_zeros() as usize)
                } else {
                    Err(CliError::Config(format!(
                        "--sensors must be a power of two of at least 2, got {n}"
                    )))
                }
            }
            _ => Err(CliError::Config(
                "give exactly one of --height and --sensors".into(),
            )),
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Error/silence trajectory, one CSV row per level.
    Evolve {
        #[command(flatten)]
        tree: TreeArgs,
    },
    /// √N bounds on the root error for one configuration (key/value text).
    Bounds {
        #[command(flatten)]
        tree: TreeArgs,
        /// Prior probability of hypothesis H0.
        #[arg(long, default_value_t = 0.5)]
        prior0: f64,
        /// Contraction constant C; estimated from the trajectory when omitted.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Monte Carlo estimates next to the recursion's values (one CSV row).
    Simulate {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Prior probability of hypothesis H0.
        #[arg(long, default_value_t = 0.5)]
        prior0: f64,
    },
    /// Exact small-tree distribution vs the recursion, residuals per level.
    Oracle {
        #[command(flatten)]
        tree: TreeArgs,
    },
    /// Region-boundary curves over an α grid at fixed silence values.
    Regions {
        /// Silence probabilities to sweep, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.1, 0.5, 0.9])]
        q: Vec<f64>,
        /// Grid spacing in α over [0, 0.5).
        #[arg(long, default_value_t = 1e-3)]
        alpha_step: f64,
    },
    /// Step-ratio diagnostics (contraction and two-step bounds) along a
    /// trajectory.
    Ratios {
        #[command(flatten)]
        tree: TreeArgs,
        /// Contraction constant C; estimated from the trajectory when omitted.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Growth of log₂ log₂ P̂⁻¹ against log₂ N for the no-failure,
    /// quadratic, and constant profiles, with fitted slopes.
    Scaling {
        #[arg(long, default_value_t = 0.1)]
        alpha0: f64,
        #[arg(long, default_value_t = 0.2)]
        beta0: f64,
        /// Initial failure probability for the quadratic and constant profiles.
        #[arg(long, default_value_t = 0.1)]
        p0: f64,
        /// Prior probability of hypothesis H0.
        #[arg(long, default_value_t = 0.4)]
        prior0: f64,
        #[arg(long, default_value_t = 20)]
        max_height: u32,
        /// Slope-fit window in log₂ N.
        #[arg(long, default_value_t = 8)]
        window_lo: u32,
        #[arg(long, default_value_t = 20)]
        window_hi: u32,
    },
    /// Smallest sensor count meeting a target error (key/value text).
    Size {
        /// Target total error probability ε.
        #[arg(long)]
        epsilon: f64,
        /// Initial total error L₀ = α₀ + β₀.
        #[arg(long)]
        l0: f64,
        /// Contraction constant C.
        #[arg(long, default_value_t = 0.0)]
        c: f64,
    },
}

pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Evolve { tree } => render::evolve_csv(tree),
        Command::Bounds { tree, prior0, c } => render::bounds_kv(tree, *prior0, *c),
        Command::Simulate { tree, trials, seed, prior0 } => {
            render::simulate_csv(tree, *trials, *seed, *prior0)
        }
        Command::Oracle { tree } => render::oracle_csv(tree),
        Command::Regions { q, alpha_step } => render::regions_csv(q, *alpha_step),
        Command::Ratios { tree, c } => render::ratios_csv(tree, *c),
        Command::Scaling {
            alpha0,
            beta0,
            p0,
            prior0,
            max_height,
            window_lo,
            window_hi,
        } => render::scaling_csv(
            *alpha0,
            *beta0,
            *p0,
            *prior0,
            *max_height as usize,
            *window_lo as usize,
            *window_hi as usize,
        ),
        Command::Size { epsilon, l0, c } => render::size_kv(*epsilon, *l0, *c),
    }
}

fn resolve_out(p: &Path) -> PathBuf {
    if p.is_relative() {
        if let Some(dir) = env::var_os("RELAYTREE_OUT_DIR") {
            return PathBuf::from(dir).join(p);
        }
    }
    p.to_path_buf()
}

fn deliver(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(p) => {
            let path = resolve_out(p);
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    fs::create_dir_all(dir)?;
                }
            }
            fs::write(&path, content)?;
            Ok(())
        }
    }
}

/// Full CLI entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let args = match config::apply_config_file(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            // --help and --version arrive here too; they are not failures.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli).and_then(|rendered| deliver(cli.out.as_deref(), &rendered)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
