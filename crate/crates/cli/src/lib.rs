//! Scenario runner behind the `moyalks` binary.
//!
//! Exit status: 0 success, 2 configuration error, 3 inconclusive estimate,
//! 4 numerical-stability abort, 1 anything else.

pub mod config;
mod report;
mod run;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{parse_depths, Layer, Scenario, SystemName};
pub use run::{bracket, classical, evolve, quantum, sweep, Outcome};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Core(moyalks::Error),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Core(moyalks::Error::Config(_) | moyalks::Error::Parse(_) | moyalks::Error::InvalidSpace(_)) => 2,
            Failure::Core(moyalks::Error::Stability(_)) => 4,
            _ => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<moyalks::Error> for Failure {
    fn from(e: moyalks::Error) -> Self {
        Failure::Core(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "moyalks", version, about = "Kolmogorov-Sinai entropy of classical and Moyal flows")]
pub struct Cli {
    /// Scenario file (TOML). Flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the manifest, CSV tables and summary.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to MOYALKS_THREADS, then to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropy estimates.
    Entropy {
        #[command(subcommand)]
        mode: EntropyMode,
    },
    /// Moyal bracket (or product) of two polynomials.
    Bracket(BracketArgs),
    /// Evolve a Gaussian under the classical and Moyal flows.
    Evolve(EvolveArgs),
}

#[derive(Debug, Subcommand)]
pub enum EntropyMode {
    /// KS entropy of a classical point map or flow.
    Classical(ScenarioArgs),
    /// Quantum dynamical entropy at a single hbar.
    Quantum(ScenarioArgs),
    /// Quantum dynamical entropy over a list of hbar values.
    Sweep(ScenarioArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    #[arg(long, value_enum)]
    pub system: Option<SystemName>,
    /// Kick strength of the standard map and kicked rotor.
    #[arg(long)]
    pub k: Option<f64>,
    /// Rotation number; defaults to the golden mean.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Radius of the invariant disk on plane windows.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Polynomial Hamiltonian on a plane window, e.g. "p^2/2 + q^4/4".
    #[arg(long)]
    pub hamiltonian: Option<String>,
    /// Side length of the plane window.
    #[arg(long)]
    pub side: Option<f64>,
    /// Grid nodes per axis (power of two).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Comma-separated hbar values.
    #[arg(long, value_delimiter = ',')]
    pub hbar: Option<Vec<f64>>,
    /// Depth range `2..6` or list `1,2,3`.
    #[arg(long, value_parser = depth_list)]
    pub depths: Option<DepthList>,
    /// Longest itinerary length.
    #[arg(long = "n")]
    pub n_max: Option<usize>,
    /// Sampled points for itinerary counting.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Seed of the sample plan.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub layer: Option<Layer>,
}

impl ScenarioArgs {
    /// Applies the flags that were given on top of `base`.
    pub fn apply(&self, base: Scenario) -> Scenario {
        let mut s = base;
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { s.$f = v; } )* };
        }
        set!(system, k, radius, side, grid, hbar, n_max, samples, seed, layer);
        if let Some(d) = &self.depths {
            s.depths = d.0.clone();
        }
        if self.alpha.is_some() {
            s.alpha = self.alpha;
        }
        if self.hamiltonian.is_some() {
            s.hamiltonian = self.hamiltonian.clone();
        }
        s
    }
}

/// Parsed `--depths` value.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthList(pub Vec<u32>);

fn depth_list(text: &str) -> Result<DepthList, String> {
    parse_depths(text).map(DepthList)
}

#[derive(Debug, Clone, Args)]
pub struct BracketArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub g: String,
    /// Numeric (exact decimal) hbar; the result keeps hbar symbolic when absent.
    #[arg(long)]
    pub hbar: Option<String>,
    /// Print the star product `f ⋆ g` instead of the bracket.
    #[arg(long)]
    pub product: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Evolution time (whole periods for kicked systems).
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
}

type Pipeline = fn(&Scenario) -> Result<Outcome, Failure>;

/// Resolves the scenario for an entropy or evolve command.
pub fn resolve(config: Option<&Path>, args: &ScenarioArgs) -> Result<Scenario, Failure> {
    let base = match config {
        Some(path) => Scenario::load(path)?,
        None => Scenario::default(),
    };
    let mut s = args.apply(base);
    s.estimator.samples = s.samples;
    s.estimator.seed = s.seed;
    s.validate()?;
    Ok(s)
}

/// Runs a parsed command line; output files go to `--out` (or the scenario's
/// `output`) when given.
pub fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    let (outcome, out) = match &cli.command {
        Command::Entropy { mode } => {
            let (args, f): (&ScenarioArgs, Pipeline) = match mode {
                EntropyMode::Classical(a) => (a, classical),
                EntropyMode::Quantum(a) => (a, quantum),
                EntropyMode::Sweep(a) => (a, sweep),
            };
            let s = resolve(cli.config.as_deref(), args)?;
            (f(&s)?, cli.out.clone().or(s.output.clone()))
        }
        Command::Evolve(a) => {
            let s = resolve(cli.config.as_deref(), &a.scenario)?;
            (evolve(&s, a.t)?, cli.out.clone().or(s.output.clone()))
        }
        Command::Bracket(a) => (bracket(a)?, cli.out.clone()),
    };
    if let Some(dir) = out {
        outcome.write(&dir)?;
    }
    Ok(outcome)
}

/// Sizes the global worker pool from `--threads` or `MOYALKS_THREADS`.
pub fn init_threads(flag: Option<usize>) -> Result<(), Failure> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("MOYALKS_THREADS") {
            Ok(v) => Some(v.trim().parse().map_err(|_| Failure::Config(format!("MOYALKS_THREADS=`{v}` is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}
