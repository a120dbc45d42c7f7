use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod output;
mod run;

#[derive(Debug, Parser)]
#[command(name = "lambda-dicke", version, about = "Mean-field phase diagrams and exact-diagonalization checks for two-mode lambda systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Parameter file (`key = value` lines)
    #[arg(long, global = true, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// Output file; the body goes to stdout when omitted
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Override a parameter-file key
    #[arg(long = "set", global = true, value_name = "K=V")]
    pub set: Vec<String>,
    /// Override a numerical tolerance
    #[arg(long = "tol", global = true, value_name = "NAME=VAL")]
    pub tol: Vec<String>,
    /// Seed for random model generation
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Also write a gnuplot script next to the output file
    #[arg(long, global = true)]
    pub gnuplot: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Mean-field ground state at one parameter point
    Minimize,
    /// Phase diagram on a (g1, g2) grid
    Scan {
        #[arg(long, default_value_t = 101)]
        n1: usize,
        #[arg(long, default_value_t = 101)]
        n2: usize,
        /// Grid extent in g1; defaults to 2 g1_trk
        #[arg(long)]
        g1_max: Option<f64>,
        /// Grid extent in g2; defaults to 2 g2_trk
        #[arg(long)]
        g2_max: Option<f64>,
        /// Search the boundary along g2 in each column instead of along g1 in each row
        #[arg(long)]
        columns: bool,
    },
    /// Boundary crossing along g1 at fixed g2
    Boundary {
        #[command(flatten)]
        g2: CouplingArg,
    },
    /// Point where the boundary changes from second to first order
    Tricritical {
        /// Lower end of the g2 bracket, in units of g2_trk
        #[arg(long, default_value_t = 0.3)]
        g2_lo: f64,
        /// Upper end of the g2 bracket, in units of g2_trk
        #[arg(long, default_value_t = 0.9)]
        g2_hi: f64,
        /// Width of the final g2 bracket, in units of g2_trk
        #[arg(long, default_value_t = 1e-3)]
        width: f64,
    },
    /// Critical couplings along fixed rays for a chi-kappa grid
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "0,0.4,0.8,1.2")]
        chi: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.6,1.2")]
        kappa: Vec<f64>,
        /// Any of g1, g2, diag
        #[arg(long, value_delimiter = ',', default_value = "g1,g2,diag")]
        rays: Vec<String>,
    },
    /// Abstract couplings of an atomic configuration
    MapAtomic,
    /// Normal-state stability of a multilevel single-mode model
    Nogo {
        /// Check this many seeded random sum-rule-compliant models instead of a file
        #[arg(long)]
        random: Option<usize>,
    },
    /// Finite-N exact diagonalization
    Ed {
        #[arg(long = "n")]
        n_atoms: usize,
        /// Fixed cutoffs; chosen adaptively when omitted
        #[arg(long)]
        cutoff1: Option<usize>,
        #[arg(long)]
        cutoff2: Option<usize>,
        /// Largest basis dimension allowed
        #[arg(long, default_value_t = lambda_dicke::edoracle::DEFAULT_DIM_CAP)]
        cap: usize,
    },
    /// Sum-rule identity on random Hermitian pairs
    Sumrule {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 12)]
        max_dim: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Minimize => "minimize",
            Command::Scan { .. } => "scan",
            Command::Boundary { .. } => "boundary",
            Command::Tricritical { .. } => "tricritical",
            Command::Sweep { .. } => "sweep",
            Command::MapAtomic => "map-atomic",
            Command::Nogo { .. } => "nogo",
            Command::Ed { .. } => "ed",
            Command::Sumrule { .. } => "sumrule",
        }
    }
}

#[derive(Debug, Clone, Copy, Args)]
#[group(required = true, multiple = false)]
pub struct CouplingArg {
    /// Fixed g2
    #[arg(long)]
    pub g2: Option<f64>,
    /// Fixed g2 in units of g2_trk
    #[arg(long)]
    pub g2_trk: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run::RunConfig::from_cli(cli).and_then(|cfg| run::run(&cfg)) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(run::exit_code(&e))
        }
    }
}
