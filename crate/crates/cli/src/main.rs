mod analysis;
mod output;
mod range;
mod run;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use irkwave::problems::reproduce::Tolerances;

use output::Output;

#[derive(Parser)]
#[command(
    name = "irkwavelab",
    version,
    about = "Derive, analyze and benchmark low-dispersion implicit Runge-Kutta schemes"
)]
struct Cli {
    /// Write results into this directory (with a manifest.json) instead of stdout.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Worker threads for parallel runs (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Tolerance profile for table comparisons.
    #[arg(long, global = true, value_enum, default_value_t = TolProfile::Paper)]
    tol_profile: TolProfile,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TolProfile {
    Paper,
    Strict,
}

impl TolProfile {
    fn tolerances(self) -> Tolerances {
        match self {
            TolProfile::Paper => Tolerances::PAPER,
            TolProfile::Strict => Tolerances::STRICT,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Scheme catalog.
    Schemes {
        #[command(subcommand)]
        action: SchemesAction,
    },
    /// Phase and amplitude error curve plus accuracy report for a scheme.
    Analyze {
        /// Registry name or path to a tableau JSON file.
        scheme: String,
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Minimize the weighted phase error and solve for a coefficient set.
    Optimize {
        /// Stage count of the reduced family (2 or 3).
        #[arg(long)]
        family: usize,
        /// Weight exponent, a non-negative number or `inf`.
        #[arg(long)]
        alpha: String,
        /// Closure equations file.
        #[arg(long)]
        closures: PathBuf,
        /// Registry scheme whose coefficients break ties between roots.
        #[arg(long)]
        reference: Option<String>,
        /// Name given to the derived tableau.
        #[arg(long, default_value = "derived")]
        name: String,
    },
    /// Phase and group velocity map of a fully discrete scheme.
    Map {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        operator: String,
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        #[arg(long, default_value = "closed")]
        boundary: String,
        /// `mid` or a node index.
        #[arg(long, default_value = "mid")]
        probe: String,
        /// N_c samples as a:b:n.
        #[arg(long)]
        nc: String,
        /// kh samples as a:b:n.
        #[arg(long)]
        kh: String,
    },
    /// Run one benchmark problem from a JSON configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-run benchmark tables and compare with the published values.
    Verify {
        /// Table number, 9 to 14.
        #[arg(long, conflicts_with = "all", required_unless_present_any = ["all", "burgers"])]
        table: Option<u32>,
        /// Every table plus the Burgers shock checks.
        #[arg(long)]
        all: bool,
        /// Burgers shock checks.
        #[arg(long)]
        burgers: bool,
        /// Side of the square domain for the 2D problem.
        #[arg(long, default_value_t = 20.0)]
        plane_side: f64,
    },
}

#[derive(Subcommand)]
enum SchemesAction {
    /// Every registry name with its order, dispersive order and dispersion norm.
    List,
    /// Tableau JSON of one scheme.
    Show { name: String },
}

/// Failure carrying the process exit code: 2 for bad input, 1 for runtime failures.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self { code: 2, msg: msg.into() }
    }
}

impl From<irkwave::Error> for Failure {
    fn from(e: irkwave::Error) -> Self {
        use irkwave::Error as E;
        let code = match e {
            E::UnknownScheme(_) | E::Parse { .. } | E::Config(_) | E::Json(_) => 2,
            _ => 1,
        };
        Self { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: 1, msg: e.to_string() }
    }
}

pub type CmdResult = Result<(), Failure>;

fn dispatch(cli: Cli, out: &mut Output) -> CmdResult {
    match cli.command {
        Command::Schemes { action: SchemesAction::List } => analysis::schemes_list(out),
        Command::Schemes { action: SchemesAction::Show { name } } => analysis::schemes_show(out, &name),
        Command::Analyze { scheme, samples } => analysis::analyze(out, &scheme, samples),
        Command::Optimize { family, alpha, closures, reference, name } => {
            analysis::optimize(out, family, &alpha, &closures, reference.as_deref(), &name)
        }
        Command::Map { scheme, operator, nodes, h, boundary, probe, nc, kh } => {
            analysis::map(out, &analysis::MapArgs { scheme, operator, nodes, h, boundary, probe, nc, kh })
        }
        Command::Run { config } => run::run(out, &config),
        Command::Verify { table, all, burgers, plane_side } => {
            let tables: Vec<u32> = match (table, all) {
                (Some(t), _) => vec![t],
                (None, true) => (9..=14).collect(),
                (None, false) => Vec::new(),
            };
            verify::verify(out, &tables, all || burgers, plane_side, &cli.tol_profile.tolerances())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().expect("thread pool set once");
    }
    let mut out = match Output::new(cli.output_dir.clone()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = dispatch(cli, &mut out);
    let checks_ok = out.all_passed();
    let finish = out.finish();
    match (result, finish) {
        (Err(f), _) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
        (Ok(()), Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        (Ok(()), Ok(_)) if !checks_ok => ExitCode::from(1),
        (Ok(()), Ok(_)) => ExitCode::SUCCESS,
    }
}
