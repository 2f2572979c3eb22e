//! `symdyn`: run one experiment and write its report.
//!
//! The experiment comes from `--spec FILE` (JSON), from flags, or both; flags
//! override the file. Exit status is 0 when every assertion passes, 1 when
//! some fail and 2 on errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use symdyn::groups::ChainSpec;
use symdyn::harness::{emit, parse_spec, run, ExperimentSpec, Format, Kind, Metric, Q, Suite, ToeplitzAction};
use symdyn::rational::parse_rational;

#[derive(Parser)]
#[command(name = "symdyn", version, about = "Exact symbolic dynamics experiments on Z^d subgroup chains")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON experiment file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Chain as JSON, e.g. '{"rank": 1, "scales": [2, 4, 8]}'.
    #[arg(long, global = true)]
    chain: Option<String>,
    /// Rank d of Z^d (used with --scales).
    #[arg(long, global = true)]
    rank: Option<usize>,
    /// Comma-separated chain moduli q_1, q_2, ...
    #[arg(long, global = true, value_delimiter = ',')]
    scales: Option<Vec<i64>>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Window radius for scans that cannot be done exactly.
    #[arg(long, global = true)]
    window: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Configuration descriptor as JSON; repeat for several.
    #[arg(long = "config", global = true)]
    configs: Vec<String>,
    /// Følner level.
    #[arg(long, global = true)]
    level: Option<usize>,
    /// Record wall time in the report.
    #[arg(long, global = true)]
    wall_time: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Dstar,
    Weyl,
    Besicovitch,
    Dwprime,
}

#[derive(Clone, Copy, ValueEnum)]
enum ActionArg {
    Verify,
    Profile,
    Approx,
}

#[derive(Subcommand)]
enum Command {
    /// Banach density of a set derived from the configurations.
    Density {
        /// Set descriptor as JSON, e.g. '{"cosets": {"level": 1, "reps": [0]}}'.
        #[arg(long)]
        set: Option<String>,
    },
    /// Distance between the first two configurations.
    Distance {
        #[arg(long, value_enum)]
        metric: Option<MetricArg>,
    },
    /// Pattern-counting entropy estimates.
    Entropy,
    /// Empirical measures along nested boxes.
    Omega {
        /// Box growth as JSON, e.g. '{"growth": "linear", "count": 50}'.
        #[arg(long)]
        boxes: Option<String>,
    },
    /// The Toeplitz path t -> Ψ(t) on a grid.
    Path {
        /// Comma-separated rationals, e.g. 0,1/4,1/2.
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<String>>,
        /// Use the unclamped quota rule.
        #[arg(long)]
        literal_quota: bool,
    },
    /// Positive-entropy Toeplitz construction.
    Krieger {
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        alphabet_size: Option<usize>,
        #[arg(long)]
        stages: Option<usize>,
        #[arg(long)]
        first_level: Option<usize>,
    },
    /// Skeleton check, regularity profile or periodic approximations.
    Toeplitz {
        #[arg(value_enum)]
        action: Option<ActionArg>,
        #[arg(long)]
        tolerance: Option<String>,
    },
    /// Bundled property suites.
    Verify {
        /// One suite name, or `all`.
        #[arg(long)]
        suite: Option<String>,
    },
}

impl Command {
    fn kind(&self) -> Kind {
        match self {
            Command::Density { .. } => Kind::Density,
            Command::Distance { .. } => Kind::Distance,
            Command::Entropy => Kind::Entropy,
            Command::Omega { .. } => Kind::Omega,
            Command::Path { .. } => Kind::Path,
            Command::Krieger { .. } => Kind::Krieger,
            Command::Toeplitz { .. } => Kind::Toeplitz,
            Command::Verify { .. } => Kind::Verify,
        }
    }
}

fn json<T: serde::de::DeserializeOwned>(flag: &str, text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("--{flag}: {e}"))
}

fn rational(flag: &str, text: &str) -> Result<Q, String> {
    parse_rational(text).map(Q).map_err(|e| format!("--{flag}: {e}"))
}

fn build_spec(cli: &Cli) -> Result<ExperimentSpec, String> {
    let kind = cli.command.kind();
    let mut spec = match &cli.global.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_spec(&text).map_err(|e| e.to_string())?
        }
        None => ExperimentSpec::new(kind),
    };
    if spec.kind != kind {
        return Err(format!("spec file describes `{}` but the subcommand is `{}`", spec.kind.as_str(), kind.as_str()));
    }

    let g = &cli.global;
    if let Some(text) = &g.chain {
        spec.chain = Some(json("chain", text)?);
    }
    if g.rank.is_some() || g.scales.is_some() {
        let current = spec.chain.clone();
        let rank = g.rank.or(current.as_ref().map(|c| c.rank)).unwrap_or(1);
        let scales = match (&g.scales, current) {
            (Some(s), _) => s.clone(),
            (None, Some(c)) => c.scales,
            (None, None) => return Err("--rank needs --scales".into()),
        };
        spec.chain = Some(ChainSpec { rank, scales });
    }
    if g.depth.is_some() {
        spec.depth = g.depth;
    }
    if g.window.is_some() {
        spec.window = g.window;
    }
    if g.seed.is_some() {
        spec.seed = g.seed;
    }
    if g.level.is_some() {
        spec.level = g.level;
    }
    if !g.configs.is_empty() {
        spec.configs = g.configs.iter().map(|c| json("config", c)).collect::<Result<_, _>>()?;
    }
    spec.wall_time |= g.wall_time;

    match &cli.command {
        Command::Density { set } => {
            if let Some(text) = set {
                spec.set = Some(json("set", text)?);
            }
        }
        Command::Distance { metric } => {
            if let Some(m) = metric {
                spec.metric = Some(match m {
                    MetricArg::Dstar => Metric::Dstar,
                    MetricArg::Weyl => Metric::Weyl,
                    MetricArg::Besicovitch => Metric::Besicovitch,
                    MetricArg::Dwprime => Metric::Dwprime,
                });
            }
        }
        Command::Entropy => {}
        Command::Omega { boxes } => {
            if let Some(text) = boxes {
                spec.boxes = Some(json("boxes", text)?);
            }
        }
        Command::Path { t_grid, literal_quota } => {
            if let Some(grid) = t_grid {
                spec.t_grid = Some(grid.iter().map(|t| rational("t-grid", t)).collect::<Result<_, _>>()?);
            }
            if *literal_quota {
                spec.literal_quota = Some(true);
            }
        }
        Command::Krieger { gamma, alphabet_size, stages, first_level } => {
            if let Some(text) = gamma {
                spec.gamma = Some(rational("gamma", text)?);
            }
            spec.alphabet_size = alphabet_size.or(spec.alphabet_size);
            spec.stages = stages.or(spec.stages);
            spec.first_level = first_level.or(spec.first_level);
        }
        Command::Toeplitz { action, tolerance } => {
            if let Some(a) = action {
                spec.action = Some(match a {
                    ActionArg::Verify => ToeplitzAction::Verify,
                    ActionArg::Profile => ToeplitzAction::Profile,
                    ActionArg::Approx => ToeplitzAction::Approx,
                });
            }
            if let Some(text) = tolerance {
                spec.tolerance = Some(rational("tolerance", text)?);
            }
        }
        Command::Verify { suite } => {
            if let Some(name) = suite {
                spec.suite = Some(name.parse::<Suite>().map_err(|e| e.to_string())?);
            }
        }
    }

    let output = spec.output.get_or_insert_with(Default::default);
    if let Some(f) = g.format {
        output.format = match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
    }
    if let Some(path) = &g.out {
        output.path = Some(path.display().to_string());
    }
    Ok(spec)
}

fn execute(cli: &Cli) -> Result<bool, String> {
    let spec = build_spec(cli)?;
    let report = run(&spec).map_err(|e| e.to_string())?;
    let output = spec.output.clone().unwrap_or_default();
    let bytes = emit(&report, output.format);
    match &output.path {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("{path}: {e}"))?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(|e| e.to_string())?;
        }
    }
    for failure in report.failures() {
        eprintln!("assertion failed: {} ({} {} {})", failure.name, failure.lhs, failure.relation, failure.rhs);
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
