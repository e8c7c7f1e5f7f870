//! `seriation` command-line tool.
//!
//! Failures print one line `error: <kind>: <message>` on stderr and exit with a
//! nonzero status. `validate` exits with status 2 when some assumption fails.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use seriation_core::harness::{ExperimentConfig, LearnTag, ParamChoice};
use seriation_core::postproc::{default_alpha_beta_grid, full_postprocess, learn_alpha_beta, SplitConfig};
use seriation_core::spectral::{spectral_seriation_detailed, LaplacianMatrix, DEFAULT_TOLERANCE};
use seriation_core::{
    check_assumptions, run_experiment, sample_graph, Algorithm, Graphon, GraphonConfig, GraphonSpec, Result,
    SampledGraph, SeriationError,
};

const ASSUMPTION_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "seriation", version, about = "Spectral seriation of graphon-sampled graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and print its edge list.
    Sample(SampleArgs),
    /// Read an edge list and print the estimated ordering as one line of ranks.
    Seriate(SeriateArgs),
    /// Check the regularity assumptions of a graphon on a grid.
    Validate(ValidateArgs),
    /// Run a seeded Monte Carlo experiment and write CSV tables.
    Experiment(ExperimentArgs),
    /// Search for (alpha, beta) passing the empirical mean-distance test on a graph.
    LearnParams(LearnArgs),
}

#[derive(Args)]
struct GraphonArgs {
    /// Inline graphon, e.g. `affine-distance:a=0.8,b=1` or `rbf:s=0.3`.
    #[arg(long, conflicts_with = "graphon_config")]
    graphon: Option<GraphonSpec>,
    /// TOML file with `family = "..."` and the family parameters.
    #[arg(long, value_name = "FILE")]
    graphon_config: Option<PathBuf>,
}

impl GraphonArgs {
    fn load(&self) -> Result<Graphon> {
        match (&self.graphon, &self.graphon_config) {
            (Some(spec), _) => Graphon::from_spec(spec),
            (None, Some(path)) => GraphonConfig::from_toml(&std::fs::read_to_string(path)?)?.build(),
            (None, None) => Err(SeriationError::Config("one of --graphon or --graphon-config is required".into())),
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    graphon: GraphonArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge wherever the model probability is at least 1/2, with no randomness.
    #[arg(long)]
    noiseless: bool,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriateAlgorithm {
    Spectral,
    Postprocessed,
}

#[derive(Args)]
struct SeriateArgs {
    /// Edge list file, or `-` for standard input.
    #[arg(long, short, default_value = "-")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "spectral")]
    algorithm: SeriateAlgorithm,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.31)]
    beta: f64,
    /// Seed for the random partitions of the post-processing step.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Write the graph Laplacian as a row-major text matrix, for cross-checking.
    #[arg(long, value_name = "FILE")]
    dump_laplacian: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    graphon: GraphonArgs,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.31)]
    beta: f64,
    #[arg(long, default_value_t = 1000)]
    resolution: usize,
    /// Also write the report as a one-row CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment file; the flags below override its fields.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    graphon: Option<GraphonSpec>,
    /// Comma-separated graph sizes, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    rho_exponent: Option<f64>,
    /// spectral, postprocessed or both.
    #[arg(long)]
    algorithm: Option<Algorithm>,
    #[arg(long, requires = "beta")]
    alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    beta: Option<f64>,
    /// Learn (alpha, beta) on every graph instead of fixing them.
    #[arg(long, conflicts_with_all = ["alpha", "beta"])]
    learn: bool,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    noiseless: bool,
    /// Run the algorithms on the graph as sampled instead of a relabelled copy.
    #[arg(long)]
    keep_labels: bool,
}

impl ExperimentArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_path(path)?,
            None => {
                let missing = |flag: &str| SeriationError::Config(format!("--{flag} is required without --config"));
                ExperimentConfig::new(
                    self.graphon.as_ref().ok_or_else(|| missing("graphon"))?.to_string(),
                    self.n_list.clone().ok_or_else(|| missing("n-list"))?,
                    self.algorithm.unwrap_or(Algorithm::Spectral),
                    self.seed.ok_or_else(|| missing("seed"))?,
                    self.output.clone().ok_or_else(|| missing("output"))?,
                )
            }
        };
        if let Some(g) = self.graphon {
            cfg.graphon = g.to_string();
        }
        if let Some(v) = self.n_list {
            cfg.n_list = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.rho_exponent {
            cfg.rho_exponent = v;
        }
        if let Some(v) = self.algorithm {
            cfg.algorithm = v;
        }
        if let (Some(a), Some(b)) = (self.alpha, self.beta) {
            cfg.params = ParamChoice::Fixed(SplitConfig::new(a, b)?);
        }
        if self.learn {
            cfg.params = ParamChoice::Learn(LearnTag::Learn);
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.output {
            cfg.output = v;
        }
        if let Some(v) = self.threads {
            cfg.threads = v;
        }
        cfg.noiseless |= self.noiseless;
        cfg.shuffle_labels &= !self.keep_labels;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long, short, default_value = "-")]
    input: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_graph(path: &Path) -> Result<SampledGraph> {
    if path == Path::new("-") {
        let mut text = String::new();
        io::stdin().lock().read_to_string(&mut text)?;
        SampledGraph::from_edge_list(&text)
    } else {
        let reader: Box<dyn BufRead> = Box::new(BufReader::new(File::open(path)?));
        SampledGraph::read_edge_list(reader)
    }
}

fn sample(args: SampleArgs) -> Result<ExitCode> {
    let graphon = args.graphon.load()?;
    let g = if args.noiseless {
        SampledGraph::noiseless(&graphon, args.n)?
    } else {
        sample_graph(&graphon, args.n, args.rho, args.seed)?
    };
    let mut out = open_output(&args.output)?;
    g.write_edge_list(&mut out)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn seriate(args: SeriateArgs) -> Result<ExitCode> {
    let g = read_graph(&args.input)?;
    if let Some(path) = &args.dump_laplacian {
        std::fs::write(path, LaplacianMatrix::from_graph(&g).to_text())?;
    }
    let sigma = match args.algorithm {
        SeriateAlgorithm::Spectral => {
            let (sigma, res) = spectral_seriation_detailed(&g, args.tolerance)?;
            if res.degenerate {
                log::warn!("Fiedler eigenvalue is not simple; the ordering is only guaranteed to be a bijection");
            }
            sigma
        }
        SeriateAlgorithm::Postprocessed => {
            full_postprocess(&g, SplitConfig::new(args.alpha, args.beta)?, args.seed, args.tolerance)?
        }
    };
    let mut out = open_output(&args.output)?;
    writeln!(out, "{}", sigma.to_line())?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn validate(args: ValidateArgs) -> Result<ExitCode> {
    let graphon = args.graphon.load()?;
    let report = check_assumptions(&graphon, SplitConfig::new(args.alpha, args.beta)?, args.resolution)?;
    print!("{}", report.to_text());
    if let Some(path) = &args.csv {
        report.write_csv(File::create(path)?)?;
    }
    if report.all_ok() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: assumption failure: {}", report.failures().join(","));
        Ok(ExitCode::from(ASSUMPTION_FAILURE))
    }
}

fn experiment(args: ExperimentArgs) -> Result<ExitCode> {
    let cfg = args.into_config()?;
    let outcome = run_experiment(&cfg)?;
    let failed = outcome.records.iter().filter(|r| !r.is_ok()).count();
    log::info!("{} records written to {}, {failed} failed", outcome.records.len(), cfg.output.display());
    Ok(ExitCode::SUCCESS)
}

fn learn_params(args: LearnArgs) -> Result<ExitCode> {
    let g = read_graph(&args.input)?;
    match learn_alpha_beta(&g, &default_alpha_beta_grid(), args.delta, args.seed, args.tolerance)? {
        Some(cfg) => println!("alpha = {}\nbeta = {}", cfg.alpha(), cfg.beta()),
        None => println!("none"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => sample(a),
        Command::Seriate(a) => seriate(a),
        Command::Validate(a) => validate(a),
        Command::Experiment(a) => experiment(a),
        Command::LearnParams(a) => learn_params(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}: {e}", e.kind());
            ExitCode::FAILURE
        }
    }
}
