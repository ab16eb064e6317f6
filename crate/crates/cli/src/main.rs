use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use divclust::generate::{generate, GenKind, GenParams};
use divclust::io::Format;
use divclust::{CopyMode, CoresetMode, GridMode, LeaderSpace, Objective, Selection, ThresholdSearch};
use divclust_cli::{exit_code, run, Algorithm, Config};

#[derive(Parser)]
#[command(name = "divclust", version, about = "Diversity-aware and fair clustering solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print a key=value report.
    Run(RunArgs),
    /// Write a generated instance as JSON.
    Generate(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    CsvPoints,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Median,
    Means,
    Supplier,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Median => Objective::Median,
            ObjectiveArg::Means => Objective::Means,
            ObjectiveArg::Supplier => Objective::Supplier,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    FptSubmodular,
    FptWarmup,
    SupplierMatching,
    Fair,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    Auto,
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Geometric,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum FairModeArg {
    ZeroCopy,
    PaperEpsilon,
}

#[derive(Clone, Copy, ValueEnum)]
enum InnerArg {
    LazyGreedy,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum LeadersArg {
    Anchored,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchArg {
    Binary,
    Linear,
    Checked,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Overrides the objective stored in the instance.
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    #[arg(long, value_enum, default_value = "fpt-submodular")]
    algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    /// Also run the exhaustive oracle and report cost/OPT.
    #[arg(long)]
    exact: bool,
    #[arg(long, value_enum, default_value = "auto")]
    coreset: Toggle,
    #[arg(long, value_enum, default_value = "geometric")]
    grid: GridArg,
    #[arg(long, value_enum, default_value = "zero-copy")]
    fair_mode: FairModeArg,
    /// Inner transversal maximization for fpt-submodular.
    #[arg(long, value_enum, default_value = "lazy-greedy")]
    inner: InnerArg,
    #[arg(long, value_enum, default_value = "anchored")]
    leaders: LeadersArg,
    /// Threshold search for the supplier objective.
    #[arg(long, value_enum, default_value = "binary")]
    search: SearchArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    EuclideanRandom,
    PlantedGroups,
    VertexCoverHard,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    clients: Option<usize>,
    #[arg(long)]
    facilities: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    groups: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    group_prob: Option<f64>,
    #[arg(long)]
    vertices: Option<usize>,
    #[arg(long)]
    edge_prob: Option<f64>,
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config(a: &RunArgs) -> Config {
    let mut cfg = Config::new(a.instance.clone());
    cfg.format = match a.format {
        FormatArg::Json => Format::Json,
        FormatArg::CsvPoints => Format::CsvPoints,
    };
    cfg.objective = a.objective.map(Into::into);
    cfg.algorithm = match a.algorithm {
        AlgorithmArg::FptSubmodular => Algorithm::FptSubmodular,
        AlgorithmArg::FptWarmup => Algorithm::FptWarmup,
        AlgorithmArg::SupplierMatching => Algorithm::SupplierMatching,
        AlgorithmArg::Fair => Algorithm::Fair,
        AlgorithmArg::Exact => Algorithm::Exact,
    };
    cfg.epsilon = a.epsilon;
    cfg.exact = a.exact;
    cfg.coreset = match a.coreset {
        Toggle::Auto => CoresetMode::Auto,
        Toggle::On => CoresetMode::On,
        Toggle::Off => CoresetMode::Off,
    };
    cfg.grid = match a.grid {
        GridArg::Geometric => GridMode::Geometric,
        GridArg::Exact => GridMode::Exact,
    };
    cfg.fair_mode = match a.fair_mode {
        FairModeArg::ZeroCopy => CopyMode::ZeroCopy,
        FairModeArg::PaperEpsilon => CopyMode::PaperEpsilon,
    };
    cfg.inner = match a.inner {
        InnerArg::LazyGreedy => Selection::LazyGreedy,
        InnerArg::Exhaustive => Selection::Exhaustive,
    };
    cfg.leaders = match a.leaders {
        LeadersArg::Anchored => LeaderSpace::Anchored,
        LeadersArg::All => LeaderSpace::All,
    };
    cfg.threshold = match a.search {
        SearchArg::Binary => ThresholdSearch::Binary,
        SearchArg::Linear => ThresholdSearch::Linear,
        SearchArg::Checked => ThresholdSearch::Checked,
    };
    cfg.seed = a.seed;
    if let Some(t) = a.threads {
        cfg.threads = t.max(1);
    }
    cfg
}

fn emit(out: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run_command(a: RunArgs) -> anyhow::Result<ExitCode> {
    let (report, code) = match run(&config(&a)) {
        Ok(r) => (r, 0),
        Err((r, e)) => {
            eprintln!("error: {e}");
            (r, exit_code(&e))
        }
    };
    emit(a.out.as_ref(), &report.render())?;
    Ok(ExitCode::from(code as u8))
}

fn generate_command(a: GenArgs) -> anyhow::Result<ExitCode> {
    let d = GenParams::default();
    let params = GenParams {
        clients: a.clients.unwrap_or(d.clients),
        facilities: a.facilities.unwrap_or(d.facilities),
        dim: a.dim.unwrap_or(d.dim),
        groups: a.groups.unwrap_or(d.groups),
        k: a.k.unwrap_or(d.k),
        group_prob: a.group_prob.unwrap_or(d.group_prob),
        vertices: a.vertices.unwrap_or(d.vertices),
        edge_prob: a.edge_prob.unwrap_or(d.edge_prob),
        objective: a.objective.map_or(d.objective, Into::into),
    };
    let kind = match a.kind {
        KindArg::EuclideanRandom => GenKind::EuclideanRandom,
        KindArg::PlantedGroups => GenKind::PlantedGroups,
        KindArg::VertexCoverHard => GenKind::VertexCoverHard,
    };
    let file = generate(kind, &params, a.seed)?;
    emit(a.out.as_ref(), &(file.to_json() + "\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run_command(a),
        Command::Generate(a) => generate_command(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
