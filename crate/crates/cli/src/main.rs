use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use annealkit::anneal::{AnnealSchedule, Engine, SaParams, SqaParams};
use annealkit::bench::{
    gauge_average, generate_instance, makespan_binary_search, run_pipeline, EmbedMethod, GenParams, RunConfig,
    RunReport, INSTANCE_KINDS,
};
use annealkit::chimera::{
    clique_embedding, embed_ising, find_embedding_with_retries, suggest_chain_strength, unembed, ChainBreakStrategy,
    Embedding, HardwareSpec, DEFAULT_CHAIN_ALPHA, DEFAULT_EMBED_RETRIES,
};
use annealkit::ising::{reduce_degree, reduce_degree_auto, AncillaMap, IsingModel, QuboModel};
use annealkit::mappers::{Instance, VarMap};
use annealkit::parallel::{derive_seed, with_workers, WORKERS_ENV};
use annealkit::{Error, ErrorKind, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

const EXIT_IO: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_EMBEDDING: u8 = 3;
const EXIT_CAPACITY: u8 = 4;
const EXIT_SOLVER: u8 = 5;

/// Map combinatorial problems to Ising form, embed them on Chimera
/// hardware graphs and sample them with annealing engines.
#[derive(Parser)]
#[command(name = "annealkit", version, after_help = EXIT_HELP)]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

const EXIT_HELP: &str = "Exit codes: 0 success, 1 I/O error, 2 invalid input or usage, \
3 embedding failure, 4 capacity exceeded, 5 solver failure.";

#[derive(Subcommand)]
enum Command {
    /// Generate a problem instance.
    Generate(GenerateArgs),
    /// Compile an instance to QUBO and Ising form.
    Map(MapArgs),
    /// Minor-embed an Ising model on a Chimera graph.
    Embed(EmbedArgs),
    /// Sample an Ising model, optionally through an embedding.
    Solve(SolveArgs),
    /// Run the full map, embed, solve and decode pipeline.
    Pipeline(PipelineArgs),
    /// Summarize run reports as CSV or a JSON array.
    Report(ReportArgs),
    /// Find the smallest feasible horizon of a scheduling instance.
    Makespan(MakespanArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Instance family.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(INSTANCE_KINDS))]
    kind: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vertices, spins or state variables, depending on the family.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    colors: Option<usize>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    machines: Option<usize>,
    #[arg(long)]
    slots: Option<usize>,
    #[arg(long)]
    branching: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    faults: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MapArgs {
    /// Instance JSON file.
    instance: PathBuf,
    /// Degree-reduction penalty; defaults to the safe bound.
    #[arg(long)]
    reduction_penalty: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct HardwareArgs {
    /// Chimera grid size n (8n^2 qubits).
    #[arg(long)]
    grid: Option<usize>,
    /// Comma-separated broken qubit ids.
    #[arg(long, value_delimiter = ',')]
    broken: Vec<usize>,
}

impl HardwareArgs {
    fn spec(&self) -> Option<HardwareSpec> {
        self.grid.map(|n| HardwareSpec::Chimera {
            n,
            broken: self.broken.clone(),
        })
    }
}

#[derive(Args)]
struct EmbedArgs {
    /// Ising model JSON, or the output of `map`.
    model: PathBuf,
    #[command(flatten)]
    hardware: HardwareArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Heuristic)]
    method: MethodArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_EMBED_RETRIES)]
    retries: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Heuristic,
    Clique,
    Native,
}

impl From<MethodArg> for EmbedMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Heuristic => EmbedMethod::Heuristic,
            MethodArg::Clique => EmbedMethod::Clique,
            MethodArg::Native => EmbedMethod::Native,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineKind {
    Sa,
    Sqa,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChainBreakArg {
    Majority,
    Discard,
}

impl From<ChainBreakArg> for ChainBreakStrategy {
    fn from(c: ChainBreakArg) -> Self {
        match c {
            ChainBreakArg::Majority => ChainBreakStrategy::Majority,
            ChainBreakArg::Discard => ChainBreakStrategy::Discard,
        }
    }
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, value_enum)]
    engine: Option<EngineKind>,
    #[arg(long)]
    reads: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    /// Initial (hot) inverse temperature for SA.
    #[arg(long, requires = "beta_cold")]
    beta_hot: Option<f64>,
    /// Final (cold) inverse temperature for SA.
    #[arg(long, requires = "beta_hot")]
    beta_cold: Option<f64>,
    /// Trotter slices for SQA.
    #[arg(long)]
    slices: Option<usize>,
    /// Simulation temperature for SQA.
    #[arg(long)]
    temperature: Option<f64>,
    /// CSV anneal schedule (columns s, A, B) for SQA.
    #[arg(long)]
    schedule: Option<PathBuf>,
}

impl EngineArgs {
    /// Applies the flags on top of `base`, switching engine when asked.
    fn apply(&self, base: Engine) -> Result<Engine> {
        let mut engine = match (self.engine, base) {
            (Some(EngineKind::Sa), e @ Engine::Sa(_)) | (Some(EngineKind::Sqa), e @ Engine::Sqa(_)) | (None, e) => e,
            (Some(EngineKind::Sa), _) => Engine::Sa(SaParams::default()),
            (Some(EngineKind::Sqa), _) => Engine::Sqa(SqaParams::default()),
        };
        match &mut engine {
            Engine::Sa(p) => {
                if let Some(v) = self.reads {
                    p.num_reads = v;
                }
                if let Some(v) = self.sweeps {
                    p.sweeps = v;
                }
                if let (Some(hot), Some(cold)) = (self.beta_hot, self.beta_cold) {
                    p.beta_range = Some((hot, cold));
                }
                if self.slices.is_some() || self.temperature.is_some() || self.schedule.is_some() {
                    return Err(Error::input(
                        "--slices, --temperature and --schedule apply to the sqa engine",
                    ));
                }
            }
            Engine::Sqa(p) => {
                if let Some(v) = self.reads {
                    p.num_reads = v;
                }
                if let Some(v) = self.sweeps {
                    p.sweeps = v;
                }
                if let Some(v) = self.slices {
                    p.trotter_slices = v;
                }
                if let Some(v) = self.temperature {
                    p.temperature = v;
                }
                if let Some(path) = &self.schedule {
                    p.schedule = AnnealSchedule::from_csv(open(path)?)?;
                }
                if self.beta_hot.is_some() {
                    return Err(Error::input("--beta-hot and --beta-cold apply to the sa engine"));
                }
            }
        }
        Ok(engine)
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Ising model JSON, or the output of `map`.
    model: PathBuf,
    /// Embedding JSON; the physical model is sampled and unembedded.
    #[arg(long)]
    embedding: Option<PathBuf>,
    /// Chain coupling J_F (negative); defaults to -alpha * max |coefficient|.
    #[arg(long, allow_negative_numbers = true)]
    chain_strength: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_CHAIN_ALPHA)]
    chain_alpha: f64,
    #[arg(long, value_enum, default_value_t = ChainBreakArg::Majority)]
    chain_break: ChainBreakArg,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value_t = 1)]
    gauges: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Instance JSON file.
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    instance: Option<PathBuf>,
    /// RunConfig JSON file; the flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    gauges: Option<usize>,
    #[arg(long)]
    reduction_penalty: Option<f64>,
    #[command(flatten)]
    hardware: HardwareArgs,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    chain_alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    chain_strength: Option<f64>,
    #[arg(long)]
    retries: Option<usize>,
    #[arg(long, value_enum)]
    chain_break: Option<ChainBreakArg>,
    #[command(flatten)]
    engine: EngineArgs,
    /// Largest logical model solved exhaustively for reference.
    #[arg(long)]
    oracle_cap: Option<usize>,
    /// Directory receiving intermediate artifacts.
    #[arg(long)]
    persist_dir: Option<PathBuf>,
    /// Include wall-clock timings (makes reports non-reproducible).
    #[arg(long)]
    timing: bool,
    /// Also write a one-row CSV summary here.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Report JSON files written by `pipeline`.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    format: ReportFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct MakespanArgs {
    /// Scheduling instance JSON; its slot count is ignored.
    instance: PathBuf,
    /// Largest horizon to consider.
    #[arg(long)]
    t_max: usize,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Output of `map`: everything needed to solve the model and decode
/// samples in a later process.
#[derive(Serialize, Deserialize)]
struct Mapped {
    kind: String,
    var_map: VarMap,
    /// Original variable of each compact model variable.
    kept: Vec<usize>,
    ancillas: AncillaMap,
    reduction_penalty: Option<f64>,
    qubo: QuboModel<f64>,
    ising: IsingModel<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ModelFile {
    Mapped(Box<Mapped>),
    Ising(IsingModel<f64>),
}

#[derive(Serialize)]
struct MakespanOutput {
    makespan: usize,
    probes: Vec<(usize, bool)>,
    note: &'static str,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text)?;
    serde_json::from_str(&text).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn read_model(path: &Path) -> Result<IsingModel<f64>> {
    let model = match read_json::<ModelFile>(path)? {
        ModelFile::Mapped(m) => m.ising,
        ModelFile::Ising(m) => m,
    };
    model.validate()?;
    Ok(model)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let params = GenParams {
        n: a.n,
        colors: a.colors,
        density: a.density,
        horizon: a.horizon,
        jobs: a.jobs,
        machines: a.machines,
        slots: a.slots,
        branching: a.branching,
        depth: a.depth,
        faults: a.faults,
        grid: a.grid,
    };
    let inst = generate_instance(&a.kind, &params, a.seed)?;
    write_output(a.output.as_deref(), &to_json(&inst)?)
}

fn map(a: &MapArgs) -> Result<()> {
    let inst: Instance = read_json(&a.instance)?;
    let compiled = inst.compile::<f64>()?;
    let (objective, kept) = compiled.objective.compact();
    let red = match a.reduction_penalty {
        Some(w) => reduce_degree(&objective, w)?,
        None => reduce_degree_auto(&objective)?,
    };
    let mapped = Mapped {
        kind: inst.kind().to_string(),
        var_map: compiled.var_map,
        kept,
        reduction_penalty: (!red.ancillas.ancillas.is_empty()).then_some(red.penalty),
        ising: red.qubo.to_ising(),
        qubo: red.qubo,
        ancillas: red.ancillas,
    };
    write_output(a.output.as_deref(), &to_json(&mapped)?)
}

fn embed(a: &EmbedArgs) -> Result<()> {
    let model = read_model(&a.model)?;
    let spec = a.hardware.spec().ok_or_else(|| Error::input("--grid is required"))?;
    let hw = spec.build()?;
    let edges = model.interaction_edges();
    let n = model.num_vars();
    let emb = match EmbedMethod::from(a.method) {
        EmbedMethod::Heuristic => find_embedding_with_retries(n, &edges, &hw, a.seed, a.retries)?,
        EmbedMethod::Clique => clique_embedding(n, &hw)?,
        EmbedMethod::Native => {
            let emb = Embedding {
                chains: (0..n).map(|q| vec![q]).collect(),
                hardware: hw.spec(),
            };
            emb.validate(&hw, &edges)?;
            emb
        }
    };
    write_output(a.output.as_deref(), &to_json(&emb)?)
}

fn solve(a: &SolveArgs) -> Result<()> {
    let model = read_model(&a.model)?;
    let engine = a
        .engine
        .apply(Engine::default())?
        .with_seed(derive_seed(a.seed, "engine", 0));
    let gauge_seed = derive_seed(a.seed, "gauges", 0);
    let samples = match &a.embedding {
        None => gauge_average(&model, &engine, a.gauges, gauge_seed)?,
        Some(path) => {
            let emb: Embedding = read_json(path)?;
            let hw = emb.hardware.build()?;
            let strength = match a.chain_strength {
                Some(j) => j,
                None => suggest_chain_strength(&model, a.chain_alpha)?,
            };
            let embedded = embed_ising(&model, &emb, &hw, strength)?;
            let physical = gauge_average(&embedded.physical, &engine, a.gauges, gauge_seed)?;
            let out = unembed(
                &physical,
                &embedded,
                a.chain_break.into(),
                derive_seed(a.seed, "unembed", 0),
            )?;
            eprintln!(
                "chain-break fraction {:.4} ({} of {} reads)",
                out.chain_break_fraction(),
                out.broken_reads,
                out.total_reads
            );
            out.samples
        }
    };
    write_output(a.output.as_deref(), &to_json(&samples)?)
}

fn pipeline(a: &PipelineArgs) -> Result<()> {
    let mut cfg = match (&a.config, &a.instance) {
        (Some(path), _) => read_json::<RunConfig>(path)?,
        (None, Some(path)) => RunConfig::new(read_json(path)?),
        (None, None) => return Err(Error::input("either --instance or --config is required")),
    };
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.gauges {
        cfg.num_gauges = v;
    }
    if a.reduction_penalty.is_some() {
        cfg.reduction_penalty = a.reduction_penalty;
    }
    if let Some(spec) = a.hardware.spec() {
        cfg.embed.hardware = Some(spec);
    }
    if let Some(m) = a.method {
        cfg.embed.method = m.into();
    }
    if let Some(v) = a.chain_alpha {
        cfg.embed.chain_alpha = v;
    }
    if a.chain_strength.is_some() {
        cfg.embed.chain_strength = a.chain_strength;
    }
    if let Some(v) = a.retries {
        cfg.embed.retries = v;
    }
    if let Some(c) = a.chain_break {
        cfg.embed.chain_break = c.into();
    }
    cfg.engine = a.engine.apply(cfg.engine)?;
    if let Some(v) = a.oracle_cap {
        cfg.oracle_cap = v;
    }
    if a.persist_dir.is_some() {
        cfg.persist_dir = a.persist_dir.clone();
    }
    cfg.timing |= a.timing;
    let report = run_pipeline(&cfg)?;
    if let Some(path) = &a.csv {
        std::fs::write(path, RunReport::to_csv(std::slice::from_ref(&report))?)?;
    }
    write_output(a.output.as_deref(), &report.to_json()?)
}

fn report(a: &ReportArgs) -> Result<()> {
    let reports: Vec<RunReport> = a.reports.iter().map(|p| read_json(p)).collect::<Result<_>>()?;
    let text = match a.format {
        ReportFormat::Csv => RunReport::to_csv(&reports)?,
        ReportFormat::Json => to_json(&reports)?,
    };
    write_output(a.output.as_deref(), &text)
}

fn makespan(a: &MakespanArgs) -> Result<()> {
    let Instance::Scheduling(inst) = read_json(&a.instance)? else {
        return Err(Error::input("makespan needs a scheduling instance"));
    };
    let engine = a.engine.apply(Engine::default())?.with_seed(a.seed);
    let result = makespan_binary_search(&inst, &engine, a.t_max)?;
    let out = MakespanOutput {
        makespan: result.makespan,
        probes: result.probes,
        note: "upper bound: a sampler may miss feasible schedules at smaller horizons",
    };
    write_output(a.output.as_deref(), &to_json(&out)?)
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Io => EXIT_IO,
        ErrorKind::Input => EXIT_INPUT,
        ErrorKind::Embedding => EXIT_EMBEDDING,
        ErrorKind::Capacity => EXIT_CAPACITY,
        ErrorKind::Solver => EXIT_SOLVER,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli
        .workers
        .filter(|&w| w > 0)
        .unwrap_or_else(annealkit::parallel::configured_workers);
    let result = with_workers(workers, || match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Map(a) => map(a),
        Command::Embed(a) => embed(a),
        Command::Solve(a) => solve(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Report(a) => report(a),
        Command::Makespan(a) => makespan(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
