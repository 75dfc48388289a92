//! `vass-asym`: batch front end for the analysis, simulation and gadget tools.
//!
//! Exit codes: 0 success, 1 validation error, 2 out of scope, 3 internal error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use vass_asym::dichotomy::DichotomyError;
use vass_asym::graph::{decompose, enumerate_types, is_dag_like, mec_decomposition, Mec, TypeSeq};
use vass_asym::model::{format_rational, parse_vass, to_json, ComplexityMeasure, MdStrategy, VassMdp};
use vass_asym::onedim::{
    energy_safe, hamiltonian_reduction, EnergyAnswer, OneDimError, UndirectedGraph, DEFAULT_STRATEGY_BOUND,
};
use vass_asym::report::{analyze, AnalysisReport, AnalyzeOptions};
use vass_asym::sim::{estimate_tails_family, witness_strategy, RunRecord, SimError, SimReport, Strategy, TailConfig};
use vass_asym::Error;

const THREADS_VAR: &str = "VASS_ASYM_THREADS";

#[derive(Parser)]
#[command(name = "vass-asym", version, about = "Asymptotic complexity of VASS Markov decision processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify L, C[c] and T[t] per type.
    Analyze(AnalyzeArgs),
    /// Monte Carlo tail estimates under a strategy.
    Simulate(SimulateArgs),
    /// List the maximal end components.
    Mecs(ListArgs),
    /// List the types with their weights.
    Types(TypesArgs),
    /// Decide energy safety of a one-dimensional model.
    Energy(EnergyArgs),
    /// Emit the one-dimensional model encoding Hamiltonicity of a graph.
    GenHamiltonian {
        /// Graph file: {"vertices": [...], "edges": [["a","b"], ...]}.
        graph: PathBuf,
        /// Start vertex.
        vertex: String,
    },
}

#[derive(Args)]
struct Format {
    /// JSON output (the default).
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Human-readable table with the same content.
    #[arg(long)]
    text: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    file: PathBuf,
    /// L, C:<c> or T:<t>; repeatable. Defaults to every measure.
    #[arg(long = "measure")]
    measures: Vec<String>,
    #[arg(long)]
    max_type_len: Option<usize>,
    /// Bound on MD strategies enumerated by brute force.
    #[arg(long, default_value_t = DEFAULT_STRATEGY_BOUND)]
    bound: u64,
    #[command(flatten)]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    file: PathBuf,
    /// `witness`, `least-ids` or a strategy file.
    #[arg(long, default_value = "least-ids")]
    strategy: String,
    /// Initial counter values, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tail exponents θ for the events F ≥ n^θ.
    #[arg(long, value_delimiter = ',')]
    theta: Vec<f64>,
    /// Step budgets h for the fraction of runs with L ≤ h.
    #[arg(long, value_delimiter = ',')]
    horizon: Vec<u64>,
    /// Lower bound on the truncation cap.
    #[arg(long)]
    max_steps: Option<u64>,
    /// Initial state; defaults to the first state of the model.
    #[arg(long)]
    init: Option<String>,
    /// L, C:<c> or T:<t>; repeatable. Defaults to L.
    #[arg(long = "measure")]
    measures: Vec<String>,
    /// Keep only runs realizing this MEC sequence, e.g. M1,M4.
    #[arg(long, value_delimiter = ',')]
    condition: Option<Vec<String>>,
    /// Per-run records as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ListArgs {
    file: PathBuf,
    #[command(flatten)]
    format: Format,
}

#[derive(Args)]
struct TypesArgs {
    file: PathBuf,
    #[arg(long)]
    max_type_len: Option<usize>,
    #[command(flatten)]
    format: Format,
}

#[derive(Args)]
struct EnergyArgs {
    file: PathBuf,
    #[arg(long, default_value_t = DEFAULT_STRATEGY_BOUND)]
    bound: u64,
    #[command(flatten)]
    format: Format,
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Scope(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Scope(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Scope(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Scope(_)
            | Error::Dichotomy(DichotomyError::NotDagLike)
            | Error::OneDim(OneDimError::NotOneDimensional(_) | OneDimError::TooManyStrategies { .. })
            | Error::Sim(SimError::Overflow(_)) => CliError::Scope(msg),
            Error::Model(_)
            | Error::Dichotomy(DichotomyError::InvalidType(_) | DichotomyError::Model(_))
            | Error::OneDim(
                OneDimError::VertexNotInGraph(_)
                | OneDimError::InvalidGraph(_)
                | OneDimError::PreconditionViolated(_)
                | OneDimError::Model(_),
            )
            | Error::Sim(
                SimError::DegenerateInput(_)
                | SimError::InvalidStrategy(_)
                | SimError::InvalidInitial(_)
                | SimError::ZeroWitness
                | SimError::Model(_),
            ) => CliError::Validation(msg),
            _ => CliError::Internal(msg),
        }
    }
}

fn lib<E: Into<Error>>(e: E) -> CliError {
    CliError::from(e.into())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<VassMdp, CliError> {
    parse_vass(&read(path)?).map_err(lib)
}

fn parse_measures(raw: &[String]) -> Result<Vec<ComplexityMeasure>, CliError> {
    raw.iter().map(|s| s.parse().map_err(lib)).collect()
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| CliError::Internal(e.to_string()))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Internal(e.to_string()))
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<String, CliError> {
    let m = load_model(&a.file)?;
    let measures = if a.measures.is_empty() { None } else { Some(parse_measures(&a.measures)?) };
    let opts = AnalyzeOptions { measures, max_type_len: a.max_type_len, strategy_bound: a.bound };
    let report = analyze(&m, &opts)?;
    if a.format.text {
        Ok(analysis_text(&report))
    } else {
        json(&report)
    }
}

fn analysis_text(r: &AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}  {}", r.tool, r.version, r.model_digest);
    let _ = writeln!(out, "dimension {}  engine {:?}  dag-like {}", r.dimension, r.engine, r.dag_like);
    let _ = writeln!(out, "{}", r.exact_arithmetic);
    out.push_str(&mecs_text(&r.mecs));
    out.push_str(&types_text(&r.types));
    let _ = writeln!(out, "estimates:");
    let _ = writeln!(out, "  {:<10} {:<16} {:<8} {:<26} tag", "measure", "type", "weight", "label");
    for e in &r.estimates {
        let label = if e.beyond_quadratic { format!("{} (beyond n²)", e.label) } else { e.label.to_string() };
        let _ = writeln!(
            out,
            "  {:<10} {:<16} {:<8} {:<26} {}",
            e.measure.to_string(),
            e.type_mecs.join(","),
            format_rational(&e.weight),
            label,
            e.tag
        );
        if let Some(n) = &e.note {
            let _ = writeln!(out, "    note: {n}");
        }
    }
    let _ = writeln!(out, "worst label per initial state:");
    for s in &r.per_initial_state {
        let labels: Vec<String> = s.labels.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let firsts: Vec<&str> = s.first_mecs.iter().map(String::as_str).collect();
        let _ = writeln!(out, "  {} [{}]: {}", s.state, firsts.join(","), labels.join(" "));
    }
    let maxes: Vec<String> = r.max_over_initial_states.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let _ = writeln!(out, "worst over all initial states: {}", maxes.join(" "));
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

fn mecs_text(mecs: &[Mec]) -> String {
    let mut out = String::from("mecs:\n");
    for k in mecs {
        let states: Vec<&str> = k.states.iter().map(String::as_str).collect();
        let trans: Vec<&str> = k.transitions.iter().map(String::as_str).collect();
        let _ = writeln!(out, "  {}: states {{{}}} transitions {{{}}}", k.id, states.join(","), trans.join(","));
    }
    out
}

fn types_text(types: &[TypeSeq]) -> String {
    let mut out = String::from("types:\n");
    for t in types {
        let _ = writeln!(out, "  {:<16} {}", t.mecs.join(","), format_rational(&t.weight));
    }
    out
}

#[derive(Serialize)]
struct MecListing {
    dag_like: bool,
    mecs: Vec<Mec>,
}

#[derive(Serialize)]
struct TypeListing {
    max_type_len: usize,
    types: Vec<TypeSeq>,
}

fn cmd_mecs(a: &ListArgs) -> Result<String, CliError> {
    let m = load_model(&a.file)?;
    let listing = MecListing { dag_like: is_dag_like(&m), mecs: mec_decomposition(&m) };
    if a.format.text {
        Ok(format!("dag-like {}\n{}", listing.dag_like, mecs_text(&listing.mecs)))
    } else {
        json(&listing)
    }
}

fn cmd_types(a: &TypesArgs) -> Result<String, CliError> {
    let m = load_model(&a.file)?;
    let max_type_len = a.max_type_len.unwrap_or_else(|| decompose(&m).len());
    let listing = TypeListing { max_type_len, types: enumerate_types(&m, max_type_len) };
    if a.format.text {
        Ok(format!("max type length {}\n{}", max_type_len, types_text(&listing.types)))
    } else {
        json(&listing)
    }
}

fn cmd_energy(a: &EnergyArgs) -> Result<String, CliError> {
    let m = load_model(&a.file)?;
    let answer = energy_safe(&m, a.bound).map_err(lib)?;
    if a.format.text {
        Ok(match &answer {
            EnergyAnswer::Safe { witness } => {
                let states: Vec<&str> = witness.bscc.states.iter().map(String::as_str).collect();
                format!("Safe: bottom SCC {{{}}} has no negative cycle\n", states.join(","))
            }
            EnergyAnswer::Unsafe => "Unsafe\n".to_string(),
            EnergyAnswer::UnknownNPRegime { strategies, bound } => {
                format!("UnknownNPRegime: {strategies} MD strategies exceed the bound {bound}\n")
            }
        })
    } else {
        json(&answer)
    }
}

fn cmd_gen_hamiltonian(graph: &Path, vertex: &str) -> Result<String, CliError> {
    let g: UndirectedGraph =
        serde_json::from_str(&read(graph)?).map_err(|e| CliError::Validation(format!("{}: {e}", graph.display())))?;
    let m = hamiltonian_reduction(&g, vertex).map_err(lib)?;
    Ok(to_json(&m) + "\n")
}

fn load_strategy(m: &VassMdp, choice: &str) -> Result<Strategy, CliError> {
    let s = match choice {
        "witness" => witness_strategy(m).map_err(lib)?,
        "least-ids" => Strategy::Md(MdStrategy::least_ids(m)),
        path => {
            let path = Path::new(path);
            serde_json::from_str(&read(path)?).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
        }
    };
    s.validate(m).map_err(lib)?;
    Ok(s)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<String, CliError> {
    let m = load_model(&a.file)?;
    let strategy = load_strategy(&m, &a.strategy)?;
    let init = a.init.clone().unwrap_or_else(|| m.state(0).name.clone());
    let mut cfg = TailConfig::new(init, a.n.clone(), a.runs, a.seed);
    cfg.theta = a.theta.clone();
    cfg.horizons = a.horizon.clone();
    cfg.max_steps = a.max_steps;
    cfg.condition_on = a.condition.clone();
    if !a.measures.is_empty() {
        cfg.measures = parse_measures(&a.measures)?;
    }
    let (report, records) = estimate_tails_family(&m, &|_| Ok(strategy.clone()), &cfg).map_err(lib)?;
    if let Some(path) = &a.csv {
        write_csv(path, &cfg.measures, &records)?;
    }
    json::<SimReport>(&report)
}

fn write_csv(path: &Path, measures: &[ComplexityMeasure], records: &[RunRecord]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Validation(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["n".to_string(), "run".into(), "truncated".into(), "steps".into(), "mecs".into()];
    header.extend(measures.iter().map(|f| f.to_string()));
    w.write_record(&header).map_err(io)?;
    for r in records {
        let mut row =
            vec![r.n.to_string(), r.run.to_string(), r.truncated.to_string(), r.steps.to_string(), r.mecs.join("|")];
        row.extend(r.values.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => {
            configure_threads()?;
            cmd_simulate(a)
        }
        Command::Mecs(a) => cmd_mecs(a),
        Command::Types(a) => cmd_types(a),
        Command::Energy(a) => cmd_energy(a),
        Command::GenHamiltonian { graph, vertex } => cmd_gen_hamiltonian(graph, vertex),
    }
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
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
