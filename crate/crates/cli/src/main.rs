use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use permqubo::annealer::{anneal_many, AnnealerConfig, RunResult};
use permqubo::bench::{
    arpd, known_optima, permutation_cost, run_experiment, weights_table, ExperimentConfig,
    InstanceSpec, WeightRow, DESK_INSTANCES, LARGE_INSTANCES,
};
use permqubo::instances::{load_instance, ProblemInstance, ProblemKind};
use permqubo::oracle::check_validity;
use permqubo::penalty::{all_weights, qap_max_product, BoundConvention, Method};
use permqubo::qubo::{build_pair, combine};
use permqubo::{Error, Result};

#[derive(Parser)]
#[command(
    name = "permqubo",
    version,
    about = "Penalty weights and annealing for TSP/QAP QUBOs"
)]
struct Cli {
    /// Worker threads (results do not depend on it)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a summary of an instance file
    Parse(InputArgs),
    /// Write the cost and constraint QUBOs of an instance
    Build(BuildArgs),
    /// Compute penalty weights
    Weights(WeightsArgs),
    /// Anneal one instance
    Solve(SolveArgs),
    /// Run the benchmark grid
    Bench(BenchArgs),
    /// Check a penalty weight by exhaustive enumeration
    Validate(ValidateArgs),
}

#[derive(Args)]
struct InputArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    #[arg(long)]
    input: PathBuf,
    /// Output prefix; writes PREFIX.cost.* and PREFIX.constraint.*
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct WeightsArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long, value_enum, default_value = "upper-row")]
    convention: Convention,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "moc")]
    method: MethodArg,
    /// Initial temperature as a multiple of VLM
    #[arg(long = "t0-mult", default_value = "0.1")]
    t0_mult: f64,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Iterations per run (default m^2)
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long, value_enum, default_value = "upper-row")]
    convention: Convention,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment config (JSON); otherwise the standard instance set is read
    /// from --data-dir
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "data")]
    data_dir: PathBuf,
    /// Bench a single instance file instead of the standard set
    #[arg(long, requires = "problem")]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    problem: Option<Problem>,
    /// Include instances with more than 900 variables
    #[arg(long)]
    large: bool,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long = "t0-mult", value_delimiter = ',')]
    t0_mult: Vec<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    #[arg(long)]
    input: PathBuf,
    /// Penalty weight to check
    #[arg(long, conflicts_with = "method")]
    alpha: Option<i64>,
    /// Check the weight produced by this method
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, value_enum, default_value = "upper-row")]
    convention: Convention,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Tsp,
    Qap,
}

impl From<Problem> for ProblemKind {
    fn from(p: Problem) -> Self {
        match p {
            Problem::Tsp => ProblemKind::Tsp,
            Problem::Qap => ProblemKind::Qap,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum MethodArg {
    Ub,
    Mqc,
    Vlm,
    Momc,
    Moc,
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Ub => vec![Method::Ub],
            MethodArg::Mqc => vec![Method::Mqc],
            MethodArg::Vlm => vec![Method::Vlm],
            MethodArg::Momc => vec![Method::Momc],
            MethodArg::Moc => vec![Method::Moc],
            MethodArg::All => Method::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    UpperRow,
    Incident,
}

impl From<Convention> for BoundConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::UpperRow => BoundConvention::UpperRow,
            Convention::Incident => BoundConvention::Incident,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let result = match cli.command {
        Command::Parse(a) => cmd_parse(a),
        Command::Build(a) => cmd_build(a),
        Command::Weights(a) => cmd_weights(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(1)
        }
    }
}

fn load(problem: Problem, path: &Path) -> Result<ProblemInstance> {
    load_instance(problem.into(), path)
}

fn json<T: serde::Serialize + ?Sized>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn cmd_parse(a: InputArgs) -> Result<String> {
    let inst = load(a.problem, &a.input)?;
    let (lo, hi) = match &inst {
        ProblemInstance::Tsp(t) => (t.dist.min(), t.dist.max()),
        ProblemInstance::Qap(q) => (
            q.flow.min().min(q.dist.min()),
            q.flow.max().max(q.dist.max()),
        ),
    };
    let summary = serde_json::json!({
        "name": inst.name(),
        "kind": inst.kind(),
        "n": inst.n(),
        "qubo_size": inst.qubo_size(),
        "min_entry": lo,
        "max_entry": hi,
    });
    match a.format {
        Format::Json => json(&summary),
        Format::Csv => Ok(format!(
            "name,kind,n,qubo_size,min_entry,max_entry\n{},{},{},{},{},{}\n",
            inst.name(),
            inst.kind(),
            inst.n(),
            inst.qubo_size(),
            lo.unwrap_or(0),
            hi.unwrap_or(0)
        )),
        Format::Text => Ok(format!(
            "name {}\nkind {}\nn {}\nqubo_size {}\nentries {}..{}\n",
            inst.name(),
            inst.kind(),
            inst.n(),
            inst.qubo_size(),
            lo.unwrap_or(0),
            hi.unwrap_or(0)
        )),
    }
}

fn cmd_build(a: BuildArgs) -> Result<String> {
    let inst = load(a.problem, &a.input)?;
    let (c, g) = build_pair(&inst)?;
    let prefix = a.out.display().to_string();
    let mut out = String::new();
    for (label, model) in [("cost", &c), ("constraint", &g)] {
        let (path, body) = match a.format {
            Format::Json => (
                format!("{prefix}.{label}.json"),
                json(&model.to_envelope())?,
            ),
            _ => (format!("{prefix}.{label}.txt"), model.to_text()),
        };
        write_file(Path::new(&path), &body)?;
        let _ = writeln!(out, "wrote {path} (m = {})", model.m());
    }
    Ok(out)
}

fn cmd_weights(a: WeightsArgs) -> Result<String> {
    let inst = load(a.problem, &a.input)?;
    let (c, g) = build_pair(&inst)?;
    let r = all_weights(&c, &g, a.convention.into())?;
    let methods = a.method.methods();
    let max_product = match &inst {
        ProblemInstance::Qap(q) => Some(qap_max_product(q)?),
        ProblemInstance::Tsp(_) => None,
    };
    match a.format {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("instance".into(), inst.name().into());
            obj.insert("m".into(), c.m().into());
            for m in &methods {
                obj.insert(m.name().into(), r.get(*m).into());
            }
            obj.insert("gamma".into(), r.gamma.into());
            obj.insert("convention".into(), r.convention.to_string().into());
            if let Some(p) = max_product {
                obj.insert("max_flow_times_max_distance".into(), p.into());
            }
            if a.method == MethodArg::All {
                obj.insert("bounds_c".into(), serde_json::to_value(&r.bounds_c)?);
                obj.insert("bounds_g".into(), serde_json::to_value(&r.bounds_g)?);
            }
            json(&obj)
        }
        Format::Csv => {
            let mut out = String::from("instance,m");
            for m in &methods {
                let _ = write!(out, ",{m}");
            }
            let _ = write!(out, "\n{},{}", inst.name(), c.m());
            for m in &methods {
                let _ = write!(out, ",{}", r.get(*m));
            }
            out.push('\n');
            Ok(out)
        }
        Format::Text => {
            let mut out = if a.method == MethodArg::All {
                weights_table(&[WeightRow {
                    instance: inst.name().to_string(),
                    kind: inst.kind(),
                    m: c.m(),
                    ub: r.ub,
                    mqc: r.mqc,
                    vlm: r.vlm,
                    momc: r.momc,
                    moc: r.moc,
                }])
            } else {
                methods
                    .iter()
                    .map(|m| format!("{} {}\n", m.name().to_uppercase(), r.get(*m)))
                    .collect()
            };
            let _ = writeln!(out, "gamma {}", r.gamma);
            if let Some(p) = max_product {
                let _ = writeln!(out, "max(H)*max(D) {p}");
            }
            Ok(out)
        }
    }
}

fn one_based(perm: &[usize]) -> String {
    perm.iter()
        .map(|p| (p + 1).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_solve(a: SolveArgs) -> Result<String> {
    let inst = load(a.problem, &a.input)?;
    let (c, g) = build_pair(&inst)?;
    let w = all_weights(&c, &g, a.convention.into())?;
    let optimum = known_optima().get(inst.name()).copied();
    let mut blocks: Vec<(Method, i64, AnnealerConfig, Vec<RunResult>)> = Vec::new();
    for method in a.method.methods() {
        let alpha = w.get(method);
        let q = combine(&c, &g, alpha)?;
        let mut cfg = AnnealerConfig::standard(w.vlm, a.t0_mult, c.m(), a.seed);
        cfg.runs = a.runs;
        if let Some(it) = a.iterations {
            cfg.iterations = it;
        }
        let runs = anneal_many(&q, &cfg)?;
        for r in &runs {
            if let Some(p) = &r.permutation {
                let cost = permutation_cost(&inst, p)?;
                if cost != r.best_energy {
                    return Err(Error::Formulation(format!(
                        "feasible energy {} differs from permutation cost {cost}",
                        r.best_energy
                    )));
                }
            }
        }
        blocks.push((method, alpha, cfg, runs));
    }
    match a.format {
        Format::Json => {
            let v: Vec<_> = blocks
                .iter()
                .map(|(m, alpha, cfg, runs)| {
                    serde_json::json!({
                        "instance": inst.name(),
                        "method": m,
                        "alpha": alpha,
                        "config": cfg,
                        "runs": runs,
                    })
                })
                .collect();
            json(&v)
        }
        Format::Csv => {
            let mut out = String::from(
                "instance,method,alpha,run,feasible,best_energy,cost,best_iteration,accepted_flips,permutation\n",
            );
            for (m, alpha, _, runs) in &blocks {
                for r in runs {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{}",
                        inst.name(),
                        m,
                        alpha,
                        r.run,
                        r.feasible,
                        r.best_energy,
                        r.cost.map(|c| c.to_string()).unwrap_or_default(),
                        r.best_iteration,
                        r.accepted_flips,
                        r.permutation.as_deref().map(one_based).unwrap_or_default()
                    );
                }
            }
            Ok(out)
        }
        Format::Text => {
            let mut out = String::new();
            for (m, alpha, cfg, runs) in &blocks {
                let _ = writeln!(
                    out,
                    "{} method {} alpha {} t0 {} iterations {} seed {}",
                    inst.name(),
                    m.name().to_uppercase(),
                    alpha,
                    cfg.initial_temperature,
                    cfg.iterations,
                    cfg.seed
                );
                for r in runs {
                    let _ = match &r.permutation {
                        Some(p) => writeln!(
                            out,
                            "run {:>2} feasible cost {} best_iteration {} accepted {} perm {}",
                            r.run,
                            r.best_energy,
                            r.best_iteration,
                            r.accepted_flips,
                            one_based(p)
                        ),
                        None => writeln!(
                            out,
                            "run {:>2} infeasible energy {} best_iteration {} accepted {}",
                            r.run, r.best_energy, r.best_iteration, r.accepted_flips
                        ),
                    };
                }
                let costs: Vec<i64> = runs.iter().filter_map(|r| r.cost).collect();
                let _ = write!(out, "feasible {}/{}", costs.len(), runs.len());
                if let Some(opt) = optimum {
                    if let Some(v) = arpd(&costs, opt)? {
                        let _ = write!(out, " arpd {v:.2}% (optimum {opt})");
                    }
                }
                out.push('\n');
            }
            Ok(out)
        }
    }
}

fn cmd_bench(a: BenchArgs) -> Result<String> {
    let mut cfg = match (&a.config, &a.input) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(input)) => {
            let kind: ProblemKind = a.problem.expect("clap enforces --problem").into();
            let name = load_instance(kind, input)?.name().to_string();
            ExperimentConfig::new(vec![InstanceSpec {
                name,
                kind,
                path: input.clone(),
            }])
        }
        (None, None) => {
            let mut specs = Vec::new();
            let large: &[(&str, ProblemKind)] = if a.large { &LARGE_INSTANCES } else { &[] };
            for &(name, kind) in DESK_INSTANCES.iter().chain(large) {
                let spec = InstanceSpec::in_dir(&a.data_dir, name, kind);
                if spec.path.exists() {
                    specs.push(spec);
                } else {
                    eprintln!(
                        "warning: skipping {name}: {} not found",
                        spec.path.display()
                    );
                }
            }
            if specs.is_empty() {
                return Err(Error::Config(format!(
                    "no benchmark instances found in {}",
                    a.data_dir.display()
                )));
            }
            ExperimentConfig::new(specs)
        }
    };
    if let Some(m) = a.method {
        cfg.methods = m.methods();
    }
    if !a.t0_mult.is_empty() {
        cfg.temperature_multipliers = a.t0_mult.clone();
    }
    if let Some(r) = a.runs {
        cfg.runs = r;
    }
    if a.iterations.is_some() {
        cfg.iterations = a.iterations;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let report = run_experiment(&cfg)?;
    let body = match a.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json()? + "\n",
        Format::Text => report.to_text(),
    };
    match a.out {
        Some(path) => {
            write_file(&path, &body)?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(body),
    }
}

fn cmd_validate(a: ValidateArgs) -> Result<String> {
    let inst = load(a.problem, &a.input)?;
    let (c, g) = build_pair(&inst)?;
    let alpha = match (a.alpha, a.method) {
        (Some(alpha), _) => alpha,
        (None, Some(m)) => {
            let methods = m.methods();
            if methods.len() != 1 {
                return Err(Error::Argument("validate takes a single --method".into()));
            }
            all_weights(&c, &g, a.convention.into())?.get(methods[0])
        }
        (None, None) => {
            return Err(Error::Argument("validate needs --alpha or --method".into()));
        }
    };
    let r = check_validity(&c, &g, alpha)?;
    match a.format {
        Format::Json => json(&r),
        Format::Csv => Ok(format!(
            "alpha,feasible_min,infeasible_min,strictly_valid,tie_valid\n{},{},{},{},{}\n",
            r.alpha, r.feasible_min, r.infeasible_min, r.strictly_valid, r.tie_valid
        )),
        Format::Text => Ok(format!(
            "alpha {}\nfeasible_min {}\ninfeasible_min {}\nstrictly_valid {}\ntie_valid {}\n",
            r.alpha, r.feasible_min, r.infeasible_min, r.strictly_valid, r.tie_valid
        )),
    }
}
