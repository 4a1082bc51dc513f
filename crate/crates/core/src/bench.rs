//! Experiment harness: anneal every (instance, weight method, temperature
//! multiplier) cell, count feasible runs and compute the average relative
//! percentage deviation (ARPD) from known optima.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::annealer::{anneal_many, AnnealerConfig};
use crate::error::{Error, Result};
use crate::instances::{load_instance, ProblemInstance, ProblemKind};
use crate::penalty::{all_weights, BoundConvention, Method};
use crate::qubo::{build_pair, combine, is_permutation};

/// Mean of `(cost - optimal) / optimal * 100`, or `None` for no costs.
pub fn arpd(costs: &[i64], optimal: i64) -> Result<Option<f64>> {
    if optimal <= 0 {
        return Err(Error::arg(format!(
            "optimum must be positive, got {optimal}"
        )));
    }
    if costs.is_empty() {
        return Ok(None);
    }
    let opt = optimal as f64;
    let sum: f64 = costs.iter().map(|&c| (c as f64 - opt) / opt * 100.0).sum();
    Ok(Some(sum / costs.len() as f64))
}

/// Objective of a 0-based permutation. For QAP, `perm[i]` is the location of
/// facility `i`; for TSP, `perm` is the visiting order of a closed tour.
pub fn permutation_cost(inst: &ProblemInstance, perm: &[usize]) -> Result<i64> {
    if perm.len() != inst.n() || !is_permutation(perm) {
        return Err(Error::arg(format!(
            "{perm:?} is not a permutation of 0..{}",
            inst.n()
        )));
    }
    let overflow = || Error::Overflow("evaluating a permutation");
    match inst {
        ProblemInstance::Tsp(t) => {
            let n = perm.len();
            (0..n).try_fold(0i64, |acc, k| {
                acc.checked_add(t.dist.get(perm[k], perm[(k + 1) % n]))
                    .ok_or_else(overflow)
            })
        }
        ProblemInstance::Qap(q) => {
            let mut acc = 0i64;
            for (i, &pi) in perm.iter().enumerate() {
                for (j, &pj) in perm.iter().enumerate() {
                    let term = q
                        .flow
                        .get(i, j)
                        .checked_mul(q.dist.get(pi, pj))
                        .ok_or_else(overflow)?;
                    acc = acc.checked_add(term).ok_or_else(overflow)?;
                }
            }
            Ok(acc)
        }
    }
}

/// Published optimal objective values of the benchmark instances.
pub const KNOWN_OPTIMA: &str = include_str!("../../../data/optima.txt");

/// Parses `name value` lines; `#` starts a comment.
pub fn parse_optima(text: &str) -> Result<BTreeMap<String, i64>> {
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let t: Vec<&str> = line.split_whitespace().collect();
        match t.as_slice() {
            [name, v] => {
                let v = v
                    .parse::<i64>()
                    .map_err(|_| Error::parse(format!("optima line {}: bad value `{v}`", k + 1)))?;
                out.insert(name.to_string(), v);
            }
            _ => {
                return Err(Error::parse(format!(
                    "optima line {} is not `name value`",
                    k + 1
                )))
            }
        }
    }
    Ok(out)
}

pub fn known_optima() -> BTreeMap<String, i64> {
    parse_optima(KNOWN_OPTIMA).expect("bundled optima file parses")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub name: String,
    pub kind: ProblemKind,
    pub path: PathBuf,
}

/// Benchmark instances with at most 900 variables, run by default.
pub const DESK_INSTANCES: [(&str, ProblemKind); 14] = [
    ("had12", ProblemKind::Qap),
    ("had14", ProblemKind::Qap),
    ("had16", ProblemKind::Qap),
    ("had18", ProblemKind::Qap),
    ("had20", ProblemKind::Qap),
    ("rou12", ProblemKind::Qap),
    ("rou15", ProblemKind::Qap),
    ("rou20", ProblemKind::Qap),
    ("gr17", ProblemKind::Tsp),
    ("gr21", ProblemKind::Tsp),
    ("gr24", ProblemKind::Tsp),
    ("fri26", ProblemKind::Tsp),
    ("bayg29", ProblemKind::Tsp),
    ("bays29", ProblemKind::Tsp),
];

/// Remaining benchmark instances, opted into with `large`.
pub const LARGE_INSTANCES: [(&str, ProblemKind); 6] = [
    ("tai40a", ProblemKind::Qap),
    ("tai40b", ProblemKind::Qap),
    ("dantzig42", ProblemKind::Tsp),
    ("berlin52", ProblemKind::Tsp),
    ("brazil58", ProblemKind::Tsp),
    ("st70", ProblemKind::Tsp),
];

impl InstanceSpec {
    /// `dir/name.tsp` or `dir/name.dat`.
    pub fn in_dir(dir: &Path, name: &str, kind: ProblemKind) -> Self {
        let ext = match kind {
            ProblemKind::Tsp => "tsp",
            ProblemKind::Qap => "dat",
        };
        InstanceSpec {
            name: name.to_string(),
            kind,
            path: dir.join(format!("{name}.{ext}")),
        }
    }
}

fn default_runs() -> usize {
    20
}

fn default_seed() -> u64 {
    42
}

fn default_multipliers() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instances: Vec<InstanceSpec>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_multipliers")]
    pub temperature_multipliers: Vec<f64>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Iterations per run; `None` means `m^2`.
    #[serde(default)]
    pub iterations: Option<u64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub known_optima: BTreeMap<String, i64>,
    #[serde(default)]
    pub convention: BoundConvention,
}

impl ExperimentConfig {
    pub fn new(instances: Vec<InstanceSpec>) -> Self {
        ExperimentConfig {
            instances,
            methods: default_methods(),
            temperature_multipliers: default_multipliers(),
            runs: default_runs(),
            iterations: None,
            seed: default_seed(),
            known_optima: known_optima(),
            convention: BoundConvention::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances.is_empty() {
            return Err(Error::Config("no instances listed".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no penalty methods listed".into()));
        }
        if self.temperature_multipliers.is_empty()
            || self
                .temperature_multipliers
                .iter()
                .any(|&t| !(t > 0.0 && t.is_finite()))
        {
            return Err(Error::Config(
                "temperature multipliers must be positive".into(),
            ));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be >= 1".into()));
        }
        if self.iterations == Some(0) {
            return Err(Error::Config("iterations must be >= 1".into()));
        }
        Ok(())
    }

    /// Optimum for `name`, from the config first and the bundled table second.
    pub fn optimum(&self, name: &str) -> Option<i64> {
        self.known_optima
            .get(name)
            .copied()
            .or_else(|| known_optima().get(name).copied())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    pub instance: String,
    pub kind: ProblemKind,
    pub m: usize,
    pub ub: i64,
    pub mqc: i64,
    pub vlm: i64,
    pub momc: i64,
    pub moc: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub instance: String,
    pub method: Method,
    pub multiplier: f64,
    pub alpha: i64,
    pub runs: usize,
    pub iterations: u64,
    pub feasible_count: usize,
    pub arpd: Option<f64>,
    /// Objective value per run, `None` for infeasible runs.
    pub costs: Vec<Option<i64>>,
    pub wall_clock_ms: u128,
}

impl CellReport {
    fn feasible_costs(&self) -> impl Iterator<Item = i64> + '_ {
        self.costs.iter().flatten().copied()
    }

    pub fn min_cost(&self) -> Option<i64> {
        self.feasible_costs().min()
    }

    pub fn max_cost(&self) -> Option<i64> {
        self.feasible_costs().max()
    }

    pub fn mean_cost(&self) -> Option<f64> {
        let n = self.feasible_count;
        (n > 0).then(|| self.feasible_costs().map(|c| c as f64).sum::<f64>() / n as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub weights: Vec<WeightRow>,
    pub cells: Vec<CellReport>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let mut weights = Vec::new();
    let mut cells = Vec::new();
    for spec in &cfg.instances {
        let inst = load_instance(spec.kind, &spec.path)?;
        let mut report = run_instance(cfg, &spec.name, &inst)?;
        weights.push(report.0);
        cells.append(&mut report.1);
    }
    Ok(BenchReport {
        seed: cfg.seed,
        weights,
        cells,
    })
}

/// All cells for one already-loaded instance.
pub fn run_instance(
    cfg: &ExperimentConfig,
    name: &str,
    inst: &ProblemInstance,
) -> Result<(WeightRow, Vec<CellReport>)> {
    let (c, g) = build_pair(inst)?;
    let w = all_weights(&c, &g, cfg.convention)?;
    let m = c.m();
    let row = WeightRow {
        instance: name.to_string(),
        kind: inst.kind(),
        m,
        ub: w.ub,
        mqc: w.mqc,
        vlm: w.vlm,
        momc: w.momc,
        moc: w.moc,
    };
    let optimum = cfg.optimum(name);
    let mut cells = Vec::new();
    for &method in &cfg.methods {
        let alpha = w.get(method);
        let q = combine(&c, &g, alpha)?;
        for &mult in &cfg.temperature_multipliers {
            let mut ac = AnnealerConfig::standard(w.vlm, mult, m, cfg.seed);
            ac.runs = cfg.runs;
            if let Some(it) = cfg.iterations {
                ac.iterations = it;
            }
            let start = Instant::now();
            let results = anneal_many(&q, &ac)?;
            let wall_clock_ms = start.elapsed().as_millis();
            let mut costs = Vec::with_capacity(results.len());
            for r in &results {
                costs.push(match &r.permutation {
                    Some(perm) => {
                        let cost = permutation_cost(inst, perm)?;
                        if cost != r.best_energy {
                            return Err(Error::Formulation(format!(
                                "{name}: feasible energy {} differs from tour/assignment cost {cost}",
                                r.best_energy
                            )));
                        }
                        Some(cost)
                    }
                    None => None,
                });
            }
            let feasible: Vec<i64> = costs.iter().flatten().copied().collect();
            let arpd = match optimum {
                Some(opt) => arpd(&feasible, opt)?,
                None if feasible.is_empty() => None,
                None => {
                    return Err(Error::Config(format!(
                        "no known optimum for instance `{name}`"
                    )))
                }
            };
            cells.push(CellReport {
                instance: name.to_string(),
                method,
                multiplier: mult,
                alpha,
                runs: ac.runs,
                iterations: ac.iterations,
                feasible_count: feasible.len(),
                arpd,
                costs,
                wall_clock_ms,
            });
        }
    }
    Ok((row, cells))
}

fn opt_f(v: Option<f64>, prec: usize) -> String {
    v.map(|x| format!("{x:.prec$}")).unwrap_or_default()
}

fn opt_i(v: Option<i64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl BenchReport {
    /// One row per cell. Contains no timing, so equal inputs give equal bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "instance,method,multiplier,alpha,runs,iterations,feasible_count,arpd,min_cost,mean_cost,max_cost\n",
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                csv_field(&c.instance),
                c.method,
                c.multiplier,
                c.alpha,
                c.runs,
                c.iterations,
                c.feasible_count,
                opt_f(c.arpd, 4),
                opt_i(c.min_cost()),
                opt_f(c.mean_cost(), 2),
                opt_i(c.max_cost()),
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Weight table, then feasibility counts and ARPD per multiplier.
    pub fn to_text(&self) -> String {
        let mut out = weights_table(&self.weights);
        let mut mults: Vec<f64> = Vec::new();
        let mut methods: Vec<Method> = Vec::new();
        let mut instances: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !mults.contains(&c.multiplier) {
                mults.push(c.multiplier);
            }
            if !methods.contains(&c.method) {
                methods.push(c.method);
            }
            if !instances.contains(&c.instance.as_str()) {
                instances.push(&c.instance);
            }
        }
        for &mult in &mults {
            let find = |inst: &str, meth: Method| {
                self.cells
                    .iter()
                    .find(|c| c.instance == inst && c.method == meth && c.multiplier == mult)
            };
            let _ = writeln!(out, "\nfeasible runs, t0 = {mult} * VLM");
            let _ = write!(out, "{:<10}", "instance");
            for m in &methods {
                let _ = write!(out, " {:>8}", m.name().to_uppercase());
            }
            out.push('\n');
            for inst in &instances {
                let _ = write!(out, "{inst:<10}");
                for &m in &methods {
                    let s = find(inst, m)
                        .map(|c| format!("{}/{}", c.feasible_count, c.runs))
                        .unwrap_or_default();
                    let _ = write!(out, " {s:>8}");
                }
                out.push('\n');
            }
            let _ = writeln!(out, "\nARPD (%), t0 = {mult} * VLM");
            let _ = write!(out, "{:<10}", "instance");
            for m in &methods {
                let _ = write!(out, " {:>8}", m.name().to_uppercase());
            }
            out.push('\n');
            for inst in &instances {
                let _ = write!(out, "{inst:<10}");
                for &m in &methods {
                    let s = find(inst, m)
                        .and_then(|c| c.arpd)
                        .map(|a| format!("{a:.2}"))
                        .unwrap_or_else(|| "-".into());
                    let _ = write!(out, " {s:>8}");
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Aligned table with one row per instance and one column per method.
pub fn weights_table(rows: &[WeightRow]) -> String {
    let mut out = format!(
        "{:<5} {:<10} {:>6} {:>16} {:>12} {:>14} {:>14} {:>14}\n",
        "type", "instance", "m", "UB", "MQC", "VLM", "MOMC", "MOC"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<5} {:<10} {:>6} {:>16} {:>12} {:>14} {:>14} {:>14}",
            r.kind.to_string().to_uppercase(),
            r.instance,
            r.m,
            r.ub,
            r.mqc,
            r.vlm,
            r.momc,
            r.moc
        );
    }
    out
}
