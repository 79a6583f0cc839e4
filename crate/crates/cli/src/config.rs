//! Experiment configuration files.
//!
//! The format is plain text, one `key = value` pair per line, grouped under
//! `[problem]`, `[optimizer]` and `[run]` headers. `#` starts a comment.
//! `[problem]` and `[run]` appear exactly once; `[optimizer]` may repeat, one
//! section per optimizer. Unknown keys and duplicate keys are errors. The
//! full grammar is in the repository README.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fastbelief_core::optim::{Beta2Schedule, FeasibleRegion, HyperParams, OptimizerKind, StepSchedule};
use fastbelief_core::problems::{
    canonical_quadratic, load_csv, synth_classification, ProblemInstance, QuadraticProblem, SoftmaxProblem,
};
use fastbelief_core::regret::{checkpoint_grid, Retention};
use nalgebra::DMatrix;

use crate::error::{CliError, CliResult};

const PROBLEM_KEYS: &[&str] = &[
    "kind",
    "dim",
    "matrix_seed",
    "matrix",
    "vector",
    "noise",
    "dataset",
    "classes",
    "features",
    "samples",
    "separation",
    "data_seed",
    "sigma1",
    "sigma2",
    "batch_size",
];

const OPTIMIZER_KEYS: &[&str] = &[
    "kind", "alpha", "beta1", "lambda", "beta2", "delta", "epsilon", "schedule", "final_lr", "gamma",
];

const RUN_KEYS: &[&str] = &["horizon", "seed", "lower", "upper", "checkpoints", "out", "stride", "r"];

#[derive(Debug, Clone, PartialEq)]
pub enum QuadraticSource {
    /// Random rotation of `linspace(0.1, 1, dim)`.
    Generated { dim: usize, seed: u64 },
    /// Rows of `A` and the entries of `b` read from CSV files.
    Files { matrix: PathBuf, vector: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic { classes: usize, features: usize, samples: usize, separation: f64, seed: u64 },
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Quadratic { source: QuadraticSource, noise: f64 },
    SoftmaxL2 { data: DataSource, sigma1: f64, sigma2: f64, batch_size: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    /// Every parameter except `alpha`, which comes from `alphas`.
    pub hp: HyperParams,
    /// The stepsize grid; one sweep cell per entry.
    pub alphas: Vec<f64>,
}

impl OptimizerSpec {
    pub fn cells(&self) -> impl Iterator<Item = (OptimizerKind, HyperParams)> + '_ {
        self.alphas.iter().map(move |&a| (self.kind, self.hp.with_alpha(a)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointPolicy {
    /// `128, 256, ...` up to the horizon, plus the horizon.
    Grid,
    List(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub horizon: u64,
    pub seed: u64,
    pub lower: f64,
    pub upper: f64,
    pub checkpoints: CheckpointPolicy,
    pub out: Option<PathBuf>,
    pub retention: Retention,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub path: PathBuf,
    pub problem: ProblemSpec,
    pub optimizers: Vec<OptimizerSpec>,
    pub run: RunSpec,
}

impl ExperimentConfig {
    pub fn cells(&self) -> Vec<(OptimizerKind, HyperParams)> {
        self.optimizers.iter().flat_map(|o| o.cells()).collect()
    }

    /// The single cell of a config meant for one trajectory.
    pub fn single_cell(&self, command: &str) -> CliResult<(OptimizerKind, HyperParams)> {
        let cells = self.cells();
        match cells.as_slice() {
            [one] => Ok(*one),
            _ => Err(self.invalid(format!(
                "`{command}` needs exactly one optimizer with one alpha, found {} cells",
                cells.len()
            ))),
        }
    }

    pub fn checkpoints(&self) -> CliResult<Vec<u64>> {
        match &self.run.checkpoints {
            CheckpointPolicy::Grid => Ok(checkpoint_grid(self.run.horizon)),
            CheckpointPolicy::List(list) => {
                if let Some(c) = list.iter().find(|&&c| c > self.run.horizon) {
                    return Err(self.invalid(format!(
                        "run.checkpoints: {c} exceeds the horizon {}",
                        self.run.horizon
                    )));
                }
                Ok(list.clone())
            }
        }
    }

    pub fn build_problem(&self) -> CliResult<ProblemInstance> {
        match &self.problem {
            ProblemSpec::Quadratic { source, noise } => {
                let q = match source {
                    QuadraticSource::Generated { dim, seed } => canonical_quadratic(*seed, *dim, *noise)?,
                    QuadraticSource::Files { matrix, vector } => {
                        let rows = read_numeric_rows(matrix)?;
                        let n = rows.len();
                        if rows.iter().any(|r| r.len() != n) {
                            return Err(CliError::ConfigInvalid {
                                path: matrix.display().to_string(),
                                message: format!("matrix must be square with {n} columns per row"),
                            });
                        }
                        let b: Vec<f64> = read_numeric_rows(vector)?.into_iter().flatten().collect();
                        let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
                        QuadraticProblem::new(a, b, *noise)?
                    }
                };
                Ok(ProblemInstance::Quadratic(q))
            }
            ProblemSpec::SoftmaxL2 { data, sigma1, sigma2, batch_size } => {
                let ds = match data {
                    DataSource::Synthetic { classes, features, samples, separation, seed } => {
                        synth_classification(*seed, *classes, *features, *samples, *separation)?
                    }
                    DataSource::Csv(path) => load_csv(path)?,
                };
                Ok(ProblemInstance::SoftmaxL2(SoftmaxProblem::new(
                    Arc::new(ds),
                    *sigma1,
                    *sigma2,
                    *batch_size,
                )?))
            }
        }
    }

    pub fn region(&self, dim: usize) -> CliResult<FeasibleRegion> {
        Ok(FeasibleRegion::uniform(dim, self.run.lower, self.run.upper)?)
    }

    fn invalid(&self, message: String) -> CliError {
        CliError::ConfigInvalid { path: self.path.display().to_string(), message }
    }
}

fn read_numeric_rows(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| parse_f64(f.trim()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|message| CliError::ConfigSyntax {
                path: path.display().to_string(),
                line: i + 1,
                message,
            })?;
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

/// Reads and validates a configuration file. Relative paths inside it are
/// resolved against the file's directory.
pub fn parse_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_str(&text, path)
}

/// Parses configuration text as if it had been read from `path`.
pub fn parse_config_str(text: &str, path: &Path) -> CliResult<ExperimentConfig> {
    let p = Parser { path, base: path.parent().unwrap_or(Path::new("")) };
    let sections = p.sections(text)?;

    let mut problem = None;
    let mut run = None;
    let mut optimizers = Vec::new();
    for sec in &sections {
        match sec.name.as_str() {
            "problem" if problem.is_some() => return Err(p.syntax(sec.line, "duplicate [problem] section")),
            "run" if run.is_some() => return Err(p.syntax(sec.line, "duplicate [run] section")),
            "problem" => problem = Some(p.problem(sec)?),
            "run" => run = Some(p.run(sec)?),
            "optimizer" => optimizers.push(p.optimizer(sec)?),
            other => return Err(p.syntax(sec.line, format!("unknown section [{other}]"))),
        }
    }
    let problem = problem.ok_or_else(|| p.invalid("missing [problem] section"))?;
    let run = run.ok_or_else(|| p.invalid("missing [run] section"))?;
    if optimizers.is_empty() {
        return Err(p.invalid("at least one [optimizer] section is required"));
    }
    Ok(ExperimentConfig { path: path.to_path_buf(), problem, optimizers, run })
}

struct Parser<'a> {
    path: &'a Path,
    base: &'a Path,
}

impl Parser<'_> {
    fn syntax(&self, line: usize, message: impl Into<String>) -> CliError {
        CliError::ConfigSyntax { path: self.path.display().to_string(), line, message: message.into() }
    }

    fn invalid(&self, message: impl Into<String>) -> CliError {
        CliError::ConfigInvalid { path: self.path.display().to_string(), message: message.into() }
    }

    fn sections(&self, text: &str) -> CliResult<Vec<Section>> {
        let mut sections: Vec<Section> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| self.syntax(line_no, format!("unterminated section header `{line}`")))?
                    .trim();
                sections.push(Section { name: name.to_string(), line: line_no, entries: BTreeMap::new() });
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| self.syntax(line_no, format!("expected `key = value`, found `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = sections
                .last_mut()
                .ok_or_else(|| self.syntax(line_no, format!("key `{key}` appears before any section header")))?;
            let allowed = match sec.name.as_str() {
                "problem" => PROBLEM_KEYS,
                "optimizer" => OPTIMIZER_KEYS,
                "run" => RUN_KEYS,
                _ => &[],
            };
            if !allowed.contains(&key) {
                return Err(self.syntax(line_no, format!("unknown key `{key}` in [{}]", sec.name)));
            }
            if value.is_empty() {
                return Err(self.syntax(line_no, format!("key `{key}` has an empty value")));
            }
            if let Some(prev) = sec.entries.get(key) {
                return Err(self.syntax(line_no, format!("duplicate key `{key}` (first set on line {})", prev.line)));
            }
            sec.entries.insert(key.to_string(), Entry { value: value.to_string(), line: line_no });
        }
        Ok(sections)
    }

    fn get<T>(
        &self,
        sec: &Section,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> CliResult<Option<T>> {
        match sec.entries.get(key) {
            None => Ok(None),
            Some(e) => parse(&e.value)
                .map(Some)
                .map_err(|m| self.syntax(e.line, format!("{}.{key}: {m}", sec.name))),
        }
    }

    fn require<T>(&self, sec: &Section, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> CliResult<T> {
        self.get(sec, key, parse)?
            .ok_or_else(|| self.syntax(sec.line, format!("[{}] is missing required key `{key}`", sec.name)))
    }

    /// Rejects keys that do not belong to the chosen variant of a section.
    fn forbid(&self, sec: &Section, keys: &[&str], context: &str) -> CliResult<()> {
        for k in keys {
            if let Some(e) = sec.entries.get(*k) {
                return Err(self.syntax(e.line, format!("key `{k}` does not apply to {context}")));
            }
        }
        Ok(())
    }

    fn existing_path(&self, sec: &Section, key: &str) -> CliResult<Option<PathBuf>> {
        let Some(e) = sec.entries.get(key) else { return Ok(None) };
        let path = self.base.join(&e.value);
        if !path.is_file() {
            return Err(self.syntax(e.line, format!("{}.{key}: file `{}` does not exist", sec.name, path.display())));
        }
        Ok(Some(path))
    }

    fn problem(&self, sec: &Section) -> CliResult<ProblemSpec> {
        let kind = self.require(sec, "kind", |s| Ok(s.to_ascii_lowercase()))?;
        match kind.as_str() {
            "quadratic" => {
                self.forbid(
                    sec,
                    &["dataset", "classes", "features", "samples", "separation", "data_seed", "sigma1", "sigma2", "batch_size"],
                    "a quadratic problem",
                )?;
                let noise = self.get(sec, "noise", nonneg_f64)?.unwrap_or(0.0);
                let matrix = self.existing_path(sec, "matrix")?;
                let vector = self.existing_path(sec, "vector")?;
                let source = match (matrix, vector) {
                    (Some(matrix), Some(vector)) => {
                        self.forbid(sec, &["dim", "matrix_seed"], "a quadratic read from files")?;
                        QuadraticSource::Files { matrix, vector }
                    }
                    (None, None) => QuadraticSource::Generated {
                        dim: self.get(sec, "dim", positive_usize)?.unwrap_or(10),
                        seed: self.get(sec, "matrix_seed", parse_u64)?.unwrap_or(0),
                    },
                    _ => return Err(self.syntax(sec.line, "`matrix` and `vector` must be given together")),
                };
                Ok(ProblemSpec::Quadratic { source, noise })
            }
            "softmax_l2" | "softmax" => {
                self.forbid(sec, &["dim", "matrix_seed", "matrix", "vector", "noise"], "a softmax_l2 problem")?;
                let data = match self.existing_path(sec, "dataset")? {
                    Some(p) => {
                        self.forbid(
                            sec,
                            &["classes", "features", "samples", "separation", "data_seed"],
                            "a dataset read from a file",
                        )?;
                        DataSource::Csv(p)
                    }
                    None => DataSource::Synthetic {
                        classes: self.get(sec, "classes", positive_usize)?.unwrap_or(10),
                        features: self.get(sec, "features", positive_usize)?.unwrap_or(20),
                        samples: self.get(sec, "samples", positive_usize)?.unwrap_or(2000),
                        separation: self.get(sec, "separation", nonneg_f64)?.unwrap_or(1.0),
                        seed: self.get(sec, "data_seed", parse_u64)?.unwrap_or(0),
                    },
                };
                Ok(ProblemSpec::SoftmaxL2 {
                    data,
                    sigma1: self.get(sec, "sigma1", positive_f64)?.unwrap_or(0.01),
                    sigma2: self.get(sec, "sigma2", positive_f64)?.unwrap_or(0.01),
                    batch_size: self.get(sec, "batch_size", positive_usize)?.unwrap_or(32),
                })
            }
            other => Err(self.syntax(
                sec.entries["kind"].line,
                format!("problem.kind: unknown problem `{other}` (expected quadratic or softmax_l2)"),
            )),
        }
    }

    fn optimizer(&self, sec: &Section) -> CliResult<OptimizerSpec> {
        let kind: OptimizerKind = self.require(sec, "kind", |s| s.parse().map_err(|e| format!("{e}")))?;
        if !matches!(kind, OptimizerKind::AdaBound) {
            self.forbid(sec, &["final_lr", "gamma"], kind.name())?;
        }
        let mut hp = HyperParams::defaults_for(kind);
        let alphas = self.get(sec, "alpha", alpha_grid)?.unwrap_or_else(|| vec![hp.alpha]);
        if let Some(v) = self.get(sec, "beta1", finite_f64)? {
            hp.beta1 = v;
        }
        if let Some(v) = self.get(sec, "lambda", finite_f64)? {
            hp.lambda = v;
        }
        if let Some(v) = self.get(sec, "beta2", beta2_schedule)? {
            hp.beta2 = v;
        }
        if let Some(v) = self.get(sec, "delta", finite_f64)? {
            hp.delta = v;
        }
        if let Some(v) = self.get(sec, "epsilon", finite_f64)? {
            hp.epsilon = v;
        }
        if let Some(v) = self.get(sec, "schedule", step_schedule)? {
            hp.schedule = v;
        }
        if let Some(v) = self.get(sec, "final_lr", finite_f64)? {
            hp.bound_final_lr = v;
        }
        if let Some(v) = self.get(sec, "gamma", finite_f64)? {
            hp.bound_gamma = v;
        }
        for &a in &alphas {
            if let Err(e) = hp.with_alpha(a).validate(kind) {
                let line = field_line(sec, &e.to_string()).unwrap_or(sec.line);
                return Err(self.syntax(line, format!("[optimizer] {}: {e}", kind.name())));
            }
        }
        Ok(OptimizerSpec { kind, hp, alphas })
    }

    fn run(&self, sec: &Section) -> CliResult<RunSpec> {
        let horizon = self.require(sec, "horizon", parse_u64)?;
        if horizon == 0 {
            return Err(self.syntax(sec.entries["horizon"].line, "run.horizon must be at least 1, got 0"));
        }
        let lower = self.get(sec, "lower", finite_f64)?.unwrap_or(-10.0);
        let upper = self.get(sec, "upper", finite_f64)?.unwrap_or(10.0);
        if !(lower < upper) {
            return Err(self.syntax(sec.line, format!("run.lower ({lower}) must be below run.upper ({upper})")));
        }
        let checkpoints = self.get(sec, "checkpoints", checkpoint_policy)?.unwrap_or(CheckpointPolicy::Grid);
        if let CheckpointPolicy::List(list) = &checkpoints {
            if let Some(&c) = list.iter().find(|&&c| c > horizon) {
                return Err(self.syntax(
                    sec.entries["checkpoints"].line,
                    format!("run.checkpoints: {c} exceeds the horizon {horizon}"),
                ));
            }
        }
        Ok(RunSpec {
            horizon,
            seed: self.get(sec, "seed", parse_u64)?.unwrap_or(1),
            lower,
            upper,
            checkpoints,
            out: self.get(sec, "out", |s| Ok(self.base.join(s)))?,
            retention: self.get(sec, "stride", retention)?.unwrap_or(Retention::Auto),
            r: self.get(sec, "r", positive_f64)?,
        })
    }
}

/// Line of the key a hyperparameter error names, when it names one.
fn field_line(sec: &Section, message: &str) -> Option<usize> {
    let field = message.split('`').nth(1)?;
    let key = match field {
        "beta2" => "beta2",
        "bound_final_lr" => "final_lr",
        "bound_gamma" => "gamma",
        other => other,
    };
    sec.entries.get(key).map(|e| e.line)
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

fn finite_f64(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v = finite_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn nonneg_f64(s: &str) -> Result<f64, String> {
    let v = finite_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be nonnegative, got {v}"))
    }
}

fn parse_u64(s: &str) -> Result<u64, String> {
    s.parse::<u64>().map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("`{s}` is not a positive integer")),
    }
}

fn alpha_grid(s: &str) -> Result<Vec<f64>, String> {
    let grid = s.split(',').map(|f| positive_f64(f.trim())).collect::<Result<Vec<_>, _>>()?;
    for (i, a) in grid.iter().enumerate() {
        if grid[..i].contains(a) {
            return Err(format!("alpha {a} is listed twice"));
        }
    }
    Ok(grid)
}

/// `0.999` for a constant rate, `1 - 0.9/t` for the decaying schedule.
fn beta2_schedule(s: &str) -> Result<Beta2Schedule, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(c) = compact.strip_prefix("1-").and_then(|r| r.strip_suffix("/t")) {
        return Ok(Beta2Schedule::SAdam { c: finite_f64(c)? });
    }
    finite_f64(&compact).map(Beta2Schedule::Constant).map_err(|_| {
        format!("`{s}` is neither a constant nor of the form `1 - c/t`")
    })
}

fn step_schedule(s: &str) -> Result<StepSchedule, String> {
    match s {
        "inverse_t" => Ok(StepSchedule::InverseT),
        "inverse_sqrt_t" => Ok(StepSchedule::InverseSqrtT),
        "constant" => Ok(StepSchedule::Constant),
        _ => Err(format!("unknown schedule `{s}` (expected inverse_t, inverse_sqrt_t or constant)")),
    }
}

fn checkpoint_policy(s: &str) -> Result<CheckpointPolicy, String> {
    if s == "grid" {
        return Ok(CheckpointPolicy::Grid);
    }
    let list = s
        .split(',')
        .map(|f| match f.trim().parse::<u64>() {
            Ok(0) | Err(_) => Err(format!("`{}` is not a positive round number", f.trim())),
            Ok(v) => Ok(v),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if list.windows(2).any(|w| w[1] <= w[0]) {
        return Err("checkpoints must be strictly increasing".into());
    }
    Ok(CheckpointPolicy::List(list))
}

fn retention(s: &str) -> Result<Retention, String> {
    match s {
        "auto" => Ok(Retention::Auto),
        "dense" => Ok(Retention::Dense),
        _ => match s.parse::<u64>() {
            Ok(k) if k >= 1 => Ok(Retention::Stride(k)),
            _ => Err(format!("`{s}` is not auto, dense or a positive stride")),
        },
    }
}
