use std::fmt::Write as _;
use std::fs;
use std::io::{IsTerminal, Write as _};
use std::path::{Path, PathBuf};

use fastbelief_core::optim::{FeasibleRegion, HyperParams, OptimizerKind};
use fastbelief_core::problems::{HindsightAggregate, ProblemInstance};
use fastbelief_core::regret::{
    check_condition3, compute_regret, measure_constants_at, probe_table, region_scenarios, run_online,
    solve_hindsight, theoretical_bound, BoundConstants, ConditionReport, HindsightOptions, RRule, Retention,
    RunOptions, TrajectoryTrace, PROBE_COLUMNS,
};
use fastbelief_core::Error as CoreError;
use rayon::prelude::*;

use crate::config::{parse_config, ExperimentConfig};
use crate::error::{CliError, CliResult, ExitStatus};
use crate::svg::{line_chart, Series};
use crate::trace_csv::{self, fmt_f64, TraceRow};

/// Rounds at which `probe` tabulates the stepsizes.
pub const PROBE_ROUNDS: [u64; 3] = [10, 100, 1000];
pub const PROBE_ALPHA: f64 = 0.01;
pub const PROBE_DELTA: f64 = 0.1;

const BAND_SLACK: f64 = 1e-12;

/// How `compare` picks each optimizer's stepsize from its grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectAlpha {
    /// Full objective at the final iterate.
    #[default]
    FinalLoss,
    /// `R(T)` against the best fixed decision in hindsight.
    FinalRegret,
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub select: SelectAlpha,
    pub trace: Option<PathBuf>,
    pub r: Option<f64>,
}

impl Options {
    fn load(&self, command: &str) -> CliResult<ExperimentConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("`{command}` requires --config PATH")))?;
        let mut cfg = parse_config(path)?;
        if let Some(seed) = self.seed {
            cfg.run.seed = seed;
        }
        Ok(cfg)
    }

    fn out_dir(&self, cfg: Option<&ExperimentConfig>) -> CliResult<PathBuf> {
        let dir = self
            .out
            .clone()
            .or_else(|| cfg.and_then(|c| c.run.out.clone()))
            .unwrap_or_else(|| PathBuf::from("out"));
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(dir)
    }
}

/// Line-oriented standard output. Each line is written under the stdout
/// lock, so concurrent cells never interleave within a line.
#[derive(Debug, Clone, Copy)]
pub struct Console {
    color: bool,
}

impl Console {
    pub fn detect() -> Self {
        let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
        Console { color: !no_color && std::io::stdout().is_terminal() }
    }

    pub fn line(&self, text: &str) {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{text}");
    }

    fn verdict(&self, pass: bool) -> String {
        let (word, code) = if pass { ("PASS", "32") } else { ("FAIL", "31") };
        if self.color {
            format!("\x1b[{code}m{word}\x1b[0m")
        } else {
            word.to_string()
        }
    }
}

pub fn trace_file_name(kind: OptimizerKind, alpha: f64) -> String {
    format!("trace_{}_{}.csv", kind.name(), alpha)
}

struct Prepared {
    cfg: ExperimentConfig,
    problem: ProblemInstance,
    region: FeasibleRegion,
}

fn prepare(opts: &Options, command: &str) -> CliResult<Prepared> {
    let cfg = opts.load(command)?;
    let problem = cfg.build_problem()?;
    let region = cfg.region(problem.dim())?;
    Ok(Prepared { cfg, problem, region })
}

impl Prepared {
    fn trajectory(&self, kind: OptimizerKind, hp: &HyperParams, retention: Retention) -> CliResult<TrajectoryTrace> {
        let opts = RunOptions { x0: None, retention };
        Ok(run_online(&self.problem, kind, hp, &self.region, self.cfg.run.horizon, self.cfg.run.seed, &opts)?)
    }

    /// Checkpoints with the horizon appended when the policy omits it.
    fn checkpoints_to_horizon(&self) -> CliResult<Vec<u64>> {
        let mut cps = self.cfg.checkpoints()?;
        if cps.last() != Some(&self.cfg.run.horizon) {
            cps.push(self.cfg.run.horizon);
        }
        Ok(cps)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"))
}

/// `run`: one trajectory, its trace file and a one-line summary.
pub fn cmd_run(opts: &Options, console: &Console) -> CliResult<ExitStatus> {
    reject_extra(opts, "run")?;
    let p = prepare(opts, "run")?;
    let (kind, hp) = p.cfg.single_cell("run")?;
    let out = opts.out_dir(Some(&p.cfg))?;
    let trace = p.trajectory(kind, &hp, p.cfg.run.retention)?;
    let path = out.join(trace_file_name(kind, hp.alpha));
    trace_csv::write(&path, &trace_csv::rows_from_trace(&trace))?;

    let cps = p.checkpoints_to_horizon()?;
    let report = compute_regret(&trace, &p.problem, &p.region, &cps, &HindsightOptions::default())?;
    let final_loss = p.problem.objective(&trace.final_x)?;
    console.line(&format!(
        "run optimizer={} alpha={} horizon={} final_loss={} regret={} log_r2={} sqrt_r2={} trace={}",
        kind.name(),
        hp.alpha,
        trace.horizon(),
        fmt_f64(final_loss),
        fmt_f64(*report.regret.last().unwrap_or(&f64::NAN)),
        fmt_opt(report.log_fit.map(|f| f.r_squared)),
        fmt_opt(report.sqrt_fit.map(|f| f.r_squared)),
        path.display()
    ));
    Ok(ExitStatus::Success)
}

/// Outcome of one sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub group: usize,
    pub kind: OptimizerKind,
    pub alpha: f64,
    /// `None` when the trajectory hit a numeric failure.
    pub final_loss: Option<f64>,
    pub final_regret: Option<f64>,
}

impl CellSummary {
    fn score(&self, select: SelectAlpha) -> Option<f64> {
        match select {
            SelectAlpha::FinalLoss => self.final_loss,
            SelectAlpha::FinalRegret => self.final_regret,
        }
    }
}

/// Index of the best cell of each optimizer group. Ties keep the earlier
/// grid entry; a group whose cells all failed yields `None`.
pub fn select_best(cells: &[CellSummary], groups: usize, select: SelectAlpha) -> Vec<Option<usize>> {
    (0..groups)
        .map(|g| {
            let mut best: Option<(usize, f64)> = None;
            for (i, c) in cells.iter().enumerate().filter(|(_, c)| c.group == g) {
                if let Some(v) = c.score(select).filter(|v| v.is_finite()) {
                    if best.is_none_or(|(_, b)| v < b) {
                        best = Some((i, v));
                    }
                }
            }
            best.map(|(i, _)| i)
        })
        .collect()
}

/// `compare`: every (optimizer, alpha) cell, the best alpha per optimizer,
/// and the combined CSV and chart.
pub fn cmd_compare(opts: &Options, console: &Console) -> CliResult<ExitStatus> {
    reject_extra(opts, "compare")?;
    let p = prepare(opts, "compare")?;
    let names: Vec<&str> = p.cfg.optimizers.iter().map(|o| o.kind.name()).collect();
    if let Some((i, n)) = names.iter().enumerate().find(|(i, n)| names[..*i].contains(n)) {
        return Err(CliError::ConfigInvalid {
            path: p.cfg.path.display().to_string(),
            message: format!("optimizer `{n}` appears in more than one section (section {})", i + 1),
        });
    }
    let out = opts.out_dir(Some(&p.cfg))?;
    let horizon = p.cfg.run.horizon;

    let agg = HindsightAggregate::with_rounds(&p.problem, p.cfg.run.seed, horizon)?;
    let start = p.region.clip(&vec![0.0; p.region.dim()]);
    let best_fixed = solve_hindsight(&agg, &p.region, &start, &HindsightOptions::default())?.value;

    let jobs: Vec<(usize, OptimizerKind, HyperParams)> = p
        .cfg
        .optimizers
        .iter()
        .enumerate()
        .flat_map(|(g, o)| o.cells().map(move |(k, hp)| (g, k, hp)))
        .collect();
    let results: Vec<CliResult<(CellSummary, Option<Vec<TraceRow>>)>> = jobs
        .par_iter()
        .map(|&(group, kind, hp)| {
            let mut summary = CellSummary { group, kind, alpha: hp.alpha, final_loss: None, final_regret: None };
            match p.trajectory(kind, &hp, Retention::Stride(horizon)) {
                Ok(trace) => {
                    let rows = trace_csv::rows_from_trace(&trace);
                    trace_csv::write(&out.join(trace_file_name(kind, hp.alpha)), &rows)?;
                    let loss = p.problem.objective(&trace.final_x)?;
                    let cum = trace.records.last().map_or(f64::NAN, |r| r.cum_loss);
                    summary.final_loss = Some(loss);
                    summary.final_regret = Some(cum - best_fixed);
                    console.line(&format!(
                        "cell optimizer={} alpha={} final_loss={} final_regret={}",
                        kind.name(),
                        hp.alpha,
                        fmt_f64(loss),
                        fmt_f64(cum - best_fixed)
                    ));
                    Ok((summary, Some(rows)))
                }
                Err(CliError::Core(e @ CoreError::NumericFailure { .. })) => {
                    console.line(&format!("cell optimizer={} alpha={} failed: {e}", kind.name(), hp.alpha));
                    Ok((summary, None))
                }
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut cells = Vec::with_capacity(results.len());
    let mut traces = Vec::with_capacity(results.len());
    for r in results {
        let (c, rows) = r?;
        cells.push(c);
        traces.push(rows);
    }

    let best = select_best(&cells, p.cfg.optimizers.len(), opts.select);
    let mut cells_csv = String::from("optimizer,alpha,final_loss,final_regret,selected\n");
    for (i, c) in cells.iter().enumerate() {
        let _ = writeln!(
            cells_csv,
            "{},{},{},{},{}",
            c.kind.name(),
            c.alpha,
            c.final_loss.map_or_else(|| "failed".into(), fmt_f64),
            c.final_regret.map_or_else(|| "failed".into(), fmt_f64),
            u8::from(best[c.group] == Some(i))
        );
    }
    write_file(&out.join("cells.csv"), &cells_csv)?;

    let mut long = String::from("optimizer,t,loss\n");
    let mut series = Vec::new();
    let mut failed = Vec::new();
    for (g, choice) in best.iter().enumerate() {
        let Some(i) = *choice else {
            failed.push(names[g]);
            continue;
        };
        let rows = traces[i].as_ref().expect("selected cells have traces");
        for r in rows {
            let _ = writeln!(long, "{},{},{}", names[g], r.t, fmt_f64(r.loss));
        }
        series.push(Series {
            name: format!("{} (alpha={})", names[g], cells[i].alpha),
            points: rows.iter().map(|r| (r.t, r.loss)).collect(),
        });
        console.line(&format!(
            "best optimizer={} alpha={} final_loss={} final_regret={}",
            names[g],
            cells[i].alpha,
            fmt_f64(cells[i].final_loss.unwrap_or(f64::NAN)),
            fmt_f64(cells[i].final_regret.unwrap_or(f64::NAN))
        ));
    }
    write_file(&out.join("compare.csv"), &long)?;
    let title = format!("{} loss per round, best alpha per optimizer", p.problem.kind_name());
    write_file(&out.join("compare.svg"), &line_chart(&title, &series))?;
    if !failed.is_empty() {
        return Err(CliError::Core(CoreError::NumericFailure {
            step: 0,
            what: format!("every grid cell failed for {}", failed.join(", ")),
        }));
    }
    Ok(ExitStatus::Success)
}

/// Condition verdicts of `check`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckSummary {
    pub cond4_upper: f64,
    pub cond4_min: f64,
    pub cond4_max: f64,
    pub cond4_first_violation: Option<u64>,
    pub gamma_min: f64,
    pub gamma_first_violation: Option<u64>,
    pub cond3_zeta: f64,
}

impl CheckSummary {
    pub fn cond4_pass(&self) -> bool {
        self.cond4_first_violation.is_none()
    }

    pub fn gamma_pass(&self) -> bool {
        self.gamma_first_violation.is_none()
    }

    pub fn cond3_pass(&self) -> bool {
        self.cond3_zeta.is_finite()
    }

    pub fn pass(&self) -> bool {
        self.cond4_pass() && self.gamma_pass() && self.cond3_pass()
    }
}

/// Band and PSD verdicts from the per-round trace columns.
pub fn summarize_rows(rows: &[TraceRow], upper: f64, cond3_zeta: f64) -> CheckSummary {
    let mut s = CheckSummary {
        cond4_upper: upper,
        cond4_min: f64::INFINITY,
        cond4_max: f64::NEG_INFINITY,
        cond4_first_violation: None,
        gamma_min: f64::INFINITY,
        gamma_first_violation: None,
        cond3_zeta,
    };
    for r in rows {
        s.cond4_min = s.cond4_min.min(r.cond4_min);
        s.cond4_max = s.cond4_max.max(r.cond4_max);
        if s.cond4_first_violation.is_none() && !(r.cond4_min >= 0.0 && r.cond4_max <= upper + BAND_SLACK) {
            s.cond4_first_violation = Some(r.t);
        }
        s.gamma_min = s.gamma_min.min(r.gamma_min);
        if s.gamma_first_violation.is_none() && !(r.gamma_min >= 0.0) {
            s.gamma_first_violation = Some(r.t);
        }
    }
    s
}

/// `check`: conditions of one trajectory, read from `--trace` when given
/// and otherwise computed from a dense rerun of the config.
pub fn cmd_check(opts: &Options, console: &Console) -> CliResult<ExitStatus> {
    if opts.r.is_some() {
        return Err(CliError::Usage("--r applies to `bound` only".into()));
    }
    let p = prepare(opts, "check")?;
    let (kind, hp) = p.cfg.single_cell("check")?;
    let sigma = p.problem.sigma();
    let upper = sigma * (1.0 - hp.beta1);
    let dense = p.trajectory(kind, &hp, Retention::Dense)?;
    let summary = match &opts.trace {
        Some(path) => {
            let rows = trace_csv::read(path)?;
            check_length(path, rows.len(), p.cfg.run.horizon)?;
            summarize_rows(&rows, upper, check_condition3(&dense, &hp)?.zeta_max())
        }
        None => {
            let rep = ConditionReport::evaluate(&dense, &hp, sigma)?;
            let gamma_first_violation = if rep.gamma_pass() {
                None
            } else {
                dense.records.iter().find(|r| !(r.gamma_min >= 0.0)).map(|r| r.t).or(Some(1))
            };
            CheckSummary {
                cond4_upper: rep.cond4.upper,
                cond4_min: rep.cond4.min(),
                cond4_max: rep.cond4.max(),
                cond4_first_violation: rep.cond4.first_violation,
                gamma_min: rep.gamma_min,
                gamma_first_violation,
                cond3_zeta: rep.cond3.zeta_max(),
            }
        }
    };
    let at = |v: Option<u64>| v.map_or_else(|| "none".to_string(), |t| t.to_string());
    console.line(&format!("check optimizer={} alpha={} sigma={}", kind.name(), hp.alpha, sigma));
    console.line(&format!(
        "cond4 band=[0, {}] min={} max={} first_violation={} {}",
        fmt_f64(summary.cond4_upper),
        fmt_f64(summary.cond4_min),
        fmt_f64(summary.cond4_max),
        at(summary.cond4_first_violation),
        console.verdict(summary.cond4_pass())
    ));
    console.line(&format!(
        "gamma min={} first_violation={} {}",
        fmt_f64(summary.gamma_min),
        at(summary.gamma_first_violation),
        console.verdict(summary.gamma_pass())
    ));
    console.line(&format!("cond3 zeta={} {}", fmt_f64(summary.cond3_zeta), console.verdict(summary.cond3_pass())));
    Ok(if summary.pass() { ExitStatus::Success } else { ExitStatus::CheckFailed })
}

fn check_length(path: &Path, rows: usize, horizon: u64) -> CliResult<()> {
    if rows as u64 == horizon {
        Ok(())
    } else {
        Err(CliError::MalformedTrace {
            path: path.display().to_string(),
            line: rows + 1,
            message: format!("{rows} rounds, but the config's horizon is {horizon}"),
        })
    }
}

/// One line of the bound table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub checkpoint: u64,
    pub regret: f64,
    pub bound: f64,
}

impl BoundRow {
    pub fn ratio(&self) -> f64 {
        if self.regret <= 0.0 {
            0.0
        } else {
            self.regret / self.bound
        }
    }
}

/// `bound`: empirical regret against the closed-form bound at every
/// checkpoint, printed as tab-separated values.
pub fn cmd_bound(opts: &Options, console: &Console) -> CliResult<ExitStatus> {
    let p = prepare(opts, "bound")?;
    let (kind, hp) = p.cfg.single_cell("bound")?;
    let probe = BoundConstants {
        d_inf: 1.0,
        g_inf: 0.0,
        r: 1.0,
        r_rule: RRule::Supplied,
        sum_g_norms: 0.0,
        n: 1,
        horizon: 1,
        alpha: hp.alpha,
        beta1: hp.beta1,
        lambda: hp.lambda,
        delta: hp.delta,
    };
    if let Err(e) = theoretical_bound(&probe) {
        return Err(CliError::ConfigInvalid { path: p.cfg.path.display().to_string(), message: e.to_string() });
    }
    let r_override = opts.r.or(p.cfg.run.r);

    let trace = p.trajectory(kind, &hp, Retention::Stride(p.cfg.run.horizon))?;
    let cum: Vec<f64> = match &opts.trace {
        Some(path) => {
            let rows = trace_csv::read(path)?;
            check_length(path, rows.len(), p.cfg.run.horizon)?;
            rows.iter().map(|r| r.cum_loss).collect()
        }
        None => trace.records.iter().map(|r| r.cum_loss).collect(),
    };
    let cps = p.checkpoints_to_horizon()?;
    let report = compute_regret(&trace, &p.problem, &p.region, &cps, &HindsightOptions::default())?;
    let mut rows = Vec::with_capacity(cps.len());
    let mut rule = RRule::Measured;
    for (&c, &best) in cps.iter().zip(&report.hindsight_values) {
        let mut constants = measure_constants_at(&trace, &p.region, &hp, c)?;
        if let Some(r) = r_override {
            constants = constants.with_r(r);
        }
        rule = constants.r_rule;
        rows.push(BoundRow { checkpoint: c, regret: cum[c as usize - 1] - best, bound: theoretical_bound(&constants)? });
    }

    console.line("checkpoint\tregret\tbound\tratio");
    for r in &rows {
        console.line(&format!("{}\t{}\t{}\t{}", r.checkpoint, fmt_f64(r.regret), fmt_f64(r.bound), fmt_f64(r.ratio())));
    }
    let max_ratio = rows.iter().map(BoundRow::ratio).fold(0.0, f64::max);
    console.line(&format!("# r_rule\t{}", rule.describe()));
    console.line(&format!("# max_ratio\t{}", fmt_f64(max_ratio)));
    console.line(&format!("# min_margin\t{}", fmt_f64(1.0 - max_ratio)));
    let pass = rows.iter().all(|r| r.regret <= r.bound);
    console.line(&format!("# bound_dominates\t{}", console.verdict(pass)));
    Ok(if pass { ExitStatus::Success } else { ExitStatus::CheckFailed })
}

/// Header of `probe.csv`.
pub fn probe_header() -> String {
    let mut h = String::from("region,t,m,v,s");
    for c in PROBE_COLUMNS {
        h.push(',');
        h.push_str(c);
    }
    h
}

/// `probe`: stepsize magnitudes of every compared optimizer in each
/// curvature region.
pub fn cmd_probe(opts: &Options, console: &Console) -> CliResult<ExitStatus> {
    if opts.config.is_some() || opts.trace.is_some() || opts.r.is_some() || opts.seed.is_some() {
        return Err(CliError::Usage("`probe` takes only --out".into()));
    }
    let out = opts.out_dir(None)?;
    let scenarios = region_scenarios(*PROBE_ROUNDS.iter().max().unwrap_or(&1) as usize);
    let rows = probe_table(&scenarios, &PROBE_ROUNDS, PROBE_ALPHA, PROBE_DELTA)?;
    let mut csv = probe_header();
    csv.push('\n');
    for r in &rows {
        let _ = write!(csv, "{},{},{},{},{}", r.region, r.t, fmt_f64(r.m), fmt_f64(r.v), fmt_f64(r.s));
        for v in r.steps {
            let _ = write!(csv, ",{}", fmt_f64(v));
        }
        csv.push('\n');
    }
    write_file(&out.join("probe.csv"), &csv)?;

    console.line(&format!("|step| per region, alpha={PROBE_ALPHA}, delta={PROBE_DELTA}"));
    let mut head = format!("{:<7}{:>6}", "region", "t");
    for c in PROBE_COLUMNS {
        let _ = write!(head, "{c:>22}");
    }
    console.line(&head);
    for r in &rows {
        let mut line = format!("{:<7}{:>6}", r.region, r.t);
        for v in r.steps {
            let _ = write!(line, "{v:>22.6e}");
        }
        console.line(&line);
    }
    for sc in &scenarios {
        console.line(&format!("region {}: {}", sc.region, sc.description));
    }
    Ok(ExitStatus::Success)
}

fn reject_extra(opts: &Options, command: &str) -> CliResult<()> {
    if opts.trace.is_some() || opts.r.is_some() {
        return Err(CliError::Usage(format!("--trace and --r do not apply to `{command}`")));
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
