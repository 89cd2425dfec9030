//! Batch runs driven by an [`ExperimentConfig`].
//!
//! Output files, all in `output.dir`:
//!
//! | mode       | csv                                         | json           |
//! |------------|---------------------------------------------|----------------|
//! | thresholds | `thresholds.csv`                            | `thresholds.json` |
//! | solve      | `solutions.csv`, `profile_plus.csv`, `profile_minus.csv` | `report.json` and the profiles |
//! | sweep      | `sweep.csv`                                 | `sweep.json`   |
//! | oracle     | `oracle.csv`                                | `oracle.json`  |
//!
//! Every run also writes `manifest.json`, including failed ones.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    config_from_map, load_config, load_config_with, parse_config, parse_config_with, ExperimentConfig,
    GridConfig, LambdaSpec, Mode, OutputConfig, OutputFormat, SweepConfig, KEYS,
};

use crate::discretization::EmbeddingOptions;
use crate::error::{Error, Result};
use crate::fiber::{compute_thresholds, Branch, ThresholdOptions, ThresholdTable};
use crate::functional::{Problem, Regime};
use crate::solver::{
    brute_force_oracle, solve_with_thresholds, BranchOutcome, OracleOptions, SolveReport, SolverOptions,
};

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub class: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub regime: Regime,
    /// `λ` of solve and oracle runs, after resolving threshold references.
    pub lambda: Option<f64>,
    pub thresholds: Option<ThresholdTable>,
    pub wall_time_s: f64,
    pub flags: Vec<String>,
    /// Files written, relative to the output directory, in write order.
    pub files: Vec<String>,
    /// `ok` or `failed`; a failed run may have left partial outputs.
    pub status: &'static str,
    pub error: Option<ErrorInfo>,
}

/// One row of the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub theta_plus: Option<f64>,
    pub theta_minus: Option<f64>,
    pub norm_plus: Option<f64>,
    pub norm_minus: Option<f64>,
    pub residual_plus: Option<f64>,
    pub residual_minus: Option<f64>,
    /// `;`-separated.
    pub flags: String,
}

/// Solver against brute-force scan at one `λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub n_nodes: usize,
    pub lambda: f64,
    pub theta_plus_solver: Option<f64>,
    pub theta_plus_oracle: Option<f64>,
    pub delta_plus: Option<f64>,
    pub theta_minus_solver: Option<f64>,
    pub theta_minus_oracle: Option<f64>,
    pub delta_minus: Option<f64>,
    pub directions: usize,
}

/// Per-branch summary written by solve runs in csv format.
#[derive(Debug, Clone, PartialEq, Serialize)]
struct SolutionRow {
    branch: Branch,
    lambda: f64,
    theta: f64,
    norm: f64,
    residual: f64,
    second_derivative: f64,
    fiber_residual: f64,
    converged: bool,
    restart: usize,
}

/// Outcome of [`run`]; artifacts are already on disk.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub dir: PathBuf,
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Writer<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        let path = self.path(name);
        fs::write(&path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let path = self.path(name);
        let io = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        for row in rows {
            w.serialize(row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    /// `x,u` with the two boundary zeros.
    fn profile(&mut self, name: &str, out: &BranchOutcome) -> Result<()> {
        let u = &out.point.u;
        let g = u.grid();
        let mut rows = vec![(g.left(), 0.0)];
        rows.extend(g.nodes().zip(u.values().iter().copied()));
        rows.push((g.right(), 0.0));
        let path = self.path(name);
        let io = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(["x", "u"]).map_err(io)?;
        for (x, v) in rows {
            w.serialize((x, v)).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

fn solver_options(cfg: &ExperimentConfig) -> SolverOptions {
    SolverOptions {
        restarts: cfg.restarts,
        seed: cfg.seed,
        ..SolverOptions::default()
    }
}

fn threshold_options(cfg: &ExperimentConfig) -> ThresholdOptions {
    ThresholdOptions {
        embedding: EmbeddingOptions {
            seed: cfg.seed,
            ..EmbeddingOptions::default()
        },
        trunc_k: cfg.trunc_k,
        ..ThresholdOptions::default()
    }
}

fn build_problem(cfg: &ExperimentConfig) -> Result<Problem> {
    // λ is set later; any positive value builds the grid and weights
    let params = cfg.params.with_lambda(1.0);
    Problem::new(params, cfg.grid.left, cfg.grid.right, cfg.grid.n_nodes)
}

/// Re-check the Nehari invariants of every branch before it is written.
fn revalidate(report: &SolveReport) -> Result<()> {
    for out in [&report.plus, &report.minus].into_iter().flatten() {
        out.point.validate()?;
        if !out.point.weak_residual.is_finite() || !out.point.energy.is_finite() {
            return Err(Error::InvariantViolation(format!(
                "{} solution has non-finite energy or residual",
                out.point.branch
            )));
        }
    }
    Ok(())
}

fn norm(out: &Option<BranchOutcome>, p: f64) -> Option<f64> {
    out.as_ref().map(|o| o.point.seminorm_p.powf(1.0 / p))
}

fn sweep_row(report: &SolveReport, p: f64) -> SweepRow {
    SweepRow {
        lambda: report.lambda,
        theta_plus: report.theta_plus,
        theta_minus: report.theta_minus,
        norm_plus: norm(&report.plus, p),
        norm_minus: norm(&report.minus, p),
        residual_plus: report.plus.as_ref().map(|o| o.point.weak_residual),
        residual_minus: report.minus.as_ref().map(|o| o.point.weak_residual),
        flags: report.flags.join(";"),
    }
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    writer: Writer<'a>,
    lambda: Option<f64>,
    table: Option<ThresholdTable>,
    flags: Vec<String>,
}

impl Run<'_> {
    fn thresholds(&mut self, problem: &Problem) -> Result<ThresholdTable> {
        let table = compute_thresholds(problem, &threshold_options(self.cfg))?;
        self.table = Some(table.clone());
        Ok(table)
    }

    fn solve_at(&self, problem: &Problem, table: &ThresholdTable, lambda: f64) -> Result<SolveReport> {
        solve_with_thresholds(&problem.with_lambda(lambda)?, table, &solver_options(self.cfg))
    }

    fn execute(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let problem = build_problem(cfg)?;
        let table = self.thresholds(&problem)?;
        let p = cfg.params.p;
        match cfg.mode {
            Mode::Thresholds => {
                if table.lambda0 != table.lambda1.min(table.lambda2) {
                    return Err(Error::InvariantViolation(format!(
                        "lambda0 = {} is not min(lambda1, lambda2) = {}",
                        table.lambda0,
                        table.lambda1.min(table.lambda2)
                    )));
                }
                match cfg.output.format {
                    OutputFormat::Json => self.writer.json("thresholds.json", &table),
                    OutputFormat::Csv => self.writer.csv("thresholds.csv", &threshold_rows(&table)),
                }
            }
            Mode::Solve => {
                let lambda = cfg.lambda.resolve(&table)?;
                self.lambda = Some(lambda);
                let report = self.solve_at(&problem, &table, lambda)?;
                self.flags = report.flags.clone();
                revalidate(&report)?;
                match cfg.output.format {
                    OutputFormat::Json => self.writer.json("report.json", &report)?,
                    OutputFormat::Csv => {
                        let rows: Vec<SolutionRow> = [&report.plus, &report.minus]
                            .into_iter()
                            .flatten()
                            .map(|o| SolutionRow {
                                branch: o.point.branch,
                                lambda,
                                theta: o.point.energy,
                                norm: o.point.seminorm_p.powf(1.0 / p),
                                residual: o.point.weak_residual,
                                second_derivative: o.point.second_deriv,
                                fiber_residual: o.point.fiber_residual,
                                converged: o.converged,
                                restart: o.restart,
                            })
                            .collect();
                        self.writer.csv("solutions.csv", &rows)?;
                    }
                }
                if let Some(o) = &report.plus {
                    self.writer.profile("profile_plus.csv", o)?;
                }
                if let Some(o) = &report.minus {
                    self.writer.profile("profile_minus.csv", o)?;
                }
                if !report.errors.is_empty() && report.plus.is_none() && report.minus.is_none() {
                    return Err(Error::NotAdmissible(report.errors.join("; ")));
                }
                Ok(())
            }
            Mode::Sweep => {
                let sweep = cfg.sweep.as_ref().ok_or_else(|| {
                    Error::Validation(vec!["sweep: mode is sweep but no sweep section".into()])
                })?;
                let lambdas = sweep.lambdas(&table)?;
                let reports: Vec<Result<SolveReport>> = lambdas
                    .par_iter()
                    .map(|&l| self.solve_at(&problem, &table, l))
                    .collect();
                let mut rows = Vec::with_capacity(reports.len());
                let mut flags = Vec::new();
                for rep in reports {
                    let rep = rep?;
                    revalidate(&rep)?;
                    for f in &rep.flags {
                        flags.push(format!("lambda={}:{f}", rep.lambda));
                    }
                    rows.push(sweep_row(&rep, p));
                }
                self.flags = flags;
                match cfg.output.format {
                    OutputFormat::Json => self.writer.json("sweep.json", &rows),
                    OutputFormat::Csv => self.writer.csv("sweep.csv", &rows),
                }
            }
            Mode::Oracle => {
                let lambda = cfg.lambda.resolve(&table)?;
                self.lambda = Some(lambda);
                let report = self.solve_at(&problem, &table, lambda)?;
                self.flags = report.flags.clone();
                revalidate(&report)?;
                let oracle = brute_force_oracle(&problem.with_lambda(lambda)?, &OracleOptions::default())?;
                let delta = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| (a - b).abs());
                let row = OracleRow {
                    n_nodes: cfg.grid.n_nodes,
                    lambda,
                    theta_plus_solver: report.theta_plus,
                    theta_plus_oracle: oracle.theta_plus,
                    delta_plus: delta(report.theta_plus, oracle.theta_plus),
                    theta_minus_solver: report.theta_minus,
                    theta_minus_oracle: oracle.theta_minus,
                    delta_minus: delta(report.theta_minus, oracle.theta_minus),
                    directions: oracle.directions,
                };
                match cfg.output.format {
                    OutputFormat::Json => self.writer.json("oracle.json", &[row]),
                    OutputFormat::Csv => self.writer.csv("oracle.csv", &[row]),
                }
            }
        }
    }
}

#[derive(Serialize)]
struct ThresholdRow {
    name: &'static str,
    value: Option<f64>,
}

fn threshold_rows(t: &ThresholdTable) -> Vec<ThresholdRow> {
    let c = &t.constants;
    let row = |name, value| ThresholdRow { name, value };
    vec![
        row("s_r", Some(c.s_r)),
        row("f_norm", Some(c.f_norm)),
        row("g_sup", Some(c.g_sup)),
        row("lambda1", Some(t.lambda1)),
        row("lambda2", Some(t.lambda2)),
        row("lambda0", Some(t.lambda0)),
        row("capital_lambda", c.capital_lambda),
        row("lambda_sup0", t.lambda_sup0),
        row("lambda_sup1", t.lambda_sup1),
        row("lambda_hat0", t.lambda_hat0),
        row("theta", t.theta),
        row("trunc_k", t.trunc_k),
        row("a_hat", t.a_hat),
        row("l_theta", t.l_theta),
        row("critical_c", t.critical_c),
        row("critical_level_at_zero", t.critical_level_at_zero),
    ]
}

/// Execute the configured mode and write its artifacts and the manifest.
///
/// On failure the manifest is still written, with `status = "failed"` and the
/// error class, and the error is returned.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut state = Run {
        cfg,
        writer: Writer {
            dir: &dir,
            files: Vec::new(),
        },
        lambda: None,
        table: None,
        flags: Vec::new(),
    };
    let result = state.execute();
    let mut files = state.writer.files.clone();
    files.push("manifest.json".into());
    let manifest = Manifest {
        config: cfg.clone(),
        regime: cfg.regime(),
        lambda: state.lambda,
        thresholds: state.table.take(),
        wall_time_s: start.elapsed().as_secs_f64(),
        flags: state.flags.clone(),
        files,
        status: if result.is_ok() { "ok" } else { "failed" },
        error: result.as_ref().err().map(|e| ErrorInfo {
            class: e.class(),
            message: e.to_string(),
        }),
    };
    state.writer.json("manifest.json", &manifest)?;
    result?;
    Ok(RunOutcome { manifest, dir })
}
