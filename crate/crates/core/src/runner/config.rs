//! Flat `key = value` experiment files.
//!
//! ```text
//! # canonical two-solution run
//! p = 2
//! q = 1.5
//! r = 5
//! lambda = 0.5*lambda0
//! grid.n_nodes = 31
//! ```
//!
//! `#` starts a comment. Every key is optional; missing keys take the values
//! of [`ExperimentConfig::default`]. `lambda`, `sweep.lambda_min` and
//! `sweep.lambda_max` accept a number, a threshold name (`lambda0`,
//! `lambda1`, `lambda2`, `lambda_sup0`, `lambda_sup1`, `lambda_hat0`) or a
//! product of the two such as `0.5*lambda0`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::discretization::WeightSpec;
use crate::error::{Error, Result};
use crate::fiber::ThresholdTable;
use crate::functional::{ProblemParams, Regime};
use crate::solver::ORACLE_MAX_NODES;

/// Every key the loader accepts.
pub const KEYS: [&str; 24] = [
    "a",
    "b",
    "p",
    "q",
    "r",
    "s",
    "lambda",
    "f",
    "g",
    "grid.left",
    "grid.right",
    "grid.n_nodes",
    "mode",
    "sweep.lambda_min",
    "sweep.lambda_max",
    "sweep.count",
    "sweep.log_spacing",
    "output.dir",
    "output.format",
    "seed",
    "restarts",
    "c_star",
    "m0",
    "trunc.k",
];

const THRESHOLD_NAMES: [&str; 6] = [
    "lambda0",
    "lambda1",
    "lambda2",
    "lambda_sup0",
    "lambda_sup1",
    "lambda_hat0",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Thresholds,
    Solve,
    Sweep,
    Oracle,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "thresholds" => Ok(Mode::Thresholds),
            "solve" => Ok(Mode::Solve),
            "sweep" => Ok(Mode::Sweep),
            "oracle" => Ok(Mode::Oracle),
            _ => Err(format!("expected one of thresholds, solve, sweep, oracle, got `{s}`")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Thresholds => "thresholds",
            Mode::Solve => "solve",
            Mode::Sweep => "sweep",
            Mode::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A value of `λ`, either absolute or a multiple of a threshold.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaSpec {
    Value(f64),
    Scaled { factor: f64, threshold: String },
}

impl LambdaSpec {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let text = text.trim();
        if let Ok(v) = text.parse::<f64>() {
            return Ok(LambdaSpec::Value(v));
        }
        let known = |name: &str| THRESHOLD_NAMES.contains(&name);
        let parts: Vec<&str> = text.split('*').map(str::trim).collect();
        let (factor, name) = match parts.as_slice() {
            [name] => (1.0, *name),
            [x, y] => match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(c), Err(_)) => (c, *y),
                (Err(_), Ok(c)) => (c, *x),
                _ => return Err(format!("expected `<number>*<threshold>`, got `{text}`")),
            },
            _ => return Err(format!("expected a number or `<number>*<threshold>`, got `{text}`")),
        };
        if !known(name) {
            return Err(format!(
                "unknown threshold `{name}`; expected one of {}",
                THRESHOLD_NAMES.join(", ")
            ));
        }
        Ok(LambdaSpec::Scaled {
            factor,
            threshold: name.to_string(),
        })
    }

    /// Absolute value, looking the threshold up in `table` when needed.
    pub fn resolve(&self, table: &ThresholdTable) -> Result<f64> {
        match self {
            LambdaSpec::Value(v) => Ok(*v),
            LambdaSpec::Scaled { factor, threshold } => Ok(factor * table.get(threshold)?),
        }
    }

    fn positive(&self) -> bool {
        match self {
            LambdaSpec::Value(v) => *v > 0.0 && v.is_finite(),
            LambdaSpec::Scaled { factor, .. } => *factor > 0.0 && factor.is_finite(),
        }
    }
}

impl fmt::Display for LambdaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaSpec::Value(v) => write!(f, "{v}"),
            LambdaSpec::Scaled { factor, threshold } => write!(f, "{factor}*{threshold}"),
        }
    }
}

impl Serialize for LambdaSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub left: f64,
    pub right: f64,
    pub n_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub lambda_min: LambdaSpec,
    pub lambda_max: LambdaSpec,
    pub count: usize,
    pub log_spacing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambda_min: LambdaSpec::Scaled {
                factor: 0.1,
                threshold: "lambda0".into(),
            },
            lambda_max: LambdaSpec::Scaled {
                factor: 0.9,
                threshold: "lambda0".into(),
            },
            count: 5,
            log_spacing: false,
        }
    }
}

impl SweepConfig {
    /// The `count` values of `λ`, in increasing order.
    pub fn lambdas(&self, table: &ThresholdTable) -> Result<Vec<f64>> {
        let lo = self.lambda_min.resolve(table)?;
        let hi = self.lambda_max.resolve(table)?;
        if !(lo > 0.0 && lo <= hi) {
            return Err(Error::Validation(vec![format!(
                "sweep: requires 0 < lambda_min <= lambda_max, got {lo} and {hi}"
            )]));
        }
        let n = self.count;
        if n == 1 {
            return Ok(vec![lo]);
        }
        let at = |i: usize| {
            let t = i as f64 / (n - 1) as f64;
            if self.log_spacing {
                (lo.ln() + t * (hi.ln() - lo.ln())).exp()
            } else {
                lo + t * (hi - lo)
            }
        };
        // pin the endpoints so rounding cannot push them outside [lo, hi]
        Ok((0..n)
            .map(|i| match i {
                0 => lo,
                _ if i == n - 1 => hi,
                _ => at(i),
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// Problem data; `params.lambda` is only meaningful when `lambda` is a
    /// plain value. Use [`LambdaSpec::resolve`].
    pub params: ProblemParams,
    pub lambda: LambdaSpec,
    pub grid: GridConfig,
    pub mode: Mode,
    /// Present iff `mode` is sweep.
    pub sweep: Option<SweepConfig>,
    pub output: OutputConfig,
    pub seed: u64,
    pub restarts: usize,
    pub trunc_k: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let one = WeightSpec::parse("1").expect("constant weight parses");
        Self {
            params: ProblemParams::new(1.0, 1.0, 2.0, 1.5, 5.0, 0.4, 1.0, one.clone(), one),
            lambda: LambdaSpec::Scaled {
                factor: 0.5,
                threshold: "lambda0".into(),
            },
            grid: GridConfig {
                left: -1.0,
                right: 1.0,
                n_nodes: 31,
            },
            mode: Mode::Solve,
            sweep: None,
            output: OutputConfig {
                dir: PathBuf::from("out"),
                format: OutputFormat::Csv,
            },
            seed: 42,
            restarts: 16,
            trunc_k: None,
        }
    }
}

impl ExperimentConfig {
    pub fn regime(&self) -> Regime {
        self.params.regime()
    }
}

/// Split a document into its key/value map. Syntax problems are pushed onto
/// `errors` and the offending line skipped.
fn parse_document(text: &str, errors: &mut Vec<String>) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(format!("line {}: expected `key = value`, got `{line}`", n + 1));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            errors.push(format!("line {}: unknown key `{key}`", n + 1));
            continue;
        }
        if value.is_empty() {
            errors.push(format!("{key}: empty value"));
            continue;
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            errors.push(format!("{key}: given more than once"));
        }
    }
    map
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("expected true or false, got `{s}`")),
    }
}

/// Typed access to the raw map that records every failure.
struct Fields<'a> {
    map: &'a BTreeMap<String, String>,
    errors: Vec<String>,
}

impl Fields<'_> {
    fn get<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> std::result::Result<T, String>) -> T {
        match self.map.get(key) {
            None => default,
            Some(v) => parse(v).unwrap_or_else(|e| {
                self.errors.push(format!("{key}: {e}"));
                default
            }),
        }
    }

    fn num<T: FromStr>(&mut self, key: &str, default: T) -> T
    where
        T::Err: fmt::Display,
    {
        self.get(key, default, |s| s.parse::<T>().map_err(|e| format!("{e} (`{s}`)")))
    }
}

/// Build and validate a configuration from a key/value map.
pub fn config_from_map(map: &BTreeMap<String, String>) -> Result<ExperimentConfig> {
    let d = ExperimentConfig::default();
    let mut fx = Fields {
        map,
        errors: Vec::new(),
    };

    let a = fx.num("a", d.params.a);
    let b = fx.num("b", d.params.b);
    let p = fx.num("p", d.params.p);
    let q = fx.num("q", d.params.q);
    let r = fx.num("r", d.params.r);
    let s = fx.num("s", d.params.s);
    let lambda = fx.get("lambda", d.lambda.clone(), LambdaSpec::parse);
    let weight = |s: &str| WeightSpec::parse(s).map_err(|e| e.to_string());
    let f = fx.get("f", d.params.f.clone(), weight);
    let g = fx.get("g", d.params.g.clone(), weight);
    let c_star = fx.num("c_star", d.params.c_star);
    let m0 = fx.num("m0", a);
    let grid = GridConfig {
        left: fx.num("grid.left", d.grid.left),
        right: fx.num("grid.right", d.grid.right),
        n_nodes: fx.num("grid.n_nodes", d.grid.n_nodes),
    };
    let mode = fx.get("mode", d.mode, Mode::from_str);
    let sd = SweepConfig::default();
    let sweep_keys: Vec<&str> = KEYS
        .iter()
        .copied()
        .filter(|k| k.starts_with("sweep.") && map.contains_key(*k))
        .collect();
    let sweep = SweepConfig {
        lambda_min: fx.get("sweep.lambda_min", sd.lambda_min, LambdaSpec::parse),
        lambda_max: fx.get("sweep.lambda_max", sd.lambda_max, LambdaSpec::parse),
        count: fx.num("sweep.count", sd.count),
        log_spacing: fx.get("sweep.log_spacing", sd.log_spacing, parse_bool),
    };
    let output = OutputConfig {
        dir: map.get("output.dir").map(PathBuf::from).unwrap_or(d.output.dir),
        format: fx.get("output.format", d.output.format, |s| match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("expected csv or json, got `{s}`")),
        }),
    };
    let seed = fx.num("seed", d.seed);
    let restarts = fx.num("restarts", d.restarts);
    let trunc_k = map.contains_key("trunc.k").then(|| fx.num("trunc.k", f64::NAN));

    let mut errors = fx.errors;
    let mut params = ProblemParams::new(a, b, p, q, r, s, 1.0, f, g);
    params.c_star = c_star;
    params.m0 = m0;
    if let LambdaSpec::Value(v) = lambda {
        params.lambda = v;
    }
    errors.extend(params.violations());
    if !lambda.positive() {
        errors.push(format!("lambda: requires lambda > 0, got {lambda}"));
    }

    if !(grid.left.is_finite() && grid.right.is_finite() && grid.left < grid.right) {
        errors.push(format!(
            "grid.left: requires grid.left < grid.right, got {} and {}",
            grid.left, grid.right
        ));
    }
    if grid.n_nodes < 2 {
        errors.push(format!("grid.n_nodes: requires at least 2, got {}", grid.n_nodes));
    }
    if mode == Mode::Oracle && grid.n_nodes > ORACLE_MAX_NODES {
        errors.push(format!(
            "grid.n_nodes: oracle mode allows at most {ORACLE_MAX_NODES} nodes, got {}",
            grid.n_nodes
        ));
    }
    if restarts == 0 {
        errors.push("restarts: requires at least 1".into());
    }

    let sweep = if mode == Mode::Sweep {
        if sweep.count == 0 {
            errors.push("sweep.count: requires at least 1".into());
        }
        for (key, spec) in [("sweep.lambda_min", &sweep.lambda_min), ("sweep.lambda_max", &sweep.lambda_max)] {
            if !spec.positive() {
                errors.push(format!("{key}: requires a positive value, got {spec}"));
            }
        }
        if let (LambdaSpec::Value(lo), LambdaSpec::Value(hi)) = (&sweep.lambda_min, &sweep.lambda_max) {
            if lo > hi {
                errors.push(format!(
                    "sweep.lambda_min: requires lambda_min <= lambda_max, got {lo} > {hi}"
                ));
            }
        }
        Some(sweep)
    } else {
        for key in sweep_keys {
            errors.push(format!("{key}: only allowed with mode = sweep, mode is {mode}"));
        }
        None
    };

    if let Some(k) = trunc_k {
        if errors.is_empty() {
            if params.regime() != Regime::RLt2p {
                errors.push(format!(
                    "trunc.k: only used when p < r < 2p, regime is {}",
                    params.regime()
                ));
            } else {
                let (lo, hi) = params.truncation_interval();
                if !(k > lo && k < hi) {
                    errors.push(format!("trunc.k: requires {lo} < k < {hi}, got {k}"));
                }
            }
        }
    }

    if !errors.is_empty() {
        return Err(Error::Validation(errors));
    }
    Ok(ExperimentConfig {
        params,
        lambda,
        grid,
        mode,
        sweep,
        output,
        seed,
        restarts,
        trunc_k,
    })
}

/// Parse and validate a configuration document held in memory.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_with(text, &[])
}

/// Like [`parse_config`], with `overrides` replacing keys of the document.
pub fn parse_config_with(text: &str, overrides: &[(&str, String)]) -> Result<ExperimentConfig> {
    let mut errors = Vec::new();
    let mut map = parse_document(text, &mut errors);
    for (k, v) in overrides {
        if KEYS.contains(k) {
            map.insert(k.to_string(), v.clone());
        } else {
            errors.push(format!("unknown override key `{k}`"));
        }
    }
    match config_from_map(&map) {
        Ok(cfg) if errors.is_empty() => Ok(cfg),
        Ok(_) => Err(Error::Validation(errors)),
        Err(Error::Validation(more)) => {
            errors.extend(more);
            Err(Error::Validation(errors))
        }
        Err(e) => Err(e),
    }
}

/// Read, parse and validate a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    load_config_with(path, &[])
}

/// Like [`load_config`], with `overrides` replacing keys of the file.
pub fn load_config_with(path: impl AsRef<Path>, overrides: &[(&str, String)]) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config_with(&text, overrides)
}
