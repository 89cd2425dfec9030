//! Multi-start estimates of the embedding constants of the discrete space:
//! the Sobolev constant `S_r = inf ‖u‖ / ‖u‖_{L^r}` and
//! `Λ = inf { ‖u‖^{2p} : ∫ g|u|^{2p} = 1 }`.

use std::sync::Arc;

use rayon::prelude::*;

use super::grid::{DiscreteFunction, GridDomain};
use super::quadrature::{
    abs_pow, seminorm_gradient_values, seminorm_p_values, weighted_gradient, weighted_values,
};
use super::weight::SampledWeight;
use crate::descent::{descend, DescentOptions};
use crate::error::{Error, Result};
use crate::sampling::{positive_direction, restart_rng, smooth_direction};

#[derive(Debug, Clone, Copy)]
pub struct EmbeddingOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Tolerance on `‖x‖·‖∇f(x)‖` for the scale-invariant log objective.
    pub tol: f64,
}

impl Default for EmbeddingOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            seed: 42,
            max_iter: 10_000,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingEstimate {
    /// Best value over all restarts.
    pub value: f64,
    pub minimizer: DiscreteFunction,
    pub converged_restarts: usize,
    pub restarts: usize,
}

/// `‖u‖_{X₀} / ‖u‖_{L^r}`. Infinite for `u ≡ 0`.
pub fn rayleigh_quotient(u: &DiscreteFunction, r: f64) -> f64 {
    let grid = u.grid();
    let sp = seminorm_p_values(grid, u.values());
    let lr = lebesgue_values(grid, u.values(), r);
    if lr == 0.0 {
        return f64::INFINITY;
    }
    sp.powf(1.0 / grid.p()) / lr.powf(1.0 / r)
}

/// `‖u‖^{2p} / ∫ g|u|^{2p}` for admissible `u` (positive denominator).
pub fn capital_lambda_quotient(u: &DiscreteFunction, g: &SampledWeight) -> Option<f64> {
    let grid = u.grid();
    let p = grid.p();
    let den = weighted_values(grid, g.values(), u.values(), 2.0 * p);
    if den > 0.0 {
        let sp = seminorm_p_values(grid, u.values());
        Some(sp * sp / den)
    } else {
        None
    }
}

/// Rescale `u` so that `∫ g|ũ|^{2p} = 1`; `None` if `u` is not admissible.
pub fn normalize_to_constraint(u: &DiscreteFunction, g: &SampledWeight) -> Option<DiscreteFunction> {
    let grid = u.grid();
    let e = 2.0 * grid.p();
    let den = weighted_values(grid, g.values(), u.values(), e);
    if den > 0.0 && den.is_finite() {
        Some(u.scaled(den.powf(-1.0 / e)))
    } else {
        None
    }
}

fn lebesgue_values(grid: &GridDomain, u: &[f64], r: f64) -> f64 {
    u.iter()
        .enumerate()
        .map(|(i, &v)| grid.cell_width(i) * abs_pow(v, r))
        .sum()
}

fn unit(v: Vec<f64>) -> Option<Vec<f64>> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n > 0.0 && n.is_finite() {
        Some(v.into_iter().map(|a| a / n).collect())
    } else {
        None
    }
}

fn scale_invariant_stationarity(x: &[f64], g: &[f64]) -> f64 {
    let xn = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let gn = g.iter().map(|a| a * a).sum::<f64>().sqrt();
    xn * gn
}

/// Minimize a 0-homogeneous log objective from the given start directions.
fn minimize_log_quotient<F>(
    grid: &Arc<GridDomain>,
    starts: Vec<Vec<f64>>,
    objective: F,
    opts: &EmbeddingOptions,
) -> Result<EmbeddingEstimate>
where
    F: Fn(&[f64]) -> Option<(f64, Vec<f64>)> + Sync,
{
    let restarts = starts.len();
    let dopts = DescentOptions {
        max_iter: opts.max_iter,
        tol: opts.tol,
        armijo: 1e-4,
        slack: 1e-15,
    };
    let outcomes: Vec<_> = starts
        .into_par_iter()
        .map(|x0| {
            let x0 = unit(x0)?;
            descend(x0, &objective, unit, scale_invariant_stationarity, |_, _| {}, &dopts)
        })
        .collect();

    let converged = outcomes.iter().flatten().filter(|o| o.converged).count();
    let best = outcomes
        .into_iter()
        .flatten()
        .filter(|o| o.converged)
        .min_by(|a, b| a.value.total_cmp(&b.value));
    match best {
        Some(o) => Ok(EmbeddingEstimate {
            value: o.value.exp(),
            minimizer: DiscreteFunction::new(Arc::clone(grid), o.x)?,
            converged_restarts: converged,
            restarts,
        }),
        None => Err(Error::NonConverged {
            what: "embedding constant".into(),
            iterations: opts.max_iter,
            residual: f64::NAN,
        }),
    }
}

/// Estimate `S_r` by minimizing `(1/p) ln ‖u‖^p − (1/r) ln ∫|u|^r` over
/// seeded random starts. Deterministic for a fixed seed.
pub fn estimate_sobolev_constant(
    grid: &Arc<GridDomain>,
    r: f64,
    opts: &EmbeddingOptions,
) -> Result<EmbeddingEstimate> {
    let p = grid.p();
    if !(r > 1.0) || r > grid.critical_exponent() * (1.0 + 1e-12) {
        return Err(Error::InvalidParams(format!(
            "embedding exponent r = {r} must lie in (1, {}]",
            grid.critical_exponent()
        )));
    }
    let ones = vec![1.0; grid.n_nodes()];
    let objective = |x: &[f64]| {
        let sp = seminorm_p_values(grid, x);
        let lr = weighted_values(grid, &ones, x, r);
        if !(sp > 0.0 && lr > 0.0) {
            return None;
        }
        let gs = seminorm_gradient_values(grid, x);
        let gl = weighted_gradient(grid, &ones, x, r);
        let f = sp.ln() / p - lr.ln() / r;
        let g = gs
            .iter()
            .zip(&gl)
            .map(|(a, b)| a / (p * sp) - b / (r * lr))
            .collect();
        Some((f, g))
    };
    let starts = (0..opts.restarts)
        .map(|k| {
            let mut rng = restart_rng(opts.seed, k as u64);
            positive_direction(grid, &mut rng)
        })
        .collect();
    let mut est = minimize_log_quotient(grid, starts, objective, opts)?;
    est.value = rayleigh_quotient(&est.minimizer, r);
    Ok(est)
}

/// Estimate `Λ` for the weight `g` by minimizing `2 ln ‖u‖^p − ln ∫ g|u|^{2p}`
/// over directions with a positive constraint integral.
pub fn estimate_capital_lambda(
    grid: &Arc<GridDomain>,
    g: &SampledWeight,
    opts: &EmbeddingOptions,
) -> Result<EmbeddingEstimate> {
    let p = grid.p();
    let e = 2.0 * p;
    let gv = g.values();
    let admissible = |x: &[f64]| weighted_values(grid, gv, x, e) > 0.0;

    let mut starts = Vec::with_capacity(opts.restarts);
    for k in 0..opts.restarts {
        let mut rng = restart_rng(opts.seed, k as u64);
        let mut found = None;
        for attempt in 0..32 {
            let x = if attempt % 2 == 0 {
                positive_direction(grid, &mut rng)
            } else {
                // concentrate mass where g is positive
                smooth_direction(grid, &mut rng, 6)
                    .into_iter()
                    .zip(gv)
                    .map(|(v, &w)| if w > 0.0 { v.abs() + 0.1 } else { 0.1 * v })
                    .collect()
            };
            if admissible(&x) {
                found = Some(x);
                break;
            }
        }
        if let Some(x) = found {
            starts.push(x);
        }
    }
    if starts.is_empty() {
        return Err(Error::Infeasible);
    }

    let objective = |x: &[f64]| {
        let sp = seminorm_p_values(grid, x);
        let den = weighted_values(grid, gv, x, e);
        if !(sp > 0.0 && den > 0.0) {
            return None;
        }
        let gs = seminorm_gradient_values(grid, x);
        let gd = weighted_gradient(grid, gv, x, e);
        let f = 2.0 * sp.ln() - den.ln();
        let grad = gs
            .iter()
            .zip(&gd)
            .map(|(a, b)| 2.0 * a / sp - b / den)
            .collect();
        Some((f, grad))
    };
    let mut est = minimize_log_quotient(grid, starts, objective, opts)?;
    est.minimizer = normalize_to_constraint(&est.minimizer, g).ok_or(Error::Infeasible)?;
    est.value = capital_lambda_quotient(&est.minimizer, g).ok_or(Error::Infeasible)?;
    Ok(est)
}
