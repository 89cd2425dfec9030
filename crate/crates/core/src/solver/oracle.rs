//! Exhaustive direction scan for tiny grids.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::{projection_scale, Target};
use crate::error::{Error, Result};
use crate::fiber::{Branch, FiberMap};
use crate::functional::Problem;

/// Largest grid the oracle accepts.
pub const ORACLE_MAX_NODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleOptions {
    /// Samples per polar angle; the azimuth gets twice as many.
    pub resolution: usize,
    /// Best scan candidates refined by compass search, per branch.
    pub polish: usize,
    /// Final compass step in angle space.
    pub polish_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            resolution: 40,
            polish: 6,
            polish_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub theta_plus: Option<f64>,
    pub theta_minus: Option<f64>,
    /// Scan-only minima, before refinement.
    pub scan_plus: Option<f64>,
    pub scan_minus: Option<f64>,
    pub directions: usize,
    pub plus_direction: Option<Vec<f64>>,
    pub minus_direction: Option<Vec<f64>>,
}

/// Unit vector from hyperspherical angles.
fn direction(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut x = vec![0.0; n];
    let mut sin_prod = 1.0;
    for (i, &a) in angles.iter().enumerate() {
        x[i] = sin_prod * a.cos();
        sin_prod *= a.sin();
    }
    x[n - 1] = sin_prod;
    x
}

fn branch_energy(problem: &Problem, angles: &[f64], branch: Branch) -> Option<f64> {
    let x = direction(angles);
    let sc = problem.scalars_of(&x);
    let fm = FiberMap::from_fiber_scalars(&sc, problem);
    let target: Target = branch.into();
    let (t, _) = projection_scale(&fm, target).ok()?;
    Some(fm.phi(t))
}

fn angle_grid(dims: usize, resolution: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for d in 0..dims {
        let last = d + 1 == dims;
        let count = if last { 2 * resolution } else { resolution };
        let span = if last { 2.0 * PI } else { PI };
        let mut next = Vec::with_capacity(out.len() * count);
        for prefix in &out {
            for j in 0..count {
                let mut v = prefix.clone();
                v.push(span * (j as f64 + 0.5) / count as f64);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Coordinate search with halving steps.
fn compass(problem: &Problem, branch: Branch, mut x: Vec<f64>, mut fx: f64, step0: f64, tol: f64) -> (Vec<f64>, f64) {
    let mut step = step0;
    while step > tol {
        let mut improved = false;
        for i in 0..x.len() {
            for sgn in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += sgn * step;
                if let Some(fy) = branch_energy(problem, &y, branch) {
                    if fy < fx {
                        x = y;
                        fx = fy;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Global branch minima on a grid with at most five nodes, by scanning the
/// unit sphere of directions, scaling each onto the requested fiber root and
/// refining the best candidates by compass search.
pub fn brute_force_oracle(problem: &Problem, opts: &OracleOptions) -> Result<OracleResult> {
    let n = problem.grid().n_nodes();
    if !(2..=ORACLE_MAX_NODES).contains(&n) {
        return Err(Error::InvalidGrid(format!(
            "oracle needs 2..={ORACLE_MAX_NODES} nodes, grid has {n}"
        )));
    }
    let samples = angle_grid(n - 1, opts.resolution.max(2));
    let values: Vec<(Option<f64>, Option<f64>)> = samples
        .par_iter()
        .map(|a| {
            (
                branch_energy(problem, a, Branch::Plus),
                branch_energy(problem, a, Branch::Minus),
            )
        })
        .collect();

    let refine = |branch: Branch, pick: fn(&(Option<f64>, Option<f64>)) -> Option<f64>| {
        let mut ranked: Vec<(usize, f64)> = values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| pick(v).map(|e| (i, e)))
            .collect();
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let scan = ranked.first().map(|r| r.1);
        let step0 = PI / opts.resolution.max(2) as f64;
        let best = ranked
            .iter()
            .take(opts.polish)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&&(i, e)| compass(problem, branch, samples[i].clone(), e, step0, opts.polish_tol))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        (scan, best)
    };

    let (scan_plus, best_plus) = refine(Branch::Plus, |v| v.0);
    let (scan_minus, best_minus) = refine(Branch::Minus, |v| v.1);
    let dir = |b: &Option<(Vec<f64>, f64)>| b.as_ref().map(|(a, _)| direction(a));
    Ok(OracleResult {
        theta_plus: best_plus.as_ref().map(|b| b.1),
        theta_minus: best_minus.as_ref().map(|b| b.1),
        scan_plus,
        scan_minus,
        directions: samples.len(),
        plus_direction: dir(&best_plus),
        minus_direction: dir(&best_minus),
    })
}
