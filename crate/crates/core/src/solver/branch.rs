use rayon::prelude::*;
use serde::Serialize;

use super::{nonneg_projectize, projection_scale, NehariPoint, Target};
use crate::descent::{descend, DescentOptions};
use crate::error::{Error, Result};
use crate::fiber::{classes_of, Branch, FiberClass, FiberMap};
use crate::functional::{max_norm, Problem};
use crate::sampling::{positive_direction, restart_rng, smooth_direction};

/// Multiple of `ε` times the gradient term size below which a residual is
/// rounding noise.
pub const ROUNDING_FACTOR: f64 = 16.0;

/// Stopping tolerance at `x`: `max(tol, ROUNDING_FACTOR·ε·scale)`.
pub(crate) fn effective_tol(problem: &Problem, x: &[f64], tol: f64) -> f64 {
    tol.max(ROUNDING_FACTOR * f64::EPSILON * problem.active_gradient_scale(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Descent iteration cap per restart.
    pub max_iter: usize,
    /// Target max-norm of the energy gradient. Raised to the rounding floor
    /// [`ROUNDING_FACTOR`]`·ε·scale` when the gradient terms are large.
    pub tol: f64,
    /// Replace outputs by `|u|` and re-project.
    pub nonneg: bool,
    /// Random draws per restart before giving up on finding an admissible start.
    pub start_attempts: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            seed: 42,
            max_iter: 10_000,
            tol: 1e-8,
            nonneg: true,
            start_attempts: 64,
        }
    }
}

/// Lower bound on the energy of Nehari points used as a running sanity check:
/// `(1/p − 1/r)a‖u‖^p + (1/(2p) − 1/r)b‖u‖^{2p} − λ(1/q − 1/r) l S_r^{−q} ‖u‖^q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CoercivityWitness {
    pub f_norm: f64,
    pub s_r: f64,
}

impl CoercivityWitness {
    fn bound(&self, problem: &Problem, a_norm: f64) -> f64 {
        let pr = problem.params();
        let (a, b, p, q, r) = (pr.a, pr.b, pr.p, pr.q, pr.r);
        (1.0 / p - 1.0 / r) * a * a_norm + (1.0 / (2.0 * p) - 1.0 / r) * b * a_norm * a_norm
            - pr.lambda * (1.0 / q - 1.0 / r) * self.f_norm * self.s_r.powf(-q)
                * a_norm.powf(q / p)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchOutcome {
    pub point: NehariPoint,
    /// Whether the winning restart reached the gradient tolerance.
    pub converged: bool,
    pub iterations: usize,
    /// Index of the winning restart.
    pub restart: usize,
    pub admissible_starts: usize,
    pub converged_restarts: usize,
    /// Iterates where the coercivity bound failed, over all restarts.
    pub witness_violations: usize,
    pub witness_checks: usize,
    /// Largest energy increase accepted between iterates, over all restarts.
    pub max_increase: f64,
}

struct RestartRun {
    index: usize,
    point: NehariPoint,
    converged: bool,
    iterations: usize,
    witness_violations: usize,
    witness_checks: usize,
    max_increase: f64,
}

fn admissible_start(problem: &Problem, branch: Branch, seed: u64, index: usize, attempts: usize) -> Option<Vec<f64>> {
    let grid = problem.grid();
    let mut rng = restart_rng(seed, index as u64);
    let signed_weights = problem.f().values().iter().any(|&v| v < 0.0)
        || problem.g().values().iter().any(|&v| v < 0.0);
    for attempt in 0..attempts {
        let x = if signed_weights && attempt % 2 == 1 {
            smooth_direction(grid, &mut rng, 6)
        } else {
            positive_direction(grid, &mut rng)
        };
        let sc = problem.scalars_of(&x);
        let cls = classes_of(&sc);
        if cls.h == FiberClass::Zero || cls.g == FiberClass::Zero {
            continue;
        }
        let fm = FiberMap::from_fiber_scalars(&sc, problem);
        if let Ok((t, _)) = projection_scale(&fm, branch.into()) {
            return Some(x.into_iter().map(|v| v * t).collect());
        }
    }
    None
}

fn run_restart(
    problem: &Problem,
    branch: Branch,
    x0: Vec<f64>,
    index: usize,
    opts: &SolverOptions,
    witness: Option<CoercivityWitness>,
) -> Result<RestartRun> {
    let target: Target = branch.into();
    let eval = |x: &[f64]| {
        let (e, g, _) = problem.active_value_gradient(x);
        (e.is_finite() && g.iter().all(|v| v.is_finite())).then_some((e, g))
    };
    let retract = |v: Vec<f64>| {
        let sc = problem.scalars_of(&v);
        let fm = FiberMap::from_fiber_scalars(&sc, problem);
        let (t, _) = projection_scale(&fm, target).ok()?;
        Some(v.into_iter().map(|x| x * t).collect::<Vec<_>>())
    };
    let untruncated = problem.truncation().is_none();
    let mut checks = 0;
    let mut violations = 0;
    let observe = |x: &[f64], e: f64| {
        if let (Some(w), true) = (witness, untruncated) {
            let a = problem.scalars_of(x).a;
            checks += 1;
            if e < w.bound(problem, a) - 1e-12 * (1.0 + e.abs()) {
                violations += 1;
            }
        }
    };
    let dopts = DescentOptions {
        max_iter: opts.max_iter,
        tol: opts.tol,
        armijo: 1e-4,
        slack: 1e-14,
    };
    let stationarity = |x: &[f64], g: &[f64]| max_norm(g) * opts.tol / effective_tol(problem, x, opts.tol);
    let out = descend(x0, eval, retract, stationarity, observe, &dopts).ok_or_else(|| {
        Error::NonConverged {
            what: format!("{branch} descent start"),
            iterations: 0,
            residual: f64::NAN,
        }
    })?;

    let u = problem.function(out.x)?;
    let u = if opts.nonneg { nonneg_projectize(&u)? } else { u };
    let sc = problem.scalars(&u);
    let fm = FiberMap::from_fiber_scalars(&sc, problem);
    let (t, _) = projection_scale(&fm, target)?;
    let mut point = NehariPoint::evaluate(u.scaled(t), problem)?;
    point.branch = branch;
    Ok(RestartRun {
        index,
        converged: point.weak_residual < effective_tol(problem, point.u.values(), opts.tol),
        point,
        iterations: out.iterations,
        witness_violations: violations,
        witness_checks: checks,
        max_increase: out.max_increase,
    })
}

pub(crate) fn minimize_branch_with(
    problem: &Problem,
    branch: Branch,
    opts: &SolverOptions,
    witness: Option<CoercivityWitness>,
) -> Result<BranchOutcome> {
    let runs: Vec<Option<Result<RestartRun>>> = (0..opts.restarts)
        .into_par_iter()
        .map(|i| {
            let x0 = admissible_start(problem, branch, opts.seed, i, opts.start_attempts)?;
            Some(run_restart(problem, branch, x0, i, opts, witness))
        })
        .collect();

    let admissible = runs.iter().filter(|r| r.is_some()).count();
    if admissible == 0 {
        return Err(Error::NoAdmissibleStart(match branch {
            Branch::Plus => "PLUS",
            Branch::Minus => "MINUS",
        }));
    }
    let mut first_err = None;
    let mut ok = Vec::new();
    for r in runs.into_iter().flatten() {
        match r {
            Ok(run) => ok.push(run),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if ok.is_empty() {
        return Err(first_err.expect("at least one admissible start"));
    }
    let witness_violations = ok.iter().map(|r| r.witness_violations).sum();
    let witness_checks = ok.iter().map(|r| r.witness_checks).sum();
    let max_increase = ok.iter().map(|r| r.max_increase).fold(0.0, f64::max);
    let converged_restarts = ok.iter().filter(|r| r.converged).count();

    // converged runs first, then lowest energy, lowest residual, lowest index
    ok.sort_by(|x, y| {
        y.converged
            .cmp(&x.converged)
            .then(x.point.energy.total_cmp(&y.point.energy))
            .then(x.point.weak_residual.total_cmp(&y.point.weak_residual))
            .then(x.index.cmp(&y.index))
    });
    let best = ok.swap_remove(0);
    Ok(BranchOutcome {
        converged: best.converged,
        iterations: best.iterations,
        restart: best.index,
        point: best.point,
        admissible_starts: admissible,
        converged_restarts,
        witness_violations,
        witness_checks,
        max_increase,
    })
}

/// Minimize the energy over one Nehari branch from seeded random starts.
///
/// Each restart runs gradient descent on the direction with re-projection
/// onto the branch after every step; the lowest-energy converged result wins.
/// A non-converged best result is returned with `converged = false`.
pub fn minimize_branch(problem: &Problem, branch: Branch, opts: &SolverOptions) -> Result<BranchOutcome> {
    minimize_branch_with(problem, branch, opts, None)
}
