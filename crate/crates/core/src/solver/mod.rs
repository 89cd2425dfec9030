//! Minimization of the energy over the two Nehari branches.

mod branch;
mod oracle;
mod solve;

use serde::Serialize;

use crate::discretization::{gagliardo_seminorm_p, DiscreteFunction};
use crate::error::{Error, Result};
use crate::fiber::{
    classes_of, second_derivative_scale, Branch, FiberClass, FiberMap, SignClasses,
};
use crate::functional::Problem;

pub use branch::{minimize_branch, BranchOutcome, SolverOptions};
pub use oracle::{brute_force_oracle, OracleOptions, OracleResult, ORACLE_MAX_NODES};
pub use solve::{solve, solve_with_thresholds, CriticalDiagnostic, SolveReport, TruncationReport};

/// Which fiber root to scale a direction to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Target {
    /// Lowest-energy root where `ψ` is increasing.
    Plus,
    /// Lowest-energy root where `ψ` is decreasing.
    Minus,
    /// The unique root of a direction with a single one.
    Star,
}

impl From<Branch> for Target {
    fn from(b: Branch) -> Self {
        match b {
            Branch::Plus => Target::Plus,
            Branch::Minus => Target::Minus,
        }
    }
}

/// Relative tolerance on the Nehari identity for accepted points.
pub const NEHARI_TOL: f64 = 1e-9;

/// A point of the Nehari set together with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct NehariPoint {
    pub u: DiscreteFunction,
    pub branch: Branch,
    /// Energy of the functional in use (truncated iff the problem is).
    pub energy: f64,
    /// `|φ'_u(1)|`
    pub fiber_residual: f64,
    /// `|φ'_u(1)|` over the size of its terms.
    pub fiber_residual_rel: f64,
    /// `φ''_u(1)`
    pub second_deriv: f64,
    /// Size of the terms of `φ''_u(1)`.
    pub second_scale: f64,
    pub weak_residual: f64,
    /// `‖u‖^p`
    pub seminorm_p: f64,
    pub classes: SignClasses,
}

impl NehariPoint {
    /// Evaluate all diagnostics at `u`, taking `branch` from the sign of `φ''`.
    pub fn evaluate(u: DiscreteFunction, problem: &Problem) -> Result<Self> {
        if u.is_zero() {
            return Err(Error::ZeroFunction);
        }
        let sc = problem.scalars(&u);
        let m = problem.kirchhoff();
        let pr = problem.params();
        let lam = problem.lambda();
        let d1 = m.m(sc.a) * sc.a - lam * sc.f - sc.g;
        let d1_scale = m.m(sc.a) * sc.a + lam * sc.f.abs() + sc.g.abs();
        let d2 = (pr.p - 1.0) * m.m(sc.a) * sc.a + pr.p * m.m_prime(sc.a) * sc.a * sc.a
            - lam * (pr.q - 1.0) * sc.f
            - (pr.r - 1.0) * sc.g;
        let energy = problem.active_energy(&u);
        let weak_residual = problem.active_residual(&u);
        Ok(Self {
            branch: if d2 > 0.0 { Branch::Plus } else { Branch::Minus },
            energy,
            fiber_residual: d1.abs(),
            fiber_residual_rel: d1.abs() / d1_scale,
            second_deriv: d2,
            second_scale: second_derivative_scale(&u, problem),
            weak_residual,
            seminorm_p: sc.a,
            classes: classes_of(&sc),
            u,
        })
    }

    /// `|φ''_u(1)|` relative to the size of its terms.
    pub fn degeneracy_margin(&self) -> f64 {
        self.second_deriv.abs() / self.second_scale
    }

    /// Check the Nehari identity, nonzero-ness and branch sign.
    pub fn validate(&self) -> Result<()> {
        if self.u.is_zero() {
            return Err(Error::InvariantViolation("Nehari point is zero".into()));
        }
        if !(self.fiber_residual_rel < NEHARI_TOL) {
            return Err(Error::InvariantViolation(format!(
                "Nehari identity off by {:e} (relative)",
                self.fiber_residual_rel
            )));
        }
        let ok = match self.branch {
            Branch::Plus => self.second_deriv > 0.0,
            Branch::Minus => self.second_deriv < 0.0,
        };
        if !ok {
            return Err(Error::InvariantViolation(format!(
                "{} point has second fiber derivative {:e}",
                self.branch, self.second_deriv
            )));
        }
        Ok(())
    }
}

/// Scaling factor taking `u` to the requested fiber root.
pub(crate) fn projection_scale(fm: &FiberMap, target: Target) -> Result<(f64, Branch)> {
    let roots = fm.roots();
    if roots.is_empty() {
        return Err(Error::NoRoot { line: fm.line() });
    }
    let pick = |b: Branch| {
        roots
            .iter()
            .filter(|r| r.branch == b)
            .min_by(|x, y| fm.phi(x.t).total_cmp(&fm.phi(y.t)))
            .map(|r| (r.t, b))
    };
    match target {
        Target::Plus => pick(Branch::Plus)
            .ok_or_else(|| Error::NotAdmissible("direction has no PLUS fiber root".into())),
        Target::Minus => pick(Branch::Minus)
            .ok_or_else(|| Error::NotAdmissible("direction has no MINUS fiber root".into())),
        Target::Star => {
            if roots.len() == 1 {
                Ok((roots[0].t, roots[0].branch))
            } else {
                Err(Error::NotAdmissible(format!(
                    "STAR projection needs a single fiber root, found {}",
                    roots.len()
                )))
            }
        }
    }
}

/// Scale `u` onto the Nehari set at the requested root.
pub fn project_to_nehari(u: &DiscreteFunction, target: Target, problem: &Problem) -> Result<NehariPoint> {
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let sc = problem.scalars(u);
    let cls = classes_of(&sc);
    if target == Target::Star && cls.g == FiberClass::Plus && cls.h == FiberClass::Plus {
        return Err(Error::NotAdmissible(
            "STAR projection is for directions with nonpositive ∫g|u|^r".into(),
        ));
    }
    let fm = FiberMap::from_fiber_scalars(&sc, problem);
    let (t, branch) = projection_scale(&fm, target)?;
    let mut pt = NehariPoint::evaluate(u.scaled(t), problem)?;
    pt.branch = branch;
    Ok(pt)
}

/// Replace `u` by `|u|`. The seminorm can only drop; an increase means the
/// quadrature is broken.
pub fn nonneg_projectize(u: &DiscreteFunction) -> Result<DiscreteFunction> {
    let v = u.abs();
    let before = gagliardo_seminorm_p(u);
    let after = gagliardo_seminorm_p(&v);
    if after > before * (1.0 + 1e-12) + 1e-300 {
        return Err(Error::EnergyIncreased { before, after });
    }
    Ok(v)
}
