use serde::Serialize;

use super::branch::{minimize_branch_with, BranchOutcome, CoercivityWitness, SolverOptions};
use crate::discretization::gagliardo_seminorm_p;
use crate::error::Result;
use crate::fiber::{
    apriori_bound_check, compute_thresholds, AprioriCheck, Branch, ThresholdOptions, ThresholdTable,
};
use crate::functional::{Problem, Regime, TruncationParams};

#[derive(Debug, Clone, Serialize)]
pub struct TruncationReport {
    pub k: f64,
    /// `‖u±‖^p ≤ k`, per branch.
    pub plus_within: Option<bool>,
    pub minus_within: Option<bool>,
    /// `|J_{λ,k}(u±) − J_λ(u±)|`
    pub plus_energy_gap: Option<f64>,
    pub minus_energy_gap: Option<f64>,
    pub plus_apriori: Option<AprioriCheck>,
    pub minus_apriori: Option<AprioriCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalDiagnostic {
    /// Level below which Palais–Smale sequences are compact.
    pub level: f64,
    pub energy: Option<f64>,
    /// `energy < level`.
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub regime: Regime,
    pub lambda: f64,
    pub thresholds: ThresholdTable,
    pub plus: Option<BranchOutcome>,
    pub minus: Option<BranchOutcome>,
    pub theta_plus: Option<f64>,
    pub theta_minus: Option<f64>,
    /// `‖u⁺ − u⁻‖` when both solutions exist.
    pub distinctness: Option<f64>,
    pub truncation: Option<TruncationReport>,
    pub critical: Option<CriticalDiagnostic>,
    pub seed: u64,
    pub restarts: usize,
    pub flags: Vec<String>,
    /// Branch failures as `BRANCH: CLASS: message`.
    pub errors: Vec<String>,
}

impl SolveReport {
    pub fn outcome(&self, branch: Branch) -> Option<&BranchOutcome> {
        match branch {
            Branch::Plus => self.plus.as_ref(),
            Branch::Minus => self.minus.as_ref(),
        }
    }

    pub fn has_flag(&self, prefix: &str) -> bool {
        self.flags.iter().any(|f| f.starts_with(prefix))
    }
}

/// Compute thresholds, then [`solve_with_thresholds`].
pub fn solve(problem: &Problem, opts: &SolverOptions, topts: &ThresholdOptions) -> Result<SolveReport> {
    let table = compute_thresholds(problem, topts)?;
    solve_with_thresholds(problem, &table, opts)
}

/// Solve in the problem's regime:
/// both branches for `2p < r < p*`; the PLUS branch, and the MINUS branch when
/// `bΛ < 1` and `λ < λ⁰`, for `r = 2p`; both branches of the truncated problem
/// for `r < 2p`, followed by the check `‖u±‖^p ≤ k`; the PLUS branch with the
/// compactness level for `r = p*`.
pub fn solve_with_thresholds(
    problem: &Problem,
    table: &ThresholdTable,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let regime = problem.regime();
    let lambda = problem.lambda();
    let mut flags = Vec::new();
    let mut errors = Vec::new();
    let witness = CoercivityWitness {
        f_norm: table.constants.f_norm,
        s_r: table.constants.s_r,
    };

    let gate = |name: &str, value: f64, flags: &mut Vec<String>| {
        if !(lambda < value) {
            flags.push(format!("THRESHOLD_EXCEEDED:{name}"));
        }
    };

    let (work, branches): (Problem, Vec<Branch>) = match regime {
        Regime::SubcriticalHigh => {
            gate("lambda0", table.lambda0, &mut flags);
            (problem.without_truncation(), vec![Branch::Plus, Branch::Minus])
        }
        Regime::Critical => {
            gate("lambda0", table.lambda0, &mut flags);
            flags.push("CRITICAL_PLUS_ONLY".into());
            (problem.without_truncation(), vec![Branch::Plus])
        }
        Regime::REq2p => match table.lambda_sup0 {
            Some(l0) if lambda < l0 => (problem.without_truncation(), vec![Branch::Plus, Branch::Minus]),
            Some(_) => {
                gate("lambda_sup0", table.lambda_sup0.unwrap_or(f64::NAN), &mut flags);
                (problem.without_truncation(), vec![Branch::Plus])
            }
            None => {
                if table.constants.capital_lambda.is_some() {
                    flags.push("N_PLUS_EQUALS_N".into());
                }
                (problem.without_truncation(), vec![Branch::Plus])
            }
        },
        Regime::RLt2p => {
            let k = table.trunc_k.unwrap_or_else(|| TruncationParams::midpoint(problem.params()).k);
            if let Some(l) = table.lambda_hat0 {
                gate("lambda_hat0", l, &mut flags);
            }
            if table.b_condition == Some(false) {
                flags.push("B_CONDITION_UNMET".into());
            }
            (
                problem.with_truncation(TruncationParams { k })?,
                vec![Branch::Plus, Branch::Minus],
            )
        }
    };

    let mut plus = None;
    let mut minus = None;
    for b in branches {
        match minimize_branch_with(&work, b, opts, Some(witness)) {
            Ok(out) => {
                if !out.converged {
                    flags.push(format!("NONCONVERGED:{b}"));
                }
                if out.witness_violations > 0 {
                    flags.push(format!("COERCIVITY_WITNESS_FAILED:{b}:{}", out.witness_violations));
                }
                if let Err(e) = out.point.validate() {
                    flags.push(format!("{}:{b}", e.class()));
                }
                match b {
                    Branch::Plus => plus = Some(out),
                    Branch::Minus => minus = Some(out),
                }
            }
            Err(e) => {
                flags.push(format!("{}:{b}", e.class()));
                errors.push(format!("{b}: {}: {e}", e.class()));
            }
        }
    }

    let distinctness = match (&plus, &minus) {
        (Some(p), Some(m)) => {
            let d = p.point.u.sub(&m.point.u);
            Some(gagliardo_seminorm_p(&d).powf(1.0 / problem.params().p))
        }
        _ => None,
    };

    let truncation = work.truncation().map(|tr| {
        let plain = work.without_truncation();
        let check = |o: &Option<BranchOutcome>| {
            o.as_ref().map(|o| {
                let u = &o.point.u;
                let within = o.point.seminorm_p <= tr.k;
                let gap = (o.point.energy - plain.energy(u)).abs();
                let apriori = apriori_bound_check(u, &plain, None, None).ok();
                (within, gap, apriori)
            })
        };
        let (pc, mc) = (check(&plus), check(&minus));
        TruncationReport {
            k: tr.k,
            plus_within: pc.map(|c| c.0),
            minus_within: mc.map(|c| c.0),
            plus_energy_gap: pc.map(|c| c.1),
            minus_energy_gap: mc.map(|c| c.1),
            plus_apriori: pc.and_then(|c| c.2),
            minus_apriori: mc.and_then(|c| c.2),
        }
    });
    if let Some(t) = &truncation {
        if t.plus_within == Some(false) || t.minus_within == Some(false) {
            flags.push("TRUNCATION_LEVEL_EXCEEDED".into());
        }
    }

    let critical = if regime == Regime::Critical {
        let level = table.critical_threshold(problem.params(), lambda)?;
        let energy = plus.as_ref().map(|o| o.point.energy);
        let certified = energy.is_some_and(|e| e < level);
        if !certified {
            flags.push("CRITICAL_NOT_CERTIFIED".into());
        }
        if problem.params().m0 == problem.params().a {
            flags.push("M0_DEFAULT".into());
        }
        Some(CriticalDiagnostic {
            level,
            energy,
            certified,
        })
    } else {
        None
    };

    Ok(SolveReport {
        regime,
        lambda,
        thresholds: table.clone(),
        theta_plus: plus.as_ref().map(|o| o.point.energy),
        theta_minus: minus.as_ref().map(|o| o.point.energy),
        plus,
        minus,
        distinctness,
        truncation,
        critical,
        seed: opts.seed,
        restarts: opts.restarts,
        flags,
        errors,
    })
}
