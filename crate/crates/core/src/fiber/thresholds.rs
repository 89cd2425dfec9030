//! Explicit λ-thresholds and auxiliary constants.
//!
//! The closed forms live in [`formulas`] as plain functions of the shared
//! constants; [`compute_thresholds`] estimates the constants on the grid and
//! assembles the table for the problem's regime.

use serde::Serialize;

use super::{l_of_lambda, m_power_envelope};
use crate::discretization::{
    estimate_capital_lambda, estimate_sobolev_constant, weight_lebesgue_norm, EmbeddingOptions,
};
use crate::error::{Error, Result};
use crate::functional::{kirchhoff_m, Problem, ProblemParams, Regime, TruncationParams};

/// Closed-form expressions, each a direct function of its inputs.
pub mod formulas {
    use crate::functional::{kirchhoff_m, ProblemParams};

    /// Below this λ every `u ∈ H⁺∩G⁺` has two fiber roots:
    /// `((r−p)S^q/‖f‖)(a/(r−q))^{(r−q)/(r−p)}((p−q)S^r/‖g‖_∞)^{(p−q)/(r−p)}`.
    pub fn lambda2(pr: &ProblemParams, s_r: f64, f_norm: f64, g_sup: f64) -> f64 {
        let (a, p, q, r) = (pr.a, pr.p, pr.q, pr.r);
        ((r - p) * s_r.powf(q) / f_norm)
            * (a / (r - q)).powf((r - q) / (r - p))
            * ((p - q) * s_r.powf(r) / g_sup).powf((p - q) / (r - p))
    }

    /// Positivity boundary of `E_λ` on the Nehari set:
    /// `(r−p)(a/(r−q))^{(r−q)/(r−p)}((p−q)S^r/‖g‖_∞)^{(p−q)/(r−p)} S^q/‖f‖`.
    pub fn lambda1(pr: &ProblemParams, s_r: f64, f_norm: f64, g_sup: f64) -> f64 {
        let (a, p, q, r) = (pr.a, pr.p, pr.q, pr.r);
        let base = (a / (r - q)).powf((r - q) / (r - p));
        let growth = ((p - q) * s_r.powf(r) / g_sup).powf((p - q) / (r - p));
        (r - p) * base * growth * s_r.powf(q) / f_norm
    }

    /// `r = 2p`, `bΛ < 1`:
    /// `(paS^q/((2p−q) l^{r/(r−q)})) (aΛ(p−q)/((1−bΛ)(2p−q)))^{(p−q)/p}`.
    pub fn lambda_sup0(pr: &ProblemParams, s_r: f64, l: f64, capital_lambda: f64) -> f64 {
        let (a, b, p, q, r) = (pr.a, pr.b, pr.p, pr.q, pr.r);
        let lead = p * a * s_r.powf(q) / ((2.0 * p - q) * l.powf(r / (r - q)));
        let inner = a * capital_lambda * (p - q) / ((1.0 - b * capital_lambda) * (2.0 * p - q));
        lead * inner.powf((p - q) / p)
    }

    /// `C₁ = (p−q) min{a, M(k)}` and
    /// `C₂ = min{(r−p)a − (2p−r)bk, (r−p)M(k)}`.
    pub fn truncation_c1_c2(pr: &ProblemParams, k: f64) -> (f64, f64) {
        let (a, b, p, q, r) = (pr.a, pr.b, pr.p, pr.q, pr.r);
        let mk = kirchhoff_m(k, pr);
        let c1 = (p - q) * a.min(mk);
        let c2 = ((r - p) * a - (2.0 * p - r) * b * k).min((r - p) * mk);
        (c1, c2)
    }

    /// `r < 2p`: `(C₁S^r/((r−q)‖g‖_∞))^{(p−q)/(r−p)} · C₂S^q/((r−q) l^{r/(r−q)})`.
    pub fn lambda_sup1(pr: &ProblemParams, k: f64, s_r: f64, l: f64, g_sup: f64) -> f64 {
        let (p, q, r) = (pr.p, pr.q, pr.r);
        let (c1, c2) = truncation_c1_c2(pr, k);
        (c1 * s_r.powf(r) / ((r - q) * g_sup)).powf((p - q) / (r - p))
            * (c2 * s_r.powf(q) / ((r - q) * l.powf(r / (r - q))))
    }

    /// `C` of the critical level, with `ρ = p/q`:
    /// `(ρ^{−1/(ρ−1)} − ρ^{−ρ/(ρ−1)}) ((2p−q) l^{(p−q)/p} S^{1/ρ})^{ρ/(ρ−1)} / (2pq a^{1/(ρ−1)})`.
    pub fn critical_c(pr: &ProblemParams, s: f64, l: f64) -> f64 {
        let (a, p, q) = (pr.a, pr.p, pr.q);
        let rho = p / q;
        let e1 = 1.0 / (rho - 1.0);
        let e2 = rho / (rho - 1.0);
        (rho.powf(-e1) - rho.powf(-e2))
            * ((2.0 * p - q) * l.powf((p - q) / p) * s.powf(1.0 / rho)).powf(e2)
            / (2.0 * p * q * a.powf(e1))
    }

    /// `((p*−2p)/(2p p*)) (m₀C)^{1/ps} / S^{(1−ps)/ps} − Cλ^{p/(p−q)}` in one dimension.
    pub fn critical_level(pr: &ProblemParams, s: f64, l: f64, lambda: f64) -> f64 {
        let (p, q) = (pr.p, pr.q);
        let ps = p * pr.s;
        let pstar = pr.critical_exponent();
        let c = critical_c(pr, s, l);
        ((pstar - 2.0 * p) / (2.0 * p * pstar)) * (pr.m0 * c).powf(1.0 / ps)
            / s.powf((1.0 - ps) / ps)
            - c * lambda.powf(p / (p - q))
    }

    /// `max over k ∈ I of max{M(k)^{(q−r+2)/(r−1)}, M(k)^{2/(r−1)}}`, sampled
    /// at `samples` equispaced points of the closed interval.
    pub fn a_hat(pr: &ProblemParams, samples: usize) -> f64 {
        let (lo, hi) = pr.truncation_interval();
        let n = samples.max(2);
        (0..n)
            .map(|i| {
                let k = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                super::m_power_envelope(kirchhoff_m(k, pr), pr)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `a(r−p)/(r Â L(θ))`, the bound on `b` under which truncated solutions
    /// stay below `k`.
    pub fn truncation_b_bound(pr: &ProblemParams, a_hat: f64, l_theta: f64) -> f64 {
        pr.a * (pr.r - pr.p) / (pr.r * a_hat * l_theta)
    }
}

/// Constants shared by the threshold formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdConstants {
    /// Embedding constant `S_r` (for `r = p*` this is the critical constant).
    pub s_r: f64,
    /// `l = ‖f‖_{L^{r/(r−q)}(Ω)}`.
    pub f_norm: f64,
    /// `‖g‖_∞`
    pub g_sup: f64,
    /// Growth constants of the right-hand side, default `sup|f|`, `sup|g|`.
    pub c0: f64,
    pub c1: f64,
    pub domain_length: f64,
    /// `Λ`, estimated only for `r = 2p`.
    pub capital_lambda: Option<f64>,
}

/// Replacements for estimated constants and thresholds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConstantOverrides {
    pub s_r: Option<f64>,
    pub f_norm: Option<f64>,
    pub g_sup: Option<f64>,
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub capital_lambda: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ThresholdOptions {
    pub embedding: EmbeddingOptions,
    /// Free parameter `θ` of `λ̂₀ = min{θ, λ¹}`; defaults to `λ¹`.
    pub theta: Option<f64>,
    /// Truncation level; defaults to the midpoint of the admissible interval.
    pub trunc_k: Option<f64>,
    pub overrides: ConstantOverrides,
}

/// Samples used for `Â` on the truncation interval.
pub const A_HAT_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdTable {
    pub regime: Regime,
    pub constants: ThresholdConstants,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda0: f64,
    /// `λ⁰`, for `r = 2p` with `bΛ < 1`.
    pub lambda_sup0: Option<f64>,
    /// `λ¹`, for `r < 2p`.
    pub lambda_sup1: Option<f64>,
    /// `λ̂₀ = min{θ, λ¹}`, for `r < 2p`.
    pub lambda_hat0: Option<f64>,
    pub theta: Option<f64>,
    pub trunc_k: Option<f64>,
    pub a_hat: Option<f64>,
    /// `L(θ)`, for `r < 2p`.
    pub l_theta: Option<f64>,
    /// Whether `b < a(r−p)/(rÂL(θ))`.
    pub b_condition: Option<bool>,
    /// `bΛ`, for `r = 2p`.
    pub b_capital_lambda: Option<f64>,
    /// `C` of the critical level.
    pub critical_c: Option<f64>,
    /// Critical level at `λ = 0`.
    pub critical_level_at_zero: Option<f64>,
    pub m0: f64,
    pub c_star: f64,
    pub notes: Vec<String>,
}

impl ThresholdTable {
    /// `L(λ) = (λC₀C_*^{q+1} + C₁C_*^{r+1})|Ω|`.
    pub fn l_of_lambda(&self, params: &ProblemParams, lambda: f64) -> f64 {
        l_of_lambda(
            lambda,
            self.constants.c0,
            self.constants.c1,
            params,
            self.constants.domain_length,
        )
    }

    fn optional(&self, name: &'static str, v: Option<f64>) -> Result<f64> {
        v.ok_or(Error::RegimeMismatch {
            name,
            found: self.regime,
        })
    }

    pub fn lambda_sup0(&self) -> Result<f64> {
        self.optional("lambda_sup0", self.lambda_sup0)
    }

    pub fn lambda_sup1(&self) -> Result<f64> {
        self.optional("lambda_sup1", self.lambda_sup1)
    }

    pub fn lambda_hat0(&self) -> Result<f64> {
        self.optional("lambda_hat0", self.lambda_hat0)
    }

    pub fn a_hat(&self) -> Result<f64> {
        self.optional("a_hat", self.a_hat)
    }

    pub fn capital_lambda(&self) -> Result<f64> {
        self.optional("capital_lambda", self.constants.capital_lambda)
    }

    /// Threshold by name, as used in configuration files.
    pub fn get(&self, name: &str) -> Result<f64> {
        match name {
            "lambda0" => Ok(self.lambda0),
            "lambda1" => Ok(self.lambda1),
            "lambda2" => Ok(self.lambda2),
            "lambda_sup0" => self.lambda_sup0(),
            "lambda_sup1" => self.lambda_sup1(),
            "lambda_hat0" => self.lambda_hat0(),
            other => Err(Error::InvalidParams(format!("unknown threshold `{other}`"))),
        }
    }

    /// Critical compactness level at `λ`.
    pub fn critical_threshold(&self, params: &ProblemParams, lambda: f64) -> Result<f64> {
        if self.regime != Regime::Critical {
            return Err(Error::WrongRegime {
                expected: "CRITICAL",
                found: self.regime,
            });
        }
        Ok(formulas::critical_level(
            params,
            self.constants.s_r,
            self.constants.f_norm,
            lambda,
        ))
    }

    /// The threshold that gates the two-branch structure in this regime.
    pub fn gate(&self) -> Option<(&'static str, f64)> {
        match self.regime {
            Regime::SubcriticalHigh | Regime::Critical => Some(("lambda0", self.lambda0)),
            Regime::REq2p => self.lambda_sup0.map(|v| ("lambda_sup0", v)),
            Regime::RLt2p => self.lambda_hat0.map(|v| ("lambda_hat0", v)),
        }
    }
}

/// Critical level as a free function; fails outside the critical regime.
pub fn critical_threshold(params: &ProblemParams, s: f64, l: f64) -> Result<f64> {
    if params.regime() != Regime::Critical {
        return Err(Error::WrongRegime {
            expected: "CRITICAL",
            found: params.regime(),
        });
    }
    Ok(formulas::critical_level(params, s, l, params.lambda))
}

/// Estimate the constants on the grid and build the table.
pub fn compute_thresholds(problem: &Problem, opts: &ThresholdOptions) -> Result<ThresholdTable> {
    let params = problem.params();
    let grid = problem.grid();
    let ov = &opts.overrides;
    let regime = params.regime();
    let mut notes = Vec::new();

    let s_r = match ov.s_r {
        Some(v) => v,
        None => estimate_sobolev_constant(grid, params.r, &opts.embedding)?.value,
    };
    let f_norm = ov.f_norm.unwrap_or_else(|| {
        weight_lebesgue_norm(grid, problem.f(), params.r / (params.r - params.q))
    });
    let g_sup = ov.g_sup.unwrap_or_else(|| problem.g().sup_abs());
    let capital_lambda = if regime == Regime::REq2p {
        match ov.capital_lambda {
            Some(v) => Some(v),
            None => match estimate_capital_lambda(grid, problem.g(), &opts.embedding) {
                Ok(e) => Some(e.value),
                Err(Error::Infeasible) => {
                    notes.push("capital_lambda: g has no positive part, constraint set empty".into());
                    None
                }
                Err(e) => return Err(e),
            },
        }
    } else {
        None
    };
    let constants = ThresholdConstants {
        s_r,
        f_norm,
        g_sup,
        c0: ov.c0.unwrap_or_else(|| problem.f().sup_abs()),
        c1: ov.c1.unwrap_or_else(|| problem.g().sup_abs()),
        domain_length: grid.length(),
        capital_lambda,
    };
    let trunc_k = if regime == Regime::RLt2p {
        Some(match opts.trunc_k {
            Some(k) => TruncationParams::new(k, params)?.k,
            None => TruncationParams::midpoint(params).k,
        })
    } else {
        None
    };
    let mut table = thresholds_from_constants(params, constants, trunc_k, opts.theta, ov);
    table.notes.splice(0..0, notes);
    Ok(table)
}

/// Assemble the table from given constants. `trunc_k` is used only for
/// `r < 2p`; overrides for `λ₁`, `λ₂` replace the formula values.
pub fn thresholds_from_constants(
    params: &ProblemParams,
    constants: ThresholdConstants,
    trunc_k: Option<f64>,
    theta: Option<f64>,
    overrides: &ConstantOverrides,
) -> ThresholdTable {
    let regime = params.regime();
    let c = &constants;
    let lambda1 = overrides
        .lambda1
        .unwrap_or_else(|| formulas::lambda1(params, c.s_r, c.f_norm, c.g_sup));
    let lambda2 = overrides
        .lambda2
        .unwrap_or_else(|| formulas::lambda2(params, c.s_r, c.f_norm, c.g_sup));
    let mut notes = Vec::new();
    if params.m0 == params.a {
        notes.push("m0 defaults to a (lower bound of M)".to_string());
    }

    let mut table = ThresholdTable {
        regime,
        constants,
        lambda1,
        lambda2,
        lambda0: lambda1.min(lambda2),
        lambda_sup0: None,
        lambda_sup1: None,
        lambda_hat0: None,
        theta: None,
        trunc_k: None,
        a_hat: None,
        l_theta: None,
        b_condition: None,
        b_capital_lambda: None,
        critical_c: None,
        critical_level_at_zero: None,
        m0: params.m0,
        c_star: params.c_star,
        notes,
    };

    match regime {
        Regime::REq2p => {
            if let Some(cl) = c.capital_lambda {
                let bl = params.b * cl;
                table.b_capital_lambda = Some(bl);
                if bl < 1.0 {
                    table.lambda_sup0 = Some(formulas::lambda_sup0(params, c.s_r, c.f_norm, cl));
                    table.notes.push(
                        "lambda_sup0 uses l^(r/(r-q)) as displayed; the coercivity estimate uses \
                         l^((r-q)/r); the two exponents are kept as written"
                            .into(),
                    );
                } else {
                    table
                        .notes
                        .push("b*Lambda >= 1: N+ = N, every Nehari point is a local minimum".into());
                }
            }
        }
        Regime::RLt2p => {
            let k = trunc_k.unwrap_or_else(|| TruncationParams::midpoint(params).k);
            let l1 = formulas::lambda_sup1(params, k, c.s_r, c.f_norm, c.g_sup);
            let th = theta.unwrap_or(l1);
            let a_hat = formulas::a_hat(params, A_HAT_SAMPLES);
            let l_theta = l_of_lambda(th, c.c0, c.c1, params, c.domain_length);
            let bound = formulas::truncation_b_bound(params, a_hat, l_theta);
            table.trunc_k = Some(k);
            table.lambda_sup1 = Some(l1);
            table.theta = Some(th);
            table.lambda_hat0 = Some(th.min(l1));
            table.a_hat = Some(a_hat);
            table.l_theta = Some(l_theta);
            table.b_condition = Some(params.b < bound);
            if theta.is_none() {
                table.notes.push("theta defaults to lambda_sup1".into());
            }
        }
        Regime::Critical => {
            let cc = formulas::critical_c(params, c.s_r, c.f_norm);
            table.critical_c = Some(cc);
            table.critical_level_at_zero =
                Some(formulas::critical_level(params, c.s_r, c.f_norm, 0.0));
        }
        Regime::SubcriticalHigh => {}
    }
    table
}

/// `max{M(A)^{(q−r+2)/(r−1)}, M(A)^{2/(r−1)}}` at `A`, re-exported for reports.
pub fn envelope_at(params: &ProblemParams, a_norm: f64) -> f64 {
    m_power_envelope(kirchhoff_m(a_norm, params), params)
}
