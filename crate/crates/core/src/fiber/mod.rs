//! Fiber maps `t ↦ J(tu)`: sign classes, the function `ψ_u`, its turning
//! points and the roots of `ψ_u(t) = λ∫f|u|^q` that scale `u` onto the Nehari set.

mod roots;
pub mod thresholds;

use serde::Serialize;

use crate::discretization::DiscreteFunction;
use crate::error::{Error, Result};
use crate::functional::{FiberScalars, Kirchhoff, Problem, ProblemParams, Regime};

pub use thresholds::{
    compute_thresholds, critical_threshold, envelope_at, formulas, thresholds_from_constants,
    ConstantOverrides, ThresholdConstants, ThresholdOptions, ThresholdTable, A_HAT_SAMPLES,
};

/// Relative band, against the L¹ mass of the integrand, inside which a
/// weighted integral counts as zero.
pub const CLASS_TOLERANCE: f64 = 1e-12;

/// Sign of a weighted integral: `H±/H⁰` for `f`, `G±/G⁰` for `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberClass {
    Plus,
    Minus,
    Zero,
}

impl FiberClass {
    fn of(value: f64, mass: f64) -> Self {
        if value.abs() < CLASS_TOLERANCE * mass || value == 0.0 {
            FiberClass::Zero
        } else if value > 0.0 {
            FiberClass::Plus
        } else {
            FiberClass::Minus
        }
    }
}

/// Nehari branch a root or point belongs to: local minimum (`Plus`) or
/// local maximum (`Minus`) of the fiber map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Branch {
    Plus,
    Minus,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Plus => "PLUS",
            Branch::Minus => "MINUS",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignClasses {
    pub h: FiberClass,
    pub g: FiberClass,
}

/// The scalar fiber problem for one direction.
///
/// With `A = ‖u‖^p`, `F = ∫f|u|^q`, `G = ∫g|u|^r`:
/// `ψ(t) = M(t^p A) A t^{p−q} − G t^{r−q}` and
/// `φ'(t) = t^{q−1}(ψ(t) − λF)` for the fiber map `φ(t) = J(tu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberMap {
    pub a_norm: f64,
    pub f: f64,
    pub g: f64,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub m: Kirchhoff,
    /// Treat `r` as exactly `2p` when locating turning points.
    pub exact_2p: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberRoot {
    pub t: f64,
    pub branch: Branch,
    pub psi_prime: f64,
    /// `|ψ(t) − λF|` relative to the size of the terms of `ψ` at `t`.
    pub residual: f64,
}

impl FiberMap {
    pub fn from_scalars(
        a_norm: f64,
        f: f64,
        g: f64,
        params: &ProblemParams,
        m: Kirchhoff,
    ) -> Self {
        Self {
            a_norm,
            f,
            g,
            lambda: params.lambda,
            p: params.p,
            q: params.q,
            r: params.r,
            m,
            exact_2p: params.regime() == Regime::REq2p,
        }
    }

    /// Fiber map of `u` under the problem's active coefficient.
    pub fn of(u: &DiscreteFunction, problem: &Problem) -> Self {
        Self::from_fiber_scalars(&problem.scalars(u), problem)
    }

    pub fn from_fiber_scalars(sc: &FiberScalars, problem: &Problem) -> Self {
        Self::from_scalars(sc.a, sc.f, sc.g, problem.params(), problem.kirchhoff())
    }

    /// `λF`, the level `ψ` has to reach.
    pub fn line(&self) -> f64 {
        self.lambda * self.f
    }

    pub fn psi(&self, t: f64) -> f64 {
        let a = self.a_norm;
        let tp = t.powf(self.p);
        self.m.m(tp * a) * a * t.powf(self.p - self.q) - self.g * t.powf(self.r - self.q)
    }

    pub fn psi_prime(&self, t: f64) -> f64 {
        let (p, q, r, a) = (self.p, self.q, self.r, self.a_norm);
        let s = t.powf(p) * a;
        self.m.m_prime(s) * p * a * a * t.powf(2.0 * p - q - 1.0)
            + (p - q) * self.m.m(s) * a * t.powf(p - q - 1.0)
            - (r - q) * self.g * t.powf(r - q - 1.0)
    }

    /// `φ(t) = J(tu)`.
    pub fn phi(&self, t: f64) -> f64 {
        self.m.m_hat(t.powf(self.p) * self.a_norm) / self.p
            - self.lambda * self.f * t.powf(self.q) / self.q
            - self.g * t.powf(self.r) / self.r
    }

    pub fn phi_prime(&self, t: f64) -> f64 {
        let s = t.powf(self.p) * self.a_norm;
        self.m.m(s) * self.a_norm * t.powf(self.p - 1.0)
            - self.lambda * self.f * t.powf(self.q - 1.0)
            - self.g * t.powf(self.r - 1.0)
    }

    pub fn phi_second(&self, t: f64) -> f64 {
        let (p, q, r, a) = (self.p, self.q, self.r, self.a_norm);
        let s = t.powf(p) * a;
        self.m.m_prime(s) * p * a * a * t.powf(2.0 * p - 2.0)
            + (p - 1.0) * self.m.m(s) * a * t.powf(p - 2.0)
            - self.lambda * (q - 1.0) * self.f * t.powf(q - 2.0)
            - (r - 1.0) * self.g * t.powf(r - 2.0)
    }

    /// Size of the terms of `ψ(t) − λF`, for relative residuals.
    pub fn scale(&self, t: f64) -> f64 {
        let a = self.a_norm;
        self.m.m(t.powf(self.p) * a) * a * t.powf(self.p - self.q)
            + self.g.abs() * t.powf(self.r - self.q)
            + self.line().abs()
    }

    /// Points where `ψ'` changes sign, ascending. `ψ` increases before the
    /// first one and the direction alternates after each.
    pub fn turning_points(&self) -> Vec<f64> {
        roots::turning_points(self)
    }

    /// The first local maximum of `ψ`, if `ψ` has one.
    pub fn t_max(&self) -> Option<f64> {
        self.turning_points().first().copied()
    }

    /// All solutions of `ψ(t) = λF` on `(0, ∞)`, ascending.
    pub fn roots(&self) -> Vec<FiberRoot> {
        roots::fiber_roots(self)
    }
}

/// Sign classes of `u` under `f` (exponent q) and `g` (exponent r).
pub fn classify(u: &DiscreteFunction, problem: &Problem) -> Result<SignClasses> {
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    Ok(classes_of(&problem.scalars(u)))
}

pub(crate) fn classes_of(sc: &FiberScalars) -> SignClasses {
    SignClasses {
        h: FiberClass::of(sc.f, sc.f_mass),
        g: FiberClass::of(sc.g, sc.g_mass),
    }
}

pub fn psi(u: &DiscreteFunction, t: f64, problem: &Problem) -> f64 {
    FiberMap::of(u, problem).psi(t)
}

pub fn psi_prime(u: &DiscreteFunction, t: f64, problem: &Problem) -> f64 {
    FiberMap::of(u, problem).psi_prime(t)
}

/// `φ'_u(1) = M(‖u‖^p)‖u‖^p − λ∫f|u|^q − ∫g|u|^r`, zero exactly on the Nehari set.
pub fn fiber_first_derivative(u: &DiscreteFunction, problem: &Problem) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let sc = problem.scalars(u);
    let m = problem.kirchhoff();
    Ok(m.m(sc.a) * sc.a - problem.lambda() * sc.f - sc.g)
}

/// `φ''_u(1) = (p−1)M(‖u‖^p)‖u‖^p + pM'(‖u‖^p)‖u‖^{2p} − λ(q−1)∫f|u|^q − (r−1)∫g|u|^r`.
pub fn fiber_second_derivative(u: &DiscreteFunction, problem: &Problem) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let sc = problem.scalars(u);
    let pr = problem.params();
    let m = problem.kirchhoff();
    Ok((pr.p - 1.0) * m.m(sc.a) * sc.a + pr.p * m.m_prime(sc.a) * sc.a * sc.a
        - problem.lambda() * (pr.q - 1.0) * sc.f
        - (pr.r - 1.0) * sc.g)
}

/// Sum of the absolute values of the terms in [`fiber_second_derivative`].
pub fn second_derivative_scale(u: &DiscreteFunction, problem: &Problem) -> f64 {
    let sc = problem.scalars(u);
    let pr = problem.params();
    let m = problem.kirchhoff();
    (pr.p - 1.0) * m.m(sc.a) * sc.a
        + pr.p * m.m_prime(sc.a) * sc.a * sc.a
        + problem.lambda() * (pr.q - 1.0) * sc.f.abs()
        + (pr.r - 1.0) * sc.g.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TMax {
    pub t_max: f64,
    /// `(1/‖u‖)[a(p−q)S_r^r/((r−q)‖g‖_∞)]^{1/(r−p)}`, a lower bound for `t_max`.
    pub t0: f64,
}

/// `T₀ = (1/‖u‖)[a(p−q)S_r^r/((r−q)‖g‖_∞)]^{1/(r−p)}`.
pub fn t0_bound(a_norm: f64, s_r: f64, g_sup: f64, params: &ProblemParams) -> f64 {
    let (a, p, q, r) = (params.a, params.p, params.q, params.r);
    let norm = a_norm.powf(1.0 / p);
    (a * (p - q) * s_r.powf(r) / ((r - q) * g_sup)).powf(1.0 / (r - p)) / norm
}

/// Maximiser of `ψ_u` together with the lower bound `T₀`.
pub fn find_t_max(u: &DiscreteFunction, problem: &Problem, s_r: f64) -> Result<TMax> {
    let cls = classify(u, problem)?;
    if cls.g != FiberClass::Plus {
        return Err(Error::WrongClass(format!(
            "t_max needs a direction with positive ∫g|u|^r, got {:?}",
            cls.g
        )));
    }
    let fm = FiberMap::of(u, problem);
    let t_max = fm.t_max().ok_or_else(|| Error::NonConverged {
        what: "t_max bracket".into(),
        iterations: 0,
        residual: f64::NAN,
    })?;
    let t0 = t0_bound(fm.a_norm, s_r, problem.g().sup_abs(), problem.params());
    if t_max < t0 * (1.0 - 1e-8) {
        return Err(Error::InvariantViolation(format!(
            "t_max = {t_max} below its lower bound T0 = {t0}"
        )));
    }
    Ok(TMax { t_max, t0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberReport {
    pub h_class: FiberClass,
    pub g_class: FiberClass,
    pub t_max: Option<f64>,
    pub roots: Vec<FiberRoot>,
    pub psi_at_tmax: Option<f64>,
    pub lambda_line: f64,
}

impl FiberReport {
    pub fn root(&self, branch: Branch) -> Option<&FiberRoot> {
        self.roots.iter().find(|r| r.branch == branch)
    }
}

/// All scalings `t` with `tu` on the Nehari set, labelled by branch.
pub fn find_fiber_roots(u: &DiscreteFunction, problem: &Problem) -> Result<FiberReport> {
    let cls = classify(u, problem)?;
    let fm = FiberMap::of(u, problem);
    let roots = fm.roots();
    if roots.is_empty() {
        return Err(Error::NoRoot { line: fm.line() });
    }
    let t_max = fm.t_max();
    Ok(FiberReport {
        h_class: cls.h,
        g_class: cls.g,
        t_max,
        psi_at_tmax: t_max.map(|t| fm.psi(t)),
        lambda_line: fm.line(),
        roots,
    })
}

/// `E_λ(u) = [(r−p)a‖u‖^p + (r−2p)b‖u‖^{2p}]/(r−q) − λ∫f|u|^q`.
pub fn e_lambda(u: &DiscreteFunction, problem: &Problem) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let sc = problem.scalars(u);
    Ok(e_lambda_scalar(sc.a, sc.f, problem.params()))
}

pub fn e_lambda_scalar(a_norm: f64, f: f64, params: &ProblemParams) -> f64 {
    let (a, b, p, q, r) = (params.a, params.b, params.p, params.q, params.r);
    ((r - p) * a * a_norm + (r - 2.0 * p) * b * a_norm * a_norm) / (r - q) - params.lambda * f
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AprioriCheck {
    /// `‖u‖^p`
    pub lhs: f64,
    /// `max{M^{(q−r+2)/(r−1)}, M^{2/(r−1)}}·L(λ)` at `M = M(‖u‖^p)`
    pub rhs: f64,
    pub holds: bool,
}

/// `L(λ) = (λC₀C_*^{q+1} + C₁C_*^{r+1})|Ω|`.
pub fn l_of_lambda(lambda: f64, c0: f64, c1: f64, params: &ProblemParams, length: f64) -> f64 {
    let cs = params.c_star;
    (lambda * c0 * cs.powf(params.q + 1.0) + c1 * cs.powf(params.r + 1.0)) * length
}

/// `max{m^{(q−r+2)/(r−1)}, m^{2/(r−1)}}`.
pub fn m_power_envelope(m: f64, params: &ProblemParams) -> f64 {
    let (q, r) = (params.q, params.r);
    m.powf((q - r + 2.0) / (r - 1.0)).max(m.powf(2.0 / (r - 1.0)))
}

/// Check `‖u‖^p < max{M^{(q−r+2)/(r−1)}, M^{2/(r−1)}}·L(λ)` with `C₀ = sup|f|`
/// and `C₁ = sup|g|` unless given.
pub fn apriori_bound_check(
    u: &DiscreteFunction,
    problem: &Problem,
    c0: Option<f64>,
    c1: Option<f64>,
) -> Result<AprioriCheck> {
    let params = problem.params();
    if params.regime() != Regime::RLt2p {
        return Err(Error::WrongRegime {
            expected: "R_LT_2P",
            found: params.regime(),
        });
    }
    let c0 = c0.unwrap_or_else(|| problem.f().sup_abs());
    let c1 = c1.unwrap_or_else(|| problem.g().sup_abs());
    let lhs = problem.scalars(u).a;
    let m = crate::functional::kirchhoff_m(lhs, params);
    let rhs = m_power_envelope(m, params)
        * l_of_lambda(params.lambda, c0, c1, params, problem.grid().length());
    Ok(AprioriCheck {
        lhs,
        rhs,
        holds: lhs < rhs,
    })
}
