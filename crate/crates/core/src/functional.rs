//! Kirchhoff coefficient, energy functionals and their gradients.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::discretization::{
    seminorm_gradient_values, seminorm_p_values, weighted_gradient, weighted_mass,
    weighted_values, DiscreteFunction, GridDomain, SampledWeight, WeightSpec,
};
use crate::error::{Error, Result};

/// Which part of the exponent range `r` falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    /// `2p < r < p*`
    #[serde(rename = "SUBCRITICAL_HIGH")]
    SubcriticalHigh,
    /// `r = 2p`
    #[serde(rename = "R_EQ_2P")]
    REq2p,
    /// `p < r < 2p`
    #[serde(rename = "R_LT_2P")]
    RLt2p,
    /// `r = p*`
    #[serde(rename = "CRITICAL")]
    Critical,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::SubcriticalHigh => "SUBCRITICAL_HIGH",
            Regime::REq2p => "R_EQ_2P",
            Regime::RLt2p => "R_LT_2P",
            Regime::Critical => "CRITICAL",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Relative tolerance used to recognise `r = 2p` and `r = p*`.
pub const EXPONENT_MATCH_TOL: f64 = 1e-12;

/// Scalar and weight data of the problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemParams {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub lambda: f64,
    #[serde(serialize_with = "ser_weight")]
    pub f: WeightSpec,
    #[serde(serialize_with = "ser_weight")]
    pub g: WeightSpec,
    /// Regularity constant of the a-priori estimate.
    pub c_star: f64,
    /// Lower bound of `M` used by the critical-case level.
    pub m0: f64,
}

fn ser_weight<S: serde::Serializer>(w: &WeightSpec, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(w.text())
}

impl ProblemParams {
    /// Parameters with `c_star = 1` and `m0 = a`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: f64,
        b: f64,
        p: f64,
        q: f64,
        r: f64,
        s: f64,
        lambda: f64,
        f: WeightSpec,
        g: WeightSpec,
    ) -> Self {
        Self {
            a,
            b,
            p,
            q,
            r,
            s,
            lambda,
            f,
            g,
            c_star: 1.0,
            m0: a,
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    /// `p/(1 - ps)`, the critical exponent in one dimension.
    pub fn critical_exponent(&self) -> f64 {
        self.p / (1.0 - self.p * self.s)
    }

    /// All violated constraints, one message per field.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let finite = [
            ("a", self.a),
            ("b", self.b),
            ("p", self.p),
            ("q", self.q),
            ("r", self.r),
            ("s", self.s),
            ("lambda", self.lambda),
            ("c_star", self.c_star),
            ("m0", self.m0),
        ];
        for (name, x) in finite {
            if !x.is_finite() {
                v.push(format!("{name}: must be finite, got {x}"));
            }
        }
        if !v.is_empty() {
            return v;
        }
        if self.a <= 0.0 {
            v.push(format!("a: requires a > 0, got {}", self.a));
        }
        if self.b <= 0.0 {
            v.push(format!("b: requires b > 0, got {}", self.b));
        }
        if self.p < 2.0 {
            v.push(format!("p: requires p >= 2, got {}", self.p));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            v.push(format!("s: requires 0 < s < 1, got {}", self.s));
        }
        let ps = self.p * self.s;
        if !(ps < 1.0 && 2.0 * ps > 1.0) {
            v.push(format!("s: requires p*s < 1 < 2*p*s, got p*s = {ps}"));
        }
        if self.q <= 1.0 {
            v.push(format!("q: requires 1 < q, got {}", self.q));
        }
        if self.q >= self.p {
            v.push(format!("q: requires q < p, got q = {} and p = {}", self.q, self.p));
        }
        if self.r <= self.p {
            v.push(format!("r: requires r > p, got r = {} and p = {}", self.r, self.p));
        }
        if ps < 1.0 {
            let pstar = self.critical_exponent();
            if self.r > pstar * (1.0 + EXPONENT_MATCH_TOL) {
                v.push(format!(
                    "r: requires r <= p* = {pstar}, got {}",
                    self.r
                ));
            }
        }
        if self.lambda <= 0.0 {
            v.push(format!("lambda: requires lambda > 0, got {}", self.lambda));
        }
        if self.c_star <= 0.0 {
            v.push(format!("c_star: requires c_star > 0, got {}", self.c_star));
        }
        if self.m0 <= 0.0 {
            v.push(format!("m0: requires m0 > 0, got {}", self.m0));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    pub fn regime(&self) -> Regime {
        let pstar = self.critical_exponent();
        let two_p = 2.0 * self.p;
        if (self.r - pstar).abs() <= EXPONENT_MATCH_TOL * pstar {
            Regime::Critical
        } else if (self.r - two_p).abs() <= EXPONENT_MATCH_TOL * two_p {
            Regime::REq2p
        } else if self.r < two_p {
            Regime::RLt2p
        } else {
            Regime::SubcriticalHigh
        }
    }

    /// The interval of admissible truncation levels, open at both ends.
    pub fn truncation_interval(&self) -> (f64, f64) {
        let c = self.a * (self.r - self.p) / self.b;
        (c / self.r, c / self.p)
    }
}

/// `M(t) = a + b t`.
pub fn kirchhoff_m(t: f64, params: &ProblemParams) -> f64 {
    params.a + params.b * t
}

/// `M̂(t) = a t + b t²/2`, the primitive of `M`.
pub fn kirchhoff_m_hat(t: f64, params: &ProblemParams) -> f64 {
    params.a * t + 0.5 * params.b * t * t
}

/// Truncation level `k` strictly inside the admissible interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationParams {
    pub k: f64,
}

impl TruncationParams {
    pub fn new(k: f64, params: &ProblemParams) -> Result<Self> {
        let (lo, hi) = params.truncation_interval();
        if k > lo && k < hi {
            Ok(Self { k })
        } else {
            Err(Error::InvalidParams(format!(
                "trunc.k: requires {lo} < k < {hi}, got {k}"
            )))
        }
    }

    /// Midpoint of the admissible interval.
    pub fn midpoint(params: &ProblemParams) -> Self {
        let (lo, hi) = params.truncation_interval();
        Self { k: 0.5 * (lo + hi) }
    }
}

fn require_truncated_regime(params: &ProblemParams) -> Result<()> {
    match params.regime() {
        Regime::RLt2p => Ok(()),
        found => Err(Error::WrongRegime {
            expected: "R_LT_2P",
            found,
        }),
    }
}

/// `M_k(t)`: `M(t)` up to `k`, constant `M(k)` after.
pub fn truncated_m(t: f64, trunc: &TruncationParams, params: &ProblemParams) -> Result<f64> {
    require_truncated_regime(params)?;
    Ok(Kirchhoff::truncated(params, trunc.k).m(t))
}

/// Primitive of [`truncated_m`].
pub fn truncated_m_hat(t: f64, trunc: &TruncationParams, params: &ProblemParams) -> Result<f64> {
    require_truncated_regime(params)?;
    Ok(Kirchhoff::truncated(params, trunc.k).m_hat(t))
}

/// The Kirchhoff coefficient, optionally truncated at `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kirchhoff {
    pub a: f64,
    pub b: f64,
    pub k: Option<f64>,
}

impl Kirchhoff {
    pub fn plain(params: &ProblemParams) -> Self {
        Self {
            a: params.a,
            b: params.b,
            k: None,
        }
    }

    pub fn truncated(params: &ProblemParams, k: f64) -> Self {
        Self {
            a: params.a,
            b: params.b,
            k: Some(k),
        }
    }

    pub fn m(&self, t: f64) -> f64 {
        match self.k {
            Some(k) if t > k => self.a + self.b * k,
            _ => self.a + self.b * t,
        }
    }

    /// Derivative of `m` (right derivative at the kink).
    pub fn m_prime(&self, t: f64) -> f64 {
        match self.k {
            Some(k) if t >= k => 0.0,
            _ => self.b,
        }
    }

    pub fn m_hat(&self, t: f64) -> f64 {
        let full = |t: f64| self.a * t + 0.5 * self.b * t * t;
        match self.k {
            Some(k) if t > k => full(k) + (self.a + self.b * k) * (t - k),
            _ => full(t),
        }
    }
}

/// The three integrals every fiber quantity is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberScalars {
    /// `‖u‖^p`
    pub a: f64,
    /// `∫ f|u|^q`
    pub f: f64,
    /// `∫ g|u|^r`
    pub g: f64,
    /// `∫ |f||u|^q`
    pub f_mass: f64,
    /// `∫ |g||u|^r`
    pub g_mass: f64,
}

/// A problem instance on a concrete grid: parameters plus sampled weights.
#[derive(Debug, Clone)]
pub struct Problem {
    grid: Arc<GridDomain>,
    params: ProblemParams,
    f: SampledWeight,
    g: SampledWeight,
    truncation: Option<TruncationParams>,
}

impl Problem {
    /// Build the grid and sample the weights. Validates the parameters.
    pub fn new(params: ProblemParams, left: f64, right: f64, n_nodes: usize) -> Result<Self> {
        params.validate()?;
        let grid = Arc::new(GridDomain::new(left, right, n_nodes, params.s, params.p)?);
        Self::on_grid(grid, params)
    }

    pub fn on_grid(grid: Arc<GridDomain>, params: ProblemParams) -> Result<Self> {
        params.validate()?;
        if grid.s() != params.s || grid.p() != params.p {
            return Err(Error::InvalidParams(format!(
                "grid built for s = {}, p = {} but parameters have s = {}, p = {}",
                grid.s(),
                grid.p(),
                params.s,
                params.p
            )));
        }
        let f = params.f.sample(&grid)?;
        let g = params.g.sample(&grid)?;
        Ok(Self {
            grid,
            params,
            f,
            g,
            truncation: None,
        })
    }

    /// Same grid and weights, different `λ`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let params = self.params.with_lambda(lambda);
        params.validate()?;
        Ok(Self {
            params,
            ..self.clone()
        })
    }

    /// Use the truncated functional for all `active_*` evaluations.
    pub fn with_truncation(&self, trunc: TruncationParams) -> Result<Self> {
        require_truncated_regime(&self.params)?;
        TruncationParams::new(trunc.k, &self.params)?;
        Ok(Self {
            truncation: Some(trunc),
            ..self.clone()
        })
    }

    pub fn without_truncation(&self) -> Self {
        Self {
            truncation: None,
            ..self.clone()
        }
    }

    pub fn grid(&self) -> &Arc<GridDomain> {
        &self.grid
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    pub fn f(&self) -> &SampledWeight {
        &self.f
    }

    pub fn g(&self) -> &SampledWeight {
        &self.g
    }

    pub fn regime(&self) -> Regime {
        self.params.regime()
    }

    pub fn truncation(&self) -> Option<TruncationParams> {
        self.truncation
    }

    /// Coefficient in use: truncated iff a truncation is attached.
    pub fn kirchhoff(&self) -> Kirchhoff {
        match self.truncation {
            Some(t) => Kirchhoff::truncated(&self.params, t.k),
            None => Kirchhoff::plain(&self.params),
        }
    }

    pub fn function(&self, values: Vec<f64>) -> Result<DiscreteFunction> {
        DiscreteFunction::new(Arc::clone(&self.grid), values)
    }

    pub fn scalars(&self, u: &DiscreteFunction) -> FiberScalars {
        self.scalars_of(u.values())
    }

    pub(crate) fn scalars_of(&self, u: &[f64]) -> FiberScalars {
        let (q, r) = (self.params.q, self.params.r);
        FiberScalars {
            a: seminorm_p_values(&self.grid, u),
            f: weighted_values(&self.grid, self.f.values(), u, q),
            g: weighted_values(&self.grid, self.g.values(), u, r),
            f_mass: weighted_mass(&self.grid, self.f.values(), u, q),
            g_mass: weighted_mass(&self.grid, self.g.values(), u, r),
        }
    }

    fn energy_from(&self, m: &Kirchhoff, sc: &FiberScalars) -> f64 {
        let pr = &self.params;
        m.m_hat(sc.a) / pr.p - pr.lambda * sc.f / pr.q - sc.g / pr.r
    }

    fn gradient_terms(&self, m: &Kirchhoff, u: &[f64], a: f64) -> [Vec<f64>; 3] {
        let pr = &self.params;
        let coeff = m.m(a) / pr.p;
        let gs = seminorm_gradient_values(&self.grid, u);
        let gf = weighted_gradient(&self.grid, self.f.values(), u, pr.q);
        let gg = weighted_gradient(&self.grid, self.g.values(), u, pr.r);
        [
            gs.iter().map(|s| coeff * s).collect(),
            gf.iter().map(|f| pr.lambda * f / pr.q).collect(),
            gg.iter().map(|g| g / pr.r).collect(),
        ]
    }

    fn gradient_from(&self, m: &Kirchhoff, u: &[f64], a: f64) -> Vec<f64> {
        let [s, f, g] = self.gradient_terms(m, u, a);
        s.iter().zip(&f).zip(&g).map(|((s, f), g)| s - f - g).collect()
    }

    /// Largest nodal size of the three gradient terms, summed in absolute
    /// value. Rounding in the gradient is of order `ε` times this.
    pub(crate) fn active_gradient_scale(&self, u: &[f64]) -> f64 {
        let m = self.kirchhoff();
        let a = self.scalars_of(u).a;
        let [s, f, g] = self.gradient_terms(&m, u, a);
        s.iter()
            .zip(&f)
            .zip(&g)
            .map(|((s, f), g)| s.abs() + f.abs() + g.abs())
            .fold(0.0, f64::max)
    }

    /// `J_λ(u) = M̂(‖u‖^p)/p − (λ/q)∫f|u|^q − (1/r)∫g|u|^r`, never truncated.
    pub fn energy(&self, u: &DiscreteFunction) -> f64 {
        self.energy_from(&Kirchhoff::plain(&self.params), &self.scalars(u))
    }

    /// `J_{λ,k}(u)` with `M̂` replaced by its truncation at `trunc.k`.
    pub fn energy_truncated(&self, u: &DiscreteFunction, trunc: &TruncationParams) -> Result<f64> {
        require_truncated_regime(&self.params)?;
        let m = Kirchhoff::truncated(&self.params, trunc.k);
        Ok(self.energy_from(&m, &self.scalars(u)))
    }

    /// Gradient of [`Problem::energy`] with respect to the nodal values.
    pub fn energy_gradient(&self, u: &DiscreteFunction) -> Vec<f64> {
        let a = seminorm_p_values(&self.grid, u.values());
        self.gradient_from(&Kirchhoff::plain(&self.params), u.values(), a)
    }

    /// Max-norm of [`Problem::energy_gradient`].
    pub fn weak_residual(&self, u: &DiscreteFunction) -> f64 {
        max_norm(&self.energy_gradient(u))
    }

    /// Energy of the functional in use (truncated iff attached).
    pub fn active_energy(&self, u: &DiscreteFunction) -> f64 {
        self.energy_from(&self.kirchhoff(), &self.scalars(u))
    }

    pub fn active_gradient(&self, u: &DiscreteFunction) -> Vec<f64> {
        self.active_value_gradient(u.values()).1
    }

    pub fn active_residual(&self, u: &DiscreteFunction) -> f64 {
        max_norm(&self.active_gradient(u))
    }

    pub(crate) fn active_value_gradient(&self, u: &[f64]) -> (f64, Vec<f64>, FiberScalars) {
        let m = self.kirchhoff();
        let sc = self.scalars_of(u);
        (self.energy_from(&m, &sc), self.gradient_from(&m, u, sc.a), sc)
    }
}

pub(crate) fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
