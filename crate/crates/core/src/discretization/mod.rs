//! Grid, weights and quadrature on a bounded interval.

mod embedding;
mod grid;
mod quadrature;
mod weight;

pub use embedding::{
    capital_lambda_quotient, estimate_capital_lambda, estimate_sobolev_constant,
    normalize_to_constraint, rayleigh_quotient, EmbeddingEstimate, EmbeddingOptions,
};
pub use grid::{DiscreteFunction, GridDomain};
pub use quadrature::{
    abs_pow, gagliardo_seminorm_p, lebesgue_integral, seminorm_p_gradient, signed_pow,
    weight_lebesgue_norm, weighted_integral,
};
pub(crate) use quadrature::{
    seminorm_gradient_values, seminorm_p_values, weighted_gradient, weighted_mass, weighted_values,
};
pub use weight::{parse_weight, SampledWeight, SignClass, WeightSpec};
