//! Nehari-manifold solver for the one-dimensional fractional p-Kirchhoff
//! problem with sign-changing weights
//!
//! ```text
//! M(‖u‖^p) (−Δ)^s_p u = λ f(x)|u|^{q−2}u + g(x)|u|^{r−2}u  in Ω,   u = 0 outside Ω,
//! ```
//!
//! with `M(t) = a + b t` and `1 < q < p < r ≤ p*`.
//!
//! The crate discretizes the energy on a uniform grid with exact kernel
//! quadrature, analyses fiber maps `t ↦ J(tu)`, computes the parameter
//! thresholds that govern the branch structure, and minimizes the energy over
//! the two Nehari branches.

pub mod descent;
pub mod discretization;
pub mod error;
pub mod fiber;
pub mod functional;
pub mod runner;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
