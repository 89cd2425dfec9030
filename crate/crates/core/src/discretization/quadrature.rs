//! Exact quadrature for step functions on a [`GridDomain`].
//!
//! The seminorm is the double integral over the whole line of
//! `|u(x) - u(y)|^p |x - y|^{-1-ps}` for the piecewise-constant extension of
//! `u`. Because the kernel is integrated exactly per cell pair and per cell
//! against the exterior, the only approximation is the step representation
//! itself.

use super::grid::{DiscreteFunction, GridDomain};
use super::weight::SampledWeight;

/// `|x|^e`, with exact fast paths for the common integer exponents.
#[inline]
pub fn abs_pow(x: f64, e: f64) -> f64 {
    let a = x.abs();
    if e == 2.0 {
        a * a
    } else if e == 3.0 {
        a * a * a
    } else if e == 4.0 {
        let a2 = a * a;
        a2 * a2
    } else if a == 0.0 {
        0.0
    } else {
        a.powf(e)
    }
}

/// `|x|^{e-2} x`, continuously extended by 0 at `x = 0` (valid for `e > 1`).
#[inline]
pub fn signed_pow(x: f64, e: f64) -> f64 {
    if e == 2.0 {
        x
    } else if e == 3.0 {
        x * x.abs()
    } else if e == 4.0 {
        x * x * x
    } else if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e - 1.0)
    }
}

/// `‖u‖_{X_0}^p`, the p-th power of the Gagliardo seminorm.
pub fn gagliardo_seminorm_p(u: &DiscreteFunction) -> f64 {
    seminorm_p_values(u.grid(), u.values())
}

pub(crate) fn seminorm_p_values(grid: &GridDomain, u: &[f64]) -> f64 {
    let p = grid.p();
    let n = u.len();
    let mut interior = 0.0;
    for i in 0..n {
        let row = grid.pair_row(i);
        let ui = u[i];
        let mut acc = 0.0;
        for j in (i + 1)..n {
            acc += abs_pow(ui - u[j], p) * row[j];
        }
        interior += acc;
    }
    let exterior: f64 = u
        .iter()
        .zip(grid.tails())
        .map(|(&ui, &t)| abs_pow(ui, p) * t)
        .sum();
    2.0 * (interior + exterior)
}

/// Gradient of [`gagliardo_seminorm_p`] with respect to the nodal values.
///
/// Entry `i` equals `p ⟨u, φ_i⟩`, where `φ_i` is the indicator of cell `i`
/// and `⟨u, φ⟩` is the p-Laplacian pairing
/// `∬ |u(x)-u(y)|^{p-2}(u(x)-u(y))(φ(x)-φ(y)) |x-y|^{-1-ps}`.
pub fn seminorm_p_gradient(u: &DiscreteFunction) -> Vec<f64> {
    seminorm_gradient_values(u.grid(), u.values())
}

pub(crate) fn seminorm_gradient_values(grid: &GridDomain, u: &[f64]) -> Vec<f64> {
    let p = grid.p();
    let n = u.len();
    let mut grad = vec![0.0; n];
    for i in 0..n {
        let row = grid.pair_row(i);
        let ui = u[i];
        let mut acc = 0.0;
        for j in 0..n {
            if j != i {
                acc += signed_pow(ui - u[j], p) * row[j];
            }
        }
        grad[i] = 2.0 * p * (acc + signed_pow(ui, p) * grid.tail_weight(i));
    }
    grad
}

/// `∫_Ω w |u|^e dx` on the cell partition, weight sampled at the nodes.
pub fn weighted_integral(u: &DiscreteFunction, w: &SampledWeight, exponent: f64) -> f64 {
    weighted_values(u.grid(), w.values(), u.values(), exponent)
}

pub(crate) fn weighted_values(grid: &GridDomain, w: &[f64], u: &[f64], exponent: f64) -> f64 {
    u.iter()
        .zip(w)
        .enumerate()
        .map(|(i, (&ui, &wi))| grid.cell_width(i) * wi * abs_pow(ui, exponent))
        .sum()
}

/// `∫_Ω |w| |u|^e dx`, the mass used to decide whether a weighted integral
/// is numerically zero.
pub(crate) fn weighted_mass(grid: &GridDomain, w: &[f64], u: &[f64], exponent: f64) -> f64 {
    u.iter()
        .zip(w)
        .enumerate()
        .map(|(i, (&ui, &wi))| grid.cell_width(i) * wi.abs() * abs_pow(ui, exponent))
        .sum()
}

/// Gradient of `∫ w |u|^e` with respect to nodal values.
pub(crate) fn weighted_gradient(grid: &GridDomain, w: &[f64], u: &[f64], exponent: f64) -> Vec<f64> {
    u.iter()
        .zip(w)
        .enumerate()
        .map(|(i, (&ui, &wi))| exponent * grid.cell_width(i) * wi * signed_pow(ui, exponent))
        .collect()
}

/// `∫_Ω |u|^e dx`.
pub fn lebesgue_integral(u: &DiscreteFunction, exponent: f64) -> f64 {
    let grid = u.grid();
    u.values()
        .iter()
        .enumerate()
        .map(|(i, &ui)| grid.cell_width(i) * abs_pow(ui, exponent))
        .sum()
}

/// `‖w‖_{L^e(Ω)}` of a sampled weight on the cell partition.
pub fn weight_lebesgue_norm(grid: &GridDomain, w: &SampledWeight, exponent: f64) -> f64 {
    let sum: f64 = w
        .values()
        .iter()
        .enumerate()
        .map(|(i, &wi)| grid.cell_width(i) * abs_pow(wi, exponent))
        .sum();
    sum.powf(1.0 / exponent)
}
