//! Seeded random directions for multi-start searches.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::discretization::GridDomain;

/// Deterministic stream for restart `index` under a base `seed`.
pub fn restart_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random smooth nodal vector: a sine series with `1/m`-decaying random
/// amplitudes plus a little nodal noise.
pub fn smooth_direction<R: Rng + ?Sized>(grid: &GridDomain, rng: &mut R, modes: usize) -> Vec<f64> {
    let len = grid.length();
    let amps: Vec<f64> = (1..=modes)
        .map(|m| {
            let z: f64 = StandardNormal.sample(rng);
            z / m as f64
        })
        .collect();
    grid.nodes()
        .map(|x| {
            let xi = (x - grid.left()) / len;
            let smooth: f64 = amps
                .iter()
                .enumerate()
                .map(|(k, a)| a * ((k as f64 + 1.0) * std::f64::consts::PI * xi).sin())
                .sum();
            let noise: f64 = StandardNormal.sample(rng);
            smooth + 0.05 * noise
        })
        .collect()
}

/// Like [`smooth_direction`] but with a positive bump added and the result
/// folded to nonnegative values.
pub fn positive_direction<R: Rng + ?Sized>(grid: &GridDomain, rng: &mut R) -> Vec<f64> {
    let len = grid.length();
    let bump: f64 = rng.random_range(0.5..2.0);
    smooth_direction(grid, rng, 6)
        .into_iter()
        .zip(grid.nodes())
        .map(|(v, x)| {
            let xi = (x - grid.left()) / len;
            (v + bump * (std::f64::consts::PI * xi).sin()).abs()
        })
        .collect()
}

/// Independent standard normal entries.
pub fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}
