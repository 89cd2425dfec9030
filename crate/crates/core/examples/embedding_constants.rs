//! Multi-start estimates of the Sobolev constant and of `Λ` on refined grids.

use std::sync::Arc;

use kirchhoff_nehari::discretization::{
    estimate_capital_lambda, estimate_sobolev_constant, EmbeddingOptions, GridDomain, WeightSpec,
};

fn main() -> kirchhoff_nehari::Result<()> {
    let opts = EmbeddingOptions::default();
    for n in [7, 15, 31] {
        let grid = Arc::new(GridDomain::new(-1.0, 1.0, n, 0.4, 2.0)?);
        let s_r = estimate_sobolev_constant(&grid, 5.0, &opts)?;
        let g = WeightSpec::parse("1")?.sample(&grid)?;
        let cap = estimate_capital_lambda(&grid, &g, &opts)?;
        println!(
            "n = {n:>2}: S_5 = {:.6} ({}/{} starts converged)  Lambda = {:.6}",
            s_r.value, s_r.converged_restarts, s_r.restarts, cap.value
        );
    }
    Ok(())
}
