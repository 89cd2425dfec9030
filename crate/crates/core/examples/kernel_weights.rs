//! Grid cells, interaction weights and the discrete Gagliardo seminorm.

use std::sync::Arc;

use kirchhoff_nehari::discretization::{gagliardo_seminorm_p, DiscreteFunction, GridDomain};

fn main() -> kirchhoff_nehari::Result<()> {
    let grid = Arc::new(GridDomain::new(-1.0, 1.0, 7, 0.4, 2.0)?);
    println!("h = {}  critical exponent = {:.4}", grid.h(), grid.critical_exponent());
    for i in 0..grid.n_nodes() {
        println!(
            "node {i}: x = {:+.4}  width = {:.4}  tail = {:.4e}  W(i, i+1) = {}",
            grid.node(i),
            grid.cell_width(i),
            grid.tail_weight(i),
            if i + 1 < grid.n_nodes() {
                format!("{:.4e}", grid.pair_weight(i, i + 1))
            } else {
                "-".into()
            }
        );
    }

    let bump = DiscreteFunction::from_fn(grid.clone(), |x| 1.0 - x * x);
    let s = gagliardo_seminorm_p(&bump);
    println!("||1 - x^2||^p = {s:.8}");
    println!("||3(1 - x^2)||^p / 3^p = {:.8}", gagliardo_seminorm_p(&bump.scaled(3.0)) / 9.0);
    Ok(())
}
