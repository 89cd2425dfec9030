//! Two nonnegative solutions for `p = 2, q = 1.5, r = 5` at `λ = λ₀/2`.

use std::time::Instant;

use kirchhoff_nehari::discretization::WeightSpec;
use kirchhoff_nehari::fiber::{compute_thresholds, ThresholdOptions};
use kirchhoff_nehari::functional::{Problem, ProblemParams};
use kirchhoff_nehari::solver::{solve_with_thresholds, SolverOptions};

fn main() -> kirchhoff_nehari::Result<()> {
    let params = ProblemParams::new(
        1.0,
        1.0,
        2.0,
        1.5,
        5.0,
        0.4,
        1.0,
        WeightSpec::parse("1")?,
        WeightSpec::parse("1")?,
    );
    let problem = Problem::new(params, -1.0, 1.0, 31)?;
    let start = Instant::now();
    let table = compute_thresholds(&problem, &ThresholdOptions::default())?;
    println!(
        "S_r = {:.6}  lambda1 = {:.6e}  lambda2 = {:.6e}  lambda0 = {:.6e}",
        table.constants.s_r, table.lambda1, table.lambda2, table.lambda0
    );
    let problem = problem.with_lambda(0.5 * table.lambda0)?;
    let report = solve_with_thresholds(&problem, &table, &SolverOptions::default())?;

    for out in [&report.plus, &report.minus].into_iter().flatten() {
        let pt = &out.point;
        println!(
            "{:>5}: J = {:+.10e}  phi'' = {:+.3e}  residual = {:.2e}  iterations = {}  restart = {}",
            pt.branch.to_string(),
            pt.energy,
            pt.second_deriv,
            pt.weak_residual,
            out.iterations,
            out.restart
        );
    }
    if let Some(d) = report.distinctness {
        println!("distinctness = {d:.4e}");
    }
    println!("flags = {:?}", report.flags);
    println!("elapsed = {:.2?}", start.elapsed());
    Ok(())
}
