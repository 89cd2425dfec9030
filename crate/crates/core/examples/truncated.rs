//! Solve with the truncated Kirchhoff term for `r < 2p` and check that the
//! solutions stay below the cut, where both functionals agree.

use kirchhoff_nehari::discretization::WeightSpec;
use kirchhoff_nehari::fiber::ThresholdOptions;
use kirchhoff_nehari::functional::{Problem, ProblemParams};
use kirchhoff_nehari::solver::{solve, SolverOptions};

fn main() -> kirchhoff_nehari::Result<()> {
    let params = ProblemParams::new(
        1.0,
        0.01,
        2.0,
        1.5,
        3.0,
        0.4,
        1.0,
        WeightSpec::parse("1")?,
        WeightSpec::parse("10")?,
    );
    let probe = Problem::new(params, -1.0, 1.0, 15)?;
    let table = kirchhoff_nehari::fiber::compute_thresholds(&probe, &ThresholdOptions::default())?;
    let lambda = 0.5 * table.lambda_hat0()?;
    println!("lambda_hat0 = {:.6e}  k = {:?}", table.lambda_hat0()?, table.trunc_k);

    let report = solve(&probe.with_lambda(lambda)?, &SolverOptions::default(), &ThresholdOptions::default())?;
    println!("theta+ = {:?}  theta- = {:?}", report.theta_plus, report.theta_minus);
    if let Some(tr) = &report.truncation {
        println!(
            "within cut: plus {:?} minus {:?}; energy gaps {:?} {:?}",
            tr.plus_within, tr.minus_within, tr.plus_energy_gap, tr.minus_energy_gap
        );
    }
    println!("flags = {:?}", report.flags);
    Ok(())
}
