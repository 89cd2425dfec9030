//! Compare the branch minimizers with an exhaustive direction scan on four nodes.

use kirchhoff_nehari::discretization::WeightSpec;
use kirchhoff_nehari::fiber::ThresholdOptions;
use kirchhoff_nehari::functional::{Problem, ProblemParams};
use kirchhoff_nehari::solver::{brute_force_oracle, solve, OracleOptions, SolverOptions};

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
    let probe = Problem::new(params, -1.0, 1.0, 4)?;
    let table = kirchhoff_nehari::fiber::compute_thresholds(&probe, &ThresholdOptions::default())?;
    let problem = probe.with_lambda(0.5 * table.lambda0)?;

    let report = solve(&problem, &SolverOptions::default(), &ThresholdOptions::default())?;
    let oracle = brute_force_oracle(&problem, &OracleOptions::default())?;
    println!("{} directions scanned", oracle.directions);
    println!("theta+  solver {:?}  oracle {:?}  scan {:?}", report.theta_plus, oracle.theta_plus, oracle.scan_plus);
    println!("theta-  solver {:?}  oracle {:?}  scan {:?}", report.theta_minus, oracle.theta_minus, oracle.scan_minus);
    Ok(())
}
