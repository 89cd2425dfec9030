//! Shape of the fiber map `t ↦ J(tu)` for one direction, and its Nehari roots.

use kirchhoff_nehari::discretization::WeightSpec;
use kirchhoff_nehari::fiber::{classify, find_fiber_roots, FiberMap};
use kirchhoff_nehari::functional::{Problem, ProblemParams};

fn main() -> kirchhoff_nehari::Result<()> {
    let params = ProblemParams::new(
        1.0,
        1.0,
        2.0,
        1.5,
        5.0,
        0.4,
        0.5,
        WeightSpec::parse("1")?,
        WeightSpec::parse("1")?,
    );
    let problem = Problem::new(params, -1.0, 1.0, 15)?;
    let u = problem.function((0..15).map(|i| ((i + 1) as f64 * 0.2).sin()).collect())?;

    println!("classes: {:?}", classify(&u, &problem)?);
    let fm = FiberMap::of(&u, &problem);
    for t in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        println!("t = {t:>5}: psi = {:+.6e}  phi = {:+.6e}", fm.psi(t), fm.phi(t));
    }
    let report = find_fiber_roots(&u, &problem)?;
    println!("lambda F = {:.6e}  t_max = {:?}", report.lambda_line, report.t_max);
    for root in &report.roots {
        println!(
            "{:>5} root t = {:.10}  psi' = {:+.3e}  residual = {:.1e}",
            root.branch.to_string(),
            root.t,
            root.psi_prime,
            root.residual
        );
    }
    Ok(())
}
