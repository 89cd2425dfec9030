//! Existence thresholds in the three growth regimes `r > 2p`, `r = 2p`, `r < 2p`.

use kirchhoff_nehari::discretization::WeightSpec;
use kirchhoff_nehari::fiber::{compute_thresholds, ThresholdOptions};
use kirchhoff_nehari::functional::{Problem, ProblemParams};

fn main() -> kirchhoff_nehari::Result<()> {
    for (r, b) in [(5.0, 1.0), (4.0, 0.005), (3.0, 0.01)] {
        let params = ProblemParams::new(
            1.0,
            b,
            2.0,
            1.5,
            r,
            0.4,
            0.1,
            WeightSpec::parse("1 + 0.5*cos(pi*x)")?,
            WeightSpec::parse("1")?,
        );
        let problem = Problem::new(params, -1.0, 1.0, 15)?;
        let t = compute_thresholds(&problem, &ThresholdOptions::default())?;
        println!("r = {r}, b = {b}: regime {}", t.regime);
        println!("  S_r = {:.6}  l = {:.6}", t.constants.s_r, t.constants.f_norm);
        println!("  lambda1 = {:.6e}  lambda2 = {:.6e}  lambda0 = {:.6e}", t.lambda1, t.lambda2, t.lambda0);
        if let Some(v) = t.b_capital_lambda {
            println!("  b*Lambda = {v:.6}  lambda^0 = {:?}", t.lambda_sup0);
        }
        if let Some(v) = t.lambda_hat0 {
            println!("  lambda^1 = {:?}  lambda_hat0 = {v:.6e}  b condition = {:?}", t.lambda_sup1, t.b_condition);
        }
        if let Some(c) = t.critical_c {
            println!("  critical C = {c:.6e}");
        }
    }
    Ok(())
}
