//! Gradient descent with Barzilai–Borwein trial steps, Armijo backtracking
//! and a retraction back onto the feasible set after every step.

#[derive(Debug, Clone, Copy)]
pub struct DescentOptions {
    pub max_iter: usize,
    /// Stop once the stationarity measure drops below this.
    pub tol: f64,
    /// Sufficient-decrease constant.
    pub armijo: f64,
    /// Increase in value tolerated by the line search, relative to `1 + |f|`.
    /// Keeps the search from stalling on rounding noise near a minimum.
    pub slack: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            tol: 1e-8,
            armijo: 1e-4,
            slack: 1e-14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad: Vec<f64>,
    pub stationarity: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The line search could not find an acceptable step.
    pub stalled: bool,
    /// Largest accepted increase of the value between iterates (0 if monotone).
    pub max_increase: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize from a feasible `x0`.
///
/// `eval` returns value and gradient, or `None` outside the domain.
/// `retract` maps a trial point back onto the feasible set (or `None`).
/// `stationarity(x, g)` is the convergence measure. `observe` sees every
/// accepted iterate, including the start.
pub fn descend<E, R, S, O>(
    x0: Vec<f64>,
    eval: E,
    retract: R,
    stationarity: S,
    mut observe: O,
    opts: &DescentOptions,
) -> Option<DescentOutcome>
where
    E: Fn(&[f64]) -> Option<(f64, Vec<f64>)>,
    R: Fn(Vec<f64>) -> Option<Vec<f64>>,
    S: Fn(&[f64], &[f64]) -> f64,
    O: FnMut(&[f64], f64),
{
    let mut x = x0;
    let (mut f, mut g) = eval(&x)?;
    observe(&x, f);
    let xnorm = dot(&x, &x).sqrt();
    let gnorm = dot(&g, &g).sqrt();
    let mut tau = if gnorm > 0.0 {
        0.1 * xnorm.max(1e-300) / gnorm
    } else {
        1.0
    };
    let mut max_increase: f64 = 0.0;
    let mut stalled = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let st = stationarity(&x, &g);
        if st < opts.tol {
            return Some(DescentOutcome {
                x,
                value: f,
                grad: g,
                stationarity: st,
                iterations,
                converged: true,
                stalled: false,
                max_increase,
            });
        }
        let g2 = dot(&g, &g);
        let xn = dot(&x, &x).sqrt();
        let mut accepted = None;
        loop {
            if tau * g2.sqrt() <= 1e-16 * xn.max(1e-300) {
                break;
            }
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - tau * gi).collect();
            if let Some(xt) = retract(trial) {
                if let Some((ft, gt)) = eval(&xt) {
                    let allowed = f - opts.armijo * tau * g2 + opts.slack * (1.0 + f.abs());
                    if ft <= allowed {
                        accepted = Some((xt, ft, gt));
                        break;
                    }
                }
            }
            tau *= 0.5;
        }
        let Some((xn_, fn_, gn_)) = accepted else {
            stalled = true;
            break;
        };
        iterations += 1;
        max_increase = max_increase.max(fn_ - f);
        let s: Vec<f64> = xn_.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn_.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let ss = dot(&s, &s);
        tau = if sy > 0.0 && ss > 0.0 { ss / sy } else { 2.0 * tau };
        x = xn_;
        f = fn_;
        g = gn_;
        observe(&x, f);
    }

    let st = stationarity(&x, &g);
    Some(DescentOutcome {
        converged: st < opts.tol,
        x,
        value: f,
        grad: g,
        stationarity: st,
        iterations,
        stalled,
        max_increase,
    })
}
