//! Turning points and level crossings of `ψ`.
//!
//! The sign of `ψ'(t)` is the sign of
//! `h(t) = t^{q+1−p} ψ'(t) = (p−q)aA + (2p−q)bA² t^p − (r−q)G t^{r−p}`
//! below the truncation level and of `(p−q)M(k)A − (r−q)G t^{r−p}` above it.
//! Both have at most two sign changes whose location follows from their
//! shape, so every monotone piece of `ψ` is known before any level is solved.

use super::{Branch, FiberMap, FiberRoot};

const MAX_BISECT: usize = 200;

/// Bisection in `ln t` between points where `f` has opposite signs.
fn bisect_log(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..MAX_BISECT {
        if hi <= lo * (1.0 + 4.0 * f64::EPSILON) {
            break;
        }
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// Walk `t` from `start` by `factor` until `pred(t)`; `None` if it never holds.
fn walk(start: f64, factor: f64, pred: impl Fn(f64) -> bool) -> Option<f64> {
    let mut t = start;
    for _ in 0..2100 {
        if pred(t) {
            return Some(t);
        }
        t *= factor;
        if t == 0.0 || !t.is_finite() {
            return None;
        }
    }
    None
}

struct Shape {
    c0: f64,
    c1: f64,
    c2: f64,
    p: f64,
    rp: f64,
}

impl Shape {
    fn eval(&self, t: f64) -> f64 {
        self.c0 + self.c1 * t.powf(self.p) - self.c2 * t.powf(self.rp)
    }
}

/// Sign changes of the untruncated shape function on `(0, ∞)`.
fn shape_zeros(fm: &FiberMap, a: f64, b: f64) -> Vec<f64> {
    let (p, q, r, big_a, g) = (fm.p, fm.q, fm.r, fm.a_norm, fm.g);
    let sh = Shape {
        c0: (p - q) * a * big_a,
        c1: (2.0 * p - q) * b * big_a * big_a,
        c2: (r - q) * g,
        p,
        rp: r - p,
    };
    if !(sh.c2 > 0.0) || !(sh.c0 > 0.0) {
        return Vec::new();
    }
    let h = |t: f64| sh.eval(t);
    if fm.exact_2p {
        if sh.c2 > sh.c1 {
            return vec![(sh.c0 / (sh.c2 - sh.c1)).powf(1.0 / p)];
        }
        return Vec::new();
    }
    if r > 2.0 * p {
        // one sign change from + to −
        let hi = walk(1.0, 2.0, |t| h(t) < 0.0);
        return match hi {
            Some(hi) => {
                let lo = walk(hi * 0.5, 0.5, |t| h(t) > 0.0).unwrap_or(f64::MIN_POSITIVE);
                vec![bisect_log(h, lo, hi)]
            }
            None => Vec::new(),
        };
    }
    // r < 2p: h decreases then increases, minimum at tc
    let tc = ((r - p) * sh.c2 / (p * sh.c1)).powf(1.0 / (2.0 * p - r));
    if !(h(tc) < 0.0) {
        return Vec::new();
    }
    let lo = walk(tc * 0.5, 0.5, |t| h(t) > 0.0).unwrap_or(f64::MIN_POSITIVE);
    let hi = walk(tc * 2.0, 2.0, |t| h(t) > 0.0);
    let mut out = vec![bisect_log(h, lo, tc)];
    if let Some(hi) = hi {
        out.push(bisect_log(h, tc, hi));
    }
    out
}

pub(super) fn turning_points(fm: &FiberMap) -> Vec<f64> {
    if !(fm.a_norm > 0.0) {
        return Vec::new();
    }
    let (a, b) = (fm.m.a, fm.m.b);
    let Some(k) = fm.m.k else {
        return shape_zeros(fm, a, b);
    };
    let (p, q, r, big_a, g) = (fm.p, fm.q, fm.r, fm.a_norm, fm.g);
    let tk = (k / big_a).powf(1.0 / p);
    let mut out: Vec<f64> = shape_zeros(fm, a, b).into_iter().filter(|&t| t < tk).collect();
    let h1 = (p - q) * a * big_a + (2.0 * p - q) * b * big_a * big_a * tk.powf(p)
        - (r - q) * g * tk.powf(r - p);
    let mk = a + b * k;
    let h2 = |t: f64| (p - q) * mk * big_a - (r - q) * g * t.powf(r - p);
    // the kink lowers h by bpAk, so it can only turn ψ from rising to falling
    let below_positive = out.len() % 2 == 0;
    debug_assert!(below_positive == (h1 >= 0.0) || h1.abs() < 1e-12 * mk * big_a);
    let above = h2(tk);
    if below_positive && above < 0.0 {
        out.push(tk);
    }
    if above > 0.0 && g > 0.0 {
        let t2 = ((p - q) * mk * big_a / ((r - q) * g)).powf(1.0 / (r - p));
        if t2 > tk {
            out.push(t2);
        }
    }
    out
}

pub(super) fn fiber_roots(fm: &FiberMap) -> Vec<FiberRoot> {
    if !(fm.a_norm > 0.0) {
        return Vec::new();
    }
    let line = fm.line();
    let tps = turning_points(fm);
    let resid = |t: f64| fm.psi(t) - line;

    // breakpoints 0 = τ_0 < τ_1 < … < τ_m < τ_{m+1} = ∞, ψ increasing on the first piece
    let mut cuts = Vec::with_capacity(tps.len() + 2);
    cuts.push(0.0);
    cuts.extend(tps.iter().copied());
    cuts.push(f64::INFINITY);

    let mut roots = Vec::new();
    for (i, w) in cuts.windows(2).enumerate() {
        let (lo, hi) = (w[0], w[1]);
        let increasing = i % 2 == 0;
        // values of ψ − λF at the ends
        let v_lo = if lo == 0.0 { -line } else { resid(lo) };
        let v_hi_sign = if hi.is_infinite() {
            if increasing {
                1.0
            } else {
                -1.0
            }
        } else {
            resid(hi).signum()
        };
        if !(v_lo != 0.0 && v_hi_sign != 0.0 && (v_lo > 0.0) != (v_hi_sign > 0.0)) {
            continue;
        }
        let want_lo = v_lo > 0.0;
        let b_hi = if hi.is_infinite() {
            let start = if lo > 0.0 { lo * 2.0 } else { 1.0 };
            match walk(start, 2.0, |t| (resid(t) > 0.0) != want_lo && resid(t) != 0.0) {
                Some(t) => t,
                None => continue,
            }
        } else {
            hi
        };
        let b_lo = if lo == 0.0 {
            match walk(b_hi * 0.5, 0.5, |t| (resid(t) > 0.0) == want_lo && resid(t) != 0.0) {
                Some(t) => t,
                None => continue,
            }
        } else {
            lo
        };
        let mut t = bisect_log(resid, b_lo, b_hi);
        // one safeguarded Newton step
        let d = fm.psi_prime(t);
        if d != 0.0 && d.is_finite() {
            let tn = t - resid(t) / d;
            if tn > b_lo && tn < b_hi && resid(tn).abs() < resid(t).abs() {
                t = tn;
            }
        }
        roots.push(FiberRoot {
            t,
            branch: if increasing { Branch::Plus } else { Branch::Minus },
            psi_prime: fm.psi_prime(t),
            residual: resid(t).abs() / fm.scale(t),
        });
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::WeightSpec;
    use crate::functional::{Kirchhoff, ProblemParams};

    fn params(r: f64, lambda: f64) -> ProblemParams {
        ProblemParams::new(
            1.0,
            1.0,
            2.0,
            1.5,
            r,
            0.4,
            lambda,
            WeightSpec::constant(1.0),
            WeightSpec::constant(1.0),
        )
    }

    fn count_sign_changes(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> usize {
        let mut prev = f(lo).signum();
        let mut count = 0;
        for i in 1..=n {
            let t = lo * (hi / lo).powf(i as f64 / n as f64);
            let s = f(t).signum();
            if s != 0.0 && s != prev {
                count += 1;
                prev = s;
            }
        }
        count
    }

    #[test]
    fn scalar_surrogate_t_max_matches_scan() {
        // A = G = 1, a = b = 1, p = 2, q = 1.5, r = 5: ψ' = 0.5t^{-0.5} + 2.5t^{1.5} − 3.5t^{2.5}
        let pr = params(5.0, 0.1);
        let fm = FiberMap::from_scalars(1.0, 1.0, 1.0, &pr, Kirchhoff::plain(&pr));
        let d = |t: f64| 0.5 * t.powf(-0.5) + 2.5 * t.powf(1.5) - 3.5 * t.powf(2.5);
        // independent scan + bisection
        let n = 100_000;
        let mut lo = 0.0;
        let mut hi = 0.0;
        for i in 1..n {
            let t0 = 0.01 + 10.0 * (i - 1) as f64 / n as f64;
            let t1 = 0.01 + 10.0 * i as f64 / n as f64;
            if d(t0) > 0.0 && d(t1) <= 0.0 {
                lo = t0;
                hi = t1;
                break;
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if d(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let tm = fm.t_max().unwrap();
        assert!((tm - lo).abs() < 1e-8, "{tm} vs {lo}");
        assert!((fm.psi_prime(tm) - d(tm)).abs() < 1e-12);
    }

    #[test]
    fn r_below_2p_can_have_two_turning_points() {
        let pr = params(3.0, 0.1);
        // large G relative to A makes h dip below zero
        let fm = FiberMap::from_scalars(1.0, 1.0, 3.0, &pr, Kirchhoff::plain(&pr));
        let tps = fm.turning_points();
        let n = count_sign_changes(|t| fm.psi_prime(t), 1e-6, 1e6, 20_000);
        assert_eq!(tps.len(), n);
        assert_eq!(n, 2);
    }

    #[test]
    fn truncated_kink_is_a_turning_point() {
        let pr = params(3.0, 0.1);
        let k = 5.0 / 12.0;
        let fm = FiberMap::from_scalars(1.0, 1.0, 0.02, &pr, Kirchhoff::truncated(&pr, k));
        let tps = fm.turning_points();
        let n = count_sign_changes(|t| fm.psi_prime(t), 1e-6, 1e6, 20_000);
        assert_eq!(tps.len(), n, "{tps:?}");
        for r in fm.roots() {
            assert!(r.residual < 1e-12);
        }
    }

    #[test]
    fn roots_match_a_dense_scan() {
        let pr = params(5.0, 0.2);
        let fm = FiberMap::from_scalars(1.3, 0.8, 0.9, &pr, Kirchhoff::plain(&pr));
        let roots = fm.roots();
        let n = count_sign_changes(|t| fm.psi(t) - fm.line(), 1e-6, 1e3, 50_000);
        assert_eq!(roots.len(), n);
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].branch, Branch::Plus);
        assert_eq!(roots[1].branch, Branch::Minus);
        let tm = fm.t_max().unwrap();
        assert!(roots[0].t < tm && tm < roots[1].t);
        assert!(roots.iter().all(|r| r.residual < 1e-13));
    }
}
