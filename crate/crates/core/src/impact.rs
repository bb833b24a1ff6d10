//! Ultimate impact of a paper: the final size of its citation epidemic.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::sir::EpidemicParams;

const BISECTION_ITERS: usize = 200;
const NEWTON_POLISH: usize = 3;
/// `|R0 - 1|` below which the nonzero root of the reduced equation merges with zero.
const THRESHOLD_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactEstimate {
    /// Total citations ever acquired.
    pub upsilon_inf: f64,
    /// `upsilon_inf / S0`.
    pub upsilon_rel: f64,
    pub r0: f64,
    pub rho: f64,
}

/// `beta / gamma`.
pub fn basic_reproductive_number(params: &EpidemicParams) -> Result<f64> {
    if params.gamma() == 0.0 {
        return Err(domain("gamma must be positive"));
    }
    Ok(params.r0())
}

/// Positive root of `Y = S0 * (1 - exp(-(Y + I0) / (N rho)))` with `N = S0 + I0`.
pub fn solve_ultimate_impact(params: &EpidemicParams) -> ImpactEstimate {
    ultimate_impact(params.s0(), params.beta(), params.gamma(), params.i0())
        .expect("validated params always admit a root")
}

/// Same as [`solve_ultimate_impact`] on raw values; `i0 = 0` is allowed here.
///
/// With `i0 = 0` the zero root is returned unless `R0 > 1`.
pub fn ultimate_impact(s0: f64, beta: f64, gamma: f64, i0: f64) -> Result<ImpactEstimate> {
    if !(s0.is_finite() && s0 > 0.0) {
        return Err(domain(format!("s0 must be positive, got {s0}")));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(domain(format!("beta must be non-negative, got {beta}")));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(domain(format!("gamma must be positive, got {gamma}")));
    }
    if !(i0.is_finite() && i0 >= 0.0) {
        return Err(domain(format!("i0 must be non-negative, got {i0}")));
    }
    let n = s0 + i0;
    let r0 = beta / gamma;
    let rho = gamma / beta;
    let finish = |y: f64| ImpactEstimate { upsilon_inf: y, upsilon_rel: y / s0, r0, rho };
    if beta == 0.0 {
        return Ok(finish(0.0));
    }
    // g is convex with g(S0) > 0; a sign change on [eps, S0] brackets the unique positive root.
    let scale = beta / (n * gamma);
    let g = |y: f64| y + s0 * (-(y + i0) * scale).exp_m1();
    let dg = |y: f64| 1.0 - s0 * scale * (-(y + i0) * scale).exp();
    let lo = 1e-9 * s0;
    if g(lo) >= 0.0 {
        // Only reachable with i0 = 0 and R0 <= 1 (or a root inside [0, eps]).
        return Ok(finish(if i0 == 0.0 { 0.0 } else { lo }));
    }
    let y = bisect_then_polish(g, dg, lo, s0);
    Ok(finish(y))
}

/// Largest root in `[0, 1)` of `u = 1 - exp(-u / rho)`; zero when `rho >= 1`.
pub fn solve_upsilon(rho: f64) -> Result<f64> {
    if !(rho > 0.0) || rho.is_nan() {
        return Err(domain(format!("rho must be positive, got {rho}")));
    }
    if rho >= 1.0 || (1.0 / rho - 1.0).abs() < THRESHOLD_EPS {
        return Ok(0.0);
    }
    if rho.is_infinite() {
        return Ok(0.0);
    }
    let f = |u: f64| -(-u / rho).exp_m1() - u;
    let df = |u: f64| (-u / rho).exp() / rho - 1.0;
    // f(u) > 0 for 0 < u < 2 rho (1 - rho); f(1) < 0.
    let lo = rho * (1.0 - rho);
    if f(1.0) >= 0.0 {
        // exp(-1/rho) underflowed: the root is 1 to double precision.
        return Ok(1.0);
    }
    Ok(bisect_then_polish(|u| -f(u), |u| -df(u), lo, 1.0))
}

/// Root of an increasing-through-zero `g` on `[lo, hi]` with `g(lo) < 0 <= g(hi)`.
fn bisect_then_polish(g: impl Fn(f64) -> f64, dg: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..NEWTON_POLISH {
        let d = dg(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - g(x) / d;
        if next.is_finite() && next >= lo && next <= hi && g(next).abs() <= g(x).abs() {
            x = next;
        } else {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(s0: f64, beta: f64, gamma: f64) -> EpidemicParams {
        EpidemicParams::new(s0, beta, gamma, 1.0).unwrap()
    }

    #[test]
    fn reproductive_number() {
        assert_relative_eq!(basic_reproductive_number(&params(42000.0, 9.36, 9.25)).unwrap(), 9.36 / 9.25);
        assert!((basic_reproductive_number(&params(42000.0, 9.36, 9.25)).unwrap() - 1.01189).abs() < 1e-5);
        assert_eq!(basic_reproductive_number(&params(10.0, 0.4, 0.4)).unwrap(), 1.0);
        assert_relative_eq!(basic_reproductive_number(&params(1050.0, 0.13, 0.10)).unwrap(), 1.3, max_relative = 1e-15);
    }

    #[test]
    fn residual_is_tiny() {
        for p in [params(42000.0, 9.36, 9.25), params(3150.0, 0.48, 0.47), params(1050.0, 0.13, 0.10), params(10.0, 0.1, 1.0)] {
            let est = solve_ultimate_impact(&p);
            let y = est.upsilon_inf;
            let resid = y - p.s0() * (1.0 - (-(y + p.i0()) / (p.n() * p.rho())).exp());
            assert!(resid.abs() <= 1e-9 * p.s0(), "{p:?}: {resid}");
            assert!(y > 0.0 && y <= p.s0());
            assert_relative_eq!(est.upsilon_rel * p.s0(), y, max_relative = 1e-12);
            assert_relative_eq!(est.r0 * est.rho, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_seed_below_threshold() {
        let est = ultimate_impact(1000.0, 0.3, 0.3, 0.0).unwrap();
        assert_eq!(est.upsilon_inf, 0.0);
        let est = ultimate_impact(1000.0, 0.2, 0.3, 0.0).unwrap();
        assert_eq!(est.upsilon_inf, 0.0);
        let est = ultimate_impact(1000.0, 0.6, 0.3, 0.0).unwrap();
        assert!(est.upsilon_inf > 700.0);
    }

    #[test]
    fn no_transmission_no_citations() {
        assert_eq!(ultimate_impact(1000.0, 0.0, 0.3, 1.0).unwrap().upsilon_inf, 0.0);
    }

    #[test]
    fn upsilon_threshold_and_errors() {
        assert_eq!(solve_upsilon(1.2).unwrap(), 0.0);
        assert_eq!(solve_upsilon(1.0).unwrap(), 0.0);
        assert!(solve_upsilon(0.0).is_err());
        assert!(solve_upsilon(-1.0).is_err());
        assert!(solve_upsilon(f64::NAN).is_err());
        assert!(solve_upsilon(1e-3).unwrap() > 1.0 - 1e-4);
    }

    #[test]
    fn upsilon_brackets_root() {
        for rho in [0.05, 0.3, 0.5, 0.9, 0.999] {
            let u = solve_upsilon(rho).unwrap();
            let f = |u: f64| 1.0 - (-u / rho).exp() - u;
            let eps = 1e-6;
            assert!(f(u - eps) > 0.0 && f(u + eps) < 0.0, "rho {rho}");
        }
    }
}
