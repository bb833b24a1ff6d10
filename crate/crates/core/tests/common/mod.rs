//! Test-only oracles, independent of the library's numerical paths.
#![allow(dead_code)]

/// The three parameter triples `[S0, beta, gamma]` of the reference fits.
pub const REFERENCE_TRIPLES: [(f64, f64, f64); 3] = [(42000.0, 9.36, 9.25), (3150.0, 0.48, 0.47), (1050.0, 0.13, 0.10)];
/// Reference ultimate impacts for the triples above.
pub const REFERENCE_UPSILON_INF: [f64; 3] = [1060.0, 166.0, 446.0];

/// Adaptive Dormand–Prince 5(4) integration of the SIR system; returns
/// `S0 - S(t)` at integer months `0..=months`.
pub fn dopri_upsilon(s0: f64, beta: f64, gamma: f64, i0: f64, months: usize, tol: f64) -> Vec<f64> {
    let n = s0 + i0;
    let f = |y: [f64; 2]| {
        let inf = beta * y[0] * y[1] / n;
        [-inf, inf - gamma * y[1]]
    };
    const C: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut y = [s0, i0];
    let mut out = vec![0.0];
    let mut t = 0.0;
    let mut h: f64 = 0.01;
    for m in 1..=months {
        let t_end = m as f64;
        while t < t_end - 1e-12 {
            let h_try = h.min(t_end - t);
            let mut k = [[0.0; 2]; 7];
            k[0] = f(y);
            for s in 0..6 {
                let mut ys = y;
                for c in 0..2 {
                    ys[c] += h_try * (0..=s).map(|j| C[s][j] * k[j][c]).sum::<f64>();
                }
                k[s + 1] = f(ys);
            }
            let mut y5 = y;
            for c in 0..2 {
                y5[c] += h_try * (0..6).map(|j| C[5][j] * k[j][c]).sum::<f64>();
            }
            let err = (0..2)
                .map(|c| {
                    let e = h_try * (0..7).map(|j| E[j] * k[j][c]).sum::<f64>();
                    (e / (tol * (1.0 + y[c].abs()))).abs()
                })
                .fold(0.0, f64::max);
            if err <= 1.0 {
                t += h_try;
                y = y5;
            }
            h = h_try * (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        }
        out.push(s0 - y[0]);
    }
    out
}

/// Plain bisection for the positive root of `Y = S0 (1 - exp(-(Y + I0) / (N rho)))`.
pub fn bisect_upsilon_inf(s0: f64, beta: f64, gamma: f64, i0: f64) -> f64 {
    let n = s0 + i0;
    let rho = gamma / beta;
    let g = |y: f64| y - s0 * (1.0 - (-(y + i0) / (n * rho)).exp());
    let (mut lo, mut hi) = (1e-9 * s0, s0);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bisection for `1 - exp(-u / rho) - u = 0` on `[1e-6, 1]`.
pub fn bisect_upsilon(rho: f64) -> f64 {
    let f = |u: f64| 1.0 - (-u / rho).exp() - u;
    let (mut lo, mut hi) = (1e-6, 1.0);
    assert!(f(lo) > 0.0 && f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Principal branch of Lambert W on `[-1/e, 0)` by Halley iteration.
pub fn lambert_w0(x: f64) -> f64 {
    assert!((-1.0 / std::f64::consts::E..0.0).contains(&x));
    let mut w = if x < -0.3 { -1.0 + (2.0 * (1.0 + std::f64::consts::E * x)).sqrt() } else { x };
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        let step = f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0));
        w -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    w
}

/// Kendall tau-a by enumerating every pair of two untied rank vectors.
pub fn brute_kendall(a: &[usize], b: &[usize]) -> (i64, i64) {
    let (mut conc, mut disc) = (0, 0);
    for i in 0..a.len() {
        for j in 0..a.len() {
            if i < j {
                let s = (a[i] as i64 - a[j] as i64).signum() * (b[i] as i64 - b[j] as i64).signum();
                if s > 0 {
                    conc += 1;
                } else if s < 0 {
                    disc += 1;
                }
            }
        }
    }
    (conc, disc)
}

/// Log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp()).collect()
}

pub struct JournalMedians {
    pub journal: &'static str,
    pub s0: f64,
    pub beta: f64,
    pub gamma: f64,
    pub r0: f64,
    pub upsilon: f64,
}

/// Reference journal medians, in their published order.
pub const JOURNAL_MEDIANS: [JournalMedians; 6] = [
    JournalMedians { journal: "PRL", s0: 19350.0, beta: 1.400, gamma: 1.385, r0: 1.008, upsilon: 0.021 },
    JournalMedians { journal: "PRD", s0: 9325.0, beta: 0.915, gamma: 0.910, r0: 1.012, upsilon: 0.031 },
    JournalMedians { journal: "PRB", s0: 4750.0, beta: 0.730, gamma: 0.715, r0: 1.026, upsilon: 0.059 },
    JournalMedians { journal: "PRA", s0: 2900.0, beta: 0.570, gamma: 0.550, r0: 1.031, upsilon: 0.072 },
    JournalMedians { journal: "PRE", s0: 1900.0, beta: 0.455, gamma: 0.445, r0: 1.028, upsilon: 0.070 },
    JournalMedians { journal: "PRC", s0: 1600.0, beta: 0.355, gamma: 0.340, r0: 1.037, upsilon: 0.084 },
];

pub fn journal_summaries() -> Vec<citesir::cohort::CohortSummary> {
    JOURNAL_MEDIANS
        .iter()
        .map(|r| citesir::cohort::CohortSummary {
            journal: r.journal.to_string(),
            n_papers: 50,
            median_s0: r.s0,
            median_beta: r.beta,
            median_gamma: r.gamma,
            median_r0: r.r0,
            median_upsilon: r.upsilon,
        })
        .collect()
}

/// Print one acceptance line and return the verdict.
pub fn report(name: &str, pass: bool, detail: &str) -> bool {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}
