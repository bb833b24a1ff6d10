//! SIR model of a paper's citation history.
//!
//! Susceptible papers `S` are potential citers, influential papers `I` have
//! cited the hit paper and still prompt new citations, removed papers `R` no
//! longer do. The cumulative citation count is `S0 - S(t)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Internal RK4 step in months.
pub const DEFAULT_STEP: f64 = 0.05;

/// Compartments below `-CLAMP_FAIL * N` after a step are a numerical failure.
const CLAMP_FAIL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpidemicParams {
    s0: f64,
    beta: f64,
    gamma: f64,
    i0: f64,
}

impl EpidemicParams {
    /// `s0 > 0`, `beta >= 0`, `gamma > 0`, `i0 >= 1`, all finite.
    pub fn new(s0: f64, beta: f64, gamma: f64, i0: f64) -> Result<Self> {
        if !(s0.is_finite() && beta.is_finite() && gamma.is_finite() && i0.is_finite()) {
            return Err(domain("parameters must be finite"));
        }
        if s0 <= 0.0 {
            return Err(domain(format!("s0 must be positive, got {s0}")));
        }
        if beta < 0.0 {
            return Err(domain(format!("beta must be non-negative, got {beta}")));
        }
        if gamma <= 0.0 {
            return Err(domain(format!("gamma must be positive, got {gamma}")));
        }
        if i0 < 1.0 {
            return Err(domain(format!("i0 must be at least 1, got {i0}")));
        }
        Ok(Self { s0, beta, gamma, i0 })
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn i0(&self) -> f64 {
        self.i0
    }

    /// Total population `N = S0 + I0`.
    pub fn n(&self) -> f64 {
        self.s0 + self.i0
    }

    /// `gamma / beta`.
    pub fn rho(&self) -> f64 {
        self.gamma / self.beta
    }

    /// Basic reproductive number `beta / gamma`.
    pub fn r0(&self) -> f64 {
        self.beta / self.gamma
    }

    pub fn initial_state(&self) -> EpidemicState {
        EpidemicState { t: 0.0, s: self.s0, i: self.i0, r: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpidemicState {
    pub t: f64,
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

impl EpidemicState {
    pub fn total(&self) -> f64 {
        self.s + self.i + self.r
    }
}

/// Time derivatives of the three compartments, in papers per month.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub ds: f64,
    pub di: f64,
    pub dr: f64,
}

/// Right-hand side of the SIR system.
///
/// `di` is formed as `-(ds + dr)` so that `(ds + dr) + di == 0` holds exactly.
pub fn rhs(state: &EpidemicState, params: &EpidemicParams) -> Result<Rates> {
    if !(state.s.is_finite() && state.i.is_finite() && state.r.is_finite() && state.t.is_finite()) {
        return Err(domain("state must be finite"));
    }
    let [ds, di, dr] = derivative([state.s, state.i, state.r], &Coefficients::of(params));
    Ok(Rates { ds, di, dr })
}

/// `beta / N` and `gamma`, hoisted out of the integration loop.
#[derive(Clone, Copy)]
struct Coefficients {
    beta_over_n: f64,
    gamma: f64,
}

impl Coefficients {
    fn of(p: &EpidemicParams) -> Self {
        Self { beta_over_n: p.beta / p.n(), gamma: p.gamma }
    }
}

#[inline]
fn derivative(y: [f64; 3], p: &Coefficients) -> [f64; 3] {
    let infection = p.beta_over_n * y[0] * y[1];
    let removal = p.gamma * y[1];
    let ds = -infection;
    let dr = removal;
    [ds, -(ds + dr), dr]
}

#[inline]
fn rk4_step(y: [f64; 3], h: f64, p: &Coefficients) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = derivative(y, p);
    let k2 = derivative(add(y, k1, 0.5 * h), p);
    let k3 = derivative(add(y, k2, 0.5 * h), p);
    let k4 = derivative(add(y, k3, h), p);
    let mut out = [0.0; 3];
    for c in 0..3 {
        out[c] = y[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }
    out
}

/// Fixed-step RK4 integrator, resampled on a uniform grid.
struct Integrator {
    coef: Coefficients,
    y: [f64; 3],
    h: f64,
    substeps: usize,
    n: f64,
}

impl Integrator {
    fn new(params: &EpidemicParams, sample_step: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(domain(format!("internal step must be positive, got {step}")));
        }
        let substeps = ((sample_step / step) - 1e-9).ceil().max(1.0) as usize;
        let h = sample_step / substeps as f64;
        if h <= f64::EPSILON * sample_step.max(1.0) {
            return Err(Error::Numerical("internal step underflow".into()));
        }
        Ok(Self { coef: Coefficients::of(params), y: [params.s0, params.i0, 0.0], h, substeps, n: params.n() })
    }

    /// Advance by one sample interval and apply the non-negativity guard.
    fn advance(&mut self, t_end: f64) -> Result<()> {
        for _ in 0..self.substeps {
            self.y = rk4_step(self.y, self.h, &self.coef);
            for c in self.y.iter_mut() {
                if !c.is_finite() {
                    return Err(Error::Numerical(format!("non-finite compartment before t = {t_end}")));
                }
                if *c < 0.0 {
                    if *c < -CLAMP_FAIL * self.n {
                        return Err(Error::Numerical(format!(
                            "compartment driven to {c:.3e} before t = {t_end}; step too large for these rates"
                        )));
                    }
                    *c = 0.0;
                }
            }
        }
        let total: f64 = self.y.iter().sum();
        if (total - self.n).abs() > CLAMP_FAIL * self.n {
            return Err(Error::Numerical(format!("conservation violated at t = {t_end}")));
        }
        Ok(())
    }
}

fn sample_count(horizon: f64, sample_step: f64) -> Result<usize> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(domain(format!("horizon must be positive, got {horizon}")));
    }
    if !(sample_step.is_finite() && sample_step > 0.0) {
        return Err(domain(format!("sample step must be positive, got {sample_step}")));
    }
    let ratio = horizon / sample_step;
    let k = ratio.round();
    if (ratio - k).abs() > 1e-9 * ratio.max(1.0) || k < 1.0 {
        return Err(domain(format!("sample step {sample_step} does not divide horizon {horizon}")));
    }
    Ok(k as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub params: EpidemicParams,
    pub states: Vec<EpidemicState>,
    /// Cumulative citations `S0 - S(t)` at each sample.
    pub upsilon: Vec<f64>,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.t)
    }

    /// Cumulative citations at sample time `t`.
    pub fn cumulative_citations(&self, t: f64) -> Result<f64> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.states
            .iter()
            .position(|s| (s.t - t).abs() <= tol)
            .map(|k| self.upsilon[k])
            .ok_or(Error::Lookup(t))
    }

    pub fn last_upsilon(&self) -> f64 {
        *self.upsilon.last().expect("trajectory has at least one sample")
    }

    /// Two-column `t_month upsilon` text with a `#` header line.
    pub fn write_plot_data<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# t_month upsilon")?;
        for (state, y) in self.states.iter().zip(&self.upsilon) {
            writeln!(out, "{} {}", state.t, y)?;
        }
        Ok(())
    }
}

/// Integrate with the default internal step.
pub fn integrate(params: &EpidemicParams, horizon: f64, sample_step: f64) -> Result<Trajectory> {
    integrate_with_step(params, horizon, sample_step, DEFAULT_STEP)
}

/// Integrate with an explicit internal step; the step is shrunk so that it
/// divides `sample_step`.
pub fn integrate_with_step(
    params: &EpidemicParams,
    horizon: f64,
    sample_step: f64,
    step: f64,
) -> Result<Trajectory> {
    let samples = sample_count(horizon, sample_step)?;
    let mut integ = Integrator::new(params, sample_step, step)?;
    let mut states = Vec::with_capacity(samples + 1);
    let mut upsilon = Vec::with_capacity(samples + 1);
    states.push(params.initial_state());
    upsilon.push(0.0);
    for k in 1..=samples {
        let t = k as f64 * sample_step;
        integ.advance(t)?;
        let [s, i, r] = integ.y;
        states.push(EpidemicState { t, s, i, r });
        upsilon.push(params.s0 - s);
    }
    Ok(Trajectory { params: *params, states, upsilon })
}

/// Cumulative citations at months `0..=months`, without materialising states.
pub fn cumulative_curve(params: &EpidemicParams, months: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(months + 1);
    cumulative_curve_into(params, months, &mut out)?;
    Ok(out)
}

pub(crate) fn cumulative_curve_into(params: &EpidemicParams, months: usize, out: &mut Vec<f64>) -> Result<()> {
    out.clear();
    out.push(0.0);
    let mut integ = Integrator::new(params, 1.0, DEFAULT_STEP)?;
    for m in 1..=months {
        integ.advance(m as f64)?;
        out.push(params.s0 - integ.y[0]);
    }
    Ok(())
}
