//! Least-squares estimation of `[S0, beta, gamma]` from a cumulative
//! citation series.
//!
//! The objective is the unweighted sum of squared residuals between the
//! integrated curve and the monthly counts. It is minimised by multi-start
//! Nelder–Mead in `(ln S0, ln beta, ln gamma)`; `I0` is held fixed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::impact::{solve_ultimate_impact, ImpactEstimate};
use crate::ingest::CitationSeries;
use crate::optim::{self, Bounds, Options};
use crate::sir::{cumulative_curve_into, EpidemicParams};

/// Fewest monthly points accepted by [`loss`] and [`fit`].
pub const MIN_POINTS: usize = 12;
/// Longest horizon accepted by [`fit`], in months.
pub const MAX_HORIZON: usize = 600;
/// Smallest final count accepted by [`fit`].
pub const MIN_FINAL_COUNT: u64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub i0: f64,
    pub restarts: usize,
    pub max_iterations: usize,
    pub loss_tolerance: f64,
    /// Upper bound on S0; the lower bound is the largest observed count.
    pub s0_max: f64,
    /// Bounds shared by beta and gamma, 1/month.
    pub rate_bounds: (f64, f64),
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            i0: 1.0,
            restarts: 32,
            max_iterations: 2000,
            loss_tolerance: 1e-10,
            s0_max: 1e6,
            rate_bounds: (1e-4, 1e2),
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(domain("restarts must be at least 1"));
        }
        if self.max_iterations < 1 {
            return Err(domain("max_iterations must be at least 1"));
        }
        if !(self.i0 >= 1.0 && self.i0.is_finite()) {
            return Err(domain(format!("i0 must be at least 1, got {}", self.i0)));
        }
        let (lo, hi) = self.rate_bounds;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(domain(format!("rate bounds must be positive and ordered, got ({lo}, {hi})")));
        }
        if !(self.s0_max > 0.0 && self.s0_max.is_finite()) {
            return Err(domain("s0 upper bound must be positive"));
        }
        if !(self.loss_tolerance > 0.0) {
            return Err(domain("loss tolerance must be positive"));
        }
        Ok(())
    }

    /// Box in log-parameter space for a series whose largest count is `max_count`.
    fn log_bounds(&self, max_count: f64) -> Result<Bounds> {
        let s0_lo = max_count.max(1.0);
        if s0_lo >= self.s0_max {
            return Err(domain(format!("s0 upper bound {} is below the observed count {max_count}", self.s0_max)));
        }
        let (lo, hi) = self.rate_bounds;
        Ok(Bounds { lower: vec![s0_lo.ln(), lo.ln(), lo.ln()], upper: vec![self.s0_max.ln(), hi.ln(), hi.ln()] })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: EpidemicParams,
    /// Sum of squared residuals, citations².
    pub loss: f64,
    pub rmse: f64,
    pub impact: ImpactEstimate,
    pub converged: bool,
    pub restarts_used: usize,
}

/// One line of the fit-results JSON-lines file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub paper_id: String,
    pub journal: String,
    pub s0: f64,
    pub beta: f64,
    pub gamma: f64,
    pub i0: f64,
    pub r0: f64,
    pub rho: f64,
    pub upsilon_inf: f64,
    pub upsilon_rel: f64,
    pub rmse: f64,
    pub converged: bool,
    pub restarts_used: usize,
}

impl FitRecord {
    pub fn new(paper_id: &str, journal: &str, r: &FitResult) -> Self {
        Self {
            paper_id: paper_id.to_string(),
            journal: journal.to_string(),
            s0: r.params.s0(),
            beta: r.params.beta(),
            gamma: r.params.gamma(),
            i0: r.params.i0(),
            r0: r.impact.r0,
            rho: r.impact.rho,
            upsilon_inf: r.impact.upsilon_inf,
            upsilon_rel: r.impact.upsilon_rel,
            rmse: r.rmse,
            converged: r.converged,
            restarts_used: r.restarts_used,
        }
    }
}

/// Sum of squared residuals between the model curve and `series`.
pub fn loss(params: &EpidemicParams, series: &CitationSeries) -> Result<f64> {
    if series.counts.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "series has {} monthly points, need at least {MIN_POINTS}",
            series.counts.len()
        )));
    }
    let mut obj = Objective::new(series, params.i0());
    obj.loss_of(params)
}

/// Reusable loss evaluator over one series.
pub(crate) struct Objective {
    data: Vec<f64>,
    i0: f64,
    buf: Vec<f64>,
}

impl Objective {
    pub(crate) fn new(series: &CitationSeries, i0: f64) -> Self {
        Self { data: series.counts.iter().map(|&c| c as f64).collect(), i0, buf: Vec::with_capacity(series.counts.len()) }
    }

    pub(crate) fn points(&self) -> usize {
        self.data.len()
    }

    pub(crate) fn loss_of(&mut self, p: &EpidemicParams) -> Result<f64> {
        cumulative_curve_into(p, self.data.len() - 1, &mut self.buf)?;
        Ok(self.buf.iter().zip(&self.data).map(|(m, d)| (m - d) * (m - d)).sum())
    }

    /// Loss at `exp(x)`; infeasible or unstable points score `+inf`.
    pub(crate) fn loss_log(&mut self, x: &[f64]) -> f64 {
        match EpidemicParams::new(x[0].exp(), x[1].exp(), x[2].exp(), self.i0) {
            Ok(p) => self.loss_of(&p).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    }
}

fn check_series(series: &CitationSeries) -> Result<()> {
    let n = series.counts.len();
    if !series.is_monotone() {
        return Err(Error::Data(format!("series {} is not monotone non-decreasing", series.paper_id)));
    }
    if n < MIN_POINTS {
        return Err(Error::InsufficientData(format!("series {} has {n} points, need at least {MIN_POINTS}", series.paper_id)));
    }
    if series.horizon() > MAX_HORIZON {
        return Err(Error::InsufficientData(format!("series {} spans {} months, at most {MAX_HORIZON} supported", series.paper_id, series.horizon())));
    }
    if series.final_count() < MIN_FINAL_COUNT {
        return Err(Error::InsufficientData(format!(
            "series {} ends at {} citations, need at least {MIN_FINAL_COUNT}",
            series.paper_id,
            series.final_count()
        )));
    }
    Ok(())
}

fn nm_options(config: &FitConfig) -> Options {
    Options {
        max_iterations: config.max_iterations,
        f_tolerance: config.loss_tolerance,
        x_tolerance: 1e-8,
        initial_step: 0.3,
        rebuilds: 2,
    }
}

/// Starting points in log space: two heuristic starts, then log-uniform draws.
fn starts(config: &FitConfig, bounds: &Bounds, max_count: f64) -> Vec<Vec<f64>> {
    let mut out = vec![
        vec![(3.0 * max_count).ln(), 1.05f64.ln(), 0.0],
        vec![(3.0 * max_count).ln(), 0.1f64.ln(), (0.1f64 / 1.05).ln()],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    while out.len() < config.restarts {
        out.push((0..3).map(|k| rng.random_range(bounds.lower[k]..=bounds.upper[k])).collect());
    }
    out.truncate(config.restarts);
    out
}

/// Fit `[S0, beta, gamma]` to `series`.
///
/// When no restart converges the best-effort result is carried by
/// [`Error::Convergence`].
pub fn fit(series: &CitationSeries, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    check_series(series)?;
    let max_count = series.final_count() as f64;
    let bounds = config.log_bounds(max_count)?;
    let opts = nm_options(config);
    let mut obj = Objective::new(series, config.i0);

    let mut best: Option<optim::Minimum> = None;
    let mut any_converged = false;
    let start_points = starts(config, &bounds, max_count);
    for start in &start_points {
        let m = optim::minimize(|x| obj.loss_log(x), start, &bounds, &opts);
        any_converged |= m.converged && m.f.is_finite();
        best = Some(match best {
            None => m,
            Some(b) => pick(b, m),
        });
    }
    let best = best.expect("at least one restart");
    if !best.f.is_finite() {
        return Err(Error::Numerical(format!("every restart diverged for series {}", series.paper_id)));
    }
    let params = EpidemicParams::new(best.x[0].exp(), best.x[1].exp(), best.x[2].exp(), config.i0)?;
    let result = FitResult {
        params,
        loss: best.f,
        rmse: (best.f / obj.points() as f64).sqrt(),
        impact: solve_ultimate_impact(&params),
        converged: best.converged,
        restarts_used: start_points.len(),
    };
    if !any_converged {
        return Err(Error::Convergence { best: Box::new(result) });
    }
    Ok(result)
}

/// Lower loss wins; near-equal losses prefer the smaller S0.
fn pick(a: optim::Minimum, b: optim::Minimum) -> optim::Minimum {
    if !b.f.is_finite() {
        return a;
    }
    if !a.f.is_finite() {
        return b;
    }
    let scale = a.f.abs().max(b.f.abs());
    if (a.f - b.f).abs() <= 1e-12 * scale {
        if b.x[0] < a.x[0] {
            b
        } else {
            a
        }
    } else if b.f < a.f {
        b
    } else {
        a
    }
}

/// Which parameter a profile refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitParam {
    S0,
    Beta,
    Gamma,
}

impl FitParam {
    pub const ALL: [FitParam; 3] = [FitParam::S0, FitParam::Beta, FitParam::Gamma];

    fn index(self) -> usize {
        self as usize
    }
}

/// Multiplicative interval around the optimum where the profile loss stays
/// below the 1% threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamProfile {
    pub param: FitParam,
    pub optimum: f64,
    /// Interval ends as multipliers of the optimum (`lower <= 1 <= upper`).
    pub lower: f64,
    pub upper: f64,
    /// The interval reached the sweep limit or a fit bound on this side.
    pub lower_open: bool,
    pub upper_open: bool,
    pub weakly_identified: bool,
}

impl ParamProfile {
    pub fn width(&self) -> f64 {
        self.upper / self.lower
    }

    pub fn contains_optimum(&self) -> bool {
        self.lower <= 1.0 && self.upper >= 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiabilityReport {
    pub loss_at_optimum: f64,
    /// Loss below which a profile point counts as indistinguishable.
    pub threshold: f64,
    pub profiles: Vec<ParamProfile>,
}

impl IdentifiabilityReport {
    pub fn profile(&self, param: FitParam) -> &ParamProfile {
        &self.profiles[param.index()]
    }
}

/// Interval width beyond which a parameter is flagged weakly identified.
pub const WEAK_WIDTH: f64 = 10.0;
/// Profile grid: 8 points per decade out to a factor of 100 on each side.
const PROFILE_STEPS_PER_DECADE: usize = 8;
const PROFILE_DECADES: usize = 2;

/// Allowed loss for profile points: 1% above `max(loss, n / 12)`; `n / 12`
/// is the squared-error floor of integer-rounded counts.
pub fn profile_threshold(loss_at_optimum: f64, points: usize) -> f64 {
    loss_at_optimum + 0.01 * loss_at_optimum.max(points as f64 / 12.0)
}

/// Profile the loss along each parameter, re-optimising the other two.
pub fn profile_identifiability(series: &CitationSeries, result: &FitResult, config: &FitConfig) -> Result<IdentifiabilityReport> {
    let bounds = config.log_bounds(series.final_count() as f64)?;
    let mut obj = Objective::new(series, result.params.i0());
    let x_opt = [result.params.s0().ln(), result.params.beta().ln(), result.params.gamma().ln()];
    let loss_opt = obj.loss_log(&x_opt);
    let threshold = profile_threshold(loss_opt, obj.points());
    let opts = Options { max_iterations: 600, f_tolerance: 1e-12, x_tolerance: 1e-10, initial_step: 0.2, rebuilds: 2 };
    let step = std::f64::consts::LN_10 / PROFILE_STEPS_PER_DECADE as f64;

    let profiles = FitParam::ALL
        .iter()
        .map(|&param| {
            let j = param.index();
            let free: Vec<usize> = (0..3).filter(|&k| k != j).collect();
            let sub = Bounds {
                lower: free.iter().map(|&k| bounds.lower[k]).collect(),
                upper: free.iter().map(|&k| bounds.upper[k]).collect(),
            };
            let mut side = |dir: f64| -> (f64, bool) {
                let mut warm: Vec<f64> = free.iter().map(|&k| x_opt[k]).collect();
                let mut reached = 0.0;
                for s in 1..=PROFILE_STEPS_PER_DECADE * PROFILE_DECADES {
                    let xj = x_opt[j] + dir * step * s as f64;
                    if xj < bounds.lower[j] - 1e-12 || xj > bounds.upper[j] + 1e-12 {
                        return (reached, true);
                    }
                    let mut eval = |y: &[f64]| {
                        let mut x = [0.0; 3];
                        x[j] = xj;
                        x[free[0]] = y[0];
                        x[free[1]] = y[1];
                        obj.loss_log(&x)
                    };
                    // Warm start from the previous point and from a start that
                    // keeps beta - gamma fixed while scaling both rates.
                    let mut best = optim::minimize(&mut eval, &warm, &sub, &opts);
                    let shifted: Vec<f64> = warm.iter().map(|v| v + dir * step).collect();
                    let alt = optim::minimize(&mut eval, &shifted, &sub, &opts);
                    if alt.f < best.f {
                        best = alt;
                    }
                    if !(best.f < threshold) {
                        return (reached, false);
                    }
                    reached = dir * step * s as f64;
                    warm = best.x;
                }
                (reached, true)
            };
            let (down, lower_open) = side(-1.0);
            let (up, upper_open) = side(1.0);
            let lower = down.exp();
            let upper = up.exp();
            ParamProfile {
                param,
                optimum: x_opt[j].exp(),
                lower,
                upper,
                lower_open,
                upper_open,
                weakly_identified: upper / lower > WEAK_WIDTH,
            }
        })
        .collect();
    Ok(IdentifiabilityReport { loss_at_optimum: loss_opt, threshold, profiles })
}
