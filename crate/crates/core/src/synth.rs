//! Synthetic citation histories: rounded ODE samples, exact stochastic
//! (Gillespie) epidemics, and labelled multi-journal cohorts.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::ingest::{write_series_csv, CitationSeries};
use crate::sir::{cumulative_curve, EpidemicParams};

/// Rounded monthly samples of the model curve, repaired to be monotone.
pub fn sample_series(params: &EpidemicParams, horizon: usize) -> Result<Vec<u64>> {
    if horizon < 12 {
        return Err(domain(format!("horizon must be at least 12 months, got {horizon}")));
    }
    let curve = cumulative_curve(params, horizon)?;
    let mut running = 0u64;
    Ok(curve
        .iter()
        .map(|v| {
            running = running.max(v.round().max(0.0) as u64);
            running
        })
        .collect())
}

/// Exact-event simulation of the stochastic SIR chain; each infection is one
/// citation. Cumulative counts are reported at months `0..=horizon`.
pub fn simulate_stochastic<R: Rng + ?Sized>(params: &EpidemicParams, horizon: usize, rng: &mut R) -> Result<Vec<u64>> {
    let s0 = params.s0();
    let i0 = params.i0();
    if s0.fract() != 0.0 || i0.fract() != 0.0 {
        return Err(domain("stochastic simulation needs integer s0 and i0"));
    }
    let n = params.n();
    let (beta, gamma) = (params.beta(), params.gamma());
    let (mut s, mut i, mut r) = (s0 as u64, i0 as u64, 0u64);
    let total = s + i;
    let mut out = Vec::with_capacity(horizon + 1);
    let mut cited = 0u64;
    let mut t = 0.0;
    // Month m reports the count of events at times t <= m.
    loop {
        let infect = beta * s as f64 * i as f64 / n;
        let remove = gamma * i as f64;
        let rate = infect + remove;
        if rate <= 0.0 {
            break;
        }
        let u: f64 = rng.random();
        t += -(1.0 - u).ln() / rate;
        while out.len() <= horizon && (out.len() as f64) < t {
            out.push(cited);
        }
        if out.len() > horizon {
            break;
        }
        if rng.random::<f64>() * rate < infect {
            s -= 1;
            i += 1;
            cited += 1;
        } else {
            i -= 1;
            r += 1;
        }
        debug_assert_eq!(s + i + r, total);
    }
    out.resize(horizon + 1, cited);
    Ok(out)
}

/// Log-normal with the given median; `scale` is the standard deviation of the
/// log. `scale = 0` is a point mass at the median.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormal {
    pub median: f64,
    pub scale: f64,
}

impl LogNormal {
    fn validate(&self, what: &str) -> Result<()> {
        if !(self.median > 0.0 && self.median.is_finite()) {
            return Err(domain(format!("{what}: median must be positive")));
        }
        if !(self.scale >= 0.0 && self.scale.is_finite()) {
            return Err(domain(format!("{what}: scale must be non-negative")));
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        if self.scale == 0.0 {
            self.median
        } else {
            self.median * (self.scale * z).exp()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDistribution {
    pub s0: LogNormal,
    pub beta: LogNormal,
    pub gamma: LogNormal,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthMode {
    #[default]
    Deterministic,
    Stochastic,
}

fn default_horizon() -> usize {
    180
}

fn default_i0() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCohortSpec {
    pub papers_per_journal: usize,
    pub journals: Vec<String>,
    /// One distribution per journal, in the order of `journals`.
    pub param_distributions: Vec<ParamDistribution>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    pub seed: u64,
    #[serde(default = "default_i0")]
    pub i0: f64,
    #[serde(default)]
    pub mode: SynthMode,
}

impl SyntheticCohortSpec {
    pub fn validate(&self) -> Result<()> {
        if self.papers_per_journal < 1 {
            return Err(domain("papers_per_journal must be at least 1"));
        }
        if self.journals.is_empty() {
            return Err(domain("at least one journal is required"));
        }
        if self.journals.len() != self.param_distributions.len() {
            return Err(domain(format!(
                "{} journals but {} parameter distributions",
                self.journals.len(),
                self.param_distributions.len()
            )));
        }
        if self.journals.iter().any(|j| j.trim().is_empty()) {
            return Err(domain("journal labels must be non-empty"));
        }
        if self.horizon < 12 {
            return Err(domain("horizon must be at least 12 months"));
        }
        for (j, d) in self.journals.iter().zip(&self.param_distributions) {
            d.s0.validate(&format!("{j} s0"))?;
            d.beta.validate(&format!("{j} beta"))?;
            d.gamma.validate(&format!("{j} gamma"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPaper {
    pub series: CitationSeries,
    pub truth: EpidemicParams,
}

/// Per-paper generator: stream `index` of the cohort seed.
fn paper_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Generate the cohort. Output order is journal-major; each paper owns an RNG
/// stream so the result does not depend on thread scheduling.
pub fn generate_cohort(spec: &SyntheticCohortSpec) -> Result<Vec<SyntheticPaper>> {
    spec.validate()?;
    let n = spec.papers_per_journal;
    (0..spec.journals.len() * n)
        .into_par_iter()
        .map(|index| {
            let (j, k) = (index / n, index % n);
            let journal = &spec.journals[j];
            let dist = &spec.param_distributions[j];
            let mut rng = paper_rng(spec.seed, index);
            let mut s0 = dist.s0.sample(&mut rng);
            if spec.mode == SynthMode::Stochastic {
                s0 = s0.round().max(1.0);
            }
            let truth = EpidemicParams::new(s0, dist.beta.sample(&mut rng), dist.gamma.sample(&mut rng), spec.i0)?;
            let counts = match spec.mode {
                SynthMode::Deterministic => sample_series(&truth, spec.horizon)?,
                SynthMode::Stochastic => simulate_stochastic(&truth, spec.horizon, &mut rng)?,
            };
            Ok(SyntheticPaper { series: CitationSeries::new(format!("{journal}-{k:03}"), journal.clone(), counts), truth })
        })
        .collect()
}

/// Cohort series in the long series CSV format.
pub fn write_cohort_csv<W: Write>(out: W, papers: &[SyntheticPaper]) -> Result<()> {
    let series: Vec<CitationSeries> = papers.iter().map(|p| p.series.clone()).collect();
    write_series_csv(out, &series)
}

/// Ground truth: `paper_id,s0,beta,gamma`.
pub fn write_truth_csv<W: Write>(out: W, papers: &[SyntheticPaper]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["paper_id", "s0", "beta", "gamma"])?;
    for p in papers {
        w.write_record([
            p.series.paper_id.clone(),
            p.truth.s0().to_string(),
            p.truth.beta().to_string(),
            p.truth.gamma().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
