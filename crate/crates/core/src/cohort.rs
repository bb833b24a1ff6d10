//! Journal-level aggregation of per-paper fits: medians, epidemiological
//! ranks, Kendall rank correlation, and the exponential growth law of
//! yearly publication counts.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fitting::{FitRecord, FitResult};

/// Per-paper values that enter a journal summary.
pub trait CohortMember {
    fn s0(&self) -> f64;
    fn beta(&self) -> f64;
    fn gamma(&self) -> f64;
    fn r0(&self) -> f64;
    fn upsilon_rel(&self) -> f64;
}

impl CohortMember for FitResult {
    fn s0(&self) -> f64 {
        self.params.s0()
    }
    fn beta(&self) -> f64 {
        self.params.beta()
    }
    fn gamma(&self) -> f64 {
        self.params.gamma()
    }
    fn r0(&self) -> f64 {
        self.impact.r0
    }
    fn upsilon_rel(&self) -> f64 {
        self.impact.upsilon_rel
    }
}

impl CohortMember for FitRecord {
    fn s0(&self) -> f64 {
        self.s0
    }
    fn beta(&self) -> f64 {
        self.beta
    }
    fn gamma(&self) -> f64 {
        self.gamma
    }
    fn r0(&self) -> f64 {
        self.r0
    }
    fn upsilon_rel(&self) -> f64 {
        self.upsilon_rel
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub journal: String,
    pub n_papers: usize,
    pub median_s0: f64,
    pub median_beta: f64,
    pub median_gamma: f64,
    pub median_r0: f64,
    pub median_upsilon: f64,
}

impl CohortSummary {
    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::S0 => self.median_s0,
            Metric::Beta => self.median_beta,
            Metric::Gamma => self.median_gamma,
            Metric::R0 => self.median_r0,
            Metric::Upsilon => self.median_upsilon,
        }
    }
}

/// Sample median; the mean of the central pair for even length.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
}

/// Column-wise medians of the fits of one journal.
pub fn summarize<M: CohortMember>(journal: &str, fits: &[M]) -> Result<CohortSummary> {
    let col = |f: fn(&M) -> f64| median(&fits.iter().map(f).collect::<Vec<_>>());
    let (Some(s0), Some(beta), Some(gamma), Some(r0), Some(ups)) =
        (col(M::s0), col(M::beta), col(M::gamma), col(M::r0), col(M::upsilon_rel))
    else {
        return Err(domain(format!("journal {journal} has no fits to summarize")));
    };
    Ok(CohortSummary {
        journal: journal.to_string(),
        n_papers: fits.len(),
        median_s0: s0,
        median_beta: beta,
        median_gamma: gamma,
        median_r0: r0,
        median_upsilon: ups,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    S0,
    Beta,
    Gamma,
    R0,
    Upsilon,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::S0, Metric::Beta, Metric::Gamma, Metric::R0, Metric::Upsilon];

    pub fn name(self) -> &'static str {
        match self {
            Metric::S0 => "s0",
            Metric::Beta => "beta",
            Metric::Gamma => "gamma",
            Metric::R0 => "r0",
            Metric::Upsilon => "upsilon",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| domain(format!("unknown metric `{s}`; expected one of s0, beta, gamma, r0, upsilon")))
    }
}

/// Journals in rank order with 1-based ranks. Tied journals share the
/// smaller rank and are flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub metric: String,
    pub journals: Vec<String>,
    pub ranks: Vec<usize>,
    pub tied: Vec<bool>,
}

impl RankTable {
    /// Build from `(journal, rank)` pairs such as an Impact Factor fixture.
    pub fn from_ranks(metric: &str, mut entries: Vec<(String, usize)>) -> Result<Self> {
        check_unique(entries.iter().map(|(j, _)| j.as_str()))?;
        entries.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        let tied = entries
            .iter()
            .map(|(_, r)| entries.iter().filter(|(_, q)| q == r).count() > 1)
            .collect();
        Ok(Self {
            metric: metric.to_string(),
            journals: entries.iter().map(|(j, _)| j.clone()).collect(),
            ranks: entries.iter().map(|(_, r)| *r).collect(),
            tied,
        })
    }

    pub fn rank_of(&self, journal: &str) -> Option<usize> {
        self.journals.iter().position(|j| j == journal).map(|k| self.ranks[k])
    }

    pub fn journal_set(&self) -> BTreeSet<&str> {
        self.journals.iter().map(String::as_str).collect()
    }
}

fn check_unique<'a>(labels: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(domain(format!("duplicate journal label `{l}`")));
        }
    }
    Ok(())
}

/// Rank journals by descending `metric`; ties are ordered by label.
pub fn rank_journals(summaries: &[CohortSummary], metric: Metric) -> Result<RankTable> {
    if summaries.len() < 2 {
        return Err(domain("need >= 2 journals to rank"));
    }
    check_unique(summaries.iter().map(|s| s.journal.as_str()))?;
    let mut order: Vec<&CohortSummary> = summaries.iter().collect();
    order.sort_by(|a, b| b.value(metric).total_cmp(&a.value(metric)).then_with(|| a.journal.cmp(&b.journal)));
    let mut ranks = Vec::with_capacity(order.len());
    let mut tied = vec![false; order.len()];
    for k in 0..order.len() {
        if k > 0 && order[k].value(metric) == order[k - 1].value(metric) {
            ranks.push(ranks[k - 1]);
            tied[k] = true;
            tied[k - 1] = true;
        } else {
            ranks.push(k + 1);
        }
    }
    Ok(RankTable {
        metric: metric.name().to_string(),
        journals: order.iter().map(|s| s.journal.clone()).collect(),
        ranks,
        tied,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    pub concordant: usize,
    pub discordant: usize,
    pub tied_a: usize,
    pub tied_b: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankComparison {
    pub metric_a: String,
    pub metric_b: String,
    pub tau: f64,
    pub pair_counts: PairCounts,
}

/// Kendall tau between two rankings of the same journals. Without ties this
/// is `(concordant - discordant) / pairs`; with ties the tau-b denominator is
/// used.
pub fn rank_correlation(a: &RankTable, b: &RankTable) -> Result<RankComparison> {
    if a.journal_set() != b.journal_set() || a.journals.len() != b.journals.len() {
        return Err(domain("rank tables cover different journal sets"));
    }
    let pairs: Vec<(usize, usize)> = a
        .journals
        .iter()
        .map(|j| (a.rank_of(j).unwrap(), b.rank_of(j).unwrap()))
        .collect();
    let mut c = PairCounts::default();
    for x in 0..pairs.len() {
        for y in x + 1..pairs.len() {
            c.total += 1;
            let da = pairs[x].0 as i64 - pairs[y].0 as i64;
            let db = pairs[x].1 as i64 - pairs[y].1 as i64;
            match (da == 0, db == 0) {
                (true, true) => {
                    c.tied_a += 1;
                    c.tied_b += 1;
                }
                (true, false) => c.tied_a += 1,
                (false, true) => c.tied_b += 1,
                _ if (da > 0) == (db > 0) => c.concordant += 1,
                _ => c.discordant += 1,
            }
        }
    }
    let diff = c.concordant as f64 - c.discordant as f64;
    let tau = if c.tied_a == 0 && c.tied_b == 0 {
        diff / c.total as f64
    } else {
        let denom = (((c.total - c.tied_a) * (c.total - c.tied_b)) as f64).sqrt();
        if denom == 0.0 {
            0.0
        } else {
            diff / denom
        }
    };
    Ok(RankComparison { metric_a: a.metric.clone(), metric_b: b.metric.clone(), tau, pair_counts: c })
}

/// `f(x) = a exp((x - 1900) / b)` fitted in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub a: f64,
    /// e-folding time in years; infinite when there is no growth.
    pub b: f64,
    /// RMS residual of `ln(count)`.
    pub residual: f64,
}

impl GrowthFit {
    pub fn no_growth(&self) -> bool {
        self.b.is_infinite()
    }

    pub fn predict(&self, year: f64) -> f64 {
        self.a * ((year - 1900.0) / self.b).exp()
    }
}

/// Slopes at or below this are reported as no growth.
const NO_GROWTH_SLOPE: f64 = 1e-12;

/// Least squares of `ln(count)` on `year - 1900`. Rows with non-positive
/// counts are skipped.
pub fn fit_exponential_growth(yearly_counts: &[(f64, f64)]) -> Result<GrowthFit> {
    let rows: Vec<(f64, f64)> = yearly_counts
        .iter()
        .filter(|(x, c)| x.is_finite() && c.is_finite() && *c > 0.0)
        .map(|&(x, c)| (x - 1900.0, c.ln()))
        .collect();
    if rows.len() < 3 {
        return Err(Error::InsufficientData(format!("{} usable years, need at least 3", rows.len())));
    }
    let n = rows.len() as f64;
    let mx = rows.iter().map(|r| r.0).sum::<f64>() / n;
    let my = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let sxx: f64 = rows.iter().map(|r| (r.0 - mx).powi(2)).sum();
    let sxy: f64 = rows.iter().map(|r| (r.0 - mx) * (r.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all usable rows share one year".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (rows.iter().map(|r| (r.1 - intercept - slope * r.0).powi(2)).sum::<f64>() / n).sqrt();
    let b = if slope <= NO_GROWTH_SLOPE { f64::INFINITY } else { 1.0 / slope };
    let a = if b.is_infinite() { my.exp() } else { intercept.exp() };
    Ok(GrowthFit { a, b, residual })
}

/// Summary CSV with columns `journal,n,median_s0,median_beta,median_gamma,median_r0,median_upsilon`.
/// `pretty` rounds values for display.
pub fn write_summary_csv<W: Write>(out: W, summaries: &[CohortSummary], pretty: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["journal", "n", "median_s0", "median_beta", "median_gamma", "median_r0", "median_upsilon"])?;
    for s in summaries {
        let fmt = |v: f64, digits: usize| if pretty { format!("{v:.digits$}") } else { v.to_string() };
        w.write_record([
            s.journal.clone(),
            s.n_papers.to_string(),
            fmt(s.median_s0, 0),
            fmt(s.median_beta, 3),
            fmt(s.median_gamma, 3),
            fmt(s.median_r0, 3),
            fmt(s.median_upsilon, 3),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Read the `journal,if_rank` fixture.
pub fn read_if_fixture<R: Read>(input: R) -> Result<RankTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("IF fixture is missing column `{name}`")))
    };
    let (jc, rc) = (col("journal")?, col("if_rank")?);
    let mut entries = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let rank = rec
            .get(rc)
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&r| r >= 1)
            .ok_or_else(|| Error::Data(format!("IF fixture line {}: bad if_rank", row + 2)))?;
        entries.push((rec.get(jc).unwrap_or("").to_string(), rank));
    }
    RankTable::from_ranks("if", entries)
}
