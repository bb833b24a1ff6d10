//! Citing-pair data to per-paper monthly cumulative citation series, and
//! per-journal hit-paper selection.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Malformed rows tolerated before ingestion fails.
pub const MALFORMED_THRESHOLD: f64 = 0.01;
const MAX_SAMPLES: usize = 5;

pub const META_COLUMNS: [&str; 4] = ["paper_id", "journal", "pub_year", "pub_month"];
pub const CITATION_COLUMNS: [&str; 4] = ["citing_id", "cited_id", "citing_year", "citing_month"];
pub const SERIES_COLUMNS: [&str; 4] = ["paper_id", "journal", "month", "cumulative_citations"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(domain(format!("month must be in 1..=12, got {month}")));
        }
        Ok(Self { year, month })
    }

    /// Calendar months since year 0.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    /// Whole calendar months from `self` to `later`.
    pub fn months_until(self, later: YearMonth) -> i64 {
        later.ordinal() - self.ordinal()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperMeta {
    pub paper_id: String,
    pub journal: String,
    pub pub_date: YearMonth,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationEvent {
    pub citing_id: String,
    pub cited_id: String,
    pub citing_pub_date: YearMonth,
}

/// Monthly cumulative citations `counts[m]` for months `0..=horizon`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationSeries {
    pub paper_id: String,
    pub journal: String,
    pub counts: Vec<u64>,
}

impl CitationSeries {
    pub fn new(paper_id: impl Into<String>, journal: impl Into<String>, counts: Vec<u64>) -> Self {
        Self { paper_id: paper_id.into(), journal: journal.into(), counts }
    }

    pub fn horizon(&self) -> usize {
        self.counts.len().saturating_sub(1)
    }

    pub fn final_count(&self) -> u64 {
        self.counts.last().copied().unwrap_or(0)
    }

    pub fn is_monotone(&self) -> bool {
        self.counts.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Range of publication years accepted in metadata.
#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    pub min_year: i32,
    pub max_year: i32,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self { min_year: 1800, max_year: 2200 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub malformed: usize,
    pub self_pairs: usize,
    pub clock_skew: usize,
}

#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub rows_read: usize,
    pub malformed: usize,
    pub self_pairs: usize,
    /// First few malformed rows, for diagnostics.
    pub samples: Vec<String>,
}

fn column_indices(headers: &csv::StringRecord, wanted: &[&str]) -> Result<Vec<usize>> {
    wanted
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim() == *name)
                .ok_or_else(|| Error::Schema(format!("missing required column `{name}`")))
        })
        .collect()
}

fn parse_rows<R, T>(
    input: R,
    columns: &[&str],
    mut row: impl FnMut(&[&str]) -> Option<Option<T>>,
) -> Result<Parsed<T>>
where
    R: Read,
{
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(input);
    let idx = column_indices(rdr.headers()?, columns)?;
    let mut out = Parsed { records: Vec::new(), rows_read: 0, malformed: 0, self_pairs: 0, samples: Vec::new() };
    let mut record = csv::StringRecord::new();
    loop {
        let ok = match rdr.read_record(&mut record) {
            Ok(true) => true,
            Ok(false) => break,
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(_) => false,
        };
        out.rows_read += 1;
        let fields: Option<Vec<&str>> = ok.then(|| idx.iter().map(|&k| record.get(k)).collect()).flatten();
        match fields.and_then(|f| row(&f)) {
            Some(Some(rec)) => out.records.push(rec),
            Some(None) => out.self_pairs += 1,
            None => {
                out.malformed += 1;
                if out.samples.len() < MAX_SAMPLES {
                    let line = record.position().map(|p| p.line()).unwrap_or(0);
                    out.samples.push(format!("line {line}: {}", record.iter().collect::<Vec<_>>().join(",")));
                }
            }
        }
    }
    if out.rows_read > 0 && out.malformed as f64 > MALFORMED_THRESHOLD * out.rows_read as f64 {
        return Err(Error::Ingestion { rows: out.rows_read, malformed: out.malformed, samples: out.samples });
    }
    Ok(out)
}

fn year_month(year: &str, month: &str) -> Option<YearMonth> {
    YearMonth::new(year.parse().ok()?, month.parse().ok()?).ok()
}

/// Parse the metadata CSV (`paper_id,journal,pub_year,pub_month`).
pub fn parse_metadata<R: Read>(input: R, opts: &IngestOptions) -> Result<Parsed<PaperMeta>> {
    parse_rows(input, &META_COLUMNS, |f| {
        let date = year_month(f[2], f[3])?;
        if f[0].is_empty() || f[1].is_empty() || date.year < opts.min_year || date.year > opts.max_year {
            return None;
        }
        Some(Some(PaperMeta { paper_id: f[0].to_string(), journal: f[1].to_string(), pub_date: date }))
    })
}

/// Parse the citations CSV (`citing_id,cited_id,citing_year,citing_month`).
/// Self pairs are dropped and tallied.
pub fn parse_events<R: Read>(input: R) -> Result<Parsed<CitationEvent>> {
    parse_rows(input, &CITATION_COLUMNS, |f| {
        let date = year_month(f[2], f[3])?;
        if f[0].is_empty() || f[1].is_empty() {
            return None;
        }
        if f[0] == f[1] {
            return Some(None);
        }
        Some(Some(CitationEvent { citing_id: f[0].to_string(), cited_id: f[1].to_string(), citing_pub_date: date }))
    })
}

/// What happened to one paper's events while binning.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BinningTally {
    pub counted: usize,
    pub clock_skew: usize,
    pub beyond_horizon: usize,
}

/// Bin the events citing `paper` into a cumulative monthly series.
///
/// Events dated before publication count at month 0; events after `horizon`
/// are dropped.
pub fn build_series<'a, I>(paper: &PaperMeta, events: I, horizon: usize) -> (CitationSeries, BinningTally)
where
    I: IntoIterator<Item = &'a CitationEvent>,
{
    let mut per_month = vec![0u64; horizon + 1];
    let mut tally = BinningTally::default();
    for ev in events.into_iter().filter(|e| e.cited_id == paper.paper_id) {
        let offset = paper.pub_date.months_until(ev.citing_pub_date);
        let month = if offset < 0 {
            tally.clock_skew += 1;
            0
        } else {
            offset as usize
        };
        if month > horizon {
            tally.beyond_horizon += 1;
            continue;
        }
        per_month[month] += 1;
        tally.counted += 1;
    }
    let mut running = 0;
    for c in per_month.iter_mut() {
        running += *c;
        *c = running;
    }
    (CitationSeries::new(paper.paper_id.clone(), paper.journal.clone(), per_month), tally)
}

/// Series for every paper in `metas`, in metadata order. Events citing papers
/// absent from the metadata are ignored.
pub fn build_all(metas: &[PaperMeta], events: &[CitationEvent], horizon: usize) -> (Vec<CitationSeries>, BinningTally) {
    let mut by_cited: HashMap<&str, Vec<&CitationEvent>> = HashMap::new();
    for ev in events {
        by_cited.entry(ev.cited_id.as_str()).or_default().push(ev);
    }
    let mut total = BinningTally::default();
    let series = metas
        .iter()
        .map(|meta| {
            let evs = by_cited.get(meta.paper_id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
            let (s, t) = build_series(meta, evs.iter().copied(), horizon);
            total.counted += t.counted;
            total.clock_skew += t.clock_skew;
            total.beyond_horizon += t.beyond_horizon;
            s
        })
        .collect();
    (series, total)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HitSelection {
    pub paper_ids: Vec<String>,
    /// `k - eligible` when fewer than `k` papers were eligible.
    pub shortfall: Option<usize>,
}

/// Top `k` papers of `journal` published within `pub_window` (inclusive
/// years), ranked by final cumulative count. Ties: earlier publication, then
/// paper id.
pub fn select_hit_papers(
    metas: &[PaperMeta],
    series: &[CitationSeries],
    journal: &str,
    pub_window: (i32, i32),
    k: usize,
) -> Result<HitSelection> {
    if k == 0 {
        return Err(domain("k must be at least 1"));
    }
    if pub_window.0 > pub_window.1 {
        return Err(domain(format!("empty publication window {}..={}", pub_window.0, pub_window.1)));
    }
    let finals: HashMap<&str, u64> = series.iter().map(|s| (s.paper_id.as_str(), s.final_count())).collect();
    let mut eligible: Vec<(&PaperMeta, u64)> = metas
        .iter()
        .filter(|m| m.journal == journal && (pub_window.0..=pub_window.1).contains(&m.pub_date.year))
        .map(|m| (m, finals.get(m.paper_id.as_str()).copied().unwrap_or(0)))
        .collect();
    eligible.sort_by(|(ma, ca), (mb, cb)| {
        cb.cmp(ca).then(ma.pub_date.cmp(&mb.pub_date)).then_with(|| ma.paper_id.cmp(&mb.paper_id))
    });
    let shortfall = (eligible.len() < k).then(|| k - eligible.len());
    let paper_ids = eligible.into_iter().take(k).map(|(m, _)| m.paper_id.clone()).collect();
    Ok(HitSelection { paper_ids, shortfall })
}

/// Write series in long format, months `0..=horizon` per paper.
pub fn write_series_csv<W: Write>(out: W, series: &[CitationSeries]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_COLUMNS)?;
    for s in series {
        for (m, c) in s.counts.iter().enumerate() {
            w.write_record([s.paper_id.as_str(), s.journal.as_str(), &m.to_string(), &c.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a long-format series CSV. Rows of one paper must be contiguous with
/// months `0, 1, 2, ...`.
pub fn read_series_csv<R: Read>(input: R) -> Result<Vec<CitationSeries>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let idx = column_indices(rdr.headers()?, &SERIES_COLUMNS)?;
    let mut out: Vec<CitationSeries> = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let field = |k: usize| rec.get(idx[k]).unwrap_or("");
        let month: usize = field(2)
            .parse()
            .map_err(|_| Error::Data(format!("line {line}: bad month `{}`", field(2))))?;
        let count: u64 = field(3)
            .parse()
            .map_err(|_| Error::Data(format!("line {line}: bad cumulative_citations `{}`", field(3))))?;
        let (id, journal) = (field(0), field(1));
        match out.last_mut() {
            Some(s) if s.paper_id == id => {
                if month != s.counts.len() {
                    return Err(Error::Data(format!("line {line}: expected month {} for {id}, got {month}", s.counts.len())));
                }
                s.counts.push(count);
            }
            _ => {
                if month != 0 {
                    return Err(Error::Data(format!("line {line}: series for {id} must start at month 0")));
                }
                if out.iter().any(|s| s.paper_id == id) {
                    return Err(Error::Data(format!("line {line}: rows for {id} are not contiguous")));
                }
                out.push(CitationSeries::new(id, journal, vec![count]));
            }
        }
    }
    Ok(out)
}
