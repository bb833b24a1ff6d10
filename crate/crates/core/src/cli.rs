//! Command-line front end: `ingest`, `fit`, `impact`, `rank`, `synth`.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::cohort::{self, Metric, RankComparison};
use crate::error::{domain, Error, Result};
use crate::fitting::{fit, FitConfig, FitRecord};
use crate::impact::ultimate_impact;
use crate::ingest::{self, CitationSeries, IngestOptions, IngestReport};
use crate::sir::{integrate, EpidemicParams};
use crate::synth::{self, SyntheticCohortSpec};

#[derive(Debug, Parser)]
#[command(name = "citesir", version, about = "SIR epidemic models of citation histories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build monthly cumulative citation series from metadata and citing pairs.
    Ingest(IngestArgs),
    /// Fit [S0, beta, gamma] to every series in a series CSV.
    Fit(FitArgs),
    /// Ultimate impact for one parameter set.
    Impact(ImpactArgs),
    /// Journal medians, epidemiological ranks and rank correlations.
    Rank(RankArgs),
    /// Generate a synthetic cohort from a JSON spec.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub meta: PathBuf,
    #[arg(long)]
    pub citations: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 180)]
    pub horizon: usize,
    /// Keep only the top-K papers of each journal.
    #[arg(long)]
    pub hits: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    pub pub_from: i32,
    #[arg(long, default_value_t = 2003)]
    pub pub_to: i32,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub series: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub i0: f64,
}

#[derive(Debug, Args)]
pub struct ImpactArgs {
    #[arg(long)]
    pub s0: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub i0: f64,
    /// Also write the integrated curve as two-column plot data.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    #[arg(long, default_value_t = 180)]
    pub horizon: usize,
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub fits: PathBuf,
    /// CSV with columns `journal,if_rank`.
    #[arg(long)]
    pub if_fixture: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Parse `args` and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Ingest(a) => cmd_ingest(&a).map(|_| ()),
        Command::Fit(a) => cmd_fit(&a),
        Command::Impact(a) => {
            let stdout = std::io::stdout();
            cmd_impact(&a, stdout.lock())
        }
        Command::Rank(a) => cmd_rank(&a),
        Command::Synth(a) => cmd_synth(&a),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn cmd_ingest(a: &IngestArgs) -> Result<IngestReport> {
    if a.horizon < 12 {
        return Err(domain("horizon must be at least 12 months"));
    }
    let metas = ingest::parse_metadata(open(&a.meta)?, &IngestOptions::default())?;
    let events = ingest::parse_events(open(&a.citations)?)?;
    let (mut series, tally) = ingest::build_all(&metas.records, &events.records, a.horizon);
    if let Some(k) = a.hits {
        let mut journals: Vec<&str> = metas.records.iter().map(|m| m.journal.as_str()).collect();
        journals.sort_unstable();
        journals.dedup();
        let mut keep = Vec::new();
        for j in journals {
            let sel = ingest::select_hit_papers(&metas.records, &series, j, (a.pub_from, a.pub_to), k)?;
            if let Some(short) = sel.shortfall {
                eprintln!("warning: journal {j} has {short} fewer eligible papers than {k}");
            }
            keep.extend(sel.paper_ids);
        }
        let order: std::collections::HashMap<&str, usize> =
            keep.iter().enumerate().map(|(k, id)| (id.as_str(), k)).collect();
        series.retain(|s| order.contains_key(s.paper_id.as_str()));
        series.sort_by_key(|s| order[s.paper_id.as_str()]);
    }
    let report = IngestReport {
        rows_read: metas.rows_read + events.rows_read,
        malformed: metas.malformed + events.malformed,
        self_pairs: events.self_pairs,
        clock_skew: tally.clock_skew,
    };
    ingest::write_series_csv(create(&a.out_dir.join("series.csv"))?, &series)?;
    write_json_file(&a.out_dir.join("ingest_report.json"), &report)?;
    Ok(report)
}

/// Seed for one paper, independent of its position in the input.
fn paper_seed(seed: u64, paper_id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in paper_id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Fit every series, returning records ordered by paper id. Papers whose
/// data cannot be fitted are skipped with a warning.
pub fn fit_all(series: &[CitationSeries], config: &FitConfig, workers: usize) -> Result<Vec<FitRecord>> {
    if workers < 1 {
        return Err(domain("worker count must be at least 1"));
    }
    let mut ordered: Vec<&CitationSeries> = series.iter().collect();
    ordered.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Result<FitRecord>> = pool.install(|| {
        ordered
            .par_iter()
            .map(|s| {
                let cfg = FitConfig { seed: paper_seed(config.seed, &s.paper_id), ..config.clone() };
                match fit(s, &cfg) {
                    Ok(r) => Ok(FitRecord::new(&s.paper_id, &s.journal, &r)),
                    Err(Error::Convergence { best }) => Ok(FitRecord::new(&s.paper_id, &s.journal, &best)),
                    Err(e) => Err(e),
                }
            })
            .collect()
    });
    let mut out = Vec::with_capacity(outcomes.len());
    for (s, o) in ordered.iter().zip(outcomes) {
        match o {
            Ok(r) => out.push(r),
            Err(e) => eprintln!("warning: skipping {}: {e}", s.paper_id),
        }
    }
    Ok(out)
}

pub fn cmd_fit(a: &FitArgs) -> Result<()> {
    let series = ingest::read_series_csv(open(&a.series)?)?;
    if series.is_empty() {
        eprintln!("warning: {} contains no series", a.series.display());
    }
    let config = FitConfig { restarts: a.restarts, seed: a.seed, i0: a.i0, ..FitConfig::default() };
    config.validate()?;
    let workers = a.workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let records = fit_all(&series, &config, workers)?;
    let mut w = create(&a.out)?;
    for r in &records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ImpactOutput {
    upsilon_inf: f64,
    upsilon_rel: f64,
    r0: f64,
    rho: f64,
}

pub fn cmd_impact<W: Write>(a: &ImpactArgs, mut out: W) -> Result<()> {
    let est = ultimate_impact(a.s0, a.beta, a.gamma, a.i0)?;
    let round = |v: f64, d: i32| if a.pretty { (v * 10f64.powi(d)).round() / 10f64.powi(d) } else { v };
    let printed = ImpactOutput {
        upsilon_inf: round(est.upsilon_inf, 2),
        upsilon_rel: round(est.upsilon_rel, 4),
        r0: round(est.r0, 4),
        rho: round(est.rho, 4),
    };
    serde_json::to_writer(&mut out, &printed)?;
    writeln!(out)?;
    if let Some(path) = &a.trajectory {
        let params = EpidemicParams::new(a.s0, a.beta, a.gamma, a.i0)?;
        let traj = integrate(&params, a.horizon as f64, 1.0)?;
        let mut w = create(path)?;
        traj.write_plot_data(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

pub fn read_fit_records(path: &Path) -> Result<Vec<FitRecord>> {
    let mut out = Vec::new();
    for (k, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: FitRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Schema(format!("{} line {}: {e}", path.display(), k + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

/// Per-journal summaries, sorted by journal label.
pub fn summarize_records(records: &[FitRecord]) -> Result<Vec<cohort::CohortSummary>> {
    let mut journals: Vec<&str> = records.iter().map(|r| r.journal.as_str()).collect();
    journals.sort_unstable();
    journals.dedup();
    journals
        .into_iter()
        .map(|j| {
            let fits: Vec<FitRecord> = records.iter().filter(|r| r.journal == j).cloned().collect();
            cohort::summarize(j, &fits)
        })
        .collect()
}

/// Rank comparisons: S0 against every other metric, then every metric
/// against the IF fixture when one is given.
pub fn rank_report(summaries: &[cohort::CohortSummary], if_ranks: Option<&cohort::RankTable>) -> Result<Vec<RankComparison>> {
    let tables: Vec<_> = Metric::ALL.iter().map(|&m| cohort::rank_journals(summaries, m)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for t in &tables[1..] {
        out.push(cohort::rank_correlation(&tables[0], t)?);
    }
    if let Some(fixture) = if_ranks {
        for t in &tables {
            out.push(cohort::rank_correlation(t, fixture)?);
        }
    }
    Ok(out)
}

pub fn cmd_rank(a: &RankArgs) -> Result<()> {
    let records = read_fit_records(&a.fits)?;
    let mut summaries = summarize_records(&records)?;
    if summaries.len() < 2 {
        return Err(domain(format!("need >= 2 journals, found {}", summaries.len())));
    }
    // Table order: descending median S0.
    let order = cohort::rank_journals(&summaries, Metric::S0)?;
    summaries.sort_by_key(|s| order.journals.iter().position(|j| *j == s.journal));
    let fixture = a.if_fixture.as_deref().map(|p| cohort::read_if_fixture(open(p)?)).transpose()?;
    let report = rank_report(&summaries, fixture.as_ref())?;
    cohort::write_summary_csv(create(&a.out_dir.join("summary.csv"))?, &summaries, a.pretty)?;
    write_json_file(&a.out_dir.join("rank_report.json"), &report)?;
    Ok(())
}

pub fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let spec: SyntheticCohortSpec = serde_json::from_reader(open(&a.spec)?)
        .map_err(|e| Error::Schema(format!("{}: {e}", a.spec.display())))?;
    let papers = synth::generate_cohort(&spec)?;
    synth::write_cohort_csv(create(&a.out_dir.join("cohort.csv"))?, &papers)?;
    synth::write_truth_csv(create(&a.out_dir.join("ground_truth.csv"))?, &papers)?;
    Ok(())
}
