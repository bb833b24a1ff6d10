mod common;

use proptest::prelude::*;

use citesir::cohort::{
    fit_exponential_growth, median, rank_correlation, rank_journals, read_if_fixture, summarize, write_summary_csv,
    CohortSummary, Metric, RankTable,
};
use citesir::fitting::FitRecord;

use common::*;

fn record(journal: &str, s0: f64, upsilon_rel: f64) -> FitRecord {
    FitRecord {
        paper_id: format!("{journal}-{s0}"),
        journal: journal.into(),
        s0,
        beta: 0.5,
        gamma: 0.45,
        i0: 1.0,
        r0: 0.5 / 0.45,
        rho: 0.9,
        upsilon_inf: upsilon_rel * s0,
        upsilon_rel,
        rmse: 0.3,
        converged: true,
        restarts_used: 32,
    }
}

#[test]
fn medians() {
    assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
    assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
    assert_eq!(median(&[]), None);
}

#[test]
fn median_ignores_outliers() {
    let base: Vec<FitRecord> = (1..=9).map(|k| record("J", 1000.0 * k as f64, 0.1)).collect();
    let mut wild = base.clone();
    wild[8].s0 = 1e12;
    assert_eq!(summarize("J", &base).unwrap().median_s0, summarize("J", &wild).unwrap().median_s0);
    assert!(summarize("J", &[] as &[FitRecord]).is_err());
}

#[test]
fn reference_median_orders() {
    let s = journal_summaries();
    let s0 = rank_journals(&s, Metric::S0).unwrap();
    let beta = rank_journals(&s, Metric::Beta).unwrap();
    let gamma = rank_journals(&s, Metric::Gamma).unwrap();
    let ups = rank_journals(&s, Metric::Upsilon).unwrap();
    assert_eq!(rank_correlation(&s0, &beta).unwrap().tau, 1.0);
    assert_eq!(rank_correlation(&s0, &gamma).unwrap().tau, 1.0);
    assert!(rank_correlation(&s0, &ups).unwrap().tau < 0.0);
}

#[test]
fn ties_share_the_smaller_rank() {
    let mut s = journal_summaries();
    s[1].median_s0 = s[0].median_s0;
    let t = rank_journals(&s, Metric::S0).unwrap();
    assert_eq!(t.rank_of("PRL"), Some(1));
    assert_eq!(t.rank_of("PRD"), Some(1));
    assert_eq!(t.rank_of("PRB"), Some(3));
    assert!(t.tied[0] && t.tied[1] && !t.tied[2]);
}

#[test]
fn ranking_needs_two_distinct_journals() {
    let s = journal_summaries();
    assert!(rank_journals(&s[..1], Metric::S0).is_err());
    let mut dup = s.clone();
    dup[1].journal = "PRL".into();
    assert!(rank_journals(&dup, Metric::S0).is_err());
}

#[test]
fn tau_against_brute_force() {
    let a = RankTable::from_ranks("a", vec![("A".into(), 1), ("B".into(), 2), ("C".into(), 3), ("D".into(), 4)]).unwrap();
    let b = RankTable::from_ranks("b", vec![("A".into(), 2), ("B".into(), 1), ("C".into(), 4), ("D".into(), 3)]).unwrap();
    let (c, d) = brute_kendall(&[1, 2, 3, 4], &[2, 1, 4, 3]);
    assert_eq!(rank_correlation(&a, &b).unwrap().tau, (c - d) as f64 / 6.0);
    let other = RankTable::from_ranks("c", vec![("A".into(), 1), ("B".into(), 2), ("C".into(), 3), ("E".into(), 4)]).unwrap();
    assert!(rank_correlation(&a, &other).is_err());
}

#[test]
fn tied_rankings_use_tau_b() {
    let a = RankTable::from_ranks("a", vec![("A".into(), 1), ("B".into(), 1), ("C".into(), 3)]).unwrap();
    let b = RankTable::from_ranks("b", vec![("A".into(), 1), ("B".into(), 2), ("C".into(), 3)]).unwrap();
    let cmp = rank_correlation(&a, &b).unwrap();
    assert_eq!((cmp.pair_counts.concordant, cmp.pair_counts.tied_a), (2, 1));
    assert!((cmp.tau - 2.0 / (2.0f64 * 3.0).sqrt()).abs() < 1e-15);
}

#[test]
fn growth_without_growth() {
    let flat: Vec<(f64, f64)> = (1950..1960).map(|y| (y as f64, 40.0)).collect();
    let g = fit_exponential_growth(&flat).unwrap();
    assert!(g.no_growth());
    assert!((g.a - 40.0).abs() < 1e-9);
    assert!(fit_exponential_growth(&[(1950.0, 1.0), (1951.0, 0.0)]).is_err());
}

#[test]
fn fixture_and_summary_io() {
    let fixture = "journal,if_rank\nPRL,1\nPRD,2\nPRB,3\n";
    let t = read_if_fixture(fixture.as_bytes()).unwrap();
    assert_eq!(t.rank_of("PRB"), Some(3));
    assert!(read_if_fixture("journal,rank\nPRL,1\n".as_bytes()).is_err());
    let mut out = Vec::new();
    write_summary_csv(&mut out, &journal_summaries(), false).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("journal,n,median_s0,median_beta,median_gamma,median_r0,median_upsilon\n"));
    assert_eq!(text.lines().count(), 7);
}

fn summaries_from(values: &[f64]) -> Vec<CohortSummary> {
    values
        .iter()
        .enumerate()
        .map(|(k, &v)| CohortSummary {
            journal: format!("J{k}"),
            n_papers: 1,
            median_s0: v,
            median_beta: v,
            median_gamma: v,
            median_r0: v,
            median_upsilon: v,
        })
        .collect()
}

proptest! {
    #[test]
    fn ranks_survive_monotone_transforms(values in prop::collection::vec(1e-3f64..1e6, 2..12)) {
        let plain = rank_journals(&summaries_from(&values), Metric::S0).unwrap();
        let logged: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let transformed = rank_journals(&summaries_from(&logged), Metric::S0).unwrap();
        prop_assert_eq!(&plain, &RankTable { metric: plain.metric.clone(), ..transformed.clone() });
        prop_assert_eq!(rank_correlation(&plain, &transformed).unwrap().tau, 1.0);
    }

    #[test]
    fn tau_is_bounded_and_symmetric(values in prop::collection::vec(0u32..5, 2..10), other in prop::collection::vec(0u32..5, 10)) {
        let a = rank_journals(&summaries_from(&values.iter().map(|&v| v as f64).collect::<Vec<_>>()), Metric::S0).unwrap();
        let b = rank_journals(&summaries_from(&other[..values.len()].iter().map(|&v| v as f64).collect::<Vec<_>>()), Metric::S0).unwrap();
        let ab = rank_correlation(&a, &b).unwrap().tau;
        let ba = rank_correlation(&b, &a).unwrap().tau;
        prop_assert!((-1.0..=1.0).contains(&ab));
        prop_assert!((ab - ba).abs() < 1e-12);
    }
}
