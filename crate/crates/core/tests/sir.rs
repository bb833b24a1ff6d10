mod common;

use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use citesir::sir::{cumulative_curve, integrate, integrate_with_step, rhs, EpidemicParams, DEFAULT_STEP};
use citesir::{solve_ultimate_impact, Error};

use common::*;

fn triples() -> Vec<EpidemicParams> {
    REFERENCE_TRIPLES.iter().map(|&(s, b, g)| EpidemicParams::new(s, b, g, 1.0).unwrap()).collect()
}

#[test]
fn step_halving_changes_little() {
    for p in triples() {
        let coarse = integrate_with_step(&p, 180.0, 1.0, DEFAULT_STEP).unwrap().last_upsilon();
        let fine = integrate_with_step(&p, 180.0, 1.0, DEFAULT_STEP / 2.0).unwrap().last_upsilon();
        assert!((coarse - fine).abs() / fine <= 1e-4, "{coarse} vs {fine}");
    }
}

#[test]
fn matches_adaptive_oracle() {
    for (p, &(s0, b, g)) in triples().iter().zip(&REFERENCE_TRIPLES) {
        let ours = cumulative_curve(p, 180).unwrap();
        let oracle = dopri_upsilon(s0, b, g, 1.0, 180, 1e-11);
        let scale = oracle[180];
        for (m, (a, o)) in ours.iter().zip(&oracle).enumerate() {
            assert!((a - o).abs() <= 1e-5 * scale, "month {m}: {a} vs {o}");
        }
    }
}

#[test]
fn middle_triple_has_not_saturated_by_month_180() {
    let p = triples()[1];
    let y180 = integrate(&p, 180.0, 1.0).unwrap().cumulative_citations(180.0).unwrap();
    let oracle = dopri_upsilon(3150.0, 0.48, 0.47, 1.0, 180, 1e-11)[180];
    assert_relative_eq!(y180, oracle, max_relative = 1e-6);
    assert!(y180 < solve_ultimate_impact(&p).upsilon_inf);
}

#[test]
fn upper_triple_reaches_plateau() {
    let p = triples()[0];
    let curve = cumulative_curve(&p, 180).unwrap();
    let plateau = curve[180];
    for (t, y) in curve.iter().enumerate().skip(60) {
        assert!((plateau - y) / plateau <= 0.02, "month {t}: {y} vs {plateau}");
    }
    let oracle = dopri_upsilon(42000.0, 9.36, 9.25, 1.0, 180, 1e-11);
    let first_within_one = oracle.iter().position(|y| oracle[180] - y <= 1.0).unwrap();
    for y in &curve[first_within_one..] {
        assert!(plateau - y <= 1.0);
    }
}

#[test]
fn scale_covariance() {
    let base = EpidemicParams::new(1050.0, 0.13, 0.10, 1.0).unwrap();
    let y = cumulative_curve(&base, 180).unwrap();
    let four = EpidemicParams::new(4.0 * 1050.0, 0.13, 0.10, 4.0).unwrap();
    let y4 = cumulative_curve(&four, 180).unwrap();
    for (a, b) in y.iter().zip(&y4) {
        assert_eq!(4.0 * a, *b);
    }
    let three = EpidemicParams::new(3.0 * 1050.0, 0.13, 0.10, 3.0).unwrap();
    for (a, b) in y.iter().zip(cumulative_curve(&three, 180).unwrap()) {
        assert_relative_eq!(3.0 * a, b, max_relative = 1e-10, epsilon = 1e-12);
    }
}

#[test]
fn curves_are_monotone_and_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let s0 = 10f64.powf(rng.random_range(1.0..6.0));
        let p = EpidemicParams::new(s0, 10f64.powf(rng.random_range(-3.0..1.0)), 10f64.powf(rng.random_range(-3.0..1.0)), 1.0)
            .unwrap();
        let traj = integrate(&p, 180.0, 1.0).unwrap();
        assert!(traj.upsilon.windows(2).all(|w| w[1] >= w[0]));
        assert!(traj.upsilon.iter().all(|&y| (0.0..=s0).contains(&y)));
        assert!(traj.states.iter().all(|s| s.s >= 0.0 && s.i >= 0.0 && s.r >= 0.0));
    }
}

#[test]
fn initial_rate_follows_mass_action() {
    let p = triples()[1];
    let r = rhs(&p.initial_state(), &p).unwrap();
    assert_relative_eq!(r.ds, -0.48 * 3150.0 / 3151.0, max_relative = 1e-12);
    assert_relative_eq!(r.dr, 0.47, max_relative = 1e-12);
}

#[test]
fn lookup_off_grid_is_an_error() {
    let traj = integrate(&triples()[2], 24.0, 1.0).unwrap();
    assert!(matches!(traj.cumulative_citations(2.5), Err(Error::Lookup(_))));
    assert!(matches!(traj.cumulative_citations(25.0), Err(Error::Lookup(_))));
    assert_eq!(traj.cumulative_citations(0.0).unwrap(), 0.0);
}

#[test]
fn invalid_inputs_rejected() {
    assert!(EpidemicParams::new(0.0, 0.1, 0.1, 1.0).is_err());
    assert!(EpidemicParams::new(10.0, -0.1, 0.1, 1.0).is_err());
    assert!(EpidemicParams::new(10.0, 0.1, 0.0, 1.0).is_err());
    assert!(EpidemicParams::new(10.0, 0.1, 0.1, 0.5).is_err());
    assert!(EpidemicParams::new(f64::NAN, 0.1, 0.1, 1.0).is_err());
    let p = triples()[0];
    assert!(integrate(&p, 10.0, 3.0).is_err());
    assert!(integrate(&p, -1.0, 1.0).is_err());
}
