mod common;

use proptest::prelude::*;
use tanhshift::bias::{figure_data, mc_density_check, Preset};
use tanhshift::dist::{artanh, SquashedGaussian1D};
use tanhshift::mode::{
    action_bias, analytic_mode, grid_mode, grid_point, stationary_points, GRID_LAST_INDEX,
};
use tanhshift::stats::{
    iqm, mean, median, performance_profile, stratified_bootstrap_ci, Metric, ScoreMatrix,
};

const MUS: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];
const SIGMAS: [f64; 4] = [0.2, 0.5, 1.0, 2.0];

fn sg(mu: f64, sigma: f64) -> SquashedGaussian1D {
    SquashedGaussian1D::new(mu, sigma).unwrap()
}

#[test]
fn normalization_on_reference_grid() {
    for mu in MUS {
        for sigma in SIGMAS {
            let m = common::quad::total_mass(&sg(mu, sigma));
            assert!((m - 1.0).abs() < 1e-6, "mu={mu} sigma={sigma} mass={m}");
        }
    }
}

#[test]
fn boundary_decay_for_moderate_sigma() {
    let y = 1.0 - 1e-7;
    for mu in MUS {
        for sigma in SIGMAS.into_iter().filter(|&s| s <= 1.0) {
            let d = sg(mu, sigma);
            let centre = d.pdf(mu.tanh()).unwrap();
            assert!(
                d.pdf(y).unwrap() < centre && d.pdf(-y).unwrap() < centre,
                "mu={mu} sigma={sigma}"
            );
        }
    }
}

#[test]
fn boundary_decay_fails_for_wide_sigma() {
    // mass piles up at the edges once 2 sigma^2 is large
    let d = sg(2.0, 2.0);
    assert!(d.pdf(1.0 - 1e-7).unwrap() > d.pdf(2f64.tanh()).unwrap());
}

#[test]
fn cdf_derivative_matches_pdf() {
    for mu in MUS {
        for sigma in SIGMAS {
            let d = sg(mu, sigma);
            for i in 1..=50 {
                let y = -0.98 + 1.96 * i as f64 / 51.0;
                let h = 1e-6;
                let fd = (d.cdf(y + h).unwrap() - d.cdf(y - h).unwrap()) / (2.0 * h);
                assert!(
                    (fd - d.pdf(y).unwrap()).abs() < 1e-5,
                    "mu={mu} sigma={sigma} y={y}"
                );
            }
        }
    }
}

#[test]
fn bimodality_threshold_at_half() {
    assert!(!stationary_points(&sg(0.0, 0.70)).unwrap().bimodal);
    assert!(stationary_points(&sg(0.0, 0.72)).unwrap().bimodal);
}

#[test]
fn vanishing_sigma_has_no_bias() {
    for i in 0..=40 {
        let mu = -2.0 + 0.1 * i as f64;
        assert!(action_bias(&sg(mu, 1e-3)).unwrap().abs() < 1e-5, "mu={mu}");
    }
}

#[test]
fn mode_increases_with_mu_when_unimodal() {
    for sigma in [0.1, 0.3, 0.5, 0.7] {
        let ys: Vec<f64> = (0..=24)
            .map(|i| {
                analytic_mode(&sg(-3.0 + 0.25 * i as f64, sigma))
                    .unwrap()
                    .y_star
            })
            .collect();
        assert!(ys.windows(2).all(|w| w[1] > w[0]), "sigma={sigma}");
    }
}

#[test]
fn figure_curves_integrate_to_one() {
    for preset in [Preset::Motivation, Preset::Shift, Preset::BiasPoints] {
        let fig = figure_data(preset).unwrap();
        let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        for r in &fig.curves {
            let key = format!("{}:{}", r.mu, r.sigma);
            match curves.last_mut() {
                Some((k, pts)) if *k == key => pts.push((r.y, r.transformed_pdf)),
                _ => curves.push((key, vec![(r.y, r.transformed_pdf)])),
            }
        }
        for (key, pts) in curves {
            let area: f64 = pts
                .windows(2)
                .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
                .sum();
            assert!((area - 1.0).abs() < 1e-3, "{preset:?} {key}: {area}");
        }
    }
}

#[test]
fn mc_check_deterministic_given_seed() {
    let a = mc_density_check(&sg(1.0, 0.5), 20_000, 40, 9).unwrap();
    let b = mc_density_check(&sg(1.0, 0.5), 20_000, 40, 9).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, mc_density_check(&sg(1.0, 0.5), 20_000, 40, 10).unwrap());
}

proptest! {
    #[test]
    fn inverse_identity(t in -8.0f64..8.0) {
        prop_assert!((artanh(t.tanh()).unwrap() - t).abs() < 1e-9);
    }

    #[test]
    fn pdf_symmetry(mu in -4.0f64..4.0, sigma in 0.05f64..3.0, y in -0.999f64..0.999) {
        let a = sg(mu, sigma).pdf(y).unwrap();
        let b = sg(-mu, sigma).pdf(-y).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
    }

    #[test]
    fn cdf_monotone(mu in -3.0f64..3.0, sigma in 0.05f64..3.0, y0 in -0.99f64..0.99, dy in 0.0f64..0.01) {
        let d = sg(mu, sigma);
        let y1 = (y0 + dy).min(0.999);
        prop_assert!(d.cdf(y1).unwrap() >= d.cdf(y0).unwrap());
    }

    #[test]
    fn grid_mode_dominates_every_grid_point(mu in -3.0f64..3.0, sigma in 0.1f64..2.0, i in 0usize..=GRID_LAST_INDEX) {
        let d = sg(mu, sigma);
        let g = grid_mode(&d);
        prop_assert!(d.log_pdf(g.y_star).unwrap() >= d.log_pdf(grid_point(i)).unwrap());
    }

    #[test]
    fn correction_dominates_naive(mu in -4.0f64..4.0, sigma in 0.05f64..3.0) {
        let d = sg(mu, sigma);
        let m = analytic_mode(&d).unwrap();
        let lp_naive = d.log_pdf(mu.tanh()).unwrap();
        prop_assert!(d.log_pdf(m.y_star).unwrap() >= lp_naive - 1e-12 * lp_naive.abs().max(1.0));
    }

    #[test]
    fn mode_shifts_boundary_ward(mu in 0.01f64..3.0, sigma in 0.05f64..2.0) {
        let up = analytic_mode(&sg(mu, sigma)).unwrap();
        let down = analytic_mode(&sg(-mu, sigma)).unwrap();
        prop_assert!(up.y_star >= mu.tanh());
        prop_assert!(down.y_star <= (-mu).tanh());
    }

    #[test]
    fn iqm_permutation_and_shift(xs in prop::collection::vec(-100.0f64..100.0, 1..40), c in -50.0f64..50.0, rot in 0usize..40) {
        let mut perm = xs.clone();
        let k = rot % perm.len();
        perm.rotate_left(k);
        perm.reverse();
        prop_assert!((iqm(&perm).unwrap() - iqm(&xs).unwrap()).abs() < 1e-12);
        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        prop_assert!((iqm(&shifted).unwrap() - iqm(&xs).unwrap() - c).abs() < 1e-12 * (1.0 + c.abs()) * 100.0);
    }

    #[test]
    fn aggregates_within_range(xs in prop::collection::vec(-1e3f64..1e3, 1..60)) {
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for v in [iqm(&xs).unwrap(), median(&xs).unwrap(), mean(&xs).unwrap()] {
            prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
        }
    }

    #[test]
    fn profile_non_increasing(rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 1..10)) {
        let m = ScoreMatrix::new(rows).unwrap();
        let taus: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let p = performance_profile(&m, &taus).unwrap();
        prop_assert!(p.windows(2).all(|w| w[1].fraction <= w[0].fraction));
        prop_assert!(p.iter().all(|r| (0.0..=1.0).contains(&r.fraction)));
    }

    #[test]
    fn bootstrap_deterministic(rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 4..8), seed in 0u64..1000) {
        let m = ScoreMatrix::new(rows).unwrap();
        let a = stratified_bootstrap_ci(Metric::Iqm, &m, 200, 0.95, seed).unwrap();
        let b = stratified_bootstrap_ci(Metric::Iqm, &m, 200, 0.95, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}
