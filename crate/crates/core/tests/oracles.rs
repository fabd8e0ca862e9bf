//! Independent reference computations checked against the library.

mod common;

use common::{exact_normal_equations, oracle_design};
use decision_forecast::dataset::{to_supervised, FeatureConfig, SupervisedSequence};
use decision_forecast::games::{
    igt_draw, igt_expected_value, igt_scheme, simulate_ipd_population, Action, GameSpec, PolicyKind, SynthPolicy,
};
use decision_forecast::numerics::{solve_ols, Mat, OLS_RIDGE};
use decision_forecast::predictors::var::{fit_var, VarModel};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_na(m: &Mat) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn from_na(m: &DMatrix<f64>) -> Mat {
    Mat::from_vec(m.nrows(), m.ncols(), m.transpose().as_slice().to_vec()).unwrap()
}

/// Ridge solution through the SVD: `V diag(σ / (σ² + λ)) Uᵀ Y`.
fn svd_ridge(x: &DMatrix<f64>, y: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let svd = x.clone().svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let filt = DMatrix::from_diagonal(&svd.singular_values.map(|s| s / (s * s + lambda)));
    vt.transpose() * filt * u.transpose() * y
}

fn residual(x: &DMatrix<f64>, b: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    (x * b - y).norm()
}

#[test]
fn duplicated_column_matches_pseudo_inverse_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 30;
    let mut rows = Vec::new();
    for _ in 0..n {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        rows.push(vec![1.0, a, a, b]);
    }
    let x = Mat::from_rows(&rows).unwrap();
    let y = Mat::from_rows(&(0..n).map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect::<Vec<_>>()).unwrap();
    let ours = solve_ols(&x, &y).unwrap();
    assert!(ours.is_finite());
    let (xn, yn) = (to_na(&x), to_na(&y));
    let pinv = xn.clone().pseudo_inverse(1e-12).unwrap();
    let oracle = &pinv * &yn;
    let r_ours = residual(&xn, &to_na(&ours), &yn);
    let r_oracle = residual(&xn, &oracle, &yn);
    assert!((r_ours - r_oracle).abs() < 1e-6, "{r_ours} vs {r_oracle}");
}

fn ipd_sequences(n: usize, seed: u64) -> Vec<SupervisedSequence> {
    let pool = [
        SynthPolicy::new(PolicyKind::TitForTat),
        SynthPolicy::new(PolicyKind::GrimTrigger),
        SynthPolicy::new(PolicyKind::Random),
        SynthPolicy::new(PolicyKind::AlwaysDefect).with_noise(0.2),
    ];
    simulate_ipd_population(&pool, &pool, &GameSpec::standard(9), 9, n, seed)
        .unwrap()
        .iter()
        .flat_map(|t| to_supervised(t, &FeatureConfig::default()).unwrap())
        .collect()
}

fn stacked(model: &VarModel) -> DMatrix<f64> {
    to_na(&model.to_stacked())
}

#[test]
fn var_coefficients_match_normal_equations_oracle() {
    for lag in [1, 2, 3] {
        let seqs = ipd_sequences(60, 5 + lag as u64);
        let model = fit_var(&seqs, lag).unwrap();
        let (x, y) = oracle_design(&seqs, lag);
        let oracle = exact_normal_equations(&x, &y, OLS_RIDGE);
        let diff = (stacked(&model) - &oracle).amax();
        assert!(diff < 1e-8, "lag {lag}: max coefficient difference {diff:e}");
    }
}

#[test]
fn full_rank_design_matches_explicit_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = DMatrix::from_fn(50, 4, |_, _| rng.gen_range(-1.0..1.0));
    let y = DMatrix::from_fn(50, 2, |_, _| rng.gen_range(-1.0..1.0));
    let gram = x.transpose() * &x + DMatrix::identity(4, 4) * OLS_RIDGE;
    let oracle = gram.lu().solve(&(x.transpose() * &y)).unwrap();
    let ours = to_na(&solve_ols(&from_na(&x), &from_na(&y)).unwrap());
    assert!((ours - oracle).amax() < 1e-10);
}

/// The payoff table, transcribed: (win per card, [(loss, probability)]) per deck.
fn table(scheme: u8) -> [(f64, Vec<(f64, f64)>); 4] {
    let a = (100.0, vec![(-150.0, 0.1), (-200.0, 0.1), (-250.0, 0.1), (-300.0, 0.1), (-350.0, 0.1)]);
    let b = (100.0, vec![(-1250.0, 0.1)]);
    let c = if scheme == 1 {
        (50.0, vec![(-25.0, 0.1), (-75.0, 0.1), (-50.0, 0.3)])
    } else {
        (50.0, vec![(-50.0, 0.5)])
    };
    let d = (50.0, vec![(-250.0, 0.1)]);
    [a, b, c, d]
}

#[test]
fn payoff_tables_match_transcription_and_give_exact_expected_values() {
    for id in [1u8, 2] {
        let scheme = igt_scheme(id).unwrap();
        for (k, (win, losses)) in table(id).iter().enumerate() {
            let deck = &scheme.decks[k];
            assert_eq!(deck.win_per_card, *win);
            let got: Vec<(f64, f64)> = deck.losses.iter().map(|l| (l.amount, l.probability())).collect();
            assert_eq!(&got, losses, "scheme {id} deck {k}");
            let expected = if k < 2 { -25.0 } else { 25.0 };
            assert_eq!(igt_expected_value(&scheme, Action(k)).unwrap(), expected);
        }
    }
}

fn sample_mean(scheme: u8, deck: usize, draws: usize, seed: u64) -> f64 {
    let scheme = igt_scheme(scheme).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..draws)
        .map(|_| igt_draw(&scheme, Action(deck), &mut rng).unwrap().combined)
        .sum::<f64>()
        / draws as f64
}

#[test]
fn deck_a_monte_carlo_mean() {
    let mean = sample_mean(1, 0, 10_000, 0);
    assert!((mean + 25.0).abs() <= 3.0, "mean {mean}");
}

#[test]
fn every_deck_mean_within_four_standard_errors() {
    let draws = 10_000;
    for id in [1u8, 2] {
        for (k, (win, losses)) in table(id).iter().enumerate() {
            let ev: f64 = win + losses.iter().map(|(l, p)| l * p).sum::<f64>();
            let second: f64 = losses.iter().map(|(l, p)| (win + l).powi(2) * p).sum::<f64>()
                + win * win * (1.0 - losses.iter().map(|(_, p)| p).sum::<f64>());
            let se = ((second - ev * ev) / draws as f64).sqrt();
            let mean = sample_mean(id, k, draws, 100 + k as u64);
            assert!((mean - ev).abs() <= 4.0 * se, "scheme {id} deck {k}: {mean} vs {ev} (se {se})");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ols_agrees_with_svd_ridge(seed in any::<u64>(), n in 6usize..40, d in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, d, |_, _| rng.gen_range(-3.0..3.0));
        let y = DMatrix::from_fn(n, 2, |_, _| rng.gen_range(-3.0..3.0));
        let ours = to_na(&solve_ols(&from_na(&x), &from_na(&y)).unwrap());
        let oracle = svd_ridge(&x, &y, OLS_RIDGE);
        prop_assert!((ours - oracle).amax() < 1e-8);
    }
}
