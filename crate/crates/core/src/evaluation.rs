//! Prediction error and population-level behaviour curves.
//!
//! MSE at a step is averaged over sequences and over the components of the
//! action vector, so IGT (4 actions) and IPD (2 actions) values are both in
//! [0, 1]. Curves cover the predicted rounds 2..H.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{supervised_subset, write_atomic, Dataset, FeatureConfig, Split};
use crate::error::{Error, Result};
use crate::games::{encode_one_hot, Action, GameKind, Trajectory};
use crate::predictors::{Model, NextActionPredictor};

pub const DEFAULT_SMOOTHING_WINDOW: usize = 5;

pub fn mse_per_step(predictions: &[Vec<Vec<f64>>], targets: &[Vec<Vec<f64>>]) -> Result<Vec<f64>> {
    if predictions.len() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} predicted sequences for {} target sequences",
            predictions.len(),
            targets.len()
        )));
    }
    let steps = targets.iter().map(Vec::len).max().unwrap_or(0);
    let mut sum = vec![0.0; steps];
    let mut count = vec![0usize; steps];
    for (s, (p, y)) in predictions.iter().zip(targets).enumerate() {
        if p.len() != y.len() {
            return Err(Error::Dimension(format!("sequence {s}: {} predictions for {} targets", p.len(), y.len())));
        }
        for (t, (pv, yv)) in p.iter().zip(y).enumerate() {
            if pv.len() != yv.len() || yv.is_empty() {
                return Err(Error::Dimension(format!("sequence {s} step {t}: vector widths {} and {}", pv.len(), yv.len())));
            }
            let se: f64 = pv.iter().zip(yv).map(|(a, b)| (a - b) * (a - b)).sum();
            sum[t] += se / yv.len() as f64;
            count[t] += 1;
        }
    }
    Ok(sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect())
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Centred moving average; windows are truncated at the ends.
pub fn moving_average(v: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let before = (w - 1) / 2;
    let after = w / 2;
    (0..v.len())
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after).min(v.len() - 1);
            mean(&v[lo..=hi])
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveMode {
    /// Probability-weighted choice.
    #[default]
    Expected,
    /// Most likely action only.
    Argmax,
}

/// Indices counted as the "good" outcome of a game: decks C, D or Cooperate.
fn favourable(kind: GameKind) -> &'static [usize] {
    match kind {
        GameKind::Igt => &[2, 3],
        GameKind::Ipd => &[1],
    }
}

fn argmax_one_hot(p: &[f64]) -> Vec<f64> {
    let mut best = 0;
    for (i, &x) in p.iter().enumerate() {
        if x > p[best] {
            best = i;
        }
    }
    let mut v = vec![0.0; p.len()];
    v[best] = 1.0;
    v
}

/// Per-step mass on the favourable actions, averaged over sequences, then smoothed.
pub fn population_curve(kind: GameKind, vectors: &[Vec<Vec<f64>>], window: usize, mode: CurveMode) -> Vec<f64> {
    let steps = vectors.iter().map(Vec::len).max().unwrap_or(0);
    let mut sum = vec![0.0; steps];
    let mut count = vec![0usize; steps];
    for seq in vectors {
        for (t, p) in seq.iter().enumerate() {
            let p = match mode {
                CurveMode::Expected => p.clone(),
                CurveMode::Argmax => argmax_one_hot(p),
            };
            sum[t] += favourable(kind).iter().map(|&i| p[i].clamp(0.0, 1.0)).sum::<f64>();
            count[t] += 1;
        }
    }
    let raw: Vec<f64> = sum.iter().zip(&count).map(|(s, &c)| (s / c as f64).min(1.0)).collect();
    moving_average(&raw, window)
}

fn one_hot_actions(trajs: &[Trajectory], kind: GameKind) -> Result<Vec<Vec<Vec<f64>>>> {
    let mut out = Vec::new();
    for t in trajs {
        if t.kind != kind {
            return Err(Error::GameKind {
                expected: kind.to_string(),
                found: t.kind.to_string(),
            });
        }
        for agent in &t.actions {
            out.push(
                agent
                    .iter()
                    .map(|&a: &Action| encode_one_hot(a, kind.alphabet()))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
    }
    Ok(out)
}

/// Fraction of subjects choosing deck C or D at each trial, smoothed by a centred window.
pub fn better_action_rate(trajs: &[Trajectory], window: usize) -> Result<Vec<f64>> {
    let v = one_hot_actions(trajs, GameKind::Igt)?;
    Ok(population_curve(GameKind::Igt, &v, window, CurveMode::Expected))
}

/// Fraction of players cooperating at each round (both players of every dyad).
pub fn cooperation_rate(trajs: &[Trajectory]) -> Result<Vec<f64>> {
    let v = one_hot_actions(trajs, GameKind::Ipd)?;
    Ok(population_curve(GameKind::Ipd, &v, 1, CurveMode::Expected))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub features: FeatureConfig,
    /// Smoothing for IGT curves; IPD cooperation curves are never smoothed.
    pub window: usize,
    pub curve_mode: CurveMode,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            features: FeatureConfig::default(),
            window: DEFAULT_SMOOTHING_WINDOW,
            curve_mode: CurveMode::Expected,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub dataset_hash: String,
    pub avg_mse: f64,
    pub mse_per_step: Vec<f64>,
    pub truth_curve: Vec<f64>,
    pub pred_curve: Vec<f64>,
    pub n_test: usize,
    pub seed: u64,
    pub fold: Option<usize>,
    /// Kept out of the written report so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl EvalReport {
    /// The report with timing zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> EvalReport {
        EvalReport {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }
}

/// Score `model` on the test side of `split`.
pub fn build_report(model: &Model, dataset: &Dataset, split: &Split, config: &EvalConfig) -> Result<EvalReport> {
    if split.test.is_empty() {
        return Err(Error::Config("test split is empty".into()));
    }
    let start = Instant::now();
    let test = dataset.subset(&split.test);
    let seqs = supervised_subset(dataset, &split.test, &config.features)?;
    let predictions = seqs.iter().map(|s| model.predict_sequence(s)).collect::<Result<Vec<_>>>()?;
    let targets: Vec<Vec<Vec<f64>>> = seqs.iter().map(|s| s.targets.clone()).collect();
    let mse = mse_per_step(&predictions, &targets)?;
    let window = match dataset.kind {
        GameKind::Igt => config.window,
        GameKind::Ipd => 1,
    };
    Ok(EvalReport {
        model: model.kind().to_string(),
        dataset_hash: test.content_hash(),
        avg_mse: mean(&mse),
        mse_per_step: mse,
        truth_curve: population_curve(dataset.kind, &targets, window, CurveMode::Expected),
        pred_curve: population_curve(dataset.kind, &predictions, window, config.curve_mode),
        n_test: test.len(),
        seed: split.seed,
        fold: split.fold,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn elementwise_mean(rows: &[&Vec<f64>]) -> Vec<f64> {
    let n = rows.iter().map(|r| r.len()).min().unwrap_or(0);
    (0..n).map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / rows.len() as f64).collect()
}

/// Cross-validation summary: per-step values and `avg_mse` are means over folds.
pub fn aggregate_reports(reports: &[EvalReport]) -> Result<EvalReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InsufficientData("no fold reports to aggregate".into()))?;
    let pick = |f: fn(&EvalReport) -> &Vec<f64>| elementwise_mean(&reports.iter().map(f).collect::<Vec<_>>());
    Ok(EvalReport {
        model: first.model.clone(),
        dataset_hash: first.dataset_hash.clone(),
        avg_mse: reports.iter().map(|r| r.avg_mse).sum::<f64>() / reports.len() as f64,
        mse_per_step: pick(|r| &r.mse_per_step),
        truth_curve: pick(|r| &r.truth_curve),
        pred_curve: pick(|r| &r.pred_curve),
        n_test: reports.iter().map(|r| r.n_test).sum(),
        seed: first.seed,
        fold: None,
        wall_time_s: reports.iter().map(|r| r.wall_time_s).sum(),
    })
}

/// `step,truth,prediction`, steps numbered from 2 (the first predicted round).
pub fn curve_csv(report: &EvalReport) -> String {
    let mut out = String::from("step,truth,prediction\n");
    for (i, (t, p)) in report.truth_curve.iter().zip(&report.pred_curve).enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 2, t, p));
    }
    out
}

/// Writes `<stem>.json` and `<stem>_curve.csv` into `dir`.
pub fn write_report(report: &EvalReport, dir: &Path, stem: &str) -> Result<()> {
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    write_atomic(&dir.join(format!("{stem}.json")), json.as_bytes())?;
    write_atomic(&dir.join(format!("{stem}_curve.csv")), curve_csv(report).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{
        igt_scheme, simulate_igt_population, simulate_ipd_population, GameSpec, PolicyKind, SynthPolicy,
        TrajectoryMeta,
    };

    fn oh(i: usize, a: usize) -> Vec<f64> {
        encode_one_hot(Action(i), a).unwrap()
    }

    #[test]
    fn perfect_prediction_has_zero_error() {
        let y = vec![vec![oh(0, 4), oh(3, 4)], vec![oh(1, 4), oh(2, 4)]];
        assert_eq!(mse_per_step(&y, &y).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn uniform_prediction_errors() {
        // (0.75² + 3·0.25²)/4 = 0.1875 ; (0.5² + 0.5²)/2 = 0.25
        let y = vec![vec![oh(2, 4)]];
        let p = vec![vec![vec![0.25; 4]]];
        assert!((mse_per_step(&p, &y).unwrap()[0] - 0.1875).abs() < 1e-15);
        let y = vec![vec![oh(1, 2)]];
        let p = vec![vec![vec![0.5; 2]]];
        assert!((mse_per_step(&p, &y).unwrap()[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn misaligned_shapes_rejected() {
        let y = vec![vec![oh(0, 2)]];
        assert!(mse_per_step(&[], &y).is_err());
        assert!(mse_per_step(&[vec![]], &y).is_err());
        assert!(mse_per_step(&[vec![vec![0.5; 3]]], &y).is_err());
    }

    fn igt_const(n: usize, deck: usize) -> Vec<Trajectory> {
        (0..n)
            .map(|i| Trajectory {
                kind: GameKind::Igt,
                actions: vec![vec![Action(deck); 20]],
                rewards: None,
                draws: None,
                spec: None,
                meta: TrajectoryMeta {
                    source: "x".into(),
                    id: i.to_string(),
                },
            })
            .collect()
    }

    #[test]
    fn better_action_rate_cases() {
        assert!(better_action_rate(&igt_const(3, 2), 5).unwrap().iter().all(|&v| v == 1.0));
        let scheme = igt_scheme(1).unwrap();
        let random = simulate_igt_population(&[SynthPolicy::new(PolicyKind::Random)], &scheme, 30, 1000, 2).unwrap();
        for v in better_action_rate(&random, 5).unwrap() {
            assert!((v - 0.5).abs() <= 0.03, "{v}");
        }
        // window 1 leaves raw frequencies
        let mut mixed = igt_const(1, 0);
        mixed.extend(igt_const(1, 3));
        mixed[0].actions[0][4] = Action(2);
        let r = better_action_rate(&mixed, 1).unwrap();
        assert_eq!(r[3], 0.5);
        assert_eq!(r[4], 1.0);
        let spec = GameSpec::standard(9);
        let ipd = simulate_ipd_population(&[SynthPolicy::new(PolicyKind::Random)], &[SynthPolicy::new(PolicyKind::Random)], &spec, 9, 2, 0).unwrap();
        assert!(matches!(better_action_rate(&ipd, 5), Err(Error::GameKind { .. })));
        assert!(matches!(cooperation_rate(&igt_const(2, 1)), Err(Error::GameKind { .. })));
    }

    #[test]
    fn cooperation_rate_cases() {
        let spec = GameSpec::standard(9);
        let tft = [SynthPolicy::new(PolicyKind::TitForTat)];
        let alld = [SynthPolicy::new(PolicyKind::AlwaysDefect)];
        let coop = simulate_ipd_population(&tft, &tft, &spec, 9, 10, 1).unwrap();
        assert!(cooperation_rate(&coop).unwrap().iter().all(|&v| v == 1.0));
        let def = simulate_ipd_population(&alld, &alld, &spec, 9, 10, 1).unwrap();
        assert!(cooperation_rate(&def).unwrap().iter().all(|&v| v == 0.0));
        let grim = [SynthPolicy::new(PolicyKind::GrimTrigger)];
        // grim vs grim cooperates forever, alld vs alld never: half the players cooperate
        let mut half = simulate_ipd_population(&grim, &grim, &spec, 9, 5, 2).unwrap();
        half.extend(def[..5].iter().cloned());
        assert!(cooperation_rate(&half).unwrap().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn moving_average_edges() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(moving_average(&v, 1), v.to_vec());
        assert_eq!(moving_average(&v, 3), vec![0.5, 1.0, 2.0, 3.0, 3.5]);
    }

    #[test]
    fn argmax_curve() {
        let p = vec![vec![vec![0.4, 0.6]], vec![vec![0.7, 0.3]]];
        assert_eq!(population_curve(GameKind::Ipd, &p, 1, CurveMode::Argmax), vec![0.5]);
        assert!((population_curve(GameKind::Ipd, &p, 1, CurveMode::Expected)[0] - 0.45).abs() < 1e-15);
    }
}
