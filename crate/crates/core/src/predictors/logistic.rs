//! Logistic-regression baseline for IPD: probability that the focal player
//! cooperates next, from the last joint action, round position and payoff
//! structure.

use serde::{Deserialize, Serialize};

use crate::dataset::SupervisedSequence;
use crate::error::{Error, Result};
use crate::games::{encode_one_hot, Action, GameKind, GameSpec, Trajectory, IPD_ALPHABET};
use crate::numerics::{adam_step, dot, l2_norm, sigmoid, AdamState, Mat};

/// Feature vector length produced by [`build_lr_features`].
pub const LR_FEATURES: usize = 9;

const MAX_ITERATIONS: usize = 5_000;
const GRAD_TOLERANCE: f64 = 1e-6;
const LEARNING_RATE: f64 = 0.05;
const NEWTON_STEPS: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticModel {
    pub fn probability(&self, features: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, features) + self.bias)
    }
}

/// Features after round `t` (1-based) for predicting round `t + 1`:
/// own last action one-hot, opponent last action one-hot, both-cooperated,
/// both-defected, `t / horizon`, `(R−P)/(T−S)`, `(T−R)/(T−S)`.
pub fn lr_features(own_last: Action, opp_last: Action, t: usize, horizon: usize, spec: Option<&GameSpec>) -> Result<Vec<f64>> {
    if t == 0 {
        return Err(Error::NoHistory);
    }
    let mut f = encode_one_hot(own_last, IPD_ALPHABET)?;
    f.extend(encode_one_hot(opp_last, IPD_ALPHABET)?);
    let both_c = own_last.is_cooperate() && opp_last.is_cooperate();
    let both_d = !own_last.is_cooperate() && !opp_last.is_cooperate();
    f.push(f64::from(u8::from(both_c)));
    f.push(f64::from(u8::from(both_d)));
    f.push(t as f64 / horizon.max(1) as f64);
    match spec {
        Some(s) => {
            let span = s.temptation - s.sucker;
            f.push((s.reward - s.penalty) / span);
            f.push((s.temptation - s.reward) / span);
        }
        None => f.extend([0.0, 0.0]),
    }
    Ok(f)
}

pub fn build_lr_features(traj: &Trajectory, focal: usize, t: usize, spec: Option<&GameSpec>) -> Result<Vec<f64>> {
    if traj.kind != GameKind::Ipd {
        return Err(Error::GameKind {
            expected: GameKind::Ipd.to_string(),
            found: traj.kind.to_string(),
        });
    }
    if t == 0 {
        return Err(Error::NoHistory);
    }
    if focal > 1 || t > traj.len() {
        return Err(Error::Length(format!(
            "round {t} / agent {focal} outside trajectory {} of length {}",
            traj.meta.id,
            traj.len()
        )));
    }
    let horizon = spec.map_or(traj.len(), |s| s.horizon);
    lr_features(traj.actions[focal][t - 1], traj.actions[1 - focal][t - 1], t, horizon, spec)
}

/// Read the last joint action back out of an IPD input vector (own one-hot, opponent one-hot).
fn joint_action(x: &[f64]) -> Result<(Action, Action)> {
    if x.len() < 2 * IPD_ALPHABET {
        return Err(Error::Dimension(format!("IPD input of length {}", x.len())));
    }
    let pick = |v: &[f64]| if v[1] > v[0] { Action::COOPERATE } else { Action::DEFECT };
    Ok((pick(&x[..2]), pick(&x[2..4])))
}

/// Features for every step of a supervised IPD sequence.
pub fn sequence_features(seq: &SupervisedSequence) -> Result<Vec<Vec<f64>>> {
    if seq.kind != GameKind::Ipd {
        return Err(Error::GameKind {
            expected: GameKind::Ipd.to_string(),
            found: seq.kind.to_string(),
        });
    }
    let horizon = seq.spec.map_or(seq.horizon(), |s| s.horizon);
    seq.inputs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let (own, opp) = joint_action(x)?;
            lr_features(own, opp, i + 1, horizon, seq.spec.as_ref())
        })
        .collect()
}

/// `(features, cooperated)` rows for every step of every sequence.
pub fn lr_rows(data: &[SupervisedSequence]) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut rows = Vec::new();
    for s in data {
        for (f, y) in sequence_features(s)?.into_iter().zip(&s.targets) {
            rows.push((f, y[Action::COOPERATE.0]));
        }
    }
    Ok(rows)
}

/// Gradient of the mean negative log-likelihood plus `l2/2 ‖w‖²` (bias unpenalised),
/// returned as `[∂w…, ∂b]`.
pub fn logistic_gradient(model: &LogisticModel, rows: &[(Vec<f64>, f64)], l2: f64) -> Vec<f64> {
    let d = model.weights.len();
    let mut g = vec![0.0; d + 1];
    for (x, y) in rows {
        let r = model.probability(x) - y;
        for (gj, xj) in g.iter_mut().zip(x) {
            *gj += r * xj;
        }
        g[d] += r;
    }
    let n = rows.len() as f64;
    for (j, gj) in g.iter_mut().enumerate() {
        *gj /= n;
        if j < d {
            *gj += l2 * model.weights[j];
        }
    }
    g
}

pub fn logistic_objective(model: &LogisticModel, rows: &[(Vec<f64>, f64)], l2: f64) -> f64 {
    let nll: f64 = rows
        .iter()
        .map(|(x, y)| {
            let z = dot(&model.weights, x) + model.bias;
            // log(1 + e^z) − y z, stable for large |z|
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            softplus - y * z
        })
        .sum();
    nll / rows.len() as f64 + 0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>()
}

fn unpack(theta: &[f64]) -> LogisticModel {
    let d = theta.len() - 1;
    LogisticModel {
        weights: theta[..d].to_vec(),
        bias: theta[d],
    }
}

/// Newton step on the penalised objective; `None` if the Hessian solve fails.
fn newton_step(model: &LogisticModel, rows: &[(Vec<f64>, f64)], l2: f64, grad: &[f64]) -> Option<Vec<f64>> {
    let d = model.weights.len();
    let k = d + 1;
    let mut hess = Mat::zeros(k, k);
    let n = rows.len() as f64;
    let mut aug = vec![0.0; k];
    for (x, _) in rows {
        let p = model.probability(x);
        let w = p * (1.0 - p) / n;
        aug[..d].copy_from_slice(x);
        aug[d] = 1.0;
        for i in 0..k {
            for j in 0..k {
                hess.set(i, j, hess.get(i, j) + w * aug[i] * aug[j]);
            }
        }
    }
    for i in 0..d {
        hess.set(i, i, hess.get(i, i) + l2);
    }
    let rhs = Mat::from_vec(k, 1, grad.to_vec()).ok()?;
    let step = crate::numerics::solve_ols(&hess, &rhs).ok()?;
    Some(step.into_vec())
}

/// Maximise the L2-penalised log-likelihood by full-batch Adam until the
/// gradient norm drops below 1e-6 or 5 000 iterations pass. If Adam stops
/// short of the tolerance, damped Newton steps finish the job.
pub fn fit_logistic(rows: &[(Vec<f64>, f64)], l2: f64) -> Result<LogisticModel> {
    let d = rows
        .first()
        .map(|r| r.0.len())
        .ok_or_else(|| Error::InsufficientData("no rows for logistic regression".into()))?;
    if !(l2 >= 0.0) {
        return Err(Error::Config(format!("l2 penalty {l2} must be non-negative")));
    }
    if let Some((x, _)) = rows.iter().find(|r| r.0.len() != d) {
        return Err(Error::Dimension(format!("feature rows of length {d} and {}", x.len())));
    }
    let mut theta = Mat::zeros(1, d + 1);
    let mut adam = AdamState::new(1, d + 1, LEARNING_RATE);
    let mut model = unpack(theta.as_slice());
    let mut grad = logistic_gradient(&model, rows, l2);
    for _ in 0..MAX_ITERATIONS {
        if l2_norm(&grad) < GRAD_TOLERANCE {
            return Ok(model);
        }
        let (next, state) = adam_step(&theta, &Mat::from_vec(1, d + 1, grad)?, &adam)?;
        theta = next;
        adam = state;
        model = unpack(theta.as_slice());
        grad = logistic_gradient(&model, rows, l2);
    }

    for _ in 0..NEWTON_STEPS {
        if l2_norm(&grad) < GRAD_TOLERANCE {
            break;
        }
        let Some(step) = newton_step(&model, rows, l2, &grad) else {
            break;
        };
        let current = logistic_objective(&model, rows, l2);
        let mut scale = 1.0;
        let mut accepted = false;
        while scale > 1e-8 {
            let cand: Vec<f64> = theta.as_slice().iter().zip(&step).map(|(t, s)| t - scale * s).collect();
            let cand_model = unpack(&cand);
            if logistic_objective(&cand_model, rows, l2) <= current {
                theta = Mat::from_vec(1, d + 1, cand)?;
                model = cand_model;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
        grad = logistic_gradient(&model, rows, l2);
    }
    if !model.bias.is_finite() || model.weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Numeric("logistic regression diverged".into()));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::TrajectoryMeta;

    fn traj(a1: &[usize], a2: &[usize]) -> Trajectory {
        Trajectory {
            kind: GameKind::Ipd,
            actions: vec![a1.iter().map(|&a| Action(a)).collect(), a2.iter().map(|&a| Action(a)).collect()],
            rewards: None,
            draws: None,
            spec: Some(GameSpec::standard(9)),
            meta: TrajectoryMeta::default(),
        }
    }

    #[test]
    fn feature_assembly() {
        let t = traj(&[1; 9], &[1; 9]);
        let spec = GameSpec::standard(9);
        let f = build_lr_features(&t, 0, 1, Some(&spec)).unwrap();
        let want = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0 / 9.0, 0.4, 0.4];
        assert_eq!(f.len(), LR_FEATURES);
        for (a, b) in f.iter().zip(want) {
            assert!((a - b).abs() < 1e-15, "{f:?}");
        }
        let f = build_lr_features(&traj(&[0; 9], &[0; 9]), 1, 4, Some(&spec)).unwrap();
        assert_eq!(f[5], 1.0);
        assert_eq!(f[4], 0.0);
        for t in 1..=9 {
            assert_eq!(build_lr_features(&t_mixed(), 0, t, Some(&spec)).unwrap().len(), LR_FEATURES);
        }
        assert!(matches!(build_lr_features(&t_mixed(), 0, 0, Some(&spec)), Err(Error::NoHistory)));
        let f = build_lr_features(&t_mixed(), 0, 2, None).unwrap();
        assert_eq!(&f[7..], &[0.0, 0.0]);
    }

    fn t_mixed() -> Trajectory {
        traj(&[1, 0, 1, 1, 0, 0, 1, 0, 1], &[0, 0, 1, 1, 1, 0, 1, 0, 0])
    }

    #[test]
    fn separable_data_is_fit_perfectly() {
        let rows: Vec<(Vec<f64>, f64)> = (0..40)
            .map(|i| {
                let x = i as f64 / 10.0 - 2.0;
                (vec![x, 0.5 * x * x], f64::from(u8::from(x > 0.05)))
            })
            .collect();
        let m = fit_logistic(&rows, 1e-4).unwrap();
        let correct = rows
            .iter()
            .filter(|(x, y)| (m.probability(x) > 0.5) == (*y == 1.0))
            .count();
        assert_eq!(correct, rows.len());
        assert!(l2_norm(&logistic_gradient(&m, &rows, 1e-4)) < 1e-6);
    }

    #[test]
    fn all_positive_labels() {
        let rows: Vec<(Vec<f64>, f64)> = (0..20).map(|i| (vec![i as f64 / 20.0, 1.0], 1.0)).collect();
        let m = fit_logistic(&rows, 1e-4).unwrap();
        assert!(rows.iter().all(|(x, _)| m.probability(x) > 0.99));
    }

    #[test]
    fn gradient_vanishes_at_optimum() {
        let t = t_mixed();
        let spec = GameSpec::standard(9);
        let mut rows = Vec::new();
        for focal in 0..2 {
            for r in 1..9 {
                let f = build_lr_features(&t, focal, r, Some(&spec)).unwrap();
                rows.push((f, t.actions[focal][r].0 as f64));
            }
        }
        let m = fit_logistic(&rows, 0.01).unwrap();
        assert!(l2_norm(&logistic_gradient(&m, &rows, 0.01)) < 1e-6);
    }

    #[test]
    fn empty_rows_rejected() {
        assert!(matches!(fit_logistic(&[], 0.0), Err(Error::InsufficientData(_))));
    }
}
