//! Vector autoregression baseline: the next one-hot action as an affine
//! function of the last `p` feature vectors, fit by least squares.

use serde::{Deserialize, Serialize};

use crate::dataset::SupervisedSequence;
use crate::error::{Error, Result};
use crate::numerics::{solve_ols, Mat};

pub const DEFAULT_LAG: usize = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarModel {
    pub lag: usize,
    pub feature_dim: usize,
    pub alphabet: usize,
    /// `coefficients[k]` multiplies the feature vector `k` steps back (k = 0 is the latest).
    pub coefficients: Vec<Mat>,
    pub intercept: Vec<f64>,
}

/// Regressor row `[1, x_t, x_{t-1}, …, x_{t-p+1}]` with zeros before the start.
pub fn var_regressors(history: &[Vec<f64>], lag: usize, feature_dim: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(1 + lag * feature_dim);
    row.push(1.0);
    for k in 0..lag {
        match history.len().checked_sub(k + 1).map(|i| &history[i]) {
            Some(x) => row.extend_from_slice(x),
            None => row.extend(std::iter::repeat_n(0.0, feature_dim)),
        }
    }
    row
}

/// Stacked design and target matrices over every step of every sequence.
pub fn var_design(data: &[SupervisedSequence], lag: usize) -> Result<(Mat, Mat)> {
    let first = data
        .iter()
        .find(|s| !s.is_empty())
        .ok_or_else(|| Error::InsufficientData("no steps to fit an autoregression on".into()))?;
    let feature_dim = first.inputs[0].len();
    let alphabet = first.targets[0].len();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for s in data {
        for t in 0..s.len() {
            if s.inputs[t].len() != feature_dim || s.targets[t].len() != alphabet {
                return Err(Error::Dimension(format!("sequence {} step {t} has inconsistent widths", s.source)));
            }
            x.extend(var_regressors(&s.inputs[..=t], lag, feature_dim));
            y.extend_from_slice(&s.targets[t]);
        }
    }
    let n = y.len() / alphabet;
    Ok((Mat::from_vec(n, 1 + lag * feature_dim, x)?, Mat::from_vec(n, alphabet, y)?))
}

pub fn fit_var(data: &[SupervisedSequence], lag: usize) -> Result<VarModel> {
    if lag == 0 {
        return Err(Error::Config("autoregression lag must be at least 1".into()));
    }
    let (x, y) = var_design(data, lag)?;
    let feature_dim = (x.cols() - 1) / lag;
    let alphabet = y.cols();
    let beta = solve_ols(&x, &y)?;
    Ok(from_stacked(&beta, lag, feature_dim, alphabet))
}

/// Unpack a `(1 + p·d) × A` stacked coefficient matrix.
pub fn from_stacked(beta: &Mat, lag: usize, feature_dim: usize, alphabet: usize) -> VarModel {
    let intercept = beta.row(0).to_vec();
    let coefficients = (0..lag)
        .map(|k| {
            let mut a = Mat::zeros(alphabet, feature_dim);
            for j in 0..feature_dim {
                for o in 0..alphabet {
                    a.set(o, j, beta.get(1 + k * feature_dim + j, o));
                }
            }
            a
        })
        .collect();
    VarModel {
        lag,
        feature_dim,
        alphabet,
        coefficients,
        intercept,
    }
}

impl VarModel {
    /// Inverse of [`from_stacked`].
    pub fn to_stacked(&self) -> Mat {
        let mut beta = Mat::zeros(1 + self.lag * self.feature_dim, self.alphabet);
        for o in 0..self.alphabet {
            beta.set(0, o, self.intercept[o]);
        }
        for (k, a) in self.coefficients.iter().enumerate() {
            for j in 0..self.feature_dim {
                for o in 0..self.alphabet {
                    beta.set(1 + k * self.feature_dim + j, o, a.get(o, j));
                }
            }
        }
        beta
    }
}

/// `c + Σ_k A_k x_{t−k}` before clipping.
pub fn var_predict_raw(model: &VarModel, history: &[Vec<f64>]) -> Vec<f64> {
    let mut y = model.intercept.clone();
    for (k, a) in model.coefficients.iter().enumerate() {
        if let Some(x) = history.len().checked_sub(k + 1).map(|i| &history[i]) {
            a.mul_vec_acc(x, &mut y);
        }
    }
    y
}

/// Next-action scores clipped to [0, 1] and not renormalised.
pub fn var_predict(model: &VarModel, history: &[Vec<f64>]) -> Vec<f64> {
    clip_unit(var_predict_raw(model, history))
}

pub fn clip_unit(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|x| x.clamp(0.0, 1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{to_supervised, FeatureConfig};
    use crate::games::{Action, GameKind, GameSpec, Trajectory, TrajectoryMeta};

    fn ipd(id: &str, a1: Vec<usize>, a2: Vec<usize>) -> Trajectory {
        Trajectory {
            kind: GameKind::Ipd,
            actions: vec![a1.into_iter().map(Action).collect(), a2.into_iter().map(Action).collect()],
            rewards: None,
            draws: None,
            spec: Some(GameSpec::standard(9)),
            meta: TrajectoryMeta {
                source: "t".into(),
                id: id.into(),
            },
        }
    }

    fn seqs(trajs: &[Trajectory]) -> Vec<SupervisedSequence> {
        trajs
            .iter()
            .flat_map(|t| to_supervised(t, &FeatureConfig::default()).unwrap())
            .collect()
    }

    #[test]
    fn alternating_play_is_learned_exactly() {
        let alt = |start: usize| (0..9).map(|t| (t + start) % 2).collect::<Vec<_>>();
        let train = seqs(&[ipd("a", alt(0), alt(1)), ipd("b", alt(1), alt(0))]);
        let model = fit_var(&train, 1).unwrap();
        let held = seqs(&[ipd("c", alt(0), alt(1))]);
        let mut err = 0.0;
        let mut n = 0.0;
        for s in &held {
            for t in 0..s.len() {
                let p = var_predict(&model, &s.inputs[..=t]);
                err += p.iter().zip(&s.targets[t]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                n += p.len() as f64;
            }
        }
        assert!(err / n < 1e-6, "mse {}", err / n);
    }

    #[test]
    fn constant_play_reproduces_constant() {
        let train = seqs(&[ipd("a", vec![1; 9], vec![1; 9])]);
        let model = fit_var(&train, 1).unwrap();
        let p = var_predict(&model, &train[0].inputs[..3]);
        assert!((p[0] - 0.0).abs() < 1e-6 && (p[1] - 1.0).abs() < 1e-6, "{p:?}");
        let p = var_predict(&model, &[]);
        assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn clipping_and_zero_padding() {
        let model = VarModel {
            lag: 2,
            feature_dim: 2,
            alphabet: 2,
            coefficients: vec![Mat::identity(2), Mat::identity(2)],
            intercept: vec![0.2, -0.5],
        };
        assert_eq!(var_predict(&model, &[vec![1.0, 0.0]]), vec![1.0, 0.0]);
        assert_eq!(var_predict_raw(&model, &[vec![1.0, 0.0]]), vec![1.2, -0.5]);
        assert_eq!(
            var_predict(&model, &[]),
            var_predict(&model, &[vec![0.0, 0.0], vec![0.0, 0.0]])
        );
    }

    #[test]
    fn stacked_round_trip() {
        let train = seqs(&[ipd("a", vec![1, 0, 1, 1, 0, 0, 1, 0, 1], vec![0, 0, 1, 1, 1, 0, 1, 0, 0])]);
        let m = fit_var(&train, 3).unwrap();
        assert_eq!(from_stacked(&m.to_stacked(), 3, 4, 2), m);
    }

    #[test]
    fn empty_design_is_insufficient() {
        assert!(matches!(fit_var(&[], 1), Err(Error::InsufficientData(_))));
    }
}
