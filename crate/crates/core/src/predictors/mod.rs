//! Next-action predictors behind one teacher-forced interface.

pub mod logistic;
pub mod lstm;
pub mod var;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureConfig, SupervisedSequence};
use crate::error::{Error, Result};
use crate::games::{GameKind, IPD_ALPHABET};

pub use logistic::{build_lr_features, fit_logistic, lr_rows, LogisticModel};
pub use lstm::{init_lstm, lstm_bptt, lstm_cell, lstm_forward, train_lstm, LstmParams, TrainConfig, TrainHistory};
pub use var::{fit_var, var_predict, VarModel};

/// One-step-ahead prediction conditioned on the observed history.
pub trait NextActionPredictor {
    /// One distribution (or score vector) per target of `seq`. Step `t` sees
    /// only `seq.inputs[..=t]`.
    fn predict_sequence(&self, seq: &SupervisedSequence) -> Result<Vec<Vec<f64>>>;
}

impl NextActionPredictor for LstmParams {
    fn predict_sequence(&self, seq: &SupervisedSequence) -> Result<Vec<Vec<f64>>> {
        Ok(lstm_forward(self, &seq.inputs)?.0)
    }
}

impl NextActionPredictor for VarModel {
    fn predict_sequence(&self, seq: &SupervisedSequence) -> Result<Vec<Vec<f64>>> {
        if let Some(x) = seq.inputs.iter().find(|x| x.len() != self.feature_dim) {
            return Err(Error::Dimension(format!(
                "input of length {} for a model of width {}",
                x.len(),
                self.feature_dim
            )));
        }
        Ok((0..seq.inputs.len()).map(|t| var_predict(self, &seq.inputs[..=t])).collect())
    }
}

impl NextActionPredictor for LogisticModel {
    fn predict_sequence(&self, seq: &SupervisedSequence) -> Result<Vec<Vec<f64>>> {
        Ok(logistic::sequence_features(seq)?
            .iter()
            .map(|f| {
                let p = self.probability(f);
                vec![1.0 - p, p]
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lstm,
    Var,
    Logistic,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Lstm => "lstm",
            ModelKind::Var => "var",
            ModelKind::Logistic => "logistic",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lstm" => Ok(ModelKind::Lstm),
            "var" | "ar" => Ok(ModelKind::Var),
            "logistic" | "lr" => Ok(ModelKind::Logistic),
            other => Err(Error::Config(format!("unknown model kind '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Lstm(LstmParams),
    Var(VarModel),
    Logistic(LogisticModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Lstm(_) => ModelKind::Lstm,
            Model::Var(_) => ModelKind::Var,
            Model::Logistic(_) => ModelKind::Logistic,
        }
    }
}

impl NextActionPredictor for Model {
    fn predict_sequence(&self, seq: &SupervisedSequence) -> Result<Vec<Vec<f64>>> {
        match self {
            Model::Lstm(m) => m.predict_sequence(seq),
            Model::Var(m) => m.predict_sequence(seq),
            Model::Logistic(m) => m.predict_sequence(seq),
        }
    }
}

pub fn predict_sequence(model: &dyn NextActionPredictor, seq: &SupervisedSequence) -> Result<Vec<Vec<f64>>> {
    model.predict_sequence(seq)
}

/// Everything needed to refit a model of the same kind on new data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    pub kind: ModelKind,
    pub train: TrainConfig,
    pub var_lag: usize,
    pub l2: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            kind: ModelKind::Lstm,
            train: TrainConfig::default(),
            var_lag: var::DEFAULT_LAG,
            l2: 1e-4,
        }
    }
}

/// Fit a model of `settings.kind` on `data`; LSTM training history is returned when applicable.
pub fn fit_model(kind: GameKind, data: &[SupervisedSequence], settings: &FitSettings) -> Result<(Model, Option<TrainHistory>)> {
    match settings.kind {
        ModelKind::Lstm => {
            let (p, h) = train_lstm(data, &settings.train)?;
            Ok((Model::Lstm(p), Some(h)))
        }
        ModelKind::Var => Ok((Model::Var(fit_var(data, settings.var_lag)?), None)),
        ModelKind::Logistic => {
            if kind != GameKind::Ipd {
                return Err(Error::GameKind {
                    expected: GameKind::Ipd.to_string(),
                    found: kind.to_string(),
                });
            }
            Ok((Model::Logistic(fit_logistic(&lr_rows(data)?, settings.l2)?), None))
        }
    }
}

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointDims {
    pub feature_dim: usize,
    pub alphabet: usize,
    pub hidden: usize,
    pub layers: usize,
    pub lag: usize,
}

/// Versioned JSON model file. Weights are flattened in the model's canonical order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub kind: ModelKind,
    pub game: GameKind,
    pub dims: CheckpointDims,
    pub weights: Vec<f64>,
    pub fit: FitSettings,
    pub features: FeatureConfig,
    pub seed: u64,
    pub train_ratio: f64,
}

impl Checkpoint {
    pub fn new(model: &Model, game: GameKind, fit: FitSettings, features: FeatureConfig, seed: u64, train_ratio: f64) -> Self {
        let (dims, weights) = match model {
            Model::Lstm(p) => (
                CheckpointDims {
                    feature_dim: p.feature_dim,
                    alphabet: p.alphabet,
                    hidden: p.hidden,
                    layers: p.n_layers(),
                    lag: 0,
                },
                p.to_flat(),
            ),
            Model::Var(m) => (
                CheckpointDims {
                    feature_dim: m.feature_dim,
                    alphabet: m.alphabet,
                    hidden: 0,
                    layers: 0,
                    lag: m.lag,
                },
                m.to_stacked().into_vec(),
            ),
            Model::Logistic(m) => {
                let mut w = m.weights.clone();
                w.push(m.bias);
                (
                    CheckpointDims {
                        feature_dim: m.weights.len(),
                        alphabet: IPD_ALPHABET,
                        hidden: 0,
                        layers: 0,
                        lag: 0,
                    },
                    w,
                )
            }
        };
        Checkpoint {
            version: CHECKPOINT_VERSION,
            kind: model.kind(),
            game,
            dims,
            weights,
            fit,
            features,
            seed,
            train_ratio,
        }
    }

    pub fn model(&self) -> Result<Model> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Compatibility(format!("checkpoint version {} is not supported", self.version)));
        }
        let d = &self.dims;
        let bad = |what: &str| Error::Compatibility(format!("checkpoint {what} do not match its dims"));
        match self.kind {
            ModelKind::Lstm => {
                let template = LstmParams::zeros(d.feature_dim, d.alphabet, d.hidden, d.layers);
                template.with_flat(&self.weights).map(Model::Lstm).map_err(|_| bad("weights"))
            }
            ModelKind::Var => {
                let rows = 1 + d.lag * d.feature_dim;
                let beta = crate::numerics::Mat::from_vec(rows, d.alphabet, self.weights.clone()).map_err(|_| bad("weights"))?;
                Ok(Model::Var(var::from_stacked(&beta, d.lag, d.feature_dim, d.alphabet)))
            }
            ModelKind::Logistic => {
                if self.weights.len() != d.feature_dim + 1 {
                    return Err(bad("weights"));
                }
                Ok(Model::Logistic(LogisticModel {
                    weights: self.weights[..d.feature_dim].to_vec(),
                    bias: self.weights[d.feature_dim],
                }))
            }
        }
    }

    /// Error unless this checkpoint can score sequences of `game` with this feature layout.
    pub fn check_compatible(&self, game: GameKind) -> Result<()> {
        if self.game != game {
            return Err(Error::Compatibility(format!("model trained on {} data, dataset is {game}", self.game)));
        }
        let expected = self.features.feature_dim(game);
        let actual = match self.kind {
            ModelKind::Logistic => expected,
            _ => self.dims.feature_dim,
        };
        if actual != expected || self.dims.alphabet != game.alphabet() {
            return Err(Error::Compatibility(format!(
                "model expects {} features / {} actions, {game} data gives {expected} / {}",
                actual,
                self.dims.alphabet,
                game.alphabet()
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        crate::dataset::write_atomic(path, s.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
