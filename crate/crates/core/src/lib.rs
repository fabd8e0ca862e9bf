//! Next-action forecasting for human decision trajectories.
//!
//! The crate covers two behavioural tasks, the Iowa Gambling Task (one player,
//! four decks) and the two-player Iterated Prisoner's Dilemma, and three
//! teacher-forced predictors: a stacked LSTM trained by backpropagation
//! through time, a vector autoregression on one-hot action windows, and a
//! logistic regression on handcrafted IPD features.
//!
//! * [`numerics`]: dense matrices, softmax, damped least squares, Adam, finite differences
//! * [`games`]: payoff tables, action codecs, scripted policies and simulators
//! * [`dataset`]: canonical CSV ingestion, pooling, supervised sequences, splits
//! * [`predictors`]: the three models and their checkpoint format
//! * [`evaluation`]: per-step MSE, learning and cooperation curves, reports
//! * [`cli`]: the `dforecast` command-line driver

pub mod cli;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod games;
pub mod gradcheck;
pub mod numerics;
pub mod predictors;

pub use error::{Error, Result};
