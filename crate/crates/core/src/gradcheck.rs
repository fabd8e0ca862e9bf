//! Backpropagation-through-time versus central finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::SupervisedSequence;
use crate::error::Result;
use crate::games::{encode_one_hot, Action, GameKind, IGT_ALPHABET};
use crate::numerics::finite_diff_grad;
use crate::predictors::lstm::{init_lstm, lstm_bptt, lstm_loss};

pub const DEFAULT_SEEDS: [u64; 3] = [1, 2, 3];
pub const TOLERANCE: f64 = 1e-4;
pub const STEP: f64 = 1e-5;
const STEPS: usize = 3;

/// Central differences at [`STEP`] carry round-off of roughly `ε·|loss| / STEP`
/// (about 3e-11 here), so gradients smaller than this are compared on an
/// absolute scale instead of a relative one.
pub const NOISE_FLOOR: f64 = 1e-6;

/// `|a − n| / max(|a| + |n|, NOISE_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(NOISE_FLOOR)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    /// `(seed, max relative error over all parameters)`
    pub per_seed: Vec<(u64, f64)>,
    pub max_rel_err: f64,
    pub n_params: usize,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err < TOLERANCE
    }
}

/// Random 3-step one-hot sequence over four actions.
pub fn toy_sequence(seed: u64) -> SupervisedSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let actions: Vec<Action> = (0..=STEPS).map(|_| Action(rng.gen_range(0..IGT_ALPHABET))).collect();
    let hot = |a: Action| encode_one_hot(a, IGT_ALPHABET).expect("in range");
    SupervisedSequence {
        kind: GameKind::Igt,
        inputs: actions[..STEPS].iter().map(|&a| hot(a)).collect(),
        targets: actions[1..].iter().map(|&a| hot(a)).collect(),
        focal_agent: 0,
        source: format!("gradcheck{seed}"),
        spec: None,
    }
}

/// Compare analytic and numeric gradients of a freshly initialised
/// two-layer, 10-unit network at every seed. `corrupt` perturbs one analytic
/// entry, as a negative control.
pub fn gradcheck_lstm(seeds: &[u64], corrupt: bool) -> Result<GradCheckReport> {
    let mut per_seed = Vec::with_capacity(seeds.len());
    let mut n_params = 0;
    for &seed in seeds {
        let params = init_lstm(IGT_ALPHABET, IGT_ALPHABET, seed);
        let seq = toy_sequence(seed);
        let (grads, _) = lstm_bptt(&params, &seq)?;
        let mut analytic = grads.to_flat();
        if corrupt {
            analytic[0] += 0.1 + analytic[0].abs();
        }
        let numeric = finite_diff_grad(
            |flat| {
                params
                    .with_flat(flat)
                    .and_then(|p| lstm_loss(&p, &seq))
                    .unwrap_or(f64::NAN)
            },
            &params.to_flat(),
            STEP,
        )?;
        n_params = analytic.len();
        let worst = analytic
            .iter()
            .zip(&numeric)
            .map(|(&a, &n)| relative_error(a, n))
            .fold(0.0, f64::max);
        per_seed.push((seed, worst));
    }
    let max_rel_err = per_seed.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(GradCheckReport {
        per_seed,
        max_rel_err,
        n_params,
    })
}
