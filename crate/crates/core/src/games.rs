//! Payoff structures for the Iowa Gambling Task and the two-player Iterated
//! Prisoner's Dilemma, action encodings, and scripted policies that generate
//! synthetic trajectories.
//!
//! Action indices are fixed: IGT decks A, B, C, D map to 0..4 and IPD
//! Defect/Cooperate map to 0/1.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const IGT_ALPHABET: usize = 4;
pub const IPD_ALPHABET: usize = 2;

/// Loss probabilities in the payoff tables are multiples of 1/10.
const LOSS_DENOMINATOR: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    Igt,
    Ipd,
}

impl GameKind {
    pub fn alphabet(self) -> usize {
        match self {
            GameKind::Igt => IGT_ALPHABET,
            GameKind::Ipd => IPD_ALPHABET,
        }
    }

    pub fn n_agents(self) -> usize {
        match self {
            GameKind::Igt => 1,
            GameKind::Ipd => 2,
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameKind::Igt => "igt",
            GameKind::Ipd => "ipd",
        })
    }
}

impl std::str::FromStr for GameKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "igt" => Ok(GameKind::Igt),
            "ipd" => Ok(GameKind::Ipd),
            other => Err(Error::Config(format!("unknown game kind '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Action(pub usize);

impl Action {
    pub const DECK_A: Action = Action(0);
    pub const DECK_B: Action = Action(1);
    pub const DECK_C: Action = Action(2);
    pub const DECK_D: Action = Action(3);
    pub const DEFECT: Action = Action(0);
    pub const COOPERATE: Action = Action(1);

    pub fn index(self) -> usize {
        self.0
    }

    pub fn is_cooperate(self) -> bool {
        self == Action::COOPERATE
    }
}

pub fn encode_one_hot(action: Action, alphabet: usize) -> Result<Vec<f64>> {
    if action.0 >= alphabet {
        return Err(Error::Encoding {
            index: action.0,
            alphabet,
        });
    }
    let mut v = vec![0.0; alphabet];
    v[action.0] = 1.0;
    Ok(v)
}

/// Inverse of [`encode_one_hot`]; `None` unless `v` is an exact indicator vector.
pub fn decode_one_hot(v: &[f64]) -> Option<Action> {
    let mut hit = None;
    for (i, &x) in v.iter().enumerate() {
        if x == 1.0 {
            if hit.is_some() {
                return None;
            }
            hit = Some(Action(i));
        } else if x != 0.0 {
            return None;
        }
    }
    hit
}

// ---------------------------------------------------------------------------
// Iowa Gambling Task

/// One possible loss outcome of a deck: `amount` (negative) drawn with
/// probability `weight / 10`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossOutcome {
    pub amount: f64,
    weight: u32,
}

impl LossOutcome {
    fn new(amount: f64, weight: u32) -> Self {
        LossOutcome { amount, weight }
    }

    pub fn probability(&self) -> f64 {
        f64::from(self.weight) / f64::from(LOSS_DENOMINATOR)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeckPayoff {
    pub win_per_card: f64,
    /// Remaining probability mass is a zero loss.
    pub losses: Vec<LossOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IgtScheme {
    pub id: u8,
    pub decks: [DeckPayoff; IGT_ALPHABET],
}

/// The outcome of one card: win, loss (≤ 0) and their sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IgtDraw {
    pub win: f64,
    pub loss: f64,
    pub combined: f64,
}

pub fn igt_scheme(scheme_id: u8) -> Result<IgtScheme> {
    let frequent_a = vec![
        LossOutcome::new(-150.0, 1),
        LossOutcome::new(-200.0, 1),
        LossOutcome::new(-250.0, 1),
        LossOutcome::new(-300.0, 1),
        LossOutcome::new(-350.0, 1),
    ];
    let deck_a = DeckPayoff {
        win_per_card: 100.0,
        losses: frequent_a,
    };
    let deck_b = DeckPayoff {
        win_per_card: 100.0,
        losses: vec![LossOutcome::new(-1250.0, 1)],
    };
    let deck_c = match scheme_id {
        1 => DeckPayoff {
            win_per_card: 50.0,
            losses: vec![
                LossOutcome::new(-25.0, 1),
                LossOutcome::new(-75.0, 1),
                LossOutcome::new(-50.0, 3),
            ],
        },
        2 => DeckPayoff {
            win_per_card: 50.0,
            losses: vec![LossOutcome::new(-50.0, 5)],
        },
        other => return Err(Error::UnknownScheme(other)),
    };
    let deck_d = DeckPayoff {
        win_per_card: 50.0,
        losses: vec![LossOutcome::new(-250.0, 1)],
    };
    Ok(IgtScheme {
        id: scheme_id,
        decks: [deck_a, deck_b, deck_c, deck_d],
    })
}

fn deck(scheme: &IgtScheme, deck: Action) -> Result<&DeckPayoff> {
    scheme.decks.get(deck.0).ok_or(Error::Encoding {
        index: deck.0,
        alphabet: IGT_ALPHABET,
    })
}

/// `win + Σ loss·p`, accumulated over the integer weights so table values are exact.
pub fn igt_expected_value(scheme: &IgtScheme, deck_action: Action) -> Result<f64> {
    let d = deck(scheme, deck_action)?;
    let weighted: f64 = d.losses.iter().map(|l| l.amount * f64::from(l.weight)).sum();
    Ok(d.win_per_card + weighted / f64::from(LOSS_DENOMINATOR))
}

pub fn igt_draw<R: Rng + ?Sized>(scheme: &IgtScheme, deck_action: Action, rng: &mut R) -> Result<IgtDraw> {
    let d = deck(scheme, deck_action)?;
    let ticket = rng.gen_range(0..LOSS_DENOMINATOR);
    let mut acc = 0;
    let mut loss = 0.0;
    for outcome in &d.losses {
        acc += outcome.weight;
        if ticket < acc {
            loss = outcome.amount;
            break;
        }
    }
    Ok(IgtDraw {
        win: d.win_per_card,
        loss,
        combined: d.win_per_card + loss,
    })
}

// ---------------------------------------------------------------------------
// Iterated Prisoner's Dilemma

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub reward: f64,
    pub penalty: f64,
    pub sucker: f64,
    pub temptation: f64,
    pub horizon: usize,
}

impl GameSpec {
    pub const N_AGENTS: usize = 2;

    pub fn new(temptation: f64, reward: f64, penalty: f64, sucker: f64, horizon: usize) -> Self {
        GameSpec {
            reward,
            penalty,
            sucker,
            temptation,
            horizon,
        }
    }

    /// T=5, R=3, P=1, S=0.
    pub fn standard(horizon: usize) -> Self {
        GameSpec::new(5.0, 3.0, 1.0, 0.0, horizon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecViolation {
    TemptationAboveReward,
    RewardAbovePenalty,
    PenaltyAboveSucker,
    MutualCooperationBest,
}

impl fmt::Display for SpecViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpecViolation::TemptationAboveReward => "T > R",
            SpecViolation::RewardAbovePenalty => "R > P",
            SpecViolation::PenaltyAboveSucker => "P > S",
            SpecViolation::MutualCooperationBest => "2R > T + S",
        })
    }
}

/// Every dilemma inequality the spec breaks; empty when valid.
pub fn validate_spec(spec: &GameSpec) -> Vec<SpecViolation> {
    let mut v = Vec::new();
    if !(spec.temptation > spec.reward) {
        v.push(SpecViolation::TemptationAboveReward);
    }
    if !(spec.reward > spec.penalty) {
        v.push(SpecViolation::RewardAbovePenalty);
    }
    if !(spec.penalty > spec.sucker) {
        v.push(SpecViolation::PenaltyAboveSucker);
    }
    if !(2.0 * spec.reward > spec.temptation + spec.sucker) {
        v.push(SpecViolation::MutualCooperationBest);
    }
    v
}

pub fn ensure_valid(spec: &GameSpec) -> Result<()> {
    let v = validate_spec(spec);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(v))
    }
}

pub fn ipd_payoff(spec: &GameSpec, a1: Action, a2: Action) -> Result<(f64, f64)> {
    ensure_valid(spec)?;
    for a in [a1, a2] {
        if a.0 >= IPD_ALPHABET {
            return Err(Error::Encoding {
                index: a.0,
                alphabet: IPD_ALPHABET,
            });
        }
    }
    Ok(match (a1.is_cooperate(), a2.is_cooperate()) {
        (true, true) => (spec.reward, spec.reward),
        (false, false) => (spec.penalty, spec.penalty),
        (true, false) => (spec.sucker, spec.temptation),
        (false, true) => (spec.temptation, spec.sucker),
    })
}

// ---------------------------------------------------------------------------
// Trajectories and synthetic policies

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub source: String,
    pub id: String,
}

/// One subject's (IGT) or one dyad's (IPD) ordered play.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: GameKind,
    /// One action list per agent, all of equal length.
    pub actions: Vec<Vec<Action>>,
    /// Combined reward per agent per step, when known.
    pub rewards: Option<Vec<Vec<f64>>>,
    /// Per-card win/loss detail for IGT data.
    pub draws: Option<Vec<IgtDraw>>,
    pub spec: Option<GameSpec>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.actions.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check(&self) -> Result<()> {
        if self.actions.len() != self.kind.n_agents() {
            return Err(Error::Length(format!(
                "trajectory {} has {} agents, {} expects {}",
                self.meta.id,
                self.actions.len(),
                self.kind,
                self.kind.n_agents()
            )));
        }
        let n = self.len();
        if self.actions.iter().any(|a| a.len() != n) {
            return Err(Error::Length(format!("trajectory {}: agents' action lists differ in length", self.meta.id)));
        }
        if let Some(r) = &self.rewards {
            if r.len() != self.actions.len() || r.iter().any(|x| x.len() != n) {
                return Err(Error::Length(format!("trajectory {}: rewards not aligned with actions", self.meta.id)));
            }
        }
        let alphabet = self.kind.alphabet();
        for a in self.actions.iter().flatten() {
            if a.0 >= alphabet {
                return Err(Error::Encoding { index: a.0, alphabet });
            }
        }
        Ok(())
    }

    /// Keep the first `len` steps.
    pub fn truncated(&self, len: usize) -> Trajectory {
        let mut t = self.clone();
        for a in &mut t.actions {
            a.truncate(len);
        }
        if let Some(r) = &mut t.rewards {
            for x in r {
                x.truncate(len);
            }
        }
        if let Some(d) = &mut t.draws {
            d.truncate(len);
        }
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Random,
    TitForTat,
    AlwaysDefect,
    GrimTrigger,
    WinStayLoseShift,
    EpsilonGreedyIgt,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::TitForTat => "tit_for_tat",
            PolicyKind::AlwaysDefect => "always_defect",
            PolicyKind::GrimTrigger => "grim_trigger",
            PolicyKind::WinStayLoseShift => "win_stay_lose_shift",
            PolicyKind::EpsilonGreedyIgt => "epsilon_greedy_igt",
        }
    }
}

/// A scripted player. `noise` is the probability that the intended action is
/// replaced by a uniformly different one; `epsilon` is the exploration rate of
/// the IGT ε-greedy learner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthPolicy {
    pub kind: PolicyKind,
    pub epsilon: f64,
    pub noise: f64,
}

impl SynthPolicy {
    pub fn new(kind: PolicyKind) -> Self {
        SynthPolicy {
            kind,
            epsilon: 0.0,
            noise: 0.0,
        }
    }

    pub fn epsilon_greedy(epsilon: f64) -> Self {
        SynthPolicy {
            epsilon,
            ..SynthPolicy::new(PolicyKind::EpsilonGreedyIgt)
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("epsilon", self.epsilon), ("noise", self.noise)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{} {name} = {p} outside [0, 1]", self.kind.name())));
            }
        }
        Ok(())
    }

    pub fn plays(&self, game: GameKind) -> bool {
        match self.kind {
            PolicyKind::Random => true,
            PolicyKind::EpsilonGreedyIgt => game == GameKind::Igt,
            _ => game == GameKind::Ipd,
        }
    }
}

impl fmt::Display for SynthPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        let mut params = Vec::new();
        if self.epsilon != 0.0 {
            params.push(format!("epsilon={}", self.epsilon));
        }
        if self.noise != 0.0 {
            params.push(format!("noise={}", self.noise));
        }
        if !params.is_empty() {
            write!(f, ":{}", params.join(","))?;
        }
        Ok(())
    }
}

impl std::str::FromStr for SynthPolicy {
    type Err = Error;

    /// `name[:key=value,...]`, e.g. `always_defect:noise=0.2`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let kind = match name.trim() {
            "random" => PolicyKind::Random,
            "tit_for_tat" | "tft" => PolicyKind::TitForTat,
            "always_defect" => PolicyKind::AlwaysDefect,
            "grim_trigger" => PolicyKind::GrimTrigger,
            "win_stay_lose_shift" | "wsls" => PolicyKind::WinStayLoseShift,
            "epsilon_greedy_igt" => PolicyKind::EpsilonGreedyIgt,
            other => return Err(Error::Config(format!("unknown policy '{other}'"))),
        };
        let mut policy = SynthPolicy::new(kind);
        for kv in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("policy parameter '{kv}' is not key=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("policy parameter '{kv}' is not numeric")))?;
            match k.trim() {
                "epsilon" | "eps" => policy.epsilon = v,
                "noise" => policy.noise = v,
                other => return Err(Error::Config(format!("unknown policy parameter '{other}'"))),
            }
        }
        policy.validate()?;
        Ok(policy)
    }
}

/// What a policy can observe before choosing.
#[derive(Clone, Copy, Debug)]
pub struct History<'a> {
    pub game: GameKind,
    pub own: &'a [Action],
    /// Empty for IGT.
    pub opponent: &'a [Action],
    /// Own combined rewards, aligned with `own` (IGT learners need these).
    pub own_rewards: &'a [f64],
}

pub fn synth_step<R: Rng + ?Sized>(policy: &SynthPolicy, history: &History<'_>, rng: &mut R) -> Result<Action> {
    if history.game == GameKind::Ipd && history.own.len() != history.opponent.len() {
        return Err(Error::Length("IPD histories must have equal length".into()));
    }
    if !policy.plays(history.game) {
        return Err(Error::Config(format!("policy {} cannot play {}", policy.kind.name(), history.game)));
    }
    let alphabet = history.game.alphabet();
    let intended = match policy.kind {
        PolicyKind::Random => Action(rng.gen_range(0..alphabet)),
        PolicyKind::TitForTat => history.opponent.last().copied().unwrap_or(Action::COOPERATE),
        PolicyKind::AlwaysDefect => Action::DEFECT,
        PolicyKind::GrimTrigger => {
            if history.opponent.contains(&Action::DEFECT) {
                Action::DEFECT
            } else {
                Action::COOPERATE
            }
        }
        PolicyKind::WinStayLoseShift => match (history.own.last(), history.opponent.last()) {
            (None, _) | (_, None) => Action::COOPERATE,
            // last payoff was T or R exactly when the opponent cooperated
            (Some(&own), Some(&opp)) if opp.is_cooperate() => own,
            (Some(&own), Some(_)) => Action(1 - own.0),
        },
        PolicyKind::EpsilonGreedyIgt => {
            if history.own_rewards.len() != history.own.len() {
                return Err(Error::Length("ε-greedy needs a reward for every past choice".into()));
            }
            if policy.epsilon > 0.0 && rng.gen::<f64>() < policy.epsilon {
                Action(rng.gen_range(0..alphabet))
            } else {
                greedy_deck(history.own, history.own_rewards)
            }
        }
    };
    if policy.noise > 0.0 && rng.gen::<f64>() < policy.noise {
        let shift = rng.gen_range(1..alphabet);
        return Ok(Action((intended.0 + shift) % alphabet));
    }
    Ok(intended)
}

/// Argmax of per-deck running mean reward; untried decks rank first, ties go
/// to the lowest index.
fn greedy_deck(own: &[Action], rewards: &[f64]) -> Action {
    let mut sum = [0.0; IGT_ALPHABET];
    let mut count = [0usize; IGT_ALPHABET];
    for (a, r) in own.iter().zip(rewards) {
        sum[a.0] += r;
        count[a.0] += 1;
    }
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for d in 0..IGT_ALPHABET {
        let value = if count[d] == 0 {
            f64::INFINITY
        } else {
            sum[d] / count[d] as f64
        };
        if value > best_value {
            best = d;
            best_value = value;
        }
    }
    Action(best)
}

pub fn simulate_igt(policy: &SynthPolicy, scheme: &IgtScheme, horizon: usize, seed: u64) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    policy.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut actions = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    let mut draws = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let history = History {
            game: GameKind::Igt,
            own: &actions,
            opponent: &[],
            own_rewards: &rewards,
        };
        let a = synth_step(policy, &history, &mut rng)?;
        let d = igt_draw(scheme, a, &mut rng)?;
        actions.push(a);
        rewards.push(d.combined);
        draws.push(d);
    }
    Ok(Trajectory {
        kind: GameKind::Igt,
        actions: vec![actions],
        rewards: Some(vec![rewards]),
        draws: Some(draws),
        spec: None,
        meta: TrajectoryMeta {
            source: format!("sim:{policy}:scheme{}", scheme.id),
            id: format!("seed{seed}"),
        },
    })
}

pub fn simulate_ipd(
    p1: &SynthPolicy,
    p2: &SynthPolicy,
    spec: &GameSpec,
    horizon: usize,
    seed: u64,
) -> Result<Trajectory> {
    ensure_valid(spec)?;
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    p1.validate()?;
    p2.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a1 = Vec::with_capacity(horizon);
    let mut a2 = Vec::with_capacity(horizon);
    let mut r1 = Vec::with_capacity(horizon);
    let mut r2 = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let x = synth_step(
            p1,
            &History {
                game: GameKind::Ipd,
                own: &a1,
                opponent: &a2,
                own_rewards: &r1,
            },
            &mut rng,
        )?;
        let y = synth_step(
            p2,
            &History {
                game: GameKind::Ipd,
                own: &a2,
                opponent: &a1,
                own_rewards: &r2,
            },
            &mut rng,
        )?;
        let (u, v) = ipd_payoff(spec, x, y)?;
        a1.push(x);
        a2.push(y);
        r1.push(u);
        r2.push(v);
    }
    Ok(Trajectory {
        kind: GameKind::Ipd,
        actions: vec![a1, a2],
        rewards: Some(vec![r1, r2]),
        draws: None,
        spec: Some(GameSpec { horizon, ..*spec }),
        meta: TrajectoryMeta {
            source: format!("sim:{p1}|{p2}"),
            id: format!("seed{seed}"),
        },
    })
}

/// `n` IGT trajectories, each played by a policy drawn uniformly from `pool`.
pub fn simulate_igt_population(
    pool: &[SynthPolicy],
    scheme: &IgtScheme,
    horizon: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    if pool.is_empty() {
        return Err(Error::Config("empty policy pool".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let policy = pool[rng.gen_range(0..pool.len())];
            let mut t = simulate_igt(&policy, scheme, horizon, rng.gen())?;
            t.meta.id = format!("s{i}");
            Ok(t)
        })
        .collect()
}

/// `n` IPD dyads; each side draws its policy uniformly from its pool.
pub fn simulate_ipd_population(
    pool1: &[SynthPolicy],
    pool2: &[SynthPolicy],
    spec: &GameSpec,
    horizon: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    if pool1.is_empty() || pool2.is_empty() {
        return Err(Error::Config("empty policy pool".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let p1 = pool1[rng.gen_range(0..pool1.len())];
            let p2 = pool2[rng.gen_range(0..pool2.len())];
            let mut t = simulate_ipd(&p1, &p2, spec, horizon, rng.gen())?;
            t.meta.id = format!("d{i}");
            Ok(t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const C: Action = Action::COOPERATE;
    const D: Action = Action::DEFECT;

    #[test]
    fn scheme_tables() {
        let s1 = igt_scheme(1).unwrap();
        let b = &s1.decks[1];
        assert_eq!(b.win_per_card, 100.0);
        assert_eq!(b.losses.len(), 1);
        assert_eq!(b.losses[0].amount, -1250.0);
        assert_eq!(b.losses[0].probability(), 0.1);

        let s2 = igt_scheme(2).unwrap();
        let c = &s2.decks[2];
        assert_eq!(c.win_per_card, 50.0);
        assert_eq!(c.losses[0].amount, -50.0);
        assert_eq!(c.losses[0].probability(), 0.5);

        assert!(matches!(igt_scheme(3), Err(Error::UnknownScheme(3))));
        // A, B, D do not change between schemes
        for d in [0, 1, 3] {
            assert_eq!(s1.decks[d], s2.decks[d]);
        }
    }

    #[test]
    fn expected_values_are_exact() {
        for id in [1, 2] {
            let s = igt_scheme(id).unwrap();
            for (d, want) in [(0, -25.0), (1, -25.0), (2, 25.0), (3, 25.0)] {
                assert_eq!(igt_expected_value(&s, Action(d)).unwrap(), want, "scheme {id} deck {d}");
            }
            for d in &s.decks {
                let mass: u32 = d.losses.iter().map(|l| l.weight).sum();
                assert!(mass <= LOSS_DENOMINATOR);
            }
        }
    }

    #[test]
    fn deck_d_always_wins_fifty() {
        let s = igt_scheme(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let d = igt_draw(&s, Action::DECK_D, &mut rng).unwrap();
            assert_eq!(d.win, 50.0);
            assert_eq!(d.combined, d.win + d.loss);
        }
    }

    #[test]
    fn deck_b_loss_frequency() {
        let s = igt_scheme(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut hits = 0;
        for _ in 0..10_000 {
            let d = igt_draw(&s, Action::DECK_B, &mut rng).unwrap();
            assert!(d.loss == 0.0 || d.loss == -1250.0);
            hits += usize::from(d.loss == -1250.0);
        }
        let freq = hits as f64 / 10_000.0;
        assert!((freq - 0.1).abs() <= 0.01, "{freq}");
    }

    #[test]
    fn payoff_cells() {
        let spec = GameSpec::standard(9);
        assert_eq!(ipd_payoff(&spec, C, C).unwrap(), (3.0, 3.0));
        assert_eq!(ipd_payoff(&spec, C, D).unwrap(), (0.0, 5.0));
        assert_eq!(ipd_payoff(&spec, D, C).unwrap(), (5.0, 0.0));
        assert_eq!(ipd_payoff(&spec, D, D).unwrap(), (1.0, 1.0));
        let bad = GameSpec::new(10.0, 3.0, 1.0, 0.0, 9);
        assert!(matches!(ipd_payoff(&bad, C, C), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn spec_validation() {
        assert!(validate_spec(&GameSpec::new(5.0, 3.0, 1.0, 0.0, 9)).is_empty());
        assert_eq!(
            validate_spec(&GameSpec::new(10.0, 3.0, 1.0, 0.0, 9)),
            vec![SpecViolation::MutualCooperationBest]
        );
        assert_eq!(
            validate_spec(&GameSpec::new(3.0, 3.0, 1.0, 0.0, 9)),
            vec![SpecViolation::TemptationAboveReward]
        );
        let msg = Error::InvalidSpec(vec![SpecViolation::MutualCooperationBest]).to_string();
        assert!(msg.contains("2R > T + S"));
    }

    #[test]
    fn one_hot_examples() {
        assert_eq!(encode_one_hot(Action(2), 4).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(encode_one_hot(Action(1), 2).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(encode_one_hot(Action(4), 4), Err(Error::Encoding { .. })));
        assert_eq!(decode_one_hot(&[0.0, 0.5, 0.5]), None);
    }

    fn step(policy: SynthPolicy, own: &[Action], opp: &[Action]) -> Action {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        synth_step(
            &policy,
            &History {
                game: GameKind::Ipd,
                own,
                opponent: opp,
                own_rewards: &[],
            },
            &mut rng,
        )
        .unwrap()
    }

    #[test]
    fn scripted_ipd_policies() {
        let tft = SynthPolicy::new(PolicyKind::TitForTat);
        assert_eq!(step(tft, &[C, C], &[C, D]), D);
        assert_eq!(step(tft, &[], &[]), C);
        let grim = SynthPolicy::new(PolicyKind::GrimTrigger);
        assert_eq!(step(grim, &[C, C, C, D], &[C, C, D, C]), D);
        assert_eq!(step(grim, &[C, C], &[C, C]), C);
        let wsls = SynthPolicy::new(PolicyKind::WinStayLoseShift);
        assert_eq!(step(wsls, &[D], &[C]), D); // got T: stay
        assert_eq!(step(wsls, &[C], &[C]), C); // got R: stay
        assert_eq!(step(wsls, &[C], &[D]), D); // got S: shift
        assert_eq!(step(wsls, &[D], &[D]), C); // got P: shift
    }

    #[test]
    fn greedy_breaks_ties_to_lowest_index() {
        let own = [Action::DECK_A, Action::DECK_B, Action::DECK_C, Action::DECK_D];
        let rewards = [-25.0, -25.0, 25.0, 25.0];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = synth_step(
            &SynthPolicy::epsilon_greedy(0.0),
            &History {
                game: GameKind::Igt,
                own: &own,
                opponent: &[],
                own_rewards: &rewards,
            },
            &mut rng,
        )
        .unwrap();
        assert_eq!(a, Action::DECK_C);
    }

    #[test]
    fn policy_strings_round_trip() {
        for s in ["tit_for_tat", "always_defect:noise=0.2", "epsilon_greedy_igt:epsilon=0.1"] {
            let p: SynthPolicy = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("always_defect:noise=1.5".parse::<SynthPolicy>().is_err());
        assert!("nope".parse::<SynthPolicy>().is_err());
    }

    #[test]
    fn ipd_simulation_scripts() {
        let spec = GameSpec::standard(9);
        let tft = SynthPolicy::new(PolicyKind::TitForTat);
        let alld = SynthPolicy::new(PolicyKind::AlwaysDefect);
        let grim = SynthPolicy::new(PolicyKind::GrimTrigger);

        let t = simulate_ipd(&tft, &tft, &spec, 9, 1).unwrap();
        assert!(t.actions.iter().flatten().all(|a| *a == C));

        let t = simulate_ipd(&alld, &tft, &spec, 9, 1).unwrap();
        let mut want = vec![C];
        want.extend([D; 8]);
        assert_eq!(t.actions[1], want);

        let t = simulate_ipd(&grim, &alld, &spec, 9, 1).unwrap();
        assert_eq!(t.actions[0], want);

        let bad = GameSpec::new(3.0, 3.0, 1.0, 0.0, 9);
        assert!(matches!(simulate_ipd(&tft, &tft, &bad, 9, 1), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn random_igt_deck_frequencies() {
        let s = igt_scheme(1).unwrap();
        let pool = [SynthPolicy::new(PolicyKind::Random)];
        let trajs = simulate_igt_population(&pool, &s, 95, 100, 5).unwrap();
        let mut counts = [0usize; 4];
        for t in &trajs {
            assert_eq!(t.len(), 95);
            for a in &t.actions[0] {
                counts[a.0] += 1;
            }
        }
        let total = (95 * 100) as f64;
        for c in counts {
            assert!((c as f64 / total - 0.25).abs() <= 0.03);
        }
    }

    #[test]
    fn epsilon_greedy_learns_good_decks() {
        let s = igt_scheme(1).unwrap();
        let policy = SynthPolicy::epsilon_greedy(0.1);
        let mut rate = 0.0;
        for seed in 0..100 {
            let t = simulate_igt(&policy, &s, 95, seed).unwrap();
            let tail = &t.actions[0][75..];
            rate += tail.iter().filter(|a| a.0 >= 2).count() as f64 / tail.len() as f64;
        }
        rate /= 100.0;
        assert!(rate > 0.6, "better-deck rate over last 20 trials = {rate}");
    }

    proptest! {
        #[test]
        fn one_hot_bijection(alphabet in 1usize..10, idx in 0usize..10) {
            let idx = idx % alphabet;
            let v = encode_one_hot(Action(idx), alphabet).unwrap();
            prop_assert_eq!(decode_one_hot(&v), Some(Action(idx)));
        }

        #[test]
        fn payoff_sum_and_swap_symmetry(
            s in -5.0f64..5.0, gap1 in 0.1f64..3.0, gap2 in 0.1f64..3.0, gap3 in 0.1f64..3.0,
            x in 0usize..2, y in 0usize..2,
        ) {
            let p = s + gap1;
            let r = p + gap2;
            let t = r + gap3.min(r - s - 0.01);
            let spec = GameSpec::new(t, r, p, s, 9);
            prop_assume!(validate_spec(&spec).is_empty());
            let (u, v) = ipd_payoff(&spec, Action(x), Action(y)).unwrap();
            let (v2, u2) = ipd_payoff(&spec, Action(y), Action(x)).unwrap();
            prop_assert_eq!((u, v), (u2, v2));
            let sum = u + v;
            prop_assert!(sum == 2.0 * r || sum == 2.0 * p || sum == s + t);
        }

        #[test]
        fn simulation_is_reproducible(seed in any::<u64>()) {
            let s = igt_scheme(2).unwrap();
            let p = SynthPolicy::epsilon_greedy(0.2);
            prop_assert_eq!(simulate_igt(&p, &s, 30, seed).unwrap(), simulate_igt(&p, &s, 30, seed).unwrap());
            let spec = GameSpec::standard(9);
            let q = SynthPolicy::new(PolicyKind::Random);
            let w = SynthPolicy::new(PolicyKind::WinStayLoseShift).with_noise(0.1);
            prop_assert_eq!(simulate_ipd(&q, &w, &spec, 9, seed).unwrap(), simulate_ipd(&q, &w, &spec, 9, seed).unwrap());
        }
    }
}
