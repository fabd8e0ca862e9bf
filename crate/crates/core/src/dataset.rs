//! Behavioural datasets: canonical CSV ingestion, pooling, supervised
//! next-action sequences, and trajectory-level train/test splits.
//!
//! Canonical layouts:
//!
//! * IGT choices: header row, one row per subject, one column per trial,
//!   cells `1..=4` for decks A..D. An optional leading `subject` column (or an
//!   unnamed first header cell, as written by R) carries subject ids. Win and
//!   loss matrices use the same layout with real-valued cells.
//! * IPD: header `traj_id,round,a1,a2[,R,S,T,P]`, actions `C`/`D` or `1`/`0`
//!   (1 = cooperate), rounds 1-based and contiguous.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::games::{
    encode_one_hot, ensure_valid, ipd_payoff, Action, GameKind, GameSpec, IgtDraw, Trajectory, TrajectoryMeta,
};

/// Trajectory length kept by [`load_ipd`].
pub const IPD_REQUIRED_ROUNDS: usize = 9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub kind: GameKind,
    pub trajectories: Vec<Trajectory>,
}

impl Dataset {
    pub fn new(kind: GameKind, trajectories: Vec<Trajectory>) -> Result<Self> {
        for t in &trajectories {
            if t.kind != kind {
                return Err(Error::GameKind {
                    expected: kind.to_string(),
                    found: t.kind.to_string(),
                });
            }
            t.check()?;
        }
        Ok(Dataset { kind, trajectories })
    }

    pub fn alphabet(&self) -> usize {
        self.kind.alphabet()
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Common trajectory length, or `None` when lengths differ (not yet pooled).
    pub fn horizon(&self) -> Option<usize> {
        let first = self.trajectories.first()?.len();
        self.trajectories.iter().all(|t| t.len() == first).then_some(first)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            kind: self.kind,
            trajectories: indices.iter().map(|&i| self.trajectories[i].clone()).collect(),
        }
    }

    /// SHA-256 over kinds, ids and actions; independent of file paths.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.kind.to_string().as_bytes());
        for t in &self.trajectories {
            h.update(b"|");
            h.update(t.meta.id.as_bytes());
            for agent in &t.actions {
                h.update(b":");
                h.update(agent.iter().map(|a| a.0 as u8).collect::<Vec<_>>());
            }
        }
        hex::encode(h.finalize())
    }

    pub fn manifest(&self, source_files: Vec<String>, seed: Option<u64>) -> DatasetManifest {
        DatasetManifest {
            game_kind: self.kind,
            n_trajectories: self.len(),
            horizon: self.horizon(),
            alphabet: self.alphabet(),
            source_files,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub game_kind: GameKind,
    pub n_trajectories: usize,
    pub horizon: Option<usize>,
    pub alphabet: usize,
    pub source_files: Vec<String>,
    pub seed: Option<u64>,
}

fn file_label(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?))
}

/// Rows of a subject × trial matrix: (subject id, cells with their 1-based column).
struct MatrixRows {
    rows: Vec<(String, Vec<(usize, String)>)>,
}

fn read_matrix(path: &Path) -> Result<MatrixRows> {
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers()?.clone();
    let first = headers.get(0).unwrap_or("").to_ascii_lowercase();
    let has_id = first.is_empty() || first == "subject" || first == "subj" || first == "id";
    let mut rows = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row_no = r + 1;
        let (id, cells) = if has_id {
            (rec.get(0).unwrap_or("").trim_matches('"').to_string(), 1)
        } else {
            (format!("{row_no}"), 0)
        };
        // shorter studies leave trailing cells blank; blanks inside a row are errors
        let mut values = Vec::new();
        let mut blank_at = None;
        for (c, v) in rec.iter().enumerate().skip(cells) {
            if v.is_empty() || v.eq_ignore_ascii_case("na") {
                blank_at.get_or_insert(c + 1);
                continue;
            }
            if let Some(b) = blank_at {
                return Err(Error::Parse {
                    file: file_label(path),
                    row: row_no,
                    col: b,
                    message: "blank cell before the end of the row".into(),
                });
            }
            values.push((c + 1, v.to_string()));
        }
        rows.push((id, values));
    }
    Ok(MatrixRows { rows })
}

fn real_matrix(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = file_label(path);
    read_matrix(path)?
        .rows
        .into_iter()
        .enumerate()
        .map(|(r, (_, cells))| {
            cells
                .into_iter()
                .map(|(col, v)| {
                    v.parse::<f64>().map_err(|_| Error::Parse {
                        file: file.clone(),
                        row: r + 1,
                        col,
                        message: format!("'{v}' is not a number"),
                    })
                })
                .collect()
        })
        .collect()
}

/// Load an IGT choice matrix (cells 1..=4), optionally with matching win and
/// loss matrices. Rows may differ in length; [`pool_and_truncate`] equalises them.
pub fn load_igt(choices_path: &Path, wins_path: Option<&Path>, losses_path: Option<&Path>) -> Result<Dataset> {
    let file = file_label(choices_path);
    let matrix = read_matrix(choices_path)?;
    let mut trajectories = Vec::with_capacity(matrix.rows.len());
    for (r, (id, cells)) in matrix.rows.into_iter().enumerate() {
        let mut actions = Vec::with_capacity(cells.len());
        for (col, v) in cells {
            let deck: usize = match v.parse::<f64>() {
                Ok(x) if x.fract() == 0.0 && (1.0..=4.0).contains(&x) => x as usize,
                _ => {
                    return Err(Error::Parse {
                        file,
                        row: r + 1,
                        col,
                        message: format!("deck '{v}' is not in 1..4"),
                    })
                }
            };
            actions.push(Action(deck - 1));
        }
        trajectories.push(Trajectory {
            kind: GameKind::Igt,
            actions: vec![actions],
            rewards: None,
            draws: None,
            spec: None,
            meta: TrajectoryMeta {
                source: file.clone(),
                id,
            },
        });
    }

    match (wins_path, losses_path) {
        (None, None) => {}
        (Some(w), Some(l)) => {
            let wins = real_matrix(w)?;
            let losses = real_matrix(l)?;
            if wins.len() != trajectories.len() || losses.len() != trajectories.len() {
                return Err(Error::Length(format!(
                    "{} choice rows but {} win rows and {} loss rows",
                    trajectories.len(),
                    wins.len(),
                    losses.len()
                )));
            }
            for ((t, w), l) in trajectories.iter_mut().zip(wins).zip(losses) {
                if w.len() != t.len() || l.len() != t.len() {
                    return Err(Error::Length(format!("subject {}: reward rows not aligned with choices", t.meta.id)));
                }
                let draws: Vec<IgtDraw> = w
                    .iter()
                    .zip(&l)
                    .map(|(&win, &loss)| IgtDraw {
                        win,
                        // some archives store losses as positive magnitudes
                        loss: -loss.abs(),
                        combined: win - loss.abs(),
                    })
                    .collect();
                t.rewards = Some(vec![draws.iter().map(|d| d.combined).collect()]);
                t.draws = Some(draws);
            }
        }
        _ => return Err(Error::Config("win and loss matrices must be given together".into())),
    }
    Dataset::new(GameKind::Igt, trajectories)
}

/// Convert a whitespace-separated published IGT matrix (quoted header of
/// trial names, each row led by a quoted subject id) into the canonical CSV.
pub fn convert_published_igt(src: &Path, dst: &Path) -> Result<usize> {
    let reader = BufReader::new(open(src)?);
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(src, e))?,
        None => return Err(Error::InsufficientData(format!("{} is empty", src.display()))),
    };
    let n_cols = header.split_whitespace().count();
    let mut out = String::from("subject");
    for c in 1..=n_cols {
        out.push_str(&format!(",t{c}"));
    }
    out.push('\n');
    let mut rows = 0;
    for (r, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(src, e))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != n_cols + 1 {
            return Err(Error::Parse {
                file: file_label(src),
                row: r + 1,
                col: fields.len(),
                message: format!("expected subject id plus {n_cols} cells"),
            });
        }
        out.push_str(fields[0].trim_matches('"'));
        for f in &fields[1..] {
            out.push(',');
            out.push_str(f.trim_matches('"'));
        }
        out.push('\n');
        rows += 1;
    }
    write_atomic(dst, out.as_bytes())?;
    Ok(rows)
}

/// Concatenate datasets and keep the first `target_len` actions of every trajectory.
pub fn pool_and_truncate(datasets: &[Dataset], target_len: usize) -> Result<Dataset> {
    let kind = datasets
        .first()
        .map(|d| d.kind)
        .ok_or_else(|| Error::InsufficientData("nothing to pool".into()))?;
    let mut out = Vec::new();
    for d in datasets {
        if d.kind != kind {
            return Err(Error::GameKind {
                expected: kind.to_string(),
                found: d.kind.to_string(),
            });
        }
        for t in &d.trajectories {
            if t.len() < target_len {
                return Err(Error::Length(format!(
                    "trajectory {} from {} has {} actions, fewer than {target_len}",
                    t.meta.id,
                    t.meta.source,
                    t.len()
                )));
            }
            out.push(t.truncated(target_len));
        }
    }
    Dataset::new(kind, out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ActionCoding {
    Letters,
    Digits,
}

fn parse_ipd_action(cell: &str) -> Option<(Action, ActionCoding)> {
    match cell {
        "C" | "c" => Some((Action::COOPERATE, ActionCoding::Letters)),
        "D" | "d" => Some((Action::DEFECT, ActionCoding::Letters)),
        "1" => Some((Action::COOPERATE, ActionCoding::Digits)),
        "0" => Some((Action::DEFECT, ActionCoding::Digits)),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IpdLoadStats {
    pub kept: usize,
    /// Trajectories dropped for not having exactly the required number of rounds.
    pub dropped_length: usize,
}

/// Load the canonical IPD CSV, keeping only complete 9-round trajectories.
pub fn load_ipd(path: &Path) -> Result<Dataset> {
    load_ipd_with_stats(path, IPD_REQUIRED_ROUNDS).map(|(d, _)| d)
}

pub fn load_ipd_with_stats(path: &Path, required_rounds: usize) -> Result<(Dataset, IpdLoadStats)> {
    let file = file_label(path);
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let need = |name: &str| {
        col(name).ok_or_else(|| Error::Parse {
            file: file.clone(),
            row: 0,
            col: 0,
            message: format!("missing column '{name}'"),
        })
    };
    let (c_id, c_round, c_a1, c_a2) = (need("traj_id")?, need("round")?, need("a1")?, need("a2")?);
    let payoff_cols = match (col("R"), col("S"), col("T"), col("P")) {
        (Some(r), Some(s), Some(t), Some(p)) => Some((r, s, t, p)),
        _ => None,
    };

    struct Row {
        round: usize,
        a1: Action,
        a2: Action,
        payoffs: Option<[f64; 4]>,
    }
    // BTreeMap keeps output order independent of row order in the file
    let mut groups: BTreeMap<String, Vec<Row>> = BTreeMap::new();
    let mut coding: Option<ActionCoding> = None;
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row_no = r + 1;
        let cell = |c: usize| rec.get(c).unwrap_or("");
        let parse_err = |c: usize, message: String| Error::Parse {
            file: file.clone(),
            row: row_no,
            col: c + 1,
            message,
        };
        let round: usize = cell(c_round)
            .parse()
            .map_err(|_| parse_err(c_round, format!("round '{}' is not a positive integer", cell(c_round))))?;
        let mut acts = [Action::DEFECT; 2];
        for (k, c) in [c_a1, c_a2].into_iter().enumerate() {
            let (a, enc) = parse_ipd_action(cell(c)).ok_or_else(|| parse_err(c, format!("action '{}' is not C/D/1/0", cell(c))))?;
            match coding {
                None => coding = Some(enc),
                Some(existing) if existing != enc => {
                    return Err(parse_err(c, "mixed C/D and 1/0 action encodings in one file".into()));
                }
                _ => {}
            }
            acts[k] = a;
        }
        let payoffs = match payoff_cols {
            Some((cr, cs, ct, cp)) => {
                let mut v = [0.0; 4];
                for (slot, c) in v.iter_mut().zip([cr, cs, ct, cp]) {
                    *slot = cell(c)
                        .parse()
                        .map_err(|_| parse_err(c, format!("payoff '{}' is not a number", cell(c))))?;
                }
                Some(v)
            }
            None => None,
        };
        groups.entry(cell(c_id).to_string()).or_default().push(Row {
            round,
            a1: acts[0],
            a2: acts[1],
            payoffs,
        });
    }

    let mut stats = IpdLoadStats::default();
    let mut trajectories = Vec::new();
    for (traj_id, mut rows) in groups {
        rows.sort_by_key(|r| r.round);
        for (i, r) in rows.iter().enumerate() {
            if r.round != i + 1 {
                return Err(Error::Gap { traj_id, round: i + 1 });
            }
        }
        if rows.len() != required_rounds {
            stats.dropped_length += 1;
            continue;
        }
        let spec = match rows[0].payoffs {
            Some([r, s, t, p]) => {
                let spec = GameSpec::new(t, r, p, s, rows.len());
                ensure_valid(&spec)?;
                spec
            }
            None => GameSpec::standard(rows.len()),
        };
        // payoffs are implied by the actions and the spec
        let mut rewards = vec![Vec::with_capacity(rows.len()), Vec::with_capacity(rows.len())];
        for r in &rows {
            let (u, v) = ipd_payoff(&spec, r.a1, r.a2)?;
            rewards[0].push(u);
            rewards[1].push(v);
        }
        trajectories.push(Trajectory {
            kind: GameKind::Ipd,
            actions: vec![rows.iter().map(|r| r.a1).collect(), rows.iter().map(|r| r.a2).collect()],
            rewards: Some(rewards),
            draws: None,
            spec: Some(spec),
            meta: TrajectoryMeta {
                source: file.clone(),
                id: traj_id,
            },
        });
    }
    stats.kept = trajectories.len();
    if stats.dropped_length > 0 {
        log::warn!(
            "{file}: dropped {} trajectories without exactly {required_rounds} rounds",
            stats.dropped_length
        );
    }
    Ok((Dataset::new(GameKind::Ipd, trajectories)?, stats))
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn igt_matrix_csv(ds: &Dataset, cell: impl Fn(&Trajectory, usize) -> String) -> String {
    let width = ds.trajectories.iter().map(Trajectory::len).max().unwrap_or(0);
    let mut out = String::from("subject");
    for c in 1..=width {
        out.push_str(&format!(",t{c}"));
    }
    out.push('\n');
    for t in &ds.trajectories {
        out.push_str(&t.meta.id);
        for i in 0..width {
            out.push(',');
            if i < t.len() {
                out.push_str(&cell(t, i));
            }
        }
        out.push('\n');
    }
    out
}

/// Canonical IGT choice matrix (decks as 1..=4).
pub fn write_igt_choices(ds: &Dataset, path: &Path) -> Result<()> {
    expect_kind(ds.kind, GameKind::Igt)?;
    write_atomic(path, igt_matrix_csv(ds, |t, i| (t.actions[0][i].0 + 1).to_string()).as_bytes())
}

/// Win and loss matrices; trajectories without draw detail are an error.
pub fn write_igt_rewards(ds: &Dataset, wins: &Path, losses: &Path) -> Result<()> {
    expect_kind(ds.kind, GameKind::Igt)?;
    if let Some(t) = ds.trajectories.iter().find(|t| t.draws.is_none()) {
        return Err(Error::InsufficientData(format!("subject {} has no win/loss record", t.meta.id)));
    }
    let draw = |t: &Trajectory, i: usize| t.draws.as_ref().map(|d| d[i]).unwrap_or(IgtDraw { win: 0.0, loss: 0.0, combined: 0.0 });
    write_atomic(wins, igt_matrix_csv(ds, |t, i| draw(t, i).win.to_string()).as_bytes())?;
    write_atomic(losses, igt_matrix_csv(ds, |t, i| draw(t, i).loss.to_string()).as_bytes())
}

/// Canonical IPD CSV with payoff columns.
pub fn write_ipd(ds: &Dataset, path: &Path) -> Result<()> {
    expect_kind(ds.kind, GameKind::Ipd)?;
    let mut out = String::from("traj_id,round,a1,a2,R,S,T,P\n");
    let letter = |a: Action| if a.is_cooperate() { "C" } else { "D" };
    for t in &ds.trajectories {
        let spec = t.spec.unwrap_or_else(|| GameSpec::standard(t.len()));
        for i in 0..t.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                t.meta.id,
                i + 1,
                letter(t.actions[0][i]),
                letter(t.actions[1][i]),
                spec.reward,
                spec.sucker,
                spec.temptation,
                spec.penalty
            ));
        }
    }
    write_atomic(path, out.as_bytes())
}

pub fn expect_kind(found: GameKind, expected: GameKind) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::GameKind {
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}

// ---------------------------------------------------------------------------
// Supervised sequences

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Append the focal agent's reward at step t, divided by `reward_scale`.
    pub include_rewards: bool,
    pub reward_scale: f64,
}

impl FeatureConfig {
    pub fn feature_dim(&self, kind: GameKind) -> usize {
        let base = match kind {
            GameKind::Igt => crate::games::IGT_ALPHABET,
            GameKind::Ipd => 2 * crate::games::IPD_ALPHABET,
        };
        base + usize::from(self.include_rewards)
    }
}

/// Teacher-forced next-action training example for one focal agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupervisedSequence {
    pub kind: GameKind,
    /// Features observed at steps 1..H-1.
    pub inputs: Vec<Vec<f64>>,
    /// One-hot focal action at steps 2..H.
    pub targets: Vec<Vec<f64>>,
    pub focal_agent: usize,
    /// Id of the trajectory this sequence came from.
    pub source: String,
    pub spec: Option<GameSpec>,
}

impl SupervisedSequence {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Length of the underlying trajectory.
    pub fn horizon(&self) -> usize {
        self.inputs.len() + 1
    }
}

/// IGT gives one sequence; IPD gives one per player, each seeing its own
/// action followed by the opponent's.
pub fn to_supervised(traj: &Trajectory, config: &FeatureConfig) -> Result<Vec<SupervisedSequence>> {
    traj.check()?;
    if traj.len() < 2 {
        return Err(Error::Degenerate(traj.meta.id.clone()));
    }
    let alphabet = traj.kind.alphabet();
    let scale = if config.reward_scale > 0.0 { config.reward_scale } else { 1.0 };
    let n_agents = traj.kind.n_agents();
    let mut out = Vec::with_capacity(n_agents);
    for focal in 0..n_agents {
        let own = &traj.actions[focal];
        let mut inputs = Vec::with_capacity(own.len() - 1);
        let mut targets = Vec::with_capacity(own.len() - 1);
        for t in 0..own.len() - 1 {
            let mut x = encode_one_hot(own[t], alphabet)?;
            if traj.kind == GameKind::Ipd {
                x.extend(encode_one_hot(traj.actions[1 - focal][t], alphabet)?);
            }
            if config.include_rewards {
                let r = traj.rewards.as_ref().map(|r| r[focal][t]).ok_or_else(|| {
                    Error::InsufficientData(format!("trajectory {} has no rewards", traj.meta.id))
                })?;
                x.push(r / scale);
            }
            inputs.push(x);
            targets.push(encode_one_hot(own[t + 1], alphabet)?);
        }
        out.push(SupervisedSequence {
            kind: traj.kind,
            inputs,
            targets,
            focal_agent: focal,
            source: traj.meta.id.clone(),
            spec: traj.spec,
        });
    }
    Ok(out)
}

/// Supervised sequences for the trajectories at `indices`, in that order.
pub fn supervised_subset(ds: &Dataset, indices: &[usize], config: &FeatureConfig) -> Result<Vec<SupervisedSequence>> {
    let mut out = Vec::new();
    for &i in indices {
        out.extend(to_supervised(&ds.trajectories[i], config)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Splits

/// Trajectory-index partition. Sequences are derived after splitting, so both
/// perspectives of an IPD dyad always land on the same side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
    pub fold: Option<usize>,
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// Shuffle with `seed` and put `round(n · (1 − train_ratio))` trajectories in test.
pub fn split_train_test(ds: &Dataset, train_ratio: f64, seed: u64) -> Result<Split> {
    if ds.is_empty() {
        return Err(Error::InsufficientData("cannot split an empty dataset".into()));
    }
    if !(0.0..=1.0).contains(&train_ratio) {
        return Err(Error::Config(format!("train ratio {train_ratio} outside [0, 1]")));
    }
    let idx = shuffled(ds.len(), seed);
    let n_test = ((ds.len() as f64) * (1.0 - train_ratio)).round() as usize;
    let (test, train) = idx.split_at(n_test);
    Ok(Split {
        train: train.to_vec(),
        test: test.to_vec(),
        seed,
        fold: None,
    })
}

/// `k` shuffled folds; fold sizes differ by at most one.
pub fn make_folds(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<Split>> {
    if k < 2 || k > ds.len() {
        return Err(Error::Config(format!("{k} folds requested for {} trajectories", ds.len())));
    }
    let idx = shuffled(ds.len(), seed);
    let n = idx.len();
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = n / k + usize::from(f < n % k);
        let test = idx[start..start + size].to_vec();
        let train = idx[..start].iter().chain(&idx[start + size..]).copied().collect();
        folds.push(Split {
            train,
            test,
            seed,
            fold: Some(f),
        });
        start += size;
    }
    Ok(folds)
}

/// Ids of trajectories on each side; used to assert nothing leaks across.
pub fn split_ids(ds: &Dataset, split: &Split) -> (HashMap<String, usize>, HashMap<String, usize>) {
    let collect = |ix: &[usize]| {
        ix.iter()
            .map(|&i| (ds.trajectories[i].meta.id.clone(), i))
            .collect::<HashMap<_, _>>()
    };
    (collect(&split.train), collect(&split.test))
}
