//! Feature extraction and k-nearest-neighbour prioritization.
//!
//! Distances are Euclidean over five features in `[0, 1]`. The `k` closest
//! examples vote with equal weight; equal distances go to the older example
//! (lower `seq`) and tied votes go to the higher priority, so an ambiguous
//! event errs toward notifying.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use chrono::Duration;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::entity::EventCandidate;
use crate::lexicon::SEED_EXAMPLES;
use crate::prefs::UserPreferences;
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PriorityLevel {
    Low,
    Medium,
    High,
}

impl PriorityLevel {
    /// Highest first.
    pub const ALL: [PriorityLevel; 3] = [PriorityLevel::High, PriorityLevel::Medium, PriorityLevel::Low];

    pub fn as_str(&self) -> &'static str {
        match self {
            PriorityLevel::High => "High",
            PriorityLevel::Medium => "Medium",
            PriorityLevel::Low => "Low",
        }
    }

    /// Row/column of this level in a confusion matrix (High first).
    pub fn index(&self) -> usize {
        match self {
            PriorityLevel::High => 0,
            PriorityLevel::Medium => 1,
            PriorityLevel::Low => 2,
        }
    }
}

impl core::fmt::Display for PriorityLevel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for PriorityLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "High" | "high" => Ok(PriorityLevel::High),
            "Medium" | "medium" => Ok(PriorityLevel::Medium),
            "Low" | "low" => Ok(PriorityLevel::Low),
            other => Err(alloc::format!("unknown priority {other:?}")),
        }
    }
}

pub const FEATURE_DIM: usize = 5;

/// `[urgency, type_weight, sender_affinity, explicit_time, direct_chat]`,
/// each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; FEATURE_DIM]", into = "[f64; FEATURE_DIM]")]
pub struct FeatureVector([f64; FEATURE_DIM]);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("feature {index} = {value} is outside [0, 1]")]
pub struct FeatureError {
    pub index: usize,
    pub value: f64,
}

impl FeatureVector {
    pub fn new(values: [f64; FEATURE_DIM]) -> Result<Self, FeatureError> {
        match values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            Some(index) => Err(FeatureError {
                index,
                value: values[index],
            }),
            None => Ok(Self(values)),
        }
    }

    pub fn values(&self) -> &[f64; FEATURE_DIM] {
        &self.0
    }

    pub fn urgency(&self) -> f64 {
        self.0[0]
    }

    pub fn type_weight(&self) -> f64 {
        self.0[1]
    }

    pub fn sender_affinity(&self) -> f64 {
        self.0[2]
    }

    pub fn explicit_time(&self) -> f64 {
        self.0[3]
    }

    pub fn direct_chat(&self) -> f64 {
        self.0[4]
    }

    pub fn distance(&self, other: &FeatureVector) -> f64 {
        let sum: f64 = self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        libm::sqrt(sum)
    }
}

impl TryFrom<[f64; FEATURE_DIM]> for FeatureVector {
    type Error = FeatureError;

    fn try_from(values: [f64; FEATURE_DIM]) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

impl From<FeatureVector> for [f64; FEATURE_DIM] {
    fn from(v: FeatureVector) -> Self {
        v.0
    }
}

/// Horizon over which urgency decays from 1 to 0.
pub const URGENCY_HORIZON_DAYS: f64 = 30.0;

fn lead_days(occurs_at: Timestamp, now: Timestamp) -> f64 {
    (occurs_at - now).num_seconds() as f64 / 86_400.0
}

pub fn featurize(candidate: &EventCandidate, prefs: &UserPreferences, now: Timestamp) -> FeatureVector {
    let urgency = (1.0 - lead_days(candidate.occurs_at, now) / URGENCY_HORIZON_DAYS).clamp(0.0, 1.0);
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    FeatureVector([
        urgency,
        prefs.type_weight(&candidate.event_type).clamp(0.0, 1.0),
        prefs.affinity(&candidate.sender).clamp(0.0, 1.0),
        flag(candidate.has_explicit_time()),
        flag(!candidate.is_group),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Seed,
    Feedback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub vector: FeatureVector,
    pub label: PriorityLevel,
    pub origin: Origin,
    pub seq: u64,
}

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    examples: Vec<LabeledExample>,
    k: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("example seq {seq} is not greater than {last}")]
    SeqNotIncreasing { seq: u64, last: u64 },
}

impl KnnModel {
    pub fn new(k: usize) -> Result<Self, ModelError> {
        if k == 0 {
            return Err(ModelError::ZeroK);
        }
        Ok(Self {
            examples: Vec::new(),
            k,
        })
    }

    /// Model holding the built-in seed examples.
    pub fn seeded(k: usize) -> Result<Self, ModelError> {
        let mut model = Self::new(k)?;
        for example in builtin_seed_examples() {
            model.push(example.vector, example.label, Origin::Seed);
        }
        Ok(model)
    }

    /// Model over existing examples, whose seqs must be strictly increasing.
    pub fn from_examples(k: usize, examples: Vec<LabeledExample>) -> Result<Self, ModelError> {
        let mut model = Self::new(k)?;
        for e in examples {
            if let Some(last) = model.examples.last() {
                if e.seq <= last.seq {
                    return Err(ModelError::SeqNotIncreasing {
                        seq: e.seq,
                        last: last.seq,
                    });
                }
            }
            model.examples.push(e);
        }
        Ok(model)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn next_seq(&self) -> u64 {
        self.examples.last().map_or(1, |e| e.seq + 1)
    }

    pub fn push(&mut self, vector: FeatureVector, label: PriorityLevel, origin: Origin) -> u64 {
        let seq = self.next_seq();
        self.examples.push(LabeledExample {
            vector,
            label,
            origin,
            seq,
        });
        seq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub seq: u64,
    pub distance: f64,
    pub label: PriorityLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub level: PriorityLevel,
    pub neighbors: Vec<Neighbor>,
    /// Set when the model was empty and the lead-time rule decided.
    pub cold_start: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("model has no examples")]
pub struct EmptyModel;

pub fn classify(model: &KnnModel, query: &FeatureVector) -> Result<Classification, EmptyModel> {
    if model.is_empty() {
        return Err(EmptyModel);
    }
    let mut neighbors: Vec<Neighbor> = model
        .examples
        .iter()
        .map(|e| Neighbor {
            seq: e.seq,
            distance: query.distance(&e.vector),
            label: e.label,
        })
        .collect();
    let k = model.k.min(neighbors.len());
    let by_distance_then_seq = |a: &Neighbor, b: &Neighbor| a.distance.total_cmp(&b.distance).then(a.seq.cmp(&b.seq));
    if k < neighbors.len() {
        neighbors.select_nth_unstable_by(k - 1, by_distance_then_seq);
        neighbors.truncate(k);
    }
    neighbors.sort_by(by_distance_then_seq);

    let mut votes = [0usize; 3];
    for n in &neighbors {
        votes[n.label.index()] += 1;
    }
    // ALL is ordered highest first, so max_by_key's last-wins tie rule is
    // reversed to keep the first (highest) level.
    let level = PriorityLevel::ALL
        .into_iter()
        .rev()
        .max_by_key(|l| votes[l.index()])
        .unwrap_or(PriorityLevel::High);
    Ok(Classification {
        level,
        neighbors,
        cold_start: false,
    })
}

/// Priority by lead time alone, for when no examples exist.
pub fn cold_start_level(lead: Duration) -> PriorityLevel {
    if lead < Duration::hours(48) {
        PriorityLevel::High
    } else if lead < Duration::days(7) {
        PriorityLevel::Medium
    } else {
        PriorityLevel::Low
    }
}

/// [`classify`], falling back to [`cold_start_level`] on an empty model.
pub fn prioritize(model: &KnnModel, query: &FeatureVector, lead: Duration) -> Classification {
    classify(model, query).unwrap_or_else(|EmptyModel| Classification {
        level: cold_start_level(lead),
        neighbors: Vec::new(),
        cold_start: true,
    })
}

/// Appends a user-labelled example built from `candidate`.
pub fn add_feedback(
    model: &mut KnnModel,
    candidate: &EventCandidate,
    prefs: &UserPreferences,
    now: Timestamp,
    label: PriorityLevel,
) -> LabeledExample {
    let vector = featurize(candidate, prefs, now);
    let seq = model.push(vector, label, Origin::Feedback);
    LabeledExample {
        vector,
        label,
        origin: Origin::Feedback,
        seq,
    }
}

pub const MIN_EVAL_DATASET: usize = 10;
pub const TRAIN_FRACTION: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    /// `confusion[actual][predicted]`, High/Medium/Low order.
    pub confusion: [[u32; 3]; 3],
    pub train_size: usize,
    pub test_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("dataset has {0} examples; at least {MIN_EVAL_DATASET} are needed")]
    DatasetTooSmall(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Shuffles `dataset` deterministically by `seed` and splits it into the
/// first 70% (floored) for training and the rest for testing.
pub fn split_dataset(dataset: &[LabeledExample], seed: u64) -> (Vec<LabeledExample>, Vec<LabeledExample>) {
    let mut shuffled = dataset.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train_len = (dataset.len() as f64 * TRAIN_FRACTION) as usize;
    let test = shuffled.split_off(train_len);
    (shuffled, test)
}

pub fn evaluate_split(dataset: &[LabeledExample], k: usize, seed: u64) -> Result<Evaluation, EvalError> {
    if dataset.len() < MIN_EVAL_DATASET {
        return Err(EvalError::DatasetTooSmall(dataset.len()));
    }
    let (mut train, test) = split_dataset(dataset, seed);
    train.sort_by_key(|e| e.seq);
    let model = KnnModel::from_examples(k, train)?;
    let mut confusion = [[0u32; 3]; 3];
    let mut correct = 0usize;
    for example in &test {
        let predicted = classify(&model, &example.vector)
            .map_err(|_| EvalError::DatasetTooSmall(dataset.len()))?
            .level;
        confusion[example.label.index()][predicted.index()] += 1;
        if predicted == example.label {
            correct += 1;
        }
    }
    Ok(Evaluation {
        accuracy: correct as f64 / test.len() as f64,
        confusion,
        train_size: model.len(),
        test_size: test.len(),
    })
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct DatasetError {
    pub line: usize,
    pub reason: String,
}

#[derive(Deserialize)]
struct DatasetLine {
    v: [f64; FEATURE_DIM],
    label: PriorityLevel,
}

/// Parses `{"v":[5 numbers],"label":"High|Medium|Low"}` lines. Blank lines
/// are skipped; examples get seq 1, 2, ... in file order.
pub fn parse_labeled_jsonl(text: &str, origin: Origin) -> Result<Vec<LabeledExample>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: DatasetLine = serde_json::from_str(line).map_err(|e| DatasetError {
            line: i + 1,
            reason: e.to_string(),
        })?;
        let vector = FeatureVector::new(parsed.v).map_err(|e| DatasetError {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(LabeledExample {
            vector,
            label: parsed.label,
            origin,
            seq: out.len() as u64 + 1,
        });
    }
    Ok(out)
}

pub fn builtin_seed_examples() -> Vec<LabeledExample> {
    parse_labeled_jsonl(SEED_EXAMPLES, Origin::Seed).expect("built-in seed dataset")
}
