//! Retrieval evaluation over (sketch, target screen) pairs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::ScreenIndex;
use crate::query::{QueryError, Sketch, SketchFile};
use crate::scorer::{score_vector, Hyperparams, ScoreError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("target screen {0:?} is not in the index")]
    TargetMissing(String),
    #[error("no evaluation pairs")]
    NoPairs,
    #[error("cutoff k must be at least 1")]
    InvalidK,
    #[error("pairs file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Score(#[from] ScoreError),
}

/// A query sketch and the screen it is meant to find.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPair {
    pub sketch: Sketch,
    pub target_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct PairRecord {
    sketch: SketchFile,
    target_id: String,
}

/// Reads a pairs file: one `{"sketch": ..., "target_id": ...}` per line.
pub fn parse_pairs(text: &str) -> Result<Vec<EvalPair>, EvalError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| EvalError::Parse { line: i + 1, message };
        let rec: PairRecord = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let sketch = rec.sketch.into_sketch().map_err(|e: QueryError| err(e.to_string()))?;
        pairs.push(EvalPair {
            sketch,
            target_id: rec.target_id,
        });
    }
    Ok(pairs)
}

pub fn write_pairs(pairs: &[EvalPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        let rec = PairRecord {
            sketch: SketchFile::from_sketch(&p.sketch),
            target_id: p.target_id.clone(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("pair record serializes"));
        out.push('\n');
    }
    out
}

/// 1-based rank of `target` in the ranking implied by `scores`, or `None`
/// when it scored zero and would be omitted from results.
pub fn target_rank(scores: &[f64], target: u32) -> Option<usize> {
    let t = scores[target as usize];
    if t <= 0.0 {
        return None;
    }
    let ahead = scores
        .iter()
        .enumerate()
        .filter(|&(i, &s)| s > t || (s == t && (i as u32) < target))
        .count();
    Some(ahead + 1)
}

/// Screen numbers for every pair's target, failing on the first unknown id.
pub fn resolve_targets(pairs: &[EvalPair], index: &ScreenIndex) -> Result<Vec<u32>, EvalError> {
    pairs
        .iter()
        .map(|p| {
            index
                .screen_number(&p.target_id)
                .ok_or_else(|| EvalError::TargetMissing(p.target_id.clone()))
        })
        .collect()
}

/// Target ranks for every pair under `hp`.
pub fn pair_ranks(pairs: &[EvalPair], targets: &[u32], index: &ScreenIndex, hp: &Hyperparams) -> Vec<Option<usize>> {
    pairs
        .iter()
        .zip(targets)
        .map(|(p, &t)| target_rank(&score_vector(&p.sketch, index, hp), t))
        .collect()
}

/// Top-k accuracy. A target missing from the results never counts as a hit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub k: usize,
    pub hits: usize,
    pub total: usize,
    pub accuracy: f64,
    pub ranks: Vec<Option<usize>>,
}

impl EvalSummary {
    pub fn from_ranks(k: usize, ranks: Vec<Option<usize>>) -> Self {
        let hits = ranks.iter().filter(|r| r.is_some_and(|r| r <= k)).count();
        let total = ranks.len();
        let accuracy = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
        Self {
            k,
            hits,
            total,
            accuracy,
            ranks,
        }
    }

    /// Header plus one summary row, tab separated.
    pub fn to_tsv(&self) -> String {
        format!(
            "k\thits\ttotal\taccuracy\n{}\t{}\t{}\t{:.6}\n",
            self.k, self.hits, self.total, self.accuracy
        )
    }

    /// Per-pair ranks; unranked targets are written as `inf`.
    pub fn ranks_tsv(&self, pairs: &[EvalPair]) -> String {
        let mut out = String::from("target_id\trank\n");
        for (p, r) in pairs.iter().zip(&self.ranks) {
            let r = r.map_or_else(|| "inf".to_string(), |r| r.to_string());
            out.push_str(&format!("{}\t{r}\n", p.target_id));
        }
        out
    }
}

pub fn evaluate_search(
    pairs: &[EvalPair],
    index: &ScreenIndex,
    hp: &Hyperparams,
    k: usize,
) -> Result<EvalSummary, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::NoPairs);
    }
    if k == 0 {
        return Err(EvalError::InvalidK);
    }
    if index.is_empty() {
        return Err(ScoreError::EmptyIndex.into());
    }
    hp.validate()?;
    let targets = resolve_targets(pairs, index)?;
    Ok(EvalSummary::from_ranks(k, pair_ranks(pairs, &targets, index, hp)))
}
