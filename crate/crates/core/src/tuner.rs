//! Exhaustive grid search over the scoring weights.
//!
//! The objective is mean reciprocal rank of each pair's target; targets
//! missing from the results contribute 0. Ties go to more top-10 hits, then
//! to the lexicographically smallest point.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{pair_ranks, resolve_targets, EvalError, EvalPair};
use crate::index::ScreenIndex;
use crate::scorer::Hyperparams;

const TOP_K: usize = 10;

#[derive(Debug, Error)]
pub enum TuneError {
    #[error("target screen {0:?} is not in the index")]
    TargetMissing(String),
    #[error("grid has no points")]
    EmptyGrid,
    #[error("grid values must be finite and non-negative: {0}")]
    InvalidGrid(String),
    #[error("no evaluation pairs")]
    NoPairs,
    #[error("index is empty")]
    EmptyIndex,
}

/// Candidate values per weight. JSON: `{"p1": [...], "p2": [...], ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub p3: Vec<f64>,
    pub delta_w: Vec<f64>,
    pub c_w: Vec<f64>,
}

impl GridSpec {
    pub fn single(hp: Hyperparams) -> Self {
        Self {
            p1: vec![hp.p1],
            p2: vec![hp.p2],
            p3: vec![hp.p3],
            delta_w: vec![hp.delta_w],
            c_w: vec![hp.c_w],
        }
    }

    fn lists(&self) -> [&[f64]; 5] {
        [&self.p1, &self.p2, &self.p3, &self.delta_w, &self.c_w]
    }

    pub fn len(&self) -> usize {
        self.lists().iter().map(|l| l.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every point, last weight varying fastest.
    pub fn points(&self) -> Vec<Hyperparams> {
        let mut out = Vec::with_capacity(self.len());
        for &p1 in &self.p1 {
            for &p2 in &self.p2 {
                for &p3 in &self.p3 {
                    for &delta_w in &self.delta_w {
                        for &c_w in &self.c_w {
                            out.push(Hyperparams {
                                p1,
                                p2,
                                p3,
                                delta_w,
                                c_w,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<(), TuneError> {
        if self.is_empty() {
            return Err(TuneError::EmptyGrid);
        }
        let bad = self
            .lists()
            .iter()
            .flat_map(|l| l.iter())
            .find(|v| !v.is_finite() || **v < 0.0);
        match bad {
            Some(v) => Err(TuneError::InvalidGrid(v.to_string())),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub hp: Hyperparams,
    pub mrr: f64,
    pub top10_hits: usize,
    /// Target rank per pair, in pair order.
    pub ranks: Vec<Option<usize>>,
}

pub fn mean_reciprocal_rank(ranks: &[Option<usize>]) -> f64 {
    if ranks.is_empty() {
        return 0.0;
    }
    ranks.iter().map(|r| r.map_or(0.0, |r| 1.0 / r as f64)).sum::<f64>() / ranks.len() as f64
}

fn top_k_hits(ranks: &[Option<usize>]) -> usize {
    ranks.iter().filter(|r| r.is_some_and(|r| r <= TOP_K)).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    /// One row per grid point, in grid order.
    pub rows: Vec<GridRow>,
}

impl TuneReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("p1\tp2\tp3\tdelta_w\tc_w\tmrr\ttop10_hits\n");
        for r in &self.rows {
            let h = r.hp;
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{:.6}\t{}",
                h.p1, h.p2, h.p3, h.delta_w, h.c_w, r.mrr, r.top10_hits
            );
        }
        out
    }
}

/// Better rows sort first.
fn compare_rows(a: &GridRow, b: &GridRow) -> Ordering {
    b.mrr
        .total_cmp(&a.mrr)
        .then(b.top10_hits.cmp(&a.top10_hits))
        .then_with(|| {
            a.hp.as_array()
                .iter()
                .zip(b.hp.as_array())
                .map(|(x, y)| x.total_cmp(&y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

pub fn grid_search(
    pairs: &[EvalPair],
    index: &ScreenIndex,
    grid: &GridSpec,
) -> Result<(Hyperparams, TuneReport), TuneError> {
    grid.validate()?;
    if pairs.is_empty() {
        return Err(TuneError::NoPairs);
    }
    if index.is_empty() {
        return Err(TuneError::EmptyIndex);
    }
    let targets = resolve_targets(pairs, index).map_err(|e| match e {
        EvalError::TargetMissing(id) => TuneError::TargetMissing(id),
        other => unreachable!("resolve_targets only reports missing targets: {other}"),
    })?;
    let rows: Vec<GridRow> = grid
        .points()
        .into_par_iter()
        .map(|hp| {
            let ranks = pair_ranks(pairs, &targets, index, &hp);
            GridRow {
                hp,
                mrr: mean_reciprocal_rank(&ranks),
                top10_hits: top_k_hits(&ranks),
                ranks,
            }
        })
        .collect();
    let best = rows
        .iter()
        .min_by(|a, b| compare_rows(a, b))
        .expect("grid is non-empty")
        .hp;
    Ok((best, TuneReport { rows }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::build_index;
    use crate::screen::default_label_fixes;
    use crate::synth::{generate_eval_pairs, generate_synthetic_corpus, PairSpec, RarityProfile};

    fn fixture() -> (ScreenIndex, Vec<EvalPair>) {
        let corpus = generate_synthetic_corpus(21, 200, &RarityProfile::rico()).unwrap();
        let (index, _) = build_index(&corpus.docs, &default_label_fixes()).unwrap();
        let pairs = generate_eval_pairs(
            &corpus.manifest,
            3,
            PairSpec {
                count: 5,
                ..PairSpec::default()
            },
        );
        (index, pairs)
    }

    const ZERO: Hyperparams = Hyperparams {
        p1: 0.0,
        p2: 0.0,
        p3: 0.0,
        delta_w: 0.0,
        c_w: 11.0,
    };

    #[test]
    fn single_point_grid() {
        let (index, pairs) = fixture();
        let (best, report) = grid_search(&pairs, &index, &GridSpec::single(Hyperparams::DEFAULT)).unwrap();
        assert_eq!(best, Hyperparams::DEFAULT);
        assert_eq!(report.rows.len(), 1);
        assert!(report.rows[0].mrr > 0.0);
    }

    #[test]
    fn zero_point_never_wins() {
        let (index, pairs) = fixture();
        let grid = GridSpec {
            p1: vec![0.0, 39.0],
            p2: vec![0.0, 8.0],
            p3: vec![0.0],
            delta_w: vec![0.0],
            c_w: vec![11.0],
        };
        let (best, report) = grid_search(&pairs, &index, &grid).unwrap();
        assert_ne!(best, ZERO);
        assert_eq!(report.rows.len(), 4);
        let zero = report.rows.iter().find(|r| r.hp == ZERO).unwrap();
        assert_eq!(zero.mrr, 0.0);
        assert!(zero.ranks.iter().all(Option::is_none));
        for r in &report.rows {
            assert!((r.mrr - mean_reciprocal_rank(&r.ranks)).abs() < 1e-12);
        }
        assert_eq!(report.to_tsv().lines().count(), 5);
    }

    #[test]
    fn errors() {
        let (index, mut pairs) = fixture();
        let empty = GridSpec {
            p1: vec![],
            ..GridSpec::single(Hyperparams::DEFAULT)
        };
        assert!(matches!(grid_search(&pairs, &index, &empty), Err(TuneError::EmptyGrid)));
        let negative = GridSpec {
            p1: vec![-1.0],
            ..GridSpec::single(Hyperparams::DEFAULT)
        };
        assert!(matches!(
            grid_search(&pairs, &index, &negative),
            Err(TuneError::InvalidGrid(_))
        ));
        pairs[0].target_id = "nope".into();
        assert!(matches!(
            grid_search(&pairs, &index, &GridSpec::single(Hyperparams::DEFAULT)),
            Err(TuneError::TargetMissing(id)) if id == "nope"
        ));
    }

    #[test]
    fn tie_break_prefers_smaller_point() {
        let row = |p1: f64, mrr: f64, hits: usize| GridRow {
            hp: Hyperparams {
                p1,
                ..Hyperparams::DEFAULT
            },
            mrr,
            top10_hits: hits,
            ranks: vec![],
        };
        let mut rows = [row(5.0, 0.5, 3), row(1.0, 0.5, 3), row(0.0, 0.5, 2), row(9.0, 0.6, 0)];
        rows.sort_by(compare_rows);
        let order: Vec<f64> = rows.iter().map(|r| r.hp.p1).collect();
        assert_eq!(order, vec![9.0, 1.0, 5.0, 0.0]);
    }
}
