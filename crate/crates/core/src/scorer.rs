//! Multi-scale, IDF-weighted screen scoring.
//!
//! For every group of same-class doodles and every screen containing that
//! class, the screen starts with the whole-canvas presence credit `p3`. Each
//! screen tile holding the class then earns either an exact-tile credit
//! (when the doodles also cover that tile) or a smaller neighbor credit (when
//! the tile is 8-adjacent to the doodles' tiles). The per-group total is
//! weighted by the class IDF and summed over groups.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classes::ElementClass;
use crate::grid::{coverage_of, TileCoverage, TILE_COUNT};
use crate::index::ScreenIndex;
use crate::query::Sketch;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("the index holds no screens")]
    EmptyIndex,
    #[error("top_n must be at least 1")]
    InvalidTopN,
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
}

/// Scoring weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Exact-tile weight.
    pub p1: f64,
    /// Neighbor-tile weight.
    pub p2: f64,
    /// Presence credit per matching screen and group.
    pub p3: f64,
    /// Weight of the area-agreement term.
    pub delta_w: f64,
    /// Count-mismatch penalty.
    pub c_w: f64,
}

impl Hyperparams {
    pub const DEFAULT: Hyperparams = Hyperparams {
        p1: 39.0,
        p2: 8.0,
        p3: 9.0,
        delta_w: 0.4,
        c_w: 11.0,
    };

    pub fn as_array(&self) -> [f64; 5] {
        [self.p1, self.p2, self.p3, self.delta_w, self.c_w]
    }

    pub fn from_array([p1, p2, p3, delta_w, c_w]: [f64; 5]) -> Result<Self, ScoreError> {
        let hp = Self {
            p1,
            p2,
            p3,
            delta_w,
            c_w,
        };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<(), ScoreError> {
        if self.as_array().iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(())
        } else {
            Err(ScoreError::InvalidHyperparams(format!(
                "all weights must be finite and non-negative, got {self}"
            )))
        }
    }
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for Hyperparams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},{}", self.p1, self.p2, self.p3, self.delta_w, self.c_w)
    }
}

impl FromStr for Hyperparams {
    type Err = ScoreError;

    /// Parses `p1,p2,p3,delta_w,c_w`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| ScoreError::InvalidHyperparams(format!("{s:?}: {e}")))?;
        let arr: [f64; 5] = parts.try_into().map_err(|v: Vec<f64>| {
            ScoreError::InvalidHyperparams(format!("expected 5 comma-separated values, got {}", v.len()))
        })?;
        Self::from_array(arr)
    }
}

/// All sketch elements of one class and their tile coverage.
#[derive(Debug, Clone, PartialEq)]
pub struct DoodleGroup {
    pub klass: ElementClass,
    pub coverage: TileCoverage,
}

/// Groups sketch elements by class (ascending class order).
pub fn doodle_tile_coverage(sketch: &Sketch) -> Vec<DoodleGroup> {
    let mut by_class: Vec<Vec<_>> = vec![Vec::new(); ElementClass::COUNT];
    for e in sketch.elements() {
        by_class[e.klass.index()].push(e.bbox);
    }
    ElementClass::ALL
        .iter()
        .zip(by_class)
        .filter(|(_, rects)| !rects.is_empty())
        .map(|(&klass, rects)| DoodleGroup {
            klass,
            coverage: coverage_of(&rects),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredScreen {
    #[serde(rename = "id")]
    pub screen_id: String,
    pub score: f64,
}

/// Scores per screen number, zero for screens no group touched.
pub fn score_vector(sketch: &Sketch, index: &ScreenIndex, hp: &Hyperparams) -> Vec<f64> {
    let mut res = vec![0.0; index.screen_count()];
    for group in doodle_tile_coverage(sketch) {
        accumulate_group(&group, index, hp, &mut res);
    }
    res
}

fn accumulate_group(group: &DoodleGroup, index: &ScreenIndex, hp: &Hyperparams, res: &mut [f64]) {
    let Some(idf) = index.idf(group.klass) else {
        return;
    };
    let postings = index.postings(group.klass);
    let doodle_tiles = group.coverage.tiles();
    let neighbors = doodle_tiles.neighbors();
    let mut doodle_area = [0.0; TILE_COUNT];
    let mut doodle_count = [0.0; TILE_COUNT];
    for c in &group.coverage.cells {
        doodle_area[c.tile as usize] = c.area.clamp(0.0, 1.0);
        doodle_count[c.tile as usize] = f64::from(c.count);
    }

    for (i, &screen) in postings.screens.iter().enumerate() {
        let mut z = hp.p3;
        for k in postings.range(i) {
            let tile = postings.tiles[k] as usize;
            let a_o = postings.areas[k].clamp(0.0, 1.0);
            let c_o = f64::from(postings.counts[k]);
            if doodle_tiles.contains(tile) {
                let (a_d, c_d) = (doodle_area[tile], doodle_count[tile]);
                let delta_a = 1.0 - (a_d - a_o).abs();
                let delta_c = (1.0 - hp.c_w * (c_d - c_o).abs()).max(0.0);
                z += hp.p1 * (a_o / c_o) * (a_d / c_d) + hp.delta_w * a_d * delta_a * delta_c;
            } else if neighbors.contains(tile) {
                z += hp.p2 * (a_o / c_o);
            }
        }
        res[screen as usize] += z * idf;
    }
}

/// Positive-score screens as `(screen number, score)`, best first, ties by
/// ascending id.
pub fn rank_all(sketch: &Sketch, index: &ScreenIndex, hp: &Hyperparams) -> Vec<(u32, f64)> {
    let mut ranked = positive_scores(sketch, index, hp);
    ranked.sort_unstable_by(compare_ranked);
    ranked
}

fn positive_scores(sketch: &Sketch, index: &ScreenIndex, hp: &Hyperparams) -> Vec<(u32, f64)> {
    score_vector(sketch, index, hp)
        .into_iter()
        .enumerate()
        .filter(|&(_, s)| s > 0.0)
        .map(|(i, s)| (i as u32, s))
        .collect()
}

fn compare_ranked(a: &(u32, f64), b: &(u32, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// 1-based position of `screen` in a ranking, `None` when it is absent.
pub fn rank_of(ranked: &[(u32, f64)], screen: u32) -> Option<usize> {
    ranked.iter().position(|&(s, _)| s == screen).map(|p| p + 1)
}

/// The `top_n` best screens for a sketch.
pub fn score_screens(
    sketch: &Sketch,
    index: &ScreenIndex,
    hp: &Hyperparams,
    top_n: usize,
) -> Result<Vec<ScoredScreen>, ScoreError> {
    if index.is_empty() {
        return Err(ScoreError::EmptyIndex);
    }
    if top_n == 0 {
        return Err(ScoreError::InvalidTopN);
    }
    hp.validate()?;
    let mut ranked = positive_scores(sketch, index, hp);
    if ranked.len() > top_n {
        ranked.select_nth_unstable_by(top_n - 1, compare_ranked);
        ranked.truncate(top_n);
    }
    ranked.sort_unstable_by(compare_ranked);
    Ok(ranked
        .into_iter()
        .map(|(s, score)| ScoredScreen {
            screen_id: index.screen_id(s).to_string(),
            score,
        })
        .collect())
}
