//! Per-class recognizer evaluation over labeled doodles.
//!
//! Each doodle is replayed one stroke at a time. For every class the report
//! gives stroke-count statistics, the first stroke at which the true class
//! reaches top-1 and top-3, the share of doodles misclassified after their
//! final stroke (`W_last`) and the share misclassified at every stroke
//! (`W_all`).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classes::DoodleClass;
use crate::recognizer::{RecognizeError, Recognizer, TemplateSet, TEMPLATE_SPACE};
use crate::stroke::{normalize_strokes, Canvas, RawStroke};

/// One dataset record: `{"label": "<class>", "canvas": [w, h], "strokes": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDoodle {
    pub label: DoodleClass,
    pub canvas: Canvas,
    pub strokes: Vec<RawStroke>,
}

#[derive(Deserialize)]
struct RawRecord {
    label: String,
    canvas: Canvas,
    strokes: Vec<RawStroke>,
}

/// Parses a JSON-lines dataset. Blank lines are skipped.
pub fn parse_dataset(text: &str) -> Result<Vec<LabeledDoodle>, RecognizeError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawRecord =
            serde_json::from_str(line).map_err(|e| RecognizeError::Parse(format!("line {}: {e}", i + 1)))?;
        let label = rec.label.parse().map_err(|_| RecognizeError::UnknownLabel(rec.label))?;
        out.push(LabeledDoodle {
            label,
            canvas: rec.canvas,
            strokes: rec.strokes,
        });
    }
    Ok(out)
}

pub fn write_dataset(doodles: &[LabeledDoodle]) -> String {
    doodles
        .iter()
        .map(|d| serde_json::to_string(d).expect("doodle serializes") + "\n")
        .collect()
}

/// Every template of `set` as a labeled doodle on the nominal canvas.
pub fn templates_as_dataset(set: &TemplateSet) -> Vec<LabeledDoodle> {
    set.iter()
        .map(|(label, t)| LabeledDoodle {
            label,
            canvas: Canvas::new(TEMPLATE_SPACE, TEMPLATE_SPACE),
            strokes: t.strokes.iter().map(|s| RawStroke::new(s.clone())).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub avg: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Population standard deviation.
    pub sd: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let avg = v.iter().sum::<f64>() / n;
        let median = if v.len() % 2 == 1 {
            v[v.len() / 2]
        } else {
            (v[v.len() / 2 - 1] + v[v.len() / 2]) / 2.0
        };
        let sd = (v.iter().map(|x| (x - avg).powi(2)).sum::<f64>() / n).sqrt();
        Some(Self {
            avg,
            median,
            min: v[0],
            max: v[v.len() - 1],
            sd,
        })
    }
}

/// Outcome of replaying one doodle stroke by stroke.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Replay {
    strokes: usize,
    first_top1: Option<usize>,
    first_top3: Option<usize>,
    wrong_last: bool,
    wrong_all: bool,
}

fn replay(doodle: &LabeledDoodle, recognizer: &dyn Recognizer) -> Result<Replay, RecognizeError> {
    let n = doodle.strokes.len();
    if n == 0 {
        return Err(RecognizeError::EmptyInput);
    }
    let (mut first_top1, mut first_top3) = (None, None);
    let mut wrong_last = true;
    for k in 1..=n {
        let seq = normalize_strokes(&doodle.strokes[..k], doodle.canvas)?;
        let preds = recognizer.classify(&seq)?;
        let pos = preds.iter().position(|p| p.klass == doodle.label);
        if pos == Some(0) && first_top1.is_none() {
            first_top1 = Some(k);
        }
        if pos.is_some_and(|p| p < 3) && first_top3.is_none() {
            first_top3 = Some(k);
        }
        if k == n {
            wrong_last = pos != Some(0);
        }
    }
    Ok(Replay {
        strokes: n,
        first_top1,
        first_top3,
        wrong_last,
        wrong_all: first_top1.is_none(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: DoodleClass,
    pub doodles: usize,
    pub strokes: Stats,
    /// Over doodles that ever reach top-1.
    pub first_top1: Option<Stats>,
    /// Over doodles that ever reach top-3.
    pub first_top3: Option<Stats>,
    /// Percent misclassified after the final stroke.
    pub w_last: f64,
    /// Percent misclassified at every stroke.
    pub w_all: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognizerReport {
    /// One row per label present in the dataset, in class order.
    pub rows: Vec<ClassReport>,
}

fn stats_cells(s: &Option<Stats>) -> String {
    match s {
        Some(s) => format!("{:.3}\t{:.3}\t{:.3}\t{:.3}\t{:.3}", s.avg, s.median, s.min, s.max, s.sd),
        None => ["na"; 5].join("\t"),
    }
}

impl RecognizerReport {
    pub fn row(&self, class: DoodleClass) -> Option<&ClassReport> {
        self.rows.iter().find(|r| r.class == class)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("class\tdoodles");
        for prefix in ["strokes", "top1_stroke", "top3_stroke"] {
            for stat in ["avg", "median", "min", "max", "sd"] {
                let _ = write!(out, "\t{prefix}_{stat}");
            }
        }
        out.push_str("\tw_last_pct\tw_all_pct\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{:.2}\t{:.2}",
                r.class,
                r.doodles,
                stats_cells(&Some(r.strokes)),
                stats_cells(&r.first_top1),
                stats_cells(&r.first_top3),
                r.w_last,
                r.w_all
            );
        }
        out
    }
}

pub fn eval_recognizer(
    dataset: &[LabeledDoodle],
    recognizer: &dyn Recognizer,
) -> Result<RecognizerReport, RecognizeError> {
    if dataset.is_empty() {
        return Err(RecognizeError::EmptyInput);
    }
    let replays: Vec<Replay> = dataset
        .par_iter()
        .map(|d| replay(d, recognizer))
        .collect::<Result<_, _>>()?;
    let mut by_class: BTreeMap<DoodleClass, Vec<Replay>> = BTreeMap::new();
    for (d, r) in dataset.iter().zip(replays) {
        by_class.entry(d.label).or_default().push(r);
    }
    let pct = |count: usize, total: usize| 100.0 * count as f64 / total as f64;
    let rows = by_class
        .into_iter()
        .map(|(class, rs)| {
            let strokes: Vec<f64> = rs.iter().map(|r| r.strokes as f64).collect();
            let top1: Vec<f64> = rs.iter().filter_map(|r| r.first_top1).map(|k| k as f64).collect();
            let top3: Vec<f64> = rs.iter().filter_map(|r| r.first_top3).map(|k| k as f64).collect();
            ClassReport {
                class,
                doodles: rs.len(),
                strokes: Stats::of(&strokes).expect("class has doodles"),
                first_top1: Stats::of(&top1),
                first_top3: Stats::of(&top3),
                w_last: pct(rs.iter().filter(|r| r.wrong_last).count(), rs.len()),
                w_all: pct(rs.iter().filter(|r| r.wrong_all).count(), rs.len()),
            }
        })
        .collect();
    Ok(RecognizerReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recognizer::TemplateRecognizer;

    #[test]
    fn bundled_templates_never_wrong_at_last_stroke() {
        let set = TemplateSet::bundled();
        let rec = TemplateRecognizer::new(set.clone());
        let report = eval_recognizer(&templates_as_dataset(&set), &rec).unwrap();
        assert_eq!(report.rows.len(), 23);
        for r in &report.rows {
            assert_eq!(r.w_last, 0.0, "{}", r.class);
            assert_eq!(r.w_all, 0.0, "{}", r.class);
        }
        assert_eq!(report.to_tsv().lines().count(), 24);
    }

    #[test]
    fn single_doodle_first_stroke_top1() {
        let set = TemplateSet::bundled();
        let rec = TemplateRecognizer::new(set.clone());
        // a closed square in one stroke is a square from its first stroke
        let square = set.templates(DoodleClass::Square)[0].clone();
        assert_eq!(square.stroke_count(), 1);
        let data = vec![LabeledDoodle {
            label: DoodleClass::Square,
            canvas: Canvas::new(TEMPLATE_SPACE, TEMPLATE_SPACE),
            strokes: vec![RawStroke::new(square.strokes[0].clone())],
        }];
        let report = eval_recognizer(&data, &rec).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].first_top1.unwrap().avg, 1.0);
    }

    #[test]
    fn dataset_parsing() {
        let set = TemplateSet::bundled();
        let data = templates_as_dataset(&set);
        assert_eq!(parse_dataset(&write_dataset(&data)).unwrap(), data);
        let bad = r#"{"label": "banana", "canvas": [10, 10], "strokes": [[[1, 1]]]}"#;
        assert!(matches!(parse_dataset(bad), Err(RecognizeError::UnknownLabel(l)) if l == "banana"));
        assert!(matches!(parse_dataset("nope"), Err(RecognizeError::Parse(_))));
        let rec = TemplateRecognizer::new(set);
        assert!(matches!(eval_recognizer(&[], &rec), Err(RecognizeError::EmptyInput)));
    }

    #[test]
    fn stats() {
        let s = Stats::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((s.avg, s.median, s.min, s.max), (2.5, 2.5, 1.0, 4.0));
        assert!((s.sd - 1.118_033_988_749_895).abs() < 1e-12);
        assert!(Stats::of(&[]).is_none());
    }
}
