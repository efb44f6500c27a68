//! Inverted index: element class -> screens -> per-tile coverage.
//!
//! Screens are numbered by ascending id, so comparing screen numbers is the
//! same as comparing ids. Postings for each class are stored column-wise
//! (screen, cell offsets, cells) to keep scoring cache friendly and the
//! on-disk form compact.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classes::ElementClass;
use crate::grid::{TileCell, TileCoverage};
use crate::screen::{decompose_prepared, prepare, verdict, FilterVerdict, LabelFixRule, RejectReason, ScreenDoc};

/// An accepted screen's id and its per-class coverage.
type Decomposed<'a> = (&'a str, Vec<(ElementClass, TileCoverage)>);

pub const INDEX_MAGIC: &[u8; 7] = b"PSDIDX1";
pub const INDEX_VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("duplicate screen id {0:?}")]
    DuplicateId(String),
    #[error("screen {0:?} has a zero width or height")]
    InvalidScreen(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not an index file, or an unsupported version")]
    VersionMismatch,
    #[error("index file is truncated or corrupt (checksum mismatch)")]
    ChecksumMismatch,
    #[error("index payload is malformed: {0}")]
    Malformed(String),
}

/// Screens containing one class, with their tile coverage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassPostings {
    /// Screen numbers, ascending.
    pub screens: Vec<u32>,
    /// `cells[offsets[i]..offsets[i + 1]]` belong to `screens[i]`.
    pub offsets: Vec<u32>,
    pub tiles: Vec<u8>,
    pub areas: Vec<f64>,
    pub counts: Vec<u32>,
}

impl ClassPostings {
    fn new() -> Self {
        Self {
            offsets: vec![0],
            ..Self::default()
        }
    }

    fn push(&mut self, screen: u32, cov: &TileCoverage) {
        self.screens.push(screen);
        for c in &cov.cells {
            self.tiles.push(c.tile);
            self.areas.push(c.area);
            self.counts.push(c.count);
        }
        self.offsets.push(self.tiles.len() as u32);
    }

    pub fn len(&self) -> usize {
        self.screens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.screens.is_empty()
    }

    /// Cell range of the `i`-th posting.
    pub fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i] as usize..self.offsets[i + 1] as usize
    }

    pub fn coverage(&self, i: usize) -> TileCoverage {
        TileCoverage {
            cells: self
                .range(i)
                .map(|k| TileCell {
                    tile: self.tiles[k],
                    area: self.areas[k],
                    count: self.counts[k],
                })
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, TileCoverage)> + '_ {
        (0..self.len()).map(|i| (self.screens[i], self.coverage(i)))
    }
}

/// `ln(1 + n / df)`: positive, and larger for rarer classes.
pub fn idf(n: usize, df: usize) -> f64 {
    debug_assert!(n >= 1 && df >= 1);
    (1.0 + n as f64 / df as f64).ln()
}

pub fn compute_idf(n: usize, df: &BTreeMap<ElementClass, usize>) -> BTreeMap<ElementClass, f64> {
    df.iter()
        .filter(|(_, &d)| d > 0)
        .map(|(&c, &d)| (c, idf(n, d)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenIndex {
    screen_ids: Vec<String>,
    postings: Vec<ClassPostings>,
    /// Per class; 0 for classes no screen contains.
    idf: Vec<f64>,
}

impl ScreenIndex {
    pub fn screen_count(&self) -> usize {
        self.screen_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.screen_ids.is_empty()
    }

    pub fn screen_ids(&self) -> &[String] {
        &self.screen_ids
    }

    pub fn screen_id(&self, screen: u32) -> &str {
        &self.screen_ids[screen as usize]
    }

    pub fn screen_number(&self, id: &str) -> Option<u32> {
        self.screen_ids
            .binary_search_by(|s| s.as_str().cmp(id))
            .ok()
            .map(|i| i as u32)
    }

    pub fn postings(&self, class: ElementClass) -> &ClassPostings {
        &self.postings[class.index()]
    }

    pub fn df(&self, class: ElementClass) -> usize {
        self.postings(class).len()
    }

    pub fn idf(&self, class: ElementClass) -> Option<f64> {
        (self.df(class) > 0).then(|| self.idf[class.index()])
    }

    pub fn df_table(&self) -> BTreeMap<ElementClass, usize> {
        ElementClass::ALL
            .iter()
            .map(|&c| (c, self.df(c)))
            .filter(|&(_, d)| d > 0)
            .collect()
    }

    /// Every class present on one screen with its coverage.
    pub fn screen_coverage(&self, screen: u32) -> Vec<(ElementClass, TileCoverage)> {
        ElementClass::ALL
            .iter()
            .filter_map(|&c| {
                let p = self.postings(c);
                let i = p.screens.binary_search(&screen).ok()?;
                Some((c, p.coverage(i)))
            })
            .collect()
    }

    fn from_parts(screen_ids: Vec<String>, coverage: Vec<Vec<(ElementClass, TileCoverage)>>) -> Self {
        let mut postings: Vec<ClassPostings> = (0..ElementClass::COUNT).map(|_| ClassPostings::new()).collect();
        for (screen, classes) in coverage.iter().enumerate() {
            for (class, cov) in classes {
                postings[class.index()].push(screen as u32, cov);
            }
        }
        let n = screen_ids.len();
        let idf = postings
            .iter()
            .map(|p| if p.is_empty() { 0.0 } else { idf(n, p.len()) })
            .collect();
        Self {
            screen_ids,
            postings,
            idf,
        }
    }

    /// Checks structural invariants; used after loading untrusted files.
    fn validate(&self) -> Result<(), IndexError> {
        let bad = |m: &str| Err(IndexError::Malformed(m.to_string()));
        if self.postings.len() != ElementClass::COUNT || self.idf.len() != ElementClass::COUNT {
            return bad("wrong class count");
        }
        if self.screen_ids.windows(2).any(|w| w[0] >= w[1]) {
            return bad("screen ids not strictly ascending");
        }
        let n = self.screen_ids.len() as u32;
        for p in &self.postings {
            let cells = p.tiles.len();
            if p.offsets.len() != p.screens.len() + 1
                || p.offsets.first() != Some(&0)
                || p.offsets.last().map(|&o| o as usize) != Some(cells)
                || p.areas.len() != cells
                || p.counts.len() != cells
                || p.offsets.windows(2).any(|w| w[0] >= w[1])
                || p.screens.windows(2).any(|w| w[0] >= w[1])
                || p.screens.iter().any(|&s| s >= n)
                || p.tiles.iter().any(|&t| t as usize >= crate::grid::TILE_COUNT)
            {
                return bad("inconsistent postings");
            }
        }
        Ok(())
    }

    /// Writes magic, version byte, CBOR payload and a trailing CRC-32 of
    /// everything before it.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(INDEX_MAGIC);
        buf.push(INDEX_VERSION);
        ciborium::into_writer(self, &mut buf).expect("serializing into a Vec cannot fail");
        let crc = crc32fast::hash(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IndexError> {
        let header = INDEX_MAGIC.len() + 1;
        let magic_len = bytes.len().min(INDEX_MAGIC.len());
        if bytes[..magic_len] != INDEX_MAGIC[..magic_len] {
            return Err(IndexError::VersionMismatch);
        }
        if bytes.len() > INDEX_MAGIC.len() && bytes[INDEX_MAGIC.len()] != INDEX_VERSION {
            return Err(IndexError::VersionMismatch);
        }
        if bytes.len() < header + 4 {
            return Err(IndexError::ChecksumMismatch);
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
        if crc32fast::hash(body) != stored {
            return Err(IndexError::ChecksumMismatch);
        }
        let index: ScreenIndex =
            ciborium::from_reader(&body[header..]).map_err(|e| IndexError::Malformed(e.to_string()))?;
        index.validate()?;
        Ok(index)
    }
}

pub fn save_index(index: &ScreenIndex, path: &Path) -> Result<(), IndexError> {
    let mut f = fs::File::create(path)?;
    f.write_all(&index.to_bytes())?;
    f.sync_all()?;
    Ok(())
}

pub fn load_index(path: &Path) -> Result<ScreenIndex, IndexError> {
    ScreenIndex::from_bytes(&fs::read(path)?)
}

/// What happened to each document during a build.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuildReport {
    pub accepted: usize,
    pub rejected: BTreeMap<RejectReason, usize>,
}

impl BuildReport {
    pub fn total_rejected(&self) -> usize {
        self.rejected.values().sum()
    }
}

/// Filters, relabels and decomposes every document, then aggregates the
/// accepted ones into an index. Output does not depend on document order.
pub fn build_index(docs: &[ScreenDoc], rules: &[LabelFixRule]) -> Result<(ScreenIndex, BuildReport), IndexError> {
    if docs.is_empty() {
        return Err(IndexError::EmptyCorpus);
    }
    let mut seen = HashSet::with_capacity(docs.len());
    for d in docs {
        if !seen.insert(d.id.as_str()) {
            return Err(IndexError::DuplicateId(d.id.clone()));
        }
        if d.width == 0 || d.height == 0 {
            return Err(IndexError::InvalidScreen(d.id.clone()));
        }
    }

    let processed: Vec<Result<Decomposed<'_>, RejectReason>> = docs
        .par_iter()
        .map(|d| {
            let prepared = prepare(d, rules);
            match verdict(&prepared) {
                FilterVerdict::Reject(r) => Err(r),
                FilterVerdict::Accept => {
                    let cov = decompose_prepared(&prepared);
                    if cov.is_empty() {
                        Err(RejectReason::NoHierarchy)
                    } else {
                        Ok((d.id.as_str(), cov))
                    }
                }
            }
        })
        .collect();

    let mut report = BuildReport::default();
    let mut accepted = Vec::new();
    for p in processed {
        match p {
            Ok(v) => accepted.push(v),
            Err(r) => *report.rejected.entry(r).or_default() += 1,
        }
    }
    report.accepted = accepted.len();
    accepted.sort_unstable_by(|a, b| a.0.cmp(b.0));
    let (ids, coverage): (Vec<String>, Vec<_>) = accepted.into_iter().map(|(id, c)| (id.to_string(), c)).unzip();
    Ok((ScreenIndex::from_parts(ids, coverage), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::screen::{default_label_fixes, ScreenElement};

    fn el(label: &str, bbox: [f64; 4]) -> ScreenElement {
        ScreenElement {
            label: label.into(),
            android_class: "View".into(),
            container_class: None,
            bbox,
        }
    }

    fn screen(id: &str, elements: Vec<ScreenElement>) -> ScreenDoc {
        ScreenDoc {
            id: id.into(),
            width: 400,
            height: 600,
            elements,
        }
    }

    fn small_corpus() -> Vec<ScreenDoc> {
        vec![
            screen(
                "b",
                vec![
                    el("menu", [0.0, 0.0, 40.0, 40.0]),
                    el("text", [0.0, 100.0, 200.0, 30.0]),
                ],
            ),
            screen(
                "a",
                vec![
                    el("menu", [300.0, 0.0, 40.0, 40.0]),
                    el("star", [10.0, 300.0, 40.0, 40.0]),
                ],
            ),
            screen("c", vec![el("text", [0.0, 0.0, 10.0, 10.0])]),
        ]
    }

    #[test]
    fn idf_examples() {
        assert!((idf(4, 2) - 3f64.ln()).abs() < 1e-12);
        assert!((idf(4, 4) - 2f64.ln()).abs() < 1e-12);
        assert!((idf(1, 1) - std::f64::consts::LN_2).abs() < 1e-12);
        let mut df = BTreeMap::new();
        df.insert(ElementClass::Text, 10);
        df.insert(ElementClass::Camera, 1);
        let w = compute_idf(10, &df);
        assert!(w[&ElementClass::Camera] > w[&ElementClass::Text]);
    }

    #[test]
    fn build_filters_and_sorts() {
        let (index, report) = build_index(&small_corpus(), &default_label_fixes()).unwrap();
        assert_eq!(index.screen_count(), 2);
        assert_eq!(index.screen_ids(), ["a", "b"]);
        assert_eq!(report.rejected[&RejectReason::SingleText], 1);
        assert_eq!(index.df(ElementClass::Menu), 2);
        assert_eq!(index.df(ElementClass::Text), 1);
        assert_eq!(index.df(ElementClass::Camera), 0);
        assert_eq!(index.idf(ElementClass::Camera), None);
        assert!((index.idf(ElementClass::Menu).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((index.idf(ElementClass::Star).unwrap() - 3f64.ln()).abs() < 1e-12);
        assert_eq!(index.screen_number("b"), Some(1));
        let cov = index.screen_coverage(0);
        assert_eq!(
            cov.iter().map(|c| c.0).collect::<Vec<_>>(),
            vec![ElementClass::Menu, ElementClass::Star]
        );
    }

    #[test]
    fn build_errors() {
        assert!(matches!(build_index(&[], &[]), Err(IndexError::EmptyCorpus)));
        let mut docs = small_corpus();
        docs.push(screen("a", vec![]));
        assert!(matches!(build_index(&docs, &[]), Err(IndexError::DuplicateId(id)) if id == "a"));
    }

    #[test]
    fn build_is_order_independent() {
        let rules = default_label_fixes();
        let mut docs = small_corpus();
        let (a, _) = build_index(&docs, &rules).unwrap();
        docs.reverse();
        let (b, _) = build_index(&docs, &rules).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bytes_round_trip_and_corruption() {
        let (index, _) = build_index(&small_corpus(), &default_label_fixes()).unwrap();
        let bytes = index.to_bytes();
        assert_eq!(&bytes[..7], b"PSDIDX1");
        assert_eq!(ScreenIndex::from_bytes(&bytes).unwrap(), index);

        let mut wrong_magic = bytes.clone();
        wrong_magic[0] = b'X';
        assert!(matches!(
            ScreenIndex::from_bytes(&wrong_magic),
            Err(IndexError::VersionMismatch)
        ));
        let mut wrong_version = bytes.clone();
        wrong_version[7] = 9;
        assert!(matches!(
            ScreenIndex::from_bytes(&wrong_version),
            Err(IndexError::VersionMismatch)
        ));

        for cut in [bytes.len() - 1, bytes.len() / 2, 9, 4] {
            assert!(
                matches!(
                    ScreenIndex::from_bytes(&bytes[..cut]),
                    Err(IndexError::ChecksumMismatch)
                ),
                "cut at {cut}"
            );
        }
        let mut flipped = bytes.clone();
        let mid = bytes.len() / 2;
        flipped[mid] ^= 0x40;
        assert!(matches!(
            ScreenIndex::from_bytes(&flipped),
            Err(IndexError::ChecksumMismatch)
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.bin");
        let (index, _) = build_index(&small_corpus(), &default_label_fixes()).unwrap();
        save_index(&index, &path).unwrap();
        assert_eq!(load_index(&path).unwrap(), index);
        assert!(matches!(
            load_index(&dir.path().join("missing")),
            Err(IndexError::Io(_))
        ));
    }
}
