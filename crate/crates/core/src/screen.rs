//! Screen documents, label repair rules and corpus filtering.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classes::ElementClass;
use crate::grid::{coverage_of, TileCoverage};
use crate::stroke::NormBBox;

/// Bundled repair rules for mislabeled `input`/`image` elements.
pub const DEFAULT_LABEL_FIXES: &str = include_str!("../assets/label_fixes.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenElement {
    pub label: String,
    pub android_class: String,
    #[serde(default)]
    pub container_class: Option<String>,
    /// `[x, y, w, h]` in screen pixels.
    pub bbox: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenDoc {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub elements: Vec<ScreenElement>,
}

impl ScreenElement {
    /// Bbox clamped to the screen and normalized by its size; `None` if
    /// nothing is left after clamping.
    pub fn norm_bbox(&self, width: u32, height: u32) -> Option<NormBBox> {
        let (sw, sh) = (f64::from(width), f64::from(height));
        let [x, y, w, h] = self.bbox;
        if ![x, y, w, h].iter().all(|v| v.is_finite()) || sw <= 0.0 || sh <= 0.0 {
            return None;
        }
        let x0 = x.clamp(0.0, sw);
        let y0 = y.clamp(0.0, sh);
        let x1 = (x + w.max(0.0)).clamp(0.0, sw);
        let y1 = (y + h.max(0.0)).clamp(0.0, sh);
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        NormBBox::new(x0 / sw, y0 / sh, (x1 - x0) / sw, (y1 - y0) / sh)
    }

    fn is_webview(&self) -> bool {
        matches!(normalize_label(&self.label).as_str(), "web_view" | "webview")
            || simple_class_name(&self.android_class).ends_with("WebView")
    }
}

/// Labels eligible for repair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OldLabel {
    Input,
    Image,
}

impl OldLabel {
    fn matches(self, normalized: &str) -> bool {
        match self {
            OldLabel::Input => normalized == "input",
            OldLabel::Image => normalized == "image",
        }
    }
}

/// An element labeled one of `old_labels` whose own Android class is in
/// `element_classes`, or whose direct container's class is in
/// `container_classes`, is relabeled `new_label`. An empty set never matches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelFixRule {
    #[serde(default)]
    pub container_classes: BTreeSet<String>,
    #[serde(default)]
    pub element_classes: BTreeSet<String>,
    pub old_labels: BTreeSet<OldLabel>,
    pub new_label: ElementClass,
}

impl LabelFixRule {
    pub fn matches(&self, element: &ScreenElement) -> bool {
        let label = normalize_label(&element.label);
        if !self.old_labels.iter().any(|l| l.matches(&label)) {
            return false;
        }
        let own = simple_class_name(&element.android_class);
        if self.element_classes.contains(own) {
            return true;
        }
        element
            .container_class
            .as_deref()
            .map(simple_class_name)
            .is_some_and(|c| self.container_classes.contains(c))
    }
}

/// Parses a rules document (a JSON array, applied in order).
pub fn parse_label_fixes(text: &str) -> Result<Vec<LabelFixRule>, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn default_label_fixes() -> Vec<LabelFixRule> {
    parse_label_fixes(DEFAULT_LABEL_FIXES).expect("bundled label fixes parse")
}

/// `com.foo.widget.Outer$Inner` -> `Inner`.
pub fn simple_class_name(name: &str) -> &str {
    name.rsplit(['.', '$']).next().unwrap_or(name)
}

/// Lowercase with spaces and dashes folded to underscores.
pub fn normalize_label(label: &str) -> String {
    label
        .trim()
        .chars()
        .map(|c| match c {
            ' ' | '-' => '_',
            c => c.to_ascii_lowercase(),
        })
        .collect()
}

/// Fixed source-label vocabulary, consulted when no repair rule fires.
pub fn label_table(normalized: &str) -> Option<ElementClass> {
    use ElementClass as E;
    if let Ok(c) = normalized.parse::<ElementClass>() {
        return Some(c);
    }
    Some(match normalized {
        "icon" | "edit" | "more" | "refresh" => E::DefaultIcon,
        "background_image" | "picture" => E::Image,
        "close" => E::Cancel,
        "add" => E::Plus,
        "settings" => E::Setting,
        "arrow_backward" | "arrow_back" => E::Back,
        "arrow_forward" => E::Forward,
        "chevron_left" | "navigate_before" => E::LeftArrow,
        "expand_more" | "drop_down" => E::Dropdown,
        "play_arrow" => E::Play,
        "email" | "mail" => E::Envelope,
        "house" => E::Home,
        "on/off_switch" | "on_off_switch" | "toggle" => E::Switch,
        "check_box" => E::Checkbox,
        "seek_bar" => E::Slider,
        "textbutton" => E::TextButton,
        _ => return None,
    })
}

/// Class an element is indexed under, `None` when it is unmapped.
pub fn apply_label_fixes(element: &ScreenElement, rules: &[LabelFixRule]) -> Option<ElementClass> {
    rules
        .iter()
        .find(|r| r.matches(element))
        .map(|r| r.new_label)
        .or_else(|| label_table(&normalize_label(&element.label)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    SingleText,
    SingleImage,
    TextPlusImage,
    SingleWebview,
    WebviewMajority,
    NoHierarchy,
}

impl RejectReason {
    pub const ALL: [RejectReason; 6] = [
        RejectReason::SingleText,
        RejectReason::SingleImage,
        RejectReason::TextPlusImage,
        RejectReason::SingleWebview,
        RejectReason::WebviewMajority,
        RejectReason::NoHierarchy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RejectReason::SingleText => "single_text",
            RejectReason::SingleImage => "single_image",
            RejectReason::TextPlusImage => "text_plus_image",
            RejectReason::SingleWebview => "single_webview",
            RejectReason::WebviewMajority => "webview_majority",
            RejectReason::NoHierarchy => "no_hierarchy",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterVerdict {
    Accept,
    Reject(RejectReason),
}

/// An element that survived clamping, with its resolved class.
#[derive(Debug, Clone)]
pub(crate) struct PreparedElement {
    pub class: Option<ElementClass>,
    pub bbox: NormBBox,
    pub webview: bool,
}

pub(crate) fn prepare(doc: &ScreenDoc, rules: &[LabelFixRule]) -> Vec<PreparedElement> {
    doc.elements
        .iter()
        .filter_map(|e| {
            let bbox = e.norm_bbox(doc.width, doc.height)?;
            Some(PreparedElement {
                class: apply_label_fixes(e, rules),
                bbox,
                webview: e.is_webview(),
            })
        })
        .collect()
}

/// Area share above which a webview disqualifies its screen.
pub const WEBVIEW_MAJORITY: f64 = 0.5;

pub(crate) fn verdict(elements: &[PreparedElement]) -> FilterVerdict {
    use ElementClass as E;
    use FilterVerdict::Reject;
    let text_like = |e: &PreparedElement| !e.webview && e.class == Some(E::Text);
    let image_like = |e: &PreparedElement| !e.webview && e.class == Some(E::Image);
    match elements {
        [] => return Reject(RejectReason::NoHierarchy),
        [only] if only.webview => return Reject(RejectReason::SingleWebview),
        [only] if text_like(only) => return Reject(RejectReason::SingleText),
        [only] if image_like(only) => return Reject(RejectReason::SingleImage),
        [a, b] if (text_like(a) && image_like(b)) || (image_like(a) && text_like(b)) => {
            return Reject(RejectReason::TextPlusImage)
        }
        _ => {}
    }
    if elements.iter().any(|e| e.webview && e.bbox.area() > WEBVIEW_MAJORITY) {
        return Reject(RejectReason::WebviewMajority);
    }
    if elements.iter().all(|e| e.webview || e.class.is_none()) {
        return Reject(RejectReason::NoHierarchy);
    }
    FilterVerdict::Accept
}

/// Decides whether a screen is distinctive enough to index.
///
/// Elements are clamped to the screen first (empty ones dropped) and
/// relabeled with `rules`. Unmapped elements still count when testing the
/// single-element patterns.
pub fn filter_screen(doc: &ScreenDoc, rules: &[LabelFixRule]) -> FilterVerdict {
    verdict(&prepare(doc, rules))
}

/// Per-class tile coverage of an accepted screen, by ascending class.
pub fn tile_decompose(doc: &ScreenDoc, rules: &[LabelFixRule]) -> Vec<(ElementClass, TileCoverage)> {
    decompose_prepared(&prepare(doc, rules))
}

pub(crate) fn decompose_prepared(elements: &[PreparedElement]) -> Vec<(ElementClass, TileCoverage)> {
    let mut out = Vec::new();
    for &class in ElementClass::ALL {
        let rects: Vec<&NormBBox> = elements
            .iter()
            .filter(|e| !e.webview && e.class == Some(class))
            .map(|e| &e.bbox)
            .collect();
        if rects.is_empty() {
            continue;
        }
        let cov = coverage_of(rects);
        if !cov.is_empty() {
            out.push((class, cov));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(label: &str, class: &str, container: Option<&str>, bbox: [f64; 4]) -> ScreenElement {
        ScreenElement {
            label: label.into(),
            android_class: class.into(),
            container_class: container.map(Into::into),
            bbox,
        }
    }

    fn doc(elements: Vec<ScreenElement>) -> ScreenDoc {
        ScreenDoc {
            id: "s".into(),
            width: 1000,
            height: 1000,
            elements,
        }
    }

    #[test]
    fn bundled_rules_cover_all_patterns() {
        let text = DEFAULT_LABEL_FIXES;
        let raw: Vec<serde_json::Value> = serde_json::from_str(text).unwrap();
        let names: usize = raw
            .iter()
            .map(|r| r["container_classes"].as_array().unwrap().len() + r["element_classes"].as_array().unwrap().len())
            .sum();
        assert_eq!(names, 47);
        let rules = default_label_fixes();
        let targets: Vec<_> = rules.iter().map(|r| r.new_label).collect();
        use ElementClass as E;
        assert_eq!(targets, vec![E::Checkbox, E::Slider, E::Star, E::Switch, E::Search]);
    }

    #[test]
    fn rule_examples() {
        let rules = default_label_fixes();
        let cb = el("input", "android.support.v7.widget.AppCompatCheckBox", None, [0.0; 4]);
        assert_eq!(apply_label_fixes(&cb, &rules), Some(ElementClass::Checkbox));

        let star = el(
            "image",
            "com.app.RatingWidget",
            Some("android.widget.RatingBar"),
            [0.0; 4],
        );
        assert_eq!(apply_label_fixes(&star, &rules), Some(ElementClass::Star));

        let by_container = el("Image", "ImageView", Some("SeekBar"), [0.0; 4]);
        assert_eq!(apply_label_fixes(&by_container, &rules), Some(ElementClass::Slider));

        let map = el("map_view", "MapView", None, [0.0; 4]);
        assert_eq!(apply_label_fixes(&map, &rules), None);

        // only input/image labels are repaired
        let text = el("text", "CheckBox", None, [0.0; 4]);
        assert_eq!(apply_label_fixes(&text, &rules), Some(ElementClass::Text));
        let plain_input = el("input", "EditText", None, [0.0; 4]);
        assert_eq!(apply_label_fixes(&plain_input, &rules), None);
        let search = el("input", "SearchEditText", Some("LinearLayout"), [0.0; 4]);
        assert_eq!(apply_label_fixes(&search, &rules), Some(ElementClass::Search));
    }

    #[test]
    fn first_matching_rule_wins() {
        let rules: Vec<LabelFixRule> = serde_json::from_str(
            r#"[{"container_classes": [], "element_classes": ["X"], "old_labels": ["input"], "new_label": "star"},
                {"container_classes": [], "element_classes": ["X"], "old_labels": ["input"], "new_label": "plus"}]"#,
        )
        .unwrap();
        assert_eq!(
            apply_label_fixes(&el("input", "X", None, [0.0; 4]), &rules),
            Some(ElementClass::Star)
        );
    }

    #[test]
    fn label_table_aliases() {
        assert_eq!(label_table("icon"), Some(ElementClass::DefaultIcon));
        assert_eq!(
            label_table(&normalize_label("Text Button")),
            Some(ElementClass::TextButton)
        );
        assert_eq!(
            label_table(&normalize_label("On/Off Switch")),
            Some(ElementClass::Switch)
        );
        assert_eq!(label_table("web_view"), None);
    }

    #[test]
    fn filter_examples() {
        let rules = default_label_fixes();
        let single_text = doc(vec![el("text", "TextView", None, [0.0, 0.0, 100.0, 50.0])]);
        assert_eq!(
            filter_screen(&single_text, &rules),
            FilterVerdict::Reject(RejectReason::SingleText)
        );

        let webview = doc(vec![
            el("web_view", "android.webkit.WebView", None, [0.0, 0.0, 1000.0, 800.0]),
            el("text", "TextView", None, [0.0, 900.0, 100.0, 50.0]),
            el("menu", "ImageButton", None, [0.0, 850.0, 50.0, 50.0]),
        ]);
        assert_eq!(
            filter_screen(&webview, &rules),
            FilterVerdict::Reject(RejectReason::WebviewMajority)
        );

        let fine = doc(vec![
            el("menu", "ImageButton", None, [0.0, 0.0, 50.0, 50.0]),
            el("image", "ImageView", None, [0.0, 100.0, 500.0, 300.0]),
            el("text", "TextView", None, [0.0, 500.0, 300.0, 50.0]),
        ]);
        assert_eq!(filter_screen(&fine, &rules), FilterVerdict::Accept);
    }

    #[test]
    fn filter_other_patterns() {
        let rules = default_label_fixes();
        let r = |els| filter_screen(&doc(els), &rules);
        use FilterVerdict::Reject;
        assert_eq!(r(vec![]), Reject(RejectReason::NoHierarchy));
        assert_eq!(
            r(vec![el("image", "ImageView", None, [0.0, 0.0, 10.0, 10.0])]),
            Reject(RejectReason::SingleImage)
        );
        assert_eq!(
            r(vec![
                el("image", "ImageView", None, [0.0, 0.0, 10.0, 10.0]),
                el("text", "TextView", None, [0.0, 20.0, 10.0, 10.0]),
            ]),
            Reject(RejectReason::TextPlusImage)
        );
        assert_eq!(
            r(vec![el("web_view", "WebView", None, [0.0, 0.0, 100.0, 100.0])]),
            Reject(RejectReason::SingleWebview)
        );
        // exactly half is not a majority
        assert_eq!(
            r(vec![
                el("web_view", "WebView", None, [0.0, 0.0, 1000.0, 500.0]),
                el("menu", "ImageButton", None, [0.0, 600.0, 50.0, 50.0]),
            ]),
            FilterVerdict::Accept
        );
        // unmapped elements alone leave nothing to index
        assert_eq!(
            r(vec![
                el("map_view", "MapView", None, [0.0, 0.0, 10.0, 10.0]),
                el("input", "EditText", None, [0.0, 20.0, 10.0, 10.0]),
            ]),
            Reject(RejectReason::NoHierarchy)
        );
        // an element clamped to nothing is dropped before the checks
        assert_eq!(
            r(vec![
                el("text", "TextView", None, [0.0, 0.0, 10.0, 10.0]),
                el("menu", "ImageButton", None, [2000.0, 0.0, 10.0, 10.0]),
            ]),
            Reject(RejectReason::SingleText)
        );
    }

    #[test]
    fn decompose_groups_by_class() {
        let rules = default_label_fixes();
        let d = ScreenDoc {
            id: "s".into(),
            width: 400,
            height: 600,
            elements: vec![
                el("text", "TextView", None, [0.0, 0.0, 100.0, 100.0]),
                el("text", "TextView", None, [100.0, 0.0, 100.0, 100.0]),
                el("menu", "ImageButton", None, [300.0, 500.0, 100.0, 100.0]),
            ],
        };
        let cov = tile_decompose(&d, &rules);
        assert_eq!(cov.len(), 2);
        assert_eq!(cov[0].0, ElementClass::Menu);
        assert_eq!(cov[0].1.cells[0].tile, 23);
        assert_eq!(cov[1].0, ElementClass::Text);
        let tiles: Vec<_> = cov[1].1.cells.iter().map(|c| (c.tile, c.count)).collect();
        assert_eq!(tiles, vec![(0, 1), (1, 1)]);
    }

    #[test]
    fn norm_bbox_clamps() {
        let e = el("text", "T", None, [-50.0, 950.0, 200.0, 100.0]);
        let b = e.norm_bbox(1000, 1000).unwrap();
        assert_eq!([b.x, b.y, b.w, b.h], [0.0, 0.95, 0.15, 0.05]);
        assert!(el("t", "T", None, [10.0, 10.0, 0.0, 5.0]).norm_bbox(100, 100).is_none());
    }
}
