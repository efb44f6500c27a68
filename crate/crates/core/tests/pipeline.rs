use sketchscreen_core::doodle_eval::{parse_dataset, templates_as_dataset, write_dataset};
use sketchscreen_core::eval::{evaluate_search, parse_pairs, write_pairs};
use sketchscreen_core::index::{build_index, load_index, save_index};
use sketchscreen_core::query::{parse_sketch, Sketch};
use sketchscreen_core::recognizer::{classify_raw, TemplateRecognizer, TemplateSet, TEMPLATE_SPACE};
use sketchscreen_core::scorer::{score_screens, Hyperparams};
use sketchscreen_core::screen::default_label_fixes;
use sketchscreen_core::stroke::{Canvas, NormBBox, RawStroke};
use sketchscreen_core::synth::{generate_eval_pairs, generate_synthetic_corpus, PairSpec, RarityProfile};
use sketchscreen_core::{DoodleClass, ElementClass};

#[test]
fn corpus_to_index_file_to_evaluation() {
    let corpus = generate_synthetic_corpus(11, 500, &RarityProfile::rico()).unwrap();
    let (index, report) = build_index(&corpus.docs, &default_label_fixes()).unwrap();
    assert_eq!(report.accepted, 500);
    for (class, df) in &corpus.manifest.df {
        assert_eq!(index.df(*class), *df, "{class}");
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("idx.bin");
    save_index(&index, &path).unwrap();
    let loaded = load_index(&path).unwrap();
    assert_eq!(loaded, index);

    let pairs = generate_eval_pairs(
        &corpus.manifest,
        12,
        PairSpec {
            count: 40,
            ..PairSpec::default()
        },
    );
    let reparsed = parse_pairs(&write_pairs(&pairs)).unwrap();
    assert_eq!(reparsed.len(), pairs.len());
    for (a, b) in pairs.iter().zip(&reparsed) {
        assert_eq!(a.target_id, b.target_id);
        for (x, y) in a.sketch.elements().iter().zip(b.sketch.elements()) {
            assert_eq!(x.klass, y.klass);
            assert!((x.bbox.x - y.bbox.x).abs() < 1e-12 && (x.bbox.w - y.bbox.w).abs() < 1e-12);
        }
    }
    let direct = evaluate_search(&pairs, &index, &Hyperparams::DEFAULT, 10).unwrap();
    let from_disk = evaluate_search(&reparsed, &loaded, &Hyperparams::DEFAULT, 10).unwrap();
    assert_eq!(direct.hits, from_disk.hits);
    assert_eq!(direct.total, 40);
    assert!(direct.hits <= direct.total);
}

#[test]
fn drawn_doodles_query_like_a_sketch_file() {
    let set = TemplateSet::bundled();
    let recognizer = TemplateRecognizer::new(set.clone());
    let canvas = Canvas::new(360, 640);
    let corpus = generate_synthetic_corpus(21, 200, &RarityProfile::uniform()).unwrap();
    let (index, _) = build_index(&corpus.docs, &default_label_fixes()).unwrap();

    // draw a star template into the lower-right quarter of the canvas
    let space = f64::from(TEMPLATE_SPACE);
    let (ox, oy, size) = (200.0, 400.0, 120.0);
    let strokes: Vec<RawStroke> = set.templates(DoodleClass::Star)[0]
        .strokes
        .iter()
        .map(|s| {
            let pts: Vec<(f64, f64)> = s
                .iter()
                .map(|p| (ox + p.x / space * size, oy + p.y / space * size))
                .collect();
            RawStroke::from_xy(&pts)
        })
        .collect();
    let predictions = classify_raw(&recognizer, &strokes, canvas).unwrap();
    assert_eq!(predictions[0].klass, DoodleClass::Star);

    let bbox = NormBBox::new(ox / 360.0, oy / 640.0, size / 360.0, size / 640.0).unwrap();
    let drawn = Sketch::new().add_element(predictions[0].klass, bbox).unwrap();
    let file = parse_sketch(&format!(
        r#"{{"elements": [{{"class": "star", "bbox": [{}, {}, {}, {}]}}]}}"#,
        bbox.x, bbox.y, bbox.w, bbox.h
    ))
    .unwrap();
    assert_eq!(drawn.elements()[0].klass, ElementClass::Star);
    let a = score_screens(&drawn, &index, &Hyperparams::DEFAULT, 20).unwrap();
    let b = score_screens(&file, &index, &Hyperparams::DEFAULT, 20).unwrap();
    assert_eq!(a, b);
    assert!(!a.is_empty());
}

#[test]
fn template_dataset_round_trips() {
    let dataset = templates_as_dataset(&TemplateSet::bundled());
    let parsed = parse_dataset(&write_dataset(&dataset)).unwrap();
    assert_eq!(parsed, dataset);
    let labels: std::collections::BTreeSet<_> = parsed.iter().map(|d| d.label).collect();
    assert_eq!(labels.len(), DoodleClass::COUNT);
}
