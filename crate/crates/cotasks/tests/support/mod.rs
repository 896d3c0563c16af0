//! Shared helpers for the integration suites: golden-file comparison and
//! the worked-example slot values the transcriptions in `tests/golden/`
//! carry.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use cotasks::prompt::{parse_judge_score, render, TemplateId};

pub const Q0: &str = "What else does the man in yellow carry aside from a black laptop bag?";
pub const Q0_LOWER: &str = "what else does the man in yellow carry aside from a black laptop bag?";
pub const A1: &str = r#"{"entities": ["0_adult", "3_handbag"], "timestamps": [1, 5, 9, 12, 15]}"#;
pub const ENTITIES: &str = r#"["0_adult", "3_handbag"]"#;
pub const FRAMES: &str = "[1, 5, 9, 12, 15]";
pub const A2_FULL: &str = r#"[{"frame": 1, "objects": [{"label": "0_adult", "bbox": [262, 2, 400, 333]}, {"label": "3_handbag", "bbox": [294, 48, 393, 146]}]}, {"frame": 5, "objects": [{"label": "0_adult", "bbox": [355, 17, 520, 273]}, {"label": "3_handbag", "bbox": [386, 0, 495, 87]}]}, {"frame": 9, "objects": [{"label": "0_adult", "bbox": [369, 12, 480, 188]}]}, {"frame": 12, "objects": [{"label": "0_adult", "bbox": [331, 14, 421, 140]}]}, {"frame": 15, "objects": []}]"#;
pub const A2_ABBREVIATED: &str = r#"[{"frame": 1, ...}, {"frame": 5, ...}, {"frame": 9, "objects": [...]}, {"frame": 12, "objects": [...]}, {"frame": 15, "objects": []}]"#;
pub const A3_SPATIAL: &str = r#"[{"head": "0_adult", "relation": "next_to", "tail": "3_handbag", "start_frame": 1, "end_frame": 12}]"#;
pub const A1_PY: &str = "{'entities': ['0_adult', '3_handbag'], 'timestamps': [1, 5, 9, 12, 15]}";
pub const A2_PY: &str = "[{'frame': 1, 'objects': [{'label': '0_adult', 'bbox': [262, 2, 400, 333]}, {'label': '3_handbag', 'bbox': [294, 48, 393, 146]}]}, ...]";
pub const A3_PY: &str = "[{'head': '0_adult', 'relation': 'next_to', 'tail': '4_handbag', 'start_frame': 1, 'end_frame': 12}, ...]";
pub const A4_PY: &str = "[{'head': '0_adult', 'relation': 'carry', 'tail': '4_handbag', 'start_frame': 1, 'end_frame': 12}, ...]";

/// The normalization documented in `tests/golden/README.md`: CRLF to LF,
/// trailing whitespace stripped per line, exactly one final newline.
pub fn normalize(text: &str) -> String {
    let unified = text.replace("\r\n", "\n");
    let mut lines: Vec<&str> = unified.lines().map(|l| l.trim_end()).collect();
    while lines.last() == Some(&"") {
        lines.pop();
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

pub fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

/// Compare byte-for-byte after normalization, failing with the first
/// differing line so template drift is diagnosable.
pub fn assert_golden(name: &str, actual: &str) {
    let expected = normalize(&golden(name));
    let actual = normalize(actual);
    if actual == expected {
        return;
    }
    for (i, (a, e)) in actual.lines().zip(expected.lines()).enumerate() {
        assert_eq!(a, e, "{name}: first difference at line {}", i + 1);
    }
    panic!(
        "{name}: line counts differ (rendered {}, golden {})",
        actual.lines().count(),
        expected.lines().count()
    );
}

pub fn slots<'a>(pairs: &[(&'a str, &str)]) -> BTreeMap<&'a str, String> {
    pairs.iter().map(|(k, v)| (*k, v.to_string())).collect()
}

/// Render every template with its worked-example slot values and compare
/// each against its transcription. Covers all seven templates.
pub fn verify_all_golden_templates() {
    assert_golden("cotask1_gen.txt", TemplateId::Cotask1Gen.body());
    assert_golden("judge.txt", TemplateId::Judge.body());

    let c1 = render(TemplateId::Cotask1Eval, &slots(&[("contextual_question", Q0)])).unwrap();
    assert_golden("cotask1_eval.txt", &c1);

    let c2 = render(
        TemplateId::Cotask2Eval,
        &slots(&[("q0", Q0), ("a1", A1), ("entities", ENTITIES), ("frames", FRAMES)]),
    )
    .unwrap();
    assert_golden("cotask2_eval.txt", &c2);

    let c3 = render(
        TemplateId::Cotask3Eval,
        &slots(&[
            ("q0", Q0),
            ("a1", A1),
            ("a2", A2_FULL),
            ("entities", ENTITIES),
            ("frames", FRAMES),
        ]),
    )
    .unwrap();
    assert_golden("cotask3_eval.txt", &c3);

    let c4 = render(
        TemplateId::Cotask4Eval,
        &slots(&[
            ("q0", Q0),
            ("a1", A1),
            ("a2", A2_ABBREVIATED),
            ("a3", A3_SPATIAL),
            ("entities", ENTITIES),
            ("frames", FRAMES),
        ]),
    )
    .unwrap();
    assert_golden("cotask4_eval.txt", &c4);

    let fa = render(
        TemplateId::FinalAnswer,
        &slots(&[
            ("q0", Q0_LOWER),
            ("a1", A1_PY),
            ("a2", A2_PY),
            ("a3", A3_PY),
            ("a4", A4_PY),
        ]),
    )
    .unwrap();
    // The published figure closes with the worked example's completion; the
    // deployable template ends at "Respond:" (see tests/golden/README.md).
    let mut with_completion = normalize(&fa);
    assert!(with_completion.ends_with("Respond:\n"), "template must end inviting completion");
    with_completion.truncate(with_completion.len() - 1);
    with_completion.push_str(" book\n");
    assert_golden("final_answer.txt", &with_completion);
}

/// The judge template's three worked examples demonstrate the full scale;
/// the reply parser must read their marks back as 1, 3, 5.
pub fn verify_judge_worked_examples() {
    let body = TemplateId::Judge.body();
    let mut marks = Vec::new();
    for (i, block) in body.split("### Example").skip(1).enumerate() {
        let block = block.split("###").next().unwrap();
        assert!(block.contains("Your mark:"), "example {} has a mark line", i + 1);
        marks.push(parse_judge_score(block));
    }
    assert_eq!(marks, vec![Some(1), Some(3), Some(5)]);
}
