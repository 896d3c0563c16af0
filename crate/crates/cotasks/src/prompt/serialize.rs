//! Inline serialization styles for values embedded in prompt text.
//!
//! [`json_inline`] writes strict JSON on one line with a space after each
//! comma and colon — the style the evaluation prompts show in their worked
//! examples. [`py_inline`] writes the same layout in Python-repr style
//! (single-quoted strings, `True`/`False`/`None`), matching the answer
//! lines of the final answering prompt.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

/// `serde_json` formatter producing `", "` and `": "` separators.
struct SpacedFormatter;

impl Formatter for SpacedFormatter {
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        if !first {
            writer.write_all(b", ")?;
        }
        Ok(())
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        if !first {
            writer.write_all(b", ")?;
        }
        Ok(())
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b": ")
    }
}

/// One-line JSON with spaced separators:
/// `{"entities": ["0_adult"], "timestamps": [1, 5]}`.
pub fn json_inline<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SpacedFormatter);
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// One-line Python-repr rendering with the same spacing:
/// `{'entities': ['0_adult'], 'timestamps': [1, 5]}`.
pub fn py_inline<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("in-memory serialization cannot fail");
    let mut out = String::new();
    write_py(&v, &mut out);
    out
}

fn write_py(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("None"),
        Value::Bool(true) => out.push_str("True"),
        Value::Bool(false) => out.push_str("False"),
        Value::Number(n) => out.push_str(&n.to_string()),
        Value::String(s) => write_py_str(s, out),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_py(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_py_str(k, out);
                out.push_str(": ");
                write_py(v, out);
            }
            out.push('}');
        }
    }
}

/// Python's repr quoting: single quotes unless the string contains a single
/// quote and no double quote.
fn write_py_str(s: &str, out: &mut String) {
    let quote = if s.contains('\'') && !s.contains('"') { '"' } else { '\'' };
    out.push(quote);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c == quote => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
    out.push(quote);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::BBox;
    use crate::cotask::answers::{CoTask1Answer, FrameObjects, LabeledBox, RelationTriple};

    #[test]
    fn json_inline_spaces_separators() {
        let a1 = CoTask1Answer {
            entities: vec!["0_adult".into(), "3_handbag".into()],
            timestamps: vec![1, 5, 9, 12, 15],
        };
        assert_eq!(
            json_inline(&a1),
            r#"{"entities": ["0_adult", "3_handbag"], "timestamps": [1, 5, 9, 12, 15]}"#
        );
    }

    #[test]
    fn json_inline_nested_frames() {
        let frames = vec![FrameObjects {
            frame: 1,
            objects: vec![
                LabeledBox { label: "0_adult".into(), bbox: BBox::new(262, 2, 400, 333) },
                LabeledBox { label: "3_handbag".into(), bbox: BBox::new(317, 87, 384, 207) },
            ],
        }];
        assert_eq!(
            json_inline(&frames),
            r#"[{"frame": 1, "objects": [{"0_adult": [262, 2, 400, 333]}, {"3_handbag": [317, 87, 384, 207]}]}]"#
        );
    }

    #[test]
    fn py_inline_single_quotes() {
        let a1 = CoTask1Answer {
            entities: vec!["0_adult".into(), "3_handbag".into()],
            timestamps: vec![1, 5, 9, 12, 15],
        };
        assert_eq!(
            py_inline(&a1),
            "{'entities': ['0_adult', '3_handbag'], 'timestamps': [1, 5, 9, 12, 15]}"
        );
    }

    #[test]
    fn py_inline_relation_triples() {
        let rels = vec![RelationTriple {
            head: "0_adult".into(),
            relation: "carry".into(),
            tail: "3_handbag".into(),
            start_frame: 1,
            end_frame: 15,
        }];
        assert_eq!(
            py_inline(&rels),
            "[{'head': '0_adult', 'relation': 'carry', 'tail': '3_handbag', 'start_frame': 1, 'end_frame': 15}]"
        );
    }

    #[test]
    fn py_inline_quoting_follows_repr_rules() {
        assert_eq!(py_inline(&"it's"), r#""it's""#);
        assert_eq!(py_inline(&"say \"hi\""), r#"'say "hi"'"#);
        assert_eq!(py_inline(&"both ' and \""), r#"'both \' and "'"#);
        assert_eq!(py_inline(&serde_json::json!(null)), "None");
        assert_eq!(py_inline(&serde_json::json!([true, false])), "[True, False]");
    }
}
