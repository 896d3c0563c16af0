//! Reader for NeXT-QA-style question CSVs.
//!
//! Required columns: `video`, `question`, `answer`, `qid`, `type`. When the
//! multiple-choice columns `a0`..`a4` are present, `answer` is the index of
//! the correct option and the answer text is resolved to that option;
//! otherwise `answer` is the free-form answer text. Extra columns (e.g.
//! `frame_count`, `width`, `height`) are ignored. Question ids are only
//! unique per video in this format, so records get the global id
//! `"{video}_{qid}"`.

use std::path::Path;

use serde::Deserialize;

use super::types::{QARecord, QType, Source};
use crate::error::CotasksError;

#[derive(Debug, Deserialize)]
struct RawRow {
    video: String,
    question: String,
    answer: String,
    qid: String,
    #[serde(rename = "type")]
    qtype: String,
    #[serde(default)]
    a0: Option<String>,
    #[serde(default)]
    a1: Option<String>,
    #[serde(default)]
    a2: Option<String>,
    #[serde(default)]
    a3: Option<String>,
    #[serde(default)]
    a4: Option<String>,
}

fn parse_row(row: RawRow, what: &str, line: usize) -> Result<QARecord, CotasksError> {
    let bad = |detail: String| CotasksError::Parse { what: format!("{what} row {line}"), detail };

    let qtype = QType::parse(row.qtype.trim())
        .ok_or_else(|| bad(format!("unknown question type {:?}", row.qtype)))?;

    let options: Vec<String> = [&row.a0, &row.a1, &row.a2, &row.a3, &row.a4]
        .into_iter()
        .flatten()
        .cloned()
        .collect();

    let (answer, mc_options) = if options.is_empty() {
        (row.answer.trim().to_string(), None)
    } else {
        let idx: usize = row
            .answer
            .trim()
            .parse()
            .map_err(|_| bad(format!("answer {:?} is not an option index", row.answer)))?;
        let text = options
            .get(idx)
            .ok_or_else(|| bad(format!("answer index {idx} out of range for {} options", options.len())))?
            .clone();
        (text, Some(options))
    };

    Ok(QARecord {
        qid: format!("{}_{}", row.video, row.qid),
        video_id: row.video,
        question: row.question.trim().to_string(),
        answer,
        qtype,
        source: Source::Nextqa,
        mc_options,
        star: None,
    })
}

/// Parse a question CSV from a string.
pub fn parse_nextqa_questions_str(text: &str, what: &str) -> Result<Vec<QARecord>, CotasksError> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(text.as_bytes());
    let mut records = Vec::new();
    for (i, row) in reader.deserialize::<RawRow>().enumerate() {
        let line = i + 2; // 1-based, after the header row
        let row = row.map_err(|e| CotasksError::Parse {
            what: format!("{what} row {line}"),
            detail: e.to_string(),
        })?;
        records.push(parse_row(row, what, line)?);
    }
    Ok(records)
}

/// Read and parse a question CSV file.
pub fn parse_nextqa_questions(path: &Path) -> Result<Vec<QARecord>, CotasksError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CotasksError::io(path.display().to_string(), e))?;
    parse_nextqa_questions_str(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_multiple_choice_rows() {
        let csv = "\
video,frame_count,width,height,question,answer,qid,type,a0,a1,a2,a3,a4
4814320993,128,640,360,what else does the man carry,2,4,DO,umbrella,phone,handbag,box,nothing
4814320993,128,640,360,why did the baby cry,0,7,CW,hungry,fell down,lost toy,scared,sleepy
";
        let records = parse_nextqa_questions_str(csv, "test.csv").unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].qid, "4814320993_4");
        assert_eq!(records[0].video_id, "4814320993");
        assert_eq!(records[0].answer, "handbag");
        assert_eq!(records[0].qtype, QType::DO);
        assert_eq!(records[0].mc_options.as_ref().unwrap().len(), 5);
        assert_eq!(records[1].answer, "hungry");
        assert_eq!(records[1].qtype, QType::CW);
    }

    #[test]
    fn parses_open_ended_rows_without_option_columns() {
        let csv = "\
video,question,answer,qid,type
100,what is the baby holding,a toy,1,DO
";
        let records = parse_nextqa_questions_str(csv, "test.csv").unwrap();
        assert_eq!(records[0].answer, "a toy");
        assert!(records[0].mc_options.is_none());
    }

    #[test]
    fn rejects_unknown_type_with_row_number() {
        let csv = "\
video,question,answer,qid,type
100,what,a,1,ZZ
";
        let err = parse_nextqa_questions_str(csv, "test.csv").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2") && msg.contains("ZZ"), "{msg}");
    }

    #[test]
    fn rejects_out_of_range_answer_index() {
        let csv = "\
video,question,answer,qid,type,a0,a1,a2,a3,a4
100,what,9,1,DC,one,two,three,four,five
";
        let err = parse_nextqa_questions_str(csv, "test.csv").unwrap_err();
        assert!(err.to_string().contains("out of range"), "{err}");
    }
}
