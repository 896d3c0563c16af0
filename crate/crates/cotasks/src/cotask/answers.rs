//! Answer payloads for the four chained subtasks.
//!
//! Serialized field order is part of the contract — these JSON shapes
//! appear verbatim inside rendered prompts:
//!
//! - A1: `{"entities": ["0_adult"], "timestamps": [1, 5]}`
//! - A2: `[{"frame": 1, "objects": [{"0_adult": [262, 2, 400, 333]}]}]`
//! - A3/A4: `[{"head": "0_adult", "relation": "beside", "tail":
//!   "3_handbag", "start_frame": 1, "end_frame": 15}]`

use std::collections::BTreeSet;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::annotation::BBox;

/// Frame-localization answer: which entities matter and which sampled
/// timestamps (1-based) show the queried moment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoTask1Answer {
    #[serde(alias = "objects")]
    pub entities: Vec<String>,
    pub timestamps: Vec<u32>,
}

/// Hard ceiling on how many timestamps an A1 may carry.
pub const DEFAULT_TIMESTAMP_CAP: usize = 16;

impl CoTask1Answer {
    /// Check the structural invariants: at least one entity, every entity a
    /// known catalog label, 1..=cap timestamps, strictly increasing, each
    /// within `1..=max_timestamp`. Returns every problem found, phrased so
    /// it can be sent back to a model as a correction.
    pub fn check(
        &self,
        catalog_labels: &BTreeSet<String>,
        max_timestamp: u32,
        cap: usize,
    ) -> Result<(), String> {
        let mut problems = Vec::new();
        if self.entities.is_empty() {
            problems.push("entities must not be empty".to_string());
        }
        for e in &self.entities {
            if !catalog_labels.contains(e) {
                problems.push(format!("entity {e:?} is not in the catalog"));
            }
        }
        if self.timestamps.is_empty() {
            problems.push("timestamps must not be empty".to_string());
        }
        if self.timestamps.len() > cap {
            problems.push(format!("{} timestamps exceed the maximum of {cap}", self.timestamps.len()));
        }
        for w in self.timestamps.windows(2) {
            if w[0] >= w[1] {
                problems.push(format!("timestamps must be strictly increasing ({} then {})", w[0], w[1]));
                break;
            }
        }
        for &t in &self.timestamps {
            if t < 1 || t > max_timestamp {
                problems.push(format!("timestamp {t} outside 1..={max_timestamp}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems.join("; "))
        }
    }
}

/// Uniformly thin a strictly-increasing timestamp list down to `cap`
/// entries by keeping index `floor(j * m / cap)` for `j in 0..cap`.
pub fn cap_timestamps(timestamps: &[u32], cap: usize) -> Vec<u32> {
    let m = timestamps.len();
    if m <= cap || cap == 0 {
        return timestamps.to_vec();
    }
    (0..cap).map(|j| timestamps[j * m / cap]).collect()
}

/// One entity's box in one frame, serialized as a single-entry map
/// `{"<label>": [x1, y1, x2, y2]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledBox {
    pub label: String,
    pub bbox: BBox,
}

impl Serialize for LabeledBox {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(1))?;
        map.serialize_entry(&self.label, &self.bbox)?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for LabeledBox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = LabeledBox;
            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a single-entry map from entity label to [x1, y1, x2, y2]")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let (label, bbox): (String, BBox) = access
                    .next_entry()?
                    .ok_or_else(|| serde::de::Error::invalid_length(0, &self))?;
                if access.next_entry::<String, BBox>()?.is_some() {
                    return Err(serde::de::Error::invalid_length(2, &self));
                }
                Ok(LabeledBox { label, bbox })
            }
        }
        deserializer.deserialize_map(V)
    }
}

/// Tracking answer element: every tracked entity's box in one timestamp.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameObjects {
    pub frame: u32,
    pub objects: Vec<LabeledBox>,
}

/// Relation-extraction answer element. Frames are inclusive timestamps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationTriple {
    pub head: String,
    pub relation: String,
    pub tail: String,
    pub start_frame: u32,
    pub end_frame: u32,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a1_serializes_entities_then_timestamps() {
        let a1 = CoTask1Answer {
            entities: vec!["0_adult".into(), "3_handbag".into()],
            timestamps: vec![1, 5, 9],
        };
        assert_eq!(
            serde_json::to_string(&a1).unwrap(),
            r#"{"entities":["0_adult","3_handbag"],"timestamps":[1,5,9]}"#
        );
    }

    #[test]
    fn a1_accepts_objects_as_alias_for_entities() {
        let a1: CoTask1Answer =
            serde_json::from_str(r#"{"objects": ["0_baby"], "timestamps": [2]}"#).unwrap();
        assert_eq!(a1.entities, vec!["0_baby"]);
    }

    #[test]
    fn labeled_box_is_a_single_entry_map() {
        let b = LabeledBox { label: "0_adult".into(), bbox: BBox::new(262, 2, 400, 333) };
        let json = serde_json::to_string(&b).unwrap();
        assert_eq!(json, r#"{"0_adult":[262,2,400,333]}"#);
        assert_eq!(serde_json::from_str::<LabeledBox>(&json).unwrap(), b);
        assert!(serde_json::from_str::<LabeledBox>(r#"{"a":[1,1,2,2],"b":[1,1,2,2]}"#).is_err());
        assert!(serde_json::from_str::<LabeledBox>("{}").is_err());
    }

    #[test]
    fn frame_objects_shape() {
        let f = FrameObjects {
            frame: 1,
            objects: vec![LabeledBox { label: "3_handbag".into(), bbox: BBox::new(317, 87, 384, 207) }],
        };
        assert_eq!(
            serde_json::to_string(&f).unwrap(),
            r#"{"frame":1,"objects":[{"3_handbag":[317,87,384,207]}]}"#
        );
    }

    #[test]
    fn relation_triple_field_order() {
        let r = RelationTriple {
            head: "0_adult".into(),
            relation: "carry".into(),
            tail: "3_handbag".into(),
            start_frame: 1,
            end_frame: 15,
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"head":"0_adult","relation":"carry","tail":"3_handbag","start_frame":1,"end_frame":15}"#
        );
    }

    #[test]
    fn cap_keeps_short_lists_and_thins_long_ones() {
        let short: Vec<u32> = (1..=16).collect();
        assert_eq!(cap_timestamps(&short, 16), short);

        let long: Vec<u32> = (1..=40).collect();
        let capped = cap_timestamps(&long, 16);
        // floor(j * 40 / 16) for j in 0..16, applied to values 1..=40.
        let expected: Vec<u32> =
            vec![0, 2, 5, 7, 10, 12, 15, 17, 20, 22, 25, 27, 30, 32, 35, 37].into_iter().map(|i| i + 1).collect();
        assert_eq!(capped, expected);
        assert!(capped.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn check_catches_each_defect() {
        let labels: BTreeSet<String> = ["0_adult".to_string(), "3_handbag".to_string()].into();
        let good = CoTask1Answer { entities: vec!["0_adult".into()], timestamps: vec![1, 64] };
        assert!(good.check(&labels, 64, 16).is_ok());

        let unknown = CoTask1Answer { entities: vec!["9_dog".into()], timestamps: vec![1] };
        assert!(unknown.check(&labels, 64, 16).unwrap_err().contains("not in the catalog"));

        let empty = CoTask1Answer { entities: vec![], timestamps: vec![] };
        let msg = empty.check(&labels, 64, 16).unwrap_err();
        assert!(msg.contains("entities must not be empty") && msg.contains("timestamps must not be empty"));

        let unsorted = CoTask1Answer { entities: vec!["0_adult".into()], timestamps: vec![5, 5] };
        assert!(unsorted.check(&labels, 64, 16).unwrap_err().contains("strictly increasing"));

        let out = CoTask1Answer { entities: vec!["0_adult".into()], timestamps: vec![0, 70] };
        assert!(out.check(&labels, 64, 16).unwrap_err().contains("outside"));

        let many = CoTask1Answer { entities: vec!["0_adult".into()], timestamps: (1..=17).collect() };
        assert!(many.check(&labels, 64, 16).unwrap_err().contains("exceed the maximum"));
    }
}
