//! Render the fixed prompt templates and parse replies back.
//!
//! Every prompt the toolkit sends — subtask generation, the four eval
//! probes, the final answer, and the judge rubric — is a fixed template
//! with `{{slot}}` markers, shipped as an asset and frozen by checksum.
//! Replies come back as text and are parsed into typed answers.
//!
//! ```sh
//! cargo run --example render_prompts
//! ```

use std::collections::BTreeMap;

use cotasks::prompt::{parse_judge_score, parse_phrase, render, TemplateId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Each template declares which slots it requires.
    println!("available templates:");
    for id in TemplateId::ALL {
        let spec = id.spec();
        println!("  {:<12} requires {:?}", id.name(), spec.required);
    }

    // The final-answer prompt: the question plus whatever subtask answers
    // the active condition injects (here the full chain placeholder text).
    let slots: BTreeMap<&str, String> = BTreeMap::from([
        ("q0", "what does the adult do with the handbag?".to_string()),
        ("a1", r#"{"entities": ["0_adult", "1_handbag"], "timestamps": [3, 7, 11]}"#.to_string()),
        ("a2", "[{\"frame\": 3, \"objects\": [{\"0_adult\": [10, 40, 90, 300]}]}]".to_string()),
        ("a3", "[[\"0_adult\", \"next_to\", \"1_handbag\", 3, 11]]".to_string()),
        ("a4", "[[\"0_adult\", \"carry\", \"1_handbag\", 3, 11]]".to_string()),
    ]);
    let prompt = render(TemplateId::FinalAnswer, &slots)?;
    println!("\n--- final answer prompt ---\n{prompt}");

    // Model replies are free text; the parsers normalize them.
    let reply = "  The adult carries the handbag.\n";
    println!("parsed phrase: {:?}", parse_phrase(reply));

    // The judge replies in prose; the score parser accepts the canonical
    // `Your mark: N` line and falls back to the last standalone 1-5 rating.
    for reply in ["Your mark: 4", "I would rate this 3 out of 5.", "no rating here"] {
        println!("judge reply {reply:?} -> {:?}", parse_judge_score(reply));
    }
    Ok(())
}
