//! Build an instruction dataset from a corpus on disk, end to end.
//!
//! This drives the same code path as `cotasks build` / `validate` / `stats`:
//! parse every annotation file, sample timelines, construct the four-answer
//! chain per question, expand to instances, and write the run directory.
//! The corpus here is synthetic so the example is self-contained; point
//! `annotations_dir` / `questions_csv` at real files to build from them.
//!
//! ```sh
//! cargo run --example build_dataset
//! ```

use cotasks::config::PipelineConfig;
use cotasks::pipeline::{cmd_build, cmd_stats, cmd_validate};
use cotasks::synth::{nextqa_corpus, write_nextqa_corpus, NextqaSynthOptions};

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;

    // Generate and write a small trajectory corpus: one JSON document per
    // video plus one multiple-choice question CSV.
    let corpus = nextqa_corpus(&NextqaSynthOptions {
        seed: 7,
        videos: 6,
        questions: 48,
        ..Default::default()
    })?;
    let (videos_dir, csv_path) = write_nextqa_corpus(&corpus, &dir.path().join("data"))?;
    println!("wrote {} annotation files + {}", corpus.videos.len(), csv_path.display());

    let config = PipelineConfig::from_toml_str(&format!(
        r#"
            source = "nextqa"
            annotations_dir = "{}"
            questions_csv = "{}"
            grounding = "lexical"
            k = 32
            output_dir = "{}"
        "#,
        videos_dir.display(),
        csv_path.display(),
        dir.path().join("runs").display(),
    ))?;

    let built = cmd_build(&config)?;
    println!("\nbuild run: {}", built.run_dir.display());
    println!("{}", built.stats_table);

    // Re-check every bundle on disk against the schema bounds recorded in
    // the run manifest; a clean dataset reports zero violations.
    let checked = cmd_validate(&built.run_dir)?;
    println!(
        "validated {} bundles: {}",
        checked.checked,
        if checked.is_clean() { "clean" } else { "VIOLATIONS" }
    );
    for violation in checked.violations.iter().take(5) {
        println!("  {}: {} {}", violation.qid, violation.code, violation.detail);
    }

    // The stats command re-renders the same table from stats.json later.
    let (stats, _table) = cmd_stats(&built.run_dir)?;
    println!(
        "\n{} questions -> {} bundles -> {} instances ({} relations dropped by sampling)",
        stats.questions, stats.bundles, stats.instances, stats.dropped_relations
    );

    let listing = std::fs::read_dir(&built.run_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect::<Vec<_>>();
    println!("run directory files: {listing:?}");
    Ok(())
}
