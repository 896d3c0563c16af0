//! Situation-graph corpora: native grounding and threshold accuracy.
//!
//! Situation-graph questions arrive already grounded — each question names
//! its entities and keyframes — so subtask 1 is read off the source instead
//! of inferred. Their score report additionally carries an accuracy figure:
//! the fraction of judged answers rated at or above a threshold.
//!
//! ```sh
//! cargo run --example star_pipeline
//! ```

use cotasks::annotation::read_ndjson;
use cotasks::config::PipelineConfig;
use cotasks::cotask::{CoTaskBundle, Provenance};
use cotasks::eval::ConditionId;
use cotasks::pipeline::{cmd_build, cmd_infer, cmd_judge, BUNDLES_FILE};
use cotasks::synth::{star_corpus, write_star_corpus, StarSynthOptions};

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let corpus = star_corpus(&StarSynthOptions {
        seed: 9,
        videos: 5,
        questions: 20,
        ..Default::default()
    })?;
    let videos_dir = write_star_corpus(&corpus, &dir.path().join("data"))?;
    println!("wrote {} situation-graph files", corpus.videos.len());

    let config = PipelineConfig::from_toml_str(&format!(
        r#"
            source = "star"
            annotations_dir = "{}"
            grounding = "star_direct"
            output_dir = "{}"

            [subject]
            kind = "mock_echo"
            model = "echo-model"

            [judge]
            kind = "mock_judge_exact"
            model = "exact-judge"
        "#,
        videos_dir.display(),
        dir.path().join("runs").display(),
    ))?;

    let built = cmd_build(&config)?;
    println!("{}", built.stats_table);

    // Every bundle records where its grounding came from.
    let bundles: Vec<CoTaskBundle> = read_ndjson(&built.run_dir.join(BUNDLES_FILE))?;
    let native = bundles.iter().filter(|b| b.provenance == Provenance::StarDirect).count();
    println!("{native}/{} bundles grounded straight from the source graphs", bundles.len());
    let sample = &bundles[0];
    println!(
        "example: {} grounds {:?} on timestamps {:?}",
        sample.qid, sample.a1.entities, sample.a1.timestamps
    );

    let inferred = cmd_infer(&config, ConditionId::Ct14)?;
    let judged = cmd_judge(&config, &inferred.run_dir)?;
    let report = judged.report.expect("non-empty run");
    if let Some(star) = report.star {
        println!(
            "\nthreshold accuracy: {}/{} rated >= {} -> {:.1}%",
            star.hits, star.judged, star.threshold, star.accuracy
        );
    }
    Ok(())
}
