//! Full evaluation loop with mock endpoints: infer, judge, compare.
//!
//! Runs the ablation that motivates the whole toolkit: answer the same
//! questions with no subtask context (`baseline`), with grounding and
//! boxes (`ct12`), with relations (`ct34`), and with the full chain
//! (`ct14`), then judge every reply on the 1-5 rubric and render one
//! comparison table. The subject is an echo mock (it always returns the
//! reference answer) and the judge is an exact matcher, so every condition
//! scores 100.0 — the point here is the plumbing, not the numbers.
//!
//! ```sh
//! cargo run --example mock_evaluation
//! ```

use cotasks::config::PipelineConfig;
use cotasks::eval::ConditionId;
use cotasks::pipeline::{cmd_build, cmd_infer, cmd_judge, cmd_report};
use cotasks::synth::{nextqa_corpus, write_nextqa_corpus, NextqaSynthOptions};

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let corpus = nextqa_corpus(&NextqaSynthOptions {
        seed: 3,
        videos: 4,
        questions: 24,
        ..Default::default()
    })?;
    let (videos_dir, csv_path) = write_nextqa_corpus(&corpus, &dir.path().join("data"))?;

    let config = PipelineConfig::from_toml_str(&format!(
        r#"
            source = "nextqa"
            annotations_dir = "{}"
            questions_csv = "{}"
            grounding = "lexical"
            output_dir = "{}"
            cache_dir = "{}"

            [subject]
            kind = "mock_echo"
            model = "echo-model"

            [judge]
            kind = "mock_judge_exact"
            model = "exact-judge"
        "#,
        videos_dir.display(),
        csv_path.display(),
        dir.path().join("runs").display(),
        dir.path().join("cache").display(),
    ))?;

    let built = cmd_build(&config)?;
    println!("built {} instances in {}", built.stats.instances, built.run_dir.display());

    let mut run_dirs = Vec::new();
    for condition in ConditionId::FINAL_ANSWER_SET {
        let inferred = cmd_infer(&config, condition)?;
        let judged = cmd_judge(&config, &inferred.run_dir)?;
        let report = judged.report.expect("non-empty run");
        println!(
            "{condition:<8} -> {} predictions, overall {:.1}",
            inferred.predictions,
            report.overall.map(|m| m.mean).unwrap_or(f64::NAN)
        );
        run_dirs.push(inferred.run_dir);
    }

    let comparison = cmd_report(&config, &run_dirs)?;
    println!("\n{}", comparison.markdown);
    println!("report written to {}", comparison.run_dir.display());
    Ok(())
}
