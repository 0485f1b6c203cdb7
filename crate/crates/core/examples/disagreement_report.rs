//! Rebuilds the per-category disagreement table from a synthetic set of
//! judgments whose joint counts follow the published study.

use pronoun_eval::analysis::disagreement_report;
use pronoun_eval::fixtures::{disagreement_fixture, published_joint_counts};

fn main() -> Result<(), pronoun_eval::analysis::AnalysisError> {
    let fixture = disagreement_fixture(&published_joint_counts());
    println!(
        "{} pronouns, {} APT results, {} judgment records\n",
        fixture.suite.len(),
        fixture.apt_results.len(),
        fixture.judgments.len()
    );
    let report = disagreement_report(&fixture.apt_results, &fixture.judgments, &fixture.suite)?;
    print!("{}", report.to_text());
    Ok(())
}
