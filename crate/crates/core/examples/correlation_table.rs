//! Correlates each APT column of the bundled system table with the human
//! scores and prints the two rankings side by side.

use pronoun_eval::analysis::{correlate, rank_systems, ScoreTable};
use pronoun_eval::fixtures::SYSTEM_SCORES_TSV;

fn main() -> Result<(), pronoun_eval::analysis::AnalysisError> {
    let table = ScoreTable::parse_tsv(SYSTEM_SCORES_TSV)?;
    println!(
        "{:<8} {:>8} {:>9}   {:>8} {:>9}",
        "metric", "pearson", "spearman", "w/o ref", ""
    );
    for metric in ["APT-A+", "APT-B+", "APT-A-", "APT-B-"] {
        let all = correlate(&table, metric, "PROTEST", false)?;
        let without = correlate(&table, metric, "PROTEST", true)?;
        println!(
            "{metric:<8} {:>8.3} {:>9.3}   {:>8.3} {:>9.3}",
            all.pearson, all.spearman, without.pearson, without.spearman
        );
    }

    println!("\n{:<20} {:<20}", "APT-A+", "PROTEST");
    let apt = rank_systems(&table, "APT-A+")?;
    let human = rank_systems(&table, "PROTEST")?;
    for (a, h) in apt.iter().zip(&human) {
        let cell =
            |r: &pronoun_eval::analysis::RankedRow| format!("{}{} {}", r.rank, if r.tied { "=" } else { "" }, r.label);
        println!("{:<20} {:<20}", cell(a), cell(h));
    }
    Ok(())
}
