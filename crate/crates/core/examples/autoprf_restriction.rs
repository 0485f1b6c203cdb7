//! AutoPRF with and without the single-pronoun restriction.
//!
//! The `que` fixture aligns the source pronoun to both the complementiser
//! and the pronoun on each side, so the unrestricted count rewards the
//! complementiser too.

use pronoun_eval::autoprf::score_autoprf;
use pronoun_eval::fixtures::{bicycle_fixture, que_fixture, MiniCorpus};
use pronoun_eval::lexicon::PronounLexicon;

fn report(name: &str, fixture: &MiniCorpus, lexicon: &PronounLexicon) -> Result<(), pronoun_eval::ScoreError> {
    for restricted in [false, true] {
        let (score, counts) = score_autoprf(
            &fixture.items,
            &fixture.source,
            &fixture.mt,
            &fixture.reference,
            restricted,
            lexicon,
        )?;
        let c = &counts[0];
        println!(
            "{name:<8} restricted={restricted:<5} C={:?} R={:?} clip={}  P={:.3} R={:.3} F={:.3}",
            c.candidate, c.reference, score.total_clip, score.precision, score.recall, score.f
        );
    }
    Ok(())
}

fn main() -> Result<(), pronoun_eval::ScoreError> {
    let lexicon = PronounLexicon::french();
    report("que", &que_fixture(), &lexicon)?;
    report("bicycle", &bicycle_fixture(), &lexicon)?;
    Ok(())
}
