//! Grows a knowledge base one interaction at a time: teach two categories,
//! ask about a third kind of instance, then correct the mistake.
//!
//!     cargo run --example teach_and_ask

use viewgrasp::learner::KnowledgeBase;
use viewgrasp::representation::FeatureVector;

fn fv(values: &[f64]) -> FeatureVector {
    FeatureVector::normalized(values.to_vec()).expect("positive values")
}

fn main() -> viewgrasp::Result<()> {
    let mut kb = KnowledgeBase::new(0.01)?;
    kb.teach("mug", &[fv(&[5.0, 1.0, 1.0]), fv(&[4.0, 1.0, 2.0])])?;
    kb.teach("plate", &[fv(&[1.0, 5.0, 1.0]), fv(&[1.0, 4.0, 1.0])])?;

    let bowl = fv(&[1.0, 2.0, 6.0]);
    let guess = kb.classify(&bowl)?;
    println!("asked about a bowl, learner says {}", guess.label);
    for (label, score) in &guess.log_scores {
        println!("  {label}: {score:.3}");
    }

    // A category taught with fewer instances than its rivals starts with a
    // smaller prior, so teach as many as the others.
    kb.teach("bowl", &[bowl.clone(), fv(&[1.0, 1.0, 5.0])])?;
    println!("after teaching: {}", kb.classify(&bowl)?.label);

    let deep_bowl = fv(&[2.0, 1.0, 7.0]);
    let guess = kb.classify(&deep_bowl)?.label;
    if guess != "bowl" {
        kb.correct("bowl", &deep_bowl)?;
    }
    println!("deep bowl: {guess}");
    for c in kb.categories() {
        println!("{} has {} instances", c.label, c.n);
    }
    Ok(())
}
