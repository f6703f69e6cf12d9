mod common;

use std::sync::OnceLock;

use common::kb;
use proptest::prelude::*;
use riddler::generator::{generate_batch, generate_riddle, names_concept, GeneratorConfig, Genre, Riddle};
use riddler::knowledge::KnowledgeBase;
use riddler::validator::{answer_set, satisfies};

fn kb60() -> &'static KnowledgeBase {
    static KB: OnceLock<KnowledgeBase> = OnceLock::new();
    KB.get_or_init(riddler::data::kb60)
}

fn check_invariants(kb: &KnowledgeBase, r: &Riddle) -> Result<(), TestCaseError> {
    prop_assert!(r.well_formed().is_ok(), "{:?}", r.well_formed());
    for (position, clue) in r.clues.iter().enumerate() {
        prop_assert!(satisfies(kb, &r.intended, &clue.predicate));
        prop_assert!(!names_concept(&clue.surface, r.intended.as_str()), "{}", clue.surface);
        let exact = match r.genre {
            Genre::Descriptive => true,
            Genre::Metaphorical | Genre::Poetic => false,
            Genre::Humorous | Genre::Situational => position == 0,
        };
        prop_assert_eq!(clue.predicate.is_exact(), exact);
    }
    prop_assert!(answer_set(kb, r).unwrap().answers.contains(&r.intended));
    Ok(())
}

proptest! {
    #[test]
    fn bundled_kb_riddles_hold_invariants(seed in any::<u64>(), concept in 0usize..60, genre in prop::sample::select(Genre::ALL.to_vec())) {
        let kb = kb60();
        let c = kb.concepts().nth(concept).unwrap().clone();
        let config = GeneratorConfig::default();
        let r = generate_riddle(kb, &c, genre, &config, seed).unwrap();
        check_invariants(kb, &r)?;
        prop_assert_eq!(r.clues.len(), 3);
        prop_assert_eq!(generate_riddle(kb, &c, genre, &config, seed).unwrap(), r);
    }

    #[test]
    fn random_kb_batches_hold_invariants(kb in kb(), seed in any::<u64>(), clues in 1usize..6) {
        let concepts: Vec<String> = kb.concepts().map(|c| c.to_string()).collect();
        let config = GeneratorConfig::default().with_clue_count(clues);
        let batch = generate_batch(&kb, &concepts, &Genre::ALL, &config, seed);
        prop_assert_eq!(batch.riddles.len() + batch.skipped.len(), concepts.len() * 5);
        for r in &batch.riddles {
            check_invariants(&kb, r)?;
            prop_assert!(r.clues.len() <= clues);
        }
        let again = generate_batch(&kb, &concepts, &Genre::ALL, &config, seed);
        prop_assert_eq!(again, batch);
    }
}
