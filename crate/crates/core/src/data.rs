//! Data files shipped with the crate.

use crate::generator::StyleLexicon;
use crate::knowledge::KnowledgeBase;

/// The six-concept regression fixture.
pub const TK6_TRIPLES: &str = include_str!("../data/tk6.jsonl");
/// The sixty-concept knowledge base.
pub const KB60_TRIPLES: &str = include_str!("../data/kb60.jsonl");
/// Default genre lexicon.
pub const LEXICON: &str = include_str!("../data/lexicon.jsonl");
/// Answer synonym table, variant → canonical.
pub const SYNONYMS: &str = include_str!("../data/synonyms.json");

pub fn tk6() -> KnowledgeBase {
    KnowledgeBase::from_text(TK6_TRIPLES).expect("bundled TK6 parses").0
}

pub fn kb60() -> KnowledgeBase {
    KnowledgeBase::from_text(KB60_TRIPLES).expect("bundled KB parses").0
}

pub fn lexicon() -> StyleLexicon {
    StyleLexicon::from_jsonl(LEXICON).expect("bundled lexicon parses")
}
