//! Generates one riddle per (concept, genre) over the bundled knowledge base
//! and prints the answer-set size table.

use riddler::generator::{generate_batch, GeneratorConfig, Genre};
use riddler::validator::{ambiguity_stats, answer_set};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2025);
    let kb = riddler::data::kb60();
    let concepts: Vec<String> = kb.concepts().map(|c| c.to_string()).collect();
    let batch = generate_batch(&kb, &concepts, &Genre::ALL, &GeneratorConfig::default(), seed);
    let sets: Vec<_> = batch.riddles.iter().map(|r| answer_set(&kb, r).expect("riddles have clues")).collect();
    for s in &batch.skipped {
        println!("skipped {} / {}: {}", s.concept, s.genre, s.reason);
    }
    print!("{}", ambiguity_stats(&batch.riddles, &sets).expect("batch is non-empty").render_table());
}
