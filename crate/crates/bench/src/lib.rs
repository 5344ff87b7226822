//! Seeded inputs for the benchmarks.

use dscomp::mstdecode::ScoreMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random single-root head vector of `n` tokens.
pub fn random_heads<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut heads = vec![0; n];
    for k in 1..n {
        heads[order[k] - 1] = order[rng.random_range(0..k)];
    }
    heads
}

/// A CoNLL-U corpus of two-speaker dialogues with random trees of 1 to
/// `max_len` tokens.
pub fn corpus_text(dialogues: usize, utterances: usize, max_len: usize, seed: u64) -> String {
    const UPOS: [&str; 6] = ["NOUN", "VERB", "PRON", "ADV", "SCONJ", "PUNCT"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for d in 0..dialogues {
        for u in 1..=utterances {
            let speaker = if u == 1 || rng.random_bool(0.5) {
                "A"
            } else {
                "B"
            };
            let speaker = if u == 2 { "B" } else { speaker };
            out.push_str(&format!(
                "# dialogue_id = d{d:05}\n# utterance_id = {u}\n# speaker = {speaker}\n"
            ));
            let n = rng.random_range(1..=max_len);
            for (i, h) in random_heads(&mut rng, n).into_iter().enumerate() {
                let upos = UPOS[rng.random_range(0..UPOS.len())];
                out.push_str(&format!(
                    "{}\tw{}\t_\t{upos}\t_\t_\t{h}\tdep\t_\t_\n",
                    i + 1,
                    i + 1
                ));
            }
            out.push('\n');
        }
    }
    out
}

pub fn score_matrix(n: usize, seed: u64) -> ScoreMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scores = (0..=n)
        .map(|_| (0..n).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect();
    ScoreMatrix::new(scores).expect("finite scores")
}
