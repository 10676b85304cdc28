//! A generated corpus with disjoint class vocabularies, sized like the
//! small meaning-classification benchmarks (17-ish words, 3-4 word sentences).

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CLASS_ZERO: [&str; 8] = [
    "chef", "cooks", "tasty", "meal", "sauce", "dinner", "bakes", "bread",
];
const CLASS_ONE: [&str; 8] = [
    "coder", "writes", "useful", "software", "program", "app", "debugs", "code",
];

/// `count` sentences alternating between the two classes; each sentence has
/// three or four words drawn from its class's word list only.
pub fn separable_corpus(count: usize, seed: u64) -> Vec<(String, u8)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let label = (i % 2) as u8;
            let words: &[&str] = if label == 0 { &CLASS_ZERO } else { &CLASS_ONE };
            let len = rng.random_range(3..=4);
            let sentence: Vec<&str> = (0..len)
                .map(|_| *words.choose(&mut rng).expect("non-empty word list"))
                .collect();
            (sentence.join(" "), label)
        })
        .collect()
}

/// Total number of distinct words [`separable_corpus`] can emit.
pub fn separable_vocabulary_size() -> usize {
    CLASS_ZERO.len() + CLASS_ONE.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::tokenize;

    #[test]
    fn classes_use_disjoint_words() {
        let corpus = separable_corpus(100, 4);
        assert_eq!(corpus.len(), 100);
        for (text, label) in &corpus {
            let toks = tokenize(text);
            assert!((3..=4).contains(&toks.len()));
            let list: &[&str] = if *label == 0 { &CLASS_ZERO } else { &CLASS_ONE };
            assert!(toks.iter().all(|t| list.contains(&t.as_str())));
        }
        assert_eq!(corpus, separable_corpus(100, 4));
        assert!(separable_vocabulary_size() <= 20);
    }
}
