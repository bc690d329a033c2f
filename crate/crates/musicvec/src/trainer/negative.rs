//! Unigram^power negative-sampling table.

use rand::Rng;

use crate::corpus::Vocabulary;

use super::TrainError;

/// Sampling table where each word occupies a contiguous run of slots
/// proportional to count^power, rounded by largest remainder so every word is
/// within ±1 slot of exact proportionality. Drawing a uniform slot index
/// samples the negative distribution.
pub struct NegativeTable {
    slots: Box<[u32]>,
}

impl NegativeTable {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[u32] {
        &self.slots
    }

    /// Draws one word index from the unigram^power distribution.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.slots[rng.random_range(0..self.slots.len())] as usize
    }
}

/// Builds the negative table with largest-remainder apportionment: floor every
/// word's exact share, then hand the leftover slots to the largest fractional
/// remainders (ties to the lower word index).
pub fn build_negative_table(
    vocab: &Vocabulary,
    power: f64,
    size: usize,
) -> Result<NegativeTable, TrainError> {
    let v = vocab.len();
    if size < v {
        return Err(TrainError::TableTooSmall {
            size,
            vocab_size: v,
        });
    }
    let weights: Vec<f64> = (0..v)
        .map(|i| (vocab.count(i) as f64).powf(power))
        .collect();
    let total: f64 = weights.iter().sum();

    let mut slots_per_word = vec![0usize; v];
    let mut remainders = vec![0f64; v];
    let mut assigned = 0usize;
    for i in 0..v {
        let share = weights[i] / total * size as f64;
        let floor = share.floor();
        slots_per_word[i] = floor as usize;
        remainders[i] = share - floor;
        assigned += slots_per_word[i];
    }
    let mut by_remainder: Vec<usize> = (0..v).collect();
    by_remainder.sort_by(|&a, &b| remainders[b].total_cmp(&remainders[a]).then(a.cmp(&b)));
    for &i in by_remainder.iter().take(size - assigned) {
        slots_per_word[i] += 1;
    }

    let mut slots = Vec::with_capacity(size);
    for (word, &n) in slots_per_word.iter().enumerate() {
        slots.resize(slots.len() + n, word as u32);
    }
    debug_assert_eq!(slots.len(), size);
    Ok(NegativeTable {
        slots: slots.into_boxed_slice(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, Document};

    fn vocab_with_counts(counts: &[(&str, usize)]) -> Vocabulary {
        // Build a corpus realizing the requested counts via repeated tokens.
        let mut tokens = Vec::new();
        for &(word, count) in counts {
            for _ in 0..count {
                tokens.push(word.to_string());
            }
        }
        build_vocabulary(&[Document::general(tokens)], 1).unwrap()
    }

    fn multiplicity(table: &NegativeTable, word: usize) -> usize {
        table.slots().iter().filter(|&&s| s as usize == word).count()
    }

    #[test]
    fn equal_counts_split_evenly() {
        let vocab = vocab_with_counts(&[("a", 1), ("b", 1)]);
        let table = build_negative_table(&vocab, 0.75, 10).unwrap();
        assert_eq!(table.len(), 10);
        assert_eq!(multiplicity(&table, 0), 5);
        assert_eq!(multiplicity(&table, 1), 5);
    }

    #[test]
    fn largest_remainder_matches_hand_computed_shares() {
        // counts {a:4, b:1}, power 0.75: weights 4^0.75=2.82843 vs 1.0,
        // shares 7.38796 / 2.61204 of 10 slots → floors 7/2, the leftover
        // slot goes to the larger remainder (b) → 7/3.
        let vocab = vocab_with_counts(&[("a", 4), ("b", 1)]);
        assert_eq!(vocab.index_of("a"), Some(0));
        let table = build_negative_table(&vocab, 0.75, 10).unwrap();
        assert_eq!(multiplicity(&table, 0), 7);
        assert_eq!(multiplicity(&table, 1), 3);
    }

    #[test]
    fn power_zero_flattens_to_uniform() {
        let vocab = vocab_with_counts(&[("a", 4), ("b", 1)]);
        let table = build_negative_table(&vocab, 0.0, 10).unwrap();
        assert_eq!(multiplicity(&table, 0), 5);
        assert_eq!(multiplicity(&table, 1), 5);
    }

    #[test]
    fn every_word_within_one_slot_of_exact_share() {
        let vocab = vocab_with_counts(&[("a", 100), ("b", 37), ("c", 12), ("d", 5), ("e", 1)]);
        let size = 1013;
        let table = build_negative_table(&vocab, 0.75, size).unwrap();
        assert_eq!(table.len(), size);
        let weights: Vec<f64> = (0..vocab.len())
            .map(|i| (vocab.count(i) as f64).powf(0.75))
            .collect();
        let total: f64 = weights.iter().sum();
        for i in 0..vocab.len() {
            let exact = weights[i] / total * size as f64;
            let got = multiplicity(&table, i) as f64;
            assert!(
                (got - exact).abs() < 1.0,
                "word {i}: {got} slots vs exact {exact}"
            );
        }
    }

    #[test]
    fn table_smaller_than_vocabulary_is_rejected() {
        let vocab = vocab_with_counts(&[("a", 1), ("b", 1), ("c", 1)]);
        assert!(matches!(
            build_negative_table(&vocab, 0.75, 2),
            Err(TrainError::TableTooSmall { size: 2, vocab_size: 3 })
        ));
    }

    #[test]
    fn sampling_stays_in_vocabulary_range() {
        use rand::SeedableRng;
        let vocab = vocab_with_counts(&[("a", 9), ("b", 3), ("c", 1)]);
        let table = build_negative_table(&vocab, 0.75, 100).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            assert!(table.sample(&mut rng) < vocab.len());
        }
    }
}
