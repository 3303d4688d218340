//! Separable-by-construction corpus: a document is positive iff it contains
//! the marker token.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dataset, DatasetName};

pub const MARKER: &str = "zzmarker";
const FILLER: [&str; 8] = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel"];

/// `docs` documents, half of them positive, each 4 to 8 filler words long;
/// positives get the marker inserted at a random position.
pub fn marker_task(docs: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items: Vec<(String, bool)> = (0..docs)
        .map(|i| {
            let label = i % 2 == 0;
            let len = rng.gen_range(4..=8);
            let mut words: Vec<&str> = (0..len).map(|_| *FILLER.choose(&mut rng).unwrap()).collect();
            if label {
                let at = rng.gen_range(0..=words.len());
                words.insert(at, MARKER);
            }
            (words.join(" "), label)
        })
        .collect();
    // The dataset name is only a label here; the registry is not consulted.
    Dataset::from_labeled(DatasetName::Mr, items)
}
