use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Index shared by every token below the frequency threshold.
pub const OOV_INDEX: usize = 0;

/// Token → dense index map. Index 0 is the out-of-vocabulary slot; retained
/// tokens follow in sorted order from 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    token_to_index: HashMap<String, usize>,
    tokens: Vec<String>,
    min_count: usize,
}

impl Vocabulary {
    /// Keeps every token occurring at least `min_count` times in `corpus`.
    pub fn build<S: AsRef<str>>(corpus: &[Vec<S>], min_count: usize) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::Input("cannot build a vocabulary from an empty corpus".into()));
        }
        if min_count == 0 {
            return Err(Error::Input("min_count must be at least 1".into()));
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for doc in corpus {
            for tok in doc {
                *counts.entry(tok.as_ref()).or_default() += 1;
            }
        }
        let mut tokens: Vec<String> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .map(|(t, _)| t.to_string())
            .collect();
        tokens.sort_unstable();
        Ok(Self::from_sorted(tokens, min_count))
    }

    fn from_sorted(tokens: Vec<String>, min_count: usize) -> Self {
        let token_to_index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i + 1))
            .collect();
        Self {
            token_to_index,
            tokens,
            min_count,
        }
    }

    /// Number of indices, including the OOV slot.
    pub fn len(&self) -> usize {
        self.tokens.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Retained tokens, excluding OOV.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn oov_index(&self) -> usize {
        OOV_INDEX
    }

    pub fn contains(&self, token: &str) -> bool {
        self.token_to_index.contains_key(token)
    }

    pub fn index(&self, token: &str) -> usize {
        self.token_to_index.get(token).copied().unwrap_or(OOV_INDEX)
    }

    /// Sorted UTF-8 tokens, one per line. OOV is implicit.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for t in &self.tokens {
            writeln!(out, "{t}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R, min_count: usize) -> Result<Self> {
        let mut tokens = Vec::new();
        for line in input.lines() {
            let line = line.map_err(|e| Error::Format(format!("vocabulary: {e}")))?;
            if line.is_empty() {
                continue;
            }
            tokens.push(line);
        }
        if tokens.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format("vocabulary file is not strictly sorted".into()));
        }
        Ok(Self::from_sorted(tokens, min_count))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(docs: &[&str]) -> Vec<Vec<String>> {
        docs.iter()
            .map(|d| d.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn all_singletons_leave_only_oov() {
        let v = Vocabulary::build(&corpus(&["a b c", "d e f"]), 3).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.index("a"), OOV_INDEX);
    }

    #[test]
    fn threshold_is_inclusive() {
        let v = Vocabulary::build(&corpus(&["good film", "good", "not good bad bad"]), 3).unwrap();
        assert!(v.contains("good"));
        assert!(!v.contains("bad"));
        assert_eq!(v.index("good"), 1);
    }

    #[test]
    fn indices_are_dense_and_sorted() {
        let v = Vocabulary::build(&corpus(&["b a c", "c a b", "z"]), 2).unwrap();
        assert_eq!(v.tokens(), ["a", "b", "c"]);
        assert_eq!((v.index("a"), v.index("b"), v.index("c")), (1, 2, 3));
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn empty_corpus_is_an_input_error() {
        let empty: Vec<Vec<String>> = Vec::new();
        assert!(matches!(Vocabulary::build(&empty, 3), Err(Error::Input(_))));
        assert!(matches!(Vocabulary::build(&corpus(&["a"]), 0), Err(Error::Input(_))));
    }

    #[test]
    fn file_round_trip() {
        let v = Vocabulary::build(&corpus(&["é x y", "é x", "é"]), 2).unwrap();
        let mut buf = Vec::new();
        v.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "x\né\n");
        let back = Vocabulary::read_from(buf.as_slice(), 2).unwrap();
        assert_eq!(back, v);
    }
}
