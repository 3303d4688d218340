//! Stratified 5-fold plans with a stratified dev slice per training split.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::{Error, Result};

pub const FOLDS: usize = 5;
/// Share of each training split held out for model selection.
pub const DEV_FRACTION: f64 = 0.1;
const MIN_PER_CLASS: usize = 10;

/// Fold assignment and dev membership for every document.
///
/// `dev[i]` has bit `f` set when document `i` belongs to the dev slice of the
/// run whose test fold is `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldPlan {
    pub seed: u64,
    pub fold: Vec<usize>,
    pub dev: Vec<u8>,
    pub labels: Vec<bool>,
}

impl FoldPlan {
    pub fn make(ds: &Dataset, seed: u64) -> Result<Self> {
        Self::from_labels(&ds.labels(), seed)
    }

    pub fn from_labels(labels: &[bool], seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let by_class: Vec<Vec<usize>> = [false, true]
            .iter()
            .map(|&c| (0..labels.len()).filter(|&i| labels[i] == c).collect())
            .collect();
        for (c, members) in by_class.iter().enumerate() {
            if members.len() < MIN_PER_CLASS {
                return Err(Error::Input(format!(
                    "class {c} has {} documents, need at least {MIN_PER_CLASS}",
                    members.len()
                )));
            }
        }

        // Deal each shuffled class round-robin, continuing the rotation
        // across classes so fold sizes stay within one of each other.
        let mut fold = vec![0; labels.len()];
        let mut next = 0;
        let mut shuffled = by_class.clone();
        for members in &mut shuffled {
            members.shuffle(&mut rng);
            for &i in members.iter() {
                fold[i] = next % FOLDS;
                next += 1;
            }
        }

        let mut dev = vec![0u8; labels.len()];
        for f in 0..FOLDS {
            for members in &shuffled {
                let mut train: Vec<usize> = members.iter().copied().filter(|&i| fold[i] != f).collect();
                train.sort_unstable();
                train.shuffle(&mut rng);
                let take = (train.len() as f64 * DEV_FRACTION).round() as usize;
                for &i in &train[..take] {
                    dev[i] |= 1 << f;
                }
            }
        }
        Ok(Self {
            seed,
            fold,
            dev,
            labels: labels.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.fold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold.is_empty()
    }

    pub fn test_indices(&self, f: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.fold[i] == f).collect()
    }

    pub fn dev_indices(&self, f: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.fold[i] != f && self.is_dev(i, f)).collect()
    }

    /// Training documents of test fold `f`, dev slice excluded.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.fold[i] != f && !self.is_dev(i, f)).collect()
    }

    pub fn is_dev(&self, doc: usize, f: usize) -> bool {
        self.dev[doc] & (1 << f) != 0
    }

    /// TSV manifest: a `# seed=` line, a header, then one row per document.
    pub fn write_manifest<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# seed={}", self.seed)?;
        writeln!(out, "doc_id\tfold\tlabel\tdev")?;
        for i in 0..self.len() {
            let mask: String = (0..FOLDS).map(|f| if self.is_dev(i, f) { '1' } else { '0' }).collect();
            writeln!(out, "{i}\t{}\t{}\t{mask}", self.fold[i], self.labels[i] as u8)?;
        }
        Ok(())
    }

    pub fn read_manifest<R: BufRead>(input: R) -> Result<Self> {
        let bad = |line: usize, what: &str| Error::Format(format!("fold manifest line {line}: {what}"));
        let mut seed = None;
        let mut plan = FoldPlan {
            seed: 0,
            fold: Vec::new(),
            dev: Vec::new(),
            labels: Vec::new(),
        };
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Format(format!("fold manifest: {e}")))?;
            if let Some(s) = line.strip_prefix("# seed=") {
                seed = Some(s.trim().parse().map_err(|_| bad(n + 1, "bad seed"))?);
                continue;
            }
            if line.starts_with("doc_id") || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(bad(n + 1, "expected 4 columns"));
            }
            let id: usize = cols[0].parse().map_err(|_| bad(n + 1, "bad doc_id"))?;
            if id != plan.fold.len() {
                return Err(bad(n + 1, "doc ids must be consecutive from 0"));
            }
            let fold: usize = cols[1].parse().map_err(|_| bad(n + 1, "bad fold"))?;
            if fold >= FOLDS {
                return Err(bad(n + 1, "fold out of range"));
            }
            let label = match cols[2] {
                "0" => false,
                "1" => true,
                _ => return Err(bad(n + 1, "bad label")),
            };
            if cols[3].len() != FOLDS || !cols[3].bytes().all(|b| b == b'0' || b == b'1') {
                return Err(bad(n + 1, "bad dev mask"));
            }
            let mask = cols[3]
                .bytes()
                .enumerate()
                .fold(0u8, |m, (f, b)| m | (((b == b'1') as u8) << f));
            plan.fold.push(fold);
            plan.labels.push(label);
            plan.dev.push(mask);
        }
        plan.seed = seed.ok_or_else(|| Error::Format("fold manifest without seed".into()))?;
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn balanced(n: usize) -> Vec<bool> {
        (0..n).map(|i| i % 2 == 0).collect()
    }

    #[test]
    fn balanced_hundred_gives_ten_plus_ten() {
        let plan = FoldPlan::from_labels(&balanced(100), 3).unwrap();
        for f in 0..FOLDS {
            let test = plan.test_indices(f);
            let pos = test.iter().filter(|&&i| plan.labels[i]).count();
            assert_eq!((test.len() - pos, pos), (10, 10));
        }
    }

    #[test]
    fn seventy_thirty_is_preserved_per_fold() {
        let labels: Vec<bool> = (0..10_606).map(|i| i % 10 < 3).collect();
        let global = labels.iter().filter(|&&l| l).count() as f64 / labels.len() as f64;
        let plan = FoldPlan::from_labels(&labels, 11).unwrap();
        for f in 0..FOLDS {
            let test = plan.test_indices(f);
            let share = test.iter().filter(|&&i| labels[i]).count() as f64 / test.len() as f64;
            assert!((share - global).abs() < 0.01);
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let labels = balanced(60);
        assert_eq!(FoldPlan::from_labels(&labels, 5).unwrap(), FoldPlan::from_labels(&labels, 5).unwrap());
        assert_ne!(FoldPlan::from_labels(&labels, 5).unwrap(), FoldPlan::from_labels(&labels, 6).unwrap());
    }

    #[test]
    fn small_class_rejected() {
        let mut labels = vec![false; 40];
        labels.extend([true; 9]);
        assert!(matches!(FoldPlan::from_labels(&labels, 0), Err(Error::Input(_))));
    }

    #[test]
    fn manifest_round_trip() {
        let plan = FoldPlan::from_labels(&balanced(30), 9).unwrap();
        let mut buf = Vec::new();
        plan.write_manifest(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# seed=9\ndoc_id\tfold\tlabel\tdev\n"));
        assert_eq!(FoldPlan::read_manifest(buf.as_slice()).unwrap(), plan);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn partitions_and_dev_are_consistent(
            labels in proptest::collection::vec(any::<bool>(), 20..400),
            seed in any::<u64>(),
        ) {
            let n_pos = labels.iter().filter(|&&l| l).count();
            prop_assume!(n_pos >= MIN_PER_CLASS && labels.len() - n_pos >= MIN_PER_CLASS);
            let plan = FoldPlan::from_labels(&labels, seed).unwrap();
            let mut seen = vec![0; labels.len()];
            for f in 0..FOLDS {
                let test = plan.test_indices(f);
                let dev = plan.dev_indices(f);
                let train = plan.train_indices(f);
                prop_assert_eq!(test.len() + dev.len() + train.len(), labels.len());
                for &i in &test {
                    seen[i] += 1;
                    prop_assert!(!dev.contains(&i));
                }
                // Dev is 10% of each class's training split, rounded.
                for class in [false, true] {
                    let pool = labels.iter().enumerate().filter(|&(i, &l)| l == class && plan.fold[i] != f).count();
                    let d = dev.iter().filter(|&&i| labels[i] == class).count();
                    prop_assert_eq!(d, (pool as f64 * DEV_FRACTION).round() as usize);
                }
            }
            prop_assert!(seen.iter().all(|&s| s == 1));
            // Per-fold class counts differ by at most one across folds.
            for class in [false, true] {
                let counts: Vec<usize> = (0..FOLDS)
                    .map(|f| plan.test_indices(f).iter().filter(|&&i| labels[i] == class).count())
                    .collect();
                prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
            }
        }
    }
}
