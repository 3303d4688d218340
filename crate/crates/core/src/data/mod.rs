//! Benchmark corpora: registry, loading and cross-validation folds.

mod folds;
pub mod synthetic;

pub use folds::{FoldPlan, FOLDS};

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Environment variable naming the dataset cache directory.
pub const DATA_DIR_ENV: &str = "CONTEXTUALIZER_DATA";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DatasetName {
    #[serde(rename = "MR")]
    Mr,
    #[serde(rename = "CR")]
    Cr,
    #[serde(rename = "SUBJ")]
    Subj,
    #[serde(rename = "MPQA")]
    Mpqa,
}

impl DatasetName {
    pub const ALL: [DatasetName; 4] = [DatasetName::Mr, DatasetName::Cr, DatasetName::Subj, DatasetName::Mpqa];

    pub fn info(self) -> &'static DatasetInfo {
        &REGISTRY[self as usize]
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.info().name)
    }
}

impl FromStr for DatasetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DatasetName::ALL
            .into_iter()
            .find(|d| d.info().name.eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Input(format!("unknown dataset {s:?} (expected MR, CR, SUBJ or MPQA)")))
    }
}

/// Registry entry: where a corpus lives and what it should contain.
#[derive(Debug)]
pub struct DatasetInfo {
    pub name: &'static str,
    pub description: &'static str,
    /// File holding the positive (label 1) documents.
    pub positive_file: &'static str,
    /// File holding the negative (label 0) documents.
    pub negative_file: &'static str,
    pub expected_documents: usize,
    /// Vocabulary size at min count 3 on the whole corpus.
    pub expected_vocabulary: usize,
    pub source: &'static str,
}

static REGISTRY: [DatasetInfo; 4] = [
    DatasetInfo {
        name: "MR",
        description: "movie review snippets, positive vs negative",
        positive_file: "rt-polarity.pos",
        negative_file: "rt-polarity.neg",
        expected_documents: 10_662,
        expected_vocabulary: 5_700,
        source: "https://www.cs.cornell.edu/people/pabo/movie-review-data/rt-polaritydata.tar.gz",
    },
    DatasetInfo {
        name: "CR",
        description: "customer product reviews, positive vs negative",
        positive_file: "custrev.pos",
        negative_file: "custrev.neg",
        expected_documents: 3_775,
        expected_vocabulary: 1_700,
        source: "https://dl.fbaipublicfiles.com/senteval/senteval_data/datasmall_NB_ACL12.zip",
    },
    DatasetInfo {
        name: "SUBJ",
        description: "subjective review snippets vs objective plot summaries",
        positive_file: "quote.tok.gt9.5000",
        negative_file: "plot.tok.gt9.5000",
        expected_documents: 10_000,
        expected_vocabulary: 6_300,
        source: "https://www.cs.cornell.edu/people/pabo/movie-review-data/rotten_imdb.tar.gz",
    },
    DatasetInfo {
        name: "MPQA",
        description: "opinion polarity of short phrases",
        positive_file: "mpqa.pos",
        negative_file: "mpqa.neg",
        expected_documents: 10_606,
        expected_vocabulary: 1_500,
        source: "https://dl.fbaipublicfiles.com/senteval/senteval_data/datasmall_NB_ACL12.zip",
    },
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    /// Position in the loaded dataset; stable across runs.
    pub id: usize,
    pub text: String,
    pub label: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChecksum {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: DatasetName,
    pub documents: Vec<Document>,
    pub checksums: Vec<FileChecksum>,
}

impl Dataset {
    /// Builds a dataset from in-memory documents (ids are reassigned).
    pub fn from_labeled<S: Into<String>>(name: DatasetName, docs: impl IntoIterator<Item = (S, bool)>) -> Self {
        let documents = docs
            .into_iter()
            .enumerate()
            .map(|(id, (text, label))| Document {
                id,
                text: text.into(),
                label,
            })
            .collect();
        Self {
            name,
            documents,
            checksums: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// `[negatives, positives]`.
    pub fn class_counts(&self) -> [usize; 2] {
        let pos = self.documents.iter().filter(|d| d.label).count();
        [self.documents.len() - pos, pos]
    }

    pub fn labels(&self) -> Vec<bool> {
        self.documents.iter().map(|d| d.label).collect()
    }
}

/// Resolves the directory of `name` under `root`. Both `root/MR` and a
/// `root` that directly holds the files are accepted.
pub fn dataset_dir(root: &Path, name: DatasetName) -> std::path::PathBuf {
    if root.join(name.info().positive_file).is_file() {
        root.to_path_buf()
    } else {
        root.join(name.info().name)
    }
}

/// Loads a corpus from its two label files, one document per line.
///
/// Files are decoded as UTF-8 when valid and as Latin-1 otherwise. Blank
/// lines are skipped. A document count different from the registry is
/// logged, not rejected, so samples and variants can be used.
pub fn load_dataset(name: DatasetName, path: &Path) -> Result<Dataset> {
    let info = name.info();
    let dir = dataset_dir(path, name);
    let mut docs = Vec::new();
    let mut checksums = Vec::new();
    for (file, label) in [(info.positive_file, true), (info.negative_file, false)] {
        let full = dir.join(file);
        let bytes = fs::read(&full).map_err(|e| Error::io(&full, e))?;
        checksums.push(FileChecksum {
            file: file.to_string(),
            sha256: hex(&Sha256::digest(&bytes)),
        });
        let text = decode(&bytes, &full);
        let before = docs.len();
        docs.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(|l| (l.to_string(), label)),
        );
        if docs.len() == before {
            return Err(Error::Format(format!("{} holds no documents", full.display())));
        }
    }
    let ds = Dataset {
        checksums,
        ..Dataset::from_labeled(name, docs)
    };
    let [neg, pos] = ds.class_counts();
    if ds.len() != info.expected_documents {
        warn!(
            "{name}: loaded {} documents, registry expects {}",
            ds.len(),
            info.expected_documents
        );
    }
    info!("{name}: {} documents ({pos} positive, {neg} negative)", ds.len());
    Ok(ds)
}

fn decode(bytes: &[u8], path: &Path) -> String {
    match std::str::from_utf8(bytes) {
        Ok(s) => s.to_string(),
        Err(_) => {
            warn!("{} is not valid UTF-8, decoding as Latin-1", path.display());
            bytes.iter().map(|&b| b as char).collect()
        }
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Copies the label files of `name` from `from` into `to/<name>`, returning
/// their checksums.
pub fn install_dataset(name: DatasetName, from: &Path, to: &Path) -> Result<Vec<FileChecksum>> {
    let info = name.info();
    let src = dataset_dir(from, name);
    let dst = to.join(info.name);
    fs::create_dir_all(&dst).map_err(|e| Error::io(&dst, e))?;
    let mut sums = Vec::new();
    for file in [info.positive_file, info.negative_file] {
        let bytes = fs::read(src.join(file)).map_err(|e| Error::io(src.join(file), e))?;
        fs::write(dst.join(file), &bytes).map_err(|e| Error::io(dst.join(file), e))?;
        sums.push(FileChecksum {
            file: file.to_string(),
            sha256: hex(&Sha256::digest(&bytes)),
        });
    }
    Ok(sums)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_pair(dir: &Path, pos: &[u8], neg: &[u8]) {
        fs::write(dir.join("rt-polarity.pos"), pos).unwrap();
        fs::write(dir.join("rt-polarity.neg"), neg).unwrap();
    }

    #[test]
    fn registry_counts() {
        assert_eq!(DatasetName::Cr.info().expected_documents, 3775);
        assert_eq!(DatasetName::Mpqa.info().expected_documents, 10_606);
        assert_eq!(DatasetName::Subj.info().expected_documents, 10_000);
        assert_eq!("subj".parse::<DatasetName>().unwrap(), DatasetName::Subj);
        assert!("TREC".parse::<DatasetName>().is_err());
    }

    #[test]
    fn loads_both_classes_and_decodes_latin1() {
        let dir = tempfile::tempdir().unwrap();
        write_pair(dir.path(), b"a fine film\n\nsimply caf\xe9 good\n", b"dull\n");
        let ds = load_dataset(DatasetName::Mr, dir.path()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.class_counts(), [1, 2]);
        assert_eq!(ds.documents[1].text, "simply café good");
        assert_eq!(ds.checksums.len(), 2);
        assert_eq!(ds.checksums[0].sha256.len(), 64);
        assert_eq!(ds.documents.iter().map(|d| d.id).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn empty_directory_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_dataset(DatasetName::Cr, dir.path()), Err(Error::Io { .. })));
    }

    #[test]
    fn empty_class_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        write_pair(dir.path(), b"good\n", b"\n \n");
        assert!(matches!(load_dataset(DatasetName::Mr, dir.path()), Err(Error::Format(_))));
    }

    #[test]
    fn nested_layout_and_install() {
        let src = tempfile::tempdir().unwrap();
        write_pair(src.path(), b"x\n", b"y\n");
        let cache = tempfile::tempdir().unwrap();
        let sums = install_dataset(DatasetName::Mr, src.path(), cache.path()).unwrap();
        assert_eq!(sums.len(), 2);
        let ds = load_dataset(DatasetName::Mr, cache.path()).unwrap();
        assert_eq!(ds.checksums, sums);
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            hex(&Sha256::digest(b"abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
