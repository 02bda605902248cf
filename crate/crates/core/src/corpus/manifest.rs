//! Seeded shuffle and 70/15/15 split of video-bulletin pairings.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{io_err, CorpusError};

/// Train, validation and test shares in percent.
pub const SPLIT_PERCENT: [u64; 3] = [70, 15, 15];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];
}

/// Whether an entry pairs one sea area or a consolidated area group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    #[default]
    Area,
    Group,
}

impl std::str::FromStr for Pairing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "area" => Ok(Pairing::Area),
            "group" => Ok(Pairing::Group),
            _ => Err(format!("pairing must be 'area' or 'group', got {s:?}")),
        }
    }
}

/// A video-bulletin pairing before split assignment. Paths are relative to
/// the corpus root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedEntry {
    pub id: String,
    pub issue_time: String,
    pub areas: Vec<String>,
    pub frame_sets: BTreeMap<String, String>,
    pub bulletin: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    #[serde(flatten)]
    pub entry: PairedEntry,
    pub split: Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl SplitCounts {
    pub fn get(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train,
            Split::Validation => self.validation,
            Split::Test => self.test,
        }
    }

    pub fn total(&self) -> usize {
        self.train + self.validation + self.test
    }
}

/// An archived bulletin that could not be paired with fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orphan {
    pub id: String,
    pub reason: String,
}

/// Contents of `corpus.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub seed: u64,
    pub pairing: Pairing,
    pub counts: SplitCounts,
    pub entries: Vec<CorpusEntry>,
    #[serde(default)]
    pub orphans: Vec<Orphan>,
}

pub const CORPUS_FILE: &str = "corpus.json";

impl CorpusManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn save(&self, root: &Path) -> Result<PathBuf, CorpusError> {
        let path = root.join(CORPUS_FILE);
        fs::write(&path, self.to_json()).map_err(io_err(&path))?;
        Ok(path)
    }

    pub fn load(root: &Path) -> Result<Self, CorpusError> {
        let path = root.join(CORPUS_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| CorpusError::Manifest {
            path,
            message: e.to_string(),
        })
    }

    /// Referenced paths that do not exist under `root`.
    pub fn missing_files(&self, root: &Path) -> Vec<PathBuf> {
        self.entries
            .iter()
            .flat_map(|e| e.entry.frame_sets.values().chain([&e.entry.bulletin]))
            .map(|p| root.join(p))
            .filter(|p| !p.exists())
            .collect()
    }
}

/// Largest-remainder apportionment of `n` over [`SPLIT_PERCENT`]; ties go to
/// the earlier split.
pub fn split_sizes(n: usize) -> SplitCounts {
    let n = n as u64;
    let mut sizes: Vec<u64> = SPLIT_PERCENT.iter().map(|p| n * p / 100).collect();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(n * SPLIT_PERCENT[i] % 100));
    let left = n - sizes.iter().sum::<u64>();
    for &i in order.iter().take(left as usize) {
        sizes[i] += 1;
    }
    SplitCounts {
        train: sizes[0] as usize,
        validation: sizes[1] as usize,
        test: sizes[2] as usize,
    }
}

/// Sorts by id, shuffles under `seed`, then takes train, validation and test
/// blocks of [`split_sizes`] length.
pub fn build_corpus(
    mut entries: Vec<PairedEntry>,
    seed: u64,
    pairing: Pairing,
    orphans: Vec<Orphan>,
) -> Result<CorpusManifest, CorpusError> {
    if entries.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut seen = BTreeSet::new();
    for e in &entries {
        if !seen.insert(e.id.as_str()) {
            return Err(CorpusError::DuplicateEntry(e.id.clone()));
        }
    }
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    entries.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let counts = split_sizes(entries.len());
    let labels = Split::ALL
        .iter()
        .flat_map(|&s| std::iter::repeat_n(s, counts.get(s)));
    let entries = entries
        .into_iter()
        .zip(labels)
        .map(|(entry, split)| CorpusEntry { entry, split })
        .collect();
    Ok(CorpusManifest {
        seed,
        pairing,
        counts,
        entries,
        orphans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entries(n: usize) -> Vec<PairedEntry> {
        (0..n)
            .map(|i| PairedEntry {
                id: format!("e{i:05}"),
                issue_time: "2024-01-01T00:00:00Z".into(),
                areas: vec!["Dover".into()],
                frame_sets: BTreeMap::new(),
                bulletin: format!("bulletins/e{i:05}.json"),
            })
            .collect()
    }

    /// Exact rational apportionment by brute force over all (a, b, c) with
    /// a + b + c = n, picking the one matching the largest-remainder rule.
    fn oracle(n: usize) -> (usize, usize, usize) {
        let quota = |p: u64| n as f64 * p as f64 / 100.0;
        let q = [quota(70), quota(15), quota(15)];
        let floors: Vec<usize> = q.iter().map(|x| x.floor() as usize).collect();
        let mut fr: Vec<(f64, usize)> = q.iter().enumerate().map(|(i, x)| (x - x.floor(), i)).collect();
        fr.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let mut out = floors.clone();
        for k in 0..(n - floors.iter().sum::<usize>()) {
            out[fr[k].1] += 1;
        }
        (out[0], out[1], out[2])
    }

    #[test]
    fn known_splits() {
        assert_eq!(split_sizes(1500), SplitCounts { train: 1050, validation: 225, test: 225 });
        assert_eq!(split_sizes(10), SplitCounts { train: 7, validation: 2, test: 1 });
        assert_eq!(split_sizes(20), SplitCounts { train: 14, validation: 3, test: 3 });
        assert_eq!(split_sizes(1), SplitCounts { train: 1, validation: 0, test: 0 });
    }

    #[test]
    fn splits_match_oracle_and_stay_within_one() {
        for n in 1..2000 {
            let c = split_sizes(n);
            assert_eq!((c.train, c.validation, c.test), oracle(n), "n={n}");
            assert_eq!(c.total(), n);
            for (s, p) in Split::ALL.iter().zip(SPLIT_PERCENT) {
                assert!((c.get(*s) as f64 - n as f64 * p as f64 / 100.0).abs() < 1.0);
            }
        }
    }

    #[test]
    fn corpus_of_1500() {
        let m = build_corpus(entries(1500), 7, Pairing::Area, vec![]).unwrap();
        assert_eq!((m.counts.train, m.counts.validation, m.counts.test), (1050, 225, 225));
        let ids: BTreeSet<_> = m.entries.iter().map(|e| e.entry.id.clone()).collect();
        assert_eq!(ids.len(), 1500);
        for s in Split::ALL {
            assert_eq!(m.entries.iter().filter(|e| e.split == s).count(), m.counts.get(s));
        }
    }

    #[test]
    fn duplicate_and_empty() {
        let mut e = entries(3);
        e.push(e[1].clone());
        assert!(matches!(build_corpus(e, 1, Pairing::Area, vec![]), Err(CorpusError::DuplicateEntry(id)) if id == "e00001"));
        assert!(matches!(build_corpus(vec![], 1, Pairing::Area, vec![]), Err(CorpusError::EmptyCorpus)));
    }

    #[test]
    fn manifest_round_trip_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let m = build_corpus(entries(4), 3, Pairing::Group, vec![Orphan { id: "x".into(), reason: "no fields".into() }]).unwrap();
        m.save(dir.path()).unwrap();
        assert_eq!(CorpusManifest::load(dir.path()).unwrap(), m);
        assert_eq!(m.missing_files(dir.path()).len(), 4);
    }

    proptest! {
        #[test]
        fn deterministic_and_input_order_free(n in 1usize..200, seed in any::<u64>(), rot in 0usize..200) {
            let a = build_corpus(entries(n), seed, Pairing::Area, vec![]).unwrap();
            let mut e = entries(n);
            e.rotate_left(rot % n);
            let b = build_corpus(e, seed, Pairing::Area, vec![]).unwrap();
            prop_assert_eq!(a.to_json(), b.to_json());
        }
    }
}
