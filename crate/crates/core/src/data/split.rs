use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::window::{SampleGroup, TrajectorySample};
use crate::error::{Error, Result};

pub const SPLIT_MANIFEST_HEADER: &str = "pedfuse-split v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SplitName {
    Train,
    Validation,
    Test,
}

impl SplitName {
    pub fn token(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Validation => "validation",
            SplitName::Test => "test",
        }
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.7,
            validation: 0.2,
            test: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<TrajectorySample>,
    pub validation: Vec<TrajectorySample>,
    pub test: Vec<TrajectorySample>,
    /// Track id → split, sorted by track id.
    pub manifest: Vec<(String, SplitName)>,
}

impl DatasetSplit {
    pub fn manifest_text(&self) -> String {
        let mut s = format!("{SPLIT_MANIFEST_HEADER}\n");
        for (id, split) in &self.manifest {
            s.push_str(&format!("{id} {split}\n"));
        }
        s
    }

    /// SHA-256 of [`DatasetSplit::manifest_text`]; stamped into checkpoints.
    pub fn manifest_digest(&self) -> [u8; 32] {
        Sha256::digest(self.manifest_text().as_bytes()).into()
    }

    pub fn split_of(&self, track_id: &str) -> Option<SplitName> {
        self.manifest.iter().find(|(id, _)| id == track_id).map(|&(_, s)| s)
    }
}

/// Seeded track-level split. All groups (phases) of a track share a split.
///
/// Track ids are sorted, shuffled with `seed`, and the first
/// `round(train·n)` go to train, the next `round(validation·n)` to validation,
/// the rest to test.
pub fn split_dataset(groups: &[SampleGroup], ratios: SplitRatios, seed: u64) -> Result<DatasetSplit> {
    let SplitRatios { train, validation, test } = ratios;
    if [train, validation, test].iter().any(|r| !(0.0..=1.0).contains(r)) || (train + validation + test - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "split ratios must be in [0,1] and sum to 1, got {train}/{validation}/{test}"
        )));
    }
    if groups.is_empty() {
        return Err(Error::Data("cannot split an empty corpus".into()));
    }

    let mut by_track: BTreeMap<&str, Vec<&SampleGroup>> = BTreeMap::new();
    for g in groups {
        by_track.entry(&g.track_id).or_default().push(g);
    }
    for gs in by_track.values_mut() {
        gs.sort_by_key(|g| g.phase);
    }

    let mut ids: Vec<&str> = by_track.keys().copied().collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = ids.len();
    let n_train = ((train * n as f64).round() as usize).min(n);
    let n_val = ((validation * n as f64).round() as usize).min(n - n_train);

    let mut assignment: BTreeMap<&str, SplitName> = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        let split = if i < n_train {
            SplitName::Train
        } else if i < n_train + n_val {
            SplitName::Validation
        } else {
            SplitName::Test
        };
        assignment.insert(id, split);
    }

    let mut out = DatasetSplit {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        manifest: assignment.iter().map(|(id, &s)| (id.to_string(), s)).collect(),
    };
    for (id, gs) in &by_track {
        let bucket = match assignment[id] {
            SplitName::Train => &mut out.train,
            SplitName::Validation => &mut out.validation,
            SplitName::Test => &mut out.test,
        };
        for g in gs {
            bucket.extend(g.samples.iter().cloned());
        }
    }
    Ok(out)
}
