use super::HarnessError;
use crate::ssl::SplitIds;
use serde::{Deserialize, Serialize};

pub const SPLIT_COUNT: usize = 10;
const LABELED: usize = 0;
const UNLABELED: std::ops::Range<usize> = 1..7;
const VALIDATION: usize = 7;
const TEST: std::ops::Range<usize> = 8..10;

/// Ten ordered id sets: split 1 labelled, 2–7 unlabelled, 8 validation,
/// 9–10 test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub splits: Vec<Vec<usize>>,
}

impl SplitPlan {
    pub fn labeled(&self) -> &[usize] {
        &self.splits[LABELED]
    }

    pub fn validation(&self) -> &[usize] {
        &self.splits[VALIDATION]
    }

    pub fn test(&self) -> Vec<usize> {
        self.splits[TEST].concat()
    }

    pub fn to_split_ids(&self) -> SplitIds {
        SplitIds {
            labeled: self.labeled().to_vec(),
            unlabeled: self.splits[UNLABELED].to_vec(),
            validation: self.validation().to_vec(),
            test: self.test(),
        }
    }
}

/// Cuts every class (ids in temporal order) into contiguous tenths and
/// gathers the k-th tenth of each class into split k.
pub fn make_temporal_splits(ids_by_class: &[Vec<usize>]) -> Result<SplitPlan, HarnessError> {
    let mut splits = vec![Vec::new(); SPLIT_COUNT];
    for (class, ids) in ids_by_class.iter().enumerate() {
        let n = ids.len();
        if n < SPLIT_COUNT {
            return Err(HarnessError::TooFewSegments { class, count: n });
        }
        for (k, split) in splits.iter_mut().enumerate() {
            split.extend_from_slice(&ids[k * n / SPLIT_COUNT..(k + 1) * n / SPLIT_COUNT]);
        }
    }
    Ok(SplitPlan { splits })
}
