//! Split and scoring helpers shared by the commands and the tests.

use std::collections::HashSet;

use pseudotouch_core::datasets::{expand_with_sim_pairs, make_splits, DatasetError, SplitSpec, TouchRecord};
use pseudotouch_core::grasp::{GraspRecord, GraspSample};
use pseudotouch_core::model::{mse_loss, predict, NetworkParams};
use pseudotouch_core::oracle::{TactileReading, READING_DIM};
use pseudotouch_core::patch::NormalizedPatch;

pub type Pairs = Vec<(NormalizedPatch, TactileReading)>;

/// Train/validation/test parts of a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub val: Vec<T>,
    pub test: Vec<T>,
}

impl<T> Split<T> {
    pub fn map<U>(&self, f: impl Fn(&[T]) -> Vec<U>) -> Split<U> {
        Split {
            train: f(&self.train),
            val: f(&self.val),
            test: f(&self.test),
        }
    }
}

/// Touch records split by record id; pairs of one record never straddle parts.
pub fn split_touch(records: &[TouchRecord], spec: &SplitSpec) -> Result<Split<TouchRecord>, DatasetError> {
    let ids: Vec<u32> = records.iter().map(|r| r.record_id).collect();
    let s = make_splits(&ids, spec)?;
    let pick = |part: &[u32]| {
        let keep: HashSet<u32> = part.iter().copied().collect();
        records.iter().filter(|r| keep.contains(&r.record_id)).cloned().collect()
    };
    Ok(Split {
        train: pick(&s.train),
        val: pick(&s.val),
        test: pick(&s.test),
    })
}

/// Both pairs of every record in each part.
pub fn touch_pairs(split: &Split<TouchRecord>) -> Split<(NormalizedPatch, TactileReading)> {
    split.map(expand_with_sim_pairs)
}

/// Grasp records split by object id, so no object appears in two parts.
pub fn split_grasp(records: &[GraspRecord], spec: &SplitSpec) -> Result<Split<GraspSample>, DatasetError> {
    let mut objects: Vec<u32> = records.iter().map(|r| r.object_id).collect();
    objects.sort_unstable();
    objects.dedup();
    let s = make_splits(&objects, spec)?;
    let pick = |part: &[u32]| {
        let keep: HashSet<u32> = part.iter().copied().collect();
        records.iter().filter(|r| keep.contains(&r.object_id)).map(|r| (r.features(), r.label)).collect()
    };
    Ok(Split {
        train: pick(&s.train),
        val: pick(&s.val),
        test: pick(&s.test),
    })
}

pub fn mean_reading(pairs: &[(NormalizedPatch, TactileReading)]) -> TactileReading {
    let mut m = [0.0; READING_DIM];
    for (_, t) in pairs {
        for (a, b) in m.iter_mut().zip(t.0.iter()) {
            *a += b;
        }
    }
    m.iter_mut().for_each(|a| *a /= pairs.len().max(1) as f64);
    TactileReading(m)
}

/// Mean per-component squared error of a constant prediction.
pub fn constant_mse(prediction: &TactileReading, pairs: &[(NormalizedPatch, TactileReading)]) -> f64 {
    pairs.iter().map(|(_, t)| mse_loss(prediction, t)).sum::<f64>() / pairs.len().max(1) as f64
}

pub fn network_mse(params: &NetworkParams, pairs: &[(NormalizedPatch, TactileReading)]) -> f64 {
    pairs.iter().map(|(x, t)| mse_loss(&predict(params, x), t)).sum::<f64>() / pairs.len().max(1) as f64
}
