//! Machine-readable evaluation reports and their text tables.
//!
//! Recognition report schema:
//!
//! ```text
//! {
//!   "predictor": string,
//!   "objects": [string, ...],
//!   "episodes_per_object": int, "touches_per_episode": int,
//!   "pooled_n": int, "pooled_repetitions": int,
//!   "accuracy": { "P" | "T" | "P+T": { "informed": [0,1], "pooled": [0,1] } },
//!   "per_object": { "P" | "T" | "P+T": { <object name>: [0,1] } }
//! }
//! ```
//!
//! Grasp report schema:
//!
//! ```text
//! {
//!   "accuracy": [0,1], "n_test": int,
//!   "confusion": { "tp": int, "fp": int, "tn": int, "fn": int },
//!   "histogram": { "edges": [11 floats], "positive": [10 ints], "negative": [10 ints] }
//! }
//! ```

use std::collections::BTreeMap;
use std::fmt::Write;

use pseudotouch_core::grasp::{GraspNetParams, GraspSample};
use pseudotouch_core::recognition::Modality;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModalityAccuracy {
    pub informed: f64,
    pub pooled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecognitionReport {
    pub predictor: String,
    pub objects: Vec<String>,
    pub episodes_per_object: usize,
    pub touches_per_episode: usize,
    pub pooled_n: usize,
    pub pooled_repetitions: usize,
    pub accuracy: BTreeMap<String, ModalityAccuracy>,
    pub per_object: BTreeMap<String, BTreeMap<String, f64>>,
}

impl RecognitionReport {
    /// Objects as rows and modalities as columns, then the overall rows.
    pub fn table(&self) -> String {
        let labels: Vec<&str> = Modality::ALL.iter().map(|m| m.label()).collect();
        let width = self.objects.iter().map(String::len).max().unwrap_or(0).max(16);
        let mut out = format!("{:width$}", "object");
        for l in &labels {
            let _ = write!(out, " {l:>7}");
        }
        out.push('\n');
        for name in &self.objects {
            let _ = write!(out, "{name:width$}");
            for l in &labels {
                let v = self.per_object.get(*l).and_then(|m| m.get(name)).copied().unwrap_or(f64::NAN);
                let _ = write!(out, " {:>6.1}%", 100.0 * v);
            }
            out.push('\n');
        }
        for (row, pick) in [("informed", true), ("pooled", false)] {
            let _ = write!(out, "{:width$}", format!("{row} (all)"));
            for l in &labels {
                let v = self.accuracy.get(*l).map(|a| if pick { a.informed } else { a.pooled }).unwrap_or(f64::NAN);
                let _ = write!(out, " {:>6.1}%", 100.0 * v);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u32,
    pub fp: u32,
    pub tn: u32,
    #[serde(rename = "fn")]
    pub fn_: u32,
}

impl Confusion {
    pub fn total(&self) -> u32 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub const HISTOGRAM_BINS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreHistogram {
    pub edges: Vec<f64>,
    pub positive: Vec<u32>,
    pub negative: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspReport {
    pub accuracy: f64,
    pub n_test: usize,
    pub confusion: Confusion,
    pub histogram: ScoreHistogram,
}

impl GraspReport {
    /// Scores thresholded at 0.5, the same rule as the training accuracy.
    pub fn evaluate(params: &GraspNetParams, test: &[GraspSample]) -> Self {
        let mut confusion = Confusion::default();
        let mut positive = vec![0; HISTOGRAM_BINS];
        let mut negative = vec![0; HISTOGRAM_BINS];
        for (x, label) in test {
            let s = params.score(x);
            let bin = ((s * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
            match (s >= 0.5, *label) {
                (true, true) => confusion.tp += 1,
                (true, false) => confusion.fp += 1,
                (false, false) => confusion.tn += 1,
                (false, true) => confusion.fn_ += 1,
            }
            if *label {
                positive[bin] += 1;
            } else {
                negative[bin] += 1;
            }
        }
        GraspReport {
            accuracy: (confusion.tp + confusion.tn) as f64 / test.len().max(1) as f64,
            n_test: test.len(),
            confusion,
            histogram: ScoreHistogram {
                edges: (0..=HISTOGRAM_BINS).map(|k| k as f64 / HISTOGRAM_BINS as f64).collect(),
                positive,
                negative,
            },
        }
    }

    pub fn table(&self) -> String {
        let c = &self.confusion;
        format!(
            "grasp success prediction\n  accuracy  {:>6.1}%  (n = {})\n              pred +  pred -\n  actual +  {:>7} {:>7}\n  actual -  {:>7} {:>7}\n",
            100.0 * self.accuracy,
            self.n_test,
            c.tp,
            c.fn_,
            c.fp,
            c.tn
        )
    }
}

fn unit_interval(v: &Value) -> bool {
    v.as_f64().is_some_and(|x| (0.0..=1.0).contains(&x))
}

fn count(v: &Value) -> bool {
    v.as_u64().is_some()
}

fn exact_keys(v: &Value, keys: &[&str]) -> Option<()> {
    let obj = v.as_object()?;
    (obj.len() == keys.len() && keys.iter().all(|k| obj.contains_key(*k))).then_some(())
}

/// Checks a parsed recognition report against the documented schema.
pub fn validate_recognition_json(v: &Value) -> Result<(), String> {
    let labels: Vec<&str> = Modality::ALL.iter().map(|m| m.label()).collect();
    exact_keys(
        v,
        &["predictor", "objects", "episodes_per_object", "touches_per_episode", "pooled_n", "pooled_repetitions", "accuracy", "per_object"],
    )
    .ok_or("top-level keys")?;
    v["predictor"].as_str().ok_or("predictor")?;
    let objects: Vec<&str> = v["objects"].as_array().ok_or("objects")?.iter().map(|o| o.as_str()).collect::<Option<_>>().ok_or("objects")?;
    for k in ["episodes_per_object", "touches_per_episode", "pooled_n", "pooled_repetitions"] {
        count(&v[k]).then_some(()).ok_or(k)?;
    }
    exact_keys(&v["accuracy"], &labels).ok_or("accuracy modalities")?;
    exact_keys(&v["per_object"], &labels).ok_or("per_object modalities")?;
    for l in &labels {
        let a = &v["accuracy"][*l];
        exact_keys(a, &["informed", "pooled"]).ok_or("accuracy kinds")?;
        (unit_interval(&a["informed"]) && unit_interval(&a["pooled"])).then_some(()).ok_or("accuracy range")?;
        let per = &v["per_object"][*l];
        exact_keys(per, &objects).ok_or("per_object names")?;
        objects.iter().all(|o| unit_interval(&per[*o])).then_some(()).ok_or("per_object range")?;
    }
    Ok(())
}

/// Checks a parsed grasp report against the documented schema.
pub fn validate_grasp_json(v: &Value) -> Result<(), String> {
    exact_keys(v, &["accuracy", "n_test", "confusion", "histogram"]).ok_or("top-level keys")?;
    unit_interval(&v["accuracy"]).then_some(()).ok_or("accuracy")?;
    let n = v["n_test"].as_u64().ok_or("n_test")?;
    let c = &v["confusion"];
    exact_keys(c, &["tp", "fp", "tn", "fn"]).ok_or("confusion keys")?;
    let total: u64 = ["tp", "fp", "tn", "fn"].iter().map(|k| c[*k].as_u64()).sum::<Option<u64>>().ok_or("confusion counts")?;
    (total == n).then_some(()).ok_or("confusion total")?;
    let h = &v["histogram"];
    exact_keys(h, &["edges", "positive", "negative"]).ok_or("histogram keys")?;
    (h["edges"].as_array().map(Vec::len) == Some(HISTOGRAM_BINS + 1)).then_some(()).ok_or("histogram edges")?;
    let mut binned = 0;
    for k in ["positive", "negative"] {
        let bins = h[k].as_array().filter(|b| b.len() == HISTOGRAM_BINS).ok_or("histogram bins")?;
        binned += bins.iter().map(Value::as_u64).sum::<Option<u64>>().ok_or("histogram counts")?;
    }
    (binned == n).then_some(()).ok_or("histogram total")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_grasp_scores() {
        let mut params = GraspNetParams::zeros().into_vec();
        let last = params.len() - 1;
        params[last] = 50.0;
        let params = GraspNetParams::from_vec(params).unwrap();
        let test: Vec<GraspSample> = (0..6).map(|k| ([0.0; 30], k % 3 != 0)).collect();
        let r = GraspReport::evaluate(&params, &test);
        assert_eq!(r.confusion, Confusion { tp: 4, fp: 2, tn: 0, fn_: 0 });
        assert_eq!(r.histogram.positive[9], 4);
        assert_eq!(r.accuracy, 4.0 / 6.0);
        assert!(validate_grasp_json(&serde_json::to_value(&r).unwrap()).is_ok());
        assert!(r.table().contains("66.7%"));
    }
}
