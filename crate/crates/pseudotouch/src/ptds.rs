//! Self-describing dataset files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "PTDS" | version u16 | header length u32 | header JSON | header CRC32
//! per record: kind u8 | payload length u32 | payload | CRC32 over kind, length and payload
//! ```
//!
//! The header names the oracle parameters, generation config, object shapes
//! and (for grasp data) the reading predictor, so every record can be
//! regenerated and compared. Patches store f32 depths plus a validity bitmap;
//! readings and poses store f64.

use std::fs;
use std::path::Path;

use pseudotouch_core::datasets::{replay_matches, TouchDatasetConfig, TouchRecord};
use pseudotouch_core::grasp::{finger_readings, render_finger_patches, synth_grasp_label, Grasp, GraspDatasetConfig, GraspRecord};
use pseudotouch_core::model::NetworkParams;
use pseudotouch_core::oracle::OracleParams;
use pseudotouch_core::recognition::{ObjectSet, TouchPredictor};
use serde::{Deserialize, Serialize};

use crate::binio::{Reader, Writer};
use crate::shapes::{object_set, ShapeEntry};
use crate::FormatError;

pub const MAGIC: [u8; 4] = *b"PTDS";
pub const FORMAT_VERSION: u16 = 1;
pub const KIND_TOUCH: u8 = 1;
pub const KIND_GRASP: u8 = 2;
pub const PIPELINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Source of the finger readings stored in grasp records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PredictorSource {
    Oracle,
    /// Tactile network, parameters inlined in declaration order.
    Network { params: Vec<f64> },
}

impl PredictorSource {
    pub fn network(params: &NetworkParams) -> Self {
        PredictorSource::Network { params: params.as_slice().to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    Touch { config: TouchDatasetConfig },
    Grasp { config: GraspDatasetConfig, predictor: PredictorSource },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub pipeline_version: String,
    pub oracle: OracleParams,
    pub shapes: Vec<ShapeEntry>,
    pub source: DatasetSource,
    pub record_count: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Records {
    Touch(Vec<TouchRecord>),
    Grasp(Vec<GraspRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Touch(r) => r.len(),
            Records::Grasp(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn kind(&self) -> u8 {
        match self {
            Records::Touch(_) => KIND_TOUCH,
            Records::Grasp(_) => KIND_GRASP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub records: Records,
}

impl Dataset {
    pub fn new(oracle: OracleParams, shapes: Vec<ShapeEntry>, source: DatasetSource, records: Records) -> Result<Self, FormatError> {
        let expected = match source {
            DatasetSource::Touch { .. } => KIND_TOUCH,
            DatasetSource::Grasp { .. } => KIND_GRASP,
        };
        if records.kind() != expected {
            return Err(FormatError::malformed("dataset", "record kind does not match its source"));
        }
        Ok(Dataset {
            header: DatasetHeader {
                pipeline_version: PIPELINE_VERSION.to_owned(),
                oracle,
                shapes,
                source,
                record_count: records.len() as u64,
            },
            records,
        })
    }

    pub fn object_set(&self) -> Result<ObjectSet, FormatError> {
        object_set(&self.header.shapes).map_err(|e| FormatError::malformed("shape list", e.to_string()))
    }
}

fn encode_touch(w: &mut Writer, r: &TouchRecord) {
    w.u32(r.record_id);
    w.u32(r.object_id);
    w.u64(r.seed);
    w.pose(&r.contact_pose);
    w.patch(&r.patch_real_like);
    w.patch(&r.patch_sim);
    w.reading(&r.reading);
}

fn decode_touch(r: &mut Reader) -> Result<TouchRecord, FormatError> {
    Ok(TouchRecord {
        record_id: r.u32()?,
        object_id: r.u32()?,
        seed: r.u64()?,
        contact_pose: r.pose()?,
        patch_real_like: r.patch()?,
        patch_sim: r.patch()?,
        reading: r.reading()?,
    })
}

fn encode_grasp(w: &mut Writer, r: &GraspRecord) {
    w.u32(r.object_id);
    w.pose(&r.grasp.pose);
    w.f64(r.grasp.max_width);
    w.f64(r.width);
    w.u8(r.label as u8);
    w.patch(&r.patch_left);
    w.patch(&r.patch_right);
    w.reading(&r.reading_left);
    w.reading(&r.reading_right);
}

fn decode_grasp(r: &mut Reader) -> Result<GraspRecord, FormatError> {
    let object_id = r.u32()?;
    let grasp = Grasp { pose: r.pose()?, max_width: r.f64()? };
    let width = r.f64()?;
    let label = match r.u8()? {
        0 => false,
        1 => true,
        other => return Err(FormatError::malformed("grasp record", format!("label byte {other}"))),
    };
    Ok(GraspRecord {
        object_id,
        grasp,
        width,
        label,
        patch_left: r.patch()?,
        patch_right: r.patch()?,
        reading_left: r.reading()?,
        reading_right: r.reading()?,
    })
}

fn push_record(out: &mut Writer, kind: u8, payload: &[u8]) {
    let start = out.buf.len();
    out.u8(kind);
    out.u32(payload.len() as u32);
    out.bytes(payload);
    let crc = crc32fast::hash(&out.buf[start..]);
    out.u32(crc);
}

pub fn encode(ds: &Dataset) -> Result<Vec<u8>, FormatError> {
    if ds.header.record_count != ds.records.len() as u64 {
        return Err(FormatError::malformed("dataset", "header record count disagrees with records"));
    }
    let header = serde_json::to_vec(&ds.header)?;
    let mut w = Writer::default();
    w.bytes(&MAGIC);
    w.u16(FORMAT_VERSION);
    w.u32(header.len() as u32);
    w.bytes(&header);
    w.u32(crc32fast::hash(&header));
    let mut payload = Writer::default();
    let kind = ds.records.kind();
    let emit = |payload: &mut Writer, w: &mut Writer| {
        push_record(w, kind, &payload.buf);
        payload.buf.clear();
    };
    match &ds.records {
        Records::Touch(rs) => rs.iter().for_each(|r| {
            encode_touch(&mut payload, r);
            emit(&mut payload, &mut w);
        }),
        Records::Grasp(rs) => rs.iter().for_each(|r| {
            encode_grasp(&mut payload, r);
            emit(&mut payload, &mut w);
        }),
    }
    Ok(w.buf)
}

pub fn decode(bytes: &[u8]) -> Result<Dataset, FormatError> {
    let mut r = Reader::new(bytes);
    let found: [u8; 4] = r.take(4)?.try_into().expect("4 bytes");
    if found != MAGIC {
        return Err(FormatError::BadMagic { expected: MAGIC, found });
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(FormatError::Version { found: version, expected: FORMAT_VERSION });
    }
    let header_len = r.u32()? as usize;
    let header_bytes = r.take(header_len)?;
    if r.u32()? != crc32fast::hash(header_bytes) {
        return Err(FormatError::Checksum { section: "header".into() });
    }
    let header: DatasetHeader = serde_json::from_slice(header_bytes)?;
    let kind = match header.source {
        DatasetSource::Touch { .. } => KIND_TOUCH,
        DatasetSource::Grasp { .. } => KIND_GRASP,
    };
    let n = header.record_count as usize;
    let mut touch = Vec::new();
    let mut grasp = Vec::new();
    for i in 0..n {
        let start = r.position();
        let record_kind = r.u8()?;
        let len = r.u32()? as usize;
        let payload = r.take(len)?;
        let crc = r.u32()?;
        if crc != crc32fast::hash(&bytes[start..start + 5 + len]) {
            return Err(FormatError::Checksum { section: format!("record {i}") });
        }
        if record_kind != kind {
            return Err(FormatError::malformed("record", format!("record {i} has kind {record_kind}, dataset holds kind {kind}")));
        }
        let mut pr = Reader::new(payload);
        if kind == KIND_TOUCH {
            touch.push(decode_touch(&mut pr)?);
        } else {
            grasp.push(decode_grasp(&mut pr)?);
        }
        if pr.remaining() != 0 {
            return Err(FormatError::malformed("record", format!("record {i} has {} trailing bytes", pr.remaining())));
        }
    }
    if r.remaining() != 0 {
        return Err(FormatError::malformed("dataset", format!("{} bytes after the last record", r.remaining())));
    }
    let records = if kind == KIND_TOUCH { Records::Touch(touch) } else { Records::Grasp(grasp) };
    Ok(Dataset { header, records })
}

pub fn save_dataset(path: &Path, ds: &Dataset) -> Result<(), FormatError> {
    Ok(fs::write(path, encode(ds)?)?)
}

pub fn load_dataset(path: &Path) -> Result<Dataset, FormatError> {
    decode(&fs::read(path)?)
}

/// Predictor named by a grasp dataset header.
pub enum StoredPredictor {
    Oracle(OracleParams),
    Network(NetworkParams),
}

impl TouchPredictor for StoredPredictor {
    fn predict_reading(&self, patch: &pseudotouch_core::patch::NormalizedPatch) -> pseudotouch_core::oracle::TactileReading {
        match self {
            StoredPredictor::Oracle(o) => o.predict_reading(patch),
            StoredPredictor::Network(p) => p.predict_reading(patch),
        }
    }
}

impl StoredPredictor {
    pub fn from_source(source: &PredictorSource, oracle: &OracleParams) -> Result<Self, FormatError> {
        Ok(match source {
            PredictorSource::Oracle => StoredPredictor::Oracle(*oracle),
            PredictorSource::Network { params } => StoredPredictor::Network(
                NetworkParams::from_vec(params.clone()).map_err(|e| FormatError::ShapeMismatch(e.to_string()))?,
            ),
        })
    }
}

/// Indices of records that their stored provenance does not reproduce.
///
/// Touch records are re-derived from their seeds. Grasp records are
/// re-rendered from the stored grasp, relabeled and re-read through the
/// stored predictor.
pub fn replay_mismatches(ds: &Dataset) -> Result<Vec<usize>, FormatError> {
    let oracle = &ds.header.oracle;
    match (&ds.header.source, &ds.records) {
        (DatasetSource::Touch { config }, Records::Touch(rs)) => {
            Ok(rs.iter().enumerate().filter(|(_, r)| !replay_matches(r, oracle, config)).map(|(i, _)| i).collect())
        }
        (DatasetSource::Grasp { predictor, .. }, Records::Grasp(rs)) => {
            let set = ds.object_set()?;
            let predictor = StoredPredictor::from_source(predictor, oracle)?;
            let mut bad = Vec::new();
            for (i, r) in rs.iter().enumerate() {
                let ok = set.index_of(r.object_id).is_some_and(|k| {
                    let bvh = &set.objects()[k].bvh;
                    let Ok((left, right)) = render_finger_patches(bvh, &r.grasp, r.width) else {
                        return false;
                    };
                    let (rl, rr) = finger_readings(&predictor, &left, &right);
                    left == r.patch_left
                        && right == r.patch_right
                        && rl == r.reading_left
                        && rr == r.reading_right
                        && synth_grasp_label(bvh, &r.grasp, r.width) == r.label
                });
                if !ok {
                    bad.push(i);
                }
            }
            Ok(bad)
        }
        _ => Err(FormatError::malformed("dataset", "record kind does not match its source")),
    }
}
