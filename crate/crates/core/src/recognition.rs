//! Sequential Bayesian object recognition by touch.
//!
//! Each candidate object is scored by how well it explains the measured
//! contact locations (proprioception) and tactile readings (touch). Touch is
//! scored by rendering the candidate's surface at the measured location and
//! predicting the reading it would produce.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::geometry::{accept_sample, make_primitive, AcceptParams, Bvh, GeometryError, PrimitiveSpec, SampleMode, SurfaceSampler};
use crate::math::{exp, ln, sqrt, Pose, Vec3};
use crate::model::{forward, NetworkParams};
use crate::oracle::{add_sensor_noise, oracle_reading, OracleParams, TactileReading};
use crate::patch::{degrade_patch, normalize_or_far, render_patch, DegradeConfig, DepthPatch, NormalizedPatch, RenderConfig};

/// Attempts allowed when searching for an acceptable touch location.
pub const PLAN_ATTEMPTS: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub enum RecognitionError {
    EmptySet,
    DuplicateId(u32),
    Geometry(GeometryError),
    PlanningFailed { object: u32, attempts: usize },
    UnknownObject(usize),
    InsufficientPool { object: u32, available: usize, requested: usize },
    InvalidConfig(&'static str),
}

impl fmt::Display for RecognitionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecognitionError::EmptySet => write!(f, "object set is empty"),
            RecognitionError::DuplicateId(id) => write!(f, "object id {id} appears twice"),
            RecognitionError::Geometry(e) => write!(f, "geometry: {e}"),
            RecognitionError::PlanningFailed { object, attempts } => {
                write!(f, "no acceptable touch on object {object} after {attempts} attempts")
            }
            RecognitionError::UnknownObject(i) => write!(f, "object index {i} is out of range"),
            RecognitionError::InsufficientPool {
                object,
                available,
                requested,
            } => write!(
                f,
                "pool of object {object} holds {available} observations, {requested} requested"
            ),
            RecognitionError::InvalidConfig(what) => write!(f, "invalid recognition config: {what}"),
        }
    }
}

impl core::error::Error for RecognitionError {}

impl From<GeometryError> for RecognitionError {
    fn from(e: GeometryError) -> Self {
        RecognitionError::Geometry(e)
    }
}

#[derive(Clone, Debug)]
pub struct KnownObject {
    pub id: u32,
    pub name: String,
    pub bvh: Bvh,
}

/// Candidate objects with known surfaces. Beliefs index objects by position.
#[derive(Clone, Debug)]
pub struct ObjectSet {
    objects: Vec<KnownObject>,
}

impl ObjectSet {
    pub fn new(objects: Vec<KnownObject>) -> Result<Self, RecognitionError> {
        if objects.is_empty() {
            return Err(RecognitionError::EmptySet);
        }
        for (i, o) in objects.iter().enumerate() {
            if objects[..i].iter().any(|p| p.id == o.id) {
                return Err(RecognitionError::DuplicateId(o.id));
            }
        }
        Ok(ObjectSet { objects })
    }

    /// Builds primitives, assigning ids in order.
    pub fn from_specs(specs: &[(String, PrimitiveSpec)]) -> Result<Self, RecognitionError> {
        let objects = specs
            .iter()
            .enumerate()
            .map(|(i, (name, spec))| {
                Ok(KnownObject {
                    id: i as u32,
                    name: name.clone(),
                    bvh: Bvh::build(make_primitive(spec)?)?,
                })
            })
            .collect::<Result<Vec<_>, RecognitionError>>()?;
        Self::new(objects)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&KnownObject> {
        self.objects.get(index)
    }

    pub fn objects(&self) -> &[KnownObject] {
        &self.objects
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }
}

/// Probability per object of an [`ObjectSet`], in set order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Belief(pub Vec<f64>);

impl Belief {
    pub fn uniform(n: usize) -> Self {
        Belief(vec![1.0 / n as f64; n])
    }

    /// Normalized exponentials of `log_scores`, shifted by their maximum.
    pub fn from_log_scores(log_scores: &[f64]) -> Self {
        let max = log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Belief::uniform(log_scores.len());
        }
        let w: Vec<f64> = log_scores.iter().map(|&s| exp(s - max)).collect();
        let total: f64 = w.iter().sum();
        Belief(w.into_iter().map(|x| x / total).collect())
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|&p| p >= 0.0 && p.is_finite()) && (self.0.iter().sum::<f64>() - 1.0).abs() <= 1e-9
    }
}

pub fn uniform_prior(set: &ObjectSet) -> Belief {
    Belief::uniform(set.len())
}

/// Maximum a-posteriori choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapEstimate {
    pub index: usize,
    /// Another object shares the maximal probability exactly.
    pub tie: bool,
}

/// Argmax of the belief; exact ties go to the lowest index.
pub fn map_object(belief: &Belief) -> MapEstimate {
    let mut best = 0;
    let mut tie = false;
    for (i, &p) in belief.0.iter().enumerate().skip(1) {
        if p > belief.0[best] {
            best = i;
            tie = false;
        } else if p == belief.0[best] {
            tie = true;
        }
    }
    MapEstimate { index: best, tie }
}

/// Categorical draw from the belief. Consumes one uniform variate.
pub fn sample_hypothesis<R: Rng + ?Sized>(belief: &Belief, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in belief.0.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Anything that maps a normalized patch to a predicted reading.
pub trait TouchPredictor {
    fn predict_reading(&self, patch: &NormalizedPatch) -> TactileReading;
}

impl TouchPredictor for NetworkParams {
    fn predict_reading(&self, patch: &NormalizedPatch) -> TactileReading {
        forward(self, patch)
    }
}

impl TouchPredictor for OracleParams {
    fn predict_reading(&self, patch: &NormalizedPatch) -> TactileReading {
        oracle_reading(patch, self)
    }
}

impl<T: TouchPredictor + ?Sized> TouchPredictor for &T {
    fn predict_reading(&self, patch: &NormalizedPatch) -> TactileReading {
        (**self).predict_reading(patch)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modality {
    #[serde(rename = "P")]
    Proprioception,
    #[serde(rename = "T")]
    Touch,
    #[serde(rename = "P+T")]
    Both,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Proprioception, Modality::Touch, Modality::Both];

    pub fn uses_touch(self) -> bool {
        matches!(self, Modality::Touch | Modality::Both)
    }

    pub fn uses_proprioception(self) -> bool {
        matches!(self, Modality::Proprioception | Modality::Both)
    }

    pub fn label(self) -> &'static str {
        match self {
            Modality::Proprioception => "P",
            Modality::Touch => "T",
            Modality::Both => "P+T",
        }
    }
}

/// Exponent applied to a normalized distance `d/σ` inside the likelihood.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikelihoodForm {
    /// `exp(−d/σ)`.
    Plain,
    /// `exp(−d²/(2σ²))`.
    Squared,
}

impl LikelihoodForm {
    #[inline]
    pub fn log_likelihood(self, distance: f64, sigma: f64) -> f64 {
        let x = distance / sigma;
        match self {
            LikelihoodForm::Plain => -x,
            LikelihoodForm::Squared => -0.5 * x * x,
        }
    }
}

/// Simulated measurement imperfections of a touch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementNoise {
    /// Per-axis standard deviation of the recorded contact position, m.
    /// `None` uses `σ_proprio/√3`.
    pub position_sd: Option<f64>,
    pub sensor_sd: f64,
    pub degrade: DegradeConfig,
}

impl MeasurementNoise {
    pub const NONE: MeasurementNoise = MeasurementNoise {
        position_sd: Some(0.0),
        sensor_sd: 0.0,
        degrade: DegradeConfig::NONE,
    };
}

impl Default for MeasurementNoise {
    fn default() -> Self {
        MeasurementNoise {
            position_sd: None,
            sensor_sd: 2.0,
            degrade: DegradeConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecognitionConfig {
    pub sigma_touch: f64,
    /// Meters.
    pub sigma_proprio: f64,
    pub n_touches: usize,
    pub modality: Modality,
    pub touch_form: LikelihoodForm,
    pub proprio_form: LikelihoodForm,
    pub noise: MeasurementNoise,
    /// Distance from the planned location at which the approach starts, m.
    pub standoff: f64,
    pub sample_mode: SampleMode,
    pub accept: AcceptParams,
    pub render: RenderConfig,
    pub seed: u64,
}

impl Default for RecognitionConfig {
    fn default() -> Self {
        RecognitionConfig {
            sigma_touch: 8.6,
            sigma_proprio: 0.0088,
            n_touches: 10,
            modality: Modality::Touch,
            touch_form: LikelihoodForm::Plain,
            proprio_form: LikelihoodForm::Plain,
            noise: MeasurementNoise::default(),
            standoff: 0.05,
            sample_mode: SampleMode::Vertex,
            accept: AcceptParams::default(),
            render: RenderConfig::default(),
            seed: 0,
        }
    }
}

impl RecognitionConfig {
    pub fn validate(&self) -> Result<(), RecognitionError> {
        if !(self.sigma_touch > 0.0 && self.sigma_proprio > 0.0) {
            return Err(RecognitionError::InvalidConfig("sigmas must be positive"));
        }
        if self.n_touches == 0 {
            return Err(RecognitionError::InvalidConfig("n_touches must be at least 1"));
        }
        if !(self.standoff > 0.0) {
            return Err(RecognitionError::InvalidConfig("standoff must be positive"));
        }
        if !self.noise.degrade.is_valid() || self.noise.sensor_sd < 0.0 {
            return Err(RecognitionError::InvalidConfig("noise settings must be non-negative"));
        }
        Ok(())
    }

    pub fn position_sd(&self) -> f64 {
        self.noise.position_sd.unwrap_or(self.sigma_proprio / sqrt(3.0))
    }
}

/// One executed touch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TouchObservation {
    pub reading: TactileReading,
    /// Recorded contact location, m.
    pub location: Vec3,
    /// Surface normal at the actual contact.
    pub normal: Vec3,
    /// Planned location, m.
    pub desired: Vec3,
    /// Nothing was touched along the approach.
    pub missed: bool,
}

/// Sensor pose at the point of `bvh` nearest to `location`: −z into the
/// surface along the interpolated normal, x from world +x projected onto the
/// tangent plane (world +y when +x is parallel to the normal).
pub fn contact_frame(bvh: &Bvh, location: Vec3) -> Pose {
    let cp = bvh.closest_point(location);
    Pose::from_z_axis(cp.point, cp.normal, Vec3::X)
}

/// Touch likelihood with its logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TouchLikelihood {
    pub log_value: f64,
    pub predicted: TactileReading,
    /// The candidate showed no surface within range; the floor value was used.
    pub render_failed: bool,
}

impl TouchLikelihood {
    pub fn value(&self) -> f64 {
        exp(self.log_value)
    }
}

/// How well `candidate` explains `reading` measured at `location`.
///
/// The candidate's patch is rendered in [`contact_frame`] and passed through
/// the predictor; the likelihood decays with the reading distance over
/// `sigma_touch`.
pub fn touch_likelihood<P: TouchPredictor + ?Sized>(
    reading: &TactileReading,
    candidate: &Bvh,
    location: Vec3,
    predictor: &P,
    cfg: &RecognitionConfig,
) -> TouchLikelihood {
    let patch = render_patch(candidate, &contact_frame(candidate, location), &cfg.render);
    if patch.valid_count() == 0 {
        return TouchLikelihood {
            log_value: cfg.touch_form.log_likelihood(reading.norm(), cfg.sigma_touch),
            predicted: TactileReading::ZERO,
            render_failed: true,
        };
    }
    let predicted = predictor.predict_reading(&normalize_or_far(&patch));
    TouchLikelihood {
        log_value: cfg.touch_form.log_likelihood(predicted.distance(reading), cfg.sigma_touch),
        predicted,
        render_failed: false,
    }
}

/// Touch log-likelihood of a missed touch: the reading is compared against
/// the prediction for a patch with nothing in view.
pub fn miss_log_likelihood<P: TouchPredictor + ?Sized>(reading: &TactileReading, predictor: &P, cfg: &RecognitionConfig) -> f64 {
    let predicted = predictor.predict_reading(&NormalizedPatch::far());
    cfg.touch_form.log_likelihood(predicted.distance(reading), cfg.sigma_touch)
}

/// Log of the proprioceptive likelihood: distance from `location` to the surface over `sigma`.
pub fn proprio_log_likelihood(location: Vec3, candidate: &Bvh, sigma: f64, form: LikelihoodForm) -> f64 {
    form.log_likelihood(candidate.min_distance(location).0, sigma)
}

/// `exp(−min_distance/σ)` with the plain form.
pub fn proprio_likelihood(location: Vec3, candidate: &Bvh, sigma: f64) -> f64 {
    exp(proprio_log_likelihood(location, candidate, sigma, LikelihoodForm::Plain))
}

/// Log-likelihood contribution of one observation for every object.
pub fn observation_log_likelihoods<P: TouchPredictor + ?Sized>(
    set: &ObjectSet,
    obs: &TouchObservation,
    predictor: &P,
    cfg: &RecognitionConfig,
) -> Vec<f64> {
    let miss_touch = (obs.missed && cfg.modality.uses_touch()).then(|| miss_log_likelihood(&obs.reading, predictor, cfg));
    set.objects
        .iter()
        .map(|o| {
            let mut s = 0.0;
            if cfg.modality.uses_touch() {
                s += match miss_touch {
                    Some(l) => l,
                    None => touch_likelihood(&obs.reading, &o.bvh, obs.location, predictor, cfg).log_value,
                };
            }
            if cfg.modality.uses_proprioception() {
                s += proprio_log_likelihood(obs.location, &o.bvh, cfg.sigma_proprio, cfg.proprio_form);
            }
            s
        })
        .collect()
}

/// Unnormalized log-posterior per object: uniform log-prior plus the
/// log-likelihoods of every observation under the configured modality.
pub fn log_scores<P: TouchPredictor + ?Sized>(
    set: &ObjectSet,
    observations: &[TouchObservation],
    predictor: &P,
    cfg: &RecognitionConfig,
) -> Vec<f64> {
    let mut scores = vec![-ln(set.len() as f64); set.len()];
    for obs in observations {
        for (s, l) in scores.iter_mut().zip(observation_log_likelihoods(set, obs, predictor, cfg)) {
            *s += l;
        }
    }
    scores
}

pub fn posterior<P: TouchPredictor + ?Sized>(
    set: &ObjectSet,
    observations: &[TouchObservation],
    predictor: &P,
    cfg: &RecognitionConfig,
) -> Belief {
    Belief::from_log_scores(&log_scores(set, observations, predictor, cfg))
}

/// Draws surface samples on `bvh` until one passes [`accept_sample`].
/// Returns the location and its outward normal.
pub fn plan_touch<R: Rng + ?Sized>(
    bvh: &Bvh,
    object_id: u32,
    rng: &mut R,
    cfg: &RecognitionConfig,
) -> Result<(Vec3, Vec3), RecognitionError> {
    let sampler = SurfaceSampler::new(bvh.mesh());
    for _ in 0..PLAN_ATTEMPTS {
        let s = sampler.sample(rng, cfg.sample_mode);
        if accept_sample(&s, bvh, &cfg.accept) {
            return Ok((s.point, s.normal));
        }
    }
    Err(RecognitionError::PlanningFailed {
        object: object_id,
        attempts: PLAN_ATTEMPTS,
    })
}

/// Result of a simulated touch, with the clean and degraded patches seen.
#[derive(Clone, Debug)]
pub struct ExecutedTouch {
    pub observation: TouchObservation,
    pub clean_patch: Option<DepthPatch>,
    pub degraded_patch: Option<DepthPatch>,
}

/// Approaches `desired` along `−normal` from `standoff` away until the true
/// object is hit, then records a noisy contact position and the sensor
/// reading of the (degraded) patch at the contact. No hit within twice the
/// standoff is a miss: zero reading, location at the end of the approach.
///
/// Random draws, in order: 3 position normals, the degradation stream, and
/// 15 sensor normals; a miss draws nothing.
pub fn execute_touch_sim<R: Rng + ?Sized>(
    truth: &Bvh,
    desired: Vec3,
    normal: Vec3,
    oracle: &OracleParams,
    cfg: &RecognitionConfig,
    rng: &mut R,
) -> ExecutedTouch {
    let start = desired + normal * cfg.standoff;
    let reach = 2.0 * cfg.standoff;
    let Some(hit) = truth.raycast(start, -normal, reach) else {
        return ExecutedTouch {
            observation: TouchObservation {
                reading: TactileReading::ZERO,
                location: start - normal * reach,
                normal,
                desired,
                missed: true,
            },
            clean_patch: None,
            degraded_patch: None,
        };
    };
    let sd = cfg.position_sd();
    let mut noise = [0.0; 3];
    for n in noise.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *n = sd * z;
    }
    let location = hit.point + Vec3::from_array(noise);
    let frame = contact_frame(truth, hit.point);
    let clean = render_patch(truth, &frame, &cfg.render);
    let degraded = degrade_patch(&clean, rng, &cfg.noise.degrade);
    let clean_reading = oracle_reading(&normalize_or_far(&degraded), oracle);
    let reading = add_sensor_noise(&clean_reading, rng, cfg.noise.sensor_sd);
    ExecutedTouch {
        observation: TouchObservation {
            reading,
            location,
            normal: frame.z_axis(),
            desired,
            missed: false,
        },
        clean_patch: Some(clean),
        degraded_patch: Some(degraded),
    }
}

/// One touch of an episode with the state after incorporating it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpisodeStep {
    pub hypothesis: usize,
    pub observation: TouchObservation,
    pub log_scores: Vec<f64>,
    pub belief: Belief,
}

#[derive(Clone, Debug)]
pub struct EpisodeResult {
    pub truth: usize,
    pub estimate: MapEstimate,
    pub steps: Vec<EpisodeStep>,
}

impl EpisodeResult {
    pub fn correct(&self) -> bool {
        self.estimate.index == self.truth
    }
}

/// Informed-sampling episode: each touch is planned on an object drawn from
/// the current posterior and executed on the true object.
pub fn run_episode<P: TouchPredictor + ?Sized, R: Rng + ?Sized>(
    set: &ObjectSet,
    truth: usize,
    predictor: &P,
    oracle: &OracleParams,
    cfg: &RecognitionConfig,
    rng: &mut R,
) -> Result<EpisodeResult, RecognitionError> {
    cfg.validate()?;
    let true_obj = set.get(truth).ok_or(RecognitionError::UnknownObject(truth))?;
    let mut scores = log_scores(set, &[], predictor, cfg);
    let mut steps = Vec::with_capacity(cfg.n_touches);
    for _ in 0..cfg.n_touches {
        let belief = Belief::from_log_scores(&scores);
        let hypothesis = sample_hypothesis(&belief, rng);
        let hyp = &set.objects[hypothesis];
        let (desired, normal) = plan_touch(&hyp.bvh, hyp.id, rng, cfg)?;
        let observation = execute_touch_sim(&true_obj.bvh, desired, normal, oracle, cfg, rng).observation;
        for (s, l) in scores.iter_mut().zip(observation_log_likelihoods(set, &observation, predictor, cfg)) {
            *s += l;
        }
        steps.push(EpisodeStep {
            hypothesis,
            observation,
            log_scores: scores.clone(),
            belief: Belief::from_log_scores(&scores),
        });
    }
    Ok(EpisodeResult {
        truth,
        estimate: map_object(&Belief::from_log_scores(&scores)),
        steps,
    })
}

/// Touches recorded on one object, planned on that object itself.
pub fn record_pool<R: Rng + ?Sized>(
    set: &ObjectSet,
    truth: usize,
    size: usize,
    oracle: &OracleParams,
    cfg: &RecognitionConfig,
    rng: &mut R,
) -> Result<Vec<TouchObservation>, RecognitionError> {
    let obj = set.get(truth).ok_or(RecognitionError::UnknownObject(truth))?;
    (0..size)
        .map(|_| {
            let (desired, normal) = plan_touch(&obj.bvh, obj.id, rng, cfg)?;
            Ok(execute_touch_sim(&obj.bvh, desired, normal, oracle, cfg, rng).observation)
        })
        .collect()
}

/// Recorded touches per object with their per-object log-likelihoods under
/// one modality, so repeated pooled trials only sum cached terms.
#[derive(Clone, Debug)]
pub struct ScoredPools {
    /// `pools[truth][k][object]`.
    pools: Vec<Vec<Vec<f64>>>,
}

impl ScoredPools {
    pub fn new<P: TouchPredictor + ?Sized>(
        set: &ObjectSet,
        pools: &[Vec<TouchObservation>],
        predictor: &P,
        cfg: &RecognitionConfig,
    ) -> Result<Self, RecognitionError> {
        if pools.len() != set.len() {
            return Err(RecognitionError::InvalidConfig("need one pool per object"));
        }
        Ok(ScoredPools {
            pools: pools
                .iter()
                .map(|pool| pool.iter().map(|o| observation_log_likelihoods(set, o, predictor, cfg)).collect())
                .collect(),
        })
    }

    /// MAP correctness of one pooled trial: `n` observations drawn without
    /// replacement from the true object's pool, scored once.
    pub fn trial<R: Rng + ?Sized>(&self, truth: usize, n: usize, rng: &mut R) -> Result<bool, RecognitionError> {
        let pool = self.pools.get(truth).ok_or(RecognitionError::UnknownObject(truth))?;
        if pool.len() < n {
            return Err(RecognitionError::InsufficientPool {
                object: truth as u32,
                available: pool.len(),
                requested: n,
            });
        }
        let k = self.pools.len();
        let mut scores = vec![-ln(k as f64); k];
        for idx in rand::seq::index::sample(rng, pool.len(), n) {
            for (s, l) in scores.iter_mut().zip(pool[idx].iter()) {
                *s += l;
            }
        }
        Ok(map_object(&Belief::from_log_scores(&scores)).index == truth)
    }

    /// Mean accuracy over `repetitions` trials per true object.
    pub fn accuracy<R: Rng + ?Sized>(&self, n: usize, repetitions: usize, rng: &mut R) -> Result<f64, RecognitionError> {
        let mut correct = 0usize;
        for truth in 0..self.pools.len() {
            for _ in 0..repetitions {
                correct += self.trial(truth, n, rng)? as usize;
            }
        }
        Ok(correct as f64 / (self.pools.len() * repetitions) as f64)
    }
}

/// Pooled ablation: bypasses informed sampling and scores `n` observations
/// drawn from each true object's recorded pool.
pub fn run_pooled_ablation<P: TouchPredictor + ?Sized, R: Rng + ?Sized>(
    pools: &[Vec<TouchObservation>],
    set: &ObjectSet,
    predictor: &P,
    cfg: &RecognitionConfig,
    n: usize,
    repetitions: usize,
    rng: &mut R,
) -> Result<f64, RecognitionError> {
    ScoredPools::new(set, pools, predictor, cfg)?.accuracy(n, repetitions, rng)
}

/// Mean reading distance between predictions and measurements, a data-driven
/// value for `sigma_touch`.
pub fn calibrate_sigma_touch<P: TouchPredictor + ?Sized>(predictor: &P, pairs: &[(NormalizedPatch, TactileReading)]) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    let total: f64 = pairs.iter().map(|(p, t)| predictor.predict_reading(p).distance(t)).sum();
    Some(total / pairs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_priors() {
        assert_eq!(Belief::uniform(5).0, vec![0.2; 5]);
        assert_eq!(Belief::uniform(1).0, vec![1.0]);
        assert_eq!(Belief::uniform(8).0, vec![0.125; 8]);
    }

    #[test]
    fn map_ties() {
        assert_eq!(map_object(&Belief(vec![0.7, 0.2, 0.1])), MapEstimate { index: 0, tie: false });
        assert_eq!(map_object(&Belief(vec![0.5, 0.5])), MapEstimate { index: 0, tie: true });
        assert_eq!(map_object(&Belief(vec![0.1, 0.2, 0.7])), MapEstimate { index: 2, tie: false });
        assert!(map_object(&Belief::uniform(5)).tie);
    }

    #[test]
    fn likelihood_forms() {
        assert!((exp(LikelihoodForm::Plain.log_likelihood(8.6, 8.6)) - 0.36787944117144233).abs() < 1e-15);
        assert_eq!(LikelihoodForm::Squared.log_likelihood(2.0, 1.0), -2.0);
    }

    #[test]
    fn degenerate_belief_always_samples_its_mode() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(sample_hypothesis(&Belief(vec![1.0, 0.0, 0.0]), &mut rng), 0);
            assert_eq!(sample_hypothesis(&Belief(vec![0.0, 0.0, 1.0]), &mut rng), 2);
        }
    }

    #[test]
    fn log_softmax_handles_large_magnitudes() {
        let b = Belief::from_log_scores(&[-1e6, -1e6 - 1.0, -2e6]);
        assert!(b.is_valid());
        assert!((b.0[0] / b.0[1] - core::f64::consts::E).abs() < 1e-12);
    }
}
