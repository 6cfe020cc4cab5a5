//! The ten acceptance criteria, run in sequence with one PASS/FAIL line each.
//!
//! The trained tactile network from criterion 3 is reused as the predictor in
//! criteria 7 and 9, and the datasets of 3 and 9 are the ones persisted in 10.

use std::time::{Duration, Instant};

use pseudotouch::pipeline::{constant_mse, mean_reading, network_mse, split_grasp, split_touch, touch_pairs};
use pseudotouch::ptds::{self, Dataset, DatasetSource, PredictorSource, Records, StoredPredictor};
use pseudotouch::shapes;
use pseudotouch::FormatError;
use pseudotouch_core::datasets::{generate_touch_dataset, SplitSpec, TouchDatasetConfig};
use pseudotouch_core::geometry::triangle::{closest_point_on_triangle, ray_triangle};
use pseudotouch_core::geometry::{
    accept_sample, make_primitive, AnalyticPlane, AnalyticSphere, Bvh, SampleMode, SurfaceSampler, TriangleMesh,
};
use pseudotouch_core::grasp::{evaluate_grasp_accuracy, generate_grasp_dataset, train_grasp_classifier, GraspDatasetConfig, GraspRecord};
use pseudotouch_core::math::{Pose, Vec3};
use pseudotouch_core::model::{backward, mse_loss, train, LrSchedule, NetworkParams, TrainConfig, Trace, PARAM_COUNT};
use pseudotouch_core::oracle::{oracle_reading, OracleParams, TactileReading, READING_DIM};
use pseudotouch_core::patch::{cell_offset_mm, normalize_or_far, render_patch, NormalizedPatch, RenderConfig, PATCH_CELLS};
use pseudotouch_core::presets::{default8, dissimilar5};
use pseudotouch_core::recognition::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

// ---------------------------------------------------------------- 1

const FD_STEP: f64 = 1e-4;
const FD_TOL: f64 = 1e-4;

fn loss_and_pattern(p: &NetworkParams, x: &NormalizedPatch, t: &TactileReading) -> (f64, Vec<bool>) {
    let tr = Trace::new(p, &x.values);
    let pattern = tr.z1.iter().chain(tr.z2.iter()).chain(tr.zh.iter()).map(|&z| z > 0.0).collect();
    (mse_loss(&TactileReading(tr.output), t), pattern)
}

/// Worst relative error over all components, or `None` when a probe crosses
/// a ReLU kink.
fn gradient_error(params: &NetworkParams, x: &NormalizedPatch, t: &TactileReading) -> Option<f64> {
    let grad = backward(params, x, t);
    let (_, base) = loss_and_pattern(params, x, t);
    let mut p = params.clone();
    let mut worst: f64 = 0.0;
    for i in 0..PARAM_COUNT {
        let orig = p.as_slice()[i];
        p.as_mut_slice()[i] = orig + FD_STEP;
        let (lp, pp) = loss_and_pattern(&p, x, t);
        p.as_mut_slice()[i] = orig - FD_STEP;
        let (lm, pm) = loss_and_pattern(&p, x, t);
        p.as_mut_slice()[i] = orig;
        if pp != base || pm != base {
            return None;
        }
        let fd = (lp - lm) / (2.0 * FD_STEP);
        let a = grad.as_slice()[i];
        worst = worst.max((a - fd).abs() / a.abs().max(fd.abs()).max(1e-8));
    }
    Some(worst)
}

fn gradient_correctness() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut checked, mut skipped, mut worst) = (0, 0, 0.0f64);
    while checked < 100 {
        let params = NetworkParams::init(rng.random());
        let x = NormalizedPatch::from_values(std::array::from_fn(|_| rng.random::<f64>()));
        let mut t = TactileReading::ZERO;
        for m in 0..READING_DIM {
            t[m] = rng.random_range(-2.0..2.0);
        }
        match gradient_error(&params, &x, &t) {
            Some(e) => {
                worst = worst.max(e);
                checked += 1;
            }
            None => skipped += 1,
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst < FD_TOL && within(elapsed, 30),
        format!("{checked} triples x {PARAM_COUNT} components, worst rel err {worst:.2e}, {skipped} kink-crossing triples redrawn, {elapsed:.1?}"),
    )
}

// ---------------------------------------------------------------- 2

fn oracle_labeled(n: usize, seed: u64) -> Vec<(NormalizedPatch, TactileReading)> {
    let meshes: Vec<(TriangleMesh, Bvh)> = default8()
        .iter()
        .map(|(_, s)| {
            let m = make_primitive(s).unwrap();
            (m.clone(), Bvh::build(m).unwrap())
        })
        .collect();
    let oracle = OracleParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (mesh, bvh) = &meshes[out.len() % meshes.len()];
        let s = SurfaceSampler::new(mesh).sample(&mut rng, SampleMode::Vertex);
        if !accept_sample(&s, bvh, &Default::default()) {
            continue;
        }
        let pose = Pose::from_z_axis(s.point, s.normal, Vec3::X);
        let patch = normalize_or_far(&render_patch(bvh, &pose, &RenderConfig::default()));
        let reading = oracle_reading(&patch, &oracle);
        out.push((patch, reading));
    }
    out
}

fn overfit_sanity() -> Verdict {
    let start = Instant::now();
    let data = oracle_labeled(32, 1);
    // A full batch makes one optimizer step per epoch.
    let cfg = TrainConfig {
        learning_rate: 1e-2,
        batch_size: 32,
        epochs: 2000,
        schedule: LrSchedule::Cosine,
        ..TrainConfig::default()
    };
    let out = train(&data, None, &cfg).expect("training runs");
    let mse = network_mse(&out.params, &data);
    let baseline = constant_mse(&mean_reading(&data), &data);
    let elapsed = start.elapsed();
    verdict(
        mse < 1e-3 && within(elapsed, 60),
        format!("32 samples, 2000 steps: training MSE {mse:.3e} (target < 1e-3, mean predictor {baseline:.1}), {elapsed:.1?}"),
    )
}

// ---------------------------------------------------------------- 3

struct Trained {
    params: NetworkParams,
    dataset: Dataset,
}

fn end_to_end_training() -> (Verdict, Trained) {
    let start = Instant::now();
    let entries = shapes::entries(default8());
    let set = shapes::object_set(&entries).unwrap();
    let oracle = OracleParams::default();
    let config = TouchDatasetConfig::default();
    let generated = generate_touch_dataset(&set, &oracle, &config);
    let split = split_touch(&generated.records, &SplitSpec::default()).unwrap();
    let pairs = touch_pairs(&split);
    let n_pairs = pairs.train.len() + pairs.val.len() + pairs.test.len();
    let out = train(&pairs.train, Some(&pairs.val), &TrainConfig::default()).expect("training runs");
    let test = network_mse(&out.params, &pairs.test);
    let baseline = constant_mse(&mean_reading(&pairs.train), &pairs.test);
    let elapsed = start.elapsed();
    let v = verdict(
        generated.records.len() == 1600 && n_pairs == 3200 && test <= 0.5 * baseline && within(elapsed, 300),
        format!(
            "{} records, {n_pairs} pairs ({}/{}/{}): test MSE {test:.1} vs mean predictor {baseline:.1} (ratio {:.3}), {elapsed:.1?}",
            generated.records.len(),
            pairs.train.len(),
            pairs.val.len(),
            pairs.test.len(),
            test / baseline
        ),
    );
    let dataset = Dataset::new(oracle, entries, DatasetSource::Touch { config }, Records::Touch(generated.records)).unwrap();
    (v, Trained { params: out.params, dataset })
}

// ---------------------------------------------------------------- 4

fn scan_raycast(mesh: &TriangleMesh, o: Vec3, d: Vec3, t_max: f64) -> Option<(f64, u32)> {
    let mut best: Option<(f64, u32)> = None;
    for tri in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.corners(tri);
        if let Some((t, _, _)) = ray_triangle(o, d, t_max, a, b, c) {
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, tri as u32));
            }
        }
    }
    best
}

fn scan_distances(mesh: &TriangleMesh, p: Vec3) -> Vec<f64> {
    (0..mesh.triangle_count())
        .map(|tri| {
            let [a, b, c] = mesh.corners(tri);
            (closest_point_on_triangle(p, a, b, c).0 - p).norm()
        })
        .collect()
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if (1e-3..=1.0).contains(&v.norm()) {
            return v.normalize();
        }
    }
}

fn geometry_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut failures, mut hits, mut ties) = (0usize, 0usize, 0usize);
    let mut worst: f64 = 0.0;
    for (_, spec) in default8() {
        let mesh = make_primitive(&spec).unwrap();
        let bvh = Bvh::build(mesh.clone()).unwrap();
        let c = mesh.bounds().center();
        let r = mesh.bounds().extent().norm();
        for _ in 0..1000 {
            let o = c + random_unit(&mut rng) * (r * rng.random_range(0.5..1.5));
            let target = c + random_unit(&mut rng) * (r * 0.3);
            let d = (target - o).normalize();
            match (scan_raycast(&mesh, o, d, 1.0), bvh.raycast(o, d, 1.0)) {
                (None, None) => {}
                (Some((te, ie)), Some(h)) => {
                    hits += 1;
                    worst = worst.max((te - h.t).abs());
                    failures += ((te - h.t).abs() > 1e-9 || ie != h.triangle) as usize;
                }
                _ => failures += 1,
            }
        }
        for _ in 0..1000 {
            let p = c + random_unit(&mut rng) * (r * rng.random_range(0.0..1.5));
            let all = scan_distances(&mesh, p);
            let (ie, de) = all.iter().enumerate().fold((0, f64::INFINITY), |b, (i, &d)| if d < b.1 { (i, d) } else { b });
            let cp = bvh.closest_point(p);
            worst = worst.max((de - cp.distance).abs());
            // Distinct ids are accepted only for a point equidistant from a
            // shared edge or vertex, where both triangles attain the minimum.
            let same = cp.triangle as usize == ie;
            let tie = !same && (all[cp.triangle as usize] - de).abs() <= 1e-15;
            ties += tie as usize;
            failures += ((de - cp.distance).abs() > 1e-9 || !(same || tie)) as usize;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        failures == 0 && within(elapsed, 60),
        format!("8 meshes x (1000 rays, 1000 points): {failures} mismatches, {hits} hits, {ties} exact distance ties, worst abs diff {worst:.1e} m, {elapsed:.1?}"),
    )
}

// ---------------------------------------------------------------- 5

fn closed_form_renders() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut valid = true;
    for r_mm in [12.0, 30.0, 80.0] {
        let sphere = AnalyticSphere { center: Vec3::ZERO, radius: r_mm * 1e-3 };
        let p = render_patch(&sphere, &Pose::from_translation(Vec3::new(0.0, 0.0, r_mm * 1e-3)), &RenderConfig::default());
        for i in 0..PATCH_CELLS {
            let (u, v) = cell_offset_mm(i);
            let rho2 = u * u + v * v;
            if rho2 >= r_mm * r_mm {
                valid &= !p.valid[i];
                continue;
            }
            let expect = r_mm - (r_mm * r_mm - rho2).sqrt();
            if expect <= 10.0 {
                valid &= p.valid[i];
                worst = worst.max((p.values[i] as f64 - expect).abs());
            }
        }
    }
    for deg in [5.0f64, 20.0, 40.0] {
        let th = deg.to_radians();
        let plane = AnalyticPlane { point: Vec3::ZERO, normal: Vec3::new(0.0, th.sin(), th.cos()) };
        let p = render_patch(&plane, &Pose::IDENTITY, &RenderConfig::default());
        for i in 0..PATCH_CELLS {
            let (_, v) = cell_offset_mm(i);
            valid &= p.valid[i];
            worst = worst.max((p.values[i] as f64 - (v * th.tan()).clamp(0.0, 10.0)).abs());
        }
    }
    verdict(worst < 1e-6 && valid, format!("3 spheres, 3 ramps: worst depth error {worst:.2e} mm, validity masks {}", if valid { "exact" } else { "wrong" }))
}

// ---------------------------------------------------------------- 6

/// Unnormalized joint of one object, in the probability domain.
fn brute_joint(obj: &KnownObject, n_objects: usize, obs: &[TouchObservation], oracle: &OracleParams, cfg: &RecognitionConfig) -> f64 {
    let mut joint = 1.0 / n_objects as f64;
    for o in obs {
        if cfg.modality.uses_touch() {
            let predicted = if o.missed {
                oracle.predict_reading(&NormalizedPatch::far())
            } else {
                let cp = obj.bvh.closest_point(o.location);
                let pose = Pose::from_z_axis(cp.point, cp.normal, Vec3::X);
                let patch = render_patch(&obj.bvh, &pose, &cfg.render);
                if patch.valid_count() == 0 {
                    TactileReading::ZERO
                } else {
                    oracle.predict_reading(&normalize_or_far(&patch))
                }
            };
            let d = (0..READING_DIM).map(|m| (predicted[m] - o.reading[m]).powi(2)).sum::<f64>().sqrt();
            joint *= (-d / cfg.sigma_touch).exp();
        }
        if cfg.modality.uses_proprioception() {
            joint *= (-obj.bvh.closest_point(o.location).distance / cfg.sigma_proprio).exp();
        }
    }
    joint
}

fn random_observation(set: &ObjectSet, rng: &mut ChaCha8Rng, oracle: &OracleParams) -> TouchObservation {
    let truth = &set.objects()[rng.random_range(0..set.len())];
    let cfg = RecognitionConfig::default();
    let (p, n) = plan_touch(&truth.bvh, truth.id, rng, &cfg).unwrap();
    let location = p + Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * 0.003;
    let mut reading = oracle.predict_reading(&normalize_or_far(&render_patch(&truth.bvh, &contact_frame(&truth.bvh, location), &cfg.render)));
    for m in 0..READING_DIM {
        reading[m] += rng.random_range(-3.0..3.0);
    }
    TouchObservation { reading, location, normal: n, desired: p, missed: rng.random_bool(0.1) }
}

fn posterior_correctness() -> Verdict {
    let all = dissimilar5();
    let oracle = OracleParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_log, mut worst_sum, mut cases) = (0.0f64, 0.0f64, 0);
    for n_obj in 1..=5 {
        let set = ObjectSet::from_specs(&all[..n_obj]).unwrap();
        for n_obs in 0..=3 {
            let obs: Vec<TouchObservation> = (0..n_obs).map(|_| random_observation(&set, &mut rng, &oracle)).collect();
            for modality in Modality::ALL {
                // Wide sigmas keep every joint representable without logs.
                let cfg = RecognitionConfig { modality, sigma_touch: 40.0, sigma_proprio: 0.02, ..RecognitionConfig::default() };
                let belief = posterior(&set, &obs, &oracle, &cfg);
                worst_sum = worst_sum.max((belief.0.iter().sum::<f64>() - 1.0).abs());
                let joints: Vec<f64> = set.objects().iter().map(|o| brute_joint(o, n_obj, &obs, &oracle, &cfg)).collect();
                let z: f64 = joints.iter().sum();
                for (k, j) in joints.iter().enumerate() {
                    worst_log = worst_log.max(((j / z).ln() - belief.0[k].ln()).abs());
                }
                cases += 1;
            }
        }
    }
    let mut invariant = true;
    for _ in 0..500 {
        let k = rng.random_range(1..=5);
        let scores: Vec<f64> = (0..k).map(|_| rng.random_range(-60.0..0.0)).collect();
        let shift = rng.random_range(-700.0..700.0);
        let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
        invariant &= map_object(&Belief::from_log_scores(&scores)).index == map_object(&Belief::from_log_scores(&shifted)).index;
    }
    verdict(
        worst_log < 1e-12 && worst_sum < 1e-9 && invariant,
        format!("{cases} configurations: worst log-prob diff {worst_log:.1e}, worst |sum-1| {worst_sum:.1e}, common-factor MAP invariance {}", if invariant { "held" } else { "broken" }),
    )
}

// ---------------------------------------------------------------- 7

fn informed_accuracy<P: TouchPredictor>(set: &ObjectSet, predictor: &P, cfg: &RecognitionConfig, episodes: usize, seed: u64) -> f64 {
    let oracle = OracleParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let correct = (0..episodes)
        .filter(|e| run_episode(set, e % set.len(), predictor, &oracle, cfg, &mut rng).unwrap().correct())
        .count();
    correct as f64 / episodes as f64
}

fn oracle_consistency(params: &NetworkParams) -> Verdict {
    let start = Instant::now();
    let set = ObjectSet::from_specs(&dissimilar5()).unwrap();
    let oracle = OracleParams::default();
    let noiseless = RecognitionConfig { noise: MeasurementNoise::NONE, n_touches: 10, ..RecognitionConfig::default() };
    let oracle_acc = informed_accuracy(&set, &oracle, &noiseless, 50, 70);
    let with = |modality| RecognitionConfig { modality, ..RecognitionConfig::default() };
    let p_acc = informed_accuracy(&set, params, &with(Modality::Proprioception), 50, 71);
    let t_acc = informed_accuracy(&set, params, &with(Modality::Touch), 50, 71);
    let elapsed = start.elapsed();
    verdict(
        oracle_acc >= 0.9 && t_acc >= p_acc && within(elapsed, 300),
        format!("oracle, noiseless, N=10, 50 episodes: {oracle_acc:.2}; trained network, default noise: T {t_acc:.2} vs P {p_acc:.2}, {elapsed:.1?}"),
    )
}

// ---------------------------------------------------------------- 8

fn pooled_ablation() -> Verdict {
    let set = ObjectSet::from_specs(&dissimilar5()).unwrap();
    let oracle = OracleParams::default();
    let base = RecognitionConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pools: Vec<_> = (0..set.len()).map(|t| record_pool(&set, t, 200, &oracle, &base, &mut rng).unwrap()).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for modality in Modality::ALL {
        let scored = ScoredPools::new(&set, &pools, &oracle, &RecognitionConfig { modality, ..base }).unwrap();
        let a5 = scored.accuracy(5, 20, &mut rng).unwrap();
        let a150 = scored.accuracy(150, 20, &mut rng).unwrap();
        pass &= a150 >= a5 - 0.05;
        parts.push(format!("{} {a5:.2}->{a150:.2}", modality.label()));
    }
    verdict(pass, format!("pool 200/object, 20 repetitions, N=5 -> N=150: {}", parts.join(", ")))
}

// ---------------------------------------------------------------- 9

fn grasp_run(records: &[GraspRecord], cfg: &TrainConfig) -> f64 {
    let split = split_grasp(records, &SplitSpec::default()).unwrap();
    let out = train_grasp_classifier(&split.train, Some(&split.val), cfg).unwrap();
    evaluate_grasp_accuracy(&out.params, &split.test).unwrap()
}

fn grasp_pipeline(params: &NetworkParams) -> (Verdict, Dataset) {
    let start = Instant::now();
    let oracle = OracleParams::default();
    let entries = shapes::entries(shapes::procedural(20, 7));
    let set = shapes::object_set(&entries).unwrap();
    let source = PredictorSource::network(params);
    let predictor = StoredPredictor::from_source(&source, &oracle).unwrap();
    let config = GraspDatasetConfig { seed: 7, ..GraspDatasetConfig::default() };
    let generated = generate_grasp_dataset(&set, &predictor, &config);
    let records = generated.records;
    let balanced = set.objects().iter().all(|o| {
        let mine: Vec<_> = records.iter().filter(|r| r.object_id == o.id).collect();
        mine.len() == 10 && mine.iter().filter(|r| r.label).count() == 5
    });
    let train_cfg = TrainConfig { epochs: 200, batch_size: 16, ..TrainConfig::default() };
    let accuracy = grasp_run(&records, &train_cfg);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let null: Vec<f64> = (0..5)
        .map(|_| {
            let mut labels: Vec<bool> = records.iter().map(|r| r.label).collect();
            labels.shuffle(&mut rng);
            let shuffled: Vec<GraspRecord> = records.iter().zip(labels).map(|(r, label)| GraspRecord { label, ..r.clone() }).collect();
            grasp_run(&shuffled, &train_cfg)
        })
        .collect();
    let null_mean = null.iter().sum::<f64>() / null.len() as f64;
    let elapsed = start.elapsed();
    let v = verdict(
        balanced && records.len() == 200 && accuracy >= 0.75 && (null_mean - 0.5).abs() <= 0.1 && within(elapsed, 300),
        format!(
            "{} grasps on 20 objects ({}), test accuracy {accuracy:.3}; shuffled labels {null_mean:.3} (mean of 5: {}), {elapsed:.1?}",
            records.len(),
            if balanced { "5/5 each" } else { "unbalanced" },
            null.iter().map(|a| format!("{a:.2}")).collect::<Vec<_>>().join(" ")
        ),
    );
    let ds = Dataset::new(oracle, entries, DatasetSource::Grasp { config, predictor: source }, Records::Grasp(records)).unwrap();
    (v, ds)
}

// ---------------------------------------------------------------- 10

/// Byte ranges whose corruption must surface as a checksum failure: header
/// JSON and its CRC, and every record's kind, payload and CRC.
fn checksummed(bytes: &[u8]) -> Vec<std::ops::Range<usize>> {
    let header_len = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let mut ranges = Vec::new();
    ranges.push(10..14 + header_len);
    let mut pos = 14 + header_len;
    while pos < bytes.len() {
        let len = u32::from_le_bytes(bytes[pos + 1..pos + 5].try_into().unwrap()) as usize;
        ranges.push(pos..pos + 1);
        ranges.push(pos + 5..pos + 9 + len);
        pos += 9 + len;
    }
    ranges
}

fn persistence(datasets: &[&Dataset]) -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut roundtrip = true;
    let mut mismatched = 0;
    let mut records = 0;
    for (i, ds) in datasets.iter().enumerate() {
        let path = dir.path().join(format!("{i}.ptds"));
        ptds::save_dataset(&path, ds).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let loaded = ptds::load_dataset(&path).unwrap();
        roundtrip &= &loaded == *ds && ptds::encode(&loaded).unwrap() == bytes;
        mismatched += ptds::replay_mismatches(&loaded).unwrap().len();
        records += loaded.records.len();
    }

    let bytes = ptds::encode(datasets[0]).unwrap();
    let guarded = checksummed(&bytes);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut detected, mut by_checksum, mut in_guarded) = (0, 0, 0);
    for _ in 0..100 {
        let mut corrupt = bytes.clone();
        let at = rng.random_range(0..corrupt.len());
        corrupt[at] ^= rng.random_range(1..=255u8);
        let guarded_byte = guarded.iter().any(|r| r.contains(&at));
        in_guarded += guarded_byte as usize;
        match ptds::decode(&corrupt) {
            Err(FormatError::Checksum { .. }) => {
                detected += 1;
                by_checksum += 1;
            }
            Err(_) if !guarded_byte => detected += 1,
            _ => {}
        }
    }
    verdict(
        roundtrip && mismatched == 0 && detected == 100,
        format!(
            "{} datasets bitwise {}, {mismatched}/{records} records fail replay; fuzz: {detected}/100 detected ({by_checksum} by checksum, {in_guarded} flips in checksummed bytes)",
            datasets.len(),
            if roundtrip { "identical" } else { "DIFFERENT" }
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let mut results: Vec<(u8, &str, Verdict)> = Vec::new();
    let mut record = |id, name, v: Verdict| {
        println!("{} {id:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((id, name, v));
    };
    record(1, "gradient correctness", gradient_correctness());
    record(2, "overfit sanity", overfit_sanity());
    let (v3, trained) = end_to_end_training();
    record(3, "end-to-end training", v3);
    record(4, "geometry equivalence", geometry_equivalence());
    record(5, "closed-form renders", closed_form_renders());
    record(6, "posterior correctness", posterior_correctness());
    record(7, "oracle-consistent recognition", oracle_consistency(&trained.params));
    record(8, "pooled ablation", pooled_ablation());
    let (v9, grasp_ds) = grasp_pipeline(&trained.params);
    record(9, "grasp pipeline", v9);
    record(10, "persistence", persistence(&[&trained.dataset, &grasp_ds]));

    let failed: Vec<String> = results.iter().filter(|r| !r.2.pass).map(|r| format!("{} {}", r.0, r.1)).collect();
    println!("{}/{} criteria pass", results.len() - failed.len(), results.len());
    assert!(failed.is_empty(), "failing criteria: {}", failed.join(", "));
}
