//! Posterior against a brute-force product of likelihoods, and episode contracts.

use pseudotouch_core::geometry::SampleMode;
use pseudotouch_core::math::Vec3;
use pseudotouch_core::oracle::{OracleParams, TactileReading};
use pseudotouch_core::patch::{normalize_or_far, render_patch, NormalizedPatch};
use pseudotouch_core::presets::dissimilar5;
use pseudotouch_core::recognition::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Unnormalized joint of one object, computed in the probability domain.
fn brute_joint(obj: &KnownObject, n_objects: usize, obs: &[TouchObservation], oracle: &OracleParams, cfg: &RecognitionConfig) -> f64 {
    let mut joint = 1.0 / n_objects as f64;
    for o in obs {
        if cfg.modality.uses_touch() {
            let predicted = if o.missed {
                oracle.predict_reading(&NormalizedPatch::far())
            } else {
                let cp = obj.bvh.closest_point(o.location);
                let pose = pseudotouch_core::math::Pose::from_z_axis(cp.point, cp.normal, Vec3::X);
                let patch = render_patch(&obj.bvh, &pose, &cfg.render);
                if patch.valid_count() == 0 {
                    TactileReading::ZERO
                } else {
                    oracle.predict_reading(&normalize_or_far(&patch))
                }
            };
            let d: f64 = (0..15).map(|m| (predicted[m] - o.reading[m]).powi(2)).sum::<f64>().sqrt();
            joint *= (-d / cfg.sigma_touch).exp();
        }
        if cfg.modality.uses_proprioception() {
            let d = obj.bvh.closest_point(o.location).distance;
            joint *= (-d / cfg.sigma_proprio).exp();
        }
    }
    joint
}

fn random_observation(set: &ObjectSet, rng: &mut ChaCha8Rng, oracle: &OracleParams) -> TouchObservation {
    let truth = &set.objects()[rng.random_range(0..set.len())];
    let cfg = RecognitionConfig::default();
    let (p, n) = plan_touch(&truth.bvh, truth.id, rng, &cfg).unwrap();
    let jitter = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * 0.003;
    let loc = p + jitter;
    let pose = contact_frame(&truth.bvh, loc);
    let mut reading = oracle.predict_reading(&normalize_or_far(&render_patch(&truth.bvh, &pose, &cfg.render)));
    for m in 0..15 {
        reading[m] += rng.random_range(-3.0..3.0);
    }
    TouchObservation {
        reading,
        location: loc,
        normal: n,
        desired: p,
        missed: rng.random_bool(0.1),
    }
}

#[test]
fn posterior_matches_brute_force() {
    let all = dissimilar5();
    let oracle = OracleParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n_obj in 1..=5 {
        let set = ObjectSet::from_specs(&all[..n_obj]).unwrap();
        for n_obs in 0..=3 {
            let obs: Vec<TouchObservation> = (0..n_obs).map(|_| random_observation(&set, &mut rng, &oracle)).collect();
            for modality in Modality::ALL {
                let cfg = RecognitionConfig {
                    modality,
                    sigma_touch: 40.0,
                    sigma_proprio: 0.02,
                    ..RecognitionConfig::default()
                };
                let belief = posterior(&set, &obs, &oracle, &cfg);
                assert!(belief.is_valid());
                assert!((belief.0.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                let joints: Vec<f64> = set.objects().iter().map(|o| brute_joint(o, n_obj, &obs, &oracle, &cfg)).collect();
                let z: f64 = joints.iter().sum();
                for (k, j) in joints.iter().enumerate() {
                    let want = (j / z).ln();
                    let got = belief.0[k].ln();
                    assert!((want - got).abs() < 1e-12, "{n_obj} objects, {n_obs} obs, {modality:?}: {want} vs {got}");
                }
            }
        }
    }
}

#[test]
fn common_factor_leaves_the_map_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let scores: Vec<f64> = (0..5).map(|_| rng.random_range(-50.0..0.0)).collect();
        let shift = rng.random_range(-500.0..500.0);
        let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
        let a = map_object(&Belief::from_log_scores(&scores));
        let b = map_object(&Belief::from_log_scores(&shifted));
        assert_eq!(a.index, b.index);
    }
}

#[test]
fn extreme_scores_do_not_underflow() {
    let b = Belief::from_log_scores(&[-1e6, -1e6 - 3.0, -2e6]);
    assert!(b.is_valid());
    assert_eq!(map_object(&b).index, 0);
}

#[test]
fn noiseless_oracle_episode_identifies_a_sphere() {
    let set = ObjectSet::from_specs(&dissimilar5()).unwrap();
    let oracle = OracleParams::default();
    let cfg = RecognitionConfig {
        noise: MeasurementNoise::NONE,
        n_touches: 10,
        ..RecognitionConfig::default()
    };
    let truth = set.index_of(3).unwrap();
    let r = run_episode(&set, truth, &oracle, &oracle, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(r.steps.len(), 10);
    assert!(r.correct());
}

#[test]
fn episodes_are_reproducible() {
    let set = ObjectSet::from_specs(&dissimilar5()).unwrap();
    let oracle = OracleParams::default();
    let cfg = RecognitionConfig {
        modality: Modality::Both,
        n_touches: 4,
        sample_mode: SampleMode::AreaWeighted,
        ..RecognitionConfig::default()
    };
    let a = run_episode(&set, 2, &oracle, &oracle, &cfg, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
    let b = run_episode(&set, 2, &oracle, &oracle, &cfg, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
    assert_eq!(a.estimate, b.estimate);
    assert_eq!(a.steps.len(), b.steps.len());
}

#[test]
fn invalid_configs_are_rejected() {
    let cfg = RecognitionConfig {
        sigma_touch: 0.0,
        ..RecognitionConfig::default()
    };
    assert!(cfg.validate().is_err());
    let cfg = RecognitionConfig {
        n_touches: 0,
        ..RecognitionConfig::default()
    };
    assert!(cfg.validate().is_err());
}
