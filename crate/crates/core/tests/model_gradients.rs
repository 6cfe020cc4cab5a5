//! Analytic gradients against central finite differences of the loss.

use pseudotouch_core::model::{backward, forward, mse_loss, NetworkParams, Trace, PARAM_COUNT};
use pseudotouch_core::oracle::{TactileReading, READING_DIM};
use pseudotouch_core::patch::{NormalizedPatch, PATCH_CELLS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-4;
const TOL: f64 = 1e-4;

/// Loss and the sign pattern of every ReLU input.
fn probe(p: &NetworkParams, x: &NormalizedPatch, t: &TactileReading) -> (f64, Vec<bool>) {
    let tr = Trace::new(p, &x.values);
    let pattern = tr.z1.iter().chain(tr.z2.iter()).chain(tr.zh.iter()).map(|&z| z > 0.0).collect();
    (mse_loss(&TactileReading(tr.output), t), pattern)
}

fn random_triple(rng: &mut ChaCha8Rng) -> (NetworkParams, NormalizedPatch, TactileReading) {
    let params = NetworkParams::init(rng.random());
    let mut v = [0.0; PATCH_CELLS];
    for x in v.iter_mut() {
        *x = rng.random::<f64>();
    }
    let mut t = TactileReading::ZERO;
    for m in 0..READING_DIM {
        t[m] = rng.random_range(-2.0..2.0);
    }
    (params, NormalizedPatch::from_values(v), t)
}

/// Checks one triple; `None` when some ±h probe crosses a ReLU kink, where
/// central differences do not estimate the derivative.
fn check(params: &NetworkParams, x: &NormalizedPatch, t: &TactileReading) -> Option<f64> {
    let grad = backward(params, x, t);
    let (l0, base) = probe(params, x, t);
    assert_eq!(l0, mse_loss(&forward(params, x), t));
    let mut worst: f64 = 0.0;
    let mut p = params.clone();
    for i in 0..PARAM_COUNT {
        let orig = p.as_slice()[i];
        p.as_mut_slice()[i] = orig + H;
        let (lp, pp) = probe(&p, x, t);
        p.as_mut_slice()[i] = orig - H;
        let (lm, pm) = probe(&p, x, t);
        p.as_mut_slice()[i] = orig;
        if pp != base || pm != base {
            return None;
        }
        let fd = (lp - lm) / (2.0 * H);
        let a = grad.as_slice()[i];
        let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Some(worst)
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    let mut skipped = 0;
    let start = std::time::Instant::now();
    let mut worst_all: f64 = 0.0;
    while checked < 5 {
        let (p, x, t) = random_triple(&mut rng);
        match check(&p, &x, &t) {
            Some(worst) => {
                worst_all = worst_all.max(worst);
                assert!(worst < TOL, "relative error {worst}");
                checked += 1;
            }
            None => skipped += 1,
        }
    }
    eprintln!("worst {worst_all:e}, skipped {skipped}, {:?}", start.elapsed());
    assert!(skipped < 20);
}
