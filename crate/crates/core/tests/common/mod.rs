#![allow(dead_code)]

use num_complex::Complex64;
use polarized::jones::{JonesMatrix, PolarizationState, WaveplateSpec};
use polarized::network::{ElementKind, MirrorSign, Netlist};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Seeded from `POLARIZED_SEED` when set.
pub fn rng(default_seed: u64) -> ChaCha8Rng {
    let seed = std::env::var("POLARIZED_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(default_seed);
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_state(rng: &mut impl Rng) -> PolarizationState {
    let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    PolarizationState::new(c(), c())
}

/// Haar-random SU(2) matrix from a normalized Gaussian quaternion.
pub fn haar_su2(rng: &mut impl Rng) -> JonesMatrix {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / norm);
    JonesMatrix::new(
        Complex64::new(w, -z),
        Complex64::new(-y, -x),
        Complex64::new(y, -x),
        Complex64::new(w, z),
    )
}

/// A random valid DAG of up to `max_elements` elements, acyclic by
/// construction: inputs only ever draw on outputs of earlier elements.
pub fn random_netlist(rng: &mut impl Rng, max_elements: usize) -> Netlist {
    let total = rng.gen_range(2..=max_elements);
    let mut net = Netlist::new();
    let mut free: Vec<(String, usize)> = Vec::new();

    for i in 0..total {
        let id = format!("e{i:02}");
        let roll = rng.gen_range(0..10);
        let kind = if i == 0 || roll == 0 {
            ElementKind::Source(random_state(rng))
        } else if roll == 9 && !free.is_empty() {
            ElementKind::Detector
        } else {
            match roll % 4 {
                0 => {
                    let t: f64 = rng.gen_range(0.0..=1.0);
                    ElementKind::BeamSplitter { t, r: 1.0 - t }
                }
                1 => ElementKind::Waveplate(WaveplateSpec {
                    eta: rng.gen_range(-7.0..7.0),
                    phi: rng.gen_range(-7.0..7.0),
                }),
                2 => ElementKind::PhaseShifter { theta: rng.gen_range(-7.0..7.0) },
                _ => ElementKind::Mirror(if rng.gen_bool(0.5) { MirrorSign::Plus } else { MirrorSign::Minus }),
            }
        };
        let (inputs, outputs) = (kind.inputs(), kind.outputs());
        let must_feed = matches!(kind, ElementKind::Detector);
        net.add(id.clone(), kind).unwrap();
        for port in 0..inputs {
            if !free.is_empty() && (must_feed || rng.gen_bool(0.8)) {
                let (src, out) = free.swap_remove(rng.gen_range(0..free.len()));
                net.connect(&src, out, &id, port);
            }
        }
        free.extend((0..outputs).map(|p| (id.clone(), p)));
    }
    net
}

/// Same wiring, every source amplitude multiplied by `c`.
pub fn scale_sources(net: &Netlist, c: Complex64) -> Netlist {
    let mut out = Netlist::new();
    for (id, kind) in net.elements() {
        let kind = match kind {
            ElementKind::Source(s) => ElementKind::Source(s.scale(c)),
            other => other.clone(),
        };
        out.add(id, kind).unwrap();
    }
    for conn in net.connections() {
        out.connect(&conn.from.element, conn.from.index, &conn.to.element, conn.to.index);
    }
    out
}
