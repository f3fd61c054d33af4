//! Bernstein-Vazirani on classical polarization qubits.
//!
//! Each input beam `x_j` is cloned by a 50/50 splitter. One clone passes the
//! oracle stage for bit `j` (a sign flip on x polarization when `a_j = 1`),
//! the other a π phase shifter, and a second splitter re-interferes them.
//! The detector behind it is dark unless `x_j·a_j = 1`, so probing with the
//! all-ones input reads `a` in a single optical pass, and XOR-folding the
//! detector bits for an arbitrary `x` evaluates `f(x) = a·x mod 2`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::bits::{BitString, HiddenString, InputString};
use crate::error::{Error, Result};
use crate::jones::{encode_bit, WaveplateSpec};
use crate::network::{detector_readings, propagate, ElementKind, MirrorSign, Netlist};

/// Detector bit threshold, as a fraction of the beam's input intensity.
///
/// Ideal detector intensities are 0 or 1 times the input; this is the midpoint.
pub const READOUT_THRESHOLD: f64 = 0.5;

/// Holds the hidden string and only exposes what a black box would:
/// function queries and the optical elements of its stage.
#[derive(Debug)]
pub struct HiddenOracle {
    hidden: HiddenString,
    queries: AtomicUsize,
    optical_passes: AtomicUsize,
}

impl HiddenOracle {
    pub fn new(hidden: HiddenString) -> Self {
        HiddenOracle {
            hidden,
            queries: AtomicUsize::new(0),
            optical_passes: AtomicUsize::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.hidden.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hidden.is_empty()
    }

    /// Classical query `x ↦ f(x)`.
    pub fn query(&self, x: &InputString) -> Result<bool> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        f_reference(&self.hidden, x)
    }

    pub fn query_count(&self) -> usize {
        self.queries.load(Ordering::Relaxed)
    }

    /// Number of optical stages handed out, i.e. optical oracle calls.
    pub fn optical_passes(&self) -> usize {
        self.optical_passes.load(Ordering::Relaxed)
    }

    /// Per-beam element chains of one optical oracle call.
    ///
    /// Beam `j` gets a half-wave plate at φ = 0 followed by a π/2 phase
    /// shifter when `a_j = 1`, which together apply `diag(−1, +1)`, i.e.
    /// `(−1)^{x_j}` on the logical encoding. Otherwise the chain is empty.
    pub fn optical_stage(&self) -> Vec<Vec<ElementKind>> {
        self.optical_passes.fetch_add(1, Ordering::Relaxed);
        self.hidden
            .bits()
            .iter()
            .map(|&bit| {
                if bit {
                    vec![
                        ElementKind::Waveplate(WaveplateSpec::half_wave(0.0)),
                        ElementKind::PhaseShifter { theta: FRAC_PI_2 },
                    ]
                } else {
                    Vec::new()
                }
            })
            .collect()
    }
}

/// `a_1 x_1 ⊕ … ⊕ a_n x_n`.
pub fn f_reference(a: &HiddenString, x: &InputString) -> Result<bool> {
    a.dot(x)
}

/// The oracle elements inserted on one beam's transmitted arm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleStage {
    /// 0-based beam index.
    pub beam: usize,
    pub element_ids: Vec<String>,
}

/// The interferometric circuit for `n` beams.
#[derive(Debug, Clone)]
pub struct BvCircuit {
    pub n: usize,
    pub net: Netlist,
    /// `D1 … Dn`, in beam order.
    pub detector_names: Vec<String>,
    /// Fraction of beam input intensity at or above which a detector reads 1.
    pub threshold: f64,
    /// One entry per beam, from a single oracle call.
    pub oracle_stages: Vec<OracleStage>,
    pub beam_intensities: Vec<f64>,
}

/// Build the circuit for hidden string `a` probed with input `x`.
pub fn build_bv_circuit(a: &HiddenString, x: &InputString) -> Result<BvCircuit> {
    build_bv_circuit_with(&HiddenOracle::new(a.clone()), x)
}

/// Build the circuit around an opaque oracle; consumes one optical pass.
pub fn build_bv_circuit_with(oracle: &HiddenOracle, x: &InputString) -> Result<BvCircuit> {
    let n = oracle.len();
    if x.len() != n {
        return Err(Error::invalid(format!(
            "input has {} bits but the oracle acts on {n}",
            x.len()
        )));
    }

    let mut net = Netlist::new();
    let mut detector_names = Vec::with_capacity(n);
    let mut oracle_stages = Vec::with_capacity(n);
    let half = ElementKind::BeamSplitter { t: 0.5, r: 0.5 };

    for (j, chain) in oracle.optical_stage().into_iter().enumerate() {
        let k = j + 1;
        let (src, split, join, det) = (
            format!("src{k}"),
            format!("bs{k}"),
            format!("bsp{k}"),
            format!("D{k}"),
        );
        net.add(&src, ElementKind::Source(encode_bit(x.get(j))))?;
        net.add(&split, half.clone())?;
        net.add(&join, half.clone())?;
        net.add(&det, ElementKind::Detector)?;
        net.connect(&src, 0, &split, 0);

        // transmitted arm: bs.0 → oracle chain → bsp.0
        let mut tail = (split.clone(), 0);
        let mut element_ids = Vec::with_capacity(chain.len());
        for (s, element) in chain.into_iter().enumerate() {
            let id = format!("oracle{k}_{s}");
            net.add(&id, element)?;
            net.connect(&tail.0, tail.1, &id, 0);
            element_ids.push(id.clone());
            tail = (id, 0);
        }
        net.connect(&tail.0, tail.1, &join, 0);
        oracle_stages.push(OracleStage { beam: j, element_ids });

        // reference arm: bs.1 → mirror → π shifter → mirror → bsp.1
        let (m1, shift, m2) = (format!("mir{k}a"), format!("ref{k}"), format!("mir{k}b"));
        net.add(&m1, ElementKind::Mirror(MirrorSign::Plus))?;
        net.add(&shift, ElementKind::PhaseShifter { theta: PI })?;
        net.add(&m2, ElementKind::Mirror(MirrorSign::Plus))?;
        net.connect(&split, 1, &m1, 0);
        net.connect(&m1, 0, &shift, 0);
        net.connect(&shift, 0, &m2, 0);
        net.connect(&m2, 0, &join, 1);

        // bsp.1 carries ½((−1)^{x_j a_j} − 1)·|x_j⟩; bsp.0 is left open.
        net.connect(&join, 1, &det, 0);
        detector_names.push(det);
    }

    Ok(BvCircuit {
        n,
        net,
        detector_names,
        threshold: READOUT_THRESHOLD,
        oracle_stages,
        beam_intensities: vec![1.0; n],
    })
}

/// Detector intensities in beam order.
pub fn detector_intensities(circuit: &BvCircuit) -> Result<Vec<f64>> {
    let amps = propagate(&circuit.net)?;
    let readings = detector_readings(&amps, &circuit.net);
    Ok(circuit
        .detector_names
        .iter()
        .map(|name| readings.get(name).copied().unwrap_or(0.0))
        .collect())
}

/// `(x_1 a_1, …, x_n a_n)` read from the detectors.
pub fn read_bits(circuit: &BvCircuit) -> Result<BitString> {
    let intensities = detector_intensities(circuit)?;
    BitString::new(
        intensities
            .iter()
            .zip(&circuit.beam_intensities)
            .map(|(&i, &input)| i >= circuit.threshold * input)
            .collect(),
    )
}

/// Recover `a` with one optical pass: probe with `x = 1…1`.
pub fn find_hidden_string(oracle: &HiddenOracle) -> Result<HiddenString> {
    let probe = BitString::ones(oracle.len())?;
    read_bits(&build_bv_circuit_with(oracle, &probe)?)
}

/// XOR of all bits by pairwise rounds; an odd bit out passes to the next round.
pub fn xor_fold(bits: &[bool]) -> Result<bool> {
    if bits.is_empty() {
        return Err(Error::invalid("cannot XOR-fold an empty list"));
    }
    let mut layer = bits.to_vec();
    while layer.len() > 1 {
        layer = layer
            .chunks(2)
            .map(|pair| pair.iter().fold(false, |acc, &b| acc ^ b))
            .collect();
    }
    Ok(layer[0])
}

/// `f(x)` computed optically: detector bits for input `x`, XOR-folded.
pub fn eval_f_optical(a: &HiddenString, x: &InputString) -> Result<bool> {
    eval_f_optical_with(&HiddenOracle::new(a.clone()), x)
}

pub fn eval_f_optical_with(oracle: &HiddenOracle, x: &InputString) -> Result<bool> {
    let bits = read_bits(&build_bv_circuit_with(oracle, x)?)?;
    xor_fold(bits.bits())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineOutcome {
    pub recovered: HiddenString,
    pub queries: usize,
}

/// Classical recovery: query `f(e_j)` for every unit vector, `n` queries.
pub fn classical_baseline<F>(mut oracle: F, n: usize) -> Result<BaselineOutcome>
where
    F: FnMut(&InputString) -> Result<bool>,
{
    let mut bits = Vec::with_capacity(n);
    for j in 0..n {
        bits.push(oracle(&BitString::unit(n, j)?)?);
    }
    Ok(BaselineOutcome { recovered: BitString::new(bits)?, queries: n })
}
