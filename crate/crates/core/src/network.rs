//! Optical netlists and beam propagation.
//!
//! A [`Netlist`] is a DAG of elements joined output-port → input-port.
//! [`propagate`] pushes Jones vectors through it in topological order.
//! Unconnected inputs read vacuum; unconnected outputs are terminal ports
//! and count toward the energy audit alongside detectors.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_complex::Complex64;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::jones::{cis, waveplate_unitary, PolarizationState, WaveplateSpec, EXACT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MirrorSign {
    Plus,
    Minus,
}

impl MirrorSign {
    pub fn factor(self) -> f64 {
        match self {
            MirrorSign::Plus => 1.0,
            MirrorSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Source(PolarizationState),
    /// Lossless splitter with intensity transmission `t` and reflection `r`.
    BeamSplitter { t: f64, r: f64 },
    Waveplate(WaveplateSpec),
    PhaseShifter { theta: f64 },
    Mirror(MirrorSign),
    /// Records the intensity of its single input; named by its element id.
    Detector,
}

impl ElementKind {
    pub fn inputs(&self) -> usize {
        match self {
            ElementKind::Source(_) => 0,
            ElementKind::BeamSplitter { .. } => 2,
            _ => 1,
        }
    }

    pub fn outputs(&self) -> usize {
        match self {
            ElementKind::Detector => 0,
            ElementKind::BeamSplitter { .. } => 2,
            _ => 1,
        }
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            ElementKind::Source(_) => "beam",
            ElementKind::BeamSplitter { .. } => "bs",
            ElementKind::Waveplate(_) => "wp",
            ElementKind::PhaseShifter { .. } => "ps",
            ElementKind::Mirror(_) => "mirror",
            ElementKind::Detector => "det",
        }
    }

    /// Per-element parameter problems, independent of wiring.
    fn parameter_problem(&self) -> Option<(DiagnosticKind, String)> {
        match self {
            ElementKind::Source(s) if !s.is_finite() => Some((
                DiagnosticKind::InvalidParameter,
                "source amplitude must be finite".into(),
            )),
            ElementKind::BeamSplitter { t, r } => check_splitter(*t, *r)
                .err()
                .map(|msg| (DiagnosticKind::Lossy, msg)),
            ElementKind::Waveplate(spec) => spec
                .check()
                .err()
                .map(|e| (DiagnosticKind::InvalidParameter, e.to_string())),
            ElementKind::PhaseShifter { theta } if !theta.is_finite() => Some((
                DiagnosticKind::InvalidParameter,
                "phase shift must be finite".into(),
            )),
            _ => None,
        }
    }
}

/// One port of one element. Output and input ports are numbered
/// separately from 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Port {
    pub element: String,
    pub index: usize,
}

impl Port {
    pub fn new(element: impl Into<String>, index: usize) -> Self {
        Port { element: element.into(), index }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.element, self.index)
    }
}

/// An output port feeding an input port.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Connection {
    pub from: Port,
    pub to: Port,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    Cycle,
    Lossy,
    InvalidParameter,
    InvalidIdentifier,
    UnknownElement,
    PortOutOfRange,
    PortReused,
    DetectorUnconnected,
}

/// A structural problem with a netlist.
#[derive(Debug, Clone, PartialEq)]
pub struct NetDiagnostic {
    pub element: Option<String>,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for NetDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.element {
            Some(id) => write!(f, "{id}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

pub fn is_valid_identifier(id: &str) -> bool {
    let mut chars = id.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Optical circuit: elements keyed by identifier plus port connections.
///
/// Both collections are ordered, so equality ignores declaration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Netlist {
    elements: BTreeMap<String, ElementKind>,
    connections: BTreeSet<Connection>,
}

impl Netlist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, id: impl Into<String>, kind: ElementKind) -> Result<()> {
        let id = id.into();
        if !is_valid_identifier(&id) {
            return Err(Error::invalid(format!("'{id}' is not a valid identifier")));
        }
        if self.elements.contains_key(&id) {
            return Err(Error::invalid(format!("duplicate element id '{id}'")));
        }
        self.elements.insert(id, kind);
        Ok(())
    }

    /// Wire `from.out_port` to `to.in_port`. Checked by [`validate`].
    pub fn connect(&mut self, from: &str, out_port: usize, to: &str, in_port: usize) {
        self.connections.insert(Connection {
            from: Port::new(from, out_port),
            to: Port::new(to, in_port),
        });
    }

    pub fn element(&self, id: &str) -> Option<&ElementKind> {
        self.elements.get(id)
    }

    /// Elements in identifier order.
    pub fn elements(&self) -> impl Iterator<Item = (&str, &ElementKind)> {
        self.elements.iter().map(|(id, kind)| (id.as_str(), kind))
    }

    /// Connections in (source, destination) order.
    pub fn connections(&self) -> impl Iterator<Item = &Connection> {
        self.connections.iter()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn count_where(&self, pred: impl Fn(&ElementKind) -> bool) -> usize {
        self.elements.values().filter(|k| pred(k)).count()
    }

    pub fn detector_ids(&self) -> impl Iterator<Item = &str> {
        self.elements()
            .filter(|(_, k)| matches!(k, ElementKind::Detector))
            .map(|(id, _)| id)
    }

    /// Outputs that feed nothing.
    pub fn open_outputs(&self) -> Vec<Port> {
        let used: BTreeSet<&Port> = self.connections.iter().map(|c| &c.from).collect();
        self.elements
            .iter()
            .flat_map(|(id, kind)| (0..kind.outputs()).map(move |p| Port::new(id.clone(), p)))
            .filter(|p| !used.contains(p))
            .collect()
    }
}

/// Check `t, r ≥ 0` and `t + r = 1`.
pub(crate) fn check_splitter(t: f64, r: f64) -> std::result::Result<(), String> {
    if !(t.is_finite() && r.is_finite()) || t < 0.0 || r < 0.0 {
        return Err(format!("t={t} and r={r} must be finite and non-negative"));
    }
    if (t + r - 1.0).abs() > EXACT_TOL {
        return Err(format!("t + r must equal 1 (got {})", t + r));
    }
    Ok(())
}

/// All structural problems in `net`; empty iff it can be propagated.
pub fn validate(net: &Netlist) -> Vec<NetDiagnostic> {
    let mut diags = Vec::new();
    let mut push = |element: Option<&str>, kind, message: String| {
        diags.push(NetDiagnostic { element: element.map(str::to_owned), kind, message })
    };

    for (id, kind) in &net.elements {
        if !is_valid_identifier(id) {
            push(Some(id), DiagnosticKind::InvalidIdentifier, format!("'{id}' is not a valid identifier"));
        }
        if let Some((dk, msg)) = kind.parameter_problem() {
            push(Some(id), dk, msg);
        }
    }

    let mut out_uses: BTreeMap<&Port, usize> = BTreeMap::new();
    let mut in_uses: BTreeMap<&Port, usize> = BTreeMap::new();
    for conn in &net.connections {
        *out_uses.entry(&conn.from).or_default() += 1;
        *in_uses.entry(&conn.to).or_default() += 1;
        for (port, is_output) in [(&conn.from, true), (&conn.to, false)] {
            match net.elements.get(&port.element) {
                None => push(
                    Some(&port.element),
                    DiagnosticKind::UnknownElement,
                    format!("connection {} -> {} names unknown element '{}'", conn.from, conn.to, port.element),
                ),
                Some(kind) => {
                    let (arity, dir) = if is_output {
                        (kind.outputs(), "output")
                    } else {
                        (kind.inputs(), "input")
                    };
                    if port.index >= arity {
                        push(
                            Some(&port.element),
                            DiagnosticKind::PortOutOfRange,
                            format!("{} has no {dir} port {} ({} has {arity})", port.element, port.index, kind.keyword()),
                        );
                    }
                }
            }
        }
    }
    for (uses, dir) in [(&out_uses, "output"), (&in_uses, "input")] {
        for (port, &count) in uses.iter() {
            if count > 1 {
                push(
                    Some(&port.element),
                    DiagnosticKind::PortReused,
                    format!("{dir} port {port} appears in {count} connections"),
                );
            }
        }
    }

    for id in net.detector_ids() {
        if !in_uses.contains_key(&Port::new(id, 0)) {
            push(Some(id), DiagnosticKind::DetectorUnconnected, format!("detector {id} has no input"));
        }
    }

    let mut graph = DiGraph::<&str, ()>::new();
    let nodes: HashMap<&str, _> = net
        .elements
        .keys()
        .map(|id| (id.as_str(), graph.add_node(id.as_str())))
        .collect();
    for conn in &net.connections {
        if let (Some(&a), Some(&b)) = (
            nodes.get(conn.from.element.as_str()),
            nodes.get(conn.to.element.as_str()),
        ) {
            graph.add_edge(a, b, ());
        }
    }
    for scc in tarjan_scc(&graph) {
        let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
        if cyclic {
            let mut ids: Vec<&str> = scc.iter().map(|&n| graph[n]).collect();
            ids.sort_unstable();
            push(
                Some(ids[0]),
                DiagnosticKind::Cycle,
                format!("cycle through {}", ids.join(", ")),
            );
        }
    }

    diags
}

/// `(out1, out2) = (√t·in1 − √r·in2, √r·in1 + √t·in2)`, componentwise.
///
/// Polarization passes through unchanged; only amplitudes mix. Port 0 is the
/// transmitted path for input 0; input 1's reflection carries the minus sign.
pub fn beamsplitter_transfer(
    t: f64,
    r: f64,
    in1: &PolarizationState,
    in2: &PolarizationState,
) -> Result<(PolarizationState, PolarizationState)> {
    check_splitter(t, r).map_err(Error::InvalidArgument)?;
    let (st, sr) = (Complex64::from(t.sqrt()), Complex64::from(r.sqrt()));
    let out1 = in1.scale(st).add(&in2.scale(-sr));
    let out2 = in1.scale(sr).add(&in2.scale(st));
    Ok((out1, out2))
}

/// Amplitudes produced by [`propagate`].
#[derive(Debug, Clone, PartialEq)]
pub struct PortAmplitudes {
    /// Every output port, connected or not.
    pub outputs: BTreeMap<Port, PolarizationState>,
    /// Input amplitude of each detector, by detector id.
    pub detectors: BTreeMap<String, PolarizationState>,
}

impl PortAmplitudes {
    pub fn output(&self, element: &str, port: usize) -> Option<&PolarizationState> {
        self.outputs.get(&Port::new(element, port))
    }
}

/// Element ids in dependency order, ties broken by id.
fn topological_order(net: &Netlist) -> Vec<&str> {
    let mut indegree: BTreeMap<&str, usize> = net.elements.keys().map(|id| (id.as_str(), 0)).collect();
    let mut successors: HashMap<&str, Vec<&str>> = HashMap::new();
    for conn in &net.connections {
        *indegree.get_mut(conn.to.element.as_str()).expect("validated") += 1;
        successors
            .entry(conn.from.element.as_str())
            .or_default()
            .push(conn.to.element.as_str());
    }
    let mut ready: BTreeSet<&str> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&id, _)| id).collect();
    let mut order = Vec::with_capacity(net.elements.len());
    while let Some(id) = ready.pop_first() {
        order.push(id);
        for &next in successors.get(id).into_iter().flatten() {
            let d = indegree.get_mut(next).expect("validated");
            *d -= 1;
            if *d == 0 {
                ready.insert(next);
            }
        }
    }
    order
}

/// Propagate all sources through `net`.
pub fn propagate(net: &Netlist) -> Result<PortAmplitudes> {
    let diags = validate(net);
    if !diags.is_empty() {
        return Err(Error::Structural(diags));
    }

    let routes: HashMap<&Port, &Port> = net.connections.iter().map(|c| (&c.from, &c.to)).collect();
    let mut pending: HashMap<(&str, usize), PolarizationState> = HashMap::new();
    let mut amps = PortAmplitudes { outputs: BTreeMap::new(), detectors: BTreeMap::new() };

    for id in topological_order(net) {
        let kind = &net.elements[id];
        let input = |p: usize| pending.get(&(id, p)).copied().unwrap_or(PolarizationState::vacuum());
        let outputs: Vec<PolarizationState> = match kind {
            ElementKind::Source(s) => vec![*s],
            ElementKind::BeamSplitter { t, r } => {
                let (o1, o2) = beamsplitter_transfer(*t, *r, &input(0), &input(1))?;
                vec![o1, o2]
            }
            ElementKind::Waveplate(spec) => vec![waveplate_unitary(spec)? * input(0)],
            ElementKind::PhaseShifter { theta } => vec![input(0).scale(cis(*theta))],
            ElementKind::Mirror(sign) => vec![input(0).scale(sign.factor().into())],
            ElementKind::Detector => {
                amps.detectors.insert(id.to_owned(), input(0));
                vec![]
            }
        };
        for (p, state) in outputs.into_iter().enumerate() {
            let port = Port::new(id, p);
            if let Some(dest) = routes.get(&port) {
                pending.insert((dest.element.as_str(), dest.index), state);
            }
            amps.outputs.insert(port, state);
        }
    }
    Ok(amps)
}

/// Intensity at each detector.
pub fn detector_readings(amps: &PortAmplitudes, net: &Netlist) -> BTreeMap<String, f64> {
    net.detector_ids()
        .map(|id| {
            let reading = amps.detectors.get(id).map_or(0.0, PolarizationState::intensity);
            (id.to_owned(), reading)
        })
        .collect()
}

/// `(source intensity, terminal intensity)`; terminals are detectors and
/// open outputs. Equal for any lossless circuit.
pub fn energy_audit(amps: &PortAmplitudes, net: &Netlist) -> (f64, f64) {
    let input_total: f64 = net
        .elements()
        .filter_map(|(_, k)| match k {
            ElementKind::Source(s) => Some(s.intensity()),
            _ => None,
        })
        .sum();
    let detected: f64 = detector_readings(amps, net).values().sum();
    let escaped: f64 = net
        .open_outputs()
        .iter()
        .filter_map(|p| amps.outputs.get(p))
        .map(PolarizationState::intensity)
        .sum();
    (input_total, detected + escaped)
}
