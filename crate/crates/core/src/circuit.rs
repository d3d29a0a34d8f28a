//! Circuit representation and the benchmark circuit generators.
//!
//! A [`Circuit`] is an ordered list of [`Gate`]s over `num_qubits` qubits.
//! Two generator families are provided: the CX staircase
//! ([`build_staircase`]) and its depth-padded variant
//! ([`build_depth_padded`]), which appends long runs of alternating T/X
//! gates on the outermost qubits without touching the cut structure.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    T,
    S,
    Sdg,
    CX,
    CZ,
}

impl GateKind {
    pub const fn arity(self) -> usize {
        match self {
            GateKind::CX | GateKind::CZ => 2,
            _ => 1,
        }
    }

    pub const fn is_two_qubit(self) -> bool {
        self.arity() == 2
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A single gate. For CX the first qubit is the control.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GateRepr", into = "GateRepr")]
pub struct Gate {
    kind: GateKind,
    qubits: [u32; 2],
}

#[derive(Serialize, Deserialize)]
struct GateRepr {
    kind: GateKind,
    qubits: Vec<usize>,
}

impl TryFrom<GateRepr> for Gate {
    type Error = Error;

    fn try_from(repr: GateRepr) -> Result<Self> {
        Gate::new(repr.kind, &repr.qubits)
    }
}

impl From<Gate> for GateRepr {
    fn from(gate: Gate) -> Self {
        GateRepr {
            kind: gate.kind,
            qubits: gate.qubits().collect(),
        }
    }
}

impl Gate {
    /// Checked constructor: arity must match the kind and qubits must be distinct.
    pub fn new(kind: GateKind, qubits: &[usize]) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::InvalidCircuit(format!(
                "{kind} takes {} qubit(s), got {}",
                kind.arity(),
                qubits.len()
            )));
        }
        if qubits.iter().any(|&q| q > u32::MAX as usize) {
            return Err(Error::InvalidCircuit("qubit index too large".into()));
        }
        if kind.is_two_qubit() && qubits[0] == qubits[1] {
            return Err(Error::InvalidCircuit(format!(
                "{kind} on repeated qubit {}",
                qubits[0]
            )));
        }
        let second = if kind.is_two_qubit() { qubits[1] } else { 0 };
        Ok(Gate {
            kind,
            qubits: [qubits[0] as u32, second as u32],
        })
    }

    fn one(kind: GateKind, q: usize) -> Self {
        Gate {
            kind,
            qubits: [q as u32, 0],
        }
    }

    fn two(kind: GateKind, a: usize, b: usize) -> Self {
        assert_ne!(a, b, "two-qubit gate on a repeated qubit");
        Gate {
            kind,
            qubits: [a as u32, b as u32],
        }
    }

    pub fn h(q: usize) -> Self {
        Self::one(GateKind::H, q)
    }
    pub fn x(q: usize) -> Self {
        Self::one(GateKind::X, q)
    }
    pub fn t(q: usize) -> Self {
        Self::one(GateKind::T, q)
    }
    pub fn s(q: usize) -> Self {
        Self::one(GateKind::S, q)
    }
    pub fn sdg(q: usize) -> Self {
        Self::one(GateKind::Sdg, q)
    }
    pub fn cx(control: usize, target: usize) -> Self {
        Self::two(GateKind::CX, control, target)
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Self::two(GateKind::CZ, a, b)
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn arity(&self) -> usize {
        self.kind.arity()
    }

    /// First qubit (the control for CX).
    pub fn q0(&self) -> usize {
        self.qubits[0] as usize
    }

    /// Second qubit of a two-qubit gate (the target for CX).
    pub fn q1(&self) -> Option<usize> {
        self.kind.is_two_qubit().then_some(self.qubits[1] as usize)
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.qubits[..self.arity()].iter().map(|&q| q as usize)
    }

    pub fn max_qubit(&self) -> usize {
        self.qubits().max().unwrap_or(0)
    }

    /// The same gate with every qubit index shifted down by `offset`.
    pub(crate) fn relabeled(&self, offset: usize) -> Self {
        let mut g = *self;
        for q in &mut g.qubits[..self.arity()] {
            *q -= offset as u32;
        }
        g
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.q1() {
            Some(b) => write!(f, "{}({},{})", self.kind, self.q0(), b),
            None => write!(f, "{}({})", self.kind, self.q0()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CircuitRepr")]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

#[derive(Deserialize)]
struct CircuitRepr {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl TryFrom<CircuitRepr> for Circuit {
    type Error = Error;

    fn try_from(repr: CircuitRepr) -> Result<Self> {
        Circuit::from_gates(repr.num_qubits, repr.gates)
    }
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn with_capacity(num_qubits: usize, gates: usize) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::with_capacity(gates),
        }
    }

    pub fn from_gates(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut circuit = Circuit::with_capacity(num_qubits, gates.len());
        for gate in gates {
            circuit.push(gate)?;
        }
        Ok(circuit)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if gate.max_qubit() >= self.num_qubits {
            return Err(Error::InvalidCircuit(format!(
                "{gate} out of range for {} qubits",
                self.num_qubits
            )));
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Unchecked push for generators that construct indices themselves.
    pub(crate) fn push_unchecked(&mut self, gate: Gate) {
        debug_assert!(gate.max_qubit() < self.num_qubits);
        self.gates.push(gate);
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn depth(&self) -> usize {
        compute_depth(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Longest chain of gates sharing qubits, by per-qubit frontier scheduling.
pub fn compute_depth(circuit: &Circuit) -> usize {
    let mut frontier = vec![0usize; circuit.num_qubits()];
    let mut depth = 0;
    for gate in circuit.gates() {
        let layer = gate.qubits().map(|q| frontier[q]).max().unwrap_or(0) + 1;
        for q in gate.qubits() {
            frontier[q] = layer;
        }
        depth = depth.max(layer);
    }
    depth
}

/// Parameters of one benchmark circuit instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub q: usize,
    pub n: usize,
    pub blocks: usize,
    /// Pads `10^p` alternating T/X gates on the outermost qubits when set.
    pub depth_pad_exponent: Option<u32>,
}

impl BenchmarkSpec {
    pub fn new(q: usize, n: usize, blocks: usize) -> Self {
        BenchmarkSpec {
            q,
            n,
            blocks,
            depth_pad_exponent: None,
        }
    }

    pub fn with_padding(self, p: u32) -> Self {
        BenchmarkSpec {
            depth_pad_exponent: Some(p),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(Error::InvalidConfig(format!(
                "q must be at least 2, got {}",
                self.q
            )));
        }
        if self.n < 2 || self.n > self.q {
            return Err(Error::InvalidConfig(format!(
                "n must satisfy 2 <= n <= q, got n={} for q={}",
                self.n, self.q
            )));
        }
        if !self.q.is_multiple_of(self.n) {
            return Err(Error::InvalidConfig(format!(
                "q={} is not divisible by n={}",
                self.q, self.n
            )));
        }
        if self.blocks == 0 {
            return Err(Error::InvalidConfig("blocks must be at least 1".into()));
        }
        Ok(())
    }

    /// Total cut count of the equal partition: each block crosses each boundary once.
    pub fn c_total(&self) -> usize {
        self.blocks * (self.n - 1)
    }

    /// Builds the staircase, padded if `depth_pad_exponent` is set.
    pub fn build(&self) -> Result<Circuit> {
        match self.depth_pad_exponent {
            Some(_) => build_depth_padded(self),
            None => build_staircase(self),
        }
    }
}

const STEP_GATES: usize = 5;

/// The staircase block applies, for each adjacent pair (i, i+1):
/// T(i) T(i+1) CX(i, i+1) T(i) T(i+1).
fn push_block(circuit: &mut Circuit, q: usize) {
    for i in 0..q - 1 {
        circuit.push_unchecked(Gate::t(i));
        circuit.push_unchecked(Gate::t(i + 1));
        circuit.push_unchecked(Gate::cx(i, i + 1));
        circuit.push_unchecked(Gate::t(i));
        circuit.push_unchecked(Gate::t(i + 1));
    }
}

/// Staircase with an arbitrary number of blocks (zero gives the bare H layer).
///
/// Does not check partition divisibility; callers that sweep unequal
/// splits use this directly.
pub fn staircase(q: usize, blocks: usize) -> Result<Circuit> {
    if q < 2 {
        return Err(Error::InvalidConfig(format!(
            "q must be at least 2, got {q}"
        )));
    }
    let mut circuit = Circuit::with_capacity(q, q + blocks * STEP_GATES * (q - 1));
    for i in 0..q {
        circuit.push_unchecked(Gate::h(i));
    }
    for _ in 0..blocks {
        push_block(&mut circuit, q);
    }
    Ok(circuit)
}

pub fn build_staircase(spec: &BenchmarkSpec) -> Result<Circuit> {
    if spec.depth_pad_exponent.is_some() {
        return Err(Error::InvalidConfig(
            "build_staircase does not pad; use build_depth_padded".into(),
        ));
    }
    spec.validate()?;
    staircase(spec.q, spec.blocks)
}

/// Number of pad gates on each end for exponent `p`, if representable.
pub fn pad_length(p: u32) -> Result<usize> {
    10usize
        .checked_pow(p)
        .filter(|len| len.checked_mul(2).is_some())
        .ok_or_else(|| Error::InvalidConfig(format!("10^{p} pad gates overflow the gate count")))
}

fn push_pad(circuit: &mut Circuit, qubit: usize, len: usize) {
    for k in 0..len {
        if k % 2 == 0 {
            circuit.push_unchecked(Gate::t(qubit));
        } else {
            circuit.push_unchecked(Gate::x(qubit));
        }
    }
}

/// Staircase with `10^p` alternating T,X gates right after H on qubit 0 and
/// `10^p` more at the end of qubit q-1.
pub fn build_depth_padded(spec: &BenchmarkSpec) -> Result<Circuit> {
    let p = spec.depth_pad_exponent.ok_or_else(|| {
        Error::InvalidConfig("build_depth_padded needs depth_pad_exponent".into())
    })?;
    spec.validate()?;
    let pad = pad_length(p)?;
    let q = spec.q;
    let base = q + spec.blocks * STEP_GATES * (q - 1);
    let total = base
        .checked_add(2 * pad)
        .ok_or_else(|| Error::InvalidConfig("padded gate count overflows".into()))?;

    let mut circuit = Circuit::with_capacity(q, total);
    circuit.push_unchecked(Gate::h(0));
    push_pad(&mut circuit, 0, pad);
    for i in 1..q {
        circuit.push_unchecked(Gate::h(i));
    }
    for _ in 0..spec.blocks {
        push_block(&mut circuit, q);
    }
    push_pad(&mut circuit, q - 1, pad);
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boundary_cx(circuit: &Circuit, seg_size: usize) -> Vec<(usize, Gate)> {
        circuit
            .gates()
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, g)| {
                g.q1()
                    .is_some_and(|b| g.q0() / seg_size != b / seg_size)
            })
            .collect()
    }

    #[test]
    fn smallest_staircase() {
        let c = build_staircase(&BenchmarkSpec::new(2, 2, 1)).unwrap();
        let expected = vec![
            Gate::h(0),
            Gate::h(1),
            Gate::t(0),
            Gate::t(1),
            Gate::cx(0, 1),
            Gate::t(0),
            Gate::t(1),
        ];
        assert_eq!(c.gates(), expected.as_slice());
        // H layer, T layer, CX, T layer.
        assert_eq!(c.depth(), 4);
        assert_eq!(boundary_cx(&c, 1).len(), 1);
    }

    #[test]
    fn six_qubit_one_cut() {
        let c = build_staircase(&BenchmarkSpec::new(6, 2, 1)).unwrap();
        let hs = c.gates().iter().filter(|g| g.kind() == GateKind::H).count();
        let cxs = c.gates().iter().filter(|g| g.kind() == GateKind::CX).count();
        assert_eq!((hs, cxs), (6, 5));
        let cut = boundary_cx(&c, 3);
        assert_eq!(cut.len(), 1);
        assert_eq!(cut[0].1, Gate::cx(2, 3));
    }

    #[test]
    fn three_way_two_blocks() {
        let spec = BenchmarkSpec::new(6, 3, 2);
        let c = build_staircase(&spec).unwrap();
        let cut = boundary_cx(&c, 2);
        let across_01 = cut.iter().filter(|(_, g)| g.q0() == 1).count();
        let across_12 = cut.iter().filter(|(_, g)| g.q0() == 3).count();
        assert_eq!((across_01, across_12), (2, 2));
        assert_eq!(cut.len(), 4);
        assert_eq!(spec.c_total(), 4);
    }

    #[test]
    fn staircase_rejects_bad_specs() {
        assert!(build_staircase(&BenchmarkSpec::new(1, 1, 1)).is_err());
        assert!(build_staircase(&BenchmarkSpec::new(6, 4, 1)).is_err());
        assert!(build_staircase(&BenchmarkSpec::new(4, 2, 0)).is_err());
        assert!(build_staircase(&BenchmarkSpec::new(6, 2, 1).with_padding(0)).is_err());
    }

    #[test]
    fn padding_adds_exactly_two_pads() {
        let spec = BenchmarkSpec::new(6, 2, 1);
        let base = build_staircase(&spec).unwrap();
        for (p, extra) in [(0, 2), (2, 200)] {
            let padded = build_depth_padded(&spec.with_padding(p)).unwrap();
            assert_eq!(padded.gate_count(), base.gate_count() + extra);
            assert_eq!(boundary_cx(&padded, 3).len(), 1);
        }
    }

    #[test]
    fn pad_placement() {
        let spec = BenchmarkSpec::new(4, 2, 1).with_padding(1);
        let c = build_depth_padded(&spec).unwrap();
        let g = c.gates();
        assert_eq!(g[0], Gate::h(0));
        assert_eq!(g[1], Gate::t(0));
        assert_eq!(g[2], Gate::x(0));
        assert_eq!(g[10], Gate::x(0));
        assert_eq!(g[11], Gate::h(1));
        let tail = &g[g.len() - 10..];
        assert!(tail.iter().all(|gate| gate.q0() == 3 && gate.arity() == 1));
        assert_eq!(tail[0], Gate::t(3));
        assert_eq!(tail[9], Gate::x(3));
    }

    #[test]
    fn pad_overflow_rejected() {
        assert!(pad_length(19).is_err());
        assert!(pad_length(30).is_err());
        assert!(build_depth_padded(&BenchmarkSpec::new(4, 2, 1).with_padding(40)).is_err());
        assert_eq!(pad_length(3).unwrap(), 1000);
    }

    #[test]
    fn depth_examples() {
        assert_eq!(Circuit::new(3).depth(), 0);
        let parallel = Circuit::from_gates(2, vec![Gate::h(0), Gate::h(1)]).unwrap();
        assert_eq!(parallel.depth(), 1);
        let chain = Circuit::from_gates(2, vec![Gate::h(0), Gate::cx(0, 1), Gate::h(1)]).unwrap();
        assert_eq!(chain.depth(), 3);
    }

    #[test]
    fn gate_validation() {
        assert!(Gate::new(GateKind::CX, &[1, 1]).is_err());
        assert!(Gate::new(GateKind::H, &[0, 1]).is_err());
        assert!(Gate::new(GateKind::CZ, &[0]).is_err());
        let mut c = Circuit::new(2);
        assert!(c.push(Gate::cx(0, 2)).is_err());
        assert!(c.push(Gate::cx(1, 0)).is_ok());
    }

    #[test]
    fn json_uses_exact_kind_strings() {
        let c = Circuit::from_gates(
            2,
            vec![Gate::h(0), Gate::sdg(1), Gate::cx(0, 1), Gate::cz(1, 0)],
        )
        .unwrap();
        let json = c.to_json().unwrap();
        assert_eq!(
            json,
            r#"{"num_qubits":2,"gates":[{"kind":"H","qubits":[0]},{"kind":"Sdg","qubits":[1]},{"kind":"CX","qubits":[0,1]},{"kind":"CZ","qubits":[1,0]}]}"#
        );
        assert_eq!(Circuit::from_json(&json).unwrap(), c);
    }

    #[test]
    fn json_rejects_invalid_gates() {
        assert!(Circuit::from_json(r#"{"num_qubits":2,"gates":[{"kind":"CX","qubits":[0,2]}]}"#).is_err());
        assert!(Circuit::from_json(r#"{"num_qubits":2,"gates":[{"kind":"T","qubits":[0,1]}]}"#).is_err());
        assert!(Circuit::from_json(r#"{"num_qubits":2,"gates":[{"kind":"CCX","qubits":[0]}]}"#).is_err());
    }
}
