//! Gate cutting over a contiguous partition of the qubits.
//!
//! Every CX or CZ whose qubits fall in two adjacent segments is replaced by
//! the two-term decomposition
//!
//! ```text
//! CZ = 1/(1+i) · (S ⊗ S + i · S† ⊗ S†)
//! CX = (I ⊗ H) · CZ · (I ⊗ H)
//! ```
//!
//! so cut `j` contributes term `b_j ∈ {0, 1}`: S on both sides for `b_j = 0`
//! and S† for `b_j = 1`, with the target side of a CX conjugated by H. Global
//! term index `m` carries cut `j` in bit `j`, cuts numbered in circuit order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

/// Upper bound on the total cut count we are willing to enumerate.
pub const MAX_TOTAL_CUTS: usize = 26;

/// Contiguous blocks of qubits; segment 0 holds the lowest indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl Partition {
    pub fn equal(q: usize, n: usize) -> Result<Self> {
        if n < 2 || n > q {
            return Err(Error::InvalidConfig(format!(
                "segment count must satisfy 2 <= n <= q, got n={n} for q={q}"
            )));
        }
        if !q.is_multiple_of(n) {
            return Err(Error::InvalidConfig(format!(
                "q={q} is not divisible by n={n}"
            )));
        }
        Self::from_sizes(vec![q / n; n])
    }

    pub fn from_sizes(sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "a partition needs at least two non-empty segments, got {sizes:?}"
            )));
        }
        let offsets = sizes
            .iter()
            .scan(0, |acc, &s| {
                let off = *acc;
                *acc += s;
                Some(off)
            })
            .collect();
        Ok(Partition { sizes, offsets })
    }

    pub fn num_segments(&self) -> usize {
        self.sizes.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn offset(&self, segment: usize) -> usize {
        self.offsets[segment]
    }

    pub fn size(&self, segment: usize) -> usize {
        self.sizes[segment]
    }

    pub fn max_size(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn segment_of(&self, qubit: usize) -> usize {
        // partition_point: first offset strictly greater than qubit.
        self.offsets.partition_point(|&off| off <= qubit) - 1
    }
}

/// One cut: a two-qubit gate whose qubits straddle a boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryGate {
    /// Index of the gate in the original circuit.
    pub position: usize,
    /// Boundary between segments `boundary` and `boundary + 1`.
    pub boundary: usize,
    pub kind: GateKind,
    /// Segment of the gate's first qubit (the CX control).
    pub control_segment: usize,
    /// Segment of the gate's second qubit (the CX target).
    pub target_segment: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPlan {
    pub partition: Partition,
    /// Cuts in circuit order; index in this list is the global cut id.
    pub boundary_gates: Vec<BoundaryGate>,
    /// Cut count on each of the `n - 1` boundaries.
    pub c_per_boundary: Vec<usize>,
    /// Cuts adjacent to each segment.
    pub c_per_segment: Vec<usize>,
}

impl CutPlan {
    pub fn n(&self) -> usize {
        self.partition.num_segments()
    }

    pub fn c_total(&self) -> usize {
        self.boundary_gates.len()
    }

    pub fn c_max(&self) -> usize {
        self.c_per_segment.iter().copied().max().unwrap_or(0)
    }

    /// Global cut ids adjacent to `segment`, ascending.
    pub fn segment_cuts(&self, segment: usize) -> Vec<usize> {
        self.boundary_gates
            .iter()
            .enumerate()
            .filter(|(_, b)| b.control_segment == segment || b.target_segment == segment)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn num_subcircuits(&self) -> usize {
        count_subcircuits(self)
    }
}

/// Equal partition into `n` segments.
pub fn plan_cut(circuit: &Circuit, n: usize) -> Result<CutPlan> {
    plan_cut_with(circuit, Partition::equal(circuit.num_qubits(), n)?)
}

/// Scans the circuit once and records every straddling two-qubit gate.
pub fn plan_cut_with(circuit: &Circuit, partition: Partition) -> Result<CutPlan> {
    if partition.num_qubits() != circuit.num_qubits() {
        return Err(Error::InvalidConfig(format!(
            "partition covers {} qubits but the circuit has {}",
            partition.num_qubits(),
            circuit.num_qubits()
        )));
    }
    let n = partition.num_segments();
    let mut boundary_gates = Vec::new();
    let mut c_per_boundary = vec![0; n - 1];
    let mut c_per_segment = vec![0; n];

    for (position, gate) in circuit.gates().iter().enumerate() {
        let Some(second) = gate.q1() else { continue };
        let sa = partition.segment_of(gate.q0());
        let sb = partition.segment_of(second);
        if sa == sb {
            continue;
        }
        if sa.abs_diff(sb) != 1 {
            return Err(Error::UnsupportedTopology {
                position,
                first: sa,
                second: sb,
            });
        }
        let boundary = sa.min(sb);
        c_per_boundary[boundary] += 1;
        c_per_segment[sa] += 1;
        c_per_segment[sb] += 1;
        boundary_gates.push(BoundaryGate {
            position,
            boundary,
            kind: gate.kind(),
            control_segment: sa,
            target_segment: sb,
        });
    }

    if boundary_gates.len() > MAX_TOTAL_CUTS {
        return Err(Error::InvalidConfig(format!(
            "{} cuts exceed the enumeration limit of {MAX_TOTAL_CUTS}",
            boundary_gates.len()
        )));
    }

    Ok(CutPlan {
        partition,
        boundary_gates,
        c_per_boundary,
        c_per_segment,
    })
}

/// Σ_i 2^{c_i}.
pub fn count_subcircuits(plan: &CutPlan) -> usize {
    plan.c_per_segment.iter().map(|&c| 1usize << c).sum()
}

/// All subcircuits of one segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentCircuits {
    /// Global qubit index of each local qubit.
    pub global_qubits: Vec<usize>,
    /// Global cut ids adjacent to this segment; local bit `l` of a
    /// subcircuit index is cut `cut_ids[l]`.
    pub cut_ids: Vec<usize>,
    /// `2^{c_i}` circuits on local qubits, indexed by local term bits.
    pub subcircuits: Vec<Circuit>,
}

impl SegmentCircuits {
    pub fn num_qubits(&self) -> usize {
        self.global_qubits.len()
    }

    pub fn offset(&self) -> usize {
        self.global_qubits.first().copied().unwrap_or(0)
    }
}

/// Global term index -> per-segment subcircuit indices, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeTable {
    segments: usize,
    entries: Vec<u32>,
}

impl MergeTable {
    /// Builds the table by bit restriction: `r_i(m)` collects the bits of
    /// `m` at the cut ids adjacent to segment `i`.
    pub fn build(c_total: usize, segment_cuts: &[Vec<usize>]) -> Self {
        let segments = segment_cuts.len();
        let terms = 1usize << c_total;
        let mut entries = Vec::with_capacity(terms * segments);
        for m in 0..terms {
            for cuts in segment_cuts {
                let r = cuts
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (l, &j)| acc | (((m >> j) & 1) as u32) << l);
                entries.push(r);
            }
        }
        MergeTable { segments, entries }
    }

    pub fn from_rows(segments: usize, rows: &[Vec<u32>]) -> Result<Self> {
        if segments == 0 || rows.iter().any(|r| r.len() != segments) {
            return Err(Error::DimensionMismatch(
                "merge table rows must all have one entry per segment".into(),
            ));
        }
        Ok(MergeTable {
            segments,
            entries: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn num_segments(&self) -> usize {
        self.segments
    }

    pub fn num_terms(&self) -> usize {
        self.entries.len() / self.segments
    }

    /// `(r_1, ..., r_n)` for term `m`.
    #[inline]
    pub fn row(&self, m: usize) -> &[u32] {
        &self.entries[m * self.segments..(m + 1) * self.segments]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.entries.chunks_exact(self.segments)
    }
}

impl Serialize for MergeTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.rows())
    }
}

impl<'de> Deserialize<'de> for MergeTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<u32>>::deserialize(d)?;
        let segments = rows.first().map_or(0, Vec::len);
        MergeTable::from_rows(segments, &rows).map_err(serde::de::Error::custom)
    }
}

/// Coefficient of term `b` of one cut: α_0 = 1/(1+i), α_1 = i/(1+i).
pub fn cut_coefficient(bit: usize) -> Complex64 {
    let denom = Complex64::new(1.0, 1.0);
    if bit == 0 {
        Complex64::new(1.0, 0.0) / denom
    } else {
        Complex64::new(0.0, 1.0) / denom
    }
}

/// α_m = Π_j α_{b_j(m)} for all `2^{c_total}` terms.
///
/// The product depends only on how many cuts take term 1, so it is
/// evaluated from a table of `α_0^{c-k} α_1^k`.
pub fn term_coefficients(c_total: usize) -> Vec<Complex64> {
    let (a0, a1) = (cut_coefficient(0), cut_coefficient(1));
    let by_popcount: Vec<Complex64> = (0..=c_total)
        .map(|k| a0.powu((c_total - k) as u32) * a1.powu(k as u32))
        .collect();
    (0..1usize << c_total)
        .map(|m| by_popcount[m.count_ones() as usize])
        .collect()
}

pub const SUBCIRCUIT_SCHEMA_VERSION: u32 = 1;

/// Output of preprocessing: every subcircuit, the merge table, and α_m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubcircuitSet {
    pub schema_version: u32,
    pub num_qubits: usize,
    pub c_total: usize,
    pub segments: Vec<SegmentCircuits>,
    pub merge_table: MergeTable,
    pub coeffs: Vec<Complex64>,
}

impl SubcircuitSet {
    pub fn num_subcircuits(&self) -> usize {
        self.segments.iter().map(|s| s.subcircuits.len()).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// What the traversal does with each gate of the original circuit for one segment.
#[derive(Clone, Copy)]
enum Action {
    Skip,
    Local(Gate),
    /// Local cut bit `bit`, inserted on local qubit `qubit`; `conjugate`
    /// wraps the phase gate in H (CX target side).
    Cut {
        bit: usize,
        qubit: usize,
        conjugate: bool,
    },
}

/// Generates all subcircuits, traversing the circuit once per subcircuit.
pub fn decompose(circuit: &Circuit, plan: &CutPlan) -> Result<SubcircuitSet> {
    if plan.partition.num_qubits() != circuit.num_qubits() {
        return Err(Error::InvalidConfig(
            "cut plan does not match the circuit".into(),
        ));
    }
    let c_total = plan.c_total();
    if c_total > MAX_TOTAL_CUTS {
        return Err(Error::InvalidConfig(format!(
            "{c_total} cuts exceed the enumeration limit of {MAX_TOTAL_CUTS}"
        )));
    }

    let mut cut_at = vec![None; circuit.gate_count()];
    for (j, b) in plan.boundary_gates.iter().enumerate() {
        let gate = circuit.gates().get(b.position).ok_or_else(|| {
            Error::InvalidConfig(format!("boundary gate position {} out of range", b.position))
        })?;
        if !gate.kind().is_two_qubit() {
            return Err(Error::InvalidConfig(format!(
                "gate {} at boundary position is not two-qubit",
                b.position
            )));
        }
        cut_at[b.position] = Some(j);
    }

    let n = plan.n();
    let mut segments = Vec::with_capacity(n);
    let mut all_cut_ids = Vec::with_capacity(n);
    for seg in 0..n {
        let offset = plan.partition.offset(seg);
        let size = plan.partition.size(seg);
        let cut_ids = plan.segment_cuts(seg);

        let mut actions = Vec::with_capacity(circuit.gate_count());
        let mut local_bit = 0;
        for (pos, gate) in circuit.gates().iter().enumerate() {
            let inside = |q: usize| q >= offset && q < offset + size;
            let action = match cut_at[pos] {
                Some(_) => {
                    let on_control = inside(gate.q0());
                    let qubit = if on_control {
                        gate.q0()
                    } else {
                        gate.q1().expect("two-qubit gate")
                    };
                    if inside(qubit) {
                        let a = Action::Cut {
                            bit: local_bit,
                            qubit: qubit - offset,
                            conjugate: !on_control && gate.kind() == GateKind::CX,
                        };
                        local_bit += 1;
                        a
                    } else {
                        Action::Skip
                    }
                }
                None if gate.qubits().all(inside) => Action::Local(gate.relabeled(offset)),
                None => Action::Skip,
            };
            if !matches!(action, Action::Skip) {
                actions.push(action);
            }
        }
        debug_assert_eq!(local_bit, cut_ids.len());

        let inserted = 3 * cut_ids.len();
        let subcircuits = (0..1usize << cut_ids.len())
            .map(|b| {
                let mut sub = Circuit::with_capacity(size, actions.len() + inserted);
                for action in &actions {
                    match *action {
                        Action::Local(g) => sub.push_unchecked(g),
                        Action::Cut {
                            bit,
                            qubit,
                            conjugate,
                        } => {
                            let phase = if b >> bit & 1 == 0 {
                                Gate::s(qubit)
                            } else {
                                Gate::sdg(qubit)
                            };
                            if conjugate {
                                sub.push_unchecked(Gate::h(qubit));
                                sub.push_unchecked(phase);
                                sub.push_unchecked(Gate::h(qubit));
                            } else {
                                sub.push_unchecked(phase);
                            }
                        }
                        Action::Skip => {}
                    }
                }
                sub
            })
            .collect();

        segments.push(SegmentCircuits {
            global_qubits: (offset..offset + size).collect(),
            cut_ids: cut_ids.clone(),
            subcircuits,
        });
        all_cut_ids.push(cut_ids);
    }

    Ok(SubcircuitSet {
        schema_version: SUBCIRCUIT_SCHEMA_VERSION,
        num_qubits: circuit.num_qubits(),
        c_total,
        segments,
        merge_table: MergeTable::build(c_total, &all_cut_ids),
        coeffs: term_coefficients(c_total),
    })
}

/// Depth of each segment's restricted circuit (term 0 everywhere), i.e. D_seg,i.
pub fn segment_depths(set: &SubcircuitSet) -> Vec<usize> {
    set.segments
        .iter()
        .map(|s| s.subcircuits.first().map_or(0, Circuit::depth))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_staircase, BenchmarkSpec};

    fn staircase(q: usize, n: usize, blocks: usize) -> Circuit {
        build_staircase(&BenchmarkSpec::new(q, n, blocks)).unwrap()
    }

    fn approx(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-15
    }

    #[test]
    fn partition_lookup() {
        let p = Partition::from_sizes(vec![2, 3, 1]).unwrap();
        let segs: Vec<_> = (0..6).map(|q| p.segment_of(q)).collect();
        assert_eq!(segs, vec![0, 0, 1, 1, 1, 2]);
        assert!(Partition::equal(6, 4).is_err());
        assert!(Partition::equal(6, 1).is_err());
        assert!(Partition::from_sizes(vec![3, 0, 3]).is_err());
    }

    #[test]
    fn one_cut_bipartition() {
        let c = staircase(6, 2, 1);
        let plan = plan_cut(&c, 2).unwrap();
        assert_eq!(plan.c_total(), 1);
        let b = plan.boundary_gates[0];
        assert_eq!(c.gates()[b.position], Gate::cx(2, 3));
        assert_eq!((b.control_segment, b.target_segment), (0, 1));
    }

    #[test]
    fn three_way_adjacency_counts() {
        let plan = plan_cut(&staircase(6, 3, 1), 3).unwrap();
        assert_eq!(plan.c_per_boundary, vec![1, 1]);
        assert_eq!(plan.c_per_segment, vec![1, 2, 1]);
        assert_eq!(plan.c_max(), 2);
        assert_eq!(count_subcircuits(&plan), 8);
    }

    #[test]
    fn cut_free_partition() {
        let c = Circuit::from_gates(4, vec![Gate::h(0), Gate::cx(0, 1), Gate::cz(2, 3)]).unwrap();
        let plan = plan_cut(&c, 2).unwrap();
        assert_eq!(plan.c_total(), 0);
        assert_eq!(count_subcircuits(&plan), 2);
        let set = decompose(&c, &plan).unwrap();
        assert_eq!(set.num_subcircuits(), 2);
        assert_eq!(set.coeffs, vec![Complex64::new(1.0, 0.0)]);
        assert_eq!(set.merge_table.num_terms(), 1);
    }

    #[test]
    fn non_adjacent_segments_rejected() {
        let c = Circuit::from_gates(6, vec![Gate::cx(0, 5)]).unwrap();
        let err = plan_cut(&c, 3).unwrap_err();
        assert!(matches!(
            err,
            Error::UnsupportedTopology { position: 0, first: 0, second: 2 }
        ));
        assert!(plan_cut(&c, 4).is_err());
    }

    #[test]
    fn subcircuit_counts_by_enumeration() {
        // n=2, c=3 per boundary.
        let plan = plan_cut(&staircase(6, 2, 3), 2).unwrap();
        assert_eq!(count_subcircuits(&plan), 16);
        // n=3, c=2 per boundary: c_i = [2, 4, 2].
        let plan = plan_cut(&staircase(6, 3, 2), 3).unwrap();
        assert_eq!(plan.c_per_segment, vec![2, 4, 2]);
        assert_eq!(count_subcircuits(&plan), 24);
        let set = decompose(&staircase(6, 2, 3), &plan_cut(&staircase(6, 2, 3), 2).unwrap()).unwrap();
        assert_eq!(set.num_subcircuits(), 16);
    }

    #[test]
    fn one_cut_coefficients() {
        let coeffs = term_coefficients(1);
        assert!(approx(coeffs[0], Complex64::new(0.5, -0.5)));
        assert!(approx(coeffs[1], Complex64::new(0.5, 0.5)));
    }

    #[test]
    fn two_cut_coefficients() {
        let coeffs = term_coefficients(2);
        let a1 = Complex64::new(0.5, 0.5);
        assert!(approx(coeffs[3], a1 * a1));
        assert!(approx(coeffs[3], Complex64::new(0.0, 0.5)));
        assert!(approx(coeffs[1], coeffs[2]));
    }

    #[test]
    fn coefficients_match_explicit_product() {
        for c in 0..=8 {
            let coeffs = term_coefficients(c);
            for (m, &a) in coeffs.iter().enumerate() {
                let prod = (0..c)
                    .map(|j| cut_coefficient(m >> j & 1))
                    .fold(Complex64::new(1.0, 0.0), |acc, x| acc * x);
                assert!((a - prod).norm() < 1e-14, "c={c} m={m}");
            }
        }
    }

    #[test]
    fn merge_table_restricts_bits() {
        // Segment 0 sees cuts {0, 2}; segment 1 sees {0, 1, 2}; segment 2 sees {1}.
        let t = MergeTable::build(3, &[vec![0, 2], vec![0, 1, 2], vec![1]]);
        assert_eq!(t.num_terms(), 8);
        assert_eq!(t.row(0b101), &[0b11, 0b101, 0]);
        assert_eq!(t.row(0b010), &[0b00, 0b010, 1]);
        assert_eq!(t.row(0b111), &[0b11, 0b111, 1]);
    }

    #[test]
    fn inserted_gates_follow_cut_side() {
        let c = Circuit::from_gates(2, vec![Gate::cx(0, 1), Gate::cz(1, 0)]).unwrap();
        let set = decompose(&c, &plan_cut(&c, 2).unwrap()).unwrap();
        let lo = &set.segments[0];
        let hi = &set.segments[1];
        assert_eq!(lo.cut_ids, vec![0, 1]);
        // Segment 0 is the CX control and one side of the CZ.
        assert_eq!(lo.subcircuits[0b00].gates(), &[Gate::s(0), Gate::s(0)]);
        assert_eq!(lo.subcircuits[0b01].gates(), &[Gate::sdg(0), Gate::s(0)]);
        assert_eq!(lo.subcircuits[0b10].gates(), &[Gate::s(0), Gate::sdg(0)]);
        // Segment 1 is the CX target: H S H.
        assert_eq!(
            hi.subcircuits[0b01].gates(),
            &[Gate::h(0), Gate::sdg(0), Gate::h(0), Gate::s(0)]
        );
        assert_eq!(hi.global_qubits, vec![1]);
    }

    #[test]
    fn subcircuits_use_local_qubits() {
        let c = staircase(9, 3, 2);
        let set = decompose(&c, &plan_cut(&c, 3).unwrap()).unwrap();
        for seg in &set.segments {
            for sub in &seg.subcircuits {
                assert_eq!(sub.num_qubits(), 3);
                assert!(sub.gates().iter().all(|g| g.max_qubit() < 3));
            }
        }
        assert_eq!(set.segments[2].global_qubits, vec![6, 7, 8]);
        assert_eq!(segment_depths(&set).len(), 3);
    }

    #[test]
    fn json_round_trip() {
        let c = staircase(4, 2, 2);
        let set = decompose(&c, &plan_cut(&c, 2).unwrap()).unwrap();
        let json = set.to_json().unwrap();
        assert!(json.contains("\"coeffs\":[[0.0,-0.5],"));
        assert_eq!(SubcircuitSet::from_json(&json).unwrap(), set);
    }
}
