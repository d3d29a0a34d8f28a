//! Full-state reconstruction from subcircuit states.
//!
//! The reconstructed state is `Σ_m α_m · ψ_0^{r_0(m)} ⊗ … ⊗ ψ_{n-1}^{r_{n-1}(m)}`
//! with segment 0 on the low qubits. [`merge`] walks the output in
//! contiguous blocks of `2^{q_0}` amplitudes (one block per index of the
//! high segments) and sums every term into the block before moving on, so a
//! block stays cache resident for all `2^{c_total}` terms. With
//! `c_total >= PAIRWISE_MIN_CUTS` the per-block sum is pairwise.

use num_complex::Complex64;

use crate::cutter::MergeTable;
use crate::deadline::Deadline;
use crate::error::{Error, Result};
use crate::statevec::{tensor_into, SimConfig, StateVec};

/// Cut count from which per-block term sums are accumulated pairwise.
pub const PAIRWISE_MIN_CUTS: usize = 12;

/// Terms summed left to right into one leaf of the pairwise tree.
const LEAF_TERMS: usize = 64;

/// Output amplitudes accumulated together; consecutive high indices share
/// each read of a low-segment state.
const TILE_AMPS: usize = 1 << 14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub struct MergeInput<'a> {
    pub num_qubits: usize,
    /// `segment_states[i][r]` is the state of subcircuit `r` of segment `i`.
    pub segment_states: &'a [Vec<StateVec>],
    pub coeffs: &'a [Complex64],
    pub merge_table: &'a MergeTable,
}

struct Layout {
    /// Qubit count of every segment, low to high.
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl Layout {
    fn new(sizes: Vec<usize>, num_qubits: usize) -> Result<Self> {
        if sizes.iter().sum::<usize>() != num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "segment sizes {sizes:?} do not add up to {num_qubits} qubits"
            )));
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut off = 0;
        for s in &sizes {
            offsets.push(off);
            off += s;
        }
        Ok(Layout { sizes, offsets })
    }
}

fn check_table(table: &MergeTable, coeffs: &[Complex64], segments: usize) -> Result<()> {
    if table.num_segments() != segments {
        return Err(Error::DimensionMismatch(format!(
            "merge table has {} segments, expected {segments}",
            table.num_segments()
        )));
    }
    if coeffs.len() != table.num_terms() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} merge terms",
            coeffs.len(),
            table.num_terms()
        )));
    }
    if !table.num_terms().is_power_of_two() {
        return Err(Error::DimensionMismatch(
            "merge term count must be a power of two".into(),
        ));
    }
    Ok(())
}

impl MergeInput<'_> {
    fn validate(&self) -> Result<Layout> {
        let n = self.segment_states.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("no segments to merge".into()));
        }
        check_table(self.merge_table, self.coeffs, n)?;
        let mut sizes = Vec::with_capacity(n);
        for (i, states) in self.segment_states.iter().enumerate() {
            let first = states.first().ok_or_else(|| {
                Error::DimensionMismatch(format!("segment {i} has no states"))
            })?;
            if states.iter().any(|s| s.num_qubits() != first.num_qubits()) {
                return Err(Error::DimensionMismatch(format!(
                    "segment {i} states differ in qubit count"
                )));
            }
            if !states.len().is_power_of_two() {
                return Err(Error::DimensionMismatch(format!(
                    "segment {i} has {} states, not a power of two",
                    states.len()
                )));
            }
            sizes.push(first.num_qubits());
        }
        for row in self.merge_table.rows() {
            for (i, &r) in row.iter().enumerate() {
                if r as usize >= self.segment_states[i].len() {
                    return Err(Error::DimensionMismatch(format!(
                        "merge table index {r} out of range for segment {i}"
                    )));
                }
            }
        }
        Layout::new(sizes, self.num_qubits)
    }
}

#[inline]
fn axpy(out: &mut [Complex64], scale: Complex64, x: &[Complex64]) {
    for (o, &v) in out.iter_mut().zip(x) {
        *o += scale * v;
    }
}

#[inline]
fn add_assign(out: &mut [Complex64], x: &[Complex64]) {
    for (o, &v) in out.iter_mut().zip(x) {
        *o += v;
    }
}

/// Binary-counter pairwise summation of equally sized block buffers.
struct PairwiseSum {
    block: usize,
    levels: Vec<Option<Vec<Complex64>>>,
    spare: Vec<Vec<Complex64>>,
}

impl PairwiseSum {
    fn new(block: usize) -> Self {
        PairwiseSum {
            block,
            levels: Vec::new(),
            spare: Vec::new(),
        }
    }

    fn zeroed_buffer(&mut self) -> Vec<Complex64> {
        match self.spare.pop() {
            Some(mut v) => {
                v.fill(ZERO);
                v
            }
            None => vec![ZERO; self.block],
        }
    }

    fn push(&mut self, mut cur: Vec<Complex64>) {
        let mut level = 0;
        loop {
            if level == self.levels.len() {
                self.levels.push(None);
            }
            match self.levels[level].take() {
                Some(prev) => {
                    add_assign(&mut cur, &prev);
                    self.spare.push(prev);
                    level += 1;
                }
                None => {
                    self.levels[level] = Some(cur);
                    return;
                }
            }
        }
    }

    fn finish_into(&mut self, out: &mut [Complex64]) {
        out.fill(ZERO);
        for slot in &mut self.levels {
            if let Some(v) = slot.take() {
                add_assign(out, &v);
                self.spare.push(v);
            }
        }
    }
}

/// Reconstructs the full state keeping every subcircuit state in memory.
pub fn merge(input: &MergeInput<'_>, config: &SimConfig) -> Result<StateVec> {
    merge_until(input, config, &Deadline::none())
}

pub fn merge_until(
    input: &MergeInput<'_>,
    config: &SimConfig,
    deadline: &Deadline,
) -> Result<StateVec> {
    let layout = input.validate()?;
    let mut acc = StateVec::zeros(input.num_qubits, config)?;

    let n = layout.sizes.len();
    let q0 = layout.sizes[0];
    let block = 1usize << q0;
    let blocks = acc.len() / block;
    let tile_blocks = (TILE_AMPS / block).clamp(1, blocks);
    // (shift, mask) extracting each high segment's index from a block index.
    let high: Vec<(usize, usize)> = (1..n)
        .map(|i| (layout.offsets[i] - q0, (1usize << layout.sizes[i]) - 1))
        .collect();
    let states = input.segment_states;
    let table = input.merge_table;
    let terms = table.num_terms();
    let pairwise = terms.trailing_zeros() as usize >= PAIRWISE_MIN_CUTS;
    let mut tree = PairwiseSum::new(tile_blocks * block);
    let mut scales = vec![ZERO; tile_blocks];

    // Adds term m for every block of the tile starting at block h0.
    let mut add_term = |m: usize, h0: usize, out: &mut [Complex64]| {
        let row = table.row(m);
        scales.fill(input.coeffs[m]);
        for (i, &(shift, mask)) in high.iter().enumerate() {
            let amps = states[i + 1][row[i + 1] as usize].amplitudes();
            for (t, s) in scales.iter_mut().enumerate() {
                *s *= amps[((h0 + t) >> shift) & mask];
            }
        }
        let low = states[0][row[0] as usize].amplitudes();
        for (chunk, &s) in out.chunks_exact_mut(block).zip(&scales) {
            axpy(chunk, s, low);
        }
    };

    for (tile, out) in acc
        .amplitudes_mut()
        .chunks_exact_mut(tile_blocks * block)
        .enumerate()
    {
        deadline.check()?;
        let h0 = tile * tile_blocks;
        if pairwise {
            for leaf in (0..terms).step_by(LEAF_TERMS) {
                let mut buf = tree.zeroed_buffer();
                for m in leaf..(leaf + LEAF_TERMS).min(terms) {
                    add_term(m, h0, &mut buf);
                }
                tree.push(buf);
            }
            tree.finish_into(out);
        } else {
            for m in 0..terms {
                add_term(m, h0, out);
            }
        }
    }
    Ok(acc)
}

/// Produces segment states on demand for [`merge_streaming`].
pub trait StateProvider {
    fn segment_state(&mut self, segment: usize, index: usize) -> Result<StateVec>;
}

/// Reconstructs the full state one term at a time, asking `provider` for
/// each segment state as it is needed and discarding it afterwards.
///
/// Peak memory is the accumulator, one high-segment product and the current
/// segment states; every state is regenerated once per term that uses it.
pub fn merge_streaming<P: StateProvider + ?Sized>(
    provider: &mut P,
    segment_qubits: &[usize],
    coeffs: &[Complex64],
    merge_table: &MergeTable,
    num_qubits: usize,
    config: &SimConfig,
    deadline: &Deadline,
) -> Result<StateVec> {
    let layout = Layout::new(segment_qubits.to_vec(), num_qubits)?;
    let n = layout.sizes.len();
    check_table(merge_table, coeffs, n)?;
    let mut acc = StateVec::zeros(num_qubits, config)?;

    let q0 = layout.sizes[0];
    let high_qubits = num_qubits - q0;
    let mut scratch = vec![ZERO; if n > 2 { 1 << high_qubits } else { 0 }];
    let mut fold = scratch.clone();

    for m in 0..merge_table.num_terms() {
        deadline.check()?;
        let row = merge_table.row(m);
        let mut seg_states = Vec::with_capacity(n);
        for (i, &r) in row.iter().enumerate() {
            let s = provider.segment_state(i, r as usize)?;
            if s.num_qubits() != layout.sizes[i] {
                return Err(Error::DimensionMismatch(format!(
                    "provider returned {} qubits for segment {i}, expected {}",
                    s.num_qubits(),
                    layout.sizes[i]
                )));
            }
            seg_states.push(s);
        }

        // Right fold from the highest segment: scratch = ψ_1 ⊗ … ⊗ ψ_{n-1}.
        let high: &[Complex64] = if n == 2 {
            seg_states[1].amplitudes()
        } else {
            let mut width = 1usize << layout.sizes[n - 1];
            scratch[..width].copy_from_slice(seg_states[n - 1].amplitudes());
            for s in seg_states[1..n - 1].iter().rev() {
                let next = width << s.num_qubits();
                tensor_into(s.amplitudes(), &scratch[..width], &mut fold[..next]);
                std::mem::swap(&mut scratch, &mut fold);
                width = next;
            }
            &scratch[..width]
        };

        let alpha = coeffs[m];
        let low = seg_states[0].amplitudes();
        for (out, &hv) in acc
            .amplitudes_mut()
            .chunks_exact_mut(low.len())
            .zip(high)
        {
            axpy(out, alpha * hv, low);
        }
    }
    Ok(acc)
}
