//! Dense state-vector simulation.
//!
//! Qubit `j` is bit `j` of the amplitude index (qubit 0 is the least
//! significant bit). Gates are applied one at a time with no fusion.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{self, Write};

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::deadline::Deadline;
use crate::error::{Error, Result};

/// Default memory guard in qubits (2^30 amplitudes = 16 GiB).
pub const DEFAULT_MAX_QUBITS: usize = 30;

/// Hard ceiling regardless of configuration; 2^usize::BITS would overflow.
const ABSOLUTE_MAX_QUBITS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub max_qubits: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl SimConfig {
    pub fn with_max_qubits(max_qubits: usize) -> Self {
        SimConfig { max_qubits }
    }

    pub fn check(&self, num_qubits: usize) -> Result<()> {
        let limit = self.max_qubits.min(ABSOLUTE_MAX_QUBITS);
        if num_qubits > limit {
            Err(Error::Capacity {
                requested: num_qubits,
                limit,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVec {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

const T_PHASE: Complex64 = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);

impl StateVec {
    /// |0...0> on `num_qubits` qubits.
    pub fn zero(num_qubits: usize, config: &SimConfig) -> Result<Self> {
        let mut state = Self::zeros(num_qubits, config)?;
        state.amps[0] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// The all-zero vector (not a valid state; used as an accumulator).
    pub fn zeros(num_qubits: usize, config: &SimConfig) -> Result<Self> {
        config.check(num_qubits)?;
        Ok(StateVec {
            num_qubits,
            amps: vec![Complex64::new(0.0, 0.0); 1usize << num_qubits],
        })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        Ok(StateVec {
            num_qubits: amps.len().trailing_zeros() as usize,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    /// Largest elementwise modulus of the difference.
    pub fn max_abs_diff(&self, other: &StateVec) -> Result<f64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} qubits",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        if gate.max_qubit() >= self.num_qubits {
            return Err(Error::InvalidCircuit(format!(
                "{gate} out of range for a {}-qubit state",
                self.num_qubits
            )));
        }
        let a = &mut self.amps[..];
        match (gate.kind(), gate.q1()) {
            (GateKind::H, _) => apply_h(a, gate.q0()),
            (GateKind::X, _) => apply_x(a, gate.q0()),
            (GateKind::T, _) => apply_phase(a, gate.q0(), T_PHASE),
            (GateKind::S, _) => apply_s(a, gate.q0(), false),
            (GateKind::Sdg, _) => apply_s(a, gate.q0(), true),
            (GateKind::CX, Some(t)) => apply_cx(a, gate.q0(), t),
            (GateKind::CZ, Some(b)) => apply_cz(a, gate.q0(), b),
            (kind, None) => unreachable!("{kind} without second qubit"),
        }
        Ok(())
    }

    /// Writes amplitudes as little-endian `f64` (re, im) pairs in index order.
    pub fn write_binary<W: Write>(&self, mut out: W) -> io::Result<()> {
        for amp in &self.amps {
            out.write_all(&amp.re.to_le_bytes())?;
            out.write_all(&amp.im.to_le_bytes())?;
        }
        out.flush()
    }

    pub fn read_binary(bytes: &[u8]) -> Result<Self> {
        if !bytes.len().is_multiple_of(16) {
            return Err(Error::DimensionMismatch(format!(
                "{} bytes is not a whole number of amplitudes",
                bytes.len()
            )));
        }
        let f = |b: &[u8]| f64::from_le_bytes(b.try_into().expect("8-byte chunk"));
        let amps = bytes
            .chunks_exact(16)
            .map(|c| Complex64::new(f(&c[..8]), f(&c[8..])))
            .collect();
        Self::from_amplitudes(amps)
    }
}

/// Calls `f(lo, hi)` on the paired halves for every block split on `bit`.
#[inline]
fn for_pairs(
    amps: &mut [Complex64],
    qubit: usize,
    mut f: impl FnMut(&mut [Complex64], &mut [Complex64]),
) {
    let stride = 1usize << qubit;
    for chunk in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        f(lo, hi);
    }
}

fn apply_h(amps: &mut [Complex64], qubit: usize) {
    for_pairs(amps, qubit, |lo, hi| {
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = (x + y) * FRAC_1_SQRT_2;
            *b = (x - y) * FRAC_1_SQRT_2;
        }
    });
}

fn apply_x(amps: &mut [Complex64], qubit: usize) {
    for_pairs(amps, qubit, |lo, hi| lo.swap_with_slice(hi));
}

fn apply_phase(amps: &mut [Complex64], qubit: usize, phase: Complex64) {
    for_pairs(amps, qubit, |_, hi| {
        for a in hi {
            *a *= phase;
        }
    });
}

fn apply_s(amps: &mut [Complex64], qubit: usize, dagger: bool) {
    for_pairs(amps, qubit, |_, hi| {
        for a in hi {
            // i*z = (-im, re); -i*z = (im, -re)
            *a = if dagger {
                Complex64::new(a.im, -a.re)
            } else {
                Complex64::new(-a.im, a.re)
            };
        }
    });
}

fn apply_cx(amps: &mut [Complex64], control: usize, target: usize) {
    if control > target {
        // Outer split on control; swap target pairs inside the control=1 half.
        for_pairs(amps, control, |_, on| {
            for_pairs(on, target, |lo, hi| lo.swap_with_slice(hi));
        });
    } else {
        // Outer split on target; swap the control=1 sub-blocks across halves.
        let cstride = 1usize << control;
        for_pairs(amps, target, |t0, t1| {
            for (a, b) in t0
                .chunks_exact_mut(2 * cstride)
                .zip(t1.chunks_exact_mut(2 * cstride))
            {
                a[cstride..].swap_with_slice(&mut b[cstride..]);
            }
        });
    }
}

fn apply_cz(amps: &mut [Complex64], a: usize, b: usize) {
    let (hi_q, lo_q) = if a > b { (a, b) } else { (b, a) };
    for_pairs(amps, hi_q, |_, on| {
        for_pairs(on, lo_q, |_, both| {
            for v in both {
                *v = -*v;
            }
        });
    });
}

/// Simulates `circuit` from |0...0>.
pub fn simulate(circuit: &Circuit, config: &SimConfig) -> Result<StateVec> {
    simulate_until(circuit, config, &Deadline::none())
}

/// As [`simulate`], checking `deadline` between gates.
pub fn simulate_until(
    circuit: &Circuit,
    config: &SimConfig,
    deadline: &Deadline,
) -> Result<StateVec> {
    let mut state = StateVec::zero(circuit.num_qubits(), config)?;
    let timed = deadline.is_set();
    for gate in circuit.gates() {
        if timed {
            deadline.check()?;
        }
        state.apply_gate(gate)?;
    }
    Ok(state)
}

/// Kronecker product with `a` on the low-index qubits and `b` on the high ones.
pub fn tensor(a: &StateVec, b: &StateVec, config: &SimConfig) -> Result<StateVec> {
    let mut out = StateVec::zeros(a.num_qubits + b.num_qubits, config)?;
    tensor_into(a.amplitudes(), b.amplitudes(), out.amplitudes_mut());
    Ok(out)
}

/// `out[hi * a.len() + lo] = a[lo] * b[hi]`.
pub(crate) fn tensor_into(a: &[Complex64], b: &[Complex64], out: &mut [Complex64]) {
    debug_assert_eq!(out.len(), a.len() * b.len());
    for (chunk, &bh) in out.chunks_exact_mut(a.len()).zip(b) {
        for (o, &al) in chunk.iter_mut().zip(a) {
            *o = al * bh;
        }
    }
}
