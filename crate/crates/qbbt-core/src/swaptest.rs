//! Sampled swap tests: estimate tr(rho1 rho2) from ancilla statistics.
//!
//! The composite circuit places a control ancilla on qubit 0, side 1 on
//! qubits 1..=n, side 2 on qubits n+1..=2n, then the preparation programs'
//! own work qubits (side 1's first). After both preparations run:
//! H on the control, a controlled SWAP of every qubit pair (each of the
//! three CNOTs of a SWAP lifted to its controlled-controlled form), H again,
//! and a measurement of the control into the last classical slot.
//!
//! Pr[control reads 1] = (1 - tr(rho1 rho2)) / 2, so the overlap estimate
//! from `s` shots with `s1` ones is `1 - 2*s1/s`.
//!
//! When both preparations are measurement-free the pre-measurement composite
//! state is deterministic: it is simulated once and only the final control
//! measurement is re-sampled per shot, bit-identically to the general path
//! (same per-shot stream, same decision rule).

use rayon::prelude::*;

use crate::circuit::{Condition, GateOp, Instruction, Program};
use crate::qnum::StateVector;
use crate::sim::{run_deterministic, run_shot, CompiledProgram, Rng};
use crate::{Error, Result};

/// Tally of one swap-test estimation: `s` shots, `s1` control-ancilla ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapTestCount {
    pub s: u64,
    pub s1: u64,
}

impl SwapTestCount {
    /// Fraction of shots that read 1.
    pub fn p1(&self) -> f64 {
        self.s1 as f64 / self.s as f64
    }

    /// Estimate of tr(rho1 rho2): `1 - 2*p1`.
    pub fn overlap_estimate(&self) -> f64 {
        1.0 - 2.0 * self.p1()
    }
}

/// Result of the early-exit "is tr(rho_a rho_b) = 1" probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrabResult {
    /// True when every executed round read 0 on the control ancilla.
    pub is_one: bool,
    /// Rounds actually executed (stops at the first 1).
    pub rounds_run: u64,
}

fn remap_instructions(
    src: &Program,
    io_offset: usize,
    anc_base: usize,
    slot_offset: usize,
) -> Vec<Instruction> {
    let n = src.n_qubits;
    let map_q = |q: usize| if q < n { io_offset + q } else { anc_base + (q - n) };
    let map_gate = |g: &GateOp| GateOp {
        name: g.name.clone(),
        params: g.params.clone(),
        targets: g.targets.iter().map(|&q| map_q(q)).collect(),
        controls: g.controls.iter().map(|&q| map_q(q)).collect(),
    };
    src.instructions
        .iter()
        .map(|ins| match ins {
            Instruction::Gate(g) => Instruction::Gate(map_gate(g)),
            Instruction::Measure { targets, slot } => Instruction::Measure {
                targets: targets.iter().map(|&q| map_q(q)).collect(),
                slot: slot + slot_offset,
            },
            Instruction::Reset { targets } => Instruction::Reset {
                targets: targets.iter().map(|&q| map_q(q)).collect(),
            },
            Instruction::CondGate { cond, gate } => Instruction::CondGate {
                cond: Condition {
                    slot: cond.slot + slot_offset,
                    value: cond.value,
                },
                gate: map_gate(gate),
            },
        })
        .collect()
}

/// The full swap-test composite for two `n`-qubit preparations.
///
/// Its I/O register is exactly `2n+1` qubits (control + both sides); the
/// preparations' work qubits become composite work qubits. The control
/// measurement lands in the last classical slot.
pub fn swap_test_program(n: usize, prep1: &Program, prep2: &Program) -> Result<Program> {
    if n == 0 {
        return Err(Error::InvalidInput("swap test needs at least one qubit".into()));
    }
    if prep1.n_qubits != n || prep2.n_qubits != n {
        return Err(Error::ShapeMismatch(format!(
            "swap test over {n} qubit(s) got preparations on {} and {}",
            prep1.n_qubits, prep2.n_qubits
        )));
    }
    let (a1, a2) = (prep1.n_ancilla, prep2.n_ancilla);
    let anc1_base = 2 * n + 1;
    let anc2_base = anc1_base + a1;
    let ancilla_slot = prep1.n_slots() + prep2.n_slots();

    let mut instructions = remap_instructions(prep1, 1, anc1_base, 0);
    instructions.extend(remap_instructions(prep2, n + 1, anc2_base, prep1.n_slots()));

    let mut p = Program {
        name: format!("swap_test({},{})", prep1.name, prep2.name),
        n_qubits: 2 * n + 1,
        n_ancilla: a1 + a2,
        instructions,
    };
    p = p.gate("H", &[0]);
    for q in 0..n {
        let (a, b) = (1 + q, n + 1 + q);
        p = p
            .ctrl_gate("CNOT", &[0], &[a, b])
            .ctrl_gate("CNOT", &[0], &[b, a])
            .ctrl_gate("CNOT", &[0], &[a, b]);
    }
    p = p.gate("H", &[0]).measure(&[0], ancilla_slot);
    p.validate()?;
    debug_assert_eq!(p.n_qubits, 2 * n + 1);
    Ok(p)
}

enum ShotPlan {
    /// Re-run the whole composite per shot.
    General {
        cp: CompiledProgram,
        input: StateVector,
        ancilla_slot: usize,
    },
    /// Deterministic pre-measurement state; only the control is re-sampled.
    Cached { p0: f64 },
}

fn plan_shots(n: usize, prep1: &Program, prep2: &Program) -> Result<ShotPlan> {
    let full = swap_test_program(n, prep1, prep2)?;
    let ancilla_slot = full.n_slots() - 1;
    let measurement_free = full
        .instructions
        .iter()
        .take(full.instructions.len() - 1)
        .all(|ins| matches!(ins, Instruction::Gate(_)));
    if measurement_free {
        let mut prefix = full.clone();
        prefix.instructions.pop();
        let cp = CompiledProgram::compile(&prefix)?;
        let state = run_deterministic(&cp, &StateVector::zero_state(prefix.n_qubits)?)?;
        // Control = qubit 0 = most significant bit of the full register.
        let half = state.as_slice().len() / 2;
        let p0: f64 = state.as_slice()[..half].iter().map(|z| z.norm_sqr()).sum();
        Ok(ShotPlan::Cached { p0 })
    } else {
        let input = StateVector::zero_state(full.n_qubits)?;
        let cp = CompiledProgram::compile(&full)?;
        Ok(ShotPlan::General { cp, input, ancilla_slot })
    }
}

impl ShotPlan {
    /// Outcome of the control measurement for shot stream `stream`.
    ///
    /// Must match [`run_shot`]'s sampling rule bit-for-bit: the cached path
    /// consumes the stream's first uniform exactly as the composite's only
    /// measurement would.
    fn control_one(&self, mut stream: Rng) -> Result<bool> {
        match self {
            ShotPlan::Cached { p0 } => Ok(stream.uniform() >= *p0),
            ShotPlan::General { cp, input, ancilla_slot } => {
                let out = run_shot(cp, input, &mut stream)?;
                Ok(out.slots[*ancilla_slot] == 1)
            }
        }
    }
}

/// Run `s` swap-test shots between `prep1` and `prep2` (both preparing an
/// `n`-qubit register) and count control-ancilla ones.
///
/// Shot `j` draws from `rng.split(j)`; shots are independent, so they run in
/// parallel and the tally is identical regardless of thread schedule.
pub fn swap_test(
    n: usize,
    s: u64,
    prep1: &Program,
    prep2: &Program,
    rng: &Rng,
) -> Result<SwapTestCount> {
    if s == 0 {
        return Err(Error::InvalidInput("swap test needs at least one shot".into()));
    }
    let plan = plan_shots(n, prep1, prep2)?;
    let s1 = (0..s)
        .into_par_iter()
        .map(|j| plan.control_one(rng.split(j)).map(u64::from))
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
    Ok(SwapTestCount { s, s1 })
}

/// Early-exit probe for tr(rho1 rho2) = 1: up to `t` single-shot rounds,
/// round `j` drawing from `rng.split(j)`. Returns `is_one = false` at the
/// first control 1 (impossible when the overlap is exactly 1), `true` when
/// all `t` rounds read 0.
pub fn is_trab_equals_1(
    n: usize,
    t: u64,
    prep1: &Program,
    prep2: &Program,
    rng: &Rng,
) -> Result<TrabResult> {
    if t == 0 {
        return Err(Error::InvalidInput("overlap probe needs at least one round".into()));
    }
    let plan = plan_shots(n, prep1, prep2)?;
    for j in 0..t {
        if plan.control_one(rng.split(j))? {
            return Ok(TrabResult { is_one: false, rounds_run: j + 1 });
        }
    }
    Ok(TrabResult { is_one: true, rounds_run: t })
}
