//! The labeled benchmark: twelve original programs, single-edit mutation
//! operators, and the 63-entry suite of checking problems with known answers.
//!
//! The suite covers three tasks — equivalence of a program pair (`EQ`),
//! identity of a single program (`ID`, i.e. equivalence with the empty
//! program), and unitarity of a single program (`UN`) — with both expected
//! outcomes per task. Faulty entries are produced by applying exactly one
//! gate-level or measurement-level edit (two for the instruction-swap
//! variants) to an original program, so every entry's defect is a small,
//! documented delta.
//!
//! [`suite`] cross-checks its own labels against the exact density-operator
//! oracle while building: every expected-pass equivalence pair must satisfy
//! [`oracle::exact_equivalent`] and every unitarity label must match
//! [`oracle::exact_unitary`]. A disagreement aborts construction — the
//! labels are never allowed to drift from the semantics.

use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{compose, Condition, GateOp, Instruction, Program};
use crate::error::{Error, Result};
use crate::oracle;

/// Which checking task a benchmark entry exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BenchTask {
    #[serde(rename = "EQ")]
    Equivalence,
    #[serde(rename = "ID")]
    Identity,
    #[serde(rename = "UN")]
    Unitarity,
}

impl BenchTask {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchTask::Equivalence => "EQ",
            BenchTask::Identity => "ID",
            BenchTask::Unitarity => "UN",
        }
    }
}

impl fmt::Display for BenchTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The ground-truth verdict a correct checker should reach on an entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expected {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Expected {
    pub fn as_str(self) -> &'static str {
        match self {
            Expected::Pass => "PASS",
            Expected::Fail => "FAIL",
        }
    }
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What an entry checks: one program (identity/unitarity) or a pair
/// (equivalence).
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Single(Program),
    Pair(Program, Program),
}

/// One labeled checking problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkEntry {
    /// Catalog id: `"1"`..`"4"` for the equivalence-pass pairs, dotted ids
    /// like `"5.1"` for mutated variants, and so on through `"28.2"`.
    pub id: String,
    pub task: BenchTask,
    pub expected: Expected,
    pub payload: Payload,
}

impl BenchmarkEntry {
    /// The I/O register width the entry's checker must be run at. Pair
    /// entries always hold programs of equal width.
    pub fn n_qubits(&self) -> usize {
        match &self.payload {
            Payload::Single(p) => p.n_qubits,
            Payload::Pair(p, _) => p.n_qubits,
        }
    }

    /// The programs in the payload (one or two).
    pub fn programs(&self) -> Vec<&Program> {
        match &self.payload {
            Payload::Single(p) => vec![p],
            Payload::Pair(a, b) => vec![a, b],
        }
    }
}

// ---------------------------------------------------------------------------
// Mutation operators
// ---------------------------------------------------------------------------

/// The five single-edit mutation kinds: gate-level add/remove/replace and
/// measurement-level add/remove.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutationKind {
    GmAdd,
    GmRemove,
    GmReplace,
    MmAdd,
    MmRemove,
}

impl MutationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MutationKind::GmAdd => "GM-add",
            MutationKind::GmRemove => "GM-remove",
            MutationKind::GmReplace => "GM-replace",
            MutationKind::MmAdd => "MM-add",
            MutationKind::MmRemove => "MM-remove",
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One edit: where it applies and, for add/replace kinds, what to put there.
#[derive(Debug, Clone, PartialEq)]
pub struct MutationOp {
    pub kind: MutationKind,
    /// Instruction index. `0..=len` for the add kinds (equal to `len`
    /// appends), `0..len` otherwise.
    pub position: usize,
    /// The instruction to insert or substitute. Required (and must be of the
    /// matching species: a gate for `Gm*`, a measurement for `MmAdd`) for
    /// the add/replace kinds; must be absent for the remove kinds.
    pub detail: Option<Instruction>,
}

impl MutationOp {
    /// Compact human-readable form, e.g. `GM-replace@2[CZ q0,q1]`. Used to
    /// suffix mutant program names and to catalog edits in the manifest.
    pub fn descriptor(&self) -> String {
        match &self.detail {
            Some(ins) => format!("{}@{}[{}]", self.kind, self.position, describe(ins)),
            None => format!("{}@{}", self.kind, self.position),
        }
    }
}

/// Render an instruction for descriptors: gate name, parameters to four
/// decimals, control list, targets, measurement slot.
fn describe(ins: &Instruction) -> String {
    fn qubits(qs: &[usize]) -> String {
        qs.iter().map(|q| format!("q{q}")).collect::<Vec<_>>().join(",")
    }
    fn gate_str(g: &GateOp) -> String {
        let params = if g.params.is_empty() {
            String::new()
        } else {
            let inner: Vec<String> = g.params.iter().map(|p| format!("{p:.4}")).collect();
            format!("({})", inner.join(","))
        };
        let ctrl = if g.controls.is_empty() {
            String::new()
        } else {
            format!("c[{}] ", qubits(&g.controls))
        };
        format!("{}{} {}{}", g.name, params, ctrl, qubits(&g.targets))
    }
    match ins {
        Instruction::Gate(g) => gate_str(g),
        Instruction::Measure { targets, slot } => {
            format!("M {}->s{}", qubits(targets), slot)
        }
        Instruction::Reset { targets } => format!("Reset {}", qubits(targets)),
        Instruction::CondGate { cond, gate } => {
            format!("if s{}=={} {}", cond.slot, cond.value, gate_str(gate))
        }
    }
}

fn is_gate_kind(ins: &Instruction) -> bool {
    matches!(ins, Instruction::Gate(_) | Instruction::CondGate { .. })
}

/// Apply one edit to a program, producing a validated variant whose name is
/// suffixed with the edit descriptor.
pub fn mutate(p: &Program, op: &MutationOp) -> Result<Program> {
    let len = p.instructions.len();
    let adds = matches!(op.kind, MutationKind::GmAdd | MutationKind::MmAdd);
    let limit = if adds { len } else { len.saturating_sub(1) };
    if op.position > limit || (!adds && len == 0) {
        return Err(Error::InvalidInput(format!(
            "mutation position {} out of range for '{}' ({} instruction(s))",
            op.position, p.name, len
        )));
    }

    let misuse = |msg: &str| {
        Err(Error::InvalidInput(format!(
            "mutation {} on '{}': {}",
            op.descriptor(),
            p.name,
            msg
        )))
    };
    match (op.kind, &op.detail) {
        (MutationKind::GmAdd | MutationKind::GmReplace, Some(ins)) if is_gate_kind(ins) => {}
        (MutationKind::GmAdd | MutationKind::GmReplace, Some(_)) => {
            return misuse("detail must be a gate or conditioned gate")
        }
        (MutationKind::MmAdd, Some(Instruction::Measure { .. })) => {}
        (MutationKind::MmAdd, Some(_)) => return misuse("detail must be a measurement"),
        (MutationKind::GmAdd | MutationKind::GmReplace | MutationKind::MmAdd, None) => {
            return misuse("detail is required")
        }
        (MutationKind::GmRemove | MutationKind::MmRemove, Some(_)) => {
            return misuse("detail must be absent for a removal")
        }
        (MutationKind::GmRemove | MutationKind::MmRemove, None) => {}
    }

    let mut out = p.clone();
    out.name = format!("{}~{}", p.name, op.descriptor());
    match op.kind {
        MutationKind::GmAdd | MutationKind::MmAdd => {
            out.instructions
                .insert(op.position, op.detail.clone().expect("checked above"));
        }
        MutationKind::GmRemove => {
            if !is_gate_kind(&p.instructions[op.position]) {
                return misuse("no gate at this position");
            }
            out.instructions.remove(op.position);
        }
        MutationKind::MmRemove => {
            if !matches!(p.instructions[op.position], Instruction::Measure { .. }) {
                return misuse("no measurement at this position");
            }
            out.instructions.remove(op.position);
        }
        MutationKind::GmReplace => {
            if !is_gate_kind(&p.instructions[op.position]) {
                return misuse("no gate at this position");
            }
            out.instructions[op.position] = op.detail.clone().expect("checked above");
        }
    }
    out.validate()?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Original programs
// ---------------------------------------------------------------------------

/// The twelve original program names, in catalog order.
pub const ORIGINAL_NAMES: [&str; 12] = [
    "Cir1A",
    "Cir1B",
    "Cir2A",
    "Cir2B",
    "Empty",
    "TeleportABA",
    "QFT",
    "invQFT",
    "QPE",
    "invQPE",
    "CRot",
    "Reset",
];

/// The empty program (0 instructions) on an `n`-qubit register.
pub fn empty_on(n: usize) -> Program {
    Program::new("Empty", n)
}

/// Build one of the twelve original programs by name.
///
/// Register widths (total qubits): Cir1A 2, Cir1B 2, Cir2A 3, Cir2B 3,
/// Empty 6, TeleportABA 3 (1 I/O + 2 work), QFT/invQFT/QPE/invQPE/CRot 5,
/// Reset 6.
pub fn build_original(name: &str) -> Result<Program> {
    match name {
        "Cir1A" => Ok(cir1a()),
        "Cir1B" => Ok(cir1b()),
        "Cir2A" => Ok(cir2a()),
        "Cir2B" => Ok(cir2b()),
        "Empty" => Ok(empty_on(6)),
        "TeleportABA" => Ok(teleport_aba()),
        "QFT" => Ok(qft5()),
        "invQFT" => {
            let mut p = qft5().inverse()?;
            p.name = "invQFT".to_string();
            Ok(p)
        }
        "QPE" => Ok(qpe5()),
        "invQPE" => {
            let mut p = qpe5().inverse()?;
            p.name = "invQPE".to_string();
            Ok(p)
        }
        "CRot" => Ok(crot5()),
        "Reset" => Ok(reset6()),
        other => Err(Error::InvalidInput(format!(
            "unknown original program '{other}'"
        ))),
    }
}

/// CNOT conjugated by Hadamards on both wires: equal to the reversed CNOT.
fn cir1a() -> Program {
    Program::new("Cir1A", 2)
        .gate("H", &[0])
        .gate("H", &[1])
        .gate("CNOT", &[0, 1])
        .gate("H", &[0])
        .gate("H", &[1])
}

/// The reversed CNOT itself.
fn cir1b() -> Program {
    Program::new("Cir1B", 2).gate("CNOT", &[1, 0])
}

/// Measure-then-classically-correct variant: equivalent to Cir2B by the
/// deferred-measurement principle.
fn cir2a() -> Program {
    Program::new("Cir2A", 3)
        .gate("CNOT", &[0, 2])
        .measure(&[0], 0)
        .cond_gate(0, 1, "X", &[1])
        .gate("T", &[2])
}

/// Entangle-first variant of Cir2A.
fn cir2b() -> Program {
    Program::new("Cir2B", 3)
        .gate("CNOT", &[0, 2])
        .gate("CNOT", &[0, 1])
        .measure(&[0], 0)
        .gate("T", &[2])
}

/// Teleport the I/O qubit q0 to work qubit q2, then teleport it back.
/// The net channel on q0 is the identity even though the program measures
/// four times; the work qubits end in measured computational states and are
/// discarded.
fn teleport_aba() -> Program {
    Program::with_ancilla("TeleportABA", 1, 2)
        // A -> B: share a Bell pair on (q1, q2), then teleport q0 onto q2.
        .gate("H", &[1])
        .gate("CNOT", &[1, 2])
        .gate("CNOT", &[0, 1])
        .gate("H", &[0])
        .measure(&[0], 0)
        .measure(&[1], 1)
        .cond_gate(1, 1, "X", &[2])
        .cond_gate(0, 1, "Z", &[2])
        // Return the used wires to |0> so they can host the second Bell pair.
        .cond_gate(0, 1, "X", &[0])
        .cond_gate(1, 1, "X", &[1])
        // B -> A: share a Bell pair on (q1, q0), then teleport q2 onto q0.
        .gate("H", &[1])
        .gate("CNOT", &[1, 0])
        .gate("CNOT", &[2, 1])
        .gate("H", &[2])
        .measure(&[2], 2)
        .measure(&[1], 3)
        .cond_gate(3, 1, "X", &[0])
        .cond_gate(2, 1, "Z", &[0])
}

/// Append the textbook Fourier-transform gate sequence over the listed
/// qubits: per source qubit a Hadamard followed by controlled phases of
/// geometrically decreasing angle, then the bit-reversal swaps.
fn append_qft(mut p: Program, qs: &[usize]) -> Program {
    use std::f64::consts::PI;
    for (a, &qa) in qs.iter().enumerate() {
        p = p.gate("H", &[qa]);
        for (j, &qb) in qs[a + 1..].iter().enumerate() {
            let theta = PI / (1u64 << (j + 1)) as f64;
            p = p.ctrl_gate_p("Phase", &[theta], &[qb], &[qa]);
        }
    }
    for i in 0..qs.len() / 2 {
        p = p.gate("SWAP", &[qs[i], qs[qs.len() - 1 - i]]);
    }
    p
}

/// Five-qubit quantum Fourier transform (17 instructions).
fn qft5() -> Program {
    append_qft(Program::new("QFT", 5), &[0, 1, 2, 3, 4])
}

/// Phase estimation with unitary U = S·H (applied as H then S) on q4,
/// controlled by the four counting qubits q0..q3, followed by the inverse
/// Fourier transform on the counting register (46 instructions).
fn qpe5() -> Program {
    let mut p = Program::new("QPE", 5);
    for i in 0..4 {
        p = p.gate("H", &[i]);
    }
    for i in 0..4 {
        let reps = 1usize << (3 - i);
        for _ in 0..reps {
            p = p.ctrl_gate("H", &[i], &[4]).ctrl_gate("S", &[i], &[4]);
        }
    }
    let inv_qft4 = append_qft(Program::new("qft4", 5), &[0, 1, 2, 3])
        .inverse()
        .expect("gates-only program is invertible");
    p.instructions.extend(inv_qft4.instructions);
    p
}

/// The controlled-rotation subroutine of the HHL linear-system algorithm:
/// for each eigenvalue register value lambda in 1..=15 it rotates the target
/// q4 by Ry(2*asin(1/lambda)), selecting the branch with an X-sandwich on the
/// zero bits of lambda (71 instructions).
///
/// The lambda = 0 branch is deliberately never selected, so the program acts
/// as the identity on that subspace: the 1/lambda rotation is undefined there
/// and leaving the branch untouched keeps the program total and unitary.
fn crot5() -> Program {
    let mut p = Program::new("CRot", 5);
    for lambda in 1u32..=15 {
        let theta = 2.0 * (1.0 / f64::from(lambda)).asin();
        let zeros: Vec<usize> = (0..4).filter(|i| (lambda >> (3 - i)) & 1 == 0).collect();
        for &q in &zeros {
            p = p.gate("X", &[q]);
        }
        p = p.ctrl_gate_p("Ry", &[theta], &[0, 1, 2, 3], &[4]);
        for &q in &zeros {
            p = p.gate("X", &[q]);
        }
    }
    p
}

/// Reset every qubit of a six-qubit register, one instruction per qubit.
fn reset6() -> Program {
    let mut p = Program::new("Reset", 6);
    for q in 0..6 {
        p = p.reset(&[q]);
    }
    p
}

// ---------------------------------------------------------------------------
// Suite construction
// ---------------------------------------------------------------------------

fn gate(name: &str, targets: &[usize]) -> Instruction {
    Instruction::Gate(GateOp {
        name: name.to_string(),
        params: Vec::new(),
        targets: targets.to_vec(),
        controls: Vec::new(),
    })
}

fn gate_p(name: &str, params: &[f64], targets: &[usize]) -> Instruction {
    Instruction::Gate(GateOp {
        name: name.to_string(),
        params: params.to_vec(),
        targets: targets.to_vec(),
        controls: Vec::new(),
    })
}

fn ctrl(name: &str, controls: &[usize], targets: &[usize]) -> Instruction {
    Instruction::Gate(GateOp {
        name: name.to_string(),
        params: Vec::new(),
        targets: targets.to_vec(),
        controls: controls.to_vec(),
    })
}

fn ctrl_p(name: &str, params: &[f64], controls: &[usize], targets: &[usize]) -> Instruction {
    Instruction::Gate(GateOp {
        name: name.to_string(),
        params: params.to_vec(),
        targets: targets.to_vec(),
        controls: controls.to_vec(),
    })
}

fn measure_q(q: usize, slot: usize) -> Instruction {
    Instruction::Measure { targets: vec![q], slot }
}

fn cond_gate_ins(slot: usize, value: u64, name: &str, targets: &[usize]) -> Instruction {
    Instruction::CondGate {
        cond: Condition { slot, value },
        gate: GateOp {
            name: name.to_string(),
            params: Vec::new(),
            targets: targets.to_vec(),
            controls: Vec::new(),
        },
    }
}

fn gm_add(position: usize, ins: Instruction) -> MutationOp {
    MutationOp { kind: MutationKind::GmAdd, position, detail: Some(ins) }
}

fn gm_remove(position: usize) -> MutationOp {
    MutationOp { kind: MutationKind::GmRemove, position, detail: None }
}

fn gm_replace(position: usize, ins: Instruction) -> MutationOp {
    MutationOp { kind: MutationKind::GmReplace, position, detail: Some(ins) }
}

fn mm_add(position: usize, q: usize, slot: usize) -> MutationOp {
    MutationOp {
        kind: MutationKind::MmAdd,
        position,
        detail: Some(measure_q(q, slot)),
    }
}

fn apply_ops(base: &Program, ops: &[MutationOp]) -> Result<Program> {
    let mut p = base.clone();
    for op in ops {
        p = mutate(&p, op)?;
    }
    Ok(p)
}

/// Build the full 63-entry suite and cross-check its labels against the
/// exact oracle (expected-pass equivalence pairs and every unitarity label).
/// An oracle disagreement is reported as [`Error::InternalInconsistency`].
pub fn suite() -> Result<Vec<BenchmarkEntry>> {
    let cir1a = cir1a();
    let cir1b = cir1b();
    let cir2a = cir2a();
    let cir2b = cir2b();
    let empty6 = empty_on(6);
    let empty5 = empty_on(5);
    let teleport = teleport_aba();
    let qft = qft5();
    let invqft = build_original("invQFT")?;
    let qpe = qpe5();
    let invqpe = build_original("invQPE")?;
    let crot = crot5();
    let reset = reset6();
    let qft_round_trip = compose(&qft, &invqft)?;
    let qpe_round_trip = compose(&qpe, &invqpe)?;

    let mut entries: Vec<BenchmarkEntry> = Vec::with_capacity(63);
    let mut eq = |id: &str, expected, a: Program, b: Program| {
        entries.push(BenchmarkEntry {
            id: id.to_string(),
            task: BenchTask::Equivalence,
            expected,
            payload: Payload::Pair(a, b),
        });
    };

    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    use Expected::{Fail, Pass};

    // -- Equivalence: expected-pass pairs 1..4 ------------------------------
    eq("1", Pass, cir1a.clone(), cir1b.clone());
    eq("2", Pass, cir2a.clone(), cir2b.clone());
    eq("3", Pass, qft.clone(), qft.clone());
    eq("4", Pass, qft_round_trip.clone(), empty5.clone());

    // -- Equivalence: mutated Cir1A against Cir1B (5.1-5.5) ------------------
    let cir1a_ops: [Vec<MutationOp>; 5] = [
        vec![gm_remove(0)],
        vec![gm_replace(2, gate("CZ", &[0, 1]))],
        vec![gm_add(5, gate("X", &[0]))],
        vec![gm_remove(2)],
        vec![gm_replace(0, gate("Y", &[0]))],
    ];
    for (i, ops) in cir1a_ops.iter().enumerate() {
        eq(&format!("5.{}", i + 1), Fail, apply_ops(&cir1a, ops)?, cir1b.clone());
    }

    // -- Equivalence: mutated Cir2A against Cir2B (6.1-6.2) ------------------
    // 6.2 swaps the first and last instructions, expressed as two replaces.
    let cir2a_ops: [Vec<MutationOp>; 2] = [
        vec![gm_replace(2, cond_gate_ins(0, 1, "Z", &[1]))],
        vec![
            gm_replace(0, gate("T", &[2])),
            gm_replace(3, gate("CNOT", &[0, 2])),
        ],
    ];
    for (i, ops) in cir2a_ops.iter().enumerate() {
        eq(&format!("6.{}", i + 1), Fail, apply_ops(&cir2a, ops)?, cir2b.clone());
    }

    // -- Equivalence: Cir2A against mutated Cir2B (7.1-7.3) ------------------
    let cir2b_ops: [Vec<MutationOp>; 3] = [
        vec![
            gm_replace(0, gate("T", &[2])),
            gm_replace(3, gate("CNOT", &[0, 2])),
        ],
        vec![gm_replace(1, gate("CZ", &[0, 1]))],
        vec![gm_replace(3, gate("Z", &[2]))],
    ];
    for (i, ops) in cir2b_ops.iter().enumerate() {
        eq(&format!("7.{}", i + 1), Fail, cir2a.clone(), apply_ops(&cir2b, ops)?);
    }

    // -- Equivalence: mutated QFT against QFT (8.1-8.5) ----------------------
    let qft_eq_ops: [Vec<MutationOp>; 5] = [
        vec![gm_remove(9)],
        vec![gm_replace(1, ctrl_p("Phase", &[PI], &[1], &[0]))],
        vec![mm_add(0, 0, 0)],
        vec![gm_replace(15, gate("SWAP", &[0, 3]))],
        vec![gm_add(17, gate("H", &[0]))],
    ];
    for (i, ops) in qft_eq_ops.iter().enumerate() {
        eq(&format!("8.{}", i + 1), Fail, apply_ops(&qft, ops)?, qft.clone());
    }

    // -- Equivalence: QFT composed with mutated invQFT, against Empty -------
    // The same five composed programs reappear as identity entries 15.x.
    let invqft_ops: [Vec<MutationOp>; 5] = [
        vec![gm_remove(0)],
        vec![gm_replace(2, gate("X", &[4]))],
        vec![gm_add(17, gate("Z", &[0]))],
        vec![mm_add(7, 2, 0)],
        vec![gm_replace(15, ctrl_p("Phase", &[FRAC_PI_2], &[1], &[0]))],
    ];
    let broken_round_trips: Vec<Program> = invqft_ops
        .iter()
        .map(|ops| compose(&qft, &apply_ops(&invqft, ops)?))
        .collect::<Result<_>>()?;
    for (i, p) in broken_round_trips.iter().enumerate() {
        eq(&format!("9.{}", i + 1), Fail, p.clone(), empty5.clone());
    }

    let mut single = |id: &str, task, expected, p: Program| {
        entries.push(BenchmarkEntry {
            id: id.to_string(),
            task,
            expected,
            payload: Payload::Single(p),
        });
    };
    use BenchTask::{Identity, Unitarity};

    // -- Identity: expected-pass 10..13 --------------------------------------
    single("10", Identity, Pass, empty6.clone());
    single("11", Identity, Pass, qft_round_trip);
    single("12", Identity, Pass, qpe_round_trip);
    single("13", Identity, Pass, teleport.clone());

    // -- Identity: mutated Empty (14.1-14.2) ---------------------------------
    single("14.1", Identity, Fail, mutate(&empty6, &gm_add(0, gate("X", &[0])))?);
    single(
        "14.2",
        Identity,
        Fail,
        mutate(&empty6, &gm_add(0, gate_p("Rz", &[FRAC_PI_4], &[0])))?,
    );

    // -- Identity: QFT composed with mutated invQFT (15.1-15.5) --------------
    for (i, p) in broken_round_trips.iter().enumerate() {
        single(&format!("15.{}", i + 1), Identity, Fail, p.clone());
    }

    // -- Identity: QPE composed with mutated invQPE (16.1-16.5) --------------
    let invqpe_ops: [Vec<MutationOp>; 5] = [
        vec![gm_remove(0)],
        vec![gm_replace(12, ctrl("Z", &[3], &[4]))],
        vec![gm_add(46, gate("X", &[4]))],
        vec![mm_add(0, 0, 0)],
        vec![gm_replace(13, ctrl("Y", &[3], &[4]))],
    ];
    for (i, ops) in invqpe_ops.iter().enumerate() {
        let p = compose(&qpe, &apply_ops(&invqpe, ops)?)?;
        single(&format!("16.{}", i + 1), Identity, Fail, p);
    }

    // -- Identity: mutated teleport (17.1-17.5) ------------------------------
    let teleport_ops: [Vec<MutationOp>; 5] = [
        vec![gm_remove(0)],
        vec![gm_replace(1, gate("CZ", &[1, 2]))],
        vec![gm_add(2, gate("Z", &[2]))],
        vec![MutationOp {
            kind: MutationKind::MmAdd,
            position: 2,
            detail: Some(measure_q(2, 4)),
        }],
        vec![gm_replace(12, gate("CZ", &[2, 1]))],
    ];
    for (i, ops) in teleport_ops.iter().enumerate() {
        single(&format!("17.{}", i + 1), Identity, Fail, apply_ops(&teleport, ops)?);
    }

    // -- Unitarity: expected-pass 18..23 --------------------------------------
    single("18", Unitarity, Pass, cir1a);
    single("19", Unitarity, Pass, cir1b);
    single("20", Unitarity, Pass, empty6);
    single("21", Unitarity, Pass, qft.clone());
    single("22", Unitarity, Pass, crot.clone());
    // Gate-level mutants of QFT: different unitaries, still unitary.
    let qft_gm_ops: [Vec<MutationOp>; 3] = [
        vec![gm_replace(1, ctrl_p("Phase", &[PI], &[1], &[0]))],
        vec![gm_remove(4)],
        vec![gm_add(17, gate("H", &[2]))],
    ];
    for (i, ops) in qft_gm_ops.iter().enumerate() {
        single(&format!("23.{}", i + 1), Unitarity, Pass, apply_ops(&qft, ops)?);
    }

    // -- Unitarity: expected-fail 24..28 --------------------------------------
    single("24", Unitarity, Fail, cir2a);
    single("25", Unitarity, Fail, cir2b);
    single("26", Unitarity, Fail, reset);
    // Measurement mutants of QFT: before the first gate, before each later
    // Hadamard layer, and appended at the very end (the weakest violation).
    let qft_mm_ops: [MutationOp; 5] = [
        mm_add(0, 0, 0),
        mm_add(5, 1, 0),
        mm_add(17, 4, 0),
        mm_add(9, 2, 0),
        mm_add(12, 3, 0),
    ];
    for (i, op) in qft_mm_ops.iter().enumerate() {
        single(&format!("27.{}", i + 1), Unitarity, Fail, mutate(&qft, op)?);
    }
    single("28.1", Unitarity, Fail, mutate(&crot, &mm_add(0, 0, 0))?);
    single("28.2", Unitarity, Fail, mutate(&crot, &mm_add(71, 4, 0))?);

    debug_assert_eq!(entries.len(), 63);

    // Label self-check against the exact oracle, parallel over entries.
    entries.par_iter().try_for_each(verify_label)?;
    Ok(entries)
}

/// Build-time label verification: expected-pass equivalence pairs must be
/// channel-equivalent, and every unitarity label must match the oracle.
fn verify_label(e: &BenchmarkEntry) -> Result<()> {
    match (&e.task, &e.payload) {
        (BenchTask::Equivalence, Payload::Pair(a, b)) if e.expected == Expected::Pass => {
            if !oracle::exact_equivalent(a, b)? {
                return Err(Error::InternalInconsistency(format!(
                    "benchmark entry {}: labeled PASS but the programs are not equivalent",
                    e.id
                )));
            }
        }
        (BenchTask::Unitarity, Payload::Single(p)) => {
            let unitary = oracle::exact_unitary(p)?;
            if unitary != (e.expected == Expected::Pass) {
                return Err(Error::InternalInconsistency(format!(
                    "benchmark entry {}: labeled {} but exact unitarity is {}",
                    e.id, e.expected, unitary
                )));
            }
        }
        _ => {}
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Export / import
// ---------------------------------------------------------------------------

/// One manifest line: entry metadata plus the relative paths of its program
/// files (`1` for single entries, `2` for pairs). `edit` catalogs the exact
/// mutation descriptor(s) for mutated entries so every variant is
/// reconstructible from the manifest alone.
#[derive(Debug, Serialize, Deserialize)]
struct ManifestRecord {
    id: String,
    task: BenchTask,
    expected: Expected,
    files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edit: Option<String>,
}

fn file_stem(id: &str) -> String {
    format!("entry_{}", id.replace('.', "_"))
}

/// Write `entries` under `dir`: `programs/*.json` (one file per program) and
/// `manifest.json` listing id, task, expected verdict, file paths, and the
/// mutation descriptors embedded in mutant program names.
pub fn export_suite(dir: &Path, entries: &[BenchmarkEntry]) -> Result<()> {
    let prog_dir = dir.join("programs");
    fs::create_dir_all(&prog_dir)?;
    let mut manifest = Vec::with_capacity(entries.len());
    for e in entries {
        let stem = file_stem(&e.id);
        let programs = e.programs();
        let mut files = Vec::with_capacity(programs.len());
        for (i, p) in programs.iter().enumerate() {
            let file = if programs.len() == 1 {
                format!("programs/{stem}.json")
            } else {
                format!("programs/{stem}_{}.json", (b'a' + i as u8) as char)
            };
            fs::write(dir.join(&file), p.to_json())?;
            files.push(file);
        }
        let edits: Vec<&str> = programs
            .iter()
            .filter(|p| p.name.contains('~'))
            .map(|p| p.name.as_str())
            .collect();
        manifest.push(ManifestRecord {
            id: e.id.clone(),
            task: e.task,
            expected: e.expected,
            files,
            edit: if edits.is_empty() { None } else { Some(edits.join(" ; ")) },
        });
    }
    let text = serde_json::to_string_pretty(&manifest)
        .expect("manifest serialization cannot fail");
    fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}

/// Read a suite back from a directory written by [`export_suite`]. Programs
/// are structurally validated; labels are taken from the manifest as-is
/// (the oracle self-check belongs to [`suite`], not to deserialization).
pub fn import_suite(dir: &Path) -> Result<Vec<BenchmarkEntry>> {
    let text = fs::read_to_string(dir.join("manifest.json"))?;
    let manifest: Vec<ManifestRecord> = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("suite manifest: {e}")))?;
    let mut entries = Vec::with_capacity(manifest.len());
    for rec in manifest {
        let mut programs = Vec::with_capacity(rec.files.len());
        for file in &rec.files {
            let body = fs::read_to_string(dir.join(file))?;
            programs.push(Program::from_json(&body)?);
        }
        let payload = match programs.len() {
            1 => Payload::Single(programs.pop().expect("length checked")),
            2 => {
                let b = programs.pop().expect("length checked");
                let a = programs.pop().expect("length checked");
                Payload::Pair(a, b)
            }
            n => {
                return Err(Error::InvalidInput(format!(
                    "suite manifest entry {}: expected 1 or 2 files, found {n}",
                    rec.id
                )))
            }
        };
        entries.push(BenchmarkEntry {
            id: rec.id,
            task: rec.task,
            expected: rec.expected,
            payload,
        });
    }
    Ok(entries)
}
