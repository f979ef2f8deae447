//! Quantum-program IR: gates, measurement, reset, classical control.
//!
//! A [`Program`] owns a register of `n_qubits` I/O qubits (indices
//! `0..n_qubits`) followed by `n_ancilla` work qubits
//! (`n_qubits..n_qubits+n_ancilla`). Qubit 0 is the most significant bit of
//! basis-state labels throughout. Measurements write integer results into
//! classical *slots*; conditioned gates read them.
//!
//! Programs serialize to a stable JSON form (`kind`-tagged instructions,
//! shortest-round-trip floats) so the benchmark suite can be exported and
//! re-imported bit-exactly.

use serde::{Deserialize, Serialize};

use crate::qnum::{gate_arity, gate_param_count, std_gate, CMatrix, Complex, MAX_QUBITS};
use crate::sim::{apply_gate1_rows, apply_gate2_rows};
use crate::{Error, Result};

/// A (possibly controlled) application of a standard gate.
///
/// `targets` supplies the gate's own operands in gate-matrix order (for
/// two-qubit gates `targets[0]` is the more significant block index; for
/// `CNOT` it is the control). `controls` lifts the gate: it acts only on
/// basis states where every control qubit is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub controls: Vec<usize>,
}

/// Classical condition: slot `slot` holds exactly `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub slot: usize,
    pub value: u64,
}

/// One program step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Instruction {
    /// Unitary gate application.
    Gate(GateOp),
    /// Projective measurement of `targets` in the computational basis.
    /// The observed bits form an integer (targets[0] most significant)
    /// stored in classical slot `slot`.
    Measure { targets: Vec<usize>, slot: usize },
    /// Return `targets` to |0> (measure and flip on outcome 1), discarding
    /// the outcome.
    Reset { targets: Vec<usize> },
    /// Apply `gate` only when `cond` holds. The inner operation is
    /// restricted to a unitary gate.
    CondGate { cond: Condition, gate: GateOp },
}

#[cfg(test)]
impl Instruction {
    fn gate_op(&self) -> Option<&GateOp> {
        match self {
            Instruction::Gate(g) => Some(g),
            Instruction::CondGate { gate, .. } => Some(gate),
            _ => None,
        }
    }
}

/// A quantum program over `n_qubits` I/O qubits and `n_ancilla` work qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub name: String,
    pub n_qubits: usize,
    #[serde(default)]
    pub n_ancilla: usize,
    pub instructions: Vec<Instruction>,
}

impl Program {
    /// New empty program on an ancilla-free register.
    pub fn new(name: impl Into<String>, n_qubits: usize) -> Self {
        Self::with_ancilla(name, n_qubits, 0)
    }

    /// New empty program with work qubits after the I/O register.
    pub fn with_ancilla(name: impl Into<String>, n_qubits: usize, n_ancilla: usize) -> Self {
        Program {
            name: name.into(),
            n_qubits,
            n_ancilla,
            instructions: Vec::new(),
        }
    }

    /// Total register width (I/O + ancilla).
    pub fn total_qubits(&self) -> usize {
        self.n_qubits + self.n_ancilla
    }

    /// Chainable: parameterless gate.
    pub fn gate(self, name: &str, targets: &[usize]) -> Self {
        self.gate_p(name, &[], targets)
    }

    /// Chainable: parameterized gate.
    pub fn gate_p(mut self, name: &str, params: &[f64], targets: &[usize]) -> Self {
        self.instructions.push(Instruction::Gate(GateOp {
            name: name.to_string(),
            params: params.to_vec(),
            targets: targets.to_vec(),
            controls: Vec::new(),
        }));
        self
    }

    /// Chainable: controlled parameterless gate.
    pub fn ctrl_gate(self, name: &str, controls: &[usize], targets: &[usize]) -> Self {
        self.ctrl_gate_p(name, &[], controls, targets)
    }

    /// Chainable: controlled parameterized gate.
    pub fn ctrl_gate_p(
        mut self,
        name: &str,
        params: &[f64],
        controls: &[usize],
        targets: &[usize],
    ) -> Self {
        self.instructions.push(Instruction::Gate(GateOp {
            name: name.to_string(),
            params: params.to_vec(),
            targets: targets.to_vec(),
            controls: controls.to_vec(),
        }));
        self
    }

    /// Chainable: measurement into a classical slot.
    pub fn measure(mut self, targets: &[usize], slot: usize) -> Self {
        self.instructions.push(Instruction::Measure {
            targets: targets.to_vec(),
            slot,
        });
        self
    }

    /// Chainable: reset to |0>.
    pub fn reset(mut self, targets: &[usize]) -> Self {
        self.instructions
            .push(Instruction::Reset { targets: targets.to_vec() });
        self
    }

    /// Chainable: gate applied only when `slot == value`.
    pub fn cond_gate(mut self, slot: usize, value: u64, name: &str, targets: &[usize]) -> Self {
        self.instructions.push(Instruction::CondGate {
            cond: Condition { slot, value },
            gate: GateOp {
                name: name.to_string(),
                params: Vec::new(),
                targets: targets.to_vec(),
                controls: Vec::new(),
            },
        });
        self
    }

    /// Number of classical slots (one plus the highest slot written; 0 when
    /// the program never measures). [`Program::validate`] guarantees the
    /// written slots are exactly `0..n_slots()`.
    pub fn n_slots(&self) -> usize {
        self.instructions
            .iter()
            .filter_map(|ins| match ins {
                Instruction::Measure { slot, .. } => Some(slot + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Structural validation.
    ///
    /// Checks, in order: register bounds; gate names, parameter counts and
    /// arities; operand distinctness and range; classical-slot discipline.
    /// Slot discipline is set-based: the slots written by measurements must
    /// be exactly `{0..k}` for some `k` (dense), and every conditioned gate
    /// must read a slot some earlier measurement wrote. First-write order is
    /// deliberately unconstrained so a fresh-slot measurement can be
    /// inserted at any position.
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidProgram(format!(
                "program '{}' has an empty I/O register",
                self.name
            )));
        }
        let total = self.total_qubits();
        if total > MAX_QUBITS {
            return Err(Error::DimensionTooLarge {
                what: "program register",
                got: total,
                limit: MAX_QUBITS,
            });
        }

        let mut written: Vec<bool> = Vec::new();
        for (pos, ins) in self.instructions.iter().enumerate() {
            let fail = |msg: String| {
                Err(Error::InvalidProgram(format!(
                    "program '{}', instruction {pos}: {msg}",
                    self.name
                )))
            };
            match ins {
                Instruction::Gate(g) | Instruction::CondGate { gate: g, .. } => {
                    let arity = match gate_arity(&g.name) {
                        Ok(a) => a,
                        Err(_) => return fail(format!("unknown gate '{}'", g.name)),
                    };
                    let n_params = gate_param_count(&g.name).unwrap_or(0);
                    if g.params.len() != n_params {
                        return fail(format!(
                            "gate '{}' takes {} parameter(s), got {}",
                            g.name,
                            n_params,
                            g.params.len()
                        ));
                    }
                    if g.params.iter().any(|p| !p.is_finite()) {
                        return fail(format!("gate '{}' has a non-finite parameter", g.name));
                    }
                    if g.targets.len() != arity {
                        return fail(format!(
                            "gate '{}' acts on {} qubit(s), got {} target(s)",
                            g.name,
                            arity,
                            g.targets.len()
                        ));
                    }
                    let mut seen = vec![false; total];
                    for &q in g.targets.iter().chain(g.controls.iter()) {
                        if q >= total {
                            return fail(format!("qubit {q} out of range (register {total})"));
                        }
                        if seen[q] {
                            return fail(format!("qubit {q} used twice in one gate"));
                        }
                        seen[q] = true;
                    }
                    if let Instruction::CondGate { cond, .. } = ins {
                        if written.len() <= cond.slot || !written[cond.slot] {
                            return fail(format!(
                                "condition reads slot {} before any measurement writes it",
                                cond.slot
                            ));
                        }
                    }
                }
                Instruction::Measure { targets, .. } | Instruction::Reset { targets } => {
                    if targets.is_empty() {
                        return fail("instruction has no target qubits".to_string());
                    }
                    let mut seen = vec![false; total];
                    for &q in targets {
                        if q >= total {
                            return fail(format!("qubit {q} out of range (register {total})"));
                        }
                        if seen[q] {
                            return fail(format!("qubit {q} measured/reset twice in one step"));
                        }
                        seen[q] = true;
                    }
                    if let Instruction::Measure { slot, .. } = ins {
                        if written.len() <= *slot {
                            written.resize(slot + 1, false);
                        }
                        written[*slot] = true;
                    }
                }
            }
        }
        if let Some(gap) = written.iter().position(|w| !w) {
            return Err(Error::InvalidProgram(format!(
                "program '{}': classical slots are not dense (slot {gap} never written, \
                 but a higher slot is)",
                self.name
            )));
        }
        Ok(())
    }

    /// Reverse the program, replacing each gate by its adjoint.
    ///
    /// Only defined for unitary programs: measurement, reset, and
    /// classically-conditioned steps make a program non-invertible.
    pub fn inverse(&self) -> Result<Program> {
        let mut rev = Vec::with_capacity(self.instructions.len());
        for ins in self.instructions.iter().rev() {
            match ins {
                Instruction::Gate(g) => rev.push(Instruction::Gate(dagger_gate(g))),
                Instruction::Measure { .. } => {
                    return Err(Error::NotInvertible(format!(
                        "program '{}' contains a measurement",
                        self.name
                    )))
                }
                Instruction::Reset { .. } => {
                    return Err(Error::NotInvertible(format!(
                        "program '{}' contains a reset",
                        self.name
                    )))
                }
                Instruction::CondGate { .. } => {
                    return Err(Error::NotInvertible(format!(
                        "program '{}' contains a classically-conditioned gate",
                        self.name
                    )))
                }
            }
        }
        Ok(Program {
            name: format!("{}_inv", self.name),
            n_qubits: self.n_qubits,
            n_ancilla: self.n_ancilla,
            instructions: rev,
        })
    }

    /// Dense unitary of a measurement-free, ancilla-free program
    /// (row-mixing application of each gate; at most 12 qubits).
    pub fn to_unitary(&self) -> Result<CMatrix> {
        if self.n_ancilla != 0 {
            return Err(Error::InvalidProgram(format!(
                "unitary extraction requires an ancilla-free program, '{}' has {} ancilla(s)",
                self.name, self.n_ancilla
            )));
        }
        self.validate()?;
        let n = self.n_qubits;
        if n > 12 {
            return Err(Error::DimensionTooLarge {
                what: "unitary extraction register",
                got: n,
                limit: 12,
            });
        }
        let d = 1usize << n;
        let mut u = CMatrix::identity(d);
        for ins in &self.instructions {
            let g = match ins {
                Instruction::Gate(g) => g,
                _ => {
                    return Err(Error::InvalidProgram(format!(
                        "unitary extraction requires a gates-only program, '{}' \
                         contains measurement/reset/conditioning",
                        self.name
                    )))
                }
            };
            apply_gate_rows(u.as_mut_slice(), d, n, g)?;
        }
        Ok(u)
    }

    /// Stable JSON form (pretty-printed, shortest-round-trip floats).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("program serialization cannot fail")
    }

    /// Parse the JSON form. The result is validated structurally.
    pub fn from_json(text: &str) -> Result<Program> {
        let p: Program = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("program JSON: {e}")))?;
        p.validate()?;
        Ok(p)
    }
}

/// Apply one (possibly controlled) gate to row-major `data` with `ncols`
/// columns, treating rows as amplitudes of an `n`-qubit register.
pub(crate) fn apply_gate_rows(
    data: &mut [Complex],
    ncols: usize,
    n: usize,
    g: &GateOp,
) -> Result<()> {
    let m = std_gate(&g.name, &g.params)?;
    let mut cmask = 0usize;
    for &c in &g.controls {
        cmask |= stride_of(n, c);
    }
    match g.targets.len() {
        1 => {
            let gm: [Complex; 4] = m.as_slice().try_into().expect("2x2 gate");
            apply_gate1_rows(data, ncols, &gm, stride_of(n, g.targets[0]), cmask);
        }
        2 => {
            let gm: [Complex; 16] = m.as_slice().try_into().expect("4x4 gate");
            apply_gate2_rows(
                data,
                ncols,
                &gm,
                stride_of(n, g.targets[0]),
                stride_of(n, g.targets[1]),
                cmask,
            );
        }
        a => {
            return Err(Error::InvalidProgram(format!(
                "gate '{}' has unsupported arity {a}",
                g.name
            )))
        }
    }
    Ok(())
}

/// Bit weight of qubit `q` in an `n`-qubit basis-state index (qubit 0 is the
/// most significant bit).
pub(crate) fn stride_of(n: usize, q: usize) -> usize {
    1usize << (n - 1 - q)
}

fn dagger_gate(g: &GateOp) -> GateOp {
    let (name, params) = match g.name.as_str() {
        "S" => ("Sdg".to_string(), g.params.clone()),
        "Sdg" => ("S".to_string(), g.params.clone()),
        "T" => ("Tdg".to_string(), g.params.clone()),
        "Tdg" => ("T".to_string(), g.params.clone()),
        "Rx" | "Ry" | "Rz" | "Phase" => {
            (g.name.clone(), g.params.iter().map(|p| -p).collect())
        }
        // I, X, Y, Z, H, CNOT, CZ, SWAP are self-adjoint.
        _ => (g.name.clone(), g.params.clone()),
    };
    GateOp {
        name,
        params,
        targets: g.targets.clone(),
        controls: g.controls.clone(),
    }
}

/// Run `first`, then `second`, as one program.
///
/// Both must have the same I/O width. `second`'s ancillas are renumbered to
/// sit after `first`'s; `second`'s classical slots are shifted past
/// `first`'s. The result is named `"first>>second"`.
pub fn compose(first: &Program, second: &Program) -> Result<Program> {
    if first.n_qubits != second.n_qubits {
        return Err(Error::ShapeMismatch(format!(
            "cannot compose '{}' ({} I/O qubits) with '{}' ({} I/O qubits)",
            first.name, first.n_qubits, second.name, second.n_qubits
        )));
    }
    let n = first.n_qubits;
    let (a1, a2) = (first.n_ancilla, second.n_ancilla);
    let slot_shift = first.n_slots();
    let map_q = |q: usize| if q < n { q } else { q + a1 };

    let mut instructions = first.instructions.clone();
    for ins in &second.instructions {
        let mapped = match ins {
            Instruction::Gate(g) => Instruction::Gate(map_gate(g, &map_q)),
            Instruction::Measure { targets, slot } => Instruction::Measure {
                targets: targets.iter().map(|&q| map_q(q)).collect(),
                slot: slot + slot_shift,
            },
            Instruction::Reset { targets } => Instruction::Reset {
                targets: targets.iter().map(|&q| map_q(q)).collect(),
            },
            Instruction::CondGate { cond, gate } => Instruction::CondGate {
                cond: Condition {
                    slot: cond.slot + slot_shift,
                    value: cond.value,
                },
                gate: map_gate(gate, &map_q),
            },
        };
        instructions.push(mapped);
    }
    let composed = Program {
        name: format!("{}>>{}", first.name, second.name),
        n_qubits: n,
        n_ancilla: a1 + a2,
        instructions,
    };
    composed.validate()?;
    Ok(composed)
}

fn map_gate(g: &GateOp, map_q: &impl Fn(usize) -> usize) -> GateOp {
    GateOp {
        name: g.name.clone(),
        params: g.params.clone(),
        targets: g.targets.iter().map(|&q| map_q(q)).collect(),
        controls: g.controls.iter().map(|&q| map_q(q)).collect(),
    }
}

/// Whether two same-sized unitaries agree up to a global phase at entrywise
/// tolerance `tol`. The candidate phase is read off `tr(U†V)`.
pub fn unitary_equal_up_to_phase(u: &CMatrix, v: &CMatrix, tol: f64) -> bool {
    if u.rows() != v.rows() || u.cols() != v.cols() || u.rows() != u.cols() {
        return false;
    }
    let t = u.dagger().mul(v).expect("dimensions checked").trace();
    // For V = e^{i phi} U the trace has magnitude d; a tiny magnitude means
    // the matrices cannot be phase-aligned.
    if t.norm() < 1e-6 {
        return false;
    }
    let phase = t / t.norm();
    let mut worst = 0.0f64;
    for (a, b) in u.as_slice().iter().zip(v.as_slice()) {
        worst = worst.max((a * phase - b).norm());
    }
    worst <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::TOL_GATE;

    fn h_cnot_program() -> Program {
        Program::new("bell_pair", 2).gate("H", &[0]).gate("CNOT", &[0, 1])
    }

    #[test]
    fn builders_produce_expected_instructions() {
        let p = Program::with_ancilla("builder_demo", 2, 1)
            .gate("H", &[0])
            .gate_p("Rz", &[0.25], &[1])
            .ctrl_gate("X", &[0], &[2])
            .measure(&[2], 0)
            .reset(&[2])
            .cond_gate(0, 1, "Z", &[1]);
        assert_eq!(p.total_qubits(), 3);
        assert_eq!(p.instructions.len(), 6);
        assert_eq!(p.n_slots(), 1);
        p.validate().unwrap();
        match &p.instructions[2] {
            Instruction::Gate(g) => {
                assert_eq!(g.name, "X");
                assert_eq!(g.controls, vec![0]);
                assert_eq!(g.targets, vec![2]);
            }
            other => panic!("expected controlled gate, got {other:?}"),
        }
    }

    #[test]
    fn validation_rejects_malformed_programs() {
        let cases: Vec<(Program, &str)> = vec![
            (
                Program::new("unknown_gate", 1).gate("Hadamard", &[0]),
                "unknown gate",
            ),
            (
                Program::new("bad_param_count", 1).gate_p("Rz", &[0.1, 0.2], &[0]),
                "parameter",
            ),
            (
                Program::new("missing_param", 1).gate("Rx", &[0]),
                "parameter",
            ),
            (
                Program::new("bad_arity", 2).gate("CNOT", &[0]),
                "target",
            ),
            (
                Program::new("duplicate_target", 2).gate("CNOT", &[1, 1]),
                "twice",
            ),
            (
                Program::new("control_is_target", 2).ctrl_gate("X", &[1], &[1]),
                "twice",
            ),
            (
                Program::new("out_of_range", 2).gate("X", &[2]),
                "out of range",
            ),
            (
                Program::new("slot_gap", 1).measure(&[0], 1),
                "dense",
            ),
            (
                Program::new("read_before_write", 2)
                    .cond_gate(0, 1, "X", &[1])
                    .measure(&[0], 0),
                "before any measurement",
            ),
            (Program::new("empty_register", 0), "empty I/O register"),
        ];
        for (p, needle) in cases {
            let err = p.validate().unwrap_err().to_string();
            assert!(
                err.contains(needle),
                "program '{}': expected error containing '{needle}', got '{err}'",
                p.name
            );
        }
    }

    #[test]
    fn validation_rejects_oversized_register() {
        let p = Program::with_ancilla("too_wide", 10, 5).gate("X", &[0]);
        assert!(matches!(
            p.validate(),
            Err(Error::DimensionTooLarge { got: 15, limit: 14, .. })
        ));
    }

    #[test]
    fn fresh_highest_slot_may_be_written_first() {
        // Measurement-insertion mutants put the fresh (highest) slot early;
        // density is a set property, not a first-write-order property.
        let p = Program::new("late_then_early_slot", 2)
            .measure(&[0], 1)
            .measure(&[1], 0);
        p.validate().unwrap();
        assert_eq!(p.n_slots(), 2);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let p = Program::with_ancilla("round_trip", 2, 1)
            .gate("H", &[0])
            .gate_p("Rz", &[0.1 + 0.2], &[1])
            .gate_p("Phase", &[-std::f64::consts::PI / 16.0], &[0])
            .ctrl_gate("X", &[0], &[2])
            .measure(&[2], 0)
            .cond_gate(0, 1, "X", &[1])
            .reset(&[2]);
        let text = p.to_json();
        let q = Program::from_json(&text).unwrap();
        assert_eq!(p, q);
        // Bit-exactness: floats survive the round trip with no drift, so a
        // second serialization is byte-identical.
        assert_eq!(text, q.to_json());
    }

    #[test]
    fn json_shape_uses_kind_tags() {
        let p = Program::new("tag_shape", 2)
            .gate("H", &[0])
            .measure(&[0], 0)
            .cond_gate(0, 1, "X", &[1]);
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        let ins = v["instructions"].as_array().unwrap();
        assert_eq!(ins[0]["kind"], "gate");
        assert_eq!(ins[0]["name"], "H");
        assert!(ins[0].get("params").is_none(), "empty params are omitted");
        assert_eq!(ins[1]["kind"], "measure");
        assert_eq!(ins[1]["slot"], 0);
        assert_eq!(ins[2]["kind"], "cond_gate");
        assert_eq!(ins[2]["cond"]["slot"], 0);
        assert_eq!(ins[2]["gate"]["name"], "X");
    }

    #[test]
    fn from_json_rejects_invalid_programs() {
        let text = r#"{"name":"bad","n_qubits":1,"instructions":
            [{"kind":"gate","name":"Q","targets":[0]}]}"#;
        assert!(Program::from_json(text).is_err());
    }

    #[test]
    fn inverse_reverses_and_daggers() {
        let p = Program::new("dagger_map", 2)
            .gate("S", &[0])
            .gate("T", &[1])
            .gate_p("Rz", &[0.7], &[0])
            .gate("CNOT", &[0, 1]);
        let inv = p.inverse().unwrap();
        assert_eq!(inv.name, "dagger_map_inv");
        let names: Vec<&str> = inv
            .instructions
            .iter()
            .map(|i| i.gate_op().unwrap().name.as_str())
            .collect();
        assert_eq!(names, ["CNOT", "Rz", "Tdg", "Sdg"]);
        match &inv.instructions[1] {
            Instruction::Gate(g) => assert_eq!(g.params, vec![-0.7]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn inverse_rejects_non_unitary_steps() {
        let measured = Program::new("with_measure", 1).measure(&[0], 0);
        assert!(matches!(measured.inverse(), Err(Error::NotInvertible(_))));
        let reset = Program::new("with_reset", 1).reset(&[0]);
        assert!(matches!(reset.inverse(), Err(Error::NotInvertible(_))));
        let cond = Program::new("with_cond", 2)
            .measure(&[0], 0)
            .cond_gate(0, 1, "X", &[1]);
        assert!(matches!(cond.inverse(), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn program_then_inverse_is_identity() {
        // One of every invertible gate, so the dagger map is fully exercised.
        let p = Program::new("all_invertible_gates", 3)
            .gate("I", &[0])
            .gate("X", &[0])
            .gate("Y", &[1])
            .gate("Z", &[2])
            .gate("H", &[0])
            .gate("S", &[1])
            .gate("Sdg", &[2])
            .gate("T", &[0])
            .gate("Tdg", &[1])
            .gate_p("Rx", &[0.3], &[0])
            .gate_p("Ry", &[-1.1], &[1])
            .gate_p("Rz", &[2.5], &[2])
            .gate_p("Phase", &[0.9], &[0])
            .gate("CNOT", &[0, 1])
            .gate("CZ", &[1, 2])
            .gate("SWAP", &[0, 2])
            .ctrl_gate("X", &[2], &[1])
            .ctrl_gate_p("Phase", &[std::f64::consts::FRAC_PI_2], &[0], &[2]);
        let round_trip = compose(&p, &p.inverse().unwrap()).unwrap();
        let u = round_trip.to_unitary().unwrap();
        let id = CMatrix::identity(8);
        assert!(u.max_abs_diff(&id) < TOL_GATE);
    }

    #[test]
    fn to_unitary_matches_gate_matrix_and_msb_convention() {
        let u = Program::new("single_h", 1).gate("H", &[0]).to_unitary().unwrap();
        assert!(u.max_abs_diff(&std_gate("H", &[]).unwrap()) < TOL_GATE);

        // X on qubit 0 of two: |00> -> |10>, so column 0 peaks at row 2.
        let x0 = Program::new("x_on_msb", 2).gate("X", &[0]).to_unitary().unwrap();
        assert!((x0.get(2, 0) - Complex::new(1.0, 0.0)).norm() < TOL_GATE);
        assert!(x0.get(1, 0).norm() < TOL_GATE);

        // CNOT with control q0: matches the standard matrix on (q0,q1).
        let cx = Program::new("cnot01", 2).gate("CNOT", &[0, 1]).to_unitary().unwrap();
        assert!(cx.max_abs_diff(&std_gate("CNOT", &[]).unwrap()) < TOL_GATE);

        // Same gate with reversed operand order: |01> -> |11>.
        let cx_rev = Program::new("cnot10", 2).gate("CNOT", &[1, 0]).to_unitary().unwrap();
        assert!((cx_rev.get(3, 1) - Complex::new(1.0, 0.0)).norm() < TOL_GATE);
        assert!((cx_rev.get(1, 3) - Complex::new(1.0, 0.0)).norm() < TOL_GATE);
        assert!((cx_rev.get(0, 0) - Complex::new(1.0, 0.0)).norm() < TOL_GATE);
    }

    #[test]
    fn controlled_gate_acts_only_on_control_one_subspace() {
        // Toffoli built as a controlled CNOT: flips q2 only when q0=q1=1.
        let u = Program::new("toffoli", 3)
            .ctrl_gate("CNOT", &[0], &[1, 2])
            .to_unitary()
            .unwrap();
        for col in 0..8 {
            let expected = if col & 0b110 == 0b110 { col ^ 1 } else { col };
            assert!(
                (u.get(expected, col) - Complex::new(1.0, 0.0)).norm() < TOL_GATE,
                "column {col} should map to {expected}"
            );
        }
    }

    #[test]
    fn swap_via_three_cnots_matches_swap_gate() {
        let p = Program::new("swap_from_cnots", 2)
            .gate("CNOT", &[0, 1])
            .gate("CNOT", &[1, 0])
            .gate("CNOT", &[0, 1]);
        let u = p.to_unitary().unwrap();
        assert!(u.max_abs_diff(&std_gate("SWAP", &[]).unwrap()) < TOL_GATE);
    }

    #[test]
    fn to_unitary_rejects_ancillas_and_measurements() {
        let anc = Program::with_ancilla("has_ancilla", 1, 1).gate("X", &[1]);
        assert!(anc.to_unitary().is_err());
        let meas = Program::new("has_measure", 1).measure(&[0], 0);
        assert!(meas.to_unitary().is_err());
    }

    #[test]
    fn compose_remaps_ancillas_and_slots() {
        let first = Program::with_ancilla("front", 2, 1)
            .gate("X", &[2])
            .measure(&[2], 0);
        let second = Program::with_ancilla("back", 2, 1)
            .gate("H", &[2])
            .measure(&[2], 0)
            .cond_gate(0, 1, "Z", &[0]);
        let c = compose(&first, &second).unwrap();
        assert_eq!(c.name, "front>>back");
        assert_eq!(c.n_qubits, 2);
        assert_eq!(c.n_ancilla, 2);
        assert_eq!(c.n_slots(), 2);
        // second's ancilla 2 now sits at 3; its slot 0 now at 1.
        match &c.instructions[2] {
            Instruction::Gate(g) => assert_eq!(g.targets, vec![3]),
            other => panic!("unexpected {other:?}"),
        }
        match &c.instructions[3] {
            Instruction::Measure { targets, slot } => {
                assert_eq!(targets, &vec![3]);
                assert_eq!(*slot, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
        match &c.instructions[4] {
            Instruction::CondGate { cond, .. } => assert_eq!(cond.slot, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn compose_requires_equal_io_width() {
        let a = Program::new("one_wide", 1);
        let b = Program::new("two_wide", 2);
        assert!(matches!(compose(&a, &b), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn compose_of_x_with_x_is_identity() {
        let x = Program::new("flip", 1).gate("X", &[0]);
        let u = compose(&x, &x).unwrap().to_unitary().unwrap();
        assert!(u.max_abs_diff(&CMatrix::identity(2)) < TOL_GATE);
    }

    #[test]
    fn phase_equivalence_detects_global_phase_only() {
        // Rz(pi) = diag(e^{-i pi/2}, e^{i pi/2}) = -i Z: equal to Z only up
        // to the global phase -i.
        let rz = Program::new("half_turn_rz", 1)
            .gate_p("Rz", &[std::f64::consts::PI], &[0])
            .to_unitary()
            .unwrap();
        let z = std_gate("Z", &[]).unwrap();
        assert!(rz.max_abs_diff(&z) > 0.5);
        assert!(unitary_equal_up_to_phase(&rz, &z, 1e-12));

        // X vs Z are not phase-equal.
        let x = std_gate("X", &[]).unwrap();
        assert!(!unitary_equal_up_to_phase(&x, &z, 1e-9));

        // Bell-pair circuit equals itself.
        let bell = h_cnot_program().to_unitary().unwrap();
        assert!(unitary_equal_up_to_phase(&bell, &bell, 1e-15));
    }
}
