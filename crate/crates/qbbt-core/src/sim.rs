//! Two execution semantics for the same program IR.
//!
//! [`run_shot`] samples one run: statevector evolution with projective
//! measurement collapse driven by an explicit counter-based RNG.
//! [`exact_channel`] computes the exact density-operator action of a program
//! by exploring every measurement branch.
//!
//! Both consume a [`CompiledProgram`]: the IR lowered once into stride/mask
//! form so per-shot work never touches gate names.

use num_complex::ComplexFloat;

use crate::circuit::{stride_of, GateOp, Instruction, Program};
use crate::qnum::{std_gate, CMatrix, Complex, DensityMatrix, StateVector};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Counter-based RNG
// ---------------------------------------------------------------------------

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const SPLIT_SEP: u64 = 0xD1B5_4A32_D192_ED03;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based splittable RNG.
///
/// Output `i` (1-based) of a stream with key `k` is
/// `mix64(k + i*GAMMA)` with the classic 64-bit finalizer, so the key-0
/// stream coincides with the well-known sequence produced by seeding that
/// generator with 0. [`Rng::split`] derives a child key from the parent *key*
/// and a label only — never from how much of the parent stream was consumed —
/// so independently split streams merge bit-identically regardless of
/// execution or thread order.
///
/// Stream-derivation convention used by the checkers: the root is
/// `Rng::new(seed)`; test point `i` uses `root.split(i)`; within a point,
/// label 0 is reserved for input-choice draws and labels 1.. for program
/// executions; within an execution, shot `j` uses `.split(j)`.
#[derive(Debug, Clone)]
pub struct Rng {
    key: u64,
    ctr: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { key: seed, ctr: 0 }
    }

    /// Child stream for `label`, independent of this stream's position.
    pub fn split(&self, label: u64) -> Rng {
        Rng {
            key: mix64(self.key ^ mix64(label.wrapping_add(SPLIT_SEP))),
            ctr: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.ctr = self.ctr.wrapping_add(1);
        mix64(self.key.wrapping_add(self.ctr.wrapping_mul(GAMMA)))
    }

    /// Uniform double in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }
}

// ---------------------------------------------------------------------------
// Compiled programs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub(crate) enum COp {
    Gate1 {
        g: [Complex; 4],
        stride: usize,
        cmask: usize,
    },
    Gate2 {
        g: [Complex; 16],
        s0: usize,
        s1: usize,
        cmask: usize,
    },
    /// Projective measurement; strides in value order (first = most
    /// significant result bit).
    Measure { strides: Vec<usize>, slot: usize },
    Reset { strides: Vec<usize> },
    Cond {
        slot: usize,
        value: u64,
        inner: Box<COp>,
    },
}

/// A validated program lowered to stride/mask operations.
#[derive(Debug, Clone)]
pub struct CompiledProgram {
    name: String,
    n_io: usize,
    n_anc: usize,
    n_slots: usize,
    ops: Vec<COp>,
}

impl CompiledProgram {
    pub fn compile(p: &Program) -> Result<Self> {
        p.validate()?;
        let n = p.total_qubits();
        let ops = p
            .instructions
            .iter()
            .map(|ins| compile_ins(ins, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledProgram {
            name: p.name.clone(),
            n_io: p.n_qubits,
            n_anc: p.n_ancilla,
            n_slots: p.n_slots(),
            ops,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn n_io(&self) -> usize {
        self.n_io
    }
    pub fn total_qubits(&self) -> usize {
        self.n_io + self.n_anc
    }
    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    /// True when every operation is an unconditioned unitary gate.
    pub fn is_measurement_free(&self) -> bool {
        self.ops
            .iter()
            .all(|op| matches!(op, COp::Gate1 { .. } | COp::Gate2 { .. }))
    }
}

fn compile_gate(g: &GateOp, n: usize) -> Result<COp> {
    let m = std_gate(&g.name, &g.params)?;
    let mut cmask = 0usize;
    for &c in &g.controls {
        cmask |= stride_of(n, c);
    }
    Ok(match g.targets.len() {
        1 => COp::Gate1 {
            g: m.as_slice().try_into().expect("2x2 gate"),
            stride: stride_of(n, g.targets[0]),
            cmask,
        },
        2 => COp::Gate2 {
            g: m.as_slice().try_into().expect("4x4 gate"),
            s0: stride_of(n, g.targets[0]),
            s1: stride_of(n, g.targets[1]),
            cmask,
        },
        a => {
            return Err(Error::InvalidProgram(format!(
                "gate '{}' has unsupported arity {a}",
                g.name
            )))
        }
    })
}

fn compile_ins(ins: &Instruction, n: usize) -> Result<COp> {
    Ok(match ins {
        Instruction::Gate(g) => compile_gate(g, n)?,
        Instruction::Measure { targets, slot } => COp::Measure {
            strides: targets.iter().map(|&q| stride_of(n, q)).collect(),
            slot: *slot,
        },
        Instruction::Reset { targets } => COp::Reset {
            strides: targets.iter().map(|&q| stride_of(n, q)).collect(),
        },
        Instruction::CondGate { cond, gate } => COp::Cond {
            slot: cond.slot,
            value: cond.value,
            inner: Box::new(compile_gate(gate, n)?),
        },
    })
}

// ---------------------------------------------------------------------------
// Gate kernels (shared by statevector, density and unitary extraction)
// ---------------------------------------------------------------------------
//
// `data` is a row-major (nrows x ncols) block whose row index is a basis
// label of the register; a statevector is the ncols = 1 case. Base rows are
// enumerated with the ascending-submask walk y = (y - free) & free.

pub(crate) fn apply_gate1_rows(
    data: &mut [Complex],
    ncols: usize,
    g: &[Complex; 4],
    stride: usize,
    cmask: usize,
) {
    let nrows = data.len() / ncols;
    let free = (nrows - 1) & !stride & !cmask;
    let mut y = 0usize;
    loop {
        let r0 = (y | cmask) * ncols;
        let r1 = r0 + stride * ncols;
        for c in 0..ncols {
            let a = data[r0 + c];
            let b = data[r1 + c];
            data[r0 + c] = g[0] * a + g[1] * b;
            data[r1 + c] = g[2] * a + g[3] * b;
        }
        y = y.wrapping_sub(free) & free;
        if y == 0 {
            break;
        }
    }
}

pub(crate) fn apply_gate2_rows(
    data: &mut [Complex],
    ncols: usize,
    g: &[Complex; 16],
    s0: usize,
    s1: usize,
    cmask: usize,
) {
    let nrows = data.len() / ncols;
    let free = (nrows - 1) & !s0 & !s1 & !cmask;
    let mut y = 0usize;
    loop {
        let base = (y | cmask) * ncols;
        let rows = [base, base + s1 * ncols, base + s0 * ncols, base + (s0 + s1) * ncols];
        for c in 0..ncols {
            let v = [
                data[rows[0] + c],
                data[rows[1] + c],
                data[rows[2] + c],
                data[rows[3] + c],
            ];
            for (i, &row) in rows.iter().enumerate() {
                data[row + c] = g[4 * i] * v[0]
                    + g[4 * i + 1] * v[1]
                    + g[4 * i + 2] * v[2]
                    + g[4 * i + 3] * v[3];
            }
        }
        y = y.wrapping_sub(free) & free;
        if y == 0 {
            break;
        }
    }
}

/// Right-multiply rows by the gate adjoint: column mixing of a density-like
/// block (stride/cmask act on the column index).
fn apply_gate1_cols(data: &mut [Complex], ncols: usize, g: &[Complex; 4], stride: usize, cmask: usize) {
    let nrows = data.len() / ncols;
    let free = (ncols - 1) & !stride & !cmask;
    for r in 0..nrows {
        let row = &mut data[r * ncols..(r + 1) * ncols];
        let mut y = 0usize;
        loop {
            let c0 = y | cmask;
            let c1 = c0 + stride;
            let a = row[c0];
            let b = row[c1];
            row[c0] = a * g[0].conj() + b * g[1].conj();
            row[c1] = a * g[2].conj() + b * g[3].conj();
            y = y.wrapping_sub(free) & free;
            if y == 0 {
                break;
            }
        }
    }
}

fn apply_gate2_cols(
    data: &mut [Complex],
    ncols: usize,
    g: &[Complex; 16],
    s0: usize,
    s1: usize,
    cmask: usize,
) {
    let nrows = data.len() / ncols;
    let free = (ncols - 1) & !s0 & !s1 & !cmask;
    for r in 0..nrows {
        let row = &mut data[r * ncols..(r + 1) * ncols];
        let mut y = 0usize;
        loop {
            let base = y | cmask;
            let cols = [base, base + s1, base + s0, base + s0 + s1];
            let v = [row[cols[0]], row[cols[1]], row[cols[2]], row[cols[3]]];
            for (i, &col) in cols.iter().enumerate() {
                row[col] = v[0] * g[4 * i].conj()
                    + v[1] * g[4 * i + 1].conj()
                    + v[2] * g[4 * i + 2].conj()
                    + v[3] * g[4 * i + 3].conj();
            }
            y = y.wrapping_sub(free) & free;
            if y == 0 {
                break;
            }
        }
    }
}

fn apply_cop_state(state: &mut [Complex], op: &COp) {
    match op {
        COp::Gate1 { g, stride, cmask } => apply_gate1_rows(state, 1, g, *stride, *cmask),
        COp::Gate2 { g, s0, s1, cmask } => apply_gate2_rows(state, 1, g, *s0, *s1, *cmask),
        _ => unreachable!("non-gate op in gate-application path"),
    }
}

// ---------------------------------------------------------------------------
// Sampled execution
// ---------------------------------------------------------------------------

/// Outcome of one sampled run: the post-run register state and the classical
/// slot contents.
#[derive(Debug, Clone)]
pub struct ShotResult {
    pub state: StateVector,
    pub slots: Vec<u64>,
}

const MIN_BRANCH_PROB: f64 = 1e-12;

/// Probability that `qubit-stride` reads 0 in `state`.
fn prob_bit0(state: &[Complex], stride: usize) -> f64 {
    let free = (state.len() - 1) & !stride;
    let mut p0 = 0.0;
    let mut y = 0usize;
    loop {
        p0 += state[y].norm_sqr();
        y = y.wrapping_sub(free) & free;
        if y == 0 {
            break;
        }
    }
    p0
}

/// Sample one qubit in the computational basis and collapse the state.
///
/// The outcome is 0 exactly when `rng.uniform() < p0`. This decision rule is
/// part of the stream contract: any cached-state replay must reproduce it
/// bit-for-bit.
fn sample_qubit(state: &mut [Complex], stride: usize, rng: &mut Rng) -> Result<usize> {
    let p0 = prob_bit0(state, stride);
    let u = rng.uniform();
    let outcome = usize::from(u >= p0);
    let p_chosen = if outcome == 0 { p0 } else { 1.0 - p0 };
    if p_chosen < MIN_BRANCH_PROB {
        return Err(Error::NumericalInvariant(format!(
            "measurement selected a branch of probability {p_chosen:.3e}"
        )));
    }
    let scale = 1.0 / p_chosen.sqrt();
    let keep_bit = outcome * stride;
    for (idx, amp) in state.iter_mut().enumerate() {
        if idx & stride == keep_bit {
            *amp *= scale;
        } else {
            *amp = Complex::new(0.0, 0.0);
        }
    }
    Ok(outcome)
}

/// Embed an I/O-register state into the full register, work qubits in |0>.
/// Ancillas occupy the *least significant* index bits.
fn embed_state(input: &StateVector, n_anc: usize) -> Vec<Complex> {
    let d_io = input.len();
    let mut full = vec![Complex::new(0.0, 0.0); d_io << n_anc];
    for (i, &a) in input.as_slice().iter().enumerate() {
        full[i << n_anc] = a;
    }
    full
}

/// Execute one sampled run of `cp` on `input` (I/O register only; ancillas
/// start in |0>). Every random decision comes from `rng`, one uniform per
/// single-qubit measurement or reset, in program order.
pub fn run_shot(cp: &CompiledProgram, input: &StateVector, rng: &mut Rng) -> Result<ShotResult> {
    if input.n_qubits() != cp.n_io {
        return Err(Error::ShapeMismatch(format!(
            "program '{}' has {} I/O qubit(s), input state has {}",
            cp.name,
            cp.n_io,
            input.n_qubits()
        )));
    }
    let mut state = embed_state(input, cp.n_anc);
    let mut slots = vec![0u64; cp.n_slots];
    for op in &cp.ops {
        run_cop(&mut state, &mut slots, op, rng)?;
    }
    Ok(ShotResult {
        state: StateVector::from_amps_unchecked(cp.total_qubits(), state),
        slots,
    })
}

fn run_cop(state: &mut [Complex], slots: &mut [u64], op: &COp, rng: &mut Rng) -> Result<()> {
    match op {
        COp::Gate1 { .. } | COp::Gate2 { .. } => apply_cop_state(state, op),
        COp::Measure { strides, slot } => {
            let mut value = 0u64;
            for &st in strides {
                let o = sample_qubit(state, st, rng)?;
                value = (value << 1) | o as u64;
            }
            slots[*slot] = value;
        }
        COp::Reset { strides } => {
            for &st in strides {
                let o = sample_qubit(state, st, rng)?;
                if o == 1 {
                    let x: [Complex; 4] = [
                        Complex::new(0.0, 0.0),
                        Complex::new(1.0, 0.0),
                        Complex::new(1.0, 0.0),
                        Complex::new(0.0, 0.0),
                    ];
                    apply_gate1_rows(state, 1, &x, st, 0);
                }
            }
        }
        COp::Cond { slot, value, inner } => {
            if slots[*slot] == *value {
                apply_cop_state(state, inner);
            }
        }
    }
    Ok(())
}

/// Run a measurement-free program on a full-register input state with no
/// randomness. Errors when the program contains measurement, reset, or
/// conditioning.
pub fn run_deterministic(cp: &CompiledProgram, input: &StateVector) -> Result<StateVector> {
    if !cp.is_measurement_free() {
        return Err(Error::InvalidInput(format!(
            "program '{}' is not measurement-free",
            cp.name
        )));
    }
    if input.n_qubits() != cp.n_io {
        return Err(Error::ShapeMismatch(format!(
            "program '{}' has {} I/O qubit(s), input state has {}",
            cp.name,
            cp.n_io,
            input.n_qubits()
        )));
    }
    let mut state = embed_state(input, cp.n_anc);
    for op in &cp.ops {
        apply_cop_state(&mut state, op);
    }
    Ok(StateVector::from_amps_unchecked(cp.total_qubits(), state))
}

// ---------------------------------------------------------------------------
// Exact density-operator semantics
// ---------------------------------------------------------------------------

const MAX_EXACT_QUBITS: usize = 12;
const MAX_BRANCHES: usize = 1 << 20;
/// Prune threshold for the raw (unnormalized, possibly non-Hermitian) route.
const RAW_PRUNE: f64 = 1e-15;

#[derive(Clone)]
struct Branch {
    m: Vec<Complex>,
    slots: Vec<u64>,
}

#[derive(Clone, Copy, PartialEq)]
enum PruneRule {
    /// Drop branches whose probability (trace) is below `MIN_BRANCH_PROB`.
    Trace,
    /// Drop branches whose largest entry magnitude is below `RAW_PRUNE`.
    /// Used for non-Hermitian inputs, whose branch traces can vanish while
    /// the branch itself does not.
    MaxAbs,
}

fn branch_alive(m: &[Complex], d: usize, rule: PruneRule) -> bool {
    match rule {
        PruneRule::Trace => {
            let mut tr = 0.0;
            for i in 0..d {
                tr += m[i * d + i].re;
            }
            tr >= MIN_BRANCH_PROB
        }
        PruneRule::MaxAbs => m.iter().any(|z| z.norm() >= RAW_PRUNE),
    }
}

/// Project the column/row space of `m` onto `bit` of `stride` (entries whose
/// row or column disagrees become zero).
fn project_density(m: &[Complex], d: usize, stride: usize, bit: usize) -> Vec<Complex> {
    let want = bit * stride;
    let mut out = vec![Complex::new(0.0, 0.0); d * d];
    for i in 0..d {
        if i & stride != want {
            continue;
        }
        for j in 0..d {
            if j & stride == want {
                out[i * d + j] = m[i * d + j];
            }
        }
    }
    out
}

/// In-branch reset of one qubit: rho <- P0 rho P0 + X P1 rho P1 X.
fn reset_density(m: &mut [Complex], d: usize, stride: usize) {
    let free = (d - 1) & !stride;
    let mut yi = 0usize;
    loop {
        let mut yj = 0usize;
        loop {
            m[yi * d + yj] += m[(yi + stride) * d + (yj + stride)];
            yj = yj.wrapping_sub(free) & free;
            if yj == 0 {
                break;
            }
        }
        yi = yi.wrapping_sub(free) & free;
        if yi == 0 {
            break;
        }
    }
    for i in 0..d {
        for j in 0..d {
            if (i | j) & stride != 0 {
                m[i * d + j] = Complex::new(0.0, 0.0);
            }
        }
    }
}

fn apply_cop_density(m: &mut [Complex], d: usize, op: &COp) {
    match op {
        COp::Gate1 { g, stride, cmask } => {
            apply_gate1_rows(m, d, g, *stride, *cmask);
            apply_gate1_cols(m, d, g, *stride, *cmask);
        }
        COp::Gate2 { g, s0, s1, cmask } => {
            apply_gate2_rows(m, d, g, *s0, *s1, *cmask);
            apply_gate2_cols(m, d, g, *s0, *s1, *cmask);
        }
        _ => unreachable!("non-gate op in density gate path"),
    }
}

fn exact_engine(cp: &CompiledProgram, init: Vec<Complex>, rule: PruneRule) -> Result<Vec<Branch>> {
    let d = 1usize << cp.total_qubits();
    debug_assert_eq!(init.len(), d * d);
    let mut branches = vec![Branch {
        m: init,
        slots: vec![0u64; cp.n_slots],
    }];
    for op in &cp.ops {
        match op {
            COp::Gate1 { .. } | COp::Gate2 { .. } => {
                for b in &mut branches {
                    apply_cop_density(&mut b.m, d, op);
                }
            }
            COp::Cond { slot, value, inner } => {
                for b in &mut branches {
                    if b.slots[*slot] == *value {
                        apply_cop_density(&mut b.m, d, inner);
                    }
                }
            }
            COp::Measure { strides, slot } => {
                for (pos, &st) in strides.iter().enumerate() {
                    let mut next = Vec::with_capacity(branches.len() * 2);
                    for b in &branches {
                        for bit in 0..2usize {
                            let m = project_density(&b.m, d, st, bit);
                            if !branch_alive(&m, d, rule) {
                                continue;
                            }
                            let mut slots = b.slots.clone();
                            if pos == 0 {
                                slots[*slot] = bit as u64;
                            } else {
                                slots[*slot] = (slots[*slot] << 1) | bit as u64;
                            }
                            next.push(Branch { m, slots });
                        }
                    }
                    if next.len() > MAX_BRANCHES {
                        return Err(Error::DimensionTooLarge {
                            what: "measurement branch count",
                            got: next.len(),
                            limit: MAX_BRANCHES,
                        });
                    }
                    branches = next;
                }
            }
            COp::Reset { strides } => {
                for b in &mut branches {
                    for &st in strides {
                        reset_density(&mut b.m, d, st);
                    }
                }
            }
        }
    }
    Ok(branches)
}

/// Embed an I/O density block into the full register (ancillas |0><0| on the
/// least significant index bits).
fn embed_matrix(m_io: &CMatrix, n_anc: usize) -> Vec<Complex> {
    let d_io = m_io.rows();
    let d = d_io << n_anc;
    let mut full = vec![Complex::new(0.0, 0.0); d * d];
    for i in 0..d_io {
        for j in 0..d_io {
            full[(i << n_anc) * d + (j << n_anc)] = m_io.get(i, j);
        }
    }
    full
}

/// Partial trace over the ancilla (least significant) index bits.
fn trace_out_ancilla(full: &[Complex], n_io: usize, n_anc: usize) -> CMatrix {
    let d_io = 1usize << n_io;
    let d = d_io << n_anc;
    let mut out = CMatrix::zeros(d_io, d_io);
    for i in 0..d_io {
        for j in 0..d_io {
            let mut acc = Complex::new(0.0, 0.0);
            for b in 0..(1usize << n_anc) {
                acc += full[((i << n_anc) | b) * d + ((j << n_anc) | b)];
            }
            out.set(i, j, acc);
        }
    }
    out
}

fn check_register_fits_exact(cp: &CompiledProgram) -> Result<()> {
    if cp.total_qubits() > MAX_EXACT_QUBITS {
        return Err(Error::DimensionTooLarge {
            what: "exact channel register",
            got: cp.total_qubits(),
            limit: MAX_EXACT_QUBITS,
        });
    }
    Ok(())
}

/// Exact density-operator action of `p` on `rho` (I/O register), exploring
/// every measurement branch and tracing out the work qubits.
pub fn exact_channel(p: &Program, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let cp = CompiledProgram::compile(p)?;
    exact_channel_compiled(&cp, rho)
}

/// [`exact_channel`] on an already-compiled program.
pub fn exact_channel_compiled(cp: &CompiledProgram, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_register_fits_exact(cp)?;
    if rho.n_qubits() != cp.n_io {
        return Err(Error::ShapeMismatch(format!(
            "program '{}' has {} I/O qubit(s), input density has {}",
            cp.name,
            cp.n_io,
            rho.n_qubits()
        )));
    }
    let branches = exact_engine(cp, embed_matrix(rho.matrix(), cp.n_anc), PruneRule::Trace)?;
    let d = 1usize << cp.total_qubits();
    let mut total = vec![Complex::new(0.0, 0.0); d * d];
    for b in &branches {
        for (t, s) in total.iter_mut().zip(&b.m) {
            *t += s;
        }
    }
    let mut tr = 0.0;
    for i in 0..d {
        tr += total[i * d + i].re;
    }
    if (tr - 1.0).abs() > 1e-8 {
        return Err(Error::NumericalInvariant(format!(
            "exact channel of '{}' lost trace: {tr:.12}",
            cp.name
        )));
    }
    let mut reduced = trace_out_ancilla(&total, cp.n_io, cp.n_anc);
    reduced = reduced.scale(Complex::new(1.0 / tr, 0.0));
    DensityMatrix::new(reduced)
}

/// Raw channel action on an arbitrary I/O-register matrix: no pruning by
/// probability, no renormalization. Linear in the input, so it extends the
/// channel to non-Hermitian arguments (used to build Choi matrices
/// column-by-column).
pub(crate) fn exact_channel_matrix(cp: &CompiledProgram, m_io: &CMatrix) -> Result<CMatrix> {
    check_register_fits_exact(cp)?;
    let d_io = 1usize << cp.n_io;
    if m_io.rows() != d_io || m_io.cols() != d_io {
        return Err(Error::ShapeMismatch(format!(
            "program '{}' expects a {d_io}x{d_io} input block, got {}x{}",
            cp.name,
            m_io.rows(),
            m_io.cols()
        )));
    }
    let branches = exact_engine(cp, embed_matrix(m_io, cp.n_anc), PruneRule::MaxAbs)?;
    let d = 1usize << cp.total_qubits();
    let mut total = vec![Complex::new(0.0, 0.0); d * d];
    for b in &branches {
        for (t, s) in total.iter_mut().zip(&b.m) {
            *t += s;
        }
    }
    Ok(trace_out_ancilla(&total, cp.n_io, cp.n_anc))
}
