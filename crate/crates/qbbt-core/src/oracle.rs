//! Exact ground truth for the sampled checkers.
//!
//! Everything here works on exact density operators (no sampling): overlap
//! and distinguishability computations, brute-force equivalence over every
//! Pauli product input, and an exact unitarity decision computed by two
//! independent routes that must agree:
//!
//! 1. **Orthogonality preservation** — a channel is unitary iff it keeps all
//!    computational basis states pairwise orthogonal *and* keeps the
//!    plus/minus superpositions along a connected path of basis pairs
//!    orthogonal. Both families are checked with exact channel outputs.
//! 2. **Choi rank** — a channel is unitary iff its Choi matrix is rank one,
//!    i.e. has a single eigenvalue `d` and the rest zero.
//!
//! The sizes are deliberately small (register cap of 6 qubits): this module
//! exists to validate the statistical checkers, not to scale.

use rayon::prelude::*;

use crate::circuit::Program;
use crate::qnum::{
    hermitian_eigenvalues, top_eigenpair_hermitian, CMatrix, Complex, DensityMatrix, StateVector,
    TOL_ORACLE,
};
use crate::sim::{exact_channel_compiled, exact_channel_matrix, CompiledProgram};
use crate::states::{all_pauli_indices, pauli_state};
use crate::{Error, Result};

/// Register cap for the brute-force routines (`6^n` sweeps, `4^n`-sided Choi
/// matrices): total qubits, work ancillas included.
pub const MAX_ORACLE_QUBITS: usize = 6;

/// Full eigensolves are used up to this Choi side; larger matrices switch to
/// power iteration for the top two eigenvalues.
const MAX_FULL_EIGEN_SIDE: usize = 256;

/// `tr(rho1 rho2)` as a real number.
///
/// The trace of a product of density operators is real; the imaginary part
/// of the computed value must stay below 1e-9 or the call reports a
/// numerical-invariant violation.
pub fn overlap(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::ShapeMismatch(format!(
            "overlap of {}x{} and {}x{} density operators",
            rho1.dim(),
            rho1.dim(),
            rho2.dim(),
            rho2.dim()
        )));
    }
    // rho1 is Hermitian, so tr(rho1 rho2) = tr(rho1^dagger rho2).
    let t = rho1.matrix().inner_frobenius(rho2.matrix());
    if t.im.abs() >= 1e-9 {
        return Err(Error::NumericalInvariant(format!(
            "overlap has imaginary part {:.3e}",
            t.im
        )));
    }
    Ok(t.re)
}

/// Distinguishability parameter `|(tr rho1^2 + tr rho2^2)/2 - tr(rho1 rho2)|`.
///
/// Zero exactly when `rho1 = rho2`; for orthogonal pure states it is 1.
pub fn e_param(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    let p1 = overlap(rho1, rho1)?;
    let p2 = overlap(rho2, rho2)?;
    let cross = overlap(rho1, rho2)?;
    Ok(((p1 + p2) / 2.0 - cross).abs())
}

fn check_oracle_cap(p: &Program) -> Result<()> {
    if p.total_qubits() > MAX_ORACLE_QUBITS {
        return Err(Error::DimensionTooLarge {
            what: "oracle register",
            got: p.total_qubits(),
            limit: MAX_ORACLE_QUBITS,
        });
    }
    Ok(())
}

/// Exact equivalence of two programs as channels on the I/O register:
/// TRUE iff their exact outputs agree (zero distinguishability parameter
/// within 1e-8) on every one of the `6^n` Pauli product inputs.
///
/// The sweep covers an operator basis of the input space, so agreement on
/// all of it is agreement on every input state.
pub fn exact_equivalent(p1: &Program, p2: &Program) -> Result<bool> {
    if p1.n_qubits != p2.n_qubits {
        return Err(Error::ShapeMismatch(format!(
            "programs '{}' ({} qubits) and '{}' ({} qubits) act on different registers",
            p1.name, p1.n_qubits, p2.name, p2.n_qubits
        )));
    }
    check_oracle_cap(p1)?;
    check_oracle_cap(p2)?;
    let cp1 = CompiledProgram::compile(p1)?;
    let cp2 = CompiledProgram::compile(p2)?;
    let inputs: Vec<Vec<u8>> = all_pauli_indices(p1.n_qubits).collect();
    let witness = inputs
        .par_iter()
        .find_map_any(|digits| {
            let point = || -> Result<f64> {
                let rho = pauli_state(digits)?.to_density();
                let out1 = exact_channel_compiled(&cp1, &rho)?;
                let out2 = exact_channel_compiled(&cp2, &rho)?;
                e_param(&out1, &out2)
            };
            match point() {
                Err(e) => Some(Err(e)),
                Ok(e_val) if e_val >= TOL_ORACLE => Some(Ok(())),
                Ok(_) => None,
            }
        })
        .transpose()?;
    Ok(witness.is_none())
}

/// Choi matrix of a program's channel on its I/O register.
///
/// Layout: the side is `d^2` with `d = 2^n`; entry `[(i*d + a), (j*d + b)]`
/// holds `<a| E(|i><j|) |b>`. Built column-block by column-block from the
/// raw (linear, non-renormalizing) exact channel.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    n_io: usize,
    choi: CMatrix,
}

impl ChannelMatrix {
    /// Number of I/O qubits of the underlying program.
    pub fn n_io(&self) -> usize {
        self.n_io
    }

    /// Hilbert-space dimension `d = 2^n` of the I/O register.
    pub fn dim(&self) -> usize {
        1usize << self.n_io
    }

    /// The Choi matrix itself (side `d^2`).
    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    /// All eigenvalues, descending. Only available up to side 1024.
    pub fn eigenvalues_descending(&self) -> Result<Vec<f64>> {
        let mut ev = hermitian_eigenvalues(&self.choi)?;
        ev.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        Ok(ev)
    }

    /// The two largest eigenvalues `(top, second)`.
    ///
    /// Small matrices use the full eigensolve; larger ones use power
    /// iteration with exact deflation of the dominant pair.
    pub fn top_two_eigenvalues(&self) -> Result<(f64, f64)> {
        if self.choi.rows() <= MAX_FULL_EIGEN_SIDE {
            let ev = self.eigenvalues_descending()?;
            return Ok((ev[0], if ev.len() > 1 { ev[1] } else { 0.0 }));
        }
        let (top, v) = top_eigenpair_hermitian(&self.choi, None);
        let (second, _) = top_eigenpair_hermitian(&self.choi, Some((&v, top)));
        Ok((top, second))
    }

    /// Structural invariants of a physical channel: Hermiticity, positive
    /// semidefiniteness (within 1e-8) and trace preservation
    /// (`tr_out E(|i><j|) = delta_ij` within 1e-8).
    fn validate(&self) -> Result<()> {
        let side = self.choi.rows();
        let d = self.dim();
        let mut herm_err = 0.0f64;
        for r in 0..side {
            for c in r..side {
                let diff = (self.choi.get(r, c) - self.choi.get(c, r).conj()).norm();
                herm_err = herm_err.max(diff);
            }
        }
        if herm_err > 1e-8 {
            return Err(Error::NumericalInvariant(format!(
                "choi matrix is not Hermitian: asymmetry {herm_err:.3e}"
            )));
        }
        for i in 0..d {
            for j in 0..d {
                let mut tr = Complex::new(0.0, 0.0);
                for a in 0..d {
                    tr += self.choi.get(i * d + a, j * d + a);
                }
                let want = if i == j { 1.0 } else { 0.0 };
                if (tr - Complex::new(want, 0.0)).norm() > 1e-8 {
                    return Err(Error::NumericalInvariant(format!(
                        "channel is not trace-preserving: tr_out block ({i},{j}) = {tr}"
                    )));
                }
            }
        }
        let min_eig = if side <= MAX_FULL_EIGEN_SIDE {
            hermitian_eigenvalues(&self.choi)?
                .into_iter()
                .fold(f64::INFINITY, f64::min)
        } else {
            // Estimate the extreme eigenvalue by power iteration on the
            // reflected operator top*I - C.
            let (top, _) = top_eigenpair_hermitian(&self.choi, None);
            let mut reflected = self.choi.scale(Complex::new(-1.0, 0.0));
            for r in 0..side {
                let v = reflected.get(r, r);
                reflected.set(r, r, v + Complex::new(top, 0.0));
            }
            let (spread, _) = top_eigenpair_hermitian(&reflected, None);
            top - spread
        };
        // The large-side estimate carries power-iteration error, so the gate
        // is looser there than the 1e-8 used for exact spectra.
        let tol = if side <= MAX_FULL_EIGEN_SIDE { 1e-8 } else { 1e-6 };
        if min_eig < -tol {
            return Err(Error::NumericalInvariant(format!(
                "choi matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(())
    }
}

/// Builds and validates the Choi matrix of `p`'s channel.
pub fn choi(p: &Program) -> Result<ChannelMatrix> {
    if p.n_qubits > MAX_ORACLE_QUBITS {
        return Err(Error::DimensionTooLarge {
            what: "choi matrix I/O register",
            got: p.n_qubits,
            limit: MAX_ORACLE_QUBITS,
        });
    }
    let cp = CompiledProgram::compile(p)?;
    let d = 1usize << p.n_qubits;
    let side = d * d;
    let mut c = CMatrix::zeros(side, side);
    let pairs: Vec<usize> = (0..side).collect();
    // Chunked so peak memory stays at one block batch plus the Choi matrix.
    for chunk in pairs.chunks(512) {
        let blocks: Vec<(usize, CMatrix)> = chunk
            .par_iter()
            .map(|&ij| {
                let mut basis_op = CMatrix::zeros(d, d);
                basis_op.set(ij / d, ij % d, Complex::new(1.0, 0.0));
                exact_channel_matrix(&cp, &basis_op).map(|out| (ij, out))
            })
            .collect::<Result<_>>()?;
        for (ij, block) in blocks {
            let (i, j) = (ij / d, ij % d);
            for a in 0..d {
                for b in 0..d {
                    c.set(i * d + a, j * d + b, block.get(a, b));
                }
            }
        }
    }
    let ch = ChannelMatrix {
        n_io: p.n_qubits,
        choi: c,
    };
    ch.validate()?;
    Ok(ch)
}

fn basis_density(n: usize, m: usize) -> Result<DensityMatrix> {
    Ok(StateVector::basis_state(n, m as u64)?.to_density())
}

/// `(|m> +/- |n>)/sqrt(2)` as a density operator.
fn superpos_density(n: usize, m: usize, n2: usize, minus: bool) -> Result<DensityMatrix> {
    let d = 1usize << n;
    let mut amps = vec![Complex::new(0.0, 0.0); d];
    let a = std::f64::consts::FRAC_1_SQRT_2;
    amps[m] = Complex::new(a, 0.0);
    amps[n2] = Complex::new(if minus { -a } else { a }, 0.0);
    Ok(StateVector::new(amps)?.to_density())
}

/// Unitarity by orthogonality preservation.
///
/// TRUE iff the channel keeps (1) every ordered pair of distinct basis
/// states orthogonal and (2) the plus/minus superpositions orthogonal along
/// the basis path `(0,1), (1,2), ..., (d-2, d-1)` — the path is a connected
/// graph over the basis, which makes the two families jointly sufficient.
/// All overlaps are exact channel outputs compared against 1e-8.
pub fn unitary_by_orthogonality(p: &Program) -> Result<bool> {
    check_oracle_cap(p)?;
    let cp = CompiledProgram::compile(p)?;
    let d = 1usize << p.n_qubits;
    let outs: Vec<DensityMatrix> = (0..d)
        .into_par_iter()
        .map(|m| exact_channel_compiled(&cp, &basis_density(p.n_qubits, m)?))
        .collect::<Result<_>>()?;
    for m in 0..d {
        for n2 in 0..d {
            if m != n2 && overlap(&outs[m], &outs[n2])? >= TOL_ORACLE {
                return Ok(false);
            }
        }
    }
    for m in 0..d - 1 {
        let plus = exact_channel_compiled(&cp, &superpos_density(p.n_qubits, m, m + 1, false)?)?;
        let minus = exact_channel_compiled(&cp, &superpos_density(p.n_qubits, m, m + 1, true)?)?;
        if overlap(&plus, &minus)? >= TOL_ORACLE {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Unitarity by Choi rank: TRUE iff the (validated) Choi matrix has one
/// eigenvalue `d` and every other eigenvalue below 1e-8.
pub fn unitary_by_choi_rank(p: &Program) -> Result<bool> {
    check_oracle_cap(p)?;
    let ch = choi(p)?;
    let (top, second) = ch.top_two_eigenvalues()?;
    let d = ch.dim() as f64;
    Ok(second < TOL_ORACLE && (top - d).abs() <= 1e-6 * d)
}

/// Exact unitarity of a program's channel, decided by both the
/// orthogonality-preservation route and the Choi-rank route.
///
/// The two computations are independent; a disagreement is an internal
/// consistency failure and is reported as an error rather than a verdict.
pub fn exact_unitary(p: &Program) -> Result<bool> {
    let by_orthogonality = unitary_by_orthogonality(p)?;
    let by_choi = unitary_by_choi_rank(p)?;
    if by_orthogonality != by_choi {
        return Err(Error::InternalInconsistency(format!(
            "unitarity routes disagree on '{}': orthogonality says {}, choi rank says {}",
            p.name, by_orthogonality, by_choi
        )));
    }
    Ok(by_orthogonality)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Rng;

    fn pure(n: usize, m: u64) -> DensityMatrix {
        StateVector::basis_state(n, m).unwrap().to_density()
    }

    fn plus_state() -> DensityMatrix {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![Complex::new(a, 0.0), Complex::new(a, 0.0)])
            .unwrap()
            .to_density()
    }

    fn minus_state() -> DensityMatrix {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![Complex::new(a, 0.0), Complex::new(-a, 0.0)])
            .unwrap()
            .to_density()
    }

    #[test]
    fn overlap_known_values() {
        let zero = pure(1, 0);
        assert!((overlap(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        assert!((overlap(&zero, &mixed).unwrap() - 0.5).abs() < 1e-12);
        assert!(overlap(&plus_state(), &minus_state()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn overlap_rejects_dim_mismatch() {
        assert!(matches!(
            overlap(&pure(1, 0), &pure(2, 0)),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn e_param_known_values() {
        let zero = pure(1, 0);
        let one = pure(1, 1);
        assert!(e_param(&zero, &zero).unwrap() < 1e-15);
        assert!((e_param(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        assert!((e_param(&zero, &mixed).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn equivalence_accepts_gate_identities() {
        // H H = I on one qubit.
        let double_h = Program::new("double_h", 1).gate("H", &[0]).gate("H", &[0]);
        let empty = Program::new("empty1", 1);
        assert!(exact_equivalent(&double_h, &empty).unwrap());
        // CNOT conjugated by H on both qubits = reversed CNOT.
        let a = Program::new("a", 2)
            .gate("H", &[0])
            .gate("H", &[1])
            .gate("CNOT", &[0, 1])
            .gate("H", &[0])
            .gate("H", &[1]);
        let b = Program::new("b", 2).gate("CNOT", &[1, 0]);
        assert!(exact_equivalent(&a, &b).unwrap());
    }

    #[test]
    fn equivalence_detects_single_gate_change() {
        let a = Program::new("a", 2)
            .gate("H", &[0])
            .gate_p("Phase", &[std::f64::consts::FRAC_PI_2], &[0]);
        let b = Program::new("b", 2)
            .gate("H", &[0])
            .gate_p("Phase", &[std::f64::consts::PI], &[0]);
        assert!(!exact_equivalent(&a, &b).unwrap());
        let x = Program::new("x", 1).gate("X", &[0]);
        let h = Program::new("h", 1).gate("H", &[0]);
        assert!(!exact_equivalent(&x, &h).unwrap());
    }

    #[test]
    fn equivalence_sees_through_measurement_implementations() {
        // Measuring a qubit and entangling it with a discarded ancilla
        // implement the same completely dephasing channel.
        let measured = Program::new("measure_q0", 1).measure(&[0], 0);
        let entangled = Program::with_ancilla("cnot_to_ancilla", 1, 1).gate("CNOT", &[0, 1]);
        assert!(exact_equivalent(&measured, &entangled).unwrap());
        // And both differ from the identity.
        let empty = Program::new("empty1", 1);
        assert!(!exact_equivalent(&measured, &empty).unwrap());
    }

    #[test]
    fn equivalence_is_reflexive_and_symmetric_here() {
        let progs = [
            Program::new("h", 1).gate("H", &[0]),
            Program::new("meas", 1).measure(&[0], 0),
            Program::new("rot", 1).gate_p("Ry", &[0.3], &[0]),
        ];
        for p in &progs {
            assert!(exact_equivalent(p, p).unwrap(), "{} not reflexive", p.name);
        }
        for p in &progs {
            for q in &progs {
                assert_eq!(
                    exact_equivalent(p, q).unwrap(),
                    exact_equivalent(q, p).unwrap(),
                    "asymmetry between {} and {}",
                    p.name,
                    q.name
                );
            }
        }
    }

    #[test]
    fn equivalence_rejects_mismatched_registers_and_caps_size() {
        let one = Program::new("one", 1).gate("H", &[0]);
        let two = Program::new("two", 2).gate("H", &[0]);
        assert!(matches!(
            exact_equivalent(&one, &two),
            Err(Error::ShapeMismatch(_))
        ));
        let wide = Program::new("wide", 7).gate("H", &[0]);
        let wide2 = Program::new("wide2", 7).gate("H", &[1]);
        assert!(matches!(
            exact_equivalent(&wide, &wide2),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn unitary_gate_program_passes_both_routes() {
        let h = Program::new("h", 1).gate("H", &[0]);
        assert!(unitary_by_orthogonality(&h).unwrap());
        assert!(unitary_by_choi_rank(&h).unwrap());
        assert!(exact_unitary(&h).unwrap());
    }

    #[test]
    fn reset_and_measurement_fail_unitarity() {
        let reset = Program::new("reset1", 1).reset(&[0]);
        assert!(!exact_unitary(&reset).unwrap());
        let measured = Program::new("measure_q0", 1).measure(&[0], 0);
        assert!(!exact_unitary(&measured).unwrap());
    }

    #[test]
    fn measurement_choi_spectrum_is_two_ones() {
        let measured = Program::new("measure_q0", 1).measure(&[0], 0);
        let ch = choi(&measured).unwrap();
        let ev = ch.eigenvalues_descending().unwrap();
        assert_eq!(ev.len(), 4);
        assert!((ev[0] - 1.0).abs() < 1e-8, "{ev:?}");
        assert!((ev[1] - 1.0).abs() < 1e-8, "{ev:?}");
        assert!(ev[2].abs() < 1e-8 && ev[3].abs() < 1e-8, "{ev:?}");
    }

    #[test]
    fn unitary_choi_has_rank_one_spectrum() {
        let p = Program::new("two_gates", 2)
            .gate("H", &[0])
            .gate("CNOT", &[0, 1])
            .gate_p("Rz", &[0.7], &[1]);
        let ch = choi(&p).unwrap();
        let (top, second) = ch.top_two_eigenvalues().unwrap();
        assert!((top - 4.0).abs() < 1e-8, "top {top}");
        assert!(second.abs() < 1e-8, "second {second}");
    }

    #[test]
    fn choi_respects_register_cap() {
        let wide = Program::new("wide", 7).gate("H", &[0]);
        assert!(matches!(choi(&wide), Err(Error::DimensionTooLarge { .. })));
    }

    /// Deterministic random programs, gates only and with an injected
    /// measurement; both unitarity routes must agree on every one (the
    /// gates-only ones must also all be unitary).
    #[test]
    fn unitarity_routes_agree_on_random_programs() {
        let gates1 = ["H", "X", "Y", "Z", "S", "T"];
        let mut rng = Rng::new(77);
        for case in 0..20 {
            let mut p = Program::new(format!("rand_{case}"), 2);
            for _ in 0..6 {
                if rng.next_u64() % 3 == 0 {
                    let c = (rng.next_u64() % 2) as usize;
                    p = p.gate("CNOT", &[c, 1 - c]);
                } else {
                    let g = gates1[(rng.next_u64() % 6) as usize];
                    p = p.gate(g, &[(rng.next_u64() % 2) as usize]);
                }
            }
            assert!(exact_unitary(&p).unwrap(), "gates-only program {case}");
            let mutated = {
                let mut q = p.clone();
                q.name = format!("rand_{case}_measured");
                q.instructions.insert(
                    (rng.next_u64() as usize) % (q.instructions.len() + 1),
                    crate::circuit::Instruction::Measure {
                        targets: vec![(rng.next_u64() % 2) as usize],
                        slot: 0,
                    },
                );
                q
            };
            // Agreement is what matters here; exact_unitary errors on a
            // route disagreement. A lone mid-circuit measurement on this
            // gate set is never unitary.
            assert!(!exact_unitary(&mutated).unwrap(), "measured program {case}");
        }
    }
}
