//! Input-state preparation circuits.
//!
//! Three families, all emitted as gate-only [`Program`]s on an `n`-qubit
//! register (qubit 0 = most significant bit):
//!
//! - **Pauli-eigenstate products** ([`pauli_prep`]): one digit 0..=5 per
//!   qubit selects |0>, |1>, |+>, |->, |+i>, |-i>. These 6^n product states
//!   span the input space scanned by the equivalence checkers.
//! - **Computational basis states** ([`basis_prep`]).
//! - **Two-state superpositions** ([`superpos_prep`]):
//!   (|m> ± |n2>)/sqrt(2), used by the unitarity checkers.

use crate::circuit::Program;
use crate::qnum::StateVector;
use crate::sim::{run_deterministic, CompiledProgram, Rng};
use crate::{Error, Result};

/// Size of the per-qubit preparation alphabet.
pub const PAULI_DIGITS: u8 = 6;

/// Human-readable label of one preparation digit.
const DIGIT_NAMES: [&str; 6] = ["0", "1", "+", "-", "+i", "-i"];

fn check_digits(digits: &[u8]) -> Result<()> {
    if digits.is_empty() {
        return Err(Error::InvalidInput("empty preparation index".into()));
    }
    if let Some(&d) = digits.iter().find(|&&d| d >= PAULI_DIGITS) {
        return Err(Error::InvalidInput(format!(
            "preparation digit {d} out of range 0..={}",
            PAULI_DIGITS - 1
        )));
    }
    Ok(())
}

/// Preparation circuit for the Pauli-eigenstate product selected by `digits`
/// (digit i acts on qubit i): 0 -> |0>, 1 -> |1>, 2 -> |+>, 3 -> |->,
/// 4 -> |+i>, 5 -> |-i>.
pub fn pauli_prep(digits: &[u8]) -> Result<Program> {
    check_digits(digits)?;
    let label: String = digits.iter().map(|d| DIGIT_NAMES[*d as usize]).collect::<Vec<_>>().join("");
    let mut p = Program::new(format!("pauli_prep_{label}"), digits.len());
    for (q, &d) in digits.iter().enumerate() {
        p = match d {
            0 => p,
            1 => p.gate("X", &[q]),
            2 => p.gate("H", &[q]),
            3 => p.gate("X", &[q]).gate("H", &[q]),
            4 => p.gate("H", &[q]).gate("S", &[q]),
            5 => p.gate("H", &[q]).gate("Sdg", &[q]),
            _ => unreachable!("digits validated"),
        };
    }
    Ok(p)
}

/// Adjoint of [`pauli_prep`] (maps the product state back to |0..0>).
pub fn pauli_prep_inverse(digits: &[u8]) -> Result<Program> {
    pauli_prep(digits)?.inverse()
}

/// The product state itself.
pub fn pauli_state(digits: &[u8]) -> Result<StateVector> {
    let p = pauli_prep(digits)?;
    let cp = CompiledProgram::compile(&p)?;
    run_deterministic(&cp, &StateVector::zero_state(digits.len())?)
}

/// Draw one preparation digit per qubit (`next_u64() % 6`, qubit order).
pub fn random_pauli_index(n: usize, rng: &mut Rng) -> Vec<u8> {
    (0..n).map(|_| (rng.next_u64() % PAULI_DIGITS as u64) as u8).collect()
}

/// Number of distinct Pauli-product preparations on `n` qubits (6^n).
pub fn pauli_index_count(n: usize) -> u64 {
    (PAULI_DIGITS as u64).pow(n as u32)
}

/// Decode a lexicographic ordinal (0-based) into a preparation index; digit
/// for qubit n-1 varies fastest.
pub fn pauli_index_from_ordinal(n: usize, mut ordinal: u64) -> Vec<u8> {
    let mut digits = vec![0u8; n];
    for q in (0..n).rev() {
        digits[q] = (ordinal % PAULI_DIGITS as u64) as u8;
        ordinal /= PAULI_DIGITS as u64;
    }
    digits
}

/// All 6^n preparation indices in lexicographic order.
pub fn all_pauli_indices(n: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..pauli_index_count(n)).map(move |ord| pauli_index_from_ordinal(n, ord))
}

/// Preparation circuit for the basis state |m> (X on each 1-bit of `m`).
pub fn basis_prep(n: usize, m: u64) -> Result<Program> {
    if n == 0 || (n < 64 && m >> n != 0) {
        return Err(Error::InvalidInput(format!(
            "basis state {m} does not fit an {n}-qubit register"
        )));
    }
    let mut p = Program::new(format!("basis_prep_{m}_{n}q"), n);
    for q in 0..n {
        if m >> (n - 1 - q) & 1 == 1 {
            p = p.gate("X", &[q]);
        }
    }
    Ok(p)
}

/// Uniformly random basis label on `n` qubits (one `next_u64`, masked).
pub fn random_basis_state(n: usize, rng: &mut Rng) -> u64 {
    rng.next_u64() & ((1u64 << n) - 1)
}

/// Relative sign of a two-state superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Preparation circuit for (|m> + sign|n2>)/sqrt(2), m != n2.
///
/// Ladder: X on each bit where m and n2 agree on 1; H (then Z when the sign
/// is minus) on the first qubit where they differ; CNOT fan-out from that
/// qubit to the remaining differing qubits; X on each differing qubit where
/// the branch member carrying bit 0 at the fan-out qubit has bit 1. At most
/// 2n+2 gates.
///
/// The state is exact, except that when sign = minus and m itself carries
/// bit 1 at the fan-out qubit the produced vector is -(|m> - |n2>)/sqrt(2):
/// the same state up to a global phase, hence the same density operator —
/// all downstream use is density-level.
pub fn superpos_prep(n: usize, m: u64, n2: u64, sign: Sign) -> Result<Program> {
    let fits = |v: u64| n >= 64 || v >> n == 0;
    if n == 0 || !fits(m) || !fits(n2) {
        return Err(Error::InvalidInput(format!(
            "superposition members {m}, {n2} do not fit an {n}-qubit register"
        )));
    }
    if m == n2 {
        return Err(Error::InvalidInput(format!(
            "superposition members must differ, both are {m}"
        )));
    }
    let bit = |v: u64, q: usize| v >> (n - 1 - q) & 1;
    let q_star = (0..n).find(|&q| bit(m, q) != bit(n2, q)).expect("m != n2");
    // The member that carries bit 0 at the fan-out qubit labels branch 0.
    let w0 = if bit(m, q_star) == 0 { m } else { n2 };

    let mut p = Program::new(format!("superpos_prep_{m}{sign}{n2}_{n}q"), n);
    for q in 0..n {
        if bit(m, q) == 1 && bit(n2, q) == 1 {
            p = p.gate("X", &[q]);
        }
    }
    p = p.gate("H", &[q_star]);
    if sign == Sign::Minus {
        p = p.gate("Z", &[q_star]);
    }
    for q in 0..n {
        if q != q_star && bit(m, q) != bit(n2, q) {
            p = p.gate("CNOT", &[q_star, q]);
        }
    }
    for q in 0..n {
        if bit(m, q) != bit(n2, q) && bit(w0, q) == 1 {
            p = p.gate("X", &[q]);
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::Complex;
    use crate::circuit::compose;
    use crate::qnum::{CMatrix, TOL_GATE, TOL_NORM};

    fn state_of(p: &Program) -> StateVector {
        run_deterministic(
            &CompiledProgram::compile(p).unwrap(),
            &StateVector::zero_state(p.n_qubits).unwrap(),
        )
        .unwrap()
    }

    fn assert_state(got: &StateVector, want: &[Complex], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.as_slice().iter().zip(want) {
            assert!((g - w).norm() < tol, "state mismatch: got {got:?}, want {want:?}");
        }
    }

    const R: fn(f64) -> Complex = |x| Complex::new(x, 0.0);
    const I: fn(f64) -> Complex = |x| Complex::new(0.0, x);

    #[test]
    fn all_zero_digits_prepare_ground_state() {
        let s = pauli_state(&[0, 0]).unwrap();
        assert_state(&s, &[R(1.0), R(0.0), R(0.0), R(0.0)], TOL_GATE);
    }

    #[test]
    fn mixed_digits_prepare_the_expected_product() {
        // |1> (x) |+> (x) |->
        let s = pauli_state(&[1, 2, 3]).unwrap();
        let h = 0.5;
        let want = [
            R(0.0), R(0.0), R(0.0), R(0.0),
            R(h), R(-h), R(h), R(-h),
        ];
        assert_state(&s, &want, TOL_GATE);
    }

    #[test]
    fn imaginary_digits_prepare_circular_states() {
        let s4 = pauli_state(&[4]).unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert_state(&s4, &[R(inv_sqrt2), I(inv_sqrt2)], TOL_GATE);
        let s5 = pauli_state(&[5]).unwrap();
        assert_state(&s5, &[R(inv_sqrt2), I(-inv_sqrt2)], TOL_GATE);
    }

    #[test]
    fn prep_digits_are_validated() {
        assert!(pauli_prep(&[]).is_err());
        assert!(pauli_prep(&[6]).is_err());
    }

    #[test]
    fn prep_then_inverse_is_identity_for_random_indices() {
        let mut rng = Rng::new(31);
        for _ in 0..20 {
            let k = random_pauli_index(3, &mut rng);
            let round_trip = compose(&pauli_prep(&k).unwrap(), &pauli_prep_inverse(&k).unwrap())
                .unwrap()
                .to_unitary()
                .unwrap();
            assert!(
                round_trip.max_abs_diff(&CMatrix::identity(8)) < 1e-12,
                "prep/unprep of {k:?} is not the identity"
            );
        }
    }

    #[test]
    fn ordinal_enumeration_is_lexicographic_and_complete() {
        assert_eq!(pauli_index_count(2), 36);
        let all: Vec<Vec<u8>> = all_pauli_indices(2).collect();
        assert_eq!(all.len(), 36);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[6], vec![1, 0]);
        assert_eq!(all[35], vec![5, 5]);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, all, "enumeration must be sorted and duplicate-free");
    }

    #[test]
    fn random_indices_use_the_documented_draw() {
        let mut rng = Rng::new(0);
        let k = random_pauli_index(3, &mut rng);
        let mut check = Rng::new(0);
        let want: Vec<u8> = (0..3).map(|_| (check.next_u64() % 6) as u8).collect();
        assert_eq!(k, want);
    }

    #[test]
    fn basis_prep_places_ones_msb_first() {
        let s = state_of(&basis_prep(3, 5).unwrap());
        let mut want = vec![R(0.0); 8];
        want[5] = R(1.0);
        assert_state(&s, &want, TOL_GATE);
        assert!(basis_prep(2, 4).is_err());
    }

    #[test]
    fn superpos_of_zero_and_three_matches_bell_states() {
        let plus = state_of(&superpos_prep(2, 0, 3, Sign::Plus).unwrap());
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert_state(&plus, &[R(inv_sqrt2), R(0.0), R(0.0), R(inv_sqrt2)], TOL_GATE);
        let minus = state_of(&superpos_prep(2, 0, 3, Sign::Minus).unwrap());
        assert_state(&minus, &[R(inv_sqrt2), R(0.0), R(0.0), R(-inv_sqrt2)], TOL_GATE);
    }

    #[test]
    fn single_qubit_superpositions_reduce_to_plus_minus() {
        let plus = state_of(&superpos_prep(1, 0, 1, Sign::Plus).unwrap());
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert_state(&plus, &[R(inv_sqrt2), R(inv_sqrt2)], TOL_GATE);
        let minus = state_of(&superpos_prep(1, 0, 1, Sign::Minus).unwrap());
        assert_state(&minus, &[R(inv_sqrt2), R(-inv_sqrt2)], TOL_GATE);
    }

    #[test]
    fn superpos_handles_shared_one_bits() {
        // m=0b101, n2=0b110: qubit 0 shared at 1, qubits 1 and 2 differ.
        let s = state_of(&superpos_prep(3, 0b101, 0b110, Sign::Plus).unwrap());
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut want = vec![R(0.0); 8];
        want[0b101] = R(inv_sqrt2);
        want[0b110] = R(inv_sqrt2);
        assert_state(&s, &want, TOL_GATE);
    }

    #[test]
    fn superpos_signs_are_orthogonal_for_random_pairs() {
        let mut rng = Rng::new(77);
        let mut checked = 0;
        while checked < 20 {
            let n = 1 + (rng.next_u64() % 4) as usize;
            let m = random_basis_state(n, &mut rng);
            let n2 = random_basis_state(n, &mut rng);
            if m == n2 {
                continue;
            }
            let plus = state_of(&superpos_prep(n, m, n2, Sign::Plus).unwrap());
            let minus = state_of(&superpos_prep(n, m, n2, Sign::Minus).unwrap());
            let ip = plus.inner(&minus).unwrap();
            assert!(
                ip.norm() < TOL_NORM,
                "(|{m}>+|{n2}>) vs (|{m}>-|{n2}>) overlap {ip}"
            );
            // Both are normalized pure states spanning |m>,|n2> only.
            for (idx, amp) in plus.as_slice().iter().enumerate() {
                if idx as u64 != m && idx as u64 != n2 {
                    assert!(amp.norm() < TOL_NORM);
                }
            }
            checked += 1;
        }
    }

    #[test]
    fn superpos_respects_the_gate_budget() {
        let mut rng = Rng::new(5);
        for _ in 0..50 {
            let n = 1 + (rng.next_u64() % 6) as usize;
            let m = random_basis_state(n, &mut rng);
            let n2 = random_basis_state(n, &mut rng);
            if m == n2 {
                continue;
            }
            let p = superpos_prep(n, m, n2, Sign::Minus).unwrap();
            assert!(
                p.instructions.len() <= 2 * n + 2,
                "{} gates for n={n}",
                p.instructions.len()
            );
        }
    }

    #[test]
    fn superpos_global_phase_caveat_only_flips_sign() {
        // m carries bit 1 at the fan-out qubit: the built vector is the
        // negative of (|m> - |n2>)/sqrt(2); densities agree exactly.
        let m = 0b10;
        let n2 = 0b01;
        let s = state_of(&superpos_prep(2, m, n2, Sign::Minus).unwrap());
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut want = vec![R(0.0); 4];
        want[m as usize] = R(-inv_sqrt2);
        want[n2 as usize] = R(inv_sqrt2);
        assert_state(&s, &want, TOL_GATE);
    }

    #[test]
    fn superpos_rejects_bad_members() {
        assert!(superpos_prep(2, 1, 1, Sign::Plus).is_err());
        assert!(superpos_prep(2, 0, 4, Sign::Plus).is_err());
    }
}
