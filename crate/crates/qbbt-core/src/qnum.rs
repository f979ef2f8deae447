//! Complex dense linear algebra sized for few-qubit quantum work.
//!
//! Conventions used across the crate:
//!
//! - **Qubit 0 is the most significant bit** of a basis-state label: for an
//!   `n`-qubit register, basis index `x` assigns qubit `q` the bit
//!   `(x >> (n-1-q)) & 1`.
//! - Matrices are dense, row-major, over `f64` complex numbers.
//! - Multi-qubit gate matrices order their block index the same way: for a
//!   gate on targets `[a, b]`, `a` is the more significant block bit.
//!
//! Tolerances: state normalization `1e-9`, gate unitarity `1e-12`,
//! oracle-grade Hermiticity/positivity `1e-8`. Registers are capped at
//! 14 qubits (`MAX_DIM = 2^14`).

use crate::{Error, Result};

/// Complex scalar used everywhere in the crate.
pub type Complex = num_complex::Complex64;

/// Largest supported register: 14 qubits.
pub const MAX_QUBITS: usize = 14;
/// Largest supported vector length / matrix side (`2^14`).
pub const MAX_DIM: usize = 1 << MAX_QUBITS;

/// Normalization tolerance for state vectors and density-matrix traces.
pub const TOL_NORM: f64 = 1e-9;
/// Unitarity tolerance for gate matrices.
pub const TOL_GATE: f64 = 1e-12;
/// Tolerance for oracle-grade decisions (overlaps, positivity, rank tests).
pub const TOL_ORACLE: f64 = 1e-8;

#[inline]
fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl CMatrix {
    /// Builds a matrix from row-major data, checking shape, the `MAX_DIM`
    /// cap, and entry finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ShapeMismatch("matrix must be non-empty".into()));
        }
        if rows > MAX_DIM || cols > MAX_DIM {
            return Err(Error::DimensionTooLarge {
                what: "matrix side",
                got: rows.max(cols),
                limit: MAX_DIM,
            });
        }
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        let m = CMatrix { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex::ZERO; rows * cols],
        }
    }

    /// Identity matrix of side `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex::ONE;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex) {
        self.data[r * self.cols + c] = v;
    }

    /// Row-major entry slice.
    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex] {
        &mut self.data
    }

    fn check_finite(&self) -> Result<()> {
        if self
            .data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            Ok(())
        } else {
            Err(Error::NumericalInvariant(
                "matrix contains a non-finite entry".into(),
            ))
        }
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex::ZERO {
                    continue;
                }
                let row = k * other.cols;
                let orow = i * other.cols;
                for j in 0..other.cols {
                    out.data[orow + j] += a * other.data[row + j];
                }
            }
        }
        Ok(out)
    }

    /// Entry-wise sum.
    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip(other, |a, b| a + b)
    }

    /// Entry-wise difference.
    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &CMatrix, f: impl Fn(Complex, Complex) -> Complex) -> Result<CMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Scalar multiple.
    pub fn scale(&self, s: Complex) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for cix in 0..self.cols {
                out.data[cix * self.rows + r] = self.get(r, cix).conj();
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other`; `self` supplies the more
    /// significant index bits, matching the qubit-0-is-MSB convention.
    pub fn tensor(&self, other: &CMatrix) -> Result<CMatrix> {
        let rows = self
            .rows
            .checked_mul(other.rows)
            .filter(|&r| r <= MAX_DIM)
            .ok_or(Error::DimensionTooLarge {
                what: "tensor product rows",
                got: usize::MAX,
                limit: MAX_DIM,
            })?;
        let cols = self
            .cols
            .checked_mul(other.cols)
            .filter(|&c| c <= MAX_DIM)
            .ok_or(Error::DimensionTooLarge {
                what: "tensor product cols",
                got: usize::MAX,
                limit: MAX_DIM,
            })?;
        let mut out = CMatrix::zeros(rows, cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.get(r1, c1);
                if a == Complex::ZERO {
                    continue;
                }
                for r2 in 0..other.rows {
                    let orow = (r1 * other.rows + r2) * cols + c1 * other.cols;
                    let irow = r2 * other.cols;
                    for c2 in 0..other.cols {
                        out.data[orow + c2] = a * other.data[irow + c2];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Trace (square matrices).
    pub fn trace(&self) -> Complex {
        debug_assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// `tr(self^dagger * other)`, the Frobenius inner product.
    pub fn inner_frobenius(&self, other: &CMatrix) -> Complex {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a.conj() * b)
            .sum()
    }

    /// Largest entry-wise absolute difference.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// True when `self^dagger * self` is the identity within `tol`
    /// (entry-wise).
    pub fn is_unitary(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let n = self.rows;
        for i in 0..n {
            for j in 0..n {
                // (U^dagger U)_{ij} = sum_k conj(U_{ki}) U_{kj}
                let mut acc = Complex::ZERO;
                for k in 0..n {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                let want = if i == j { Complex::ONE } else { Complex::ZERO };
                if (acc - want).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// True when `self` equals its conjugate transpose within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Pure `n`-qubit state: `2^n` amplitudes, unit norm within [`TOL_NORM`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex>,
}

impl StateVector {
    /// Validates length (power of two, within the qubit cap), finiteness,
    /// and unit norm.
    pub fn new(amps: Vec<Complex>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::ShapeMismatch(format!(
                "state length {len} is not a positive power of two"
            )));
        }
        if len > MAX_DIM {
            return Err(Error::DimensionTooLarge {
                what: "state length",
                got: len,
                limit: MAX_DIM,
            });
        }
        if !amps.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NumericalInvariant(
                "state contains a non-finite amplitude".into(),
            ));
        }
        let norm2: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm2.sqrt() - 1.0).abs() > TOL_NORM {
            return Err(Error::NumericalInvariant(format!(
                "state norm {} differs from 1 by more than {TOL_NORM}",
                norm2.sqrt()
            )));
        }
        Ok(StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// `|0...0>` on `n` qubits.
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::DimensionTooLarge {
                what: "qubit count",
                got: n,
                limit: MAX_QUBITS,
            });
        }
        let mut amps = vec![Complex::ZERO; 1 << n];
        amps[0] = Complex::ONE;
        Ok(StateVector { n_qubits: n, amps })
    }

    /// Basis state `|m>` on `n` qubits (qubit 0 = most significant bit).
    pub fn basis_state(n: usize, m: u64) -> Result<Self> {
        let mut sv = StateVector::zero_state(n)?;
        if m >= (1u64 << n) {
            return Err(Error::InvalidInput(format!(
                "basis index {m} out of range for {n} qubits"
            )));
        }
        sv.amps[0] = Complex::ZERO;
        sv.amps[m as usize] = Complex::ONE;
        Ok(sv)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.amps
    }

    /// Internal constructor for simulator output that is known normalized.
    pub(crate) fn from_amps_unchecked(n_qubits: usize, amps: Vec<Complex>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        StateVector { n_qubits, amps }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch(format!(
                "state lengths {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(&a, &b)| a.conj() * b)
            .sum())
    }

    /// Rank-one density operator `|self><self|`.
    pub fn to_density(&self) -> DensityMatrix {
        let d = self.len();
        let mut m = CMatrix::zeros(d, d);
        for r in 0..d {
            if self.amps[r] == Complex::ZERO {
                continue;
            }
            for cix in 0..d {
                m.data[r * d + cix] = self.amps[r] * self.amps[cix].conj();
            }
        }
        DensityMatrix {
            n_qubits: self.n_qubits,
            mat: m,
        }
    }
}

/// Mixed `n`-qubit state: `2^n x 2^n`, unit trace, Hermitian, positive
/// semidefinite.
///
/// Construction always checks trace (within [`TOL_NORM`]), Hermiticity
/// (within [`TOL_NORM`]), finiteness, and the cheap positivity necessary
/// conditions (diagonal `>= -1e-8`, nonnegative 2x2 principal minors within
/// tolerance). The full spectral positivity check is [`Self::validate_psd`],
/// used by tests and oracle boundaries; running an `O(d^3)` eigensolve on
/// every construction would dominate the oracle sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.rows() != mat.cols() {
            return Err(Error::ShapeMismatch(format!(
                "density matrix must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let d = mat.rows();
        if !d.is_power_of_two() || d > MAX_DIM {
            return Err(Error::DimensionTooLarge {
                what: "density matrix side",
                got: d,
                limit: MAX_DIM,
            });
        }
        mat.check_finite()?;
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TOL_NORM || tr.im.abs() > TOL_NORM {
            return Err(Error::NumericalInvariant(format!(
                "density matrix trace {tr} differs from 1 beyond {TOL_NORM}"
            )));
        }
        if !mat.is_hermitian(TOL_NORM) {
            return Err(Error::NumericalInvariant(
                "density matrix is not Hermitian within 1e-9".into(),
            ));
        }
        for i in 0..d {
            let pii = mat.get(i, i).re;
            if pii < -TOL_ORACLE {
                return Err(Error::NumericalInvariant(format!(
                    "density matrix diagonal entry {i} is {pii} < -{TOL_ORACLE}"
                )));
            }
        }
        // 2x2 principal minors: |rho_ij|^2 <= rho_ii rho_jj (+ tolerance).
        for i in 0..d {
            let pii = mat.get(i, i).re.max(0.0);
            for j in (i + 1)..d {
                let pjj = mat.get(j, j).re.max(0.0);
                if mat.get(i, j).norm_sqr() > pii * pjj + TOL_ORACLE {
                    return Err(Error::NumericalInvariant(format!(
                        "density matrix 2x2 minor ({i},{j}) is negative beyond tolerance"
                    )));
                }
            }
        }
        Ok(DensityMatrix {
            n_qubits: d.trailing_zeros() as usize,
            mat,
        })
    }

    /// Full spectral positivity check: smallest eigenvalue `>= -1e-8`.
    pub fn validate_psd(&self) -> Result<()> {
        let eigs = hermitian_eigenvalues(&self.mat)?;
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -TOL_ORACLE {
            return Err(Error::NumericalInvariant(format!(
                "density matrix smallest eigenvalue {min} < -{TOL_ORACLE}"
            )));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// `tr(rho^2)`; real by Hermiticity.
    pub fn purity(&self) -> f64 {
        self.mat.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Maximally mixed state `I/2^n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::DimensionTooLarge {
                what: "qubit count",
                got: n,
                limit: MAX_QUBITS,
            });
        }
        let d = 1usize << n;
        let m = CMatrix::identity(d).scale(c(1.0 / d as f64, 0.0));
        Ok(DensityMatrix { n_qubits: n, mat: m })
    }
}

// ---------------------------------------------------------------------------
// Standard gates
// ---------------------------------------------------------------------------

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Names in the fixed gate set, in canonical order.
pub const GATE_NAMES: &[&str] = &[
    "I", "X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg", "Rx", "Ry", "Rz", "Phase", "CNOT", "CZ",
    "SWAP",
];

/// Number of target qubits a named gate acts on, or an error for unknown
/// names.
pub fn gate_arity(name: &str) -> Result<usize> {
    match name {
        "I" | "X" | "Y" | "Z" | "H" | "S" | "Sdg" | "T" | "Tdg" | "Rx" | "Ry" | "Rz" | "Phase" => {
            Ok(1)
        }
        "CNOT" | "CZ" | "SWAP" => Ok(2),
        _ => Err(Error::InvalidProgram(format!("unknown gate name {name:?}"))),
    }
}

/// Number of `f64` parameters a named gate takes.
pub fn gate_param_count(name: &str) -> Result<usize> {
    match name {
        "Rx" | "Ry" | "Rz" | "Phase" => Ok(1),
        _ => {
            gate_arity(name)?;
            Ok(0)
        }
    }
}

/// Matrix of a named gate. Every returned matrix is checked unitary within
/// [`TOL_GATE`]; parameters must be finite and match [`gate_param_count`].
///
/// Two-qubit matrices index their basis as `|t0 t1>` with `targets[0]` the
/// more significant bit; for `CNOT`, `targets[0]` is the control.
pub fn std_gate(name: &str, params: &[f64]) -> Result<CMatrix> {
    let want = gate_param_count(name)?;
    if params.len() != want {
        return Err(Error::InvalidProgram(format!(
            "gate {name} takes {want} parameter(s), got {}",
            params.len()
        )));
    }
    if !params.iter().all(|p| p.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "gate {name} given a non-finite parameter"
        )));
    }
    let h = FRAC_1_SQRT_2;
    let m = match name {
        "I" => CMatrix::new(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)])?,
        "X" => CMatrix::new(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])?,
        "Y" => CMatrix::new(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])?,
        "Z" => CMatrix::new(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])?,
        "H" => CMatrix::new(2, 2, vec![c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)])?,
        "S" => CMatrix::new(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)])?,
        "Sdg" => CMatrix::new(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., -1.)])?,
        "T" => CMatrix::new(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(h, h)])?,
        "Tdg" => CMatrix::new(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(h, -h)])?,
        "Rx" => {
            let (s2, c2) = (params[0] / 2.0).sin_cos();
            CMatrix::new(
                2,
                2,
                vec![c(c2, 0.), c(0., -s2), c(0., -s2), c(c2, 0.)],
            )?
        }
        "Ry" => {
            let (s2, c2) = (params[0] / 2.0).sin_cos();
            CMatrix::new(2, 2, vec![c(c2, 0.), c(-s2, 0.), c(s2, 0.), c(c2, 0.)])?
        }
        "Rz" => {
            let half = params[0] / 2.0;
            CMatrix::new(
                2,
                2,
                vec![
                    Complex::from_polar(1.0, -half),
                    c(0., 0.),
                    c(0., 0.),
                    Complex::from_polar(1.0, half),
                ],
            )?
        }
        "Phase" => CMatrix::new(
            2,
            2,
            vec![
                c(1., 0.),
                c(0., 0.),
                c(0., 0.),
                Complex::from_polar(1.0, params[0]),
            ],
        )?,
        "CNOT" => {
            let mut m = CMatrix::zeros(4, 4);
            m.set(0, 0, Complex::ONE);
            m.set(1, 1, Complex::ONE);
            m.set(2, 3, Complex::ONE);
            m.set(3, 2, Complex::ONE);
            m
        }
        "CZ" => {
            let mut m = CMatrix::identity(4);
            m.set(3, 3, -Complex::ONE);
            m
        }
        "SWAP" => {
            let mut m = CMatrix::zeros(4, 4);
            m.set(0, 0, Complex::ONE);
            m.set(1, 2, Complex::ONE);
            m.set(2, 1, Complex::ONE);
            m.set(3, 3, Complex::ONE);
            m
        }
        _ => unreachable!("gate_param_count validated the name"),
    };
    if !m.is_unitary(TOL_GATE) {
        return Err(Error::NumericalInvariant(format!(
            "gate {name} matrix failed the unitarity check"
        )));
    }
    Ok(m)
}

/// Single-qubit Pauli matrix `sigma_i` for `i in 0..=3`
/// (`sigma_0 = I`, `sigma_1 = X`, `sigma_2 = Y`, `sigma_3 = Z`).
pub fn pauli(i: usize) -> Result<CMatrix> {
    match i {
        0 => std_gate("I", &[]),
        1 => std_gate("X", &[]),
        2 => std_gate("Y", &[]),
        3 => std_gate("Z", &[]),
        _ => Err(Error::InvalidInput(format!(
            "Pauli index {i} out of range 0..=3"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Hermitian eigenvalues (cyclic complex Jacobi) and power iteration
// ---------------------------------------------------------------------------

/// All eigenvalues of a Hermitian matrix via the cyclic complex Jacobi
/// method. Intended for oracle-scale matrices; errors beyond side 1024.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    if a.rows() != a.cols() {
        return Err(Error::ShapeMismatch(
            "eigenvalues need a square matrix".into(),
        ));
    }
    if !a.is_hermitian(1e-7) {
        return Err(Error::InvalidInput(
            "eigenvalue routine requires a Hermitian matrix".into(),
        ));
    }
    let n = a.rows();
    if n > 1024 {
        return Err(Error::DimensionTooLarge {
            what: "Jacobi eigensolve side",
            got: n,
            limit: 1024,
        });
    }
    let mut m = a.clone();
    // Symmetrize exactly so rounding in the input cannot bias the sweeps.
    for i in 0..n {
        let d = m.get(i, i);
        m.set(i, i, c(d.re, 0.0));
        for j in (i + 1)..n {
            let avg = (m.get(i, j) + m.get(j, i).conj()) * c(0.5, 0.0);
            m.set(i, j, avg);
            m.set(j, i, avg.conj());
        }
    }
    let scale: f64 = m.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>();
    let stop = (scale * 1e-28).max(1e-300);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q).norm_sqr();
            }
        }
        if 2.0 * off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phi = apq.arg();
                let app = m.get(p, p).re;
                let aqq = m.get(q, q).re;
                // Real Jacobi angle for the phase-aligned 2x2 block.
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // Unitary rotation G: column ops then matching row ops.
                // G_pp = cs, G_pq = sn*e^{i phi}, G_qp = -sn*e^{-i phi},
                // G_qq = cs; updates below apply m <- G^dagger m G.
                let eip = Complex::from_polar(1.0, phi);
                for i in 0..n {
                    let aip = m.get(i, p);
                    let aiq = m.get(i, q);
                    m.set(i, p, aip * cs - aiq * sn * eip.conj());
                    m.set(i, q, aip * sn * eip + aiq * cs);
                }
                for j in 0..n {
                    let apj = m.get(p, j);
                    let aqj = m.get(q, j);
                    m.set(p, j, apj * cs - aqj * sn * eip);
                    m.set(q, j, apj * sn * eip.conj() + aqj * cs);
                }
            }
        }
    }
    Ok((0..n).map(|i| m.get(i, i).re).collect())
}

/// Largest eigenvalue (and its eigenvector) of a Hermitian PSD matrix by
/// power iteration with a deterministic start vector.
///
/// Convergence uses the Rayleigh quotient; for the Choi matrices this crate
/// feeds it, the dominant gap is macroscopic and iteration counts are tiny.
pub fn top_eigenpair_hermitian(a: &CMatrix, deflate: Option<(&[Complex], f64)>) -> (f64, Vec<Complex>) {
    let n = a.rows();
    // Deterministic, non-degenerate start: varying magnitudes and phases.
    let mut v: Vec<Complex> = (0..n)
        .map(|i| c(1.0 + (i as f64 * 0.7).sin() * 0.3, (i as f64 * 0.3).cos() * 0.2))
        .collect();
    normalize(&mut v);
    let mut lambda = 0.0f64;
    let mut w = vec![Complex::ZERO; n];
    for _iter in 0..20_000 {
        matvec(a, &v, &mut w);
        if let Some((u, lam)) = deflate {
            // w -= lam * <u, v> * u   (exact deflation of a known eigenpair)
            let proj: Complex = u.iter().zip(&v).map(|(&ui, &vi)| ui.conj() * vi).sum();
            let f = proj * c(lam, 0.0);
            for (wi, &ui) in w.iter_mut().zip(u) {
                *wi -= f * ui;
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-14 {
            // Operator annihilates the probe: dominant eigenvalue ~ 0.
            return (0.0, v);
        }
        let new_lambda: f64 = v
            .iter()
            .zip(&w)
            .map(|(&vi, &wi)| (vi.conj() * wi).re)
            .sum();
        for (vi, &wi) in v.iter_mut().zip(&w) {
            *vi = wi / c(norm, 0.0);
        }
        if (new_lambda - lambda).abs() <= 1e-13 * new_lambda.abs().max(1.0) {
            return (new_lambda, v);
        }
        lambda = new_lambda;
    }
    (lambda, v)
}

fn matvec(a: &CMatrix, v: &[Complex], out: &mut [Complex]) {
    let n = a.rows();
    for (i, o) in out.iter_mut().enumerate() {
        let row = i * n;
        let mut acc = Complex::ZERO;
        for (j, &vj) in v.iter().enumerate() {
            acc += a.as_slice()[row + j] * vj;
        }
        *o = acc;
    }
}

fn normalize(v: &mut [Complex]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= c(norm, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn gate_matrices_match_definitions() {
        // Entries read straight off the standard definitions.
        let x = std_gate("X", &[]).unwrap();
        assert_eq!(x.get(0, 1), Complex::ONE);
        assert_eq!(x.get(0, 0), Complex::ZERO);
        let z = std_gate("Z", &[]).unwrap();
        assert_eq!(z.get(1, 1), -Complex::ONE);
        let s = std_gate("S", &[]).unwrap();
        assert_eq!(s.get(1, 1), c(0., 1.));
        let h = std_gate("H", &[]).unwrap();
        assert_close(h.get(1, 1).re, -FRAC_1_SQRT_2, 1e-15);
        let cnot = std_gate("CNOT", &[]).unwrap();
        assert_eq!(cnot.get(2, 3), Complex::ONE);
        assert_eq!(cnot.get(3, 2), Complex::ONE);
        assert_eq!(cnot.get(2, 2), Complex::ZERO);
    }

    #[test]
    fn every_gate_is_unitary_within_1e12() {
        for name in GATE_NAMES {
            let params: Vec<f64> = match gate_param_count(name).unwrap() {
                0 => vec![],
                1 => vec![0.731],
                _ => unreachable!(),
            };
            let g = std_gate(name, &params).unwrap();
            assert!(g.is_unitary(TOL_GATE), "{name} not unitary");
        }
    }

    #[test]
    fn gate_rejects_bad_params() {
        assert!(std_gate("Rx", &[]).is_err());
        assert!(std_gate("H", &[0.1]).is_err());
        assert!(std_gate("Rz", &[f64::NAN]).is_err());
        assert!(std_gate("Q", &[]).is_err());
    }

    #[test]
    fn pauli_set_and_eigenstates() {
        // sigma_1 |+> = |+>, sigma_2 |+i> = |+i>, sigma_3 |0> = |0>.
        let h = FRAC_1_SQRT_2;
        let plus = vec![c(h, 0.), c(h, 0.)];
        let x = pauli(1).unwrap();
        for i in 0..2 {
            let out: Complex = (0..2).map(|j| x.get(i, j) * plus[j]).sum();
            assert!((out - plus[i]).norm() < 1e-15);
        }
        let plus_i = vec![c(h, 0.), c(0., h)];
        let y = pauli(2).unwrap();
        for i in 0..2 {
            let out: Complex = (0..2).map(|j| y.get(i, j) * plus_i[j]).sum();
            assert!((out - plus_i[i]).norm() < 1e-15);
        }
        assert!(pauli(4).is_err());
    }

    #[test]
    fn tensor_follows_msb_convention() {
        // (X tensor I) |00> = |10>: qubit 0 is the MSB, so the
        // left factor acts on it and basis index 0 maps to index 2.
        let x = std_gate("X", &[]).unwrap();
        let i2 = CMatrix::identity(2);
        let xi = x.tensor(&i2).unwrap();
        assert_eq!(xi.get(2, 0), Complex::ONE);
        assert_eq!(xi.get(0, 2), Complex::ONE);
        assert_eq!(xi.get(0, 0), Complex::ZERO);
    }

    #[test]
    fn dagger_and_products() {
        let s = std_gate("S", &[]).unwrap();
        let sdg = std_gate("Sdg", &[]).unwrap();
        assert!(s.dagger().max_abs_diff(&sdg) < 1e-15);
        let prod = s.mul(&sdg).unwrap();
        assert!(prod.max_abs_diff(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn state_vector_validation() {
        assert!(StateVector::new(vec![c(1., 0.), c(1., 0.)]).is_err());
        let ok = StateVector::new(vec![c(FRAC_1_SQRT_2, 0.), c(0., FRAC_1_SQRT_2)]).unwrap();
        assert_eq!(ok.n_qubits(), 1);
        assert!(StateVector::new(vec![c(1., 0.), c(0., 0.), c(0., 0.)]).is_err());
        let nan = StateVector::new(vec![c(f64::NAN, 0.), c(0., 0.)]);
        assert!(nan.is_err());
    }

    #[test]
    fn density_matrix_validation_and_purity() {
        // Purity of |0><0| is 1; of I/2 it is 1/2; trace checks
        // reject an unnormalized matrix.
        let rho = StateVector::zero_state(1).unwrap().to_density();
        assert_close(rho.purity(), 1.0, 1e-12);
        rho.validate_psd().unwrap();
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        assert_close(mixed.purity(), 0.5, 1e-12);
        let bad = CMatrix::identity(2);
        assert!(DensityMatrix::new(bad).is_err());
        // Non-PSD but trace-1 Hermitian with an off-diagonal exceeding the
        // 2x2 minor bound is rejected at construction.
        let m = CMatrix::new(
            2,
            2,
            vec![c(0.5, 0.), c(0.9, 0.), c(0.9, 0.), c(0.5, 0.)],
        )
        .unwrap();
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn jacobi_matches_known_spectra() {
        // Spectra computed by hand: Pauli X has {-1, +1}; the
        // projector |+><+| has {0, 1}; a diagonal matrix keeps its diagonal.
        let x = pauli(1).unwrap();
        let mut eig = hermitian_eigenvalues(&x).unwrap();
        eig.sort_by(f64::total_cmp);
        assert_close(eig[0], -1.0, 1e-12);
        assert_close(eig[1], 1.0, 1e-12);

        let m = CMatrix::new(
            2,
            2,
            vec![c(0.5, 0.), c(0.5, 0.), c(0.5, 0.), c(0.5, 0.)],
        )
        .unwrap();
        let mut eig = hermitian_eigenvalues(&m).unwrap();
        eig.sort_by(f64::total_cmp);
        assert_close(eig[0], 0.0, 1e-12);
        assert_close(eig[1], 1.0, 1e-12);

        // Complex Hermitian 2x2 [[1, i],[-i, 1]] has eigenvalues {0, 2}.
        let m = CMatrix::new(
            2,
            2,
            vec![c(1., 0.), c(0., 1.), c(0., -1.), c(1., 0.)],
        )
        .unwrap();
        let mut eig = hermitian_eigenvalues(&m).unwrap();
        eig.sort_by(f64::total_cmp);
        assert_close(eig[0], 0.0, 1e-12);
        assert_close(eig[1], 2.0, 1e-12);
    }

    #[test]
    fn power_iteration_agrees_with_jacobi() {
        // Random-ish Hermitian built from a fixed seedless recipe.
        let n = 6;
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let re = ((i * 7 + j * 3) as f64 * 0.37).sin();
                let im = ((i as f64) - (j as f64)) * 0.11;
                m.set(i, j, c(re, im));
            }
        }
        let herm = m.add(&m.dagger()).unwrap().scale(c(0.5, 0.0));
        let mut eig = hermitian_eigenvalues(&herm).unwrap();
        eig.sort_by(f64::total_cmp);
        // Shift to PSD so power iteration targets the top of the spectrum.
        let shift = -eig[0] + 1.0;
        let shifted = herm
            .add(&CMatrix::identity(n).scale(c(shift, 0.0)))
            .unwrap();
        let (top, v) = top_eigenpair_hermitian(&shifted, None);
        assert_close(top, eig[n - 1] + shift, 1e-9);
        let (second, _) = top_eigenpair_hermitian(&shifted, Some((&v, top)));
        assert_close(second, eig[n - 2] + shift, 1e-7);
    }

    #[test]
    fn dimension_caps_enforced() {
        let err = StateVector::zero_state(15);
        assert!(err.is_err());
        assert!(CMatrix::new(1 << 15, 1, vec![]).is_err());
    }
}
