//! Sparse qubit-space operators: ladder strings, shift operators and the
//! finite-difference stencils built from them.
//!
//! Basis states are indexed big-endian in the tensor product (the leftmost
//! factor is the most significant bit), which is the same as saying that
//! qubit 1 of a register is the least significant bit of the node index.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default absolute tolerance for entrywise comparisons.
pub const ENTRY_TOL: f64 = 1e-12;

/// A square complex matrix of dimension `2^q`, stored as a coordinate map.
///
/// Entries that are exactly zero are never stored.
#[derive(Clone, PartialEq)]
pub struct QubitOperator {
    num_qubits: usize,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl fmt::Debug for QubitOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QubitOperator")
            .field("num_qubits", &self.num_qubits)
            .field("nnz", &self.entries.len())
            .finish()
    }
}

impl QubitOperator {
    pub fn zero(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self::diagonal(num_qubits, |_| ONE)
    }

    pub fn diagonal(num_qubits: usize, f: impl Fn(usize) -> Complex64) -> Self {
        let mut op = Self::zero(num_qubits);
        for i in 0..(1usize << num_qubits) {
            op.insert(i, i, f(i));
        }
        op
    }

    /// Builds an operator from `(row, col, value)` triples, summing duplicates.
    ///
    /// Panics if an index is out of range.
    pub fn from_triples(
        num_qubits: usize,
        triples: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Self {
        let dim = 1usize << num_qubits;
        let mut op = Self::zero(num_qubits);
        for (r, c, v) in triples {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside {dim}x{dim}");
            op.accumulate(r, c, v);
        }
        op
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "{}x{} is not a 2^q square matrix",
                m.nrows(),
                m.ncols()
            )));
        }
        let q = dim.trailing_zeros() as usize;
        Ok(Self::from_triples(
            q,
            (0..dim)
                .flat_map(|r| (0..dim).map(move |c| (r, c)))
                .map(|(r, c)| (r, c, m[(r, c)])),
        ))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.num_qubits
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries.get(&(row, col)).copied().unwrap_or(ZERO)
    }

    /// Iterates stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.entries.iter().map(|(&(r, c), &v)| (r, c, v))
    }

    fn insert(&mut self, r: usize, c: usize, v: Complex64) {
        if v == ZERO {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    fn accumulate(&mut self, r: usize, c: usize, v: Complex64) {
        let cur = self.get(r, c);
        self.insert(r, c, cur + v);
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero(self.num_qubits);
        for (r, c, v) in self.iter() {
            out.insert(r, c, v * s);
        }
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        Self {
            num_qubits: self.num_qubits,
            entries: self.iter().map(|(r, c, v)| ((c, r), v.conj())).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`; `self` becomes the more significant factor.
    pub fn kron(&self, other: &Self) -> Self {
        let d2 = other.dim();
        let mut entries = BTreeMap::new();
        for (r1, c1, v1) in self.iter() {
            for (r2, c2, v2) in other.iter() {
                let v = v1 * v2;
                if v != ZERO {
                    entries.insert((r1 * d2 + r2, c1 * d2 + c2), v);
                }
            }
        }
        Self {
            num_qubits: self.num_qubits + other.num_qubits,
            entries,
        }
    }

    /// `self^{⊗k}`; the zero-fold power is the scalar 1 on zero qubits.
    pub fn tensor_power(&self, k: usize) -> Self {
        (0..k).fold(Self::identity(0), |acc, _| acc.kron(self))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        self.check_same(other);
        let mut rhs_rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); other.dim()];
        for (r, c, v) in other.iter() {
            rhs_rows[r].push((c, v));
        }
        let mut out = Self::zero(self.num_qubits);
        for (r, k, a) in self.iter() {
            for &(c, b) in &rhs_rows[k] {
                out.accumulate(r, c, a * b);
            }
        }
        out
    }

    /// Matrix power by repeated multiplication.
    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(self.num_qubits), |acc, _| acc.matmul(self))
    }

    /// `[self, other] = self·other − other·self`
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim(), "vector length does not match operator");
        let mut out = vec![ZERO; v.len()];
        for (r, c, a) in self.iter() {
            out[r] += a * v[c];
        }
        out
    }

    pub fn apply_real(&self, v: &[f64]) -> Vec<Complex64> {
        let cv: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.apply(&cv)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        let mut m = DMatrix::from_element(d, d, ZERO);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.check_same(other);
        (self - other)
            .iter()
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.num_qubits == other.num_qubits && self.max_abs_diff(other) <= tol
    }

    /// Largest entry of `|H − H†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Upper bound `sqrt(‖A‖₁ ‖A‖∞)` on the spectral norm (Schur test).
    pub fn norm_upper_bound(&self) -> f64 {
        let mut rows = vec![0.0; self.dim()];
        let mut cols = vec![0.0; self.dim()];
        for (r, c, v) in self.iter() {
            rows[r] += v.norm();
            cols[c] += v.norm();
        }
        let max = |xs: Vec<f64>| xs.into_iter().fold(0.0, f64::max);
        (max(rows) * max(cols)).sqrt()
    }

    /// Debug dump as `row,col,re,im` lines.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "row,col,re,im")?;
        for (r, c, v) in self.iter() {
            writeln!(w, "{r},{c},{:.16e},{:.16e}", v.re, v.im)?;
        }
        Ok(())
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(
            self.num_qubits, other.num_qubits,
            "operators act on different qubit counts"
        );
    }
}

impl Add for &QubitOperator {
    type Output = QubitOperator;

    fn add(self, rhs: &QubitOperator) -> QubitOperator {
        self.check_same(rhs);
        let mut out = self.clone();
        for (r, c, v) in rhs.iter() {
            out.accumulate(r, c, v);
        }
        out
    }
}

impl Sub for &QubitOperator {
    type Output = QubitOperator;

    fn sub(self, rhs: &QubitOperator) -> QubitOperator {
        self + &(-rhs)
    }
}

impl Neg for &QubitOperator {
    type Output = QubitOperator;

    fn neg(self) -> QubitOperator {
        self.scale_real(-1.0)
    }
}

impl Mul for &QubitOperator {
    type Output = QubitOperator;

    fn mul(self, rhs: &QubitOperator) -> QubitOperator {
        self.matmul(rhs)
    }
}

impl Mul<Complex64> for &QubitOperator {
    type Output = QubitOperator;

    fn mul(self, rhs: Complex64) -> QubitOperator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &QubitOperator {
    type Output = QubitOperator;

    fn mul(self, rhs: f64) -> QubitOperator {
        self.scale_real(rhs)
    }
}

/// Single-qubit building blocks.
pub mod sigma {
    use super::*;

    /// `|0⟩⟨1|`
    pub fn s01() -> QubitOperator {
        QubitOperator::from_triples(1, [(0, 1, ONE)])
    }

    /// `|1⟩⟨0|`
    pub fn s10() -> QubitOperator {
        QubitOperator::from_triples(1, [(1, 0, ONE)])
    }

    /// `|0⟩⟨0|`
    pub fn s00() -> QubitOperator {
        QubitOperator::from_triples(1, [(0, 0, ONE)])
    }

    /// `|1⟩⟨1|`
    pub fn s11() -> QubitOperator {
        QubitOperator::from_triples(1, [(1, 1, ONE)])
    }

    pub fn x() -> QubitOperator {
        &s01() + &s10()
    }

    pub fn z() -> QubitOperator {
        &s00() - &s11()
    }

    pub fn eye() -> QubitOperator {
        QubitOperator::identity(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftDirection {
    /// `S⁻ = Σ_j |j−1⟩⟨j|`
    Minus,
    /// `S⁺ = (S⁻)†`
    Plus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Zero padding. For the wave equation this realizes the mixed
    /// (Dirichlet left, Neumann right) condition on `u`.
    #[serde(alias = "mixed")]
    Dirichlet,
    Neumann,
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Forward,
    Backward,
    Central,
    Laplacian,
    /// `(−3u_j + 4u_{j+1} − u_{j+2}) / 2l`
    Forward2,
    /// `(3u_j − 4u_{j−1} + u_{j−2}) / 2l`
    Backward2,
}

/// One term `s_j^∓` of the shift operator on `n` qubits:
/// `I^{⊗(n−j)} ⊗ σ01 ⊗ σ10^{⊗(j−1)}` (Minus) or its adjoint (Plus).
pub fn ladder_term(n: usize, j: usize, direction: ShiftDirection) -> Result<QubitOperator> {
    if j < 1 || j > n {
        return Err(Error::InvalidArgument(format!(
            "ladder index j={j} outside 1..={n}"
        )));
    }
    let (head, tail) = match direction {
        ShiftDirection::Minus => (sigma::s01(), sigma::s10()),
        ShiftDirection::Plus => (sigma::s10(), sigma::s01()),
    };
    Ok(sigma::eye()
        .tensor_power(n - j)
        .kron(&head)
        .kron(&tail.tensor_power(j - 1)))
}

pub fn build_shift(n: usize, direction: ShiftDirection) -> Result<QubitOperator> {
    if n < 1 {
        return Err(Error::InvalidArgument("shift needs n >= 1".into()));
    }
    (1..=n).try_fold(QubitOperator::zero(n), |acc, j| {
        Ok(&acc + &ladder_term(n, j, direction)?)
    })
}

/// Exact sparse matrix of a finite-difference stencil with boundary padding.
pub fn build_difference(
    n: usize,
    scheme: Scheme,
    bc: BoundaryCondition,
    l: f64,
) -> Result<QubitOperator> {
    if n < 1 {
        return Err(Error::InvalidArgument(
            "difference operator needs n >= 1".into(),
        ));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "node spacing must be positive, got {l}"
        )));
    }
    use BoundaryCondition::*;
    let sm = build_shift(n, ShiftDirection::Minus)?;
    let sp = build_shift(n, ShiftDirection::Plus)?;
    let id = QubitOperator::identity(n);
    let all = |s: QubitOperator| s.tensor_power(n);
    let zero = QubitOperator::zero(n);

    let op = match scheme {
        Scheme::Forward => {
            let corr = match bc {
                Dirichlet => zero,
                Neumann => all(sigma::s11()),
                Periodic => all(sigma::s10()),
            };
            &(&(&sm - &id) + &corr) * (1.0 / l)
        }
        Scheme::Backward => {
            let corr = match bc {
                Dirichlet => zero,
                Neumann => all(sigma::s00()),
                Periodic => all(sigma::s01()),
            };
            &(&(&id - &sp) - &corr) * (1.0 / l)
        }
        Scheme::Central => {
            let corr = match bc {
                Dirichlet => zero,
                Neumann => &all(sigma::s11()) - &all(sigma::s00()),
                Periodic => &all(sigma::s10()) - &all(sigma::s01()),
            };
            &(&(&sm - &sp) + &corr) * (0.5 / l)
        }
        Scheme::Laplacian => {
            let corr = match bc {
                Dirichlet => zero,
                Neumann => &all(sigma::s00()) + &all(sigma::s11()),
                Periodic => &all(sigma::s01()) + &all(sigma::s10()),
            };
            &(&(&(&sm + &sp) - &(&id * 2.0)) + &corr) * (1.0 / (l * l))
        }
        Scheme::Forward2 | Scheme::Backward2 if bc != Dirichlet => {
            return Err(Error::Unsupported(format!(
                "{scheme:?} is only defined with Dirichlet padding, not {bc:?}"
            )));
        }
        Scheme::Forward2 => &(&(&(&id * -3.0) + &(&sm * 4.0)) - &sm.matmul(&sm)) * (0.5 / l),
        Scheme::Backward2 => &(&(&(&id * 3.0) - &(&sp * 4.0)) + &sp.matmul(&sp)) * (0.5 / l),
    };
    Ok(op)
}

/// `I^{⊗(α−1)n} ⊗ op ⊗ I^{⊗(d−α)n}` for a 1-based axis `α`.
pub fn embed_axis(op: &QubitOperator, axis: usize, d: usize, n: usize) -> Result<QubitOperator> {
    if op.num_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: op.num_qubits(),
        });
    }
    if axis < 1 || axis > d {
        return Err(Error::InvalidArgument(format!(
            "axis {axis} outside 1..={d}"
        )));
    }
    let eye = sigma::eye();
    Ok(eye
        .tensor_power((axis - 1) * n)
        .kron(op)
        .kron(&eye.tensor_power((d - axis) * n)))
}

/// Spectral norm (largest singular value).
pub fn op_norm(op: &QubitOperator) -> Result<f64> {
    linalg::sparse_spectral_norm(op)
}
