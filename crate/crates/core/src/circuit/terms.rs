//! Hamiltonians written as sums of single-qubit ladder/projector strings,
//! and the Bell-basis gadget that exponentiates one Hermitian pair of them.

use std::collections::HashMap;

use num_complex::Complex64;

use super::Circuit;
use crate::error::{Error, Result};
use crate::opalg::{sigma, QubitOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    I,
    /// `|0⟩⟨0|`
    P0,
    /// `|1⟩⟨1|`
    P1,
    /// `σ01 = |0⟩⟨1|`
    Lower,
    /// `σ10 = |1⟩⟨0|`
    Raise,
}

impl Factor {
    fn adjoint(self) -> Self {
        match self {
            Factor::Lower => Factor::Raise,
            Factor::Raise => Factor::Lower,
            f => f,
        }
    }

    fn operator(self) -> QubitOperator {
        match self {
            Factor::I => sigma::eye(),
            Factor::P0 => sigma::s00(),
            Factor::P1 => sigma::s11(),
            Factor::Lower => sigma::s01(),
            Factor::Raise => sigma::s10(),
        }
    }
}

/// `coeff · ⊗ factors`, with `factors[k]` acting on qubit index `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderString {
    pub coeff: Complex64,
    pub factors: Vec<Factor>,
}

impl LadderString {
    pub fn identity(num_qubits: usize, coeff: Complex64) -> Self {
        Self {
            coeff,
            factors: vec![Factor::I; num_qubits],
        }
    }

    /// `s_j^−` on `n` qubits: `σ01` on qubit `j`, `σ10` below it.
    pub fn shift_minus(n: usize, j: usize) -> Self {
        assert!(1 <= j && j <= n);
        let mut factors = vec![Factor::I; n];
        factors[..j - 1].fill(Factor::Raise);
        factors[j - 1] = Factor::Lower;
        Self {
            coeff: Complex64::new(1.0, 0.0),
            factors,
        }
    }

    /// `f^{⊗n}`
    pub fn uniform(n: usize, f: Factor) -> Self {
        Self {
            coeff: Complex64::new(1.0, 0.0),
            factors: vec![f; n],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        self.coeff *= s;
        self
    }

    pub fn adjoint(&self) -> Self {
        Self {
            coeff: self.coeff.conj(),
            factors: self.factors.iter().map(|f| f.adjoint()).collect(),
        }
    }

    /// `self ⊗ other`; `self` occupies the more significant qubits.
    pub fn kron(&self, other: &Self) -> Self {
        let mut factors = other.factors.clone();
        factors.extend_from_slice(&self.factors);
        Self {
            coeff: self.coeff * other.coeff,
            factors,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.factors
            .iter()
            .all(|f| matches!(f, Factor::I | Factor::P0 | Factor::P1))
    }

    pub fn to_operator(&self) -> QubitOperator {
        self.factors
            .iter()
            .rev()
            .fold(QubitOperator::identity(0), |acc, f| acc.kron(&f.operator()))
            .scale(self.coeff)
    }
}

/// A Hermitian term `h + h†` built from a single off-diagonal string `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairTerm(pub LadderString);

impl PairTerm {
    pub fn to_operator(&self) -> QubitOperator {
        let h = self.0.to_operator();
        &h + &h.adjoint()
    }

    /// Circuit for `exp(−i t (h + h†))`.
    pub fn exponential(&self, t: f64) -> Circuit {
        pair_exponential(&self.0, t)
    }
}

/// Groups a Hermitian sum of strings into pair terms, keeping the order in
/// which each pair first appears. Diagonal strings are rejected, as are sums
/// that are not Hermitian.
pub fn pair_terms(strings: &[LadderString]) -> Result<Vec<PairTerm>> {
    let mut order: Vec<Vec<Factor>> = Vec::new();
    let mut sums: HashMap<Vec<Factor>, Complex64> = HashMap::new();
    for s in strings {
        if s.is_diagonal() {
            return Err(Error::Unsupported(
                "diagonal terms have no pair-term circuit".into(),
            ));
        }
        let entry = sums.entry(s.factors.clone()).or_insert_with(|| {
            order.push(s.factors.clone());
            Complex64::new(0.0, 0.0)
        });
        *entry += s.coeff;
    }
    let mut out = Vec::new();
    let mut done: Vec<Vec<Factor>> = Vec::new();
    for f in order {
        if done.contains(&f) {
            continue;
        }
        let adj: Vec<Factor> = f.iter().map(|x| x.adjoint()).collect();
        let a = sums[&f];
        let b = sums.get(&adj).copied().unwrap_or_default();
        if (a - b.conj()).norm() > 1e-12 * a.norm().max(1.0) {
            return Err(Error::NotHermitian((a - b.conj()).norm()));
        }
        done.push(adj);
        done.push(f.clone());
        if a.norm() > 0.0 {
            out.push(PairTerm(LadderString {
                coeff: a,
                factors: f,
            }));
        }
    }
    Ok(out)
}

/// `exp(−i t (a|x⟩⟨x̄|_Q + h.c.))` times the projector factors as controls.
///
/// `Q` is the set of qubits carrying ladder factors. The pivot is the highest
/// qubit of `Q` whose `x` bit is 0; a Bell-type change of basis on `Q` turns
/// the pair into `Z_pivot` times projectors, so the exponential becomes one
/// multi-controlled RZ.
fn pair_exponential(h: &LadderString, t: f64) -> Circuit {
    let nq = h.num_qubits();
    let mut string = h.clone();
    // x bit of a factor: σ01 = |0⟩⟨1| has x = 0, σ10 has x = 1
    let has_zero = string.factors.contains(&Factor::Lower);
    if !has_zero {
        string = string.adjoint();
    }
    let ladder: Vec<usize> = (0..nq)
        .filter(|&k| matches!(string.factors[k], Factor::Lower | Factor::Raise))
        .collect();
    let pivot = *ladder
        .iter()
        .rev()
        .find(|&&k| string.factors[k] == Factor::Lower)
        .expect("pair term without ladder factors");
    let others: Vec<usize> = ladder.iter().copied().filter(|&k| k != pivot).collect();
    let a = string.coeff;
    let theta = 2.0 * a.norm() * t;

    let mut c = Circuit::new(nq);
    let projectors: Vec<(usize, Factor)> = (0..nq)
        .filter_map(|k| match string.factors[k] {
            f @ (Factor::P0 | Factor::P1) => Some((k, f)),
            _ => None,
        })
        .collect();

    // a single-qubit pair with a real coefficient is an X rotation
    if others.is_empty() && projectors.is_empty() && a.im == 0.0 {
        c.rx(pivot, 2.0 * a.re * t);
        return c;
    }

    let basis = extended_bell_unitary(nq, pivot, &others, -a.arg());
    let mut flips: Vec<usize> = others
        .iter()
        .copied()
        .filter(|&k| string.factors[k] == Factor::Lower)
        .collect();
    flips.extend(
        projectors
            .iter()
            .filter(|(_, f)| *f == Factor::P0)
            .map(|(k, _)| *k),
    );
    let mut controls = others.clone();
    controls.extend(projectors.iter().map(|(k, _)| *k));
    controls.sort_unstable();

    c.append(&basis.inverse());
    for &k in &flips {
        c.x(k);
    }
    if controls.is_empty() {
        c.rz(pivot, theta);
    } else {
        c.mcrz(&controls, pivot, theta);
    }
    for &k in &flips {
        c.x(k);
    }
    c.append(&basis);
    c
}

/// `(Π CNOT^{pivot}_m) P_pivot(λ) H_pivot` over `num_qubits` qubits.
pub fn extended_bell_unitary(
    num_qubits: usize,
    pivot: usize,
    others: &[usize],
    lambda: f64,
) -> Circuit {
    let mut c = Circuit::new(num_qubits);
    c.h(pivot).p(pivot, lambda);
    for &m in others {
        c.cx(pivot, m);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamilton::exact_propagator;
    use crate::linalg::dense_spectral_norm;
    use crate::simulator::materialize;

    fn check_pair(h: LadderString, t: f64) {
        let term = PairTerm(h);
        let exact = exact_propagator(&term.to_operator(), t).unwrap();
        let circ = materialize(&term.exponential(t)).unwrap();
        assert!(dense_spectral_norm(&(exact - circ)) < 1e-12, "{:?}", term.0);
    }

    #[test]
    fn gadget_matches_exponential_for_all_patterns() {
        use Factor::*;
        let c = Complex64::new(0.7, -0.4);
        let cases = vec![
            vec![Lower],
            vec![Raise],
            vec![Raise, Lower, I],
            vec![Lower, Lower, Raise],
            vec![Raise, Raise, Raise],
            vec![P0, Lower, P1, Raise],
            vec![I, P1, Raise, Lower],
            vec![Lower, P0],
        ];
        for f in cases {
            check_pair(
                LadderString {
                    coeff: c,
                    factors: f.clone(),
                },
                0.37,
            );
            check_pair(
                LadderString {
                    coeff: Complex64::new(-1.2, 0.0),
                    factors: f,
                },
                0.2,
            );
        }
    }

    #[test]
    fn pairing_merges_adjoints() {
        let s = LadderString::shift_minus(3, 2).scaled(Complex64::new(0.0, 1.0));
        let terms = pair_terms(&[s.clone(), s.adjoint()]).unwrap();
        assert_eq!(terms.len(), 1);
        let op = terms[0].to_operator();
        assert!(op.approx_eq(&(&s.to_operator() + &s.adjoint().to_operator()), 1e-15));
        assert!(matches!(
            pair_terms(std::slice::from_ref(&s)),
            Err(Error::NotHermitian(_))
        ));
        assert!(pair_terms(&[LadderString::identity(2, Complex64::new(1.0, 0.0))]).is_err());
    }

    #[test]
    fn shift_string_matches_ladder_term() {
        for n in 1..=5 {
            for j in 1..=n {
                let want =
                    crate::opalg::ladder_term(n, j, crate::opalg::ShiftDirection::Minus).unwrap();
                assert_eq!(LadderString::shift_minus(n, j).to_operator(), want);
            }
        }
    }
}
