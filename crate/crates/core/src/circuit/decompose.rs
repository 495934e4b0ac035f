//! Ancilla-free lowering of multi-controlled RZ and CNOT accounting.

use super::{Circuit, GateKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    /// Gate-level costs: CRZ = 2, MCRZ with `k ≥ 2` controls = `16(k+1) − 40`.
    Analytic,
    /// CNOTs after lowering every MCRZ with [`decompose_mcrz`].
    Decomposed,
}

/// MCRZ(θ) with `k` controls on qubits `0..k` and the target on qubit `k`.
pub fn decompose_mcrz(k: usize, theta: f64) -> Circuit {
    let mut c = Circuit::new(k + 1);
    let controls: Vec<usize> = (0..k).collect();
    lower_mcrz_into(&mut c, &controls, k, theta);
    c
}

/// Appends the phase-polynomial form of MCRZ.
///
/// On the all-ones control subspace the rotation is
/// `exp(−iθ/2 · Z_t Π_c (I − Z_c)/2)`, a sum of commuting `Z_t Z_S` terms
/// with weights `(−1)^{|S|} θ / 2^k`. A Gray-code walk over the subsets `S`
/// keeps the parity of `t ⊕ S` on the target, so each subset costs one CNOT.
pub(crate) fn lower_mcrz_into(c: &mut Circuit, controls: &[usize], target: usize, theta: f64) {
    let k = controls.len();
    if k == 0 {
        c.rz(target, theta);
        return;
    }
    let weight = theta / (1u64 << k) as f64;
    c.rz(target, weight);
    for i in 1usize..(1 << k) {
        let flipped = i.trailing_zeros() as usize;
        c.cx(controls[flipped], target);
        let gray = i ^ (i >> 1);
        let sign = if gray.count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        c.rz(target, sign * weight);
    }
    // the walk ends on the subset holding only the last control
    c.cx(controls[k - 1], target);
}

/// Number of CNOTs in `c` under the chosen accounting.
pub fn count_cnots(c: &Circuit, mode: CountMode) -> usize {
    c.gates()
        .iter()
        .map(|g| match (g.kind, mode) {
            (GateKind::CNOT, _) => 1,
            (GateKind::MCRZ(_), CountMode::Analytic) => match g.controls.len() {
                0 => 0,
                1 => 2,
                k => 16 * (k + 1) - 40,
            },
            (GateKind::MCRZ(_), CountMode::Decomposed) => match g.controls.len() {
                0 => 0,
                k => 1 << k,
            },
            _ => 0,
        })
        .sum()
}
