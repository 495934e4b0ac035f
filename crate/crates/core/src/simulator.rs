//! Statevector execution of circuits, observables and shot sampling.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::linalg::vec_norm;
use crate::opalg::{sigma, QubitOperator};

/// Largest register [`materialize`] will expand into a dense matrix.
pub const MATERIALIZE_LIMIT: usize = 12;
/// Largest register whose full amplitudes are recorded in trajectories.
pub const RECORD_LIMIT: usize = 14;

const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes, which must have length `2^q` and unit norm.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "state length {} is not a power of two",
                amps.len()
            )));
        }
        let norm = vec_norm(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state norm is {norm}, expected 1"
            )));
        }
        Ok(Self {
            num_qubits: amps.len().trailing_zeros() as usize,
            amps,
        })
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} outside 0..{dim}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.amps)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn apply_gate(&mut self, g: &Gate) {
        let t = 1usize << g.target;
        let amps = &mut self.amps;
        match g.kind {
            GateKind::CNOT => {
                let c = 1usize << g.controls[0];
                for i in 0..amps.len() {
                    if i & c != 0 && i & t == 0 {
                        amps.swap(i, i | t);
                    }
                }
            }
            GateKind::MCRZ(theta) => {
                let mask = g.controls.iter().fold(0usize, |m, &c| m | (1 << c));
                let lo = Complex64::from_polar(1.0, -theta / 2.0);
                let hi = lo.conj();
                for (i, a) in amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *a *= if i & t == 0 { lo } else { hi };
                    }
                }
            }
            kind => {
                let m = single_qubit_matrix(kind);
                for i in 0..amps.len() {
                    if i & t == 0 {
                        let (a, b) = (amps[i], amps[i | t]);
                        amps[i] = m[0][0] * a + m[0][1] * b;
                        amps[i | t] = m[1][0] * a + m[1][1] * b;
                    }
                }
            }
        }
    }
}

fn single_qubit_matrix(kind: GateKind) -> [[Complex64; 2]; 2] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::H => [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]],
        GateKind::X => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        GateKind::Phase(l) => [
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), Complex64::from_polar(1.0, l)],
        ],
        GateKind::RZ(t) => [
            [Complex64::from_polar(1.0, -t / 2.0), c(0.0, 0.0)],
            [c(0.0, 0.0), Complex64::from_polar(1.0, t / 2.0)],
        ],
        GateKind::RX(t) => {
            let (sn, cs) = (t / 2.0).sin_cos();
            [[c(cs, 0.0), c(0.0, -sn)], [c(0.0, -sn), c(cs, 0.0)]]
        }
        GateKind::CNOT | GateKind::MCRZ(_) => unreachable!("not a single-qubit gate"),
    }
}

fn check_register(c: &Circuit, s: &StateVector) -> Result<()> {
    if c.num_qubits() != s.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: c.num_qubits(),
            found: s.num_qubits(),
        });
    }
    Ok(())
}

/// `U_c |s⟩`.
pub fn apply(c: &Circuit, s: &StateVector) -> Result<StateVector> {
    check_register(c, s)?;
    let mut out = s.clone();
    apply_in_place(c, &mut out);
    Ok(out)
}

fn apply_in_place(c: &Circuit, s: &mut StateVector) {
    for g in c.gates() {
        s.apply_gate(g);
    }
}

/// Dense unitary of a circuit, column by column.
pub fn materialize(c: &Circuit) -> Result<DMatrix<Complex64>> {
    if c.num_qubits() > MATERIALIZE_LIMIT {
        return Err(Error::TooLarge(1 << c.num_qubits(), 1 << MATERIALIZE_LIMIT));
    }
    let dim = 1usize << c.num_qubits();
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for col in 0..dim {
        let mut s = StateVector::basis(c.num_qubits(), col)?;
        apply_in_place(c, &mut s);
        m.set_column(col, &nalgebra::DVector::from_vec(s.amps));
    }
    Ok(m)
}

/// States after `0, e, 2e, …` steps, always including the final step.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub steps: Vec<usize>,
    pub states: Vec<StateVector>,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }
}

/// Applies `step` `r` times, recording every `record_every` steps.
pub fn evolve(
    step: &Circuit,
    s0: &StateVector,
    r: usize,
    record_every: usize,
) -> Result<Trajectory> {
    evolve_at(step, s0, r, |k| record_every > 0 && k % record_every == 0)
}

/// Like [`evolve`], recording the steps selected by `record`. Step 0 and
/// step `r` are always kept.
pub fn evolve_at(
    step: &Circuit,
    s0: &StateVector,
    r: usize,
    record: impl Fn(usize) -> bool,
) -> Result<Trajectory> {
    check_register(step, s0)?;
    if r < 1 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }
    let mut s = s0.clone();
    let mut traj = Trajectory {
        steps: vec![0],
        states: vec![s.clone()],
    };
    for k in 1..=r {
        apply_in_place(step, &mut s);
        let drift = (s.norm() - 1.0).abs();
        if drift > NORM_TOL {
            return Err(Error::Invariant(format!(
                "norm drifted by {drift:.2e} at step {k}"
            )));
        }
        if k == r || record(k) {
            traj.steps.push(k);
            traj.states.push(s.clone());
        }
    }
    Ok(traj)
}

/// A Hermitian operator used as a measurement.
#[derive(Clone, Debug)]
pub struct Observable {
    op: QubitOperator,
}

impl Observable {
    pub fn new(op: QubitOperator) -> Result<Self> {
        let defect = op.hermiticity_defect();
        if defect > 1e-12 {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self { op })
    }

    /// `|0⟩⟨0|^{⊗b} ⊗ I`: weight of the `∂u/∂t` block of a wave state whose
    /// `b` block-label qubits sit above `field_qubits` field qubits. For one
    /// label qubit this is `½(Z + I) ⊗ I`.
    pub fn kinetic_energy(block_qubits: usize, field_qubits: usize) -> Self {
        let op = sigma::s00()
            .tensor_power(block_qubits)
            .kron(&QubitOperator::identity(field_qubits));
        Self { op }
    }

    pub fn operator(&self) -> &QubitOperator {
        &self.op
    }

    /// Diagonal entries, if the operator is diagonal in the computational basis.
    pub fn diagonal(&self) -> Option<Vec<f64>> {
        let mut d = vec![0.0; self.op.dim()];
        for (r, c, v) in self.op.iter() {
            if r != c {
                return None;
            }
            d[r] = v.re;
        }
        Some(d)
    }
}

/// `Re ⟨s|O|s⟩`; a non-negligible imaginary part is an invariant violation.
pub fn expectation(s: &StateVector, o: &Observable) -> Result<f64> {
    if o.op.dim() != s.amps.len() {
        return Err(Error::DimensionMismatch {
            expected: o.op.num_qubits(),
            found: s.num_qubits,
        });
    }
    let os = o.op.apply(&s.amps);
    let z: Complex64 = s.amps.iter().zip(&os).map(|(a, b)| a.conj() * b).sum();
    if z.im.abs() > 1e-10 {
        return Err(Error::Invariant(format!(
            "expectation has imaginary part {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// Shot estimate of `⟨O⟩` and its 95% half-width `1.96·std/√shots`.
///
/// `basis` rotates `O` into the computational basis (`None` when it already
/// is diagonal). Outcomes are drawn from `|amplitude|²` with a seeded
/// ChaCha8 stream, so equal seeds give equal results.
pub fn sample_observable(
    s: &StateVector,
    o: &Observable,
    basis: Option<&Circuit>,
    shots: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if shots < 1 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let (state, values) = match basis {
        None => (
            s.clone(),
            o.diagonal().ok_or_else(|| {
                Error::InvalidArgument("observable is not diagonal; supply a basis circuit".into())
            })?,
        ),
        Some(b) => {
            let u = materialize(b)?;
            let rotated = &u * o.op.to_dense() * u.adjoint();
            let off = rotated
                .iter()
                .enumerate()
                .filter(|(k, _)| k % (rotated.nrows() + 1) != 0)
                .map(|(_, z)| z.norm())
                .fold(0.0, f64::max);
            if off > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "basis circuit leaves off-diagonal weight {off:.2e}"
                )));
            }
            (
                apply(b, s)?,
                rotated.diagonal().iter().map(|z| z.re).collect(),
            )
        }
    };
    if values.len() != state.amps.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len().trailing_zeros() as usize,
            found: state.num_qubits,
        });
    }
    let mut cdf = Vec::with_capacity(state.amps.len());
    let mut acc = 0.0;
    for p in state.probabilities() {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * total;
        let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        let v = values[k];
        sum += v;
        sum_sq += v * v;
    }
    let n = shots as f64;
    let mean = sum / n;
    let var = if shots > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok((mean, 1.96 * var.sqrt() / n.sqrt()))
}
