//! Discretized Hamiltonians for the advection and wave equations, and the
//! problem descriptor shared by the builders, the simulator and the CLI.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opalg::{
    build_difference, embed_axis, ladder_term, sigma, BoundaryCondition, QubitOperator, Scheme,
    ShiftDirection,
};

pub use crate::linalg::{exact_propagator, propagate_state};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    Advection,
    Wave,
    GenericShift,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    #[default]
    First,
    Second,
}

/// Initial nodal data. For the wave equation this is `∂u/∂t` at `t = 0`
/// (with `u(0) = 0`), placed in the first block of the state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    BasisState {
        index: usize,
    },
    /// Uniform amplitude on the box `∏ [lo, hi)`, one range per axis.
    UniformWindow {
        ranges: Vec<[usize; 2]>,
    },
    /// Either a nodal field of length `2^{dn}` or a full state vector.
    ExplicitAmplitudes {
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self::BasisState { index: 0 }
    }
}

fn one() -> f64 {
    1.0
}

/// Everything needed to build a Hamiltonian and its Trotter step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PDEProblem {
    pub equation: Equation,
    pub d: usize,
    pub n: usize,
    #[serde(default = "one")]
    pub l: f64,
    #[serde(default)]
    pub velocity: Vec<f64>,
    #[serde(default = "one")]
    pub speed: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub eta: Vec<f64>,
    #[serde(default)]
    pub lambda: Vec<f64>,
    pub bc: BoundaryCondition,
    pub tau: f64,
    pub total_time: f64,
    #[serde(default)]
    pub order: Order,
    #[serde(default)]
    pub initial: InitialCondition,
}

/// Relative tolerance when checking that `T/τ` is an integer.
const STEP_TOL: f64 = 1e-9;

impl PDEProblem {
    fn base(equation: Equation, d: usize, n: usize, bc: BoundaryCondition) -> Self {
        Self {
            equation,
            d,
            n,
            l: 1.0,
            velocity: Vec::new(),
            speed: 1.0,
            gamma: 1.0,
            eta: Vec::new(),
            lambda: Vec::new(),
            bc,
            tau: 0.1,
            total_time: 0.1,
            order: Order::First,
            initial: InitialCondition::default(),
        }
    }

    pub fn advection(n: usize, velocity: Vec<f64>, bc: BoundaryCondition) -> Self {
        let mut p = Self::base(Equation::Advection, velocity.len(), n, bc);
        p.velocity = velocity;
        p
    }

    pub fn wave(d: usize, n: usize, speed: f64, bc: BoundaryCondition) -> Self {
        let mut p = Self::base(Equation::Wave, d, n, bc);
        p.speed = speed;
        p
    }

    pub fn generic(n: usize, gamma: f64, eta: Vec<f64>, lambda: Vec<f64>) -> Self {
        let mut p = Self::base(
            Equation::GenericShift,
            eta.len(),
            n,
            BoundaryCondition::Dirichlet,
        );
        p.gamma = gamma;
        p.eta = eta;
        p.lambda = lambda;
        p
    }

    pub fn with_time(mut self, tau: f64, total_time: f64) -> Self {
        self.tau = tau;
        self.total_time = total_time;
        self
    }

    pub fn with_order(mut self, order: Order) -> Self {
        self.order = order;
        self
    }

    pub fn with_spacing(mut self, l: f64) -> Self {
        self.l = l;
        self
    }

    pub fn with_initial(mut self, initial: InitialCondition) -> Self {
        self.initial = initial;
        self
    }

    /// Qubits holding the nodal field: `d·n`.
    pub fn field_qubits(&self) -> usize {
        self.d * self.n
    }

    /// Qubits of the full simulated state, including wave block labels.
    pub fn num_qubits(&self) -> usize {
        self.field_qubits() + self.block_qubits()
    }

    pub fn block_qubits(&self) -> usize {
        match (self.equation, self.d) {
            (Equation::Wave, 3) => 2,
            (Equation::Wave, _) => 1,
            _ => 0,
        }
    }

    /// All structural problems with the descriptor, reported together.
    pub fn problems(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(1..=3).contains(&self.d) {
            errs.push(format!("d must be 1, 2 or 3, got {}", self.d));
        }
        if self.n < 1 {
            errs.push("n must be at least 1".into());
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            errs.push(format!("l must be positive, got {}", self.l));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            errs.push(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            errs.push(format!(
                "total_time must be positive, got {}",
                self.total_time
            ));
        }
        if self.tau > 0.0 && self.total_time > 0.0 && self.steps().is_err() {
            errs.push(format!(
                "tau = {} does not divide total_time = {}",
                self.tau, self.total_time
            ));
        }
        match self.equation {
            Equation::Advection => {
                if self.velocity.len() != self.d {
                    errs.push(format!(
                        "velocity has {} entries but d = {}",
                        self.velocity.len(),
                        self.d
                    ));
                }
                if self.velocity.iter().any(|v| !v.is_finite()) {
                    errs.push("velocity must be finite".into());
                }
            }
            Equation::Wave => {
                if !(self.speed >= 0.0 && self.speed.is_finite()) {
                    errs.push(format!("speed must be non-negative, got {}", self.speed));
                }
            }
            Equation::GenericShift => {
                if self.eta.len() != self.d || self.lambda.len() != self.d {
                    errs.push(format!(
                        "eta and lambda need d = {} entries, got {} and {}",
                        self.d,
                        self.eta.len(),
                        self.lambda.len()
                    ));
                }
            }
        }
        if errs.is_empty() {
            if let Err(e) = self.initial_state() {
                errs.push(e.to_string());
            }
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.problems();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    /// Number of Trotter steps `r = T/τ`, which must be a positive integer.
    pub fn steps(&self) -> Result<usize> {
        steps_for(self.total_time, self.tau)
    }

    /// The nodal field described by the initial condition, normalized.
    pub fn initial_field(&self) -> Result<Vec<Complex64>> {
        let dim = 1usize << self.field_qubits();
        let zero = Complex64::new(0.0, 0.0);
        let mut field = vec![zero; dim];
        match &self.initial {
            InitialCondition::BasisState { index } => {
                if *index >= dim {
                    return Err(Error::InvalidArgument(format!(
                        "basis index {index} outside 0..{dim}"
                    )));
                }
                field[*index] = Complex64::new(1.0, 0.0);
            }
            InitialCondition::UniformWindow { ranges } => {
                let side = 1usize << self.n;
                if ranges.len() != self.d {
                    return Err(Error::InvalidArgument(format!(
                        "uniform window needs {} ranges, got {}",
                        self.d,
                        ranges.len()
                    )));
                }
                if ranges.iter().any(|[lo, hi]| lo >= hi || *hi > side) {
                    return Err(Error::InvalidArgument(format!(
                        "window ranges must satisfy lo < hi <= {side}"
                    )));
                }
                for (idx, amp) in field.iter_mut().enumerate() {
                    let inside = (0..self.d).all(|a| {
                        let j = axis_coordinate(idx, a + 1, self.d, self.n);
                        (ranges[a][0]..ranges[a][1]).contains(&j)
                    });
                    if inside {
                        *amp = Complex64::new(1.0, 0.0);
                    }
                }
                normalize_exact(&mut field);
            }
            InitialCondition::ExplicitAmplitudes { re, im } => {
                let amps = explicit_amplitudes(re, im)?;
                if amps.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: amps.len(),
                    });
                }
                field = amps;
            }
        }
        Ok(field)
    }

    /// The full initial state: the field itself, or `|0…0⟩_block ⊗ field` for waves.
    pub fn initial_state(&self) -> Result<Vec<Complex64>> {
        let full = 1usize << self.num_qubits();
        if let InitialCondition::ExplicitAmplitudes { re, im } = &self.initial {
            if re.len() == full && self.block_qubits() > 0 {
                return explicit_amplitudes(re, im);
            }
        }
        let mut field = self.initial_field()?;
        field.resize(full, Complex64::new(0.0, 0.0));
        Ok(field)
    }
}

pub(crate) fn steps_for(total_time: f64, tau: f64) -> Result<usize> {
    let ratio = total_time / tau;
    let r = ratio.round();
    if r < 1.0 || (ratio - r).abs() > STEP_TOL * r.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "tau = {tau} does not divide total_time = {total_time}"
        )));
    }
    Ok(r as usize)
}

fn explicit_amplitudes(re: &[f64], im: &[f64]) -> Result<Vec<Complex64>> {
    if !im.is_empty() && im.len() != re.len() {
        return Err(Error::DimensionMismatch {
            expected: re.len(),
            found: im.len(),
        });
    }
    let amps: Vec<Complex64> = re
        .iter()
        .enumerate()
        .map(|(k, &r)| Complex64::new(r, im.get(k).copied().unwrap_or(0.0)))
        .collect();
    let norm = crate::linalg::vec_norm(&amps);
    if !re.len().is_power_of_two() || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "explicit amplitudes must have power-of-two length and unit norm (length {}, norm {norm})",
            re.len()
        )));
    }
    Ok(amps)
}

fn normalize_exact(v: &mut [Complex64]) {
    crate::linalg::normalize(v);
}

/// Node index along 1-based `axis` of a flat `d·n`-qubit index. Axis 1 is the
/// most significant register.
pub fn axis_coordinate(index: usize, axis: usize, d: usize, n: usize) -> usize {
    (index >> ((d - axis) * n)) & ((1usize << n) - 1)
}

fn ensure(p: &PDEProblem, eq: Equation) -> Result<()> {
    if p.equation != eq {
        return Err(Error::InvalidArgument(format!(
            "expected a {eq:?} problem, got {:?}",
            p.equation
        )));
    }
    if !(1..=3).contains(&p.d) {
        return Err(Error::Unsupported(format!("d = {}", p.d)));
    }
    Ok(())
}

/// `H = Σ_α −i v_α (D^±)_α`.
pub fn advection_hamiltonian(p: &PDEProblem) -> Result<QubitOperator> {
    ensure(p, Equation::Advection)?;
    if p.velocity.len() != p.d {
        return Err(Error::DimensionMismatch {
            expected: p.d,
            found: p.velocity.len(),
        });
    }
    if p.bc == BoundaryCondition::Neumann {
        return Err(Error::Unsupported(
            "central differences with Neumann padding are not Hermitian".into(),
        ));
    }
    let central = build_difference(p.n, Scheme::Central, p.bc, p.l)?;
    let mut h = QubitOperator::zero(p.field_qubits());
    for (a, &v) in p.velocity.iter().enumerate() {
        let term = embed_axis(&central, a + 1, p.d, p.n)?;
        h = &h + &(&term * Complex64::new(0.0, -v));
    }
    Ok(h)
}

/// Difference pair `(D_plus, D_minus)` used by the wave Hamiltonian: one-sided
/// Dirichlet-padded stencils for the mixed problem, the periodic central
/// stencil (for both) otherwise.
pub fn wave_difference_pair(
    n: usize,
    bc: BoundaryCondition,
    l: f64,
) -> Result<(QubitOperator, QubitOperator)> {
    match bc {
        BoundaryCondition::Dirichlet => Ok((
            build_difference(n, Scheme::Forward, bc, l)?,
            build_difference(n, Scheme::Backward, bc, l)?,
        )),
        BoundaryCondition::Periodic => {
            let c = build_difference(n, Scheme::Central, bc, l)?;
            Ok((c.clone(), c))
        }
        BoundaryCondition::Neumann => Err(Error::Unsupported(
            "wave Hamiltonian supports mixed (dirichlet) or periodic boundaries".into(),
        )),
    }
}

/// First-order wave system in block form; the block label qubits are the
/// most significant.
pub fn wave_hamiltonian(p: &PDEProblem) -> Result<QubitOperator> {
    ensure(p, Equation::Wave)?;
    let (dp, dm) = wave_difference_pair(p.n, p.bc, p.l)?;
    let axis = |op: &QubitOperator, a: usize| embed_axis(op, a, p.d, p.n);
    let i = Complex64::new(0.0, 1.0);
    let (s01, s10, s00) = (sigma::s01(), sigma::s10(), sigma::s00());
    let h = match p.d {
        1 => &s01.kron(&dp) - &s10.kron(&dm),
        2 => {
            let upper = &axis(&dp, 1)? - &(&axis(&dp, 2)? * i);
            let lower = &axis(&dm, 1)? + &(&axis(&dm, 2)? * i);
            &s01.kron(&upper) - &s10.kron(&lower)
        }
        _ => {
            let blocks = [s00.kron(&s01), s01.kron(&s00), s01.kron(&s01)];
            let mut h = QubitOperator::zero(p.num_qubits());
            for (a, b) in blocks.iter().enumerate() {
                h = &h + &b.kron(&axis(&dp, a + 1)?);
                h = &h - &b.adjoint().kron(&axis(&dm, a + 1)?);
            }
            h
        }
    };
    Ok(&h * p.speed)
}

/// One shift pair `e^{iλ}s_j^− + e^{−iλ}s_j^+` on `n` qubits.
pub fn shift_pair(n: usize, j: usize, lambda: f64) -> Result<QubitOperator> {
    let m = ladder_term(n, j, ShiftDirection::Minus)?;
    let p = ladder_term(n, j, ShiftDirection::Plus)?;
    Ok(&(&m * Complex64::from_polar(1.0, lambda)) + &(&p * Complex64::from_polar(1.0, -lambda)))
}

/// `γ Σ_α η_α Σ_j (e^{iλ_α}(s_j^−)_α + e^{−iλ_α}(s_j^+)_α)`.
pub fn generic_shift_hamiltonian(p: &PDEProblem) -> Result<QubitOperator> {
    ensure(p, Equation::GenericShift)?;
    if p.eta.len() != p.d || p.lambda.len() != p.d {
        return Err(Error::DimensionMismatch {
            expected: p.d,
            found: p.eta.len().min(p.lambda.len()),
        });
    }
    let mut h = QubitOperator::zero(p.field_qubits());
    for a in 0..p.d {
        let mut axis_sum = QubitOperator::zero(p.n);
        for j in 1..=p.n {
            axis_sum = &axis_sum + &shift_pair(p.n, j, p.lambda[a])?;
        }
        h = &h + &(&embed_axis(&axis_sum, a + 1, p.d, p.n)? * (p.gamma * p.eta[a]));
    }
    Ok(h)
}

/// The Hamiltonian matching `p.equation`.
pub fn hamiltonian(p: &PDEProblem) -> Result<QubitOperator> {
    match p.equation {
        Equation::Advection => advection_hamiltonian(p),
        Equation::Wave => wave_hamiltonian(p),
        Equation::GenericShift => generic_shift_hamiltonian(p),
    }
}

/// The periodic wrap-around term `(−iv/2l)(σ10^{⊗n} − σ01^{⊗n})`.
pub fn periodic_boundary_term(n: usize, v: f64, l: f64) -> QubitOperator {
    let diff = &sigma::s10().tensor_power(n) - &sigma::s01().tensor_power(n);
    &diff * Complex64::new(0.0, -v / (2.0 * l))
}
