//! Trotter-step circuits for the shift-operator Hamiltonians.
//!
//! One-based qubit labels `j = 1..n` map to indices `j − 1`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::terms::{pair_terms, Factor, LadderString, PairTerm};
use super::Circuit;
use crate::error::{Error, Result};
use crate::hamilton::{Equation, Order, PDEProblem};
use crate::opalg::BoundaryCondition;

fn check_j(n: usize, j: usize) -> Result<()> {
    if j < 1 || j > n {
        return Err(Error::InvalidArgument(format!("j = {j} outside 1..={n}")));
    }
    Ok(())
}

/// `U_j(λ) = (Π_m CNOT^j_m) P_j(λ) H_j` on an `n`-qubit register.
pub fn bell_basis_unitary(n: usize, j: usize, lambda: f64) -> Result<Circuit> {
    check_j(n, j)?;
    let mut c = Circuit::new(n);
    c.h(j - 1).p(j - 1, lambda);
    for m in 0..j - 1 {
        c.cx(j - 1, m);
    }
    Ok(c)
}

/// `W_j = U_j(−λ) · MCRZ^{1..j−1}_j(2·angle) · U_j(−λ)†`, which equals
/// `exp(−i·angle·(e^{iλ}s_j^− + e^{−iλ}s_j^+))`.
pub fn w_term(n: usize, j: usize, angle: f64, lambda: f64) -> Result<Circuit> {
    let u = bell_basis_unitary(n, j, -lambda)?;
    let controls: Vec<usize> = (0..j - 1).collect();
    let mut c = u.inverse();
    c.mcrz(&controls, j - 1, 2.0 * angle);
    c.append(&u);
    Ok(c)
}

fn require_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidArgument(format!("need n >= {min}, got {n}")));
    }
    Ok(())
}

/// First-order step `V = W_n ⋯ W_1` (so `W_1` runs first).
pub fn trotter_step_first(n: usize, angle: f64, lambda: f64) -> Result<Circuit> {
    require_n(n, 1)?;
    let mut c = Circuit::new(n);
    for j in 1..=n {
        c.append(&w_term(n, j, angle, lambda)?);
    }
    Ok(c)
}

/// Second-order step `W_1(angle/2) · W_n ⋯ W_2 · W_1(angle/2)`.
///
/// The `W_j` with `j ≥ 2` commute with each other, so this is the symmetric
/// splitting of `W_1` against the rest and uses as many CNOTs as `V`.
pub fn trotter_step_second(n: usize, angle: f64, lambda: f64) -> Result<Circuit> {
    require_n(n, 1)?;
    let half = w_term(n, 1, angle / 2.0, lambda)?;
    let mut c = half.clone();
    for j in 2..=n {
        c.append(&w_term(n, j, angle, lambda)?);
    }
    c.append(&half);
    Ok(c)
}

/// `V_n(θ) = U_n(−π/2) X' MCRZ^{1..n−1}_n(2θ) X' U_n(−π/2)†` with `X'` on
/// qubits `1..n−1`. For `θ = vτ/2l` this is the exact exponential of the
/// periodic wrap-around term of `−iv D^±`.
pub fn periodic_boundary_step(n: usize, angle: f64) -> Result<Circuit> {
    require_n(n, 2)?;
    let u = bell_basis_unitary(n, n, -FRAC_PI_2)?;
    let controls: Vec<usize> = (0..n - 1).collect();
    let mut c = u.inverse();
    for &q in &controls {
        c.x(q);
    }
    c.mcrz(&controls, n - 1, 2.0 * angle);
    for &q in &controls {
        c.x(q);
    }
    c.append(&u);
    Ok(c)
}

/// One Trotter step for a 1-D advection register.
fn advection_axis(
    n: usize,
    v: f64,
    l: f64,
    tau: f64,
    bc: BoundaryCondition,
    order: Order,
) -> Result<Circuit> {
    let theta = v * tau / (2.0 * l);
    match bc {
        BoundaryCondition::Dirichlet => match order {
            Order::First => trotter_step_first(n, theta, -FRAC_PI_2),
            Order::Second => trotter_step_second(n, theta, -FRAC_PI_2),
        },
        // the n = 1 periodic central difference is identically zero
        BoundaryCondition::Periodic if n == 1 => Ok(Circuit::new(1)),
        BoundaryCondition::Periodic => {
            match order {
                Order::First => Ok(periodic_boundary_step(n, theta)?
                    .then(&trotter_step_first(n, theta, -FRAC_PI_2)?)),
                Order::Second => {
                    let half = periodic_boundary_step(n, theta / 2.0)?;
                    Ok(half
                        .clone()
                        .then(&trotter_step_second(n, theta, -FRAC_PI_2)?)
                        .then(&half))
                }
            }
        }
        BoundaryCondition::Neumann => Err(Error::Unsupported(
            "advection circuits need dirichlet or periodic boundaries".into(),
        )),
    }
}

/// Places per-axis circuits on their registers; axis 1 is most significant.
fn tensor_axes(d: usize, n: usize, axes: &[Circuit]) -> Circuit {
    let mut c = Circuit::new(d * n);
    for (a, axis) in axes.iter().enumerate() {
        c.append(&axis.embed(d * n, (d - 1 - a) * n));
    }
    c
}

fn ensure(p: &PDEProblem, eq: Equation) -> Result<()> {
    if p.equation != eq {
        return Err(Error::InvalidArgument(format!(
            "expected a {eq:?} problem, got {:?}",
            p.equation
        )));
    }
    let errs = p.problems();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    Ok(())
}

/// One Trotter step of the advection equation over `d·n` qubits. Axes act on
/// disjoint registers, so the d-dimensional step is their tensor product.
pub fn advection_circuit(p: &PDEProblem) -> Result<Circuit> {
    ensure(p, Equation::Advection)?;
    let axes = p
        .velocity
        .iter()
        .map(|&v| advection_axis(p.n, v, p.l, p.tau, p.bc, p.order))
        .collect::<Result<Vec<_>>>()?;
    Ok(tensor_axes(p.d, p.n, &axes))
}

/// One step for the generic shift Hamiltonian: `⊗_α V(γη_ατ, λ_α)`.
pub fn generic_circuit(p: &PDEProblem) -> Result<Circuit> {
    ensure(p, Equation::GenericShift)?;
    let axes = (0..p.d)
        .map(|a| {
            let angle = p.gamma * p.eta[a] * p.tau;
            match p.order {
                Order::First => trotter_step_first(p.n, angle, p.lambda[a]),
                Order::Second => trotter_step_second(p.n, angle, p.lambda[a]),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tensor_axes(p.d, p.n, &axes))
}

fn axis_strings(d: usize, n: usize, axis: usize, s: &LadderString) -> LadderString {
    let before = LadderString::identity((axis - 1) * n, Complex64::new(1.0, 0.0));
    let after = LadderString::identity((d - axis) * n, Complex64::new(1.0, 0.0));
    before.kron(s).kron(&after)
}

/// `(D_plus, D_minus)` of the wave Hamiltonian as ladder strings.
fn wave_difference_strings(
    n: usize,
    l: f64,
    bc: BoundaryCondition,
) -> Result<(Vec<LadderString>, Vec<LadderString>)> {
    let r = |x: f64| Complex64::new(x, 0.0);
    let minus: Vec<LadderString> = (1..=n).map(|j| LadderString::shift_minus(n, j)).collect();
    let plus: Vec<LadderString> = minus.iter().map(LadderString::adjoint).collect();
    match bc {
        BoundaryCondition::Dirichlet => {
            let mut dp: Vec<_> = minus.iter().map(|s| s.clone().scaled(r(1.0 / l))).collect();
            dp.push(LadderString::identity(n, r(-1.0 / l)));
            let mut dm: Vec<_> = plus.iter().map(|s| s.clone().scaled(r(-1.0 / l))).collect();
            dm.push(LadderString::identity(n, r(1.0 / l)));
            Ok((dp, dm))
        }
        BoundaryCondition::Periodic => {
            let k = 0.5 / l;
            let mut central = Vec::new();
            for j in 0..n {
                central.push(minus[j].clone().scaled(r(k)));
                central.push(plus[j].clone().scaled(r(-k)));
            }
            central.push(LadderString::uniform(n, Factor::Raise).scaled(r(k)));
            central.push(LadderString::uniform(n, Factor::Lower).scaled(r(-k)));
            Ok((central.clone(), central))
        }
        BoundaryCondition::Neumann => Err(Error::Unsupported(
            "wave circuits support mixed (dirichlet) or periodic boundaries".into(),
        )),
    }
}

/// The wave Hamiltonian as Hermitian pair terms, ordered axis by axis (shift
/// terms ascending in `j`, then the wrap-around terms), with the couplings
/// that act on the block label alone last.
pub fn wave_terms(p: &PDEProblem) -> Result<Vec<PairTerm>> {
    if p.equation != Equation::Wave {
        return Err(Error::InvalidArgument(
            "wave_terms needs a wave problem".into(),
        ));
    }
    let (dp, dm) = wave_difference_strings(p.n, p.l, p.bc)?;
    let c = Complex64::new(p.speed, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let block = |high: Factor, low: Option<Factor>| -> LadderString {
        let mut factors = Vec::new();
        if let Some(f) = low {
            factors.push(f);
        }
        factors.push(high);
        LadderString {
            coeff: one,
            factors,
        }
    };
    // (block string, axis, scalar) for the D_plus part; the D_minus part is
    // its adjoint and is added alongside so the pairing can check Hermiticity
    let upper: Vec<(LadderString, usize, Complex64)> = match p.d {
        1 => vec![(block(Factor::Lower, None), 1, one)],
        2 => vec![
            (block(Factor::Lower, None), 1, one),
            (block(Factor::Lower, None), 2, -i),
        ],
        3 => vec![
            (block(Factor::P0, Some(Factor::Lower)), 1, one),
            (block(Factor::Lower, Some(Factor::P0)), 2, one),
            (block(Factor::Lower, Some(Factor::Lower)), 3, one),
        ],
        d => return Err(Error::Unsupported(format!("wave equation with d = {d}"))),
    };
    let lower: Vec<(LadderString, usize, Complex64)> = match p.d {
        2 => vec![
            (block(Factor::Raise, None), 1, -one),
            (block(Factor::Raise, None), 2, -i),
        ],
        _ => upper
            .iter()
            .map(|(b, a, _)| (b.adjoint(), *a, -one))
            .collect(),
    };
    let mut strings = Vec::new();
    for ((bu, axis, su), (bl, axis_l, sl)) in upper.iter().zip(&lower) {
        debug_assert_eq!(axis, axis_l);
        for (sp, sm) in dp.iter().zip(&dm) {
            let field = axis_strings(p.d, p.n, *axis, sp);
            strings.push(bu.kron(&field).scaled(c * su));
            let field = axis_strings(p.d, p.n, *axis, sm);
            strings.push(bl.kron(&field).scaled(c * sl));
        }
    }
    let terms = pair_terms(&strings)?;
    let field_qubits = p.field_qubits();
    let (block_only, rest): (Vec<_>, Vec<_>) = terms
        .into_iter()
        .partition(|t| t.0.factors[..field_qubits].iter().all(|f| *f == Factor::I));
    Ok(rest.into_iter().chain(block_only).collect())
}

/// Product formula over pair terms: in list order (first order) or the
/// symmetric splitting `e^{H_1/2}⋯e^{H_{k−1}/2} e^{H_k} e^{H_{k−1}/2}⋯e^{H_1/2}`.
pub fn product_formula(num_qubits: usize, terms: &[PairTerm], tau: f64, order: Order) -> Circuit {
    let mut c = Circuit::new(num_qubits);
    match order {
        Order::First => {
            for t in terms {
                c.append(&t.exponential(tau));
            }
        }
        Order::Second => {
            if let Some((last, head)) = terms.split_last() {
                for t in head {
                    c.append(&t.exponential(tau / 2.0));
                }
                c.append(&last.exponential(tau));
                for t in head.iter().rev() {
                    c.append(&t.exponential(tau / 2.0));
                }
            }
        }
    }
    c
}

/// One Trotter step of the wave equation.
///
/// The 1-D mixed-boundary problem uses the explicit form: every shift pair
/// `σ01 ⊗ s_j^− + h.c.` through an extended Bell unitary on qubits
/// `1..j, n+1`, then `RX_{n+1}(−2cτ/l)` for the `−(c/l) X ⊗ I` coupling; the
/// second order splits that rotation into two halves around the shift pairs.
/// Every other case Trotterizes the assembled pair terms.
pub fn wave_circuit(p: &PDEProblem) -> Result<Circuit> {
    ensure(p, Equation::Wave)?;
    let terms = wave_terms(p)?;
    if !(p.d == 1 && p.bc == BoundaryCondition::Dirichlet) {
        return Ok(product_formula(p.num_qubits(), &terms, p.tau, p.order));
    }
    let block = p.n;
    let Some((coupling, shifts)) = terms.split_last() else {
        return Ok(Circuit::new(p.n + 1));
    };
    debug_assert!(coupling.0.factors[..p.n].iter().all(|f| *f == Factor::I));
    let angle = p.speed * p.tau / p.l;
    let mut c = Circuit::new(p.n + 1);
    let mut body = Circuit::new(p.n + 1);
    for t in shifts {
        body.append(&t.exponential(p.tau));
    }
    match p.order {
        Order::First => {
            c.append(&body).rx(block, -2.0 * angle);
        }
        Order::Second => {
            c.rx(block, -angle).append(&body).rx(block, -angle);
        }
    }
    Ok(c)
}

/// The one-step circuit for any problem kind.
pub fn step_circuit(p: &PDEProblem) -> Result<Circuit> {
    match p.equation {
        Equation::Advection => advection_circuit(p),
        Equation::Wave => wave_circuit(p),
        Equation::GenericShift => generic_circuit(p),
    }
}
