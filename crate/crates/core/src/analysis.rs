//! Closed-form Trotter bounds, measured errors, step counts, cost estimates
//! and the ladder-operator identity suite.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    bell_basis_unitary, count_cnots, step_circuit, wave_terms, Circuit, CountMode,
};
use crate::error::{Error, Result};
use crate::hamilton::{exact_propagator, hamiltonian, shift_pair, Equation, Order, PDEProblem};
use crate::linalg::matrix_norm;
use crate::opalg::{
    ladder_term, sigma, BoundaryCondition, QubitOperator, ShiftDirection, ENTRY_TOL,
};
use crate::simulator::{materialize, MATERIALIZE_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `γ²τ²(n−1)/2`
    GenericFirst,
    /// `γ³τ³(2n−3)/6`
    GenericSecond,
    /// `γ²τ²(n−1)Σ_α η_α²/2`
    DdimFirst,
    /// `γ³τ³(2n−3)Σ_α |η_α|³/6`
    DdimSecond,
    /// `Σ_α v_α²τ²n/(8l²)`
    AdvectionPeriodicFirst,
    /// `Σ_α |v_α|³τ³(2n−1)/(48l³)`
    AdvectionPeriodicSecond,
    /// `c²τ²n/(2l²)`
    WaveFirst,
    /// `|c|³τ³(2n−1)/(6l³)`
    WaveSecond,
}

impl BoundKind {
    pub const ALL: [BoundKind; 8] = [
        BoundKind::GenericFirst,
        BoundKind::GenericSecond,
        BoundKind::DdimFirst,
        BoundKind::DdimSecond,
        BoundKind::AdvectionPeriodicFirst,
        BoundKind::AdvectionPeriodicSecond,
        BoundKind::WaveFirst,
        BoundKind::WaveSecond,
    ];

    pub fn order(self) -> Order {
        use BoundKind::*;
        match self {
            GenericFirst | DdimFirst | AdvectionPeriodicFirst | WaveFirst => Order::First,
            _ => Order::Second,
        }
    }

    pub fn name(self) -> &'static str {
        use BoundKind::*;
        match self {
            GenericFirst => "generic_first",
            GenericSecond => "generic_second",
            DdimFirst => "ddim_first",
            DdimSecond => "ddim_second",
            AdvectionPeriodicFirst => "advection_periodic_first",
            AdvectionPeriodicSecond => "advection_periodic_second",
            WaveFirst => "wave_first",
            WaveSecond => "wave_second",
        }
    }
}

/// Per-axis coefficients `γη_α` of a shift-form Hamiltonian. Dirichlet
/// advection is of this form with `γη_α = v_α/2l` and `λ = −π/2`.
fn shift_coefficients(p: &PDEProblem) -> Result<Vec<f64>> {
    match (p.equation, p.bc) {
        (Equation::GenericShift, _) => {
            if p.eta.len() != p.d {
                return Err(missing("eta", p));
            }
            Ok(p.eta.iter().map(|e| p.gamma * e).collect())
        }
        (Equation::Advection, BoundaryCondition::Dirichlet) => {
            if p.velocity.len() != p.d {
                return Err(missing("velocity", p));
            }
            Ok(p.velocity.iter().map(|v| v / (2.0 * p.l)).collect())
        }
        _ => Err(Error::InvalidArgument(format!(
            "{:?} with {:?} boundaries is not a shift-form Hamiltonian",
            p.equation, p.bc
        ))),
    }
}

fn missing(field: &str, p: &PDEProblem) -> Error {
    Error::InvalidArgument(format!("bound needs {field} with d = {} entries", p.d))
}

fn power_sum(xs: &[f64], k: i32) -> f64 {
    xs.iter().map(|x| x.abs().powi(k)).sum()
}

/// Evaluates the closed-form one-step bound of `kind` for `p` (at `p.tau`).
pub fn error_bound(kind: BoundKind, p: &PDEProblem) -> Result<f64> {
    use BoundKind::*;
    let n = p.n as f64;
    let t = p.tau;
    let l = p.l;
    match kind {
        GenericFirst | GenericSecond | DdimFirst | DdimSecond => {
            if p.n < 2 {
                return Err(Error::InvalidArgument(
                    "shift bounds are stated for n >= 2".into(),
                ));
            }
            let c = shift_coefficients(p)?;
            if matches!(kind, GenericFirst | GenericSecond) && c.len() != 1 {
                return Err(Error::InvalidArgument(format!(
                    "{} is the one-dimensional bound, got d = {}",
                    kind.name(),
                    c.len()
                )));
            }
            Ok(match kind.order() {
                Order::First => t * t * (n - 1.0) * power_sum(&c, 2) / 2.0,
                Order::Second => t.powi(3) * (2.0 * n - 3.0) * power_sum(&c, 3) / 6.0,
            })
        }
        AdvectionPeriodicFirst | AdvectionPeriodicSecond => {
            if p.equation != Equation::Advection || p.bc != BoundaryCondition::Periodic {
                return Err(Error::InvalidArgument(format!(
                    "{} needs a periodic advection problem",
                    kind.name()
                )));
            }
            if p.velocity.len() != p.d {
                return Err(missing("velocity", p));
            }
            let v = &p.velocity;
            Ok(match kind.order() {
                Order::First => power_sum(v, 2) * t * t * n / (8.0 * l * l),
                Order::Second => power_sum(v, 3) * t.powi(3) * (2.0 * n - 1.0) / (48.0 * l.powi(3)),
            })
        }
        WaveFirst | WaveSecond => {
            if p.equation != Equation::Wave || p.d != 1 || p.bc != BoundaryCondition::Dirichlet {
                return Err(Error::InvalidArgument(format!(
                    "{} needs a one-dimensional mixed-boundary wave problem",
                    kind.name()
                )));
            }
            let c = p.speed.abs();
            Ok(match kind.order() {
                Order::First => c * c * t * t * n / (2.0 * l * l),
                Order::Second => c.powi(3) * t.powi(3) * (2.0 * n - 1.0) / (6.0 * l.powi(3)),
            })
        }
    }
}

/// The closed-form bound that covers the circuit [`step_circuit`] builds for
/// `p`, if there is one.
pub fn bound_kind_for(p: &PDEProblem) -> Option<BoundKind> {
    use BoundKind::*;
    let first = p.order == Order::First;
    let pick = |a, b| Some(if first { a } else { b });
    match (p.equation, p.bc) {
        (Equation::GenericShift, _) if p.d == 1 => pick(GenericFirst, GenericSecond),
        (Equation::GenericShift, _) => pick(DdimFirst, DdimSecond),
        (Equation::Advection, BoundaryCondition::Dirichlet) => pick(DdimFirst, DdimSecond),
        (Equation::Advection, BoundaryCondition::Periodic) => {
            pick(AdvectionPeriodicFirst, AdvectionPeriodicSecond)
        }
        (Equation::Wave, BoundaryCondition::Dirichlet) if p.d == 1 => pick(WaveFirst, WaveSecond),
        _ => None,
    }
}

/// Commutator bound for a product formula over `terms` applied in list
/// order (first order) or in the symmetric splitting (second order).
///
/// With `B_j = Σ_{k>j} H_k`: first order `τ²/2 Σ_j ‖[H_j, B_j]‖`; second order
/// `Σ_j τ³/12 ‖[B_j,[B_j,H_j]]‖ + τ³/24 ‖[H_j,[H_j,B_j]]‖`. Norms use the
/// Schur test, so the result is a true upper bound.
pub fn assembled_bound(terms: &[QubitOperator], tau: f64, order: Order) -> f64 {
    let Some(first) = terms.first() else {
        return 0.0;
    };
    let mut tails = vec![QubitOperator::zero(first.num_qubits()); terms.len()];
    for j in (0..terms.len().saturating_sub(1)).rev() {
        tails[j] = &tails[j + 1] + &terms[j + 1];
    }
    let mut acc = 0.0;
    for (h, b) in terms.iter().zip(&tails) {
        if b.is_zero() {
            continue;
        }
        let hb = h.commutator(b);
        acc += match order {
            Order::First => tau * tau / 2.0 * hb.norm_upper_bound(),
            Order::Second => {
                let bbh = b.commutator(&b.commutator(h));
                let hhb = h.commutator(&hb);
                tau.powi(3) / 12.0 * bbh.norm_upper_bound()
                    + tau.powi(3) / 24.0 * hhb.norm_upper_bound()
            }
        };
    }
    acc
}

/// One-step bound for `p`: the closed form when one applies, otherwise the
/// commutator bound of the assembled wave terms.
pub fn step_bound(p: &PDEProblem) -> Result<f64> {
    if let Some(kind) = bound_kind_for(p) {
        return error_bound(kind, p);
    }
    if p.equation == Equation::Wave {
        let ops: Vec<QubitOperator> = wave_terms(p)?.iter().map(|t| t.to_operator()).collect();
        return Ok(assembled_bound(&ops, p.tau, p.order));
    }
    Err(Error::Unsupported(format!(
        "no Trotter bound for {:?} with {:?} boundaries",
        p.equation, p.bc
    )))
}

/// `‖exp(−iHτ) − step‖` in the operator norm.
pub fn trotter_error_measured(h: &QubitOperator, step: &Circuit, tau: f64) -> Result<f64> {
    if h.num_qubits() != step.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: h.num_qubits(),
            found: step.num_qubits(),
        });
    }
    if step.num_qubits() > MATERIALIZE_LIMIT {
        return Err(Error::TooLarge(
            1 << step.num_qubits(),
            1 << MATERIALIZE_LIMIT,
        ));
    }
    let exact = exact_propagator(h, tau)?;
    let circ = materialize(step)?;
    matrix_norm(&(exact - circ))
}

/// Analytic CNOTs in one first-order step `V`: `9n² − 33n + 34` for `n ≥ 2`.
pub fn first_order_cnots(n: usize) -> usize {
    match n {
        0 | 1 => 0,
        n => 9 * n * n + 34 - 33 * n,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepCount {
    /// Smallest `r` with `r · bound(T/r) ≤ ε`.
    pub r: usize,
    /// `r · d · (9n² − 33n + 34)`.
    pub cnots: usize,
    /// Leading-order CNOT count for the shift
    /// bounds: `4.5 d n³ T² Σc²/ε` (first order) and
    /// `3√3 d n^{2.5} T^{1.5} (Σ|c|³)^{0.5}/ε^{0.5}` (second order), with
    /// `c_α = γη_α`.
    pub leading_cnots: Option<f64>,
}

/// Steps needed to reach additive error `ε` at time `T`.
///
/// The bounds scale as `C τ^{p+1}`, so `r` steps accumulate `C T^{p+1}/r^p`
/// and `r = ⌈(C T^{p+1}/ε)^{1/p}⌉`. An exact integer is kept as is.
pub fn steps_required(
    kind: BoundKind,
    p: &PDEProblem,
    total_time: f64,
    eps: f64,
) -> Result<StepCount> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    let mut unit = p.clone();
    unit.tau = 1.0;
    let c = error_bound(kind, &unit)?;
    let order = match kind.order() {
        Order::First => 1,
        Order::Second => 2,
    };
    let x = (c * total_time.powi(order + 1) / eps).powf(1.0 / order as f64);
    let r = ((x * (1.0 - 1e-12)).ceil() as usize).max(1);
    let dn = p.d as f64;
    let nn = p.n as f64;
    let leading = shift_coefficients(p).ok().map(|co| match kind.order() {
        Order::First => 4.5 * dn * nn.powi(3) * total_time.powi(2) * power_sum(&co, 2) / eps,
        Order::Second => {
            3.0 * 3f64.sqrt() * dn * nn.powf(2.5) * total_time.powf(1.5) * power_sum(&co, 3).sqrt()
                / eps.sqrt()
        }
    });
    Ok(StepCount {
        r,
        cnots: r * p.d * first_order_cnots(p.n),
        leading_cnots: leading,
    })
}

/// Unit-constant evaluation of the classical explicit-scheme cost
/// `s 2^{dn} (T²/ε + T/l)` (first order) or `s 2^{dn} (T^{1.5}/ε^{0.5} + T/l)`
/// (second order). An asymptotic comparator, not an operation count.
pub fn classical_cost(
    d: usize,
    n: usize,
    total_time: f64,
    eps: f64,
    sparsity: f64,
    l: f64,
    order: Order,
) -> f64 {
    let nodes = 2f64.powi((d * n) as i32);
    let time = match order {
        Order::First => total_time * total_time / eps,
        Order::Second => total_time.powf(1.5) / eps.sqrt(),
    };
    sparsity * nodes * (time + total_time / l)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrotterReport {
    /// Bound label: a [`BoundKind`] name or `assembled`.
    pub kind: String,
    pub equation: Equation,
    pub n: usize,
    pub d: usize,
    pub order: Order,
    pub tau: f64,
    pub measured_error: f64,
    pub bound: f64,
    pub cnots_analytic: usize,
    pub cnots_decomposed: usize,
    /// Steps for `ε` at `T` under the first- and second-order variants of
    /// the bound, when it is a closed form.
    pub r_thm1: Option<usize>,
    pub r_thm2: Option<usize>,
}

impl TrotterReport {
    pub fn ratio(&self) -> f64 {
        if self.bound > 0.0 {
            self.measured_error / self.bound
        } else if self.measured_error == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn within_bound(&self) -> bool {
        self.measured_error <= self.bound
    }
}

fn sibling(kind: BoundKind, order: Order) -> BoundKind {
    use BoundKind::*;
    let pair = match kind {
        GenericFirst | GenericSecond => (GenericFirst, GenericSecond),
        DdimFirst | DdimSecond => (DdimFirst, DdimSecond),
        AdvectionPeriodicFirst | AdvectionPeriodicSecond => {
            (AdvectionPeriodicFirst, AdvectionPeriodicSecond)
        }
        WaveFirst | WaveSecond => (WaveFirst, WaveSecond),
    };
    match order {
        Order::First => pair.0,
        Order::Second => pair.1,
    }
}

/// Measured one-step error of `p` against its bound. `total_time` and `eps`
/// feed the step counts.
pub fn trotter_report(p: &PDEProblem, total_time: f64, eps: f64) -> Result<TrotterReport> {
    let h = hamiltonian(p)?;
    let step = step_circuit(p)?;
    let measured = trotter_error_measured(&h, &step, p.tau)?;
    let kind = bound_kind_for(p);
    let steps = |o| -> Result<Option<usize>> {
        kind.map(|k| steps_required(sibling(k, o), p, total_time, eps).map(|s| s.r))
            .transpose()
    };
    Ok(TrotterReport {
        kind: kind.map_or("assembled", BoundKind::name).to_string(),
        equation: p.equation,
        n: p.n,
        d: p.d,
        order: p.order,
        tau: p.tau,
        measured_error: measured,
        bound: step_bound(p)?,
        cnots_analytic: count_cnots(&step, CountMode::Analytic),
        cnots_decomposed: count_cnots(&step, CountMode::Decomposed),
        r_thm1: steps(Order::First)?,
        r_thm2: steps(Order::Second)?,
    })
}

/// Grid of a bounds sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub taus: Vec<f64>,
    pub orders: Vec<Order>,
    /// Horizon and target error for the step-count columns.
    pub total_time: f64,
    pub epsilon: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_min: 2,
            n_max: 6,
            taus: vec![0.2, 0.1, 0.05],
            orders: vec![Order::First, Order::Second],
            total_time: 1.0,
            epsilon: 0.01,
        }
    }
}

/// Largest `d·n` for which the two-dimensional shift bounds are swept.
const DDIM_QUBITS: usize = 8;

/// The sweep problems: generic shift (`λ ∈ {0, −π/2}`), periodic advection
/// and mixed-boundary waves in one dimension, plus two-dimensional generic
/// shifts while `2n ≤ 8`.
pub fn sweep_problems(cfg: &SweepConfig) -> Vec<PDEProblem> {
    use std::f64::consts::FRAC_PI_2;
    let mut out = Vec::new();
    for n in cfg.n_min.max(2)..=cfg.n_max {
        for &order in &cfg.orders {
            for &tau in &cfg.taus {
                let with = |p: PDEProblem| p.with_time(tau, tau).with_order(order);
                for lambda in [0.0, -FRAC_PI_2] {
                    out.push(with(PDEProblem::generic(n, 1.0, vec![1.0], vec![lambda])));
                }
                if 2 * n <= DDIM_QUBITS {
                    out.push(with(PDEProblem::generic(
                        n,
                        1.0,
                        vec![1.0, 0.5],
                        vec![0.0, -FRAC_PI_2],
                    )));
                }
                out.push(with(PDEProblem::advection(
                    n,
                    vec![1.0],
                    BoundaryCondition::Periodic,
                )));
                out.push(with(PDEProblem::wave(
                    1,
                    n,
                    1.0,
                    BoundaryCondition::Dirichlet,
                )));
            }
        }
    }
    out
}

pub fn bounds_sweep(cfg: &SweepConfig) -> Result<Vec<TrotterReport>> {
    sweep_problems(cfg)
        .iter()
        .map(|p| trotter_report(p, cfg.total_time, cfg.epsilon))
        .collect()
}

fn opt(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// `kind,d,n,order,tau,measured,bound,ratio,cnots_analytic,r_thm1,r_thm2`
pub fn write_report_csv(reports: &[TrotterReport], mut w: impl Write) -> std::io::Result<()> {
    writeln!(
        w,
        "kind,d,n,order,tau,measured,bound,ratio,cnots_analytic,r_thm1,r_thm2"
    )?;
    for r in reports {
        let order = match r.order {
            Order::First => 1,
            Order::Second => 2,
        };
        writeln!(
            w,
            "{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
            r.kind,
            r.d,
            r.n,
            order,
            r.tau,
            r.measured_error,
            r.bound,
            r.ratio(),
            r.cnots_analytic,
            opt(r.r_thm1),
            opt(r.r_thm2)
        )?;
    }
    Ok(())
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    /// Largest entrywise deviation, or the violation of an inequality.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub n: usize,
    pub lambda: f64,
    pub checks: Vec<IdentityCheck>,
}

impl CommutatorReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

struct Suite {
    checks: Vec<IdentityCheck>,
}

impl Suite {
    fn equal(&mut self, name: String, a: &QubitOperator, b: &QubitOperator) {
        let dev = a.max_abs_diff(b);
        self.checks.push(IdentityCheck {
            name,
            passed: dev <= ENTRY_TOL,
            deviation: dev,
        });
    }

    fn dense_equal(&mut self, name: String, a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) {
        let dev = (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.checks.push(IdentityCheck {
            name,
            passed: dev <= ENTRY_TOL,
            deviation: dev,
        });
    }

    fn at_most(&mut self, name: String, value: f64, limit: f64) {
        self.checks.push(IdentityCheck {
            name,
            passed: value <= limit + ENTRY_TOL,
            deviation: (value - limit).max(0.0),
        });
    }

    fn close(&mut self, name: String, value: f64, want: f64) {
        let dev = (value - want).abs();
        self.checks.push(IdentityCheck {
            name,
            passed: dev <= ENTRY_TOL,
            deviation: dev,
        });
    }
}

/// Checks the ladder-operator algebra behind the Trotter bounds for one `n`
/// and phase `λ`, entrywise at [`ENTRY_TOL`].
///
/// With `s_j = e^{iλ}s_j^− + e^{−iλ}s_j^+` on `n` qubits:
/// - `[s_j, s_j'] = 0` for `n ≥ j > j' ≥ 2`, and `[s_j, s_j] = 0`;
/// - `‖[s_j, s_1]‖ = 1` for `j ≥ 2`, with both closed forms of `[s_j, s_1]`;
/// - the recursions `s^∓_{j,n} = s^∓_{j−1,n−1} ⊗ σ10/σ01`;
/// - the product tables of `s^±_{j,n}` and of `s_{j,n}`, including `s_1² = I`;
/// - the nested-commutator norms `‖[H2,[H2,H1]]‖ ≤ 3n − 5` and
///   `‖[H1,[H1,H2]]‖ ≤ 2(n − 1)` with `H1 = s_1`, `H2 = Σ_{j≥2} s_j`.
pub fn verify_commutators(n: usize, lambda: f64) -> Result<CommutatorReport> {
    if !(2..=6).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "identity suite needs 2 <= n <= 6, got {n}"
        )));
    }
    let mut suite = Suite { checks: Vec::new() };
    let minus = |m: usize, j: usize| ladder_term(m, j, ShiftDirection::Minus);
    let plus = |m: usize, j: usize| ladder_term(m, j, ShiftDirection::Plus);
    let s = |j: usize| shift_pair(n, j, lambda);
    let e = |k: f64| Complex64::from_polar(1.0, k * lambda);
    let zero = QubitOperator::zero(n);
    let eye = sigma::eye();
    let (s00, s11, s01, s10, z) = (
        sigma::s00(),
        sigma::s11(),
        sigma::s01(),
        sigma::s10(),
        sigma::z(),
    );

    for j in 1..=n {
        let sj = s(j)?;
        suite.equal(format!("[s_{j}, s_{j}] = 0"), &sj.commutator(&sj), &zero);
        for jp in 2..j {
            suite.equal(
                format!("[s_{j}, s_{jp}] = 0"),
                &sj.commutator(&s(jp)?),
                &zero,
            );
        }
    }

    let s1 = s(1)?;
    for j in 2..=n {
        let comm = s(j)?.commutator(&s1);
        let norm = crate::linalg::dense_spectral_norm(&comm.to_dense());
        suite.close(format!("||[s_{j}, s_1]|| = 1"), norm, 1.0);

        // −I^{n−j} ⊗ (e^{2iλ}σ01⊗σ10^{j−2} − e^{−2iλ}σ10⊗σ01^{j−2}) ⊗ Z
        let inner = &s01.kron(&s10.tensor_power(j - 2)).scale(e(2.0))
            - &s10.kron(&s01.tensor_power(j - 2)).scale(e(-2.0));
        let ladder_form = eye
            .tensor_power(n - j)
            .kron(&inner)
            .kron(&z)
            .scale_real(-1.0);
        suite.equal(format!("[s_{j}, s_1] ladder form"), &comm, &ladder_form);

        // i I^{n−j} ⊗ U_{j−1}(−2λ−π/2)(Z ⊗ |1⟩⟨1|^{j−2})U_{j−1}(−2λ−π/2)† ⊗ Z
        let u = materialize(&bell_basis_unitary(
            j - 1,
            j - 1,
            -2.0 * lambda - std::f64::consts::FRAC_PI_2,
        )?)?;
        let diag = z.kron(&s11.tensor_power(j - 2)).to_dense();
        let rotated = QubitOperator::from_dense(&(&u * diag * u.adjoint()))?;
        let bell_form = eye
            .tensor_power(n - j)
            .kron(&rotated)
            .kron(&z)
            .scale(Complex64::new(0.0, 1.0));
        suite.dense_equal(
            format!("[s_{j}, s_1] Bell form"),
            &comm.to_dense(),
            &bell_form.to_dense(),
        );
    }

    if n >= 2 {
        for j in 2..=n {
            suite.equal(
                format!("s^-_{{{j},{n}}} = s^-_{{{},{}}} x s10", j - 1, n - 1),
                &minus(n, j)?,
                &minus(n - 1, j - 1)?.kron(&s10),
            );
            suite.equal(
                format!("s^+_{{{j},{n}}} = s^+_{{{},{}}} x s01", j - 1, n - 1),
                &plus(n, j)?,
                &plus(n - 1, j - 1)?.kron(&s01),
            );
        }
    }

    for j in 2..=n {
        let (mj, pj) = (minus(n, j)?, plus(n, j)?);
        for jp in 2..j {
            let (mk, pk) = (minus(n, jp)?, plus(n, jp)?);
            for (name, a, b) in [
                ("--", &mj, &mk),
                ("++", &pj, &pk),
                ("-+", &mj, &pk),
                ("+-", &pj, &mk),
            ] {
                suite.equal(
                    format!("s{}_{j} s{}_{jp} = 0", &name[..1], &name[1..]),
                    &a.matmul(b),
                    &zero,
                );
            }
            for (name, a, b) in [("-+", &mk, &pj), ("+-", &pk, &mj)] {
                suite.equal(
                    format!("s{}_{jp} s{}_{j} = 0", &name[..1], &name[1..]),
                    &a.matmul(b),
                    &zero,
                );
            }
            for (name, a, b) in [("--", &mk, &mj), ("++", &pk, &pj)] {
                suite.equal(
                    format!("s{}_{jp} s{}_{j} = 0", &name[..1], &name[1..]),
                    &a.matmul(b),
                    &zero,
                );
            }
            suite.equal(format!("s_{j} s_{jp} = 0"), &s(j)?.matmul(&s(jp)?), &zero);
        }
        let (m1, p1) = (minus(n, 1)?, plus(n, 1)?);
        let (mr, pr) = (minus(n - 1, j - 1)?, plus(n - 1, j - 1)?);
        suite.equal(format!("s-_{j} s-_1"), &mj.matmul(&m1), &mr.kron(&s11));
        suite.equal(format!("s-_1 s-_{j}"), &m1.matmul(&mj), &mr.kron(&s00));
        suite.equal(format!("s+_{j} s+_1"), &pj.matmul(&p1), &pr.kron(&s00));
        suite.equal(format!("s+_1 s+_{j}"), &p1.matmul(&pj), &pr.kron(&s11));
        for (name, prod) in [
            ("s-_j s+_1", mj.matmul(&p1)),
            ("s-_1 s+_j", m1.matmul(&pj)),
            ("s+_j s-_1", pj.matmul(&m1)),
            ("s+_1 s-_j", p1.matmul(&mj)),
        ] {
            suite.equal(format!("{} = 0 (j = {j})", name), &prod, &zero);
        }
        let sj = s(j)?;
        let a = &mr.kron(&s11).scale(e(2.0)) + &pr.kron(&s00).scale(e(-2.0));
        suite.equal(format!("s_{j} s_1"), &sj.matmul(&s1), &a);
        let b = &mr.kron(&s00).scale(e(2.0)) + &pr.kron(&s11).scale(e(-2.0));
        suite.equal(format!("s_1 s_{j}"), &s1.matmul(&sj), &b);
    }
    for j in 1..=n {
        let (mj, pj) = (minus(n, j)?, plus(n, j)?);
        suite.equal(format!("s-_{j} s-_{j} = 0"), &mj.matmul(&mj), &zero);
        suite.equal(format!("s+_{j} s+_{j} = 0"), &pj.matmul(&pj), &zero);
        let low = eye
            .tensor_power(n - j)
            .kron(&s00)
            .kron(&s11.tensor_power(j - 1));
        let high = eye
            .tensor_power(n - j)
            .kron(&s11)
            .kron(&s00.tensor_power(j - 1));
        suite.equal(format!("s-_{j} s+_{j}"), &mj.matmul(&pj), &low);
        suite.equal(format!("s+_{j} s-_{j}"), &pj.matmul(&mj), &high);
        let sj = s(j)?;
        suite.equal(format!("s_{j}^2"), &sj.matmul(&sj), &(&low + &high));
    }
    suite.equal(
        "s_1^2 = I".into(),
        &s1.matmul(&s1),
        &QubitOperator::identity(n),
    );

    let mut h2 = QubitOperator::zero(n);
    for j in 2..=n {
        h2 = &h2 + &s(j)?;
    }
    let nf = n as f64;
    let norm = |op: &QubitOperator| crate::linalg::dense_spectral_norm(&op.to_dense());
    suite.at_most(
        "||[H2,[H2,H1]]|| <= 3n-5".into(),
        norm(&h2.commutator(&h2.commutator(&s1))),
        3.0 * nf - 5.0,
    );
    suite.at_most(
        "||[H1,[H1,H2]]|| <= 2(n-1)".into(),
        norm(&s1.commutator(&s1.commutator(&h2))),
        2.0 * (nf - 1.0),
    );

    Ok(CommutatorReport {
        n,
        lambda,
        checks: suite.checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::trotter_step_first;
    use std::f64::consts::FRAC_PI_2;

    fn generic(n: usize, tau: f64, order: Order) -> PDEProblem {
        PDEProblem::generic(n, 1.0, vec![1.0], vec![0.0])
            .with_time(tau, tau)
            .with_order(order)
    }

    #[test]
    fn bound_examples() {
        let p = generic(7, 0.1, Order::First);
        assert!((error_bound(BoundKind::GenericFirst, &p).unwrap() - 0.03).abs() < 1e-15);
        let p =
            PDEProblem::advection(7, vec![1.0], BoundaryCondition::Periodic).with_time(0.1, 0.1);
        assert!(
            (error_bound(BoundKind::AdvectionPeriodicFirst, &p).unwrap() - 0.00875).abs() < 1e-15
        );
        let w = PDEProblem::wave(1, 4, 1.0, BoundaryCondition::Dirichlet).with_time(0.1, 0.1);
        assert!((error_bound(BoundKind::WaveFirst, &w).unwrap() - 0.02).abs() < 1e-15);
        for kind in BoundKind::ALL {
            let mut q = match kind {
                BoundKind::AdvectionPeriodicFirst | BoundKind::AdvectionPeriodicSecond => p.clone(),
                BoundKind::WaveFirst | BoundKind::WaveSecond => w.clone(),
                _ => generic(4, 0.1, kind.order()),
            };
            q.tau = 0.0;
            assert_eq!(error_bound(kind, &q).unwrap(), 0.0);
        }
    }

    #[test]
    fn bounds_reject_mismatched_problems() {
        let w = PDEProblem::wave(1, 4, 1.0, BoundaryCondition::Dirichlet);
        assert!(error_bound(BoundKind::GenericFirst, &w).is_err());
        assert!(error_bound(BoundKind::AdvectionPeriodicSecond, &w).is_err());
        let g2 = PDEProblem::generic(3, 1.0, vec![1.0, 2.0], vec![0.0, 0.0]);
        assert!(error_bound(BoundKind::GenericFirst, &g2).is_err());
        assert!(error_bound(BoundKind::DdimFirst, &g2).is_ok());
        assert!(error_bound(
            BoundKind::WaveFirst,
            &PDEProblem::wave(2, 2, 1.0, BoundaryCondition::Dirichlet)
        )
        .is_err());
    }

    #[test]
    fn dirichlet_advection_is_a_shift_hamiltonian() {
        let a =
            PDEProblem::advection(4, vec![0.8], BoundaryCondition::Dirichlet).with_time(0.1, 0.1);
        let g = PDEProblem::generic(4, 0.4, vec![1.0], vec![-FRAC_PI_2]).with_time(0.1, 0.1);
        assert_eq!(bound_kind_for(&a), Some(BoundKind::DdimFirst));
        let ba = error_bound(BoundKind::DdimFirst, &a).unwrap();
        let bg = error_bound(BoundKind::GenericFirst, &g).unwrap();
        assert!((ba - bg).abs() < 1e-15);
        assert!(hamiltonian(&a)
            .unwrap()
            .approx_eq(&hamiltonian(&g).unwrap(), 1e-15));
    }

    #[test]
    fn measured_error_examples() {
        let h = QubitOperator::zero(2);
        assert_eq!(
            trotter_error_measured(&h, &Circuit::new(2), 0.3).unwrap(),
            0.0
        );

        let p = generic(4, 0.1, Order::First);
        let e = trotter_error_measured(&hamiltonian(&p).unwrap(), &step_circuit(&p).unwrap(), 0.1)
            .unwrap();
        assert!(e > 0.0 && e <= 0.015, "{e}");

        for order in [Order::First, Order::Second] {
            let p = generic(1, 0.3, order);
            let e =
                trotter_error_measured(&hamiltonian(&p).unwrap(), &step_circuit(&p).unwrap(), 0.3)
                    .unwrap();
            assert!(e < 1e-10);
        }
        assert!(trotter_error_measured(&QubitOperator::zero(3), &Circuit::new(2), 0.1).is_err());
    }

    #[test]
    fn worked_step_counts() {
        let p = PDEProblem::generic(5, 1.0, vec![1.0], vec![0.0]);
        let t1 = steps_required(BoundKind::GenericFirst, &p, 1.0, 0.01).unwrap();
        assert_eq!(t1.r, 200);
        assert_eq!(t1.cnots, 200 * 94);
        let t2 = steps_required(BoundKind::GenericSecond, &p, 1.0, 0.01).unwrap();
        assert_eq!(t2.r, 11);
        // leading-term constant of the second-order count
        let lead = t2.leading_cnots.unwrap();
        assert!((lead - 3.0 * 3f64.sqrt() * 5f64.powf(2.5) / 0.1).abs() < 1e-9);
        // a loose target needs a single step
        assert_eq!(
            steps_required(BoundKind::GenericFirst, &p, 1.0, 10.0)
                .unwrap()
                .r,
            1
        );
        assert!(steps_required(BoundKind::GenericFirst, &p, 1.0, 0.0).is_err());
    }

    #[test]
    fn second_order_needs_fewer_steps() {
        for n in 2..=8 {
            for t in [1.0, 2.0, 5.0] {
                for eps in [0.1, 0.01, 0.001] {
                    let p = PDEProblem::generic(n, 1.0, vec![1.0], vec![0.0]);
                    let r1 = steps_required(BoundKind::GenericFirst, &p, t, eps)
                        .unwrap()
                        .r;
                    let r2 = steps_required(BoundKind::GenericSecond, &p, t, eps)
                        .unwrap()
                        .r;
                    assert!(r2 <= r1, "n={n} T={t} eps={eps}: {r2} > {r1}");
                }
            }
        }
    }

    #[test]
    fn gate_formula_matches_circuits() {
        for n in 2..=8 {
            let c = trotter_step_first(n, 0.1, 0.0).unwrap();
            assert_eq!(count_cnots(&c, CountMode::Analytic), first_order_cnots(n));
        }
    }

    #[test]
    fn classical_cost_examples() {
        let c = classical_cost(1, 10, 1.0, 0.01, 2.0, 1.0, Order::First);
        assert!((c - 2.0 * 1024.0 * 101.0).abs() < 1e-6);
        let lim = classical_cost(1, 10, 1.0, 1e300, 2.0, 1.0, Order::First);
        assert!((lim - 2048.0).abs() < 1e-6);
        for d in 1..=3 {
            let a = classical_cost(d, 4, 2.0, 0.1, 3.0, 0.5, Order::Second);
            let b = classical_cost(d, 5, 2.0, 0.1, 3.0, 0.5, Order::Second);
            assert!((b / a - 2f64.powi(d as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn assembled_bound_covers_generic_circuits() {
        // the s_j with j >= 2 commute, so V and V2 are the list-order and
        // symmetric products over [s_1, ..., s_n]
        for n in 2..=5 {
            for order in [Order::First, Order::Second] {
                let p = PDEProblem::generic(n, 1.0, vec![1.0], vec![0.3])
                    .with_time(0.2, 0.2)
                    .with_order(order);
                let terms: Vec<QubitOperator> =
                    (1..=n).map(|j| shift_pair(n, j, 0.3).unwrap()).collect();
                let bound = assembled_bound(&terms, 0.2, order);
                let measured = trotter_error_measured(
                    &hamiltonian(&p).unwrap(),
                    &step_circuit(&p).unwrap(),
                    0.2,
                )
                .unwrap();
                assert!(measured <= bound, "n={n} {order:?}: {measured} > {bound}");
            }
        }
        assert_eq!(assembled_bound(&[], 0.1, Order::First), 0.0);
        let single = [sigma::x()];
        assert_eq!(assembled_bound(&single, 0.1, Order::Second), 0.0);
    }

    #[test]
    fn wave_2d_step_respects_assembled_bound() {
        for order in [Order::First, Order::Second] {
            for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Periodic] {
                let p = PDEProblem::wave(2, 2, 1.0, bc)
                    .with_time(0.1, 0.1)
                    .with_order(order);
                let r = trotter_report(&p, 1.0, 0.01).unwrap();
                assert_eq!(r.kind, "assembled");
                assert!(r.within_bound(), "{r:?}");
            }
        }
    }

    #[test]
    fn commutator_suite_small() {
        for lambda in [0.0, 0.3, -FRAC_PI_2] {
            for n in 2..=4 {
                let rep = verify_commutators(n, lambda).unwrap();
                assert!(rep.all_passed(), "n={n} λ={lambda}: {:?}", rep.failures());
            }
        }
        let n2 = verify_commutators(2, 0.0).unwrap();
        assert!(n2
            .checks
            .iter()
            .any(|c| c.name == "||[s_2, s_1]|| = 1" && c.passed));
        assert!(verify_commutators(1, 0.0).is_err());
        assert!(verify_commutators(7, 0.0).is_err());
    }

    #[test]
    fn report_csv_layout() {
        let p = generic(3, 0.1, Order::Second);
        let r = trotter_report(&p, 1.0, 0.01).unwrap();
        let mut buf = Vec::new();
        write_report_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "kind,d,n,order,tau,measured,bound,ratio,cnots_analytic,r_thm1,r_thm2"
        );
        assert!(lines[1].starts_with("generic_second,1,3,2,1.0000000000000001e-1,"));
        assert_eq!(lines[1].split(',').count(), 11);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [0.2, 0.1, 0.05];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(3)).collect();
        assert!((loglog_slope(&xs, &ys) - 3.0).abs() < 1e-12);
    }
}
