//! Config-driven experiment runs: Trotterized circuit, exact propagation and
//! the classical baseline side by side, written as CSV plus a JSON summary.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analysis::{
    bounds_sweep, step_bound, verify_commutators, write_report_csv, SweepConfig,
};
use crate::circuit::step_circuit;
use crate::error::{Error, Result};
use crate::fdm::{advect_fdm, wave_fdm, FdmTrajectory, TimeScheme, WaveLaplacian, WaveOptions};
use crate::hamilton::{
    axis_coordinate, hamiltonian, propagate_state, wave_difference_pair, Equation, PDEProblem,
};
use crate::linalg::max_abs_diff;
use crate::opalg::embed_axis;
use crate::simulator::{
    evolve_at, expectation, sample_observable, Observable, StateVector, RECORD_LIMIT,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Advection1d,
    Advection2d,
    Wave1d,
    Wave2d,
    Wave1dShots,
    BoundsSweep,
    CommutatorSuite,
}

impl ExperimentKind {
    /// `(equation, d)` a simulation experiment expects, `None` for the analysis runs.
    fn shape(self) -> Option<(Equation, usize)> {
        match self {
            Self::Advection1d => Some((Equation::Advection, 1)),
            Self::Advection2d => Some((Equation::Advection, 2)),
            Self::Wave1d | Self::Wave1dShots => Some((Equation::Wave, 1)),
            Self::Wave2d => Some((Equation::Wave, 2)),
            Self::BoundsSweep | Self::CommutatorSuite => None,
        }
    }

    fn default_fdm_dt(self) -> f64 {
        match self {
            Self::Advection1d | Self::Advection2d => 0.01,
            _ => 0.1,
        }
    }
}

/// Grid for the commutator identity suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorConfig {
    pub ns: Vec<usize>,
    pub lambdas: Vec<f64>,
}

impl Default for CommutatorConfig {
    fn default() -> Self {
        Self {
            ns: (2..=6).collect(),
            lambdas: vec![0.0, 0.3, -std::f64::consts::FRAC_PI_2],
        }
    }
}

/// Classical baseline knobs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdmConfig {
    #[serde(default)]
    pub scheme: TimeScheme,
    #[serde(default)]
    pub laplacian: WaveLaplacian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub problem: Option<PDEProblem>,
    pub fdm_dt: f64,
    pub record_times: Vec<f64>,
    pub shots: Option<u64>,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub sweep: Option<SweepConfig>,
    pub commutator: Option<CommutatorConfig>,
    pub fdm: FdmConfig,
}

const TOP_KEYS: &[&str] = &[
    "schema_version",
    "experiment",
    "problem",
    "fdm_dt",
    "record_times",
    "shots",
    "seed",
    "output_dir",
    "sweep",
    "commutator",
    "fdm",
];

const PROBLEM_KEYS: &[&str] = &[
    "equation",
    "d",
    "n",
    "l",
    "velocity",
    "speed",
    "gamma",
    "eta",
    "lambda",
    "bc",
    "tau",
    "total_time",
    "order",
    "initial",
];

fn unknown_keys(obj: &Map<String, Value>, allowed: &[&str], prefix: &str, errs: &mut Vec<String>) {
    for k in obj.keys() {
        if !allowed.contains(&k.as_str()) {
            errs.push(format!("{prefix}{k}: unknown key"));
        }
    }
}

/// Deserializes `obj[key]`, recording a field-named error on failure.
fn field<T: DeserializeOwned>(
    obj: &Map<String, Value>,
    key: &str,
    errs: &mut Vec<String>,
) -> Option<T> {
    let v = obj.get(key)?;
    match serde_json::from_value(v.clone()) {
        Ok(x) => Some(x),
        Err(e) => {
            errs.push(format!("{key}: {e}"));
            None
        }
    }
}

/// `t` is a whole multiple of `step`.
fn is_multiple(t: f64, step: f64) -> bool {
    let q = t / step;
    (q - q.round()).abs() <= 1e-9 * q.round().abs().max(1.0)
}

/// Parses and checks a config, reporting every problem at once.
pub fn validate_config(text: &str) -> std::result::Result<ExperimentConfig, Vec<String>> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| vec![format!("not valid JSON: {e}")])?;
    let Some(obj) = root.as_object() else {
        return Err(vec!["config must be a JSON object".into()]);
    };
    let mut errs = Vec::new();
    unknown_keys(obj, TOP_KEYS, "", &mut errs);

    let schema = field::<u32>(obj, "schema_version", &mut errs);
    match schema {
        Some(SCHEMA_VERSION) => {}
        Some(v) => errs.push(format!(
            "schema_version: expected {SCHEMA_VERSION}, got {v}"
        )),
        None if !obj.contains_key("schema_version") => errs.push("schema_version: missing".into()),
        None => {}
    }
    let kind = field::<ExperimentKind>(obj, "experiment", &mut errs);
    if !obj.contains_key("experiment") {
        errs.push("experiment: missing".into());
    }

    let problem = match obj.get("problem") {
        Some(Value::Object(p)) => {
            let before = errs.len();
            unknown_keys(p, PROBLEM_KEYS, "problem.", &mut errs);
            if errs.len() > before {
                None
            } else {
                match serde_json::from_value::<PDEProblem>(Value::Object(p.clone())) {
                    Ok(p) => {
                        errs.extend(p.problems().into_iter().map(|e| format!("problem: {e}")));
                        Some(p)
                    }
                    Err(e) => {
                        errs.push(format!("problem: {e}"));
                        None
                    }
                }
            }
        }
        Some(_) => {
            errs.push("problem: expected an object".into());
            None
        }
        None => None,
    };

    let fdm_dt = field::<f64>(obj, "fdm_dt", &mut errs);
    let record_times = field::<Vec<f64>>(obj, "record_times", &mut errs).unwrap_or_default();
    let shots = field::<i64>(obj, "shots", &mut errs);
    let seed = field::<u64>(obj, "seed", &mut errs).unwrap_or(0);
    let output_dir = field::<PathBuf>(obj, "output_dir", &mut errs);
    let sweep = field::<SweepConfig>(obj, "sweep", &mut errs);
    let commutator = field::<CommutatorConfig>(obj, "commutator", &mut errs);
    let fdm = field::<FdmConfig>(obj, "fdm", &mut errs).unwrap_or_default();

    if let Some(s) = shots {
        if s < 1 {
            errs.push(format!("shots: must be positive, got {s}"));
        }
    }
    if let Some(dt) = fdm_dt {
        if !(dt > 0.0 && dt.is_finite()) {
            errs.push(format!("fdm_dt: must be positive, got {dt}"));
        }
    }

    let Some(kind) = kind else {
        return Err(errs);
    };
    let fdm_dt = fdm_dt.unwrap_or_else(|| kind.default_fdm_dt());

    if let Some((equation, d)) = kind.shape() {
        match &problem {
            None if !obj.contains_key("problem") => errs.push("problem: missing".into()),
            None => {}
            Some(p) => {
                if p.equation != equation || p.d != d {
                    errs.push(format!(
                        "problem: experiment {kind:?} needs a {equation:?} problem with d = {d}, got {:?} with d = {}",
                        p.equation, p.d
                    ));
                }
                if p.num_qubits() > RECORD_LIMIT {
                    errs.push(format!(
                        "problem: {} qubits exceeds the recording limit of {RECORD_LIMIT}",
                        p.num_qubits()
                    ));
                }
                let uses_fdm = kind != ExperimentKind::Wave1dShots;
                if uses_fdm && fdm_dt > 0.0 && !is_multiple(p.total_time, fdm_dt) {
                    errs.push(format!(
                        "fdm_dt: {fdm_dt} does not divide total_time = {}",
                        p.total_time
                    ));
                }
                for &t in &record_times {
                    if !(0.0..=p.total_time * (1.0 + 1e-12)).contains(&t) {
                        errs.push(format!("record_times: {t} outside [0, {}]", p.total_time));
                    } else if !is_multiple(t, p.tau) {
                        errs.push(format!(
                            "record_times: {t} is not a multiple of tau = {}",
                            p.tau
                        ));
                    } else if uses_fdm && fdm_dt > 0.0 && !is_multiple(t, fdm_dt) {
                        errs.push(format!(
                            "record_times: {t} is not a multiple of fdm_dt = {fdm_dt}"
                        ));
                    }
                }
            }
        }
        if kind == ExperimentKind::Wave1dShots && shots.is_none() {
            errs.push("shots: required for wave1d_shots".into());
        }
    } else if problem.is_some() {
        errs.push(format!("problem: not used by experiment {kind:?}"));
    }

    if let Some(c) = &commutator {
        if let Some(&n) = c.ns.iter().find(|&&n| !(2..=6).contains(&n)) {
            errs.push(format!("commutator.ns: {n} outside 2..=6"));
        }
    }

    if !errs.is_empty() {
        return Err(errs);
    }
    Ok(ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        experiment: kind,
        problem,
        fdm_dt,
        record_times,
        shots: shots.map(|s| s as u64),
        seed,
        output_dir,
        sweep,
        commutator,
        fdm,
    })
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    validate_config(&text).map_err(Error::Config)
}

/// Max-abs deviations at one recorded time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeErrors {
    pub t: f64,
    pub step: usize,
    pub circuit_vs_fdm: f64,
    pub exact_vs_fdm: f64,
    pub circuit_vs_exact: f64,
    /// `step · (one-step bound)`.
    pub bound: f64,
}

/// One point of the shot-estimation series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShotPoint {
    pub t: f64,
    pub estimate: f64,
    pub ci95: f64,
    pub exact: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub experiment: String,
    pub num_qubits: usize,
    pub steps: usize,
    pub step_bound: Option<f64>,
    pub errors: Vec<TimeErrors>,
    pub shots: Vec<ShotPoint>,
    pub warnings: Vec<String>,
    /// Measured quantities that exceed their bounds. Non-empty means the run failed.
    pub violations: Vec<String>,
    pub files: Vec<String>,
}

/// Row-major amplitude dump. Wave states carry a leading block column.
pub fn amplitude_csv(p: &PDEProblem, amps: &[Complex64]) -> String {
    let field = 1usize << p.field_qubits();
    let mut out = String::new();
    let block = p.block_qubits() > 0;
    if block {
        out.push_str("block,");
    }
    match p.d {
        1 => out.push_str("node,re,im\n"),
        _ => {
            for a in 1..=p.d {
                write!(out, "j{a},").unwrap();
            }
            out.push_str("re,im\n");
        }
    }
    for (idx, z) in amps.iter().enumerate() {
        if block {
            write!(out, "{},", idx / field).unwrap();
        }
        for a in 1..=p.d {
            write!(out, "{},", axis_coordinate(idx % field, a, p.d, p.n)).unwrap();
        }
        writeln!(out, "{:.16e},{:.16e}", z.re, z.im).unwrap();
    }
    out
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, body: &str) -> Result<()> {
        fs::write(self.dir.join(name), body)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// Label used in file names: the shortest decimal form of the time.
fn time_label(t: f64) -> String {
    format!("{t}")
}

/// Times to record, sorted; the final time alone when none are configured.
fn recorded(cfg: &ExperimentConfig, p: &PDEProblem) -> Vec<(f64, usize)> {
    let mut times = cfg.record_times.clone();
    if times.is_empty() {
        times.push(p.total_time);
    }
    times.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<(f64, usize)> = times
        .into_iter()
        .map(|t| (t, (t / p.tau).round() as usize))
        .collect();
    out.dedup_by_key(|x| x.1);
    out
}

/// Classical trajectory mapped into the quantum state layout. For waves the
/// second block is `i c (D_minus_1 + i D_minus_2) u`, the combination the
/// Hamiltonian evolves next to `∂u/∂t`.
fn fdm_states(
    cfg: &ExperimentConfig,
    p: &PDEProblem,
    times: &[(f64, usize)],
) -> Result<(Vec<Vec<Complex64>>, Vec<String>)> {
    let field = p.initial_field()?;
    let re: Vec<f64> = field.iter().map(|z| z.re).collect();
    let im: Vec<f64> = field.iter().map(|z| z.im).collect();
    let has_im = im.iter().any(|&x| x != 0.0);
    let ratio = p.tau / cfg.fdm_dt;
    let every = if is_multiple(p.tau, cfg.fdm_dt) {
        ratio.round() as usize
    } else {
        1
    };

    let run = |init: &[f64]| -> Result<FdmTrajectory> {
        match p.equation {
            Equation::Advection => advect_fdm(
                init,
                &p.velocity,
                p.l,
                cfg.fdm_dt,
                p.total_time,
                p.bc,
                every,
            ),
            _ => {
                let opts = WaveOptions {
                    scheme: cfg.fdm.scheme,
                    laplacian: cfg.fdm.laplacian,
                    record_every: every,
                };
                let zero = vec![0.0; init.len()];
                wave_fdm(
                    &zero,
                    init,
                    p.d,
                    p.speed,
                    p.l,
                    cfg.fdm_dt,
                    p.total_time,
                    p.bc,
                    opts,
                )
            }
        }
    };
    let tr = run(&re)?;
    let ti = if has_im { Some(run(&im)?) } else { None };
    let warnings = tr.warnings.clone();

    let combine = |a: &[f64], b: Option<&[f64]>| -> Vec<Complex64> {
        a.iter()
            .enumerate()
            .map(|(k, &x)| Complex64::new(x, b.map_or(0.0, |b| b[k])))
            .collect()
    };
    let lower = match p.equation {
        Equation::Wave => {
            let (_, dm) = wave_difference_pair(p.n, p.bc, p.l)?;
            let mut op = embed_axis(&dm, 1, p.d, p.n)?;
            for a in 2..=p.d {
                let ia = Complex64::new(0.0, 1.0).powu(a as u32 - 1);
                op = &op + &(&embed_axis(&dm, a, p.d, p.n)? * ia);
            }
            Some(op)
        }
        _ => None,
    };

    let mut out = Vec::with_capacity(times.len());
    for &(t, _) in times {
        let k = tr
            .index_of(t)
            .ok_or_else(|| Error::Invariant(format!("classical run did not record t = {t}")))?;
        let ki = ti.as_ref().map(|ti| k.min(ti.len() - 1));
        let u = combine(
            &tr.u[k],
            ti.as_ref().zip(ki).map(|(ti, k)| ti.u[k].as_slice()),
        );
        match &lower {
            None => out.push(u),
            Some(op) => {
                let w = combine(
                    &tr.dudt[k],
                    ti.as_ref().zip(ki).map(|(ti, k)| ti.dudt[k].as_slice()),
                );
                let scale = Complex64::new(0.0, p.speed);
                let mut state = w;
                state.extend(op.apply(&u).into_iter().map(|z| z * scale));
                out.push(state);
            }
        }
    }
    Ok((out, warnings))
}

/// Per-step seed for the shot sampler.
fn step_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add(k as u64)
}

fn fmt_row(vals: &[f64]) -> String {
    let cells: Vec<String> = vals.iter().map(|v| format!("{v:.16e}")).collect();
    cells.join(",")
}

fn run_simulation(
    cfg: &ExperimentConfig,
    p: &PDEProblem,
    w: &mut Writer,
    sum: &mut RunSummary,
) -> Result<()> {
    let r = p.steps()?;
    let step = step_circuit(p)?;
    let h = hamiltonian(p)?;
    let bound = step_bound(p).ok();
    sum.num_qubits = p.num_qubits();
    sum.steps = r;
    sum.step_bound = bound;
    let s0 = StateVector::new(p.initial_state()?)?;

    if cfg.experiment == ExperimentKind::Wave1dShots {
        let shots = cfg.shots.unwrap_or(1) as usize;
        let obs = Observable::kinetic_energy(p.block_qubits(), p.field_qubits());
        let traj = evolve_at(&step, &s0, r, |_| true)?;
        let mut exact = s0.amplitudes().to_vec();
        let mut csv = String::from("t,estimate,ci95,exact\n");
        for (k, s) in traj.states.iter().enumerate() {
            if k > 0 {
                exact = propagate_state(&h, &exact, p.tau)?;
            }
            let ex = expectation(&StateVector::new(exact.clone())?, &obs)?;
            let (estimate, ci95) = sample_observable(s, &obs, None, shots, step_seed(cfg.seed, k))?;
            let t = k as f64 * p.tau;
            check_state(sum, bound, t, k, s.amplitudes(), &exact);
            writeln!(csv, "{}", fmt_row(&[t, estimate, ci95, ex])).unwrap();
            sum.shots.push(ShotPoint {
                t,
                estimate,
                ci95,
                exact: ex,
            });
        }
        return w.put("shots.csv", &csv);
    }

    let times = recorded(cfg, p);
    let wanted: BTreeSet<usize> = times.iter().map(|&(_, k)| k).collect();
    let traj = evolve_at(&step, &s0, r, |k| wanted.contains(&k))?;
    let (fdm, warnings) = fdm_states(cfg, p, &times)?;
    sum.warnings.extend(warnings);

    let mut exact = s0.amplitudes().to_vec();
    let mut at = 0usize;
    let mut errors = String::from("t,circuit_vs_fdm,exact_vs_fdm,circuit_vs_exact,bound\n");
    for (&(t, k), classical) in times.iter().zip(&fdm) {
        if k > at {
            exact = propagate_state(&h, &exact, (k - at) as f64 * p.tau)?;
            at = k;
        }
        let pos = traj
            .steps
            .iter()
            .position(|&s| s == k)
            .ok_or_else(|| Error::Invariant(format!("step {k} was not recorded")))?;
        let circuit = traj.states[pos].amplitudes();
        let label = time_label(t);
        w.put(&format!("circuit_t{label}.csv"), &amplitude_csv(p, circuit))?;
        w.put(&format!("exact_t{label}.csv"), &amplitude_csv(p, &exact))?;
        w.put(&format!("fdm_t{label}.csv"), &amplitude_csv(p, classical))?;
        let e = check_state(sum, bound, t, k, circuit, &exact);
        let te = TimeErrors {
            circuit_vs_fdm: max_abs_diff(circuit, classical),
            exact_vs_fdm: max_abs_diff(&exact, classical),
            ..e
        };
        writeln!(
            errors,
            "{}",
            fmt_row(&[
                t,
                te.circuit_vs_fdm,
                te.exact_vs_fdm,
                te.circuit_vs_exact,
                te.bound
            ])
        )
        .unwrap();
        sum.errors.push(te);
    }
    w.put("errors.csv", &errors)
}

/// Checks `|circuit − exact| ≤ k · bound` and records any violation.
fn check_state(
    sum: &mut RunSummary,
    bound: Option<f64>,
    t: f64,
    k: usize,
    circuit: &[Complex64],
    exact: &[Complex64],
) -> TimeErrors {
    let dev = max_abs_diff(circuit, exact);
    let allowed = bound.map_or(f64::INFINITY, |b| k as f64 * b);
    if dev > allowed * (1.0 + 1e-9) + 1e-12 {
        sum.violations.push(format!(
            "t = {t}: circuit vs exact deviation {dev:.6e} exceeds {k} x step bound = {allowed:.6e}"
        ));
    }
    TimeErrors {
        t,
        step: k,
        circuit_vs_fdm: f64::NAN,
        exact_vs_fdm: f64::NAN,
        circuit_vs_exact: dev,
        bound: allowed,
    }
}

/// Runs `cfg`, writing every artifact into `dir`. Bound violations are
/// reported in the summary rather than as errors so the artifacts survive.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary> {
    let mut w = Writer::new(dir)?;
    let mut sum = RunSummary {
        experiment: serde_json::to_value(cfg.experiment)?
            .as_str()
            .unwrap_or_default()
            .to_string(),
        ..RunSummary::default()
    };
    match cfg.experiment {
        ExperimentKind::BoundsSweep => {
            let sweep = cfg.sweep.clone().unwrap_or_default();
            let reports = bounds_sweep(&sweep)?;
            for r in reports.iter().filter(|r| !r.within_bound()) {
                sum.violations.push(format!(
                    "{} n = {} tau = {}: measured {:.6e} exceeds bound {:.6e}",
                    r.kind, r.n, r.tau, r.measured_error, r.bound
                ));
            }
            let mut buf = Vec::new();
            write_report_csv(&reports, &mut buf)?;
            w.put("bounds.csv", &String::from_utf8_lossy(&buf))?;
        }
        ExperimentKind::CommutatorSuite => {
            let grid = cfg.commutator.clone().unwrap_or_default();
            let mut csv = String::from("n,lambda,name,passed,deviation\n");
            for &n in &grid.ns {
                for &lambda in &grid.lambdas {
                    let rep = verify_commutators(n, lambda)?;
                    for c in &rep.checks {
                        writeln!(
                            csv,
                            "{n},{lambda:.16e},{},{},{:.16e}",
                            c.name, c.passed, c.deviation
                        )
                        .unwrap();
                    }
                    for f in rep.failures() {
                        sum.violations.push(format!(
                            "n = {n} lambda = {lambda}: {} off by {:.3e}",
                            f.name, f.deviation
                        ));
                    }
                }
            }
            w.put("commutators.csv", &csv)?;
        }
        _ => {
            let p = cfg
                .problem
                .as_ref()
                .ok_or_else(|| Error::Config(vec!["problem: missing".into()]))?;
            run_simulation(cfg, p, &mut w, &mut sum)?;
        }
    }
    sum.files = w.files.clone();
    sum.files.push("summary.json".into());
    let mut json = serde_json::to_string_pretty(&sum)?;
    json.push('\n');
    w.put("summary.json", &json)?;
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamilton::{InitialCondition, Order};
    use crate::opalg::BoundaryCondition;

    fn advection_text(extra: &str) -> String {
        format!(
            r#"{{
  "schema_version": 1,
  "experiment": "advection1d",
  "problem": {{
    "equation": "advection", "d": 1, "n": 7, "velocity": [1.0], "bc": "periodic",
    "tau": 0.1, "total_time": 20.0,
    "initial": {{"kind": "uniform_window", "ranges": [[64, 128]]}}
  }}{extra}
}}"#
        )
    }

    #[test]
    fn minimal_config_parses() {
        let cfg = validate_config(&advection_text("")).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Advection1d);
        assert_eq!(cfg.fdm_dt, 0.01);
        assert!(cfg.record_times.is_empty());
        let p = cfg.problem.unwrap();
        assert_eq!(p.velocity, vec![1.0]);
        assert_eq!(p.order, Order::First);
        assert_eq!(
            p.initial,
            InitialCondition::UniformWindow {
                ranges: vec![[64, 128]]
            }
        );
    }

    #[test]
    fn every_error_is_reported() {
        let text = r#"{
  "schema_version": 2,
  "experiment": "wave1d_shots",
  "colour": "red",
  "shots": -5,
  "problem": {"equation": "wave", "d": 1, "n": 2, "bc": "dirichlet", "tau": 0.3, "total_time": 2.0}
}"#;
        let errs = validate_config(text).unwrap_err();
        let has = |s: &str| errs.iter().any(|e| e.contains(s));
        assert!(has("schema_version"), "{errs:?}");
        assert!(has("colour: unknown key"), "{errs:?}");
        assert!(has("shots: must be positive"), "{errs:?}");
        assert!(has("tau = 0.3") && has("total_time = 2"), "{errs:?}");
    }

    #[test]
    fn unknown_problem_key_is_named() {
        let text = advection_text("").replace("\"d\": 1,", "\"d\": 1, \"dims\": 3,");
        let errs = validate_config(&text).unwrap_err();
        assert_eq!(errs, vec!["problem.dims: unknown key".to_string()]);
    }

    #[test]
    fn record_times_must_align() {
        let errs =
            validate_config(&advection_text(r#", "record_times": [0.0, 0.15, 25.0]"#)).unwrap_err();
        assert_eq!(errs.len(), 2, "{errs:?}");
        assert!(errs[0].contains("0.15") && errs[1].contains("25"));
    }

    #[test]
    fn experiment_must_match_problem() {
        let text = advection_text("").replace("advection1d", "wave2d");
        let errs = validate_config(&text).unwrap_err();
        assert!(errs[0].contains("Wave"), "{errs:?}");
    }

    #[test]
    fn shots_required_for_shot_run() {
        let text = r#"{"schema_version": 1, "experiment": "wave1d_shots",
          "problem": {"equation": "wave", "d": 1, "n": 2, "bc": "dirichlet", "tau": 0.2, "total_time": 2.0}}"#;
        let errs = validate_config(text).unwrap_err();
        assert_eq!(errs, vec!["shots: required for wave1d_shots".to_string()]);
    }

    #[test]
    fn deviations_beyond_the_bound_are_violations() {
        let mut sum = RunSummary::default();
        let a = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let b = [Complex64::new(0.9, 0.0), Complex64::new(0.1, 0.0)];
        let e = check_state(&mut sum, Some(0.06), 1.0, 2, &a, &b);
        assert!(sum.violations.is_empty());
        assert!((e.bound - 0.12).abs() < 1e-15);
        check_state(&mut sum, Some(0.04), 1.0, 2, &a, &b);
        assert_eq!(sum.violations.len(), 1);
        check_state(&mut sum, None, 1.0, 2, &a, &b);
        assert_eq!(sum.violations.len(), 1);
    }

    #[test]
    fn amplitude_csv_layout() {
        let p = PDEProblem::wave(2, 1, 1.0, BoundaryCondition::Periodic);
        let amps: Vec<Complex64> = (0..8).map(|k| Complex64::new(k as f64, 0.0)).collect();
        let csv = amplitude_csv(&p, &amps);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "block,j1,j2,re,im");
        assert_eq!(lines.len(), 9);
        // index 6 = block 1, j1 = 1, j2 = 0
        assert!(
            lines[7].starts_with("1,1,0,6.0000000000000000e0,"),
            "{}",
            lines[7]
        );
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn advection_run_matches_references() {
        let cfg = validate_config(&advection_text(r#", "record_times": [0, 10, 20]"#)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let sum = run_experiment(&cfg, dir.path()).unwrap();
        assert!(sum.violations.is_empty(), "{:?}", sum.violations);
        assert_eq!(sum.errors.len(), 3);
        assert_eq!(sum.errors[0].circuit_vs_exact, 0.0);
        for e in &sum.errors[1..] {
            assert!(e.exact_vs_fdm < 0.1, "{e:?}");
            assert!(e.circuit_vs_exact <= e.bound);
        }
        let circuit = fs::read_to_string(dir.path().join("circuit_t20.csv")).unwrap();
        assert_eq!(circuit.lines().count(), 129);
        assert!(dir.path().join("summary.json").exists());
    }

    #[test]
    fn empty_record_times_write_final_only() {
        let text = advection_text("")
            .replace("\"n\": 7", "\"n\": 3")
            .replace("[[64, 128]]", "[[4, 8]]")
            .replace("20.0", "1.0");
        let cfg = validate_config(&text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let sum = run_experiment(&cfg, dir.path()).unwrap();
        let mut names = sum.files.clone();
        names.sort();
        assert_eq!(
            names,
            [
                "circuit_t1.csv",
                "errors.csv",
                "exact_t1.csv",
                "fdm_t1.csv",
                "summary.json"
            ]
        );
    }

    #[test]
    fn wave_fdm_state_agrees_with_exact() {
        let text = r#"{"schema_version": 1, "experiment": "wave1d", "fdm_dt": 0.001, "record_times": [0.5, 1.0],
          "problem": {"equation": "wave", "d": 1, "n": 3, "bc": "dirichlet", "tau": 0.05, "total_time": 1.0,
                      "order": "second", "initial": {"kind": "basis_state", "index": 3}}}"#;
        let cfg = validate_config(text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let sum = run_experiment(&cfg, dir.path()).unwrap();
        // same discretization, so only the time step separates them
        for e in &sum.errors {
            assert!(e.exact_vs_fdm < 5e-3, "{e:?}");
        }
    }

    #[test]
    fn shot_series_has_every_step() {
        let text = r#"{"schema_version": 1, "experiment": "wave1d_shots", "shots": 4000, "seed": 7,
          "problem": {"equation": "wave", "d": 1, "n": 2, "bc": "dirichlet", "tau": 0.2, "total_time": 2.0,
                      "order": "second", "initial": {"kind": "basis_state", "index": 1}}}"#;
        let cfg = validate_config(text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let sum = run_experiment(&cfg, dir.path()).unwrap();
        assert_eq!(sum.shots.len(), 11);
        assert_eq!(sum.shots[0].exact, 1.0);
        assert_eq!(sum.shots[0].ci95, 0.0);
        let again = run_experiment(&cfg, tempfile::tempdir().unwrap().path()).unwrap();
        assert_eq!(sum.shots, again.shots);
    }
}
