//! Classical finite-difference baselines: forward Euler with central
//! differences for advection, and an explicit first-order-system scheme for
//! the wave equation.
//!
//! Nodal arrays use the same layout as the quantum state: `2^{dn}` entries,
//! axis 1 the most significant coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamilton::steps_for;
use crate::opalg::BoundaryCondition;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    /// `w ← w + dt·c²Lu`, then `u ← u + dt·w`. Stable for `c·dt ≲ l`.
    #[default]
    SymplecticEuler,
    /// Both updates from the old values. Amplifies every oscillating mode
    /// by `√(1 + dt²ω²)` per step.
    ForwardEuler,
}

/// Which discrete Laplacian drives the wave baseline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveLaplacian {
    /// Three-point `(u_{j+1} − 2u_j + u_{j−1})/l²`.
    #[default]
    Standard,
    /// `D_plus·D_minus`, the product the wave Hamiltonian squares to. Equal to
    /// `Standard` for the mixed condition; a five-point stencil when periodic.
    Factored,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveOptions {
    pub scheme: TimeScheme,
    pub laplacian: WaveLaplacian,
    /// Record every this many steps; the last step is always kept.
    pub record_every: usize,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self {
            scheme: TimeScheme::default(),
            laplacian: WaveLaplacian::default(),
            record_every: 1,
        }
    }
}

/// Recorded time slices. `dudt` is empty for advection.
#[derive(Clone, Debug, PartialEq)]
pub struct FdmTrajectory {
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub dudt: Vec<Vec<f64>>,
    /// Non-fatal diagnostics such as a violated CFL condition.
    pub warnings: Vec<String>,
}

impl FdmTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the recorded slice at time `t`, if any.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.times.iter().position(|&s| (s - t).abs() <= tol)
    }

    pub fn final_u(&self) -> &[f64] {
        self.u.last().expect("trajectory holds the initial slice")
    }
}

/// Grid geometry inferred from the array length.
#[derive(Clone, Copy, Debug)]
struct Grid {
    d: usize,
    n: usize,
}

impl Grid {
    fn infer(len: usize, d: usize) -> Result<Self> {
        if d < 1 || !len.is_power_of_two() || len < 2 {
            return Err(Error::InvalidArgument(format!(
                "nodal array of length {len} is not a 2^(d n) grid"
            )));
        }
        let bits = len.trailing_zeros() as usize;
        if !bits.is_multiple_of(d) {
            return Err(Error::InvalidArgument(format!(
                "{len} nodes do not split into {d} equal axes"
            )));
        }
        Ok(Self { d, n: bits / d })
    }

    fn side(&self) -> usize {
        1 << self.n
    }

    fn stride(&self, axis: usize) -> usize {
        1 << ((self.d - axis) * self.n)
    }

    /// Value of the neighbour `offset` nodes away along `axis`, with the
    /// edge rule supplying ghost values.
    fn neighbour(&self, u: &[f64], idx: usize, axis: usize, offset: isize, edge: Edge) -> f64 {
        let side = self.side() as isize;
        let stride = self.stride(axis);
        let j = ((idx / stride) % self.side()) as isize;
        let base = idx - (j as usize) * stride;
        let mut k = j + offset;
        if k < 0 || k >= side {
            let mirror = |k: isize| if k < 0 { -k - 1 } else { 2 * side - k - 1 };
            k = match (edge, k < 0) {
                (Edge::Zero, _) | (Edge::Mixed, true) => return 0.0,
                (Edge::Wrap, _) => k.rem_euclid(side),
                (Edge::Mirror, _) | (Edge::Mixed, false) => mirror(k),
            };
        }
        u[base + (k as usize) * stride]
    }
}

/// Ghost-node rule at the ends of an axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Edge {
    Zero,
    Wrap,
    Mirror,
    /// Zero on the left, mirror on the right.
    Mixed,
}

impl Edge {
    fn advection(bc: BoundaryCondition) -> Self {
        match bc {
            BoundaryCondition::Dirichlet => Edge::Zero,
            BoundaryCondition::Neumann => Edge::Mirror,
            BoundaryCondition::Periodic => Edge::Wrap,
        }
    }

    fn wave(bc: BoundaryCondition) -> Result<Self> {
        match bc {
            BoundaryCondition::Dirichlet => Ok(Edge::Mixed),
            BoundaryCondition::Periodic => Ok(Edge::Wrap),
            BoundaryCondition::Neumann => Err(Error::Unsupported(
                "wave baseline supports mixed (dirichlet) or periodic boundaries".into(),
            )),
        }
    }
}

fn check_finite(name: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "{name} contains non-finite values"
        )));
    }
    Ok(())
}

fn check_step(l: f64, dt: f64, total_time: f64) -> Result<usize> {
    check_finite("parameters", &[l, dt, total_time])?;
    if l <= 0.0 || dt <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "l and dt must be positive, got l = {l}, dt = {dt}"
        )));
    }
    steps_for(total_time, dt)
}

fn keep(k: usize, steps: usize, every: usize) -> bool {
    k == steps || (every > 0 && k.is_multiple_of(every))
}

/// Forward Euler `u ← u − dt·Σ_α v_α D_α u` with the central stencil
/// `(u_{j+1} − u_{j−1})/2l` on every axis. `v.len()` is the dimension.
pub fn advect_fdm(
    u0: &[f64],
    v: &[f64],
    l: f64,
    dt: f64,
    total_time: f64,
    bc: BoundaryCondition,
    record_every: usize,
) -> Result<FdmTrajectory> {
    let grid = Grid::infer(u0.len(), v.len())?;
    check_finite("u0", u0)?;
    check_finite("v", v)?;
    let steps = check_step(l, dt, total_time)?;
    let mut warnings = Vec::new();
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if vmax * dt > l {
        warnings.push(format!("CFL: dt = {dt} exceeds l / max|v| = {}", l / vmax));
    }

    let mut u = u0.to_vec();
    let mut next = vec![0.0; u.len()];
    let mut traj = FdmTrajectory {
        times: vec![0.0],
        u: vec![u.clone()],
        dudt: Vec::new(),
        warnings,
    };
    let edge = Edge::advection(bc);
    let k_half = 0.5 / l;
    for k in 1..=steps {
        for (idx, out) in next.iter_mut().enumerate() {
            let mut flux = 0.0;
            for (a, &va) in v.iter().enumerate() {
                let up = grid.neighbour(&u, idx, a + 1, 1, edge);
                let down = grid.neighbour(&u, idx, a + 1, -1, edge);
                flux += va * (up - down) * k_half;
            }
            *out = u[idx] - dt * flux;
        }
        std::mem::swap(&mut u, &mut next);
        if keep(k, steps, record_every) {
            traj.times.push(k as f64 * dt);
            traj.u.push(u.clone());
        }
    }
    Ok(traj)
}

/// `c²·Σ_α L_α u` for the chosen Laplacian.
fn laplacian(
    grid: Grid,
    u: &[f64],
    c2: f64,
    l: f64,
    edge: Edge,
    kind: WaveLaplacian,
    out: &mut [f64],
) {
    let inv = c2 / (l * l);
    for (idx, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for a in 1..=grid.d {
            let at = |off| grid.neighbour(u, idx, a, off, edge);
            acc += match (kind, edge) {
                // square of the periodic central difference
                (WaveLaplacian::Factored, Edge::Wrap) => 0.25 * (at(2) - 2.0 * u[idx] + at(-2)),
                _ => at(1) - 2.0 * u[idx] + at(-1),
            };
        }
        *o = inv * acc;
    }
}

/// Explicit integration of `u' = w`, `w' = c²Lu` on a `d`-dimensional grid.
///
/// With `bc = Dirichlet` the stencil is the mixed problem: `u_{−1} = 0` on the
/// left and `u_N = u_{N−1}` on the right of every axis.
#[allow(clippy::too_many_arguments)]
pub fn wave_fdm(
    u0: &[f64],
    dudt0: &[f64],
    d: usize,
    c: f64,
    l: f64,
    dt: f64,
    total_time: f64,
    bc: BoundaryCondition,
    opts: WaveOptions,
) -> Result<FdmTrajectory> {
    let grid = Grid::infer(u0.len(), d)?;
    if dudt0.len() != u0.len() {
        return Err(Error::DimensionMismatch {
            expected: u0.len(),
            found: dudt0.len(),
        });
    }
    check_finite("u0", u0)?;
    check_finite("dudt0", dudt0)?;
    check_finite("c", &[c])?;
    let steps = check_step(l, dt, total_time)?;
    let edge = Edge::wave(bc)?;
    let mut warnings = Vec::new();
    if c.abs() * dt * (d as f64).sqrt() > l {
        warnings.push(format!(
            "CFL: c dt sqrt(d) = {} exceeds l = {l}",
            c.abs() * dt * (d as f64).sqrt()
        ));
    }
    let c2 = c * c;
    let mut u = u0.to_vec();
    let mut w = dudt0.to_vec();
    let mut lap = vec![0.0; u.len()];
    let mut traj = FdmTrajectory {
        times: vec![0.0],
        u: vec![u.clone()],
        dudt: vec![w.clone()],
        warnings,
    };
    for k in 1..=steps {
        laplacian(grid, &u, c2, l, edge, opts.laplacian, &mut lap);
        match opts.scheme {
            TimeScheme::SymplecticEuler => {
                for (wi, li) in w.iter_mut().zip(&lap) {
                    *wi += dt * li;
                }
                for (ui, wi) in u.iter_mut().zip(&w) {
                    *ui += dt * wi;
                }
            }
            TimeScheme::ForwardEuler => {
                for (ui, wi) in u.iter_mut().zip(&w) {
                    *ui += dt * wi;
                }
                for (wi, li) in w.iter_mut().zip(&lap) {
                    *wi += dt * li;
                }
            }
        }
        if keep(k, steps, opts.record_every) {
            traj.times.push(k as f64 * dt);
            traj.u.push(u.clone());
            traj.dudt.push(w.clone());
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamilton::{
        advection_hamiltonian, exact_propagator, wave_difference_pair, PDEProblem,
    };
    use crate::opalg::{build_difference, sigma, QubitOperator, Scheme};
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex64;
    use proptest::prelude::*;

    const P: BoundaryCondition = BoundaryCondition::Periodic;
    const D: BoundaryCondition = BoundaryCondition::Dirichlet;

    fn pulse(n: usize, lo: usize, hi: usize) -> Vec<f64> {
        (0..1usize << n)
            .map(|j| if (lo..hi).contains(&j) { 1.0 } else { 0.0 })
            .collect()
    }

    fn basis(dim: usize, k: usize) -> Vec<f64> {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        e
    }

    fn real_dense(op: &QubitOperator) -> DMatrix<f64> {
        op.to_dense().map(|z| {
            assert!(z.im.abs() < 1e-15);
            z.re
        })
    }

    #[test]
    fn zero_velocity_is_constant() {
        let u0 = pulse(4, 3, 7);
        let t = advect_fdm(&u0, &[0.0], 1.0, 0.1, 1.0, P, 1).unwrap();
        assert_eq!(t.len(), 11);
        assert!(t.u.iter().all(|u| *u == u0));
    }

    #[test]
    fn periodic_mass_is_conserved() {
        let u0 = pulse(7, 10, 30);
        let t = advect_fdm(&u0, &[1.0], 1.0, 0.01, 20.0, P, 100).unwrap();
        let m0: f64 = u0.iter().sum();
        for u in &t.u {
            assert!((u.iter().sum::<f64>() - m0).abs() < 1e-9);
        }
        assert_eq!(t.times.last().copied(), Some(2000.0 * 0.01));
        assert!(t.warnings.is_empty());
    }

    #[test]
    fn update_matrix_is_one_minus_dt_i_h() {
        for (d, bc) in [(1, P), (1, D), (2, P), (2, D)] {
            let n = 3;
            let v: Vec<f64> = [0.7, -1.3][..d].to_vec();
            let p = PDEProblem::advection(n, v.clone(), bc);
            let h = advection_hamiltonian(&p).unwrap();
            let dt = 0.05;
            let dim = 1 << (d * n);
            let want =
                DMatrix::<Complex64>::identity(dim, dim) - h.to_dense() * Complex64::new(0.0, dt);
            for k in 0..dim {
                let t = advect_fdm(&basis(dim, k), &v, 1.0, dt, dt, bc, 1).unwrap();
                for (i, &x) in t.final_u().iter().enumerate() {
                    assert!((want[(i, k)] - x).norm() < 1e-12, "d={d} {bc:?}");
                }
            }
        }
    }

    #[test]
    fn first_order_in_time() {
        // reference: exact exponential of the semi-discrete operator
        let n = 5;
        let p = PDEProblem::advection(n, vec![1.0], P);
        let h = advection_hamiltonian(&p).unwrap();
        let u0: Vec<f64> = (0..32)
            .map(|j| (-((j as f64 - 12.0) / 3.0).powi(2)).exp())
            .collect();
        let exact = exact_propagator(&h, 1.0).unwrap()
            * DVector::from_iterator(32, u0.iter().map(|&x| Complex64::new(x, 0.0)));
        let err = |dt: f64| {
            let t = advect_fdm(&u0, &[1.0], 1.0, dt, 1.0, P, 0).unwrap();
            t.final_u()
                .iter()
                .zip(exact.iter())
                .map(|(a, b)| (a - b.re).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(0.01) / err(0.005);
        assert!((1.8..2.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(advect_fdm(&[1.0, f64::NAN], &[1.0], 1.0, 0.1, 1.0, P, 1).is_err());
        assert!(advect_fdm(&[1.0, 0.0, 0.0], &[1.0], 1.0, 0.1, 1.0, P, 1).is_err());
        assert!(advect_fdm(&[1.0, 0.0], &[1.0], 1.0, 0.3, 1.0, P, 1).is_err());
        let t = advect_fdm(&[1.0, 0.0], &[5.0], 1.0, 0.5, 1.0, P, 1).unwrap();
        assert_eq!(t.warnings.len(), 1);
        let z = [0.0; 4];
        assert!(wave_fdm(
            &z,
            &z,
            1,
            1.0,
            1.0,
            0.1,
            1.0,
            BoundaryCondition::Neumann,
            WaveOptions::default()
        )
        .is_err());
        assert!(wave_fdm(
            &z,
            &z[..2],
            1,
            1.0,
            1.0,
            0.1,
            1.0,
            D,
            WaveOptions::default()
        )
        .is_err());
    }

    #[test]
    fn still_wave_drifts_linearly() {
        let u0: Vec<f64> = (0..16).map(|j| j as f64 * 0.1).collect();
        let w0: Vec<f64> = (0..16).map(|j| (j as f64).sin()).collect();
        for scheme in [TimeScheme::SymplecticEuler, TimeScheme::ForwardEuler] {
            let opts = WaveOptions {
                scheme,
                ..Default::default()
            };
            let t = wave_fdm(&u0, &w0, 1, 0.0, 1.0, 0.1, 2.0, D, opts).unwrap();
            for (k, &time) in t.times.iter().enumerate() {
                for j in 0..16 {
                    assert!((t.u[k][j] - (u0[j] + time * w0[j])).abs() < 1e-12);
                    assert_eq!(t.dudt[k][j], w0[j]);
                }
            }
        }
    }

    #[test]
    fn periodic_symmetry_is_kept() {
        let n = 5;
        let side = 1usize << n;
        let mirror = |j: usize| (side - j) % side;
        let u0: Vec<f64> = (0..side)
            .map(|j| (-(mirror(j).min(j) as f64 / 4.0).powi(2)).exp())
            .collect();
        let w0 = vec![0.0; side];
        let t = wave_fdm(&u0, &w0, 1, 1.0, 1.0, 0.1, 20.0, P, WaveOptions::default()).unwrap();
        for u in &t.u {
            for j in 0..side {
                assert!((u[j] - u[mirror(j)]).abs() < 1e-12);
            }
        }
    }

    /// Symplectic Euler written as powers of the dense block update matrix.
    fn dense_symplectic(
        lap: &DMatrix<f64>,
        c: f64,
        dt: f64,
        steps: usize,
        u0: &[f64],
        w0: &[f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let m = lap.nrows();
        let id = DMatrix::<f64>::identity(m, m);
        let cl = lap * (c * c);
        let mut step = DMatrix::<f64>::zeros(2 * m, 2 * m);
        step.view_mut((0, 0), (m, m))
            .copy_from(&(&id + &cl * (dt * dt)));
        step.view_mut((0, m), (m, m)).copy_from(&(&id * dt));
        step.view_mut((m, 0), (m, m)).copy_from(&(&cl * dt));
        step.view_mut((m, m), (m, m)).copy_from(&id);
        let mut x = DVector::from_iterator(2 * m, u0.iter().chain(w0).copied());
        for _ in 0..steps {
            x = &step * x;
        }
        (
            x.rows(0, m).iter().copied().collect(),
            x.rows(m, m).iter().copied().collect(),
        )
    }

    #[test]
    fn wave_matches_dense_integrator() {
        let n = 4;
        let lap = build_difference(n, Scheme::Laplacian, D, 1.0).unwrap();
        let mixed = real_dense(&(&lap + &sigma::s11().tensor_power(n)));
        let u0 = vec![0.0; 16];
        let w0 = basis(16, 8);
        let t = wave_fdm(&u0, &w0, 1, 1.0, 1.0, 0.1, 20.0, D, WaveOptions::default()).unwrap();
        let (u, w) = dense_symplectic(&mixed, 1.0, 0.1, 200, &u0, &w0);
        for j in 0..16 {
            assert!((t.final_u()[j] - u[j]).abs() < 1e-6);
            assert!((t.dudt.last().unwrap()[j] - w[j]).abs() < 1e-6);
        }
    }

    fn laplacian_columns(
        n: usize,
        d: usize,
        bc: BoundaryCondition,
        kind: WaveLaplacian,
    ) -> DMatrix<f64> {
        let dim = 1 << (d * n);
        let opts = WaveOptions {
            scheme: TimeScheme::ForwardEuler,
            laplacian: kind,
            record_every: 1,
        };
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let t = wave_fdm(
                &basis(dim, k),
                &vec![0.0; dim],
                d,
                1.0,
                1.0,
                1.0,
                1.0,
                bc,
                opts,
            )
            .unwrap();
            for (i, &x) in t.dudt[1].iter().enumerate() {
                m[(i, k)] = x;
            }
        }
        m
    }

    #[test]
    fn factored_laplacian_is_d_plus_d_minus() {
        for bc in [D, P] {
            let (dp, dm) = wave_difference_pair(3, bc, 1.0).unwrap();
            let want = real_dense(&dp.matmul(&dm));
            let got = laplacian_columns(3, 1, bc, WaveLaplacian::Factored);
            assert!((got - &want).amax() < 1e-12, "{bc:?}");
            if bc == D {
                // the mixed condition makes both Laplacians coincide
                let std = laplacian_columns(3, 1, bc, WaveLaplacian::Standard);
                assert!((std - want).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn two_dimensional_laplacian_is_a_kron_sum() {
        let n = 2;
        let lap = real_dense(
            &(&build_difference(n, Scheme::Laplacian, D, 1.0).unwrap()
                + &sigma::s11().tensor_power(n)),
        );
        let id = DMatrix::<f64>::identity(4, 4);
        let want = lap.kronecker(&id) + id.kronecker(&lap);
        let got = laplacian_columns(n, 2, D, WaveLaplacian::Standard);
        assert!((got - want).amax() < 1e-12);
    }

    #[test]
    fn wave_time_error_is_first_order() {
        let n = 5;
        let lap = real_dense(
            &(&build_difference(n, Scheme::Laplacian, D, 1.0).unwrap()
                + &sigma::s11().tensor_power(n)),
        );
        let u0: Vec<f64> = (0..32)
            .map(|j| (-((j as f64 - 16.0) / 3.0).powi(2)).exp())
            .collect();
        let w0 = vec![0.0; 32];
        let (u_ref, _) = dense_symplectic(&lap, 1.0, 1e-5, 100_000, &u0, &w0);
        let err = |dt: f64| {
            let t = wave_fdm(&u0, &w0, 1, 1.0, 1.0, dt, 1.0, D, WaveOptions::default()).unwrap();
            t.final_u()
                .iter()
                .zip(&u_ref)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(0.02) / err(0.01);
        assert!((1.8..2.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn forward_euler_wave_grows() {
        let w0 = basis(16, 8);
        let opts = WaveOptions {
            scheme: TimeScheme::ForwardEuler,
            ..Default::default()
        };
        let fe = wave_fdm(&[0.0; 16], &w0, 1, 1.0, 1.0, 0.1, 20.0, D, opts).unwrap();
        let se = wave_fdm(
            &[0.0; 16],
            &w0,
            1,
            1.0,
            1.0,
            0.1,
            20.0,
            D,
            WaveOptions::default(),
        )
        .unwrap();
        let amax = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(amax(fe.dudt.last().unwrap()) > 2.0 * amax(se.dudt.last().unwrap()));
    }

    proptest! {
        #[test]
        fn periodic_advection_conserves_mass(
            u0 in prop::collection::vec(-1.0f64..1.0, 16),
            v in prop::collection::vec(-2.0f64..2.0, 2),
        ) {
            let t = advect_fdm(&u0, &v, 1.0, 0.05, 1.0, P, 0).unwrap();
            let m0: f64 = u0.iter().sum();
            prop_assert!((t.final_u().iter().sum::<f64>() - m0).abs() < 1e-10);
            prop_assert_eq!(t.len(), 2);
        }
    }
}
