//! Dense and matrix-free numerics shared by the other modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::opalg::QubitOperator;

/// Above this dimension norms switch from a dense SVD to power iteration.
pub const DENSE_NORM_LIMIT: usize = 512;
/// Largest dimension for which a dense eigendecomposition is attempted.
pub const DENSE_EIG_LIMIT: usize = 4096;

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 10_000;

pub fn dense_spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Spectral norm of a sparse operator.
pub fn sparse_spectral_norm(op: &QubitOperator) -> Result<f64> {
    if op.is_zero() {
        return Ok(0.0);
    }
    if op.dim() <= DENSE_NORM_LIMIT {
        return Ok(dense_spectral_norm(&op.to_dense()));
    }
    let adj = op.adjoint();
    power_norm(op.dim(), |x| op.apply(x), |y| adj.apply(y))
}

/// Spectral norm of a dense matrix: SVD when small, power iteration above
/// [`DENSE_NORM_LIMIT`].
pub fn matrix_norm(m: &DMatrix<Complex64>) -> Result<f64> {
    if m.nrows() <= DENSE_NORM_LIMIT {
        return Ok(dense_spectral_norm(m));
    }
    let adj = m.adjoint();
    power_norm(m.ncols(), |x| dense_apply(m, x), |y| dense_apply(&adj, y))
}

/// Power iteration on `A†A`, tracking the Rayleigh quotient `‖Ax‖²` of the
/// normalized iterate.
fn power_norm(
    dim: usize,
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    apply_adj: impl Fn(&[Complex64]) -> Vec<Complex64>,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    normalize(&mut x);
    let mut prev = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let ax = apply(&x);
        let rho = ax.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if rho == 0.0 {
            return Ok(0.0);
        }
        if (rho - prev).abs() <= POWER_TOL * rho {
            return Ok(rho.sqrt());
        }
        prev = rho;
        x = apply_adj(&ax);
        normalize(&mut x);
    }
    Err(Error::NoConvergence(POWER_MAX_ITER))
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &mut [Complex64]) {
    let n = vec_norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|z| *z /= n);
    }
}

/// Largest `|a_i − b_i|`.
pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn check_hermitian(h: &QubitOperator) -> Result<()> {
    let defect = h.hermiticity_defect();
    let scale = h.iter().map(|(_, _, v)| v.norm()).fold(1.0, f64::max);
    if defect > 1e-12 * scale {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// `exp(−i H t)` as a dense matrix, via a Hermitian eigendecomposition.
pub fn exact_propagator(h: &QubitOperator, t: f64) -> Result<DMatrix<Complex64>> {
    check_hermitian(h)?;
    if h.dim() > DENSE_EIG_LIMIT {
        return Err(Error::TooLarge(h.dim(), DENSE_EIG_LIMIT));
    }
    let eig = h.to_dense().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(
        h.dim(),
        eig.eigenvalues
            .iter()
            .map(|&l| Complex64::from_polar(1.0, -l * t)),
    );
    let mut vd = v.clone();
    for (j, mut col) in vd.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    Ok(vd * v.adjoint())
}

/// `exp(−i H t) ψ` without forming the propagator: a Taylor series on
/// substeps short enough that `‖H‖ dt ≤ 1`.
pub fn propagate_state(h: &QubitOperator, psi: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    check_hermitian(h)?;
    if psi.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: psi.len(),
        });
    }
    // row sums bound the spectral norm of a Hermitian matrix
    let bound = h.norm_upper_bound();
    let steps = ((bound * t.abs()).ceil() as usize).max(1);
    let dt = t / steps as f64;
    let mut state = psi.to_vec();
    let minus_i_dt = Complex64::new(0.0, -dt);
    for _ in 0..steps {
        let mut term = state.clone();
        let mut acc = state.clone();
        for k in 1..=60 {
            term = h.apply(&term);
            let f = minus_i_dt / k as f64;
            term.iter_mut().for_each(|z| *z *= f);
            acc.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
            if vec_norm(&term) < 1e-17 {
                break;
            }
        }
        state = acc;
    }
    Ok(state)
}

pub fn dense_apply(m: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    let out = m * DVector::from_column_slice(v);
    out.as_slice().to_vec()
}
