//! Dense complex helpers shared by the spectral and duality code.

use nalgebra::{Cholesky, DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{DualError, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

const MAX_SWEEPS: usize = 10_000;

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max(1, ‖m‖_max)`, the scale used for relative thresholds.
pub fn scale_of(m: &CMat) -> f64 {
    max_abs(m).max(1.0)
}

pub fn hermiticity_error(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
///
/// Only the Hermitian part of `m` is used.
pub fn hermitian_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let eig = SymmetricEigen::try_new(hermitian_part(m), f64::EPSILON, MAX_SWEEPS * n)
        .ok_or_else(|| DualError::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (values, vectors) = hermitian_eigen(m)?;
    let diag = DVector::from_iterator(values.len(), values.iter().map(|&x| Complex64::from(f(x))));
    Ok(&vectors * CMat::from_diagonal(&diag) * vectors.adjoint())
}

/// Eigenvalues of a general complex matrix via complex Schur form.
pub fn general_eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    let sweeps = MAX_SWEEPS * m.nrows().max(1);
    let schur = Schur::try_new(m.clone(), f64::EPSILON, sweeps)
        .or_else(|| Schur::try_new(m.clone(), 8.0 * f64::EPSILON, sweeps))
        .ok_or_else(|| DualError::Numerical("complex Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Eigenvalues of a 2N×2N BdG matrix.
///
/// Charge-conjugation symmetry makes `i·U G U†` real in the quadrature basis
/// `x = (a + a†)/√2`, `p = i(a† − a)/√2`, so the real Schur solver applies.
/// Falls back to the complex Schur form when the matrix lacks the symmetry.
pub fn bdg_eigenvalues(g: &CMat) -> Result<Vec<Complex64>> {
    let n = g.nrows();
    if !n.is_multiple_of(2) || g.ncols() != n {
        return Err(DualError::DimensionMismatch { expected: n + n % 2, actual: n });
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = CMat::zeros(n, n);
    for m in 0..n / 2 {
        let (a, b) = (2 * m, 2 * m + 1);
        u[(a, a)] = Complex64::new(h, 0.0);
        u[(a, b)] = Complex64::new(h, 0.0);
        u[(b, a)] = Complex64::new(0.0, -h);
        u[(b, b)] = Complex64::new(0.0, h);
    }
    let rotated = (&u * g * u.adjoint()) * I;
    let leak = rotated.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()));
    if leak > 1e-12 * scale_of(g) {
        return general_eigenvalues(g);
    }
    let real = rotated.map(|z| z.re);
    // The unshifted deflation test at machine epsilon occasionally stalls on
    // Hamiltonian spectra; a slightly looser threshold and then the complex
    // solver on the original matrix are tried before giving up.
    for eps in [f64::EPSILON, 8.0 * f64::EPSILON] {
        if let Some(schur) = Schur::try_new(real.clone(), eps, MAX_SWEEPS * n.max(1)) {
            return Ok(schur.complex_eigenvalues().iter().map(|z| Complex64::new(z.im, -z.re)).collect());
        }
    }
    general_eigenvalues(g)
}

/// Orthonormal columns spanning the `dim` smallest right-singular directions
/// of `m`, together with the largest singular value among them.
pub fn smallest_right_singular(m: &CMat, dim: usize) -> Result<(CMat, f64)> {
    let n = m.ncols();
    if dim == 0 || dim > n {
        return Err(DualError::DimensionMismatch { expected: n, actual: dim });
    }
    let svd = SVD::try_new(m.clone(), false, true, f64::EPSILON, MAX_SWEEPS * n)
        .ok_or_else(|| DualError::Numerical("SVD did not converge".into()))?;
    let v_t = svd.v_t.ok_or_else(|| DualError::Numerical("SVD returned no V".into()))?;
    let rows = v_t.nrows();
    let sv = svd.singular_values[rows - dim];
    let basis = CMat::from_fn(n, dim, |r, c| v_t[(rows - dim + c, r)].conj());
    Ok((basis, sv))
}

/// Solves `A x = μ B x` for Hermitian `A` and positive-definite `B`.
///
/// Eigenvectors are returned B-orthonormal, eigenvalues ascending.
pub fn generalized_hermitian_eigen(a: &CMat, b: &CMat) -> Result<(Vec<f64>, CMat)> {
    let chol = Cholesky::new(hermitian_part(b))
        .ok_or_else(|| DualError::Numerical("reference inner product is not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| DualError::Numerical("singular Cholesky factor".into()))?;
    let reduced = &l_inv * a * l_inv.adjoint();
    let (values, y) = hermitian_eigen(&reduced)?;
    Ok((values, l_inv.adjoint() * y))
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| DualError::Numerical("matrix is singular".into()))
}

/// Multiplies by τ₃ = 𝟙 ⊗ σ_z in place (flips the sign of creation slots).
pub fn tau3_apply(v: &CVec) -> CVec {
    CVec::from_fn(v.len(), |i, _| if i % 2 == 0 { v[i] } else { -v[i] })
}

/// Charge conjugation `C|v⟩ = τ₁|v⟩*`.
pub fn charge_conjugate(v: &CVec) -> CVec {
    CVec::from_fn(v.len(), |i, _| v[i ^ 1].conj())
}

/// `τ₃ M τ₃` without forming τ₃.
pub fn tau3_sandwich(m: &CMat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |r, c| {
        if (r + c) % 2 == 0 {
            m[(r, c)]
        } else {
            -m[(r, c)]
        }
    })
}

/// `τ₁ M* τ₁` without forming τ₁.
pub fn tau1_conj_sandwich(m: &CMat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r ^ 1, c ^ 1)].conj())
}

/// Left multiplication by τ₃.
pub fn tau3_left(m: &CMat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |r, c| if r % 2 == 0 { m[(r, c)] } else { -m[(r, c)] })
}

/// `max |Im z|` over a spectrum.
pub fn max_imag(values: &[Complex64]) -> f64 {
    values.iter().fold(0.0, |acc, z| acc.max(z.im.abs()))
}

/// Multiplies `v` by the unit phase that makes its largest-magnitude entry
/// real and positive. The first entry within a relative 1e-10 of the maximum
/// wins ties.
pub fn fix_phase(v: &mut CVec) {
    let max = v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if max == 0.0 {
        return;
    }
    if let Some(pivot) = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-10)) {
        let phase = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}
