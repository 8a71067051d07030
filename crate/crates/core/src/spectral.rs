//! Stability classification and Krein-normalized eigenbases.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{DualError, Result};
use crate::linalg::{self, CMat, CVec};
use crate::model::{build_bdg, BdgMatrix, QbhModel};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub stable: bool,
    pub max_imag: f64,
    pub diagonalizable: bool,
    /// Condition number of the τ₃-Gram matrix of the eigenbasis; infinite when
    /// some eigenspace is defective.
    pub gram_condition: f64,
    pub eigenvalues: Vec<Complex64>,
}

/// Groups indices whose values lie within `tol` of each other (single linkage).
fn cluster(values: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

struct Eigenspace {
    center: Complex64,
    basis: CMat,
    residual: f64,
}

fn eigenspaces(g: &CMat, values: &[Complex64], tol: &Tolerances) -> Result<Vec<Eigenspace>> {
    let scale = linalg::scale_of(g);
    let dim = g.nrows();
    cluster(values, tol.cluster * scale)
        .into_iter()
        .map(|idx| {
            let center = idx.iter().map(|&i| values[i]).sum::<Complex64>() / idx.len() as f64;
            let shifted = g - CMat::identity(dim, dim) * center;
            let (basis, residual) = linalg::smallest_right_singular(&shifted, idx.len())?;
            Ok(Eigenspace { center, basis, residual })
        })
        .collect()
}

fn condition_number(m: &CMat) -> f64 {
    let sv = m.singular_values();
    let (max, min) = sv.iter().fold((0.0_f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn assess(g: &CMat, eigenvalues: Vec<Complex64>, tol: &Tolerances) -> Result<StabilityReport> {
    let max_imag = linalg::max_imag(&eigenvalues);
    let spaces = eigenspaces(g, &eigenvalues, tol)?;
    let scale = linalg::scale_of(g);
    let defective = spaces.iter().any(|s| s.residual > tol.null_space * scale);
    let gram_condition = if defective {
        f64::INFINITY
    } else {
        let cols: Vec<CVec> = spaces
            .iter()
            .flat_map(|s| s.basis.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>())
            .collect();
        let psi = CMat::from_columns(&cols);
        condition_number(&(psi.adjoint() * linalg::tau3_left(&psi)))
    };
    let diagonalizable = gram_condition <= tol.cond_max;
    Ok(StabilityReport {
        stable: max_imag <= tol.imag && diagonalizable,
        max_imag,
        diagonalizable,
        gram_condition,
        eigenvalues,
    })
}

/// Dynamical stability: real spectrum and a well-conditioned τ₃-Gram matrix.
pub fn classify_stability(g: &BdgMatrix, tol: &Tolerances) -> Result<StabilityReport> {
    let eigenvalues = linalg::bdg_eigenvalues(g.matrix())?;
    assess(g.matrix(), eigenvalues, tol)
}

/// Krein-normalized eigenbasis.
///
/// Columns `0..N` carry Krein sign `+1` with frequencies sorted descending;
/// column `n + N` is the charge conjugate of column `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
    pub krein_signs: Vec<i8>,
    pub rigidities: Vec<f64>,
}

impl SpectralData {
    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len() / 2
    }

    pub fn vector(&self, n: usize) -> CVec {
        self.eigenvectors.column(n).into_owned()
    }

    /// `max_n ‖G ψ_n − ω_n ψ_n‖`.
    pub fn eigen_residual(&self, g: &BdgMatrix) -> f64 {
        (0..self.eigenvalues.len())
            .map(|n| {
                let v = self.vector(n);
                (g.matrix() * &v - &v * Complex64::from(self.eigenvalues[n])).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `‖Ψ†τ₃Ψ − diag(λ)‖_max`.
    pub fn krein_orthonormality_error(&self) -> f64 {
        let psi = &self.eigenvectors;
        let gram = psi.adjoint() * linalg::tau3_left(psi);
        let target = CMat::from_fn(gram.nrows(), gram.ncols(), |i, j| {
            if i == j {
                Complex64::from(f64::from(self.krein_signs[i]))
            } else {
                linalg::ZERO
            }
        });
        linalg::max_abs_diff(&gram, &target)
    }

    /// `max_n ‖ψ_{n+N} − τ₁ψ_n*‖`.
    pub fn conjugation_error(&self) -> f64 {
        let n = self.n_modes();
        (0..n)
            .map(|i| (self.vector(i + n) - linalg::charge_conjugate(&self.vector(i))).norm())
            .fold(0.0, f64::max)
    }
}

pub fn krein_normalize(g: &BdgMatrix, tol: &Tolerances) -> Result<SpectralData> {
    krein_normalize_with_reference(g, None, tol)
}

/// Krein normalization with an optional positive-definite reference inner
/// product `W` used to resolve degenerate eigenspaces.
///
/// Without a reference each eigenspace is resolved by diagonalizing its
/// τ₃-Gram matrix in an orthonormal basis. With a reference the Gram matrix is
/// diagonalized against `V†WV` instead, which selects the Krein-orthonormal
/// basis that is also `W`-orthogonal. When every eigenvalue is simple the two
/// agree; when a degenerate eigenspace mixes Krein signs the resulting metric
/// depends on this choice.
pub fn krein_normalize_with_reference(
    g: &BdgMatrix,
    reference: Option<&CMat>,
    tol: &Tolerances,
) -> Result<SpectralData> {
    let gm = g.matrix();
    let n = g.n_modes();
    let dim = g.dim();
    if let Some(w) = reference {
        if w.shape() != (dim, dim) {
            return Err(DualError::DimensionMismatch { expected: dim, actual: w.nrows() });
        }
    }
    let report = classify_stability(g, tol)?;
    if !report.stable {
        return Err(DualError::Unstable(format!(
            "max |Im ω| = {:.3e}, Gram condition = {:.3e}",
            report.max_imag, report.gram_condition
        )));
    }
    let real: Vec<Complex64> = report.eigenvalues.iter().map(|z| Complex64::from(z.re)).collect();
    let scale = linalg::scale_of(gm);
    let zero_tol = tol.cluster * scale;
    let h = g.sph();

    let mut positive: Vec<CVec> = Vec::with_capacity(n);
    for space in eigenspaces(gm, &real, tol)? {
        let c = space.center.re;
        if c < -zero_tol {
            continue;
        }
        let v = &space.basis;
        let gram = linalg::hermitian_part(&(v.adjoint() * linalg::tau3_left(v)));
        let (mu, u) = match reference {
            Some(w) => linalg::generalized_hermitian_eigen(&gram, &(v.adjoint() * w * v))?,
            None => linalg::hermitian_eigen(&gram)?,
        };
        let mut found = 0;
        for (k, &m) in mu.iter().enumerate() {
            if m.abs() < tol.gram_min {
                return Err(DualError::Unstable(format!(
                    "eigenspace at ω = {c:.6} has a Krein-null direction (Gram eigenvalue {m:.3e})"
                )));
            }
            let psi = (v * u.column(k)).unscale(m.abs().sqrt());
            if m > 0.0 {
                positive.push(psi);
                found += 1;
            } else if c > zero_tol {
                positive.push(linalg::charge_conjugate(&psi));
            }
        }
        if c <= zero_tol && 2 * found != v.ncols() {
            return Err(DualError::Unstable(format!(
                "zero-frequency eigenspace of dimension {} has {found} positive-norm directions",
                v.ncols()
            )));
        }
    }
    if positive.len() != n {
        return Err(DualError::Unstable(format!(
            "found {} positive-norm eigenvectors, expected {n}",
            positive.len()
        )));
    }

    let mut modes: Vec<(f64, CVec)> = positive
        .into_iter()
        .map(|mut psi| {
            linalg::fix_phase(&mut psi);
            let omega = (psi.adjoint() * &h * &psi)[(0, 0)].re;
            (omega, psi)
        })
        .collect();
    modes.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut cols: Vec<CVec> = modes.iter().map(|(_, v)| v.clone()).collect();
    cols.extend(modes.iter().map(|(_, v)| linalg::charge_conjugate(v)));
    let mut eigenvalues: Vec<f64> = modes.iter().map(|(w, _)| *w).collect();
    eigenvalues.extend(modes.iter().map(|(w, _)| -*w));
    let rigidities = cols.iter().map(|v| 1.0 / v.norm_squared()).collect();
    let krein_signs = (0..dim).map(|i| if i < n { 1 } else { -1 }).collect();

    let sd = SpectralData {
        eigenvalues,
        eigenvectors: CMat::from_columns(&cols),
        krein_signs,
        rigidities,
    };
    let norm_scale = sd.eigenvectors.iter().fold(1.0_f64, |a, z| a.max(z.norm_sqr()));
    let err = sd.krein_orthonormality_error();
    let bound = tol.invariant * norm_scale * scale;
    if err > bound {
        return Err(DualError::Invariant { name: "Krein orthonormality", value: err, tol: bound });
    }
    Ok(sd)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalModes {
    /// Positive-sign frequencies `ω_1 ≥ … ≥ ω_N`.
    pub frequencies: Vec<f64>,
    /// `½ Σ ω_n − ½ tr K`.
    pub offset: f64,
}

pub fn normal_mode_decomposition(sd: &SpectralData, model: &QbhModel) -> NormalModes {
    let frequencies: Vec<f64> = sd.eigenvalues[..sd.n_modes()].to_vec();
    let offset = 0.5 * frequencies.iter().sum::<f64>() + model.scalar_offset();
    NormalModes { frequencies, offset }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRow<P> {
    pub point: P,
    pub max_imag: f64,
    pub stable: bool,
    /// Set when the generator or solver failed at this point.
    pub error: Option<String>,
}

/// Evaluates dynamical stability over a grid in parallel; rows come back in
/// grid order.
///
/// Points whose spectrum already has `|Im ω| > tol.imag` skip the Gram
/// assessment.
pub fn scan_phase_diagram<P, F>(generator: F, grid: &[P], tol: &Tolerances) -> Vec<PhaseRow<P>>
where
    P: Clone + Send + Sync,
    F: Fn(&P) -> Result<QbhModel> + Sync,
{
    grid.par_iter()
        .map(|point| {
            let outcome = generator(point).and_then(|model| {
                let g = build_bdg(&model);
                let eigenvalues = linalg::bdg_eigenvalues(g.matrix())?;
                let max_imag = linalg::max_imag(&eigenvalues);
                if max_imag > tol.imag {
                    Ok((max_imag, false))
                } else {
                    assess(g.matrix(), eigenvalues, tol).map(|r| (r.max_imag, r.stable))
                }
            });
            match outcome {
                Ok((max_imag, stable)) => {
                    PhaseRow { point: point.clone(), max_imag, stable, error: None }
                }
                Err(e) => PhaseRow {
                    point: point.clone(),
                    max_imag: f64::NAN,
                    stable: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
