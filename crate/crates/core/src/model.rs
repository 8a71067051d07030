//! QBH data model and Nambu-space conventions.
//!
//! The Nambu array is interleaved, `Φ = [a₁, a₁†, …, a_N, a_N†]`, so that
//! `τ_j = 𝟙_N ⊗ σ_j` are literal Kronecker products and the 2×2 block of `H`
//! at mode pair `(i, j)` is `[[K_ij, Δ_ij], [Δ*_ij, K*_ij]]`.

use std::ops::Add;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DualError, Result};
use crate::linalg::{self, CMat, CVec, ONE, ZERO};
use crate::tolerance::Tolerances;

/// Quadratic bosonic Hamiltonian `Σ K_ij a_i†a_j + ½(Δ_ij a_i†a_j† + h.c.)`.
///
/// Construction validates `K = K†` and `Δ = Δᵀ`; values are immutable after.
#[derive(Debug, Clone, PartialEq)]
pub struct QbhModel {
    k: CMat,
    delta: CMat,
}

impl QbhModel {
    pub fn new(k: CMat, delta: CMat) -> Result<Self> {
        Self::with_tolerance(k, delta, Tolerances::default().validation)
    }

    pub fn with_tolerance(k: CMat, delta: CMat, tol: f64) -> Result<Self> {
        let n = k.nrows();
        if n == 0 {
            return Err(DualError::Validation("model needs at least one mode".into()));
        }
        for (name, m) in [("K", &k), ("Delta", &delta)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(DualError::Validation(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        for i in 0..n {
            for j in i..n {
                let (kij, kji) = (k[(i, j)], k[(j, i)]);
                if (kij - kji.conj()).norm() > tol || !kij.re.is_finite() || !kij.im.is_finite() {
                    return Err(DualError::Validation(format!(
                        "K is not Hermitian at ({i}, {j}): K[{i}][{j}] = {kij}, conj(K[{j}][{i}]) = {}",
                        kji.conj()
                    )));
                }
                let (dij, dji) = (delta[(i, j)], delta[(j, i)]);
                if (dij - dji).norm() > tol || !dij.re.is_finite() || !dij.im.is_finite() {
                    return Err(DualError::Validation(format!(
                        "Delta is not symmetric at ({i}, {j}): Delta[{i}][{j}] = {dij}, Delta[{j}][{i}] = {dji}"
                    )));
                }
            }
        }
        Ok(Self { k, delta })
    }

    /// A model without pairing.
    pub fn number_conserving(k: CMat) -> Result<Self> {
        let n = k.nrows();
        Self::new(k, CMat::zeros(n, n))
    }

    pub fn n_modes(&self) -> usize {
        self.k.nrows()
    }

    pub fn hopping(&self) -> &CMat {
        &self.k
    }

    pub fn pairing(&self) -> &CMat {
        &self.delta
    }

    pub fn max_pairing(&self) -> f64 {
        linalg::max_abs(&self.delta)
    }

    /// The constant `−½ tr K` left over when writing the Hamiltonian as `½Φ†HΦ`.
    pub fn scalar_offset(&self) -> f64 {
        -0.5 * self.k.trace().re
    }

    /// Reads `K` and `Δ` back out of a single-particle Hamiltonian.
    pub fn from_sph(h: &CMat) -> Result<Self> {
        let dim = h.nrows();
        if !dim.is_multiple_of(2) || h.ncols() != dim {
            return Err(DualError::DimensionMismatch { expected: dim + dim % 2, actual: dim });
        }
        let n = dim / 2;
        let k = CMat::from_fn(n, n, |i, j| h[(2 * i, 2 * j)]);
        let delta = CMat::from_fn(n, n, |i, j| h[(2 * i, 2 * j + 1)]);
        Self::new(k, delta)
    }

    /// Parses the JSON model format
    /// `{"n_modes": N, "K": [[{"re": …, "im": …}, …]], "Delta": [[…]]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| DualError::Validation(format!("malformed model JSON: {e}")))?;
        file.into_model()
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            n_modes: self.n_modes(),
            k: entries_of(&self.k),
            delta: entries_of(&self.delta),
        };
        serde_json::to_string_pretty(&file).expect("model serialization is infallible")
    }
}

impl Add for &QbhModel {
    type Output = Result<QbhModel>;

    fn add(self, rhs: Self) -> Result<QbhModel> {
        if self.n_modes() != rhs.n_modes() {
            return Err(DualError::DimensionMismatch {
                expected: self.n_modes(),
                actual: rhs.n_modes(),
            });
        }
        QbhModel::new(&self.k + &rhs.k, &self.delta + &rhs.delta)
    }
}

/// A complex number in the `{"re": …, "im": …}` wire format.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEntry {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexEntry {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexEntry> for Complex64 {
    fn from(e: ComplexEntry) -> Self {
        Complex64::new(e.re, e.im)
    }
}

/// Row-major nested entries of a matrix.
pub fn entries_of(m: &CMat) -> Vec<Vec<ComplexEntry>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect())
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    n_modes: usize,
    #[serde(rename = "K")]
    k: Vec<Vec<ComplexEntry>>,
    #[serde(rename = "Delta")]
    delta: Vec<Vec<ComplexEntry>>,
}

impl ModelFile {
    fn into_model(self) -> Result<QbhModel> {
        let n = self.n_modes;
        let to_matrix = |name: &str, rows: Vec<Vec<ComplexEntry>>| -> Result<CMat> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(DualError::Validation(format!(
                    "{name} must have exactly {n} rows of {n} entries"
                )));
            }
            Ok(CMat::from_fn(n, n, |i, j| rows[i][j].into()))
        };
        QbhModel::new(to_matrix("K", self.k)?, to_matrix("Delta", self.delta)?)
    }
}

/// The effective BdG matrix `G = τ₃H`.
#[derive(Debug, Clone, PartialEq)]
pub struct BdgMatrix(CMat);

impl BdgMatrix {
    /// Wraps an arbitrary matrix after checking both built-in symmetries.
    pub fn from_matrix(g: CMat, tol: f64) -> Result<Self> {
        let n = g.nrows();
        if !n.is_multiple_of(2) || g.ncols() != n || n == 0 {
            return Err(DualError::DimensionMismatch { expected: n + n % 2, actual: n });
        }
        let out = Self(g);
        let (ph, cc) = out.symmetry_errors();
        let tol = tol * linalg::scale_of(&out.0);
        if ph > tol {
            return Err(DualError::Invariant { name: "tau3 pseudo-Hermiticity", value: ph, tol });
        }
        if cc > tol {
            return Err(DualError::Invariant { name: "charge conjugation", value: cc, tol });
        }
        Ok(out)
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.0.nrows() / 2
    }

    /// `H = τ₃G`.
    pub fn sph(&self) -> CMat {
        linalg::tau3_left(&self.0)
    }

    /// `(‖G† − τ₃Gτ₃‖_max, ‖τ₁G*τ₁ + G‖_max)`.
    pub fn symmetry_errors(&self) -> (f64, f64) {
        let g = &self.0;
        let ph = linalg::max_abs_diff(&g.adjoint(), &linalg::tau3_sandwich(g));
        let cc = linalg::max_abs_diff(&linalg::tau1_conj_sandwich(g), &(-g));
        (ph, cc)
    }

    pub fn to_model(&self) -> Result<QbhModel> {
        QbhModel::from_sph(&self.sph())
    }
}

/// `τ_j = 𝟙_N ⊗ σ_j` for the interleaved ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct TauMatrices {
    pub tau1: CMat,
    pub tau2: CMat,
    pub tau3: CMat,
}

impl TauMatrices {
    pub fn new(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        let mut tau1 = CMat::zeros(dim, dim);
        let mut tau2 = CMat::zeros(dim, dim);
        let mut tau3 = CMat::zeros(dim, dim);
        for m in 0..n_modes {
            let (a, b) = (2 * m, 2 * m + 1);
            tau1[(a, b)] = ONE;
            tau1[(b, a)] = ONE;
            tau2[(a, b)] = Complex64::new(0.0, -1.0);
            tau2[(b, a)] = Complex64::new(0.0, 1.0);
            tau3[(a, a)] = ONE;
            tau3[(b, b)] = -ONE;
        }
        Self { tau1, tau2, tau3 }
    }
}

/// Single-particle Hamiltonian `H` with blocks `[[K_ij, Δ_ij], [Δ*_ij, K*_ij]]`.
pub fn build_sph(model: &QbhModel) -> CMat {
    let n = model.n_modes();
    let (k, d) = (&model.k, &model.delta);
    let mut h = CMat::from_element(2 * n, 2 * n, ZERO);
    for i in 0..n {
        for j in 0..n {
            h[(2 * i, 2 * j)] = k[(i, j)];
            h[(2 * i, 2 * j + 1)] = d[(i, j)];
            h[(2 * i + 1, 2 * j)] = d[(i, j)].conj();
            h[(2 * i + 1, 2 * j + 1)] = k[(i, j)].conj();
        }
    }
    h
}

pub fn build_bdg(model: &QbhModel) -> BdgMatrix {
    BdgMatrix(linalg::tau3_left(&build_sph(model)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoReport {
    pub stable: bool,
    /// Smallest eigenvalue of `H`.
    pub margin: f64,
}

/// Bounded below iff `H` is positive semidefinite (up to `tol`).
pub fn thermodynamic_stability(model: &QbhModel, tol: f64) -> Result<ThermoReport> {
    let (values, _) = linalg::hermitian_eigen(&build_sph(model))?;
    let margin = values[0];
    Ok(ThermoReport { stable: margin >= -tol, margin })
}

/// The Krein product `⟨α|τ₃|β⟩`, conjugate-linear in `α`.
pub fn krein_inner(alpha: &CVec, beta: &CVec) -> Result<Complex64> {
    if alpha.len() != beta.len() {
        return Err(DualError::DimensionMismatch { expected: alpha.len(), actual: beta.len() });
    }
    if !alpha.len().is_multiple_of(2) {
        return Err(DualError::DimensionMismatch {
            expected: alpha.len() + 1,
            actual: alpha.len(),
        });
    }
    Ok(alpha
        .iter()
        .zip(beta.iter())
        .enumerate()
        .map(|(i, (a, b))| if i % 2 == 0 { a.conj() * b } else { -a.conj() * b })
        .sum())
}
