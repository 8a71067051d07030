//! Metric, square root and dual model.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{DualError, Result};
use crate::linalg::{self, CMat, CVec};
use crate::model::{build_bdg, BdgMatrix, QbhModel};
use crate::spectral::{krein_normalize_with_reference, SpectralData};
use crate::tolerance::Tolerances;

/// Positive-definite metric `S` with `S⁻¹ = τ₃Sτ₃` and `S* = τ₁Sτ₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct KreinMetric {
    s: CMat,
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
}

impl KreinMetric {
    /// Validates Hermiticity, positivity and both τ identities.
    pub fn from_matrix(s: CMat, tol: &Tolerances) -> Result<Self> {
        let dim = s.nrows();
        if !dim.is_multiple_of(2) || s.ncols() != dim || dim == 0 {
            return Err(DualError::DimensionMismatch { expected: dim + dim % 2, actual: dim });
        }
        let scale = linalg::scale_of(&s);
        let herm = linalg::hermiticity_error(&s);
        if herm > tol.invariant * scale {
            return Err(DualError::Invariant {
                name: "metric Hermiticity",
                value: herm,
                tol: tol.invariant * scale,
            });
        }
        let (eigenvalues, eigenvectors) = linalg::hermitian_eigen(&s)?;
        let min_eig = eigenvalues[0];
        if min_eig <= tol.metric_min_eig {
            return Err(DualError::Unstable(format!(
                "metric is not positive definite (smallest eigenvalue {min_eig:.3e})"
            )));
        }
        let inv_err = linalg::max_abs_diff(&(&s * linalg::tau3_sandwich(&s)), &CMat::identity(dim, dim));
        let bound = tol.invariant * scale * scale;
        if inv_err > bound {
            return Err(DualError::Invariant { name: "S τ₃Sτ₃ = 1", value: inv_err, tol: bound });
        }
        let cc = linalg::max_abs_diff(&linalg::tau1_conj_sandwich(&s), &s);
        if cc > tol.invariant * scale {
            return Err(DualError::Invariant {
                name: "S* = τ₁Sτ₁",
                value: cc,
                tol: tol.invariant * scale,
            });
        }
        Ok(Self { s, eigenvalues, eigenvectors })
    }

    pub fn matrix(&self) -> &CMat {
        &self.s
    }

    pub fn min_eig(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eig(&self) -> f64 {
        *self.eigenvalues.last().expect("metric is non-empty")
    }

    pub fn trace(&self) -> f64 {
        self.s.trace().re
    }

    /// `tr S⁻¹` from the spectrum.
    pub fn inverse_trace(&self) -> f64 {
        self.eigenvalues.iter().map(|x| 1.0 / x).sum()
    }

    /// `‖[τ₃S, G]‖_max`.
    pub fn commutator_norm(&self, g: &BdgMatrix) -> f64 {
        linalg::max_abs(&linalg::commutator(&linalg::tau3_left(&self.s), g.matrix()))
    }
}

/// `S = Σ_n τ₃|ψ_n⟩⟨ψ_n|τ₃` over the full Krein-normalized basis.
pub fn metric_from_basis(sd: &SpectralData, tol: &Tolerances) -> Result<KreinMetric> {
    let t = linalg::tau3_left(&sd.eigenvectors);
    KreinMetric::from_matrix(&t * t.adjoint(), tol)
}

/// The positive square root `R = S^{1/2}` and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityMap {
    r: CMat,
    r_inv: CMat,
}

impl DualityMap {
    /// Wraps a known inverse square root, checking `R⁻¹ = τ₃Rτ₃` style identities.
    pub fn from_inverse(r_inv: CMat, tol: &Tolerances) -> Result<Self> {
        let r = linalg::tau3_sandwich(&r_inv);
        let out = Self { r, r_inv };
        out.verify(tol)?;
        Ok(out)
    }

    pub fn r(&self) -> &CMat {
        &self.r
    }

    pub fn r_inv(&self) -> &CMat {
        &self.r_inv
    }

    pub fn metric_matrix(&self) -> CMat {
        &self.r * &self.r
    }

    fn verify(&self, tol: &Tolerances) -> Result<()> {
        let dim = self.r.nrows();
        let scale = linalg::scale_of(&self.r).max(linalg::scale_of(&self.r_inv));
        let checks = [
            ("R R⁻¹ = 1", linalg::max_abs_diff(&(&self.r * &self.r_inv), &CMat::identity(dim, dim)), scale * scale),
            ("R Hermitian", linalg::hermiticity_error(&self.r), scale),
            ("R⁻¹ = τ₃Rτ₃", linalg::max_abs_diff(&self.r_inv, &linalg::tau3_sandwich(&self.r)), scale),
            ("R* = τ₁Rτ₁", linalg::max_abs_diff(&linalg::tau1_conj_sandwich(&self.r), &self.r), scale),
        ];
        for (name, value, s) in checks {
            if value > tol.invariant * s {
                return Err(DualError::Invariant { name, value, tol: tol.invariant * s });
            }
        }
        Ok(())
    }
}

/// Square root by unitary diagonalization of `S`.
pub fn sqrt_metric(metric: &KreinMetric, tol: &Tolerances) -> Result<DualityMap> {
    if metric.min_eig() <= tol.metric_min_eig {
        return Err(DualError::Unstable(format!(
            "metric eigenvalue {:.3e} too close to zero",
            metric.min_eig()
        )));
    }
    let v = &metric.eigenvectors;
    let diag = |f: fn(f64) -> f64| {
        CVec::from_iterator(
            metric.eigenvalues.len(),
            metric.eigenvalues.iter().map(|&x| Complex64::from(f(x))),
        )
    };
    let r = v * CMat::from_diagonal(&diag(f64::sqrt)) * v.adjoint();
    // 1/√λ of the smallest eigenvalues carries their full relative error, so
    // the inverse comes from the exact identity R⁻¹ = τ₃Rτ₃ instead.
    let r_inv = linalg::tau3_sandwich(&r);
    let map = DualityMap { r, r_inv };
    let dim = map.r.nrows();
    let err = linalg::max_abs_diff(&map.metric_matrix(), metric.matrix());
    let bound = tol.invariant * linalg::scale_of(metric.matrix());
    if err > bound {
        return Err(DualError::Invariant { name: "R² = S", value: err, tol: bound });
    }
    debug_assert_eq!(dim, metric.matrix().nrows());
    map.verify(tol)?;
    Ok(map)
}

/// Number-conserving dual of a QBH.
#[derive(Debug, Clone, PartialEq)]
pub struct DualModel {
    pub k_dual: CMat,
    /// `max |Δ^D_ij|` read off the off-diagonal Nambu entries of `G^D`.
    pub pairing_residual: f64,
    /// `−½ tr K^D`.
    pub offset_dual: f64,
    /// Largest gap between sorted spectra of `G` and `G^D`.
    pub spectrum_error: f64,
}

impl DualModel {
    pub fn to_model(&self) -> Result<QbhModel> {
        QbhModel::number_conserving(self.k_dual.clone())
    }

    pub fn max_coefficient(&self) -> f64 {
        linalg::max_abs(&self.k_dual)
    }
}

/// `G^D = R G R⁻¹` with its dual-model certificate.
///
/// Fails when `G^D` is not Hermitian or keeps pairing beyond tolerance.
pub fn dualize(g: &BdgMatrix, map: &DualityMap, tol: &Tolerances) -> Result<(BdgMatrix, DualModel)> {
    if map.r.nrows() != g.dim() {
        return Err(DualError::DimensionMismatch { expected: g.dim(), actual: map.r.nrows() });
    }
    let gd = &map.r * g.matrix() * &map.r_inv;
    let n = g.n_modes();
    let scale = linalg::scale_of(&gd);
    let herm = linalg::hermiticity_error(&gd);
    if herm > tol.pairing * scale {
        return Err(DualError::Invariant { name: "G^D Hermiticity", value: herm, tol: tol.pairing * scale });
    }
    let pairing_residual = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| gd[(2 * i, 2 * j + 1)].norm().max(gd[(2 * i + 1, 2 * j)].norm()))
        .fold(0.0, f64::max);
    if pairing_residual > tol.pairing {
        return Err(DualError::Invariant {
            name: "dual pairing residual",
            value: pairing_residual,
            tol: tol.pairing,
        });
    }
    let k_dual = linalg::hermitian_part(&CMat::from_fn(n, n, |i, j| gd[(2 * i, 2 * j)]));

    let mut original: Vec<Complex64> = linalg::bdg_eigenvalues(g.matrix())?;
    original.sort_by(|a, b| a.re.total_cmp(&b.re));
    let (dual_values, _) = linalg::hermitian_eigen(&gd)?;
    let spectrum_error = original
        .iter()
        .zip(dual_values.iter())
        .map(|(a, &b)| (a - Complex64::from(b)).norm())
        .fold(0.0, f64::max);

    let offset_dual = -0.5 * k_dual.trace().re;
    Ok((
        BdgMatrix::from_matrix(gd, f64::INFINITY)?,
        DualModel { k_dual, pairing_residual, offset_dual, spectrum_error },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceReport {
    pub trace_s: f64,
    pub sum_inverse_rigidities: f64,
    pub trace_s_inv: f64,
    /// `|tr S − Σ r_n⁻¹|`.
    pub rigidity_error: f64,
    /// `|tr S − tr S⁻¹|`.
    pub inverse_error: f64,
}

pub fn trace_identities(metric: &KreinMetric, sd: &SpectralData) -> TraceReport {
    let trace_s = metric.trace();
    let sum_inverse_rigidities = sd.rigidities.iter().map(|r| 1.0 / r).sum::<f64>();
    let trace_s_inv = metric.inverse_trace();
    TraceReport {
        trace_s,
        sum_inverse_rigidities,
        trace_s_inv,
        rigidity_error: (trace_s - sum_inverse_rigidities).abs(),
        inverse_error: (trace_s - trace_s_inv).abs(),
    }
}

/// The full chain `model → G → basis → S → R → G^D` with its certificates.
#[derive(Debug, Clone)]
pub struct DualPipeline {
    pub model: QbhModel,
    pub bdg: BdgMatrix,
    pub spectral: SpectralData,
    pub metric: KreinMetric,
    pub map: DualityMap,
    pub dual_bdg: BdgMatrix,
    pub dual: DualModel,
}

impl DualPipeline {
    pub fn run(model: &QbhModel, tol: &Tolerances) -> Result<Self> {
        Self::run_with_reference(model, None, tol)
    }

    /// See [`krein_normalize_with_reference`] for the role of `reference`.
    pub fn run_with_reference(model: &QbhModel, reference: Option<&CMat>, tol: &Tolerances) -> Result<Self> {
        let bdg = build_bdg(model);
        let spectral = krein_normalize_with_reference(&bdg, reference, tol)?;
        let metric = metric_from_basis(&spectral, tol)?;
        let map = sqrt_metric(&metric, tol)?;
        let (dual_bdg, dual) = dualize(&bdg, &map, tol)?;
        Ok(Self { model: model.clone(), bdg, spectral, metric, map, dual_bdg, dual })
    }

    pub fn traces(&self) -> TraceReport {
        trace_identities(&self.metric, &self.spectral)
    }

    pub fn commutator_norm(&self) -> f64 {
        self.metric.commutator_norm(&self.bdg)
    }

    /// `max_n ‖τ₃Rψ_n − λ_n Rψ_n‖`: each mapped eigenvector is a τ₃ eigenvector.
    pub fn transmutation_error(&self) -> f64 {
        let mapped = self.map.r() * &self.spectral.eigenvectors;
        (0..mapped.ncols())
            .map(|n| {
                let v: CVec = mapped.column(n).into_owned();
                let lambda = f64::from(self.spectral.krein_signs[n]);
                (linalg::tau3_apply(&v) - v * Complex64::from(lambda)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `‖Ψ†SΨ − 1‖_max`.
    pub fn s_orthonormality_error(&self) -> f64 {
        let psi = &self.spectral.eigenvectors;
        let m = psi.adjoint() * self.metric.matrix() * psi;
        linalg::max_abs_diff(&m, &CMat::identity(m.nrows(), m.ncols()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginRow<P> {
    pub point: P,
    pub min_eig: Option<f64>,
    pub max_dual_coefficient: Option<f64>,
    pub error: Option<String>,
}

/// Smallest metric eigenvalue and largest dual coefficient along a path.
pub fn instability_margin<P, F>(generator: F, path: &[P], tol: &Tolerances) -> Vec<MarginRow<P>>
where
    P: Clone + Send + Sync,
    F: Fn(&P) -> Result<QbhModel> + Sync,
{
    path.par_iter()
        .map(|point| match generator(point).and_then(|m| DualPipeline::run(&m, tol)) {
            Ok(p) => MarginRow {
                point: point.clone(),
                min_eig: Some(p.metric.min_eig()),
                max_dual_coefficient: Some(p.dual.max_coefficient()),
                error: None,
            },
            Err(e) => MarginRow {
                point: point.clone(),
                min_eig: None,
                max_dual_coefficient: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn single(k: f64, d: f64) -> QbhModel {
        QbhModel::new(CMat::from_element(1, 1, c(k)), CMat::from_element(1, 1, c(d))).unwrap()
    }

    #[test]
    fn single_mode_metric_root_and_dual() {
        let tol = Tolerances::default();
        let p = DualPipeline::run(&single(1.0, 0.6), &tol).unwrap();
        let s = CMat::from_row_slice(2, 2, &[c(1.25), c(0.75), c(0.75), c(1.25)]);
        assert!(linalg::max_abs_diff(p.metric.matrix(), &s) < 1e-12);
        let a = 1.5 / 2.0_f64.sqrt();
        let b = 0.5 / 2.0_f64.sqrt();
        let r = CMat::from_row_slice(2, 2, &[c(a), c(b), c(b), c(a)]);
        assert!(linalg::max_abs_diff(p.map.r(), &r) < 1e-12);
        let gd = CMat::from_row_slice(2, 2, &[c(0.8), c(0.0), c(0.0), c(-0.8)]);
        assert!(linalg::max_abs_diff(p.dual_bdg.matrix(), &gd) < 1e-12);
        assert!((p.dual.k_dual[(0, 0)].re - 0.8).abs() < 1e-12);
        let t = p.traces();
        assert!((t.trace_s - 2.5).abs() < 1e-12 && t.rigidity_error < 1e-12 && t.inverse_error < 1e-12);
    }

    #[test]
    fn identity_metric_for_number_conserving_input() {
        let tol = Tolerances::default();
        let p = DualPipeline::run(&single(0.7, 0.0), &tol).unwrap();
        assert_eq!(p.metric.matrix(), &CMat::identity(2, 2));
        assert_eq!(p.map.r(), &CMat::identity(2, 2));
        assert_eq!(p.dual_bdg.matrix(), p.bdg.matrix());
        assert_eq!(p.metric.min_eig(), 1.0);
    }

    #[test]
    fn metric_validation_rejects_non_krein_matrix() {
        let s = CMat::from_row_slice(2, 2, &[c(2.0), c(0.0), c(0.0), c(2.0)]);
        assert!(KreinMetric::from_matrix(s, &Tolerances::default()).is_err());
    }

    #[test]
    fn margins_record_unstable_points() {
        let rows = instability_margin(|&d| Ok(single(1.0, d)), &[0.0, 0.5, 1.5], &Tolerances::default());
        assert_eq!(rows[0].min_eig, Some(1.0));
        assert!(rows[1].min_eig.unwrap() < 1.0);
        assert!(rows[2].error.is_some());
    }
}
