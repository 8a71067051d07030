//! Krein and Berry connections along one-parameter families.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::duality::{DualPipeline, DualityMap};
use crate::error::{DualError, Result};
use crate::linalg::{self, CMat, CVec, I};
use crate::model::{build_sph, BdgMatrix, QbhModel};
use crate::tolerance::Tolerances;

/// Smallest normalized overlap accepted between neighbouring samples.
const MIN_OVERLAP: f64 = 1e-3;

type Generator = Box<dyn Fn(f64) -> Result<QbhModel> + Send + Sync>;

/// A model family `k ↦ QBH(k)` with a selected band index in the
/// Krein-normalized ordering (`0..N` positive sign, `N..2N` conjugates).
pub struct ParamFamily {
    generator: Generator,
    pub band: usize,
    pub tol: Tolerances,
    /// Smallest admissible distance from the band to the rest of the spectrum.
    pub min_gap: f64,
}

/// One sample of the selected band.
#[derive(Debug, Clone)]
pub struct BandState {
    pub k: f64,
    pub omega: f64,
    pub sign: f64,
    /// Krein-normalized eigenvector.
    pub vector: CVec,
    pub r: CMat,
}

impl BandState {
    /// `R|n⟩`, Euclidean-normalized.
    pub fn dual_vector(&self) -> CVec {
        &self.r * &self.vector
    }

    fn rephased(&self, phase: Complex64) -> Self {
        Self { vector: &self.vector * phase, ..self.clone() }
    }
}

impl ParamFamily {
    pub fn new(generator: impl Fn(f64) -> Result<QbhModel> + Send + Sync + 'static, band: usize) -> Self {
        Self { generator: Box::new(generator), band, tol: Tolerances::default(), min_gap: 1e-6 }
    }

    /// Family given directly by its BdG matrices.
    pub fn from_bdg(generator: impl Fn(f64) -> Result<BdgMatrix> + Send + Sync + 'static, band: usize) -> Self {
        Self::new(move |k| generator(k)?.to_model(), band)
    }

    pub fn model(&self, k: f64) -> Result<QbhModel> {
        (self.generator)(k)
    }

    pub fn state(&self, k: f64) -> Result<BandState> {
        let p = DualPipeline::run(&self.model(k)?, &self.tol)?;
        let sd = &p.spectral;
        if self.band >= sd.eigenvalues.len() {
            return Err(DualError::Parameter(format!(
                "band {} out of range for {} eigenvalues",
                self.band,
                sd.eigenvalues.len()
            )));
        }
        let omega = sd.eigenvalues[self.band];
        let gap = sd
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != self.band)
            .map(|(_, w)| (w - omega).abs())
            .fold(f64::INFINITY, f64::min);
        if gap < self.min_gap {
            return Err(DualError::Numerical(format!(
                "band {} is degenerate at k = {k} (gap {gap:.3e})",
                self.band
            )));
        }
        Ok(BandState {
            k,
            omega,
            sign: f64::from(sd.krein_signs[self.band]),
            vector: sd.vector(self.band),
            r: p.map.r().clone(),
        })
    }
}

/// Rephases `other` so that its Euclidean overlap with `center` is real positive.
fn align(center: &BandState, other: &BandState) -> Result<BandState> {
    let overlap = center.vector.dotc(&other.vector);
    let norm = center.vector.norm() * other.vector.norm();
    if overlap.norm() < MIN_OVERLAP * norm {
        return Err(DualError::Numerical(format!(
            "overlap between k = {} and k = {} is {:.3e}; the band is not continuous",
            center.k,
            other.k,
            overlap.norm() / norm
        )));
    }
    Ok(other.rephased(overlap.conj() / overlap.norm()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionSample {
    pub k: f64,
    pub a_k: f64,
    pub a_b: f64,
    /// `i⟨n|R ∂R|n⟩`.
    pub correction: f64,
    /// `‖[R, ∂R]‖_max`.
    pub commutator_norm: f64,
    /// `|A_B − A_K − correction|`.
    pub residual: f64,
    /// Largest imaginary part among the three connection terms.
    pub imag_residual: f64,
}

/// All connection terms at `k` by central differences with step `dk`.
pub fn connection_difference(family: &ParamFamily, k: f64, dk: f64) -> Result<ConnectionSample> {
    if !(dk > 0.0) {
        return Err(DualError::Parameter(format!("step must be positive, got {dk}")));
    }
    let c = family.state(k)?;
    let p = align(&c, &family.state(k + dk)?)?;
    let m = align(&c, &family.state(k - dk)?)?;
    let h = Complex64::from(2.0 * dk);

    let dn = (&p.vector - &m.vector) / h;
    let a_k = I * c.sign * c.vector.dotc(&linalg::tau3_apply(&dn));

    let dnd = (p.dual_vector() - m.dual_vector()) / h;
    let a_b = I * c.dual_vector().dotc(&dnd);

    let dr = (&p.r - &m.r) / h;
    let correction = I * c.vector.dotc(&(&c.r * &dr * &c.vector));
    let commutator_norm = linalg::max_abs(&linalg::commutator(&c.r, &dr));

    Ok(ConnectionSample {
        k,
        a_k: a_k.re,
        a_b: a_b.re,
        correction: correction.re,
        commutator_norm,
        residual: (a_b - a_k - correction).re.abs(),
        imag_residual: a_k.im.abs().max(a_b.im.abs()).max(correction.im.abs()),
    })
}

/// `A_K = iλ⟨n|τ₃|∂n⟩`.
pub fn krein_connection(family: &ParamFamily, k: f64, dk: f64) -> Result<f64> {
    connection_difference(family, k, dk).map(|s| s.a_k)
}

/// `A_B = i⟨n^D|∂n^D⟩` with `|n^D⟩ = R|n⟩`.
pub fn berry_connection_dual(family: &ParamFamily, k: f64, dk: f64) -> Result<f64> {
    connection_difference(family, k, dk).map(|s| s.a_b)
}

/// Samples around a closed loop; the last point connects back to the first.
#[derive(Debug, Clone)]
pub struct LoopStates {
    pub states: Vec<BandState>,
}

impl LoopStates {
    pub fn sample(family: &ParamFamily, points: &[f64]) -> Result<Self> {
        if points.len() < 2 {
            return Err(DualError::Parameter("a loop needs at least two points".into()));
        }
        let states = points.iter().map(|&k| family.state(k)).collect::<Result<_>>()?;
        Ok(Self { states })
    }

    /// Multiplies sample `j` by `e^{iα_j}`.
    pub fn rephase(&self, angles: &[f64]) -> Self {
        let states = self
            .states
            .iter()
            .zip(angles)
            .map(|(s, &a)| s.rephased(Complex64::from_polar(1.0, a)))
            .collect();
        Self { states }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopPhases {
    pub krein: f64,
    pub berry: f64,
}

/// Gauge-invariant loop phases in `(−π, π]`.
pub fn loop_phase(samples: &LoopStates) -> Result<LoopPhases> {
    let states = &samples.states;
    let len = states.len();
    let mut krein = Complex64::new(1.0, 0.0);
    let mut berry = Complex64::new(1.0, 0.0);
    for j in 0..len {
        let (a, b) = (&states[j], &states[(j + 1) % len]);
        let ok = a.sign * a.vector.dotc(&linalg::tau3_apply(&b.vector));
        let ob = a.dual_vector().dotc(&b.dual_vector());
        if ok.norm() < MIN_OVERLAP || ob.norm() < MIN_OVERLAP {
            return Err(DualError::Numerical(format!(
                "vanishing overlap between k = {} and k = {}",
                a.k, b.k
            )));
        }
        krein *= ok / ok.norm();
        berry *= ob / ob.norm();
    }
    Ok(LoopPhases { krein: -krein.arg(), berry: -berry.arg() })
}

/// Distance between two phases on the circle.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// `K = 1 + 0.3 cos k`, `Δ = (0.4 + 0.2 sin k) e^{i w k}`.
pub fn single_mode_model(k: f64, winding: i32) -> Result<QbhModel> {
    let kk = CMat::from_element(1, 1, Complex64::from(1.0 + 0.3 * k.cos()));
    let d = Complex64::from_polar(0.4 + 0.2 * k.sin(), f64::from(winding) * k);
    QbhModel::new(kk, CMat::from_element(1, 1, d))
}

/// `R = exp(X)` where `X` is the single-particle matrix of the pure pairing `B`.
///
/// Any symmetric `B` gives a positive map with `R⁻¹ = τ₃Rτ₃`.
pub fn squeeze_from_pairing(b: &CMat, tol: &Tolerances) -> Result<DualityMap> {
    let n = b.nrows();
    let x = build_sph(&QbhModel::new(CMat::zeros(n, n), b.clone())?);
    let r_inv = linalg::hermitian_function(&x, |v| (-v).exp())?;
    DualityMap::from_inverse(r_inv, tol)
}

/// `G = R₀⁻¹ G^D R₀` for the number-conserving `G^D` with hopping `k_dual`.
pub fn squeezed_model(map: &DualityMap, k_dual: &CMat) -> Result<QbhModel> {
    let n = k_dual.nrows();
    let gd = linalg::tau3_left(&build_sph(&QbhModel::number_conserving(k_dual.clone())?));
    if gd.nrows() != map.r().nrows() {
        return Err(DualError::DimensionMismatch { expected: map.r().nrows(), actual: gd.nrows() });
    }
    let g = map.r_inv() * gd * map.r();
    let h = linalg::tau3_left(&g);
    let k = linalg::hermitian_part(&CMat::from_fn(n, n, |i, j| h[(2 * i, 2 * j)]));
    let d = CMat::from_fn(n, n, |i, j| h[(2 * i, 2 * j + 1)]);
    QbhModel::new(k, (&d + d.transpose()).scale(0.5))
}
