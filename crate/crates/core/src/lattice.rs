//! The gapped harmonic chain and the bosonic Kitaev chain.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::duality::{DualModel, DualityMap, KreinMetric};
use crate::error::{DualError, Result};
use crate::linalg::{CMat, I, ZERO};
use crate::model::QbhModel;
use crate::tolerance::Tolerances;

/// Periodic chain of masses `m` with onsite stiffness `C_o` and
/// nearest-neighbor stiffness `C_nn`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicChainParams {
    pub m: f64,
    pub c_o: f64,
    pub c_nn: f64,
    pub n: usize,
}

impl HarmonicChainParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0) {
            return Err(DualError::Parameter(format!("mass must be positive, got {}", self.m)));
        }
        if !(self.c_o >= 0.0) || !(self.c_nn >= 0.0) {
            return Err(DualError::Parameter(format!(
                "stiffness constants must be non-negative, got C_o = {}, C_nn = {}",
                self.c_o, self.c_nn
            )));
        }
        if self.n == 0 {
            return Err(DualError::Parameter("chain needs at least one site".into()));
        }
        if self.c_o == 0.0 && self.c_nn == 0.0 {
            return Err(DualError::Parameter("C_o and C_nn cannot both vanish".into()));
        }
        Ok(())
    }

    /// `Ω = √((2C_nn + C_o)/m)`.
    pub fn omega(&self) -> f64 {
        ((2.0 * self.c_nn + self.c_o) / self.m).sqrt()
    }

    /// `J = C_nn/(mΩ)`.
    pub fn coupling(&self) -> f64 {
        self.c_nn / (self.m * self.omega())
    }

    /// `Ω_nn = 2√(C_nn/m)`.
    pub fn omega_nn(&self) -> f64 {
        2.0 * (self.c_nn / self.m).sqrt()
    }

    /// `ω_k = √((C_o + 4C_nn sin²(k/2))/m)`.
    pub fn omega_k(&self, k: f64) -> f64 {
        let s = (0.5 * k).sin();
        ((self.c_o + 4.0 * self.c_nn * s * s) / self.m).sqrt()
    }
}

pub fn harmonic_chain_qbh(p: &HarmonicChainParams) -> Result<QbhModel> {
    p.validate()?;
    let n = p.n;
    let omega = Complex64::from(p.omega());
    let half_j = Complex64::from(-0.5 * p.coupling());
    let mut k = CMat::from_diagonal_element(n, n, omega);
    let mut d = CMat::zeros(n, n);
    for j in 0..n {
        let next = (j + 1) % n;
        k[(next, j)] += half_j;
        k[(j, next)] += half_j;
        d[(next, j)] += half_j;
        d[(j, next)] += half_j;
    }
    QbhModel::new(k, d)
}

/// Bosonic Kitaev chain with twisted boundary of strength `s` and angle `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BkcParams {
    pub t: f64,
    pub delta: f64,
    pub s: f64,
    pub phi: f64,
    pub n: usize,
}

impl BkcParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || !(self.delta >= 0.0) {
            return Err(DualError::Parameter(format!(
                "need t > 0 and delta >= 0, got t = {}, delta = {}",
                self.t, self.delta
            )));
        }
        if !(0.0..=1.0).contains(&self.s) {
            return Err(DualError::Parameter(format!("s must lie in [0, 1], got {}", self.s)));
        }
        if !self.phi.is_finite() {
            return Err(DualError::Parameter("phi must be finite".into()));
        }
        if self.n < 2 {
            return Err(DualError::Parameter("chain needs at least two sites".into()));
        }
        Ok(())
    }
}

pub fn bkc_qbh(p: &BkcParams) -> Result<QbhModel> {
    p.validate()?;
    let n = p.n;
    let mut k = CMat::zeros(n, n);
    let mut d = CMat::zeros(n, n);
    let hop = I * (0.5 * p.t);
    let pair = I * (0.5 * p.delta);
    for j in 0..n - 1 {
        k[(j + 1, j)] += hop;
        k[(j, j + 1)] += hop.conj();
        d[(j + 1, j)] += pair;
        d[(j, j + 1)] += pair;
    }
    if p.s != 0.0 {
        let twist = I * Complex64::from_polar(p.s, p.phi);
        k[(0, n - 1)] += twist * (0.5 * p.t);
        k[(n - 1, 0)] += (twist * (0.5 * p.t)).conj();
        d[(0, n - 1)] += twist * (0.5 * p.delta);
        d[(n - 1, 0)] += twist * (0.5 * p.delta);
    }
    QbhModel::new(k, d)
}

/// `r = ½ ln[(t+Δ)/(t−Δ)]`.
pub fn squeeze_parameter(t: f64, delta: f64) -> Result<f64> {
    if !(t > delta) || !(delta >= 0.0) {
        return Err(DualError::Parameter(format!(
            "the BKC duality needs t > delta >= 0, got t = {t}, delta = {delta}"
        )));
    }
    Ok(0.5 * ((t + delta) / (t - delta)).ln())
}

/// `(N + 2)/2`, the offset of the closed-form metric.
pub fn default_offset(n: usize) -> f64 {
    (n as f64 + 2.0) / 2.0
}

/// Block-diagonal `Σ_j |j⟩⟨j| ⊗ [[cosh θ_j, −sinh θ_j], [−sinh θ_j, cosh θ_j]]`
/// with `θ_j = 2(j − j₀)r` and sites numbered from 1.
pub fn bkc_metric_matrix(t: f64, delta: f64, n: usize, j0: f64) -> Result<CMat> {
    let r = squeeze_parameter(t, delta)?;
    Ok(site_blocks(n, |j| -2.0 * (j - j0) * r))
}

/// Closed-form metric at φ = π/2 with `j₀ = (N+2)/2`.
pub fn bkc_analytic_metric(t: f64, delta: f64, n: usize, tol: &Tolerances) -> Result<KreinMetric> {
    KreinMetric::from_matrix(bkc_metric_matrix(t, delta, n, default_offset(n))?, tol)
}

/// Squeeze map whose inverse sends `a_j ↦ cosh[(j−j₀)r] a_j + sinh[(j−j₀)r] a_j†`.
///
/// `offsets` holds one `j₀` per site, so both the uniform and the spatially
/// varying choice are covered.
pub fn bkc_squeeze_map(t: f64, delta: f64, offsets: &[f64], tol: &Tolerances) -> Result<DualityMap> {
    let r = squeeze_parameter(t, delta)?;
    let n = offsets.len();
    if n == 0 {
        return Err(DualError::Parameter("need one offset per site".into()));
    }
    DualityMap::from_inverse(site_blocks(n, |j| (j - offsets[j as usize - 1]) * r), tol)
}

pub fn bkc_uniform_squeeze_map(t: f64, delta: f64, n: usize, j0: f64, tol: &Tolerances) -> Result<DualityMap> {
    bkc_squeeze_map(t, delta, &vec![j0; n], tol)
}

/// `[[cosh a, sinh a], [sinh a, cosh a]]` on each site, `a = angle(j)`.
fn site_blocks(n: usize, angle: impl Fn(f64) -> f64) -> CMat {
    let mut m = CMat::from_element(2 * n, 2 * n, ZERO);
    for site in 0..n {
        let a = angle(site as f64 + 1.0);
        let (ch, sh) = (Complex64::from(a.cosh()), Complex64::from(a.sinh()));
        let b = 2 * site;
        m[(b, b)] = ch;
        m[(b + 1, b + 1)] = ch;
        m[(b, b + 1)] = sh;
        m[(b + 1, b)] = sh;
    }
    m
}

/// `t̃ = √(t² − Δ²)`.
pub fn dual_hopping(t: f64, delta: f64) -> Result<f64> {
    squeeze_parameter(t, delta)?;
    Ok((t * t - delta * delta).sqrt())
}

/// Closed-form dual at φ = π/2: hopping `i t̃/2` along the chain and a real
/// boundary bond `−s t̃/2`.
pub fn bkc_dual_model(t: f64, delta: f64, s: f64, n: usize) -> Result<DualModel> {
    let tt = dual_hopping(t, delta)?;
    if n < 2 {
        return Err(DualError::Parameter("chain needs at least two sites".into()));
    }
    let mut k = CMat::zeros(n, n);
    for j in 0..n - 1 {
        k[(j + 1, j)] += I * (0.5 * tt);
        k[(j, j + 1)] += -I * (0.5 * tt);
    }
    k[(0, n - 1)] += Complex64::from(-0.5 * s * tt);
    k[(n - 1, 0)] += Complex64::from(-0.5 * s * tt);
    Ok(DualModel { k_dual: k, pairing_residual: 0.0, offset_dual: 0.0, spectrum_error: 0.0 })
}
