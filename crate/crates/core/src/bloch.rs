//! Momentum-space tools for the periodic harmonic chain.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{DualError, Result};
use crate::lattice::HarmonicChainParams;
use crate::linalg::{self, CMat};
use crate::model::BdgMatrix;

/// Frequencies at or below this value are flagged as gapless.
const GAPLESS: f64 = 1e-12;

/// `τ₃ [[Ω − J cos k, −J cos k], [−J cos k, Ω − J cos k]]`.
pub fn bloch_bdg(p: &HarmonicChainParams, k: f64) -> Result<BdgMatrix> {
    p.validate()?;
    let (omega, j) = (p.omega(), p.coupling());
    let d = omega - j * k.cos();
    let off = -j * k.cos();
    let g = CMat::from_row_slice(
        2,
        2,
        &[d.into(), off.into(), (-off).into(), (-d).into()],
    );
    BdgMatrix::from_matrix(g, 1e-12)
}

/// Brillouin-zone grid `k = 2πq/N`, `q = 0…N−1`.
pub fn bz_grid(n: usize) -> Vec<f64> {
    (0..n).map(|q| 2.0 * PI * q as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandStructure {
    pub k_values: Vec<f64>,
    pub omega: Vec<f64>,
    pub gapless: Vec<bool>,
    /// Largest gap between the closed form and per-k diagonalization over the
    /// gapped momenta.
    pub diagonalization_error: f64,
}

impl BandStructure {
    pub fn n(&self) -> usize {
        self.k_values.len()
    }

    pub fn is_gapped(&self) -> bool {
        !self.gapless.iter().any(|&g| g)
    }
}

/// Closed-form band cross-checked against the positive eigenvalue of each `G_k`.
///
/// A vanishing onsite stiffness is rejected unless `allow_gapless` is set; the
/// `k = 0` point is then flagged and excluded from the cross-check.
pub fn band_structure(p: &HarmonicChainParams, allow_gapless: bool) -> Result<BandStructure> {
    p.validate()?;
    if p.c_o == 0.0 && !allow_gapless {
        return Err(DualError::Parameter(
            "C_o = 0 gives a gapless band; the duality needs C_o > 0".into(),
        ));
    }
    let k_values = bz_grid(p.n);
    let omega: Vec<f64> = k_values.iter().map(|&k| p.omega_k(k)).collect();
    let gapless: Vec<bool> = omega.iter().map(|&w| w <= GAPLESS).collect();
    let mut diagonalization_error: f64 = 0.0;
    for (i, &k) in k_values.iter().enumerate() {
        if gapless[i] {
            continue;
        }
        let ev = linalg::bdg_eigenvalues(bloch_bdg(p, k)?.matrix())?;
        let top = ev.iter().max_by(|a, b| a.re.total_cmp(&b.re)).expect("two eigenvalues");
        diagonalization_error = diagonalization_error.max((top - Complex64::from(omega[i])).norm());
    }
    Ok(BandStructure { k_values, omega, gapless, diagonalization_error })
}

/// Dual hopping amplitudes `K^D_r` for separations `r = 0…N−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualHoppingTable {
    pub k_dual_r: Vec<Complex64>,
}

impl DualHoppingTable {
    pub fn n(&self) -> usize {
        self.k_dual_r.len()
    }

    /// Forward transform `ω_k = Σ_r K^D_r e^{−ikr}` on the BZ grid.
    pub fn band(&self) -> Vec<f64> {
        let n = self.n();
        bz_grid(n)
            .iter()
            .map(|&k| {
                self.k_dual_r
                    .iter()
                    .enumerate()
                    .map(|(r, &c)| c * Complex64::from_polar(1.0, -k * r as f64))
                    .sum::<Complex64>()
                    .re
            })
            .collect()
    }

    /// Circulant hopping matrix `K^D_ij = K^D_{(i−j) mod N}`.
    pub fn circulant(&self) -> CMat {
        let n = self.n();
        CMat::from_fn(n, n, |i, j| self.k_dual_r[(i + n - j) % n])
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.k_dual_r.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `max_r |K^D_{−r} − (K^D_r)*|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|r| (self.k_dual_r[(n - r) % n] - self.k_dual_r[r].conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// `K^D_r = N⁻¹ Σ_k ω_k e^{ikr}`.
pub fn dual_hoppings(band: &BandStructure) -> DualHoppingTable {
    let n = band.n();
    let k_dual_r = (0..n)
        .map(|r| {
            band.k_values
                .iter()
                .zip(&band.omega)
                .map(|(&k, &w)| Complex64::from_polar(w, k * r as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect();
    DualHoppingTable { k_dual_r }
}

/// Thermodynamic-limit amplitude of the gapless chain, `(2/π) Ω_nn/(1 − 4r²)`.
pub fn tl_limit_hopping(r: u32, omega_nn: f64) -> f64 {
    let r = f64::from(r);
    2.0 / PI * omega_nn / (1.0 - 4.0 * r * r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub rho: usize,
    pub table: DualHoppingTable,
    pub band: Vec<f64>,
    pub max_error: f64,
}

/// Keeps separations `r ≤ rho` together with their mirrors `N − r`.
pub fn truncate_dual(table: &DualHoppingTable, exact: &[f64], rho: usize) -> Result<Truncation> {
    let n = table.n();
    if exact.len() != n {
        return Err(DualError::DimensionMismatch { expected: n, actual: exact.len() });
    }
    let k_dual_r = table
        .k_dual_r
        .iter()
        .enumerate()
        .map(|(r, &c)| if r.min(n - r) <= rho { c } else { Complex64::new(0.0, 0.0) })
        .collect();
    let truncated = DualHoppingTable { k_dual_r };
    let band = truncated.band();
    let max_error = band.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(Truncation { rho, table: truncated, band, max_error })
}

/// Least-squares fit `|K^D_r| ≈ A e^{−r/ξ}` over `1 ≤ r ≤ N/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub amplitude: f64,
    pub length: f64,
}

pub fn fit_decay(table: &DualHoppingTable) -> Option<DecayFit> {
    let pts: Vec<(f64, f64)> = (1..=table.n() / 2)
        .filter_map(|r| {
            let a = table.k_dual_r[r].norm();
            (a > 1e-13).then(|| (r as f64, a.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (slope < 0.0).then(|| DecayFit { amplitude: (my - slope * mx).exp(), length: -1.0 / slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(c_o: f64, c_nn: f64, n: usize) -> HarmonicChainParams {
        HarmonicChainParams { m: 1.0, c_o, c_nn, n }
    }

    fn top(p: &HarmonicChainParams, k: f64) -> f64 {
        linalg::bdg_eigenvalues(bloch_bdg(p, k).unwrap().matrix())
            .unwrap()
            .iter()
            .map(|z| z.re)
            .fold(f64::MIN, f64::max)
    }

    #[test]
    fn bloch_eigenvalues() {
        let p = chain(2.0, 2.0, 10);
        assert!((top(&p, PI) - 10.0_f64.sqrt()).abs() < 1e-12);
        assert!((top(&p, 0.0) - 2.0_f64.sqrt()).abs() < 1e-12);
        let flat = chain(2.0, 0.0, 10);
        let g = bloch_bdg(&flat, 0.7).unwrap();
        assert!((g.matrix()[(0, 0)].re - 2.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(g.matrix()[(0, 1)].norm(), 0.0);
    }

    #[test]
    fn band_extremes() {
        let b = band_structure(&chain(2.0, 2.0, 30), false).unwrap();
        let min = b.omega.iter().cloned().fold(f64::MAX, f64::min);
        let max = b.omega.iter().cloned().fold(f64::MIN, f64::max);
        assert!((min - 2.0_f64.sqrt()).abs() < 1e-14);
        assert!((max - 10.0_f64.sqrt()).abs() < 1e-14);
        assert!(b.diagonalization_error < 1e-10);
    }

    #[test]
    fn gapless_band_needs_flag() {
        let p = chain(0.0, 2.0, 8);
        assert!(band_structure(&p, false).is_err());
        let b = band_structure(&p, true).unwrap();
        assert!(b.gapless[0] && !b.is_gapped());
        let omega_nn = 2.0 * 2.0_f64.sqrt();
        for (k, w) in b.k_values.iter().zip(&b.omega) {
            assert!((w - omega_nn * (k / 2.0).sin().abs()).abs() < 1e-13);
        }
    }

    #[test]
    fn flat_band_has_onsite_hopping_only() {
        let b = band_structure(&chain(2.0, 0.0, 7), false).unwrap();
        let t = dual_hoppings(&b);
        assert!((t.k_dual_r[0].re - 2.0_f64.sqrt()).abs() < 1e-14);
        assert!(t.k_dual_r[1..].iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn tl_values() {
        assert!((tl_limit_hopping(0, 1.0) - std::f64::consts::FRAC_2_PI).abs() < 1e-15);
        assert!((tl_limit_hopping(1, 1.0) + 0.212207).abs() < 1e-6);
        assert!((tl_limit_hopping(2, 1.0) + 0.042441).abs() < 1e-6);
    }

    #[test]
    fn full_range_truncation_is_exact() {
        let b = band_structure(&chain(2.0, 2.0, 30), false).unwrap();
        let t = dual_hoppings(&b);
        let full = truncate_dual(&t, &b.omega, 29).unwrap();
        assert!(full.max_error < 1e-12);
        let flat = truncate_dual(&t, &b.omega, 0).unwrap();
        assert!(flat.band.iter().all(|&w| (w - t.k_dual_r[0].re).abs() < 1e-12));
    }

    #[test]
    fn decay_fit_on_gapped_chain() {
        let t = dual_hoppings(&band_structure(&chain(2.0, 2.0, 30), false).unwrap());
        let fit = fit_decay(&t).unwrap();
        assert!(fit.length > 0.0 && fit.amplitude > 0.0);
    }
}
