#![allow(dead_code)]

use krein_dual::topology::{squeeze_from_pairing, squeezed_model};
use krein_dual::{CMat, QbhModel, Tolerances};
use num_complex::Complex64;
use rand::Rng;

pub fn random_complex(rng: &mut impl Rng, scale: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> CMat {
    let a = CMat::from_fn(n, n, |_, _| random_complex(rng, scale));
    (&a + a.adjoint()).scale(0.5)
}

pub fn random_symmetric(rng: &mut impl Rng, n: usize, scale: f64) -> CMat {
    let a = CMat::from_fn(n, n, |_, _| random_complex(rng, scale));
    (&a + a.transpose()).scale(0.5)
}

/// Any QBH, stable or not.
pub fn random_model(rng: &mut impl Rng, n: usize) -> QbhModel {
    QbhModel::new(random_hermitian(rng, n, 1.0), random_symmetric(rng, n, 1.0)).unwrap()
}

/// `G = R₀⁻¹ D R₀` with `R₀ = exp(X_B)` and `D` number conserving.
///
/// Returns the model together with `R₀`.
pub fn random_squeezed_model(rng: &mut impl Rng, n: usize, squeeze: f64) -> (QbhModel, CMat) {
    let b = random_symmetric(rng, n, squeeze);
    let map = squeeze_from_pairing(&b, &Tolerances::default()).unwrap();
    let shift = CMat::identity(n, n) * Complex64::from(rng.gen_range(-1.0..3.0));
    let k_dual = random_hermitian(rng, n, 1.0) + shift;
    (squeezed_model(&map, &k_dual).unwrap(), map.r().clone())
}
