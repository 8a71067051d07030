//! Number-conserving duals of dynamically stable quadratic bosonic Hamiltonians.
//!
//! A quadratic bosonic Hamiltonian (QBH) with hopping matrix `K` and pairing
//! matrix `Δ` is lifted to its 2N×2N single-particle Hamiltonian `H` and its
//! effective BdG matrix `G = τ₃H` in the interleaved Nambu ordering
//! `[a₁, a₁†, …, a_N, a_N†]`. When `G` is diagonalizable with a real spectrum
//! the Krein-normalized eigenbasis defines a positive-definite metric `S`;
//! conjugating `G` by `R = S^{1/2}` yields a Hermitian, τ₃-commuting BdG matrix,
//! i.e. a QBH with hopping terms only.
//!
//! Module map:
//!
//! - [`model`]: QBH data model, Nambu conventions, `H` and `G` construction.
//! - [`spectral`]: stability classification, Krein normalization, sweeps.
//! - [`duality`]: metric, square root, dual model and its certificates.
//! - [`lattice`]: gapped harmonic chain and bosonic Kitaev chain builders with
//!   their closed forms.
//! - [`bloch`]: band structures, dual hopping tables and range truncation.
//! - [`topology`]: Krein and Berry connections along parameter families.

// `!(x > 0.0)` style guards are kept because they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch;
pub mod duality;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod model;
pub mod spectral;
pub mod tolerance;
pub mod topology;

pub use duality::{
    dualize, instability_margin, metric_from_basis, sqrt_metric, trace_identities, DualModel,
    DualPipeline, DualityMap, KreinMetric, MarginRow, TraceReport,
};
pub use error::{DualError, Result};
pub use linalg::{CMat, CVec};
pub use model::{
    build_bdg, build_sph, krein_inner, thermodynamic_stability, BdgMatrix, ComplexEntry,
    QbhModel, TauMatrices, ThermoReport,
};
pub use spectral::{
    classify_stability, krein_normalize, krein_normalize_with_reference,
    normal_mode_decomposition, scan_phase_diagram, NormalModes, PhaseRow, SpectralData,
    StabilityReport,
};
pub use tolerance::Tolerances;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
