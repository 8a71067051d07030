use serde::{Deserialize, Serialize};

/// Numerical thresholds used across the pipeline.
///
/// Entries marked *relative* are multiplied by `max(1, ‖G‖_max)` of the
/// matrix under study before use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Entrywise Hermiticity / symmetry check on model inputs.
    pub validation: f64,
    /// Largest |Im ω| still counted as a real eigenvalue.
    pub imag: f64,
    /// Largest admissible condition number of the τ₃-Gram matrix.
    pub cond_max: f64,
    /// Eigenvalues closer than this (relative) are treated as one degenerate level.
    pub cluster: f64,
    /// Singular-value threshold (relative) for accepting an eigenspace direction.
    pub null_space: f64,
    /// Smallest admissible |Gram eigenvalue| inside an eigenspace.
    pub gram_min: f64,
    /// Largest admissible |Δ^D_ij| of the dual.
    pub pairing: f64,
    /// Generic matrix-identity tolerance (relative to the norms involved).
    pub invariant: f64,
    /// Smallest admissible eigenvalue of the metric S.
    pub metric_min_eig: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            validation: 1e-10,
            imag: 1e-8,
            cond_max: 1e8,
            cluster: 1e-9,
            null_space: 1e-6,
            gram_min: 1e-10,
            pairing: 1e-8,
            invariant: 1e-8,
            metric_min_eig: 1e-14,
        }
    }
}
