use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the crate, with their defaults.
///
/// Experiments may override individual fields from their JSON config; missing
/// fields fall back to the defaults below.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Points with `|z|^2 >= 1 - eps_ball` are rejected.
    pub eps_ball: f64,
    /// Euclidean distance under which two nodes count as duplicates.
    pub tol_node: f64,
    /// PSD slack, relative to the trace.
    pub tol_psd: f64,
    /// Hermitian defect allowed, relative to the largest entry.
    pub tol_herm: f64,
    pub tol_eig: f64,
    pub tol_eval: f64,
    /// Cholesky reconstruction error allowed, relative to the trace.
    pub tol_chol: f64,
    pub tol_transversal: f64,
    pub tol_inj: f64,
    pub tol_proper: f64,
    /// Eigenvalues of `R` below this are treated as kernel directions.
    pub tol_kernel: f64,
    /// Minimum separation between pieces of a disjoint union.
    pub tol_sep: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_ball: 1e-12,
            tol_node: 1e-10,
            tol_psd: 1e-10,
            tol_herm: 1e-12,
            tol_eig: 1e-10,
            tol_eval: 1e-14,
            tol_chol: 1e-12,
            tol_transversal: 1e-6,
            tol_inj: 1e-8,
            tol_proper: 1e-10,
            tol_kernel: 1e-6,
            tol_sep: 0.05,
        }
    }
}

/// Jitter ladder for whitening, as multiples of the trace.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-14, 1e-12, 1e-10];
