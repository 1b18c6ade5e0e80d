//! Numerical tolerances shared across the crate.

/// Relative Hermiticity tolerance.
pub const HERM: f64 = 1e-9;
/// Relative PSD tolerance, scaled by `max(lambda_max, 1)`.
pub const PSD: f64 = 1e-9;
/// Absolute trace tolerance for density matrices.
pub const TRACE: f64 = 1e-9;
/// Absolute tolerance on the squared norm of a pure state.
pub const NORM: f64 = 1e-9;
/// Default rank threshold relative to the largest eigenvalue.
pub const RANK: f64 = 1e-8;
/// Off-diagonal l1 mass below which a state is declared incoherent.
pub const INCOHERENT: f64 = 1e-9;
/// Default duality-gap tolerance of the conic solver.
pub const GAP: f64 = 1e-8;
/// Default feasibility tolerance of the conic solver.
pub const FEAS: f64 = 1e-8;
/// Largest Hilbert-space dimension accepted anywhere.
pub const DIM_CAP: usize = 64;

/// Reconstruction tolerance of the eigensolver for dimension `dim`.
pub fn recon(dim: usize) -> f64 {
    1e-10 * dim as f64
}
