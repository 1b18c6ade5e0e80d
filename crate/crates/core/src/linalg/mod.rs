//! Dense complex linear algebra for density operators.
//!
//! Everything here is a pure function of its inputs. Logarithms are base 2.

pub mod eig;
pub mod json;
pub mod matrix;
pub mod random;
pub mod state;

pub use eig::{hermitian_eig, Eigh};
pub use matrix::{ComplexMatrix, C64};
pub use random::{random_density_matrix, random_pure_state};
pub use state::{DensityMatrix, PureState};

use crate::error::{Error, Result};
use crate::tol;

/// Zeroes every off-diagonal entry.
pub fn dephase(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.ensure_square()?;
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = m[(i, i)];
    }
    Ok(out)
}

/// Dephased state.
pub fn dephase_state(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_matrix_unchecked(dephase(rho.matrix()).expect("density matrices are square"))
}

/// Uhlmann fidelity `Tr sqrt(sqrt(rho) sigma sqrt(rho))`, not squared.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    Ok(fidelity_psd(rho.matrix(), sigma.matrix()).min(1.0))
}

/// Fidelity between two PSD matrices of any trace.
///
/// Eigenvalues below the rounding floor of each spectrum are treated as zero
/// before square roots are taken.
pub fn fidelity_psd(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let ea = eig::hermitian_eig_unchecked(a);
    let cut_a = rounding_floor(&ea);
    let sa = ea.apply(|x| if x > cut_a { x.sqrt() } else { 0.0 });
    let inner = sa.matmul(b).matmul(&sa);
    let e = eig::hermitian_eig_unchecked(&inner);
    let cut = rounding_floor(&e);
    e.values
        .iter()
        .filter(|&&x| x > cut)
        .map(|&x| x.sqrt())
        .sum()
}

fn rounding_floor(e: &Eigh) -> f64 {
    let scale = e.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    8.0 * e.dim() as f64 * f64::EPSILON * scale
}

/// Sum of singular values.
///
/// Computed from the spectrum of the Hermitian dilation `[[0, A], [A^dagger, 0]]`,
/// whose eigenvalues are `+-` the singular values of `A`.
pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    let (r, c) = (a.rows(), a.cols());
    if r == 0 || c == 0 {
        return 0.0;
    }
    let mut dil = ComplexMatrix::zeros(r + c, r + c);
    dil.set_block(0, r, a);
    dil.set_block(r, 0, &a.adjoint());
    let e = eig::jacobi(dil);
    0.5 * e.values.iter().map(|x| x.abs()).sum::<f64>()
}

/// Trace norm of a Hermitian matrix as the sum of absolute eigenvalues.
pub fn trace_norm_hermitian(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eig(h)?.values.iter().map(|x| x.abs()).sum())
}

/// Projector onto eigenvectors whose eigenvalue exceeds `rank_tol * lambda_max`.
pub fn support_projector(rho: &DensityMatrix, rank_tol: f64) -> ComplexMatrix {
    let e = eig::hermitian_eig_unchecked(rho.matrix());
    let cut = rank_tol * e.max().max(0.0);
    e.apply(|x| if x > cut { 1.0 } else { 0.0 })
}

/// Support basis: orthonormal columns spanning the support, and the rank.
pub fn support_basis(rho: &DensityMatrix, rank_tol: f64) -> ComplexMatrix {
    let e = eig::hermitian_eig_unchecked(rho.matrix());
    let cut = rank_tol * e.max().max(0.0);
    let keep: Vec<usize> = (0..e.dim()).filter(|&k| e.values[k] > cut).collect();
    ComplexMatrix::from_fn(e.dim(), keep.len(), |i, j| e.vectors[(i, keep[j])])
}

/// `-sum p log2 p` with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum::<f64>()
        .max(0.0)
}

pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy(&[p, 1.0 - p])
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let e = eig::hermitian_eig_unchecked(rho.matrix());
    shannon_entropy(&e.values)
}

/// `rho^{tensor n}`; fails when `d^n` exceeds the dimension cap.
pub fn tensor_power(rho: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
    tensor_power_capped(rho, n, tol::DIM_CAP)
}

pub fn tensor_power_capped(rho: &DensityMatrix, n: usize, cap: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
    }
    let d = rho.dim();
    let dim = d
        .checked_pow(n as u32)
        .filter(|&x| x <= cap)
        .ok_or(Error::DimensionCap {
            dim: d.saturating_pow(n as u32),
            cap,
        })?;
    let mut acc = rho.matrix().clone();
    for _ in 1..n {
        acc = acc.kron(rho.matrix());
    }
    debug_assert_eq!(acc.rows(), dim);
    Ok(DensityMatrix::from_matrix_unchecked(acc))
}

/// Validates a dimension against the cap.
pub fn check_dim(dim: usize) -> Result<()> {
    if dim > tol::DIM_CAP {
        Err(Error::DimensionCap {
            dim,
            cap: tol::DIM_CAP,
        })
    } else {
        Ok(())
    }
}
