//! Validated density matrices and pure states.

use crate::error::{Error, Result};
use crate::linalg::eig::hermitian_eig;
use crate::linalg::matrix::{vec_norm, ComplexMatrix, C64};
use crate::tol;

/// Hermitian, positive semidefinite, unit-trace matrix.
///
/// The subnormalized variant (trace at most one) only appears as the
/// witness of smoothed quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates and wraps `mat`. The stored matrix is the Hermitian part.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let rho = Self::validate_psd(mat)?;
        let tr = rho.trace();
        if (tr - 1.0).abs() > tol::TRACE {
            return Err(Error::BadTrace(tr));
        }
        Ok(rho)
    }

    /// Like [`DensityMatrix::new`] but accepts any trace in `[0, 1]`.
    pub fn new_subnormalized(mat: ComplexMatrix) -> Result<Self> {
        let rho = Self::validate_psd(mat)?;
        let tr = rho.trace();
        if !(-tol::TRACE..=1.0 + tol::TRACE).contains(&tr) {
            return Err(Error::BadTrace(tr));
        }
        Ok(rho)
    }

    fn validate_psd(mat: ComplexMatrix) -> Result<Self> {
        let n = mat.ensure_square()?;
        if n == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        if !mat.is_finite() {
            return Err(Error::NonFinite);
        }
        let e = hermitian_eig(&mat)?;
        let floor = -tol::PSD * e.max().max(1.0);
        if e.min() < floor {
            return Err(Error::NotPsd(e.min()));
        }
        Ok(Self {
            mat: mat.hermitize(),
        })
    }

    pub(crate) fn from_matrix_unchecked(mat: ComplexMatrix) -> Self {
        Self { mat }
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_diagonal(probs))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// `|i><i|`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(i, i)] = C64::new(1.0, 0.0);
        Self { mat: m }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    /// Convex mixture `sum_i w_i rho_i`.
    pub fn mixture(states: &[DensityMatrix], weights: &[f64]) -> Result<Self> {
        if states.is_empty() || states.len() != weights.len() {
            return Err(Error::InvalidArgument(
                "mixture needs one weight per state".into(),
            ));
        }
        if weights.iter().any(|&w| w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > tol::TRACE
        {
            return Err(Error::InvalidArgument(
                "weights must be a probability vector".into(),
            ));
        }
        let d = states[0].dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (s, &w) in states.iter().zip(weights) {
            if s.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: s.dim(),
                });
            }
            acc.axpy(C64::new(w, 0.0), s.matrix());
        }
        Ok(Self { mat: acc })
    }
}

/// Normalized state vector in the reference basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
}

impl PureState {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidArgument("empty state vector".into()));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n2 = vec_norm(&amps).powi(2);
        if (n2 - 1.0).abs() > tol::NORM {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { amps })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let n = vec_norm(&amps);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotNormalized(n * n));
        }
        Self::new(amps.iter().map(|z| z / n).collect())
    }

    /// Real amplitudes, normalized.
    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::normalized(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub(crate) fn from_amplitudes_unchecked(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amps, &self.amps)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(self.projector())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_trace_and_negative_spectrum() {
        assert!(matches!(
            DensityMatrix::diagonal(&[0.5, 0.6]),
            Err(Error::BadTrace(_))
        ));
        assert!(matches!(
            DensityMatrix::diagonal(&[1.5, -0.5]),
            Err(Error::NotPsd(_))
        ));
        let sub = DensityMatrix::new_subnormalized(ComplexMatrix::from_diagonal(&[0.2, 0.3]));
        assert!(sub.is_ok());
    }

    #[test]
    fn pure_state_normalization() {
        assert!(PureState::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).is_err());
        let p = PureState::from_real(&[1.0, 1.0]).unwrap();
        assert!((p.to_density().purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_checks_weights() {
        let a = DensityMatrix::basis(2, 0);
        let b = DensityMatrix::basis(2, 1);
        let m = DensityMatrix::mixture(&[a.clone(), b.clone()], &[0.5, 0.5]).unwrap();
        assert_eq!(m, DensityMatrix::maximally_mixed(2));
        assert!(DensityMatrix::mixture(&[a, b], &[0.7, 0.7]).is_err());
    }
}
