//! Quantum channels in Kraus and Choi form, free-operation class tests and the
//! overlap-optimal channel built from a `C_max` certificate.
//!
//! Choi convention: `J = sum_{ij} |i><j| (x) E(|i><j|)`, input index first, so
//! `J[(i, k), (j, l)] = E(|i><j|)[k, l]` with row index `i * dim_out + k`.

mod class;
mod construct;
mod random;

pub use class::{classify, is_dio, is_io, is_mio, is_sio, is_sio_identity, ChannelClassReport};
pub use construct::{diagonal_unitary, literal_overlap_kraus, maximally_coherent, optimal_overlap_channel};
pub use random::{random_channel, ChannelClass};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::eig::hermitian_eig_unchecked;
use crate::linalg::json::MatrixJson;
use crate::linalg::{ComplexMatrix, DensityMatrix, C64};
use crate::tol;

/// Completely positive map given by Kraus operators (`dim_out x dim_in`).
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Trace-preserving channel; completeness checked to `tol::TRACE`.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let ch = Self::cp_map(kraus)?;
        let r = ch.completeness_residual();
        if r > tol::TRACE * ch.dim_in.max(1) as f64 {
            return Err(Error::InvalidArgument(format!(
                "Kraus operators are not complete (residual {r:.3e})"
            )));
        }
        Ok(ch)
    }

    /// Completely positive, trace-nonincreasing map (a subchannel).
    pub fn cp_map(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty Kraus list".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidArgument("zero-dimensional Kraus operator".into()));
        }
        for k in &kraus {
            if (k.rows(), k.cols()) != (dim_out, dim_in) {
                return Err(Error::DimensionMismatch {
                    expected: dim_out * dim_in,
                    got: k.rows() * k.cols(),
                });
            }
            if !k.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let ch = Self {
            dim_in,
            dim_out,
            kraus,
        };
        let e = hermitian_eig_unchecked(&ch.kraus_sum());
        if e.max() > 1.0 + tol::TRACE * dim_in as f64 {
            return Err(Error::InvalidArgument(format!(
                "map increases trace (largest eigenvalue of sum K^dagger K is {})",
                e.max()
            )));
        }
        Ok(ch)
    }

    pub(crate) fn from_kraus_unchecked(kraus: Vec<ComplexMatrix>) -> Self {
        let (dim_out, dim_in) = (kraus[0].rows(), kraus[0].cols());
        Self {
            dim_in,
            dim_out,
            kraus,
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus_unchecked(vec![ComplexMatrix::identity(d)])
    }

    /// Complete dephasing `{|i><i|}`.
    pub fn dephasing(d: usize) -> Self {
        Self::from_kraus_unchecked(
            (0..d)
                .map(|i| {
                    let mut k = ComplexMatrix::zeros(d, d);
                    k[(i, i)] = C64::new(1.0, 0.0);
                    k
                })
                .collect(),
        )
    }

    /// Single unitary Kraus operator.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn into_kraus(self) -> Vec<ComplexMatrix> {
        self.kraus
    }

    /// `sum K^dagger K`.
    pub fn kraus_sum(&self) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            s = &s + &k.adjoint().matmul(k);
        }
        s
    }

    pub fn completeness_residual(&self) -> f64 {
        (&self.kraus_sum() - &ComplexMatrix::identity(self.dim_in)).max_abs()
    }

    /// `sum K X K^dagger` for any input-sized matrix.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim_in || x.cols() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                got: x.rows(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = &out + &k.sandwich(x);
        }
        Ok(out)
    }

    /// Image of a state; the result keeps whatever trace the map gives it.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_matrix_unchecked(self.apply_matrix(rho.matrix())?.hermitize()))
    }

    /// Heisenberg picture `sum K^dagger X K`.
    pub fn adjoint_apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim_out || x.cols() != self.dim_out {
            return Err(Error::DimensionMismatch {
                expected: self.dim_out,
                got: x.rows(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out = &out + &k.adjoint().matmul(x).matmul(k);
        }
        Ok(out)
    }

    /// `U (.) U^dagger` after this channel, for square `u` of output size.
    pub fn then_unitary(&self, u: &ComplexMatrix) -> Self {
        Self::from_kraus_unchecked(self.kraus.iter().map(|k| u.matmul(k)).collect())
    }

    /// `E(V (.) V^dagger)`, for `v` of input size.
    pub fn after_unitary(&self, v: &ComplexMatrix) -> Self {
        Self::from_kraus_unchecked(self.kraus.iter().map(|k| k.matmul(v)).collect())
    }

    /// Scales the map by `p >= 0` (Kraus operators by `sqrt p`).
    pub fn scaled(&self, p: f64) -> Self {
        let s = p.max(0.0).sqrt();
        Self::from_kraus_unchecked(self.kraus.iter().map(|k| k.scale(s)).collect())
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        let (di, do_) = (self.dim_in, self.dim_out);
        let n = di * do_;
        let mut j = ComplexMatrix::zeros(n, n);
        for k in &self.kraus {
            for a in 0..n {
                let (i, kk) = (a / do_, a % do_);
                let u = k[(kk, i)];
                if u == C64::new(0.0, 0.0) {
                    continue;
                }
                for b in 0..n {
                    let (jj, l) = (b / do_, b % do_);
                    j[(a, b)] += u * k[(l, jj)].conj();
                }
            }
        }
        ChoiMatrix {
            dim_in: di,
            dim_out: do_,
            mat: j,
        }
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            dim_in: Some(self.dim_in),
            dim_out: Some(self.dim_out),
            kraus: Some(self.kraus.iter().map(MatrixJson::from).collect()),
            choi: None,
        }
    }
}

/// Choi matrix of a map from `dim_in` to `dim_out`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    dim_in: usize,
    dim_out: usize,
    mat: ComplexMatrix,
}

impl ChoiMatrix {
    /// Validates PSD and trace preservation.
    pub fn new(dim_in: usize, dim_out: usize, mat: ComplexMatrix) -> Result<Self> {
        let n = mat.ensure_square()?;
        if n != dim_in * dim_out || n == 0 {
            return Err(Error::DimensionMismatch {
                expected: dim_in * dim_out,
                got: n,
            });
        }
        if !mat.is_finite() {
            return Err(Error::NonFinite);
        }
        let c = Self {
            dim_in,
            dim_out,
            mat: mat.hermitize(),
        };
        let e = hermitian_eig_unchecked(&c.mat);
        if e.min() < -tol::PSD * e.max().max(1.0) {
            return Err(Error::NotPsd(e.min()));
        }
        let tp = c.tp_residual();
        if tp > tol::TRACE * dim_in as f64 {
            return Err(Error::InvalidArgument(format!(
                "Choi matrix is not trace preserving (residual {tp:.3e})"
            )));
        }
        Ok(c)
    }

    pub(crate) fn from_parts_unchecked(dim_in: usize, dim_out: usize, mat: ComplexMatrix) -> Self {
        Self {
            dim_in,
            dim_out,
            mat,
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// `E(|i><j|)`.
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        let d = self.dim_out;
        self.mat.block(i * d, j * d, d, d)
    }

    /// `Tr_out J`.
    pub fn partial_trace_output(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim_in, self.dim_in, |i, j| self.block(i, j).trace())
    }

    pub fn tp_residual(&self) -> f64 {
        (&self.partial_trace_output() - &ComplexMatrix::identity(self.dim_in)).max_abs()
    }

    /// Most negative eigenvalue, clamped at 0.
    pub fn psd_residual(&self) -> f64 {
        (-hermitian_eig_unchecked(&self.mat).min()).max(0.0)
    }

    /// `E(X) = sum_{ij} X_ij E(|i><j|)`.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim_in || x.cols() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                got: x.rows(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for i in 0..self.dim_in {
            for j in 0..self.dim_in {
                if x[(i, j)] != C64::new(0.0, 0.0) {
                    out.axpy(x[(i, j)], &self.block(i, j));
                }
            }
        }
        Ok(out)
    }

    /// Kraus operators from the eigenvectors of `J` above `rank_tol * lambda_max`.
    pub fn to_kraus(&self, rank_tol: f64) -> KrausChannel {
        let e = hermitian_eig_unchecked(&self.mat);
        let cut = rank_tol * e.max().max(0.0);
        let (di, do_) = (self.dim_in, self.dim_out);
        let mut kraus = Vec::new();
        for k in (0..e.dim()).rev() {
            let mu = e.values[k];
            if mu <= cut {
                continue;
            }
            let s = mu.sqrt();
            kraus.push(ComplexMatrix::from_fn(do_, di, |r, c| {
                e.vectors[(c * do_ + r, k)] * s
            }));
        }
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(do_, di));
        }
        KrausChannel::from_kraus_unchecked(kraus)
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            dim_in: Some(self.dim_in),
            dim_out: Some(self.dim_out),
            kraus: None,
            choi: Some(MatrixJson::from(&self.mat)),
        }
    }
}

/// `from_choi` with the default rank tolerance.
pub fn from_choi(j: &ChoiMatrix) -> KrausChannel {
    j.to_kraus(tol::RANK * 1e-4)
}

/// `{"dim_in", "dim_out", "kraus": [...]}` or `{"choi": matrix}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_out: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choi: Option<MatrixJson>,
}

impl ChannelJson {
    /// Decodes either form into a validated trace-preserving channel.
    pub fn to_channel(&self) -> Result<KrausChannel> {
        match (&self.kraus, &self.choi) {
            (Some(ks), None) => {
                let kraus = ks.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
                let ch = KrausChannel::new(kraus)?;
                if self.dim_in.is_some_and(|d| d != ch.dim_in())
                    || self.dim_out.is_some_and(|d| d != ch.dim_out())
                {
                    return Err(Error::Parse("declared channel dimensions do not match".into()));
                }
                Ok(ch)
            }
            (None, Some(c)) => {
                let m = c.to_matrix()?;
                let n = m.rows();
                let (di, do_) = match (self.dim_in, self.dim_out) {
                    (Some(a), Some(b)) => (a, b),
                    (Some(a), None) if a > 0 && n % a == 0 => (a, n / a),
                    (None, Some(b)) if b > 0 && n % b == 0 => (n / b, b),
                    _ => {
                        let d = (n as f64).sqrt().round() as usize;
                        if d * d != n {
                            return Err(Error::Parse(
                                "Choi matrix needs dim_in/dim_out when not a square dimension".into(),
                            ));
                        }
                        (d, d)
                    }
                };
                Ok(from_choi(&ChoiMatrix::new(di, do_, m)?))
            }
            _ => Err(Error::Parse("channel needs exactly one of \"kraus\" or \"choi\"".into())),
        }
    }
}

pub fn channel_from_json_str(s: &str) -> Result<KrausChannel> {
    let j: ChannelJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    j.to_channel()
}
