//! Membership tests for MIO, IO, SIO and DIO.

use serde::Serialize;

use crate::channels::{ChoiMatrix, KrausChannel};
use crate::linalg::{dephase, ComplexMatrix};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelClassReport {
    pub is_mio: bool,
    pub is_io: bool,
    pub is_sio: bool,
    pub is_dio: bool,
    pub mio_residual: f64,
    pub dio_residual: f64,
    /// Largest Kraus entry outside the IO support pattern.
    pub io_residual: f64,
    pub sio_residual: f64,
}

/// Largest off-diagonal l1 mass of `E(|i><i|)` over basis inputs.
pub fn is_mio(j: &ChoiMatrix, tol: f64) -> (bool, f64) {
    let r = (0..j.dim_in())
        .map(|i| j.block(i, i).off_diagonal_l1())
        .fold(0.0, f64::max);
    (r <= tol, r)
}

/// At most one entry above `tol` in modulus in every column of every Kraus
/// operator.
pub fn is_io(ch: &KrausChannel, tol: f64) -> bool {
    io_residual(ch) <= tol
}

/// Row and column sparsity of every Kraus operator.
pub fn is_sio(ch: &KrausChannel, tol: f64) -> bool {
    io_residual(ch) <= tol && sio_row_residual(ch) <= tol
}

/// Per-Kraus identity `Delta(K B K^dagger) = K Delta(B) K^dagger` on all matrix
/// units `B`.
pub fn is_sio_identity(ch: &KrausChannel, tol: f64) -> (bool, f64) {
    let d = ch.dim_in();
    let mut r = 0.0f64;
    for k in ch.kraus() {
        for i in 0..d {
            for j in 0..d {
                let mut b = ComplexMatrix::zeros(d, d);
                b[(i, j)] = crate::linalg::C64::new(1.0, 0.0);
                let lhs = dephase(&k.sandwich(&b)).expect("square");
                let rhs = k.sandwich(&dephase(&b).expect("square"));
                r = r.max((&lhs - &rhs).max_abs());
            }
        }
    }
    (r <= tol, r)
}

/// `Delta(E(B)) = E(Delta(B))` on every matrix unit `B`.
pub fn is_dio(j: &ChoiMatrix, tol: f64) -> (bool, f64) {
    let mut r = 0.0f64;
    for i in 0..j.dim_in() {
        for k in 0..j.dim_in() {
            let blk = j.block(i, k);
            if i == k {
                r = r.max(off_diag_max(&blk));
            } else {
                r = r.max(blk.diagonal().iter().fold(0.0, |m, z| m.max(z.norm())));
            }
        }
    }
    (r <= tol, r)
}

fn off_diag_max(m: &ComplexMatrix) -> f64 {
    let mut r = 0.0f64;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j {
                r = r.max(m[(i, j)].norm());
            }
        }
    }
    r
}

/// Second-largest modulus in any column, maximized over Kraus operators.
fn io_residual(ch: &KrausChannel) -> f64 {
    ch.kraus()
        .iter()
        .map(|k| {
            (0..k.cols())
                .map(|c| second_largest((0..k.rows()).map(|r| k[(r, c)].norm())))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn sio_row_residual(ch: &KrausChannel) -> f64 {
    ch.kraus()
        .iter()
        .map(|k| {
            (0..k.rows())
                .map(|r| second_largest((0..k.cols()).map(|c| k[(r, c)].norm())))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn second_largest(it: impl Iterator<Item = f64>) -> f64 {
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for v in it {
        if v > a {
            b = a;
            a = v;
        } else if v > b {
            b = v;
        }
    }
    b
}

/// Runs all four tests.
pub fn classify(ch: &KrausChannel, tol: f64) -> ChannelClassReport {
    let j = ch.to_choi();
    let (is_mio, mio_residual) = is_mio(&j, tol);
    let (is_dio, dio_residual) = is_dio(&j, tol);
    let io_residual = io_residual(ch);
    let sio_residual = io_residual.max(sio_row_residual(ch));
    ChannelClassReport {
        is_mio,
        is_io: io_residual <= tol,
        is_sio: sio_residual <= tol,
        is_dio,
        mio_residual,
        dio_residual,
        io_residual,
        sio_residual,
    }
}
