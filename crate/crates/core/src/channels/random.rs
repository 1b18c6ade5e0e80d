//! Seeded generators of channels in each free class.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{ChoiMatrix, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::eig::hermitian_eig_unchecked;
use crate::linalg::random::{complex_normal, ginibre, rng_from_seed, Rng64};
use crate::linalg::{ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ChannelClass {
    Mio,
    Io,
    Sio,
    Dio,
    Any,
}

/// Random channel on `dim` of the requested class; deterministic in `seed`.
///
/// `kraus_count` fixes the number of structured Kraus operators for
/// IO/SIO/ANY (IO adds completion operators). DIO and MIO channels are drawn
/// as Choi matrices and their Kraus count is the Choi rank.
pub fn random_channel(dim: usize, kraus_count: usize, class: ChannelClass, seed: u64) -> Result<KrausChannel> {
    if dim == 0 || kraus_count == 0 {
        return Err(Error::InvalidArgument("dimension and Kraus count must be positive".into()));
    }
    crate::linalg::check_dim(dim * dim)?;
    let mut rng = rng_from_seed(seed);
    let ch = match class {
        ChannelClass::Sio => random_sio(dim, kraus_count, &mut rng),
        ChannelClass::Io => random_io(dim, kraus_count, &mut rng),
        ChannelClass::Dio => random_pattern_choi(dim, true, &mut rng),
        ChannelClass::Mio => random_pattern_choi(dim, false, &mut rng),
        ChannelClass::Any => {
            let g = ginibre(dim * dim, kraus_count.min(dim * dim), &mut rng);
            let j = g.matmul(&g.adjoint());
            normalize_tp(dim, j).to_kraus(1e-14)
        }
    };
    let r = ch.completeness_residual();
    if r > 1e-9 {
        return Err(Error::Solver(format!("generated channel is not complete (residual {r:.3e})")));
    }
    Ok(ch)
}

fn random_sio(d: usize, count: usize, rng: &mut Rng64) -> KrausChannel {
    let mut kraus = Vec::with_capacity(count);
    for _ in 0..count {
        let mut perm: Vec<usize> = (0..d).collect();
        perm.shuffle(rng);
        let mut k = ComplexMatrix::zeros(d, d);
        for (col, &row) in perm.iter().enumerate() {
            k[(row, col)] = complex_normal(rng);
        }
        kraus.push(k);
    }
    // sum K^dagger K is diagonal; rescale columns
    let norms = column_norms(&kraus, d);
    for k in &mut kraus {
        for c in 0..d {
            for r in 0..d {
                k[(r, c)] /= norms[c].sqrt();
            }
        }
    }
    KrausChannel::from_kraus_unchecked(kraus)
}

fn column_norms(kraus: &[ComplexMatrix], d: usize) -> Vec<f64> {
    let mut norms = vec![0.0; d];
    for k in kraus {
        for c in 0..d {
            for r in 0..k.rows() {
                norms[c] += k[(r, c)].norm_sqr();
            }
        }
    }
    norms
}

/// Random column patterns scaled below completeness, then completed by
/// operators `sqrt(mu) |r><e|` whose single nonzero row keeps them incoherent.
fn random_io(d: usize, count: usize, rng: &mut Rng64) -> KrausChannel {
    let mut kraus = Vec::with_capacity(count + d);
    for _ in 0..count {
        let mut k = ComplexMatrix::zeros(d, d);
        for c in 0..d {
            let r = rng.random_range(0..d);
            k[(r, c)] = complex_normal(rng);
        }
        kraus.push(k);
    }
    let mut s = ComplexMatrix::zeros(d, d);
    for k in &kraus {
        s = &s + &k.adjoint().matmul(k);
    }
    let lmax = hermitian_eig_unchecked(&s).max();
    let shrink: f64 = rng.random_range(0.5..0.95);
    let scale = (shrink / lmax).sqrt();
    for k in &mut kraus {
        *k = k.scale(scale);
    }
    let rest = &ComplexMatrix::identity(d) - &s.scale(scale * scale);
    let e = hermitian_eig_unchecked(&rest);
    for idx in 0..d {
        let mu = e.values[idx];
        if mu <= 0.0 {
            continue;
        }
        let row = rng.random_range(0..d);
        let v = e.vector(idx);
        let mut k = ComplexMatrix::zeros(d, d);
        for c in 0..d {
            k[(row, c)] = v[c].conj() * mu.sqrt();
        }
        kraus.push(k);
    }
    KrausChannel::from_kraus_unchecked(kraus)
}

/// Random Choi with the MIO (and optionally DIO) zero pattern, shifted to be
/// positive definite and made trace preserving without leaving the class.
fn random_pattern_choi(d: usize, dio: bool, rng: &mut Rng64) -> KrausChannel {
    let n = d * d;
    let g = ginibre(n, n, rng);
    let mut j = g.matmul(&g.adjoint()).scale(1.0 / n as f64);
    for a in 0..n {
        for b in 0..n {
            let (i, k) = (a / d, a % d);
            let (jj, l) = (b / d, b % d);
            let mio_zero = i == jj && k != l;
            let dio_zero = dio && i != jj && k == l;
            if mio_zero || dio_zero {
                j[(a, b)] = C64::new(0.0, 0.0);
            }
        }
    }
    let lmin = hermitian_eig_unchecked(&j).min();
    let shift = (-lmin).max(0.0) + 0.05;
    for a in 0..n {
        j[(a, a)] += C64::new(shift, 0.0);
    }
    if dio {
        // Tr_out J is diagonal under the DIO pattern
        return normalize_tp(d, j).to_kraus(1e-14);
    }
    let c = ChoiMatrix::from_parts_unchecked(d, d, j.clone());
    let t = c.partial_trace_output();
    let tmax = hermitian_eig_unchecked(&t).max();
    let jscaled = j.scale(1.0 / tmax);
    // complete with X -> Tr(A X) sigma0, A^T = I - T / tmax, sigma0 incoherent
    let a_t = &ComplexMatrix::identity(d) - &t.scale(1.0 / tmax);
    let mut sigma0: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = sigma0.iter().sum();
    sigma0.iter_mut().for_each(|v| *v /= total);
    let completion = a_t.kron(&ComplexMatrix::from_diagonal(&sigma0));
    ChoiMatrix::from_parts_unchecked(d, d, (&jscaled + &completion).hermitize()).to_kraus(1e-14)
}

/// `(T^{-1/2} (x) I) J (T^{-1/2} (x) I)` with `T = Tr_out J`.
fn normalize_tp(d: usize, j: ComplexMatrix) -> ChoiMatrix {
    let c = ChoiMatrix::from_parts_unchecked(d, d, j);
    let t = c.partial_trace_output();
    let t_inv_sqrt = hermitian_eig_unchecked(&t).apply(|x| 1.0 / x.sqrt());
    let s = t_inv_sqrt.kron(&ComplexMatrix::identity(d));
    ChoiMatrix::from_parts_unchecked(d, d, s.matmul(c.matrix()).matmul(&s).hermitize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::classify;
    use crate::linalg::PureState;

    #[test]
    fn generated_channels_are_in_class_and_hierarchy_holds() {
        for seed in 0..10 {
            for d in [2usize, 3, 4] {
                let sio = classify(&random_channel(d, 3, ChannelClass::Sio, seed).unwrap(), 1e-9);
                assert!(sio.is_sio && sio.is_io && sio.is_dio && sio.is_mio);
                let io = classify(&random_channel(d, 3, ChannelClass::Io, seed).unwrap(), 1e-9);
                assert!(io.is_io && io.is_mio);
                let dio = classify(&random_channel(d, 3, ChannelClass::Dio, seed).unwrap(), 1e-8);
                assert!(dio.is_dio && dio.is_mio, "{dio:?}");
                let mio = classify(&random_channel(d, 3, ChannelClass::Mio, seed).unwrap(), 1e-8);
                assert!(mio.is_mio, "{mio:?}");
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        for class in [ChannelClass::Io, ChannelClass::Mio, ChannelClass::Any] {
            assert_eq!(random_channel(3, 2, class, 5).unwrap(), random_channel(3, 2, class, 5).unwrap());
        }
    }

    #[test]
    fn unit_diagonal_image_for_free_classes() {
        for seed in 0..5 {
            for class in [ChannelClass::Dio, ChannelClass::Io, ChannelClass::Sio] {
                let d = 3;
                let ch = random_channel(d, 3, class, seed).unwrap();
                let psi = PureState::from_real(&[1.0; 3]).unwrap().projector();
                let tau = ch.adjoint_apply(&psi).unwrap().scale(d as f64);
                let e = hermitian_eig_unchecked(&tau);
                assert!(e.min() > -1e-9);
                for v in tau.real_diagonal() {
                    assert!((v - 1.0).abs() < 1e-9, "{class:?}: {v}");
                }
            }
        }
    }
}
