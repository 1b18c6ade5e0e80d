//! Seeded random states, unitaries and Hermitian matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::matrix::{vec_norm, ComplexMatrix, C64};
use crate::linalg::state::{DensityMatrix, PureState};

pub type Rng64 = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed from a parent seed and a stream index.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finaliser over the combined words
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// `G G^dagger / Tr` with a `dim x rank` Ginibre factor `G`.
pub fn random_density_matrix(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    let mut rng = rng_from_seed(seed);
    Ok(random_density_matrix_with(dim, rank, &mut rng))
}

pub fn random_density_matrix_with<R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> DensityMatrix {
    let g = ginibre(dim, rank, rng);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::from_matrix_unchecked(m.scale(1.0 / tr).hermitize())
}

/// Haar-random pure state.
pub fn random_pure_state(dim: usize, seed: u64) -> Result<PureState> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    Ok(random_pure_state_with(dim, &mut rng))
}

pub fn random_pure_state_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    let v: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
    let n = vec_norm(&v);
    PureState::from_amplitudes_unchecked(v.iter().map(|z| z / n).collect())
}

/// Haar-random unitary via Gram-Schmidt on a Ginibre matrix with phase fixing.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    let mut q = ComplexMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut v = g.col(j);
        for k in 0..j {
            let qk = q.col(k);
            let proj: C64 = qk.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, qi) in v.iter_mut().zip(&qk) {
                *vi -= proj * qi;
            }
        }
        let n = vec_norm(&v);
        q.set_col(j, &v.iter().map(|z| z / n).collect::<Vec<_>>());
    }
    q
}

/// Random Hermitian matrix with standard normal entries (seeded).
pub fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = rng_from_seed(seed);
    ginibre(dim, dim, &mut rng).hermitize()
}
