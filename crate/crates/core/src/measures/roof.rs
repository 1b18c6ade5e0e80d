//! Heuristic upper estimate of the convex roof of `C_max`.
//!
//! Every pure-state decomposition of `rho = sum_k lambda_k |e_k><e_k|` has the
//! form `sqrt(p_j) psi_j = sum_k U_jk sqrt(lambda_k) e_k` for an isometry `U`
//! on the purifying system. Unitaries act on the unnormalized vectors
//! `v_j = sqrt(p_j) psi_j` directly, so the search rotates pairs of rows of
//! `v` and keeps whatever lowers `sum_j ||v_j||^2 log2(||v_j||_1^2 / ||v_j||_2^2)`.

use serde::Serialize;

use crate::error::Result;
use crate::linalg::eig::hermitian_eig_unchecked;
use crate::linalg::random::{derive_seed, random_unitary, rng_from_seed};
use crate::linalg::{DensityMatrix, PureState, C64};

const STEP_START: f64 = 0.5;
const STEP_STOP: f64 = 1e-7;
const MAX_SWEEPS: usize = 400;
/// Rows lighter than this are dropped from the reported decomposition.
const WEIGHT_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug, Serialize)]
pub struct RoofEstimate {
    /// Best average `C_max` found; an upper estimate, never a certified optimum.
    pub value: f64,
    /// Best-so-far value after each restart.
    pub history: Vec<f64>,
    pub weights: Vec<f64>,
    #[serde(skip)]
    pub states: Vec<PureState>,
}

/// `||v||^2 log2(||v||_1^2 / ||v||^2)`, the weighted `C_max` of one row.
fn row_cost(v: &[C64]) -> f64 {
    let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if n2 <= 1e-300 {
        return 0.0;
    }
    let n1: f64 = v.iter().map(|z| z.norm()).sum();
    (n2 * (n1 * n1 / n2).log2()).max(0.0)
}

fn rotate(a: &[C64], b: &[C64], theta: f64, phi: f64) -> (Vec<C64>, Vec<C64>) {
    let (s, c) = theta.sin_cos();
    let e = C64::from_polar(1.0, phi);
    let na = a.iter().zip(b).map(|(x, y)| x * c - e * y * s).collect();
    let nb = a.iter().zip(b).map(|(x, y)| e.conj() * x * s + y * c).collect();
    (na, nb)
}

/// Coordinate descent over Givens rotations until the step collapses.
fn descend(rows: &mut [Vec<C64>]) -> f64 {
    let k = rows.len();
    let mut costs: Vec<f64> = rows.iter().map(|r| row_cost(r)).collect();
    let phases = [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI, -std::f64::consts::FRAC_PI_2];
    let mut step = STEP_START;
    for _ in 0..MAX_SWEEPS {
        if step < STEP_STOP {
            break;
        }
        let mut improved = false;
        for j in 0..k {
            for l in (j + 1)..k {
                for &phi in &phases {
                    for theta in [step, -step] {
                        let (a, b) = rotate(&rows[j], &rows[l], theta, phi);
                        let (ca, cb) = (row_cost(&a), row_cost(&b));
                        if ca + cb < costs[j] + costs[l] - 1e-15 {
                            rows[j] = a;
                            rows[l] = b;
                            costs[j] = ca;
                            costs[l] = cb;
                            improved = true;
                        }
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    costs.iter().sum()
}

/// Searches decompositions with `d^2` elements (or the rank, if larger).
///
/// Restart 0 starts from the eigendecomposition; restart `r > 0` from a
/// Haar-random isometry drawn from `derive_seed(seed, r)`.
pub fn convex_roof_cmax_upper(rho: &DensityMatrix, restarts: usize, seed: u64) -> Result<RoofEstimate> {
    let d = rho.dim();
    let e = hermitian_eig_unchecked(rho.matrix());
    let floor = 1e-14 * e.max().max(1.0);
    let comps: Vec<Vec<C64>> = (0..d)
        .filter(|&k| e.values[k] > floor)
        .map(|k| e.vector(k).into_iter().map(|z| z * e.values[k].sqrt()).collect())
        .collect();
    let r = comps.len();
    let kdim = (d * d).max(r);

    let mut best = f64::INFINITY;
    let mut best_rows: Vec<Vec<C64>> = Vec::new();
    let mut history = Vec::with_capacity(restarts.max(1));
    for attempt in 0..restarts.max(1) {
        let mut rows: Vec<Vec<C64>> = if attempt == 0 {
            (0..kdim)
                .map(|j| comps.get(j).cloned().unwrap_or_else(|| vec![C64::new(0.0, 0.0); d]))
                .collect()
        } else {
            let mut rng = rng_from_seed(derive_seed(seed, attempt as u64));
            let u = random_unitary(kdim, &mut rng);
            (0..kdim)
                .map(|j| {
                    let mut v = vec![C64::new(0.0, 0.0); d];
                    for (k, c) in comps.iter().enumerate() {
                        let w = u[(j, k)];
                        for (vi, ci) in v.iter_mut().zip(c) {
                            *vi += w * ci;
                        }
                    }
                    v
                })
                .collect()
        };
        let value = descend(&mut rows);
        if value < best {
            best = value;
            best_rows = rows;
        }
        history.push(best);
    }

    let mut weights = Vec::new();
    let mut states = Vec::new();
    for v in best_rows {
        let p: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if p > WEIGHT_FLOOR {
            weights.push(p);
            states.push(PureState::normalized(v)?);
        }
    }
    Ok(RoofEstimate {
        value: best,
        history,
        weights,
        states,
    })
}
