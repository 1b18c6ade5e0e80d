//! Seeded search for incoherent operations that raise the average `C_min`,
//! and the quasi-convexity check of `C_max`.

use rand::Rng;
use serde::Serialize;

use crate::channels::{is_io, random_channel, ChannelClass, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::random::{derive_seed, random_pure_state_with, rng_from_seed};
use crate::linalg::{ComplexMatrix, DensityMatrix, PureState};
use crate::measures::{c_max, pure_closed_forms};

/// Smallest average increase accepted as a violation.
pub const VIOLATION_MARGIN: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct ViolationInstance {
    pub seed: u64,
    pub trial: usize,
    #[serde(skip)]
    pub state: PureState,
    #[serde(skip)]
    pub channel: KrausChannel,
    pub probabilities: Vec<f64>,
    pub c_min_outcomes: Vec<f64>,
    pub average_c_min_after: f64,
    pub c_min_before: f64,
}

/// Outcome probabilities and `C_min` of each normalized post-measurement state.
fn outcomes(psi: &PureState, ch: &KrausChannel) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut probs = Vec::new();
    let mut vals = Vec::new();
    for k in ch.kraus() {
        let phi = k.mat_vec(psi.amplitudes());
        let p: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
        probs.push(p);
        vals.push(if p > 1e-15 {
            pure_closed_forms(&PureState::normalized(phi)?).c_min
        } else {
            0.0
        });
    }
    Ok((probs, vals))
}

/// Diagonal pair `diag(a)`, `diag(sqrt(1 - a^2))`.
fn diagonal_pair(d: usize, rng: &mut impl Rng) -> KrausChannel {
    let a: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
    let b: Vec<f64> = a.iter().map(|x| (1.0 - x * x).sqrt()).collect();
    KrausChannel::from_kraus_unchecked(vec![ComplexMatrix::from_diagonal(&a), ComplexMatrix::from_diagonal(&b)])
}

/// Random pure qubit/qutrit states against random incoherent Kraus sets.
///
/// Trials alternate between diagonal Kraus pairs and general random IO
/// channels; trial `t` draws from `derive_seed(seed, t)`. Every returned
/// channel passes the IO and completeness checks.
pub fn cmin_io_violation_demo(seed: u64, trials: usize) -> Result<ViolationInstance> {
    for trial in 0..trials {
        let sub = derive_seed(seed, trial as u64);
        let mut rng = rng_from_seed(sub);
        let d = 2 + trial % 2;
        let psi = random_pure_state_with(d, &mut rng);
        let ch = if (trial / 2) % 2 == 0 {
            diagonal_pair(d, &mut rng)
        } else {
            random_channel(d, 2, ChannelClass::Io, rng.random())?
        };
        if !is_io(&ch, 1e-12) || ch.completeness_residual() > 1e-12 {
            continue;
        }
        let before = pure_closed_forms(&psi).c_min;
        let (probs, vals) = outcomes(&psi, &ch)?;
        let after: f64 = probs.iter().zip(&vals).map(|(p, v)| p * v).sum();
        if after > before + VIOLATION_MARGIN {
            return Ok(ViolationInstance {
                seed,
                trial,
                state: psi,
                channel: ch,
                probabilities: probs,
                c_min_outcomes: vals,
                average_c_min_after: after,
                c_min_before: before,
            });
        }
    }
    Err(Error::NotFound(format!(
        "no IO instance raising the average C_min by {VIOLATION_MARGIN} in {trials} trials (seed {seed})"
    )))
}

/// `C_max(sum_i p_i rho_i) <= max_i C_max(rho_i) + 1e-7`.
pub fn quasi_convexity_check(states: &[DensityMatrix], weights: &[f64]) -> Result<bool> {
    let mix = DensityMatrix::mixture(states, weights)?;
    let mut worst = 0.0f64;
    for s in states {
        worst = worst.max(c_max(s)?);
    }
    Ok(c_max(&mix)? <= worst + 1e-7)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dephase_state, random_density_matrix};
    use crate::measures::c_min;
    use crate::tol;

    #[test]
    fn search_finds_a_verified_instance() {
        let inst = cmin_io_violation_demo(0, 2000).unwrap();
        assert!(is_io(&inst.channel, 1e-12));
        // recompute from the returned objects with the mixed-state formula
        let rho = inst.state.to_density();
        let before = c_min(&rho, tol::RANK);
        let mut after = 0.0;
        for k in inst.channel.kraus() {
            let out = k.sandwich(rho.matrix());
            let p = out.trace().re;
            if p > 1e-15 {
                after += p * c_min(&DensityMatrix::new(out.scale(1.0 / p)).unwrap(), tol::RANK);
            }
        }
        assert!((before - inst.c_min_before).abs() < 1e-9);
        assert!((after - inst.average_c_min_after).abs() < 1e-9);
        assert!(after > before + VIOLATION_MARGIN);
    }

    #[test]
    fn trivial_channels_never_violate() {
        let psi = PureState::from_real(&[0.6, 0.8]).unwrap();
        let (p, v) = outcomes(&psi, &KrausChannel::identity(2)).unwrap();
        assert!((p[0] * v[0] - pure_closed_forms(&psi).c_min).abs() < 1e-15);
        let (p, v) = outcomes(&psi, &KrausChannel::dephasing(2)).unwrap();
        assert!(p.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().abs() < 1e-15);
        assert!(matches!(cmin_io_violation_demo(1, 0), Err(Error::NotFound(_))));
    }

    #[test]
    fn quasi_convexity_examples() {
        let a = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let b = DensityMatrix::diagonal(&[0.2, 0.8]).unwrap();
        assert!(quasi_convexity_check(&[a, b], &[0.5, 0.5]).unwrap());
        let psi = PureState::from_real(&[0.8f64.sqrt(), 0.2f64.sqrt()]).unwrap().to_density();
        let deph = dephase_state(&psi);
        assert!(quasi_convexity_check(&[psi, deph], &[0.5, 0.5]).unwrap());
        for seed in 0..5 {
            let s: Vec<_> = (0..3).map(|k| random_density_matrix(3, 2, 10 * seed + k).unwrap()).collect();
            assert!(quasi_convexity_check(&s, &[0.2, 0.3, 0.5]).unwrap());
        }
        let bad = [DensityMatrix::maximally_mixed(2), DensityMatrix::maximally_mixed(3)];
        assert!(quasi_convexity_check(&bad, &[0.5, 0.5]).is_err());
    }
}
