//! Monte Carlo play of a discrimination game.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::games::{p_succ_fixed, Instrument, Povm};
use crate::linalg::random::{derive_seed, rng_from_seed};
use crate::linalg::DensityMatrix;
use crate::par::{map_indexed, Execution};

/// Trials per independently seeded chunk. Fixed so that results do not
/// depend on the thread count.
const CHUNK: usize = 8192;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationResult {
    pub trials: usize,
    pub successes: usize,
    pub frequency: f64,
    /// Exact success probability of the same instrument and POVM.
    pub exact: f64,
    /// Binomial standard deviation `sqrt(p (1 - p) / trials)` at `exact`.
    pub std_dev: f64,
    /// `exact -/+ 5 std_dev`, clipped to `[0, 1]`.
    pub interval: (f64, f64),
    pub within_five_sigma: bool,
}

/// Inverse-CDF draw from unnormalized weights.
fn sample(cdf: &[f64], u: f64) -> usize {
    let total = *cdf.last().expect("nonempty");
    let x = u * total;
    cdf.iter().position(|&c| x < c).unwrap_or(cdf.len() - 1)
}

fn cumulative(w: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    w.map(|v| {
        acc += v.max(0.0);
        acc
    })
    .collect()
}

/// Draws the branch `a` with probability `Tr E_a(rho)`, then the outcome `b`
/// with probability `Tr(M_b E_a(rho)) / Tr E_a(rho)`; success when `a = b`.
pub fn simulate_game(
    inst: &Instrument,
    povm: &Povm,
    rho: &DensityMatrix,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<SimulationResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let exact = p_succ_fixed(inst, povm, rho)?;
    let outs = inst.outputs(rho.matrix())?;
    let branch_cdf = cumulative(outs.iter().map(|o| o.trace().re));
    let outcome_cdfs: Vec<Vec<f64>> = outs
        .iter()
        .map(|o| cumulative(povm.effects().iter().map(|m| o.trace_product(m).re)))
        .collect();

    let chunks = trials.div_ceil(CHUNK);
    let counts = map_indexed(exec, chunks, |c| {
        let n = CHUNK.min(trials - c * CHUNK);
        let mut rng = rng_from_seed(derive_seed(seed, c as u64));
        let mut hits = 0usize;
        for _ in 0..n {
            let a = sample(&branch_cdf, rng.random::<f64>());
            let cdf = &outcome_cdfs[a];
            let b = if *cdf.last().unwrap_or(&0.0) > 0.0 {
                sample(cdf, rng.random::<f64>())
            } else {
                usize::MAX
            };
            hits += usize::from(a == b);
        }
        hits
    });
    let successes: usize = counts.into_iter().sum();
    let frequency = successes as f64 / trials as f64;
    let std_dev = (exact * (1.0 - exact) / trials as f64).max(0.0).sqrt();
    let interval = ((exact - 5.0 * std_dev).max(0.0), (exact + 5.0 * std_dev).min(1.0));
    Ok(SimulationResult {
        trials,
        successes,
        frequency,
        exact,
        std_dev,
        interval,
        within_five_sigma: (frequency - exact).abs() <= 5.0 * std_dev + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{build_phase_instrument, canonical_povm};
    use crate::linalg::{ComplexMatrix, PureState};

    #[test]
    fn perfect_game_always_wins() {
        let plus = PureState::from_real(&[1.0, 1.0]).unwrap().to_density();
        let inst = build_phase_instrument(2, &[0.0, std::f64::consts::PI], &[0.5, 0.5]).unwrap();
        let r = simulate_game(&inst, &canonical_povm(2).unwrap(), &plus, 1000, 1, Execution::Parallel).unwrap();
        assert_eq!(r.successes, 1000);
        assert!(r.within_five_sigma);
    }

    #[test]
    fn fair_coin_game_and_determinism() {
        let zero = DensityMatrix::basis(2, 0);
        let inst = build_phase_instrument(2, &[0.0, std::f64::consts::PI], &[0.5, 0.5]).unwrap();
        let povm = canonical_povm(2).unwrap();
        let a = simulate_game(&inst, &povm, &zero, 100_000, 9, Execution::Parallel).unwrap();
        assert!((a.exact - 0.5).abs() < 1e-12);
        assert!((a.frequency - 0.5).abs() <= 5.0 * (0.25f64 / 1e5).sqrt());
        let b = simulate_game(&inst, &povm, &zero, 100_000, 9, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        let guess = Povm::new(vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2)]).unwrap();
        let c = simulate_game(&inst, &guess, &zero, 10, 0, Execution::Sequential).unwrap();
        assert!(c.successes <= 10);
        assert!(simulate_game(&inst, &povm, &zero, 0, 0, Execution::Sequential).is_err());
    }
}
