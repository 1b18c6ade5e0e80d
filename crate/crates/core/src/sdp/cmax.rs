//! The unit-diagonal program `max { Tr(rho tau) : tau >= 0, tau_ii = 1 }` and
//! its dual `min { sum_i s_i : diag(s) >= rho }`.
//!
//! The dual is the reduced form of `min { Tr sigma : Delta(sigma) >= rho }`:
//! only the diagonal of `sigma` enters the constraint and the trace, so the
//! minimizer may be taken diagonal.

use crate::error::{Error, Result};
use crate::linalg::eig::hermitian_eig_unchecked;
use crate::linalg::{ComplexMatrix, DensityMatrix, C64};
use crate::sdp::ipm::{self, IterRecord, SolveOptions, StartPoint, Status};
use crate::sdp::standard::{Block, Cone, StdConstraint, StdForm};

/// Optimal pair of the `C_max` program.
#[derive(Clone, Debug, PartialEq)]
pub struct CmaxCertificate {
    /// Diagonal of the optimal `sigma`; `sigma* = diag(s) / sum(s)`.
    pub s: Vec<f64>,
    /// Unit-diagonal PSD matrix attaining `Tr(rho tau)`.
    pub tau: ComplexMatrix,
    /// `sum_i s_i`, an upper bound on `2^{C_max}`.
    pub value: f64,
    /// `sum_i s_i - Tr(rho tau)`.
    pub gap: f64,
    pub iterations: usize,
    pub trace: Vec<IterRecord>,
}

impl CmaxCertificate {
    /// `Tr(rho tau)`, the lower bound.
    pub fn lower(&self) -> f64 {
        self.value - self.gap
    }

    /// Closest incoherent state `diag(s)/sum(s)`.
    pub fn sigma(&self) -> DensityMatrix {
        let total: f64 = self.s.iter().sum();
        DensityMatrix::from_matrix_unchecked(ComplexMatrix::from_diagonal(
            &self.s.iter().map(|v| v / total).collect::<Vec<_>>(),
        ))
    }

    /// Largest constraint violation of either certificate.
    pub fn residual(&self, rho: &ComplexMatrix) -> f64 {
        let slack = &ComplexMatrix::from_diagonal(&self.s) - rho;
        let dual_viol = (-hermitian_eig_unchecked(&slack).min()).max(0.0);
        let tau_viol = (-hermitian_eig_unchecked(&self.tau).min()).max(0.0);
        let diag_viol = self
            .tau
            .real_diagonal()
            .iter()
            .fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
        dual_viol.max(tau_viol).max(diag_viol)
    }
}

/// `s0_i = 2 lambda_max(rho)`, which makes `diag(s0) - rho >= lambda_max I`.
pub fn strictly_feasible_start(rho: &DensityMatrix) -> Vec<f64> {
    let lmax = hermitian_eig_unchecked(rho.matrix()).max();
    vec![2.0 * lmax; rho.dim()]
}

/// Solves the pair with tighter-than-default tolerances so that the absolute
/// gap stays below `1e-8` for every dimension up to the cap.
pub fn solve_cmax_pair(rho: &DensityMatrix) -> Result<CmaxCertificate> {
    solve_cmax_pair_with(
        rho,
        &SolveOptions {
            tol_gap: 1e-11,
            tol_feas: 1e-11,
            ..SolveOptions::default()
        },
    )
}

pub fn solve_cmax_pair_with(rho: &DensityMatrix, opts: &SolveOptions) -> Result<CmaxCertificate> {
    let d = rho.dim();
    let r = rho.matrix();
    let lmax = hermitian_eig_unchecked(r).max();
    if lmax <= f64::MIN_POSITIVE {
        return Ok(CmaxCertificate {
            s: vec![0.0; d],
            tau: ComplexMatrix::identity(d),
            value: 0.0,
            gap: 0.0,
            iterations: 0,
            trace: Vec::new(),
        });
    }

    // primal: min <-rho, tau> s.t. tau_ii = 1; dual variable y = -s
    let objective = vec![r
        .as_slice()
        .iter()
        .enumerate()
        .map(|(k, v)| (k / d, k % d, -v))
        .filter(|e| e.2.norm() > 0.0)
        .collect()];
    let constraints = (0..d)
        .map(|i| StdConstraint::new(vec![(0, vec![(i, i, C64::new(1.0, 0.0))])]))
        .collect();
    let form = StdForm::new(vec![Cone::Psd(d)], objective, constraints, vec![1.0; d]);

    let s0 = vec![2.0 * lmax; d];
    let z0 = &ComplexMatrix::from_diagonal(&s0) - r;
    let start = StartPoint {
        x: vec![Block::Psd(ComplexMatrix::identity(d))],
        y: s0.iter().map(|v| -v).collect(),
        z: vec![Block::Psd(z0.hermitize())],
    };
    let raw = ipm::solve(&form, opts, Some(start));
    if matches!(raw.status, Status::Infeasible | Status::Unbounded) {
        return Err(Error::Solver(format!(
            "C_max program ended with status {:?} after {} iterations",
            raw.status, raw.iterations
        )));
    }

    let mut s: Vec<f64> = raw.y.iter().map(|v| -v).collect();
    let slack = &ComplexMatrix::from_diagonal(&s) - r;
    let shift = (-hermitian_eig_unchecked(&slack).min()).max(0.0);
    for v in &mut s {
        *v += shift;
    }
    let tau_raw = raw.x[0].psd().hermitize();
    let scale: Vec<f64> = tau_raw
        .real_diagonal()
        .iter()
        .map(|v| 1.0 / v.max(f64::MIN_POSITIVE).sqrt())
        .collect();
    let mut tau = ComplexMatrix::from_fn(d, d, |i, j| tau_raw[(i, j)] * scale[i] * scale[j]);
    for i in 0..d {
        tau[(i, i)] = C64::new(1.0, 0.0);
    }
    let value: f64 = s.iter().sum();
    let lower = r.trace_product(&tau).re;
    // both points are exactly feasible now, so a stalled run is still
    // usable when its certified gap is small
    if raw.status != Status::Optimal && value - lower > crate::tol::GAP {
        return Err(Error::Solver(format!(
            "C_max program ended with status {:?} after {} iterations (certified gap {:.3e})",
            raw.status,
            raw.iterations,
            value - lower
        )));
    }
    Ok(CmaxCertificate {
        s,
        tau,
        value,
        gap: value - lower,
        iterations: raw.iterations,
        trace: raw.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_density_matrix, rng_from_seed};
    use crate::linalg::PureState;
    use crate::sdp::{solve_sdp, BlockKind, Coef, Objective, SdpProblem};
    use rand::Rng;

    #[test]
    fn maximally_coherent_value_is_dimension() {
        for d in 2..=8 {
            let psi = PureState::from_real(&vec![1.0; d]).unwrap().to_density();
            let c = solve_cmax_pair(&psi).unwrap();
            assert!((c.value - d as f64).abs() < 1e-8, "d={d}: {}", c.value);
            assert!(c.gap.abs() < 1e-8);
        }
    }

    #[test]
    fn incoherent_value_is_one() {
        let rho = DensityMatrix::diagonal(&[0.2, 0.5, 0.3]).unwrap();
        let c = solve_cmax_pair(&rho).unwrap();
        assert!((c.value - 1.0).abs() < 1e-9);
        let basis = DensityMatrix::basis(3, 1);
        assert!((solve_cmax_pair(&basis).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn qubit_closed_form() {
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            let a: f64 = rng.random_range(0.05..0.95);
            let bmax = (a * (1.0 - a)).sqrt();
            let b = C64::from_polar(rng.random_range(0.0..bmax), rng.random_range(0.0..std::f64::consts::TAU));
            let m = ComplexMatrix::from_vec(2, 2, vec![C64::new(a, 0.0), b, b.conj(), C64::new(1.0 - a, 0.0)])
                .unwrap();
            let rho = DensityMatrix::new(m).unwrap();
            let c = solve_cmax_pair(&rho).unwrap();
            assert!((c.value - (1.0 + 2.0 * b.norm())).abs() < 1e-8);
            assert!(c.residual(rho.matrix()) < 1e-9);
        }
    }

    #[test]
    fn start_examples() {
        assert_eq!(strictly_feasible_start(&DensityMatrix::maximally_mixed(2)), vec![1.0, 1.0]);
        let plus = PureState::from_real(&[1.0, 1.0]).unwrap().to_density();
        let s = strictly_feasible_start(&plus);
        assert!(s.iter().all(|v| (v - 2.0).abs() < 1e-12));
        let u3 = PureState::from_real(&[1.0, 1.0, 1.0]).unwrap().to_density();
        assert!(strictly_feasible_start(&u3).iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn weak_duality_along_feasible_path() {
        let rho = random_density_matrix(5, 3, 11).unwrap();
        let o = SolveOptions {
            trace: true,
            ..SolveOptions::default()
        };
        let c = solve_cmax_pair_with(&rho, &o).unwrap();
        for rec in &c.trace {
            assert!(rec.primal_obj >= rec.dual_obj - 1e-8, "{rec:?}");
        }
    }

    #[test]
    fn reduced_matches_unreduced() {
        for seed in 0..6 {
            let d = 2 + (seed as usize % 3);
            let rho = random_density_matrix(d, 1 + seed as usize % d, seed).unwrap();
            // min Tr sigma s.t. Delta(sigma) - rho = P >= 0, sigma >= 0
            let mut p = SdpProblem::new(Objective::Minimize);
            let sigma = p.add_block(d, BlockKind::Psd);
            let slack = p.add_block(d, BlockKind::Psd);
            p.add_objective(sigma, Coef::trace(d, 1.0));
            p.add_hermitian_equality(d, rho.matrix(), |i, j, part| {
                let mut t = vec![(slack, Coef::part(i, j, part).scaled(-1.0))];
                if i == j {
                    t.push((sigma, Coef::diag(i, 1.0)));
                }
                t
            });
            let full = solve_sdp(&p, &SolveOptions::default()).unwrap();
            let red = solve_cmax_pair(&rho).unwrap();
            assert!((full.primal_value - red.value).abs() < 1e-7);
        }
    }

    #[test]
    fn scaling_covariance() {
        let rho = random_density_matrix(3, 2, 4).unwrap();
        let base = solve_cmax_pair(&rho).unwrap().value;
        for c in [0.25, 0.5, 0.9] {
            let scaled = DensityMatrix::new_subnormalized(rho.matrix().scale(c)).unwrap();
            let v = solve_cmax_pair(&scaled).unwrap().value;
            assert!((v - c * base).abs() < 1e-8);
        }
    }
}
