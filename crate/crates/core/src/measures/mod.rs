//! Coherence quantifiers with their optimizer witnesses.
//!
//! All values are in bits except `c_l1` and `roc`.

mod roof;
mod smooth;
mod violation;

pub use roof::{convex_roof_cmax_upper, RoofEstimate};
pub use smooth::{smooth_c_max, smooth_c_max_with, smooth_c_min, smooth_c_min_with, SmoothResult};
pub use violation::{cmin_io_violation_demo, quasi_convexity_check, ViolationInstance, VIOLATION_MARGIN};

use serde::Serialize;

use crate::error::Result;
use crate::linalg::json::MatrixJson;
use crate::linalg::{
    dephase_state, shannon_entropy, support_projector, von_neumann_entropy, ComplexMatrix, DensityMatrix,
    PureState,
};
use crate::sdp::{solve_cmax_pair, CmaxCertificate};
use crate::tol;

/// Off-diagonal l1 mass below `tol::INCOHERENT`.
pub fn is_incoherent(rho: &DensityMatrix) -> bool {
    c_l1(rho) < tol::INCOHERENT
}

/// `C_max` and the certificate it was read from.
///
/// Incoherent inputs short-circuit to `0` with `sigma = rho`, `tau = I`.
pub fn c_max_with_certificate(rho: &DensityMatrix) -> Result<(f64, CmaxCertificate)> {
    if is_incoherent(rho) {
        let d = rho.dim();
        let s = rho.matrix().real_diagonal();
        let value: f64 = s.iter().sum();
        return Ok((
            0.0,
            CmaxCertificate {
                s,
                tau: ComplexMatrix::identity(d),
                value,
                gap: 0.0,
                iterations: 0,
                trace: Vec::new(),
            },
        ));
    }
    let cert = solve_cmax_pair(rho)?;
    Ok((cert.value.log2().max(0.0), cert))
}

pub fn c_max(rho: &DensityMatrix) -> Result<f64> {
    Ok(c_max_with_certificate(rho)?.0)
}

/// Robustness of coherence `2^{C_max} - 1`.
pub fn roc(rho: &DensityMatrix) -> Result<f64> {
    Ok(c_max(rho)?.exp2() - 1.0)
}

/// `-log2 max_i <i|Pi_rho|i>`.
///
/// `min_sigma -log Tr(Pi sigma)` over diagonal states is linear in the
/// populations inside the logarithm, so it is attained at a basis state.
pub fn c_min(rho: &DensityMatrix, rank_tol: f64) -> f64 {
    let pi = support_projector(rho, rank_tol);
    let m = pi.real_diagonal().into_iter().fold(0.0, f64::max).min(1.0);
    let v = -m.log2();
    // `-log2 1` is `-0.0`; report a plain zero
    if v > 0.0 {
        v.min((rho.dim() as f64).log2())
    } else {
        0.0
    }
}

/// `S(Delta(rho)) - S(rho)`.
pub fn c_r(rho: &DensityMatrix) -> f64 {
    let diag = rho.matrix().real_diagonal();
    (shannon_entropy(&diag) - von_neumann_entropy(rho)).max(0.0)
}

/// `sum_{i != j} |rho_ij|`.
pub fn c_l1(rho: &DensityMatrix) -> f64 {
    rho.matrix().off_diagonal_l1()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PureClosedForms {
    pub c_max: f64,
    pub c_min: f64,
    /// `max_i |psi_i|^2 = max_{sigma incoherent} F(psi, sigma)^2`.
    pub geometric_overlap: f64,
}

pub fn pure_closed_forms(psi: &PureState) -> PureClosedForms {
    let l1: f64 = psi.amplitudes().iter().map(|a| a.norm()).sum();
    let pmax = psi.amplitudes().iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
    PureClosedForms {
        c_max: (2.0 * l1.log2()).max(0.0),
        c_min: (-pmax.log2()).max(0.0),
        geometric_overlap: pmax,
    }
}

/// `(2^{-C_min}, 1 - 2^{-C_min})`: an upper bound on the largest squared
/// fidelity with an incoherent state and the implied lower bound on the
/// geometric coherence.
pub fn c_min_overlap_bound(rho: &DensityMatrix, rank_tol: f64) -> (f64, f64) {
    let b = (-c_min(rho, rank_tol)).exp2();
    (b, 1.0 - b)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportTolerances {
    pub rank_tol: f64,
    pub incoherent_tol: f64,
    pub sdp_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoherenceReport {
    pub dim: usize,
    pub c_max: f64,
    pub c_min: f64,
    pub c_r: f64,
    pub c_l1: f64,
    pub roc: f64,
    /// `sum s - Tr(rho tau)` of the `C_max` certificate.
    pub cmax_gap: f64,
    pub incoherent: bool,
    pub pure_state_closed_form_used: bool,
    pub tolerances: ReportTolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_witness: Option<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_witness: Option<MatrixJson>,
}

/// Every measure of one state. For rank-one inputs `closed_form_for_pure`
/// replaces the SDP value of `C_max` by `2 log2 sum |psi_i|`.
pub fn coherence_report(
    rho: &DensityMatrix,
    rank_tol: f64,
    closed_form_for_pure: bool,
    witness: bool,
) -> Result<CoherenceReport> {
    let (mut cmax, cert) = c_max_with_certificate(rho)?;
    let mut closed = false;
    if closed_form_for_pure && (rho.purity() - 1.0).abs() < 1e-10 {
        let e = crate::linalg::hermitian_eig(rho.matrix())?;
        let psi = PureState::normalized(e.vector(rho.dim() - 1))?;
        cmax = pure_closed_forms(&psi).c_max;
        closed = true;
    }
    Ok(CoherenceReport {
        dim: rho.dim(),
        c_max: cmax,
        c_min: c_min(rho, rank_tol),
        c_r: c_r(rho),
        c_l1: c_l1(rho),
        roc: cmax.exp2() - 1.0,
        cmax_gap: cert.gap,
        incoherent: is_incoherent(rho),
        pure_state_closed_form_used: closed,
        tolerances: ReportTolerances {
            rank_tol,
            incoherent_tol: tol::INCOHERENT,
            sdp_gap: tol::GAP,
        },
        tau_witness: witness.then(|| MatrixJson::from(&cert.tau)),
        sigma_witness: witness.then(|| MatrixJson::from(cert.sigma().matrix())),
    })
}

/// `Delta(rho)` mixed back in: `lambda rho + (1 - lambda) Delta(rho)`.
pub fn dephasing_mixture(rho: &DensityMatrix, lambda: f64) -> DensityMatrix {
    DensityMatrix::mixture(&[rho.clone(), dephase_state(rho)], &[lambda, 1.0 - lambda])
        .expect("valid mixture weights")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{maximally_coherent, random_channel, ChannelClass};
    use crate::linalg::random::{random_density_matrix, random_pure_state, rng_from_seed};
    use crate::linalg::{binary_entropy, C64};
    use rand::Rng;

    fn psi82() -> PureState {
        PureState::from_real(&[0.8f64.sqrt(), 0.2f64.sqrt()]).unwrap()
    }

    #[test]
    fn maximally_coherent_values() {
        for d in 2..=8 {
            let rho = maximally_coherent(d, None).unwrap().to_density();
            let l = (d as f64).log2();
            assert!((c_max(&rho).unwrap() - l).abs() < 1e-7);
            assert!((c_min(&rho, tol::RANK) - l).abs() < 1e-9);
            assert!((c_r(&rho) - l).abs() < 1e-7);
            assert!((c_l1(&rho) - (d as f64 - 1.0)).abs() < 1e-12);
            assert!((roc(&rho).unwrap() - (d as f64 - 1.0)).abs() < 1e-6);
        }
    }

    #[test]
    fn pure_state_examples() {
        let p = psi82();
        let rho = p.to_density();
        let expect = 2.0 * (0.8f64.sqrt() + 0.2f64.sqrt()).log2();
        assert!((c_max(&rho).unwrap() - expect).abs() < 1e-8);
        assert!((c_min(&rho, tol::RANK) + 0.8f64.log2()).abs() < 1e-12);
        assert!((c_r(&rho) - binary_entropy(0.2)).abs() < 1e-9);
        let cf = pure_closed_forms(&p);
        assert!((cf.c_min - 0.321_928_094_887_362_3).abs() < 1e-12);
        let b = pure_closed_forms(&PureState::from_real(&[0.0, 1.0, 0.0]).unwrap());
        assert_eq!((b.c_max, b.c_min, b.geometric_overlap), (0.0, 0.0, 1.0));
    }

    #[test]
    fn incoherent_values() {
        let rho = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        assert_eq!(c_max(&rho).unwrap(), 0.0);
        assert_eq!(c_min(&rho, tol::RANK), 0.0);
        assert!(c_r(&rho).abs() < 1e-12);
        assert_eq!(roc(&rho).unwrap(), 0.0);
        assert_eq!(c_min_overlap_bound(&rho, tol::RANK), (1.0, 0.0));
        let r = ComplexMatrix::from_real_rows(&[vec![0.5, 0.3], vec![0.3, 0.5]]).unwrap();
        assert!((c_l1(&DensityMatrix::new(r).unwrap()) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn coherent_state_with_zero_c_min() {
        let plus = PureState::from_real(&[0.0, 1.0, 1.0]).unwrap();
        let rho =
            DensityMatrix::mixture(&[DensityMatrix::basis(3, 0), plus.to_density()], &[0.5, 0.5]).unwrap();
        assert_eq!(c_min(&rho, tol::RANK), 0.0);
        assert!(c_l1(&rho) > 0.0);
    }

    #[test]
    fn c_min_matches_basis_enumeration() {
        for seed in 0..20 {
            let rho = random_density_matrix(4, 1 + seed as usize % 4, seed).unwrap();
            let pi = support_projector(&rho, tol::RANK);
            let brute = (0..4)
                .map(|i| -(DensityMatrix::basis(4, i).matrix().trace_product(&pi).re).log2())
                .fold(f64::INFINITY, f64::min)
                .max(0.0);
            assert!((c_min(&rho, tol::RANK) - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn overlap_bound_dominates_dephased_fidelity() {
        for seed in 0..10 {
            let rho = random_density_matrix(3, 2, seed).unwrap();
            let (b, g) = c_min_overlap_bound(&rho, tol::RANK);
            let f = crate::linalg::fidelity(&rho, &dephase_state(&rho)).unwrap();
            assert!(b >= f * f - 1e-9);
            assert!((b + g - 1.0).abs() < 1e-15);
        }
        let p = psi82();
        let (b, _) = c_min_overlap_bound(&p.to_density(), tol::RANK);
        assert!((b - 0.8).abs() < 1e-10);
    }

    #[test]
    fn qubit_closed_form_for_roc() {
        let mut rng = rng_from_seed(21);
        for _ in 0..20 {
            let a: f64 = rng.random_range(0.1..0.9);
            let b = C64::from_polar(rng.random_range(0.0..(a * (1.0 - a)).sqrt()), rng.random_range(0.0..6.0));
            let m = ComplexMatrix::from_vec(2, 2, vec![C64::new(a, 0.0), b, b.conj(), C64::new(1.0 - a, 0.0)])
                .unwrap();
            let rho = DensityMatrix::new(m).unwrap();
            assert!((roc(&rho).unwrap() - 2.0 * b.norm()).abs() < 1e-8);
        }
    }

    #[test]
    fn inequality_chain_on_random_states() {
        for d in [2usize, 3, 4] {
            for seed in 0..25 {
                let rho = random_density_matrix(d, 1 + seed as usize % d, seed).unwrap();
                let r = coherence_report(&rho, tol::RANK, false, false).unwrap();
                assert!(r.c_min <= r.c_r + 1e-7, "{r:?}");
                assert!(r.c_r <= r.c_max + 1e-7, "{r:?}");
                assert!(r.c_max <= (1.0 + r.c_l1).log2() + 1e-7, "{r:?}");
            }
        }
    }

    #[test]
    fn monotone_under_mio_and_dephasing_mixing() {
        for seed in 0..8 {
            let rho = random_density_matrix(3, 3, 100 + seed).unwrap();
            let cm = c_max(&rho).unwrap();
            let cr = c_r(&rho);
            for class in [ChannelClass::Mio, ChannelClass::Dio, ChannelClass::Io] {
                let ch = random_channel(3, 2, class, seed).unwrap();
                let out = ch.apply(&rho).unwrap();
                assert!(c_max(&out).unwrap() <= cm + 1e-7);
                assert!(c_r(&out) <= cr + 1e-7);
            }
            for lambda in [0.0, 0.3, 0.7, 1.0] {
                let mixed = dephasing_mixture(&rho, lambda);
                let v = solve_cmax_pair(&mixed).unwrap().value;
                assert!(v <= solve_cmax_pair(&rho).unwrap().value + 1e-8);
            }
        }
    }

    #[test]
    fn strong_monotonicity_under_io() {
        for seed in 0..10 {
            let rho = random_density_matrix(3, 2, 200 + seed).unwrap();
            let before = c_max(&rho).unwrap();
            let ch = random_channel(3, 2, ChannelClass::Io, seed).unwrap();
            let mut avg = 0.0;
            for k in ch.kraus() {
                let out = k.sandwich(rho.matrix());
                let p = out.trace().re;
                if p > 1e-12 {
                    let s = DensityMatrix::new(out.scale(1.0 / p)).unwrap();
                    avg += p * c_max(&s).unwrap();
                }
            }
            assert!(avg <= before + 1e-7, "{avg} > {before}");
        }
    }

    #[test]
    fn sdp_agrees_with_pure_closed_form() {
        for d in 2..=5 {
            for seed in 0..10 {
                let psi = random_pure_state(d, seed).unwrap();
                let v = c_max(&psi.to_density()).unwrap();
                assert!((v - pure_closed_forms(&psi).c_max).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn report_witnesses_and_flags() {
        let rho = psi82().to_density();
        let r = coherence_report(&rho, tol::RANK, true, true).unwrap();
        assert!(r.pure_state_closed_form_used);
        assert!(r.tau_witness.is_some() && r.sigma_witness.is_some());
        assert!((r.roc - (r.c_max.exp2() - 1.0)).abs() < 1e-12);
        let plain = coherence_report(&rho, tol::RANK, false, false).unwrap();
        assert!(!plain.pure_state_closed_form_used && plain.tau_witness.is_none());
        assert!((plain.c_max - r.c_max).abs() < 1e-7);
    }
}
