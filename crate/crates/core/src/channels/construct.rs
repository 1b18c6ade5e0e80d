//! Maximally coherent states, diagonal unitaries and the channel attaining
//! `d F(E(rho), Psi+)^2 = Tr(rho tau)` for a unit-diagonal `tau`.

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::eig::hermitian_eig_unchecked;
use crate::linalg::{ComplexMatrix, DensityMatrix, PureState, C64};
use crate::sdp::CmaxCertificate;
use crate::tol;

/// `(1/sqrt d) sum_j e^{i theta_j} |j>`; zero phases when `phases` is `None`.
pub fn maximally_coherent(d: usize, phases: Option<&[f64]>) -> Result<PureState> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let amp = 1.0 / (d as f64).sqrt();
    let amps = match phases {
        None => vec![C64::new(amp, 0.0); d],
        Some(p) if p.len() == d => p.iter().map(|&t| C64::from_polar(amp, t)).collect(),
        Some(p) => {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            })
        }
    };
    Ok(PureState::from_amplitudes_unchecked(amps))
}

/// `sum_j e^{i theta_j} |j><j|`.
pub fn diagonal_unitary(phases: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_complex_diagonal(&phases.iter().map(|&t| C64::from_polar(1.0, t)).collect::<Vec<_>>())
}

/// Eigen-pairs `(lambda_i, psi_i)` of `tau / d` with negative rounding clipped.
fn tau_spectrum(tau: &ComplexMatrix) -> Result<Vec<(f64, Vec<C64>)>> {
    let d = tau.ensure_square()?;
    let diag_err = tau
        .real_diagonal()
        .iter()
        .fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    let e = hermitian_eig_unchecked(tau);
    let floor = -1e-7 * (d as f64);
    if diag_err > 1e-7 || e.min() < floor {
        return Err(Error::Certification(format!(
            "tau is not a unit-diagonal PSD matrix (diagonal error {diag_err:.3e}, min eigenvalue {:.3e})",
            e.min()
        )));
    }
    Ok((0..d)
        .filter(|&k| e.values[k] > 0.0)
        .map(|k| (e.values[k] / d as f64, e.vector(k)))
        .collect())
}

/// Diagonal Kraus operators `M_i = sqrt(d lambda_i) diag(conj c^(i))` where
/// `tau/d = sum_i lambda_i |psi_i><psi_i|` and `psi_i = sum_j c^(i)_j |j>`.
///
/// The result is strictly incoherent and satisfies
/// `d E^dagger(|Psi+><Psi+|) = tau`. A final diagonal rescaling removes the
/// completeness error left by clipping rounding-level eigenvalues.
pub fn optimal_overlap_channel(rho: &DensityMatrix, cert: &CmaxCertificate) -> Result<KrausChannel> {
    let tau = &cert.tau;
    let d = tau.rows();
    if rho.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: d,
        });
    }
    let spec = tau_spectrum(tau)?;
    let mut kraus: Vec<ComplexMatrix> = spec
        .iter()
        .map(|(lam, c)| {
            let s = (d as f64 * lam).sqrt();
            ComplexMatrix::from_complex_diagonal(&c.iter().map(|z| z.conj() * s).collect::<Vec<_>>())
        })
        .collect();
    let mut norms = vec![0.0; d];
    for k in &kraus {
        for (j, n) in norms.iter_mut().enumerate() {
            *n += k[(j, j)].norm_sqr();
        }
    }
    for k in &mut kraus {
        for (j, n) in norms.iter().enumerate() {
            k[(j, j)] /= n.sqrt();
        }
    }
    let ch = KrausChannel::from_kraus_unchecked(kraus);
    debug_assert!(ch.completeness_residual() < tol::TRACE * d as f64);
    Ok(ch)
}

/// The `d^2`-operator family `M_{i,n} = sqrt(lambda_i) diag(conj c^(i))`,
/// `n = 1..d`, before collapsing the repeated index.
pub fn literal_overlap_kraus(tau: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
    let d = tau.ensure_square()?;
    let spec = tau_spectrum(tau)?;
    let mut out = Vec::with_capacity(d * spec.len());
    for (lam, c) in &spec {
        let m = ComplexMatrix::from_complex_diagonal(
            &c.iter().map(|z| z.conj() * lam.sqrt()).collect::<Vec<_>>(),
        );
        for _ in 0..d {
            out.push(m.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{classify, KrausChannel};
    use crate::linalg::{fidelity, random_density_matrix};
    use crate::sdp::solve_cmax_pair;

    #[test]
    fn maximally_coherent_examples() {
        let p = maximally_coherent(2, None).unwrap();
        for a in p.amplitudes() {
            assert!((a.re - 0.5f64.sqrt()).abs() < 1e-15);
        }
        let phases = [0.2, 1.0, -2.0];
        let q = maximally_coherent(3, Some(&phases)).unwrap();
        assert!(q.amplitudes().iter().all(|a| (a.norm() - 1.0 / 3f64.sqrt()).abs() < 1e-15));
        let u = diagonal_unitary(&phases);
        let rotated = u.mat_vec(maximally_coherent(3, None).unwrap().amplitudes());
        for (x, y) in rotated.iter().zip(q.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
        assert!(maximally_coherent(3, Some(&[0.0])).is_err());
    }

    #[test]
    fn overlap_channel_attains_the_program_value() {
        for (d, seed) in [(2usize, 1u64), (3, 2), (4, 3)] {
            let rho = random_density_matrix(d, d, seed).unwrap();
            let cert = solve_cmax_pair(&rho).unwrap();
            let ch = optimal_overlap_channel(&rho, &cert).unwrap();
            assert!(ch.completeness_residual() < 1e-12);
            let r = classify(&ch, 1e-9);
            assert!(r.is_sio && r.is_io && r.is_dio && r.is_mio);
            let psi = maximally_coherent(d, None).unwrap();
            let adj = ch.adjoint_apply(&psi.projector()).unwrap().scale(d as f64);
            assert!((&adj - &cert.tau).max_abs() < 1e-9);
            let out = ch.apply(&rho).unwrap();
            let f = fidelity(&out, &psi.to_density()).unwrap();
            assert!((d as f64 * f * f - cert.value).abs() < 1e-7);
        }
    }

    #[test]
    fn literal_form_defines_the_same_channel() {
        let rho = random_density_matrix(3, 2, 8).unwrap();
        let cert = solve_cmax_pair(&rho).unwrap();
        let collapsed = optimal_overlap_channel(&rho, &cert).unwrap();
        let literal = KrausChannel::from_kraus_unchecked(literal_overlap_kraus(&cert.tau).unwrap());
        assert_eq!(literal.kraus().len(), 3 * collapsed.kraus().len());
        assert!((literal.to_choi().matrix() - collapsed.to_choi().matrix()).max_abs() < 1e-9);
    }

    #[test]
    fn incoherent_input_has_unit_overlap() {
        let rho = DensityMatrix::diagonal(&[0.6, 0.4]).unwrap();
        let cert = solve_cmax_pair(&rho).unwrap();
        let ch = optimal_overlap_channel(&rho, &cert).unwrap();
        let psi = maximally_coherent(2, None).unwrap();
        let f = fidelity(&ch.apply(&rho).unwrap(), &psi.to_density()).unwrap();
        assert!((2.0 * f * f - 1.0).abs() < 1e-7);
    }
}
