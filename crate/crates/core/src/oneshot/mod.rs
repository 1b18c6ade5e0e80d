//! One-shot coherence distillation and cost under MIO.
//!
//! For every target size `M` the optimal figure of merit over MIO channels is
//! computed as an SDP over Choi matrices, and `M` counts as feasible when the
//! optimum clears the fidelity threshold. Every `M` in range is scanned since
//! feasibility need not be monotone in `M`.

mod sweep;

pub use sweep::{regularized_sweep, SweepRecord};

use serde::Serialize;

use crate::channels::{is_mio, ChoiMatrix};
use crate::error::{Error, Result};
use crate::linalg::eig::hermitian_eig_unchecked;
use crate::linalg::json::MatrixJson;
use crate::linalg::{check_dim, fidelity_psd, ComplexMatrix, DensityMatrix, C64};
use crate::measures::{smooth_c_max, smooth_c_min};
use crate::par::{try_map_indexed, Execution};
use crate::sdp::{solve_sdp_precise, BlockId, BlockKind, Coef, Objective, Part, SdpProblem, SolveOptions};
use crate::tol;

/// Slack granted to the fidelity threshold when deciding feasibility.
pub const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct ScanEntry {
    pub m: usize,
    /// Optimal squared fidelity over MIO channels.
    pub best_fidelity_sq: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OneShotResult {
    pub epsilon: f64,
    pub m_star: usize,
    pub log_m: f64,
    /// Squared fidelity reached by the certificate at `m_star`, recomputed
    /// from the Choi matrix.
    pub achieved_fidelity_sq: f64,
    pub mio_residual: f64,
    pub tp_residual: f64,
    pub scan: Vec<ScanEntry>,
    #[serde(skip)]
    pub certificate: Option<ChoiMatrix>,
}

impl OneShotResult {
    pub fn certificate_json(&self) -> Option<MatrixJson> {
        self.certificate.as_ref().map(|c| MatrixJson::from(c.matrix()))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Row/column index of `|i><j| (x) |k><l|` entries in a Choi matrix.
#[inline]
fn idx(i: usize, k: usize, dout: usize) -> usize {
    i * dout + k
}

/// Adds a PSD Choi block with trace preservation and the MIO zero pattern.
fn add_mio_choi(p: &mut SdpProblem, din: usize, dout: usize) -> BlockId {
    let j = p.add_block(din * dout, BlockKind::Psd);
    p.add_hermitian_equality(din, &ComplexMatrix::identity(din), |a, b, part| {
        let mut c = Coef::new();
        for k in 0..dout {
            c.add_part(idx(a, k, dout), idx(b, k, dout), part, 1.0);
        }
        vec![(j, c)]
    });
    for i in 0..din {
        for k in 0..dout {
            for l in (k + 1)..dout {
                for part in [Part::Re, Part::Im] {
                    p.add_constraint(
                        vec![(j, Coef::part(idx(i, k, dout), idx(i, l, dout), part))],
                        crate::sdp::Sense::Eq,
                        0.0,
                    );
                }
            }
        }
    }
    j
}

fn uniform_target(m: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, m, |_, _| C64::new(1.0 / m as f64, 0.0))
}

struct Solved {
    value: f64,
    choi: ChoiMatrix,
}

/// `max Tr(Psi_M E(rho))` over MIO channels `d -> M`; the objective is
/// `Tr((rho^T (x) Psi_M) J)`.
fn distill_at(rho: &DensityMatrix, m: usize, opts: &SolveOptions) -> Result<Solved> {
    let d = rho.dim();
    let mut p = SdpProblem::new(Objective::Maximize);
    let j = add_mio_choi(&mut p, d, m);
    p.add_objective(j, Coef::dense(&rho.matrix().transpose().kron(&uniform_target(m))));
    let sol = solve_sdp_precise(&p, opts, &format!("one-shot distillation at M = {m}"))?;
    Ok(Solved {
        value: sol.primal_value,
        choi: ChoiMatrix::from_parts_unchecked(d, m, sol.block(j).hermitize()),
    })
}

/// `max F(rho, E(Psi_M))` over MIO channels `M -> d` via
/// `F(D, W) = max { Re Tr Y : [[D, Y], [Y^dagger, W]] >= 0 }`, restricted to
/// the support of `rho = V D V^dagger` (so `W = V^dagger E(Psi_M) V`).
fn cost_at(rho: &DensityMatrix, m: usize, opts: &SolveOptions) -> Result<Solved> {
    let d = rho.dim();
    let e = hermitian_eig_unchecked(rho.matrix());
    let cut = tol::RANK * e.max();
    let keep: Vec<usize> = (0..d).filter(|&k| e.values[k] > cut).collect();
    let r = keep.len();
    let v = ComplexMatrix::from_fn(d, r, |i, a| e.vectors[(i, keep[a])]);
    let dmat = ComplexMatrix::from_diagonal(&keep.iter().map(|&k| e.values[k]).collect::<Vec<_>>());

    let mut p = SdpProblem::new(Objective::Maximize);
    let j = add_mio_choi(&mut p, m, d);
    let z = p.add_block(2 * r, BlockKind::Psd);
    let mut obj = Coef::new();
    for a in 0..r {
        obj.add_part(a, r + a, Part::Re, 1.0);
    }
    p.add_objective(z, obj);
    p.add_hermitian_equality(r, &dmat, |a, b, part| vec![(z, Coef::part(a, b, part))]);
    // W_ab = sum_{kl} conj(V_ka) X_kl V_lb with X_kl = (1/M) sum_{ij} J[(i,k),(j,l)]
    let w = 1.0 / m as f64;
    p.add_hermitian_equality(r, &ComplexMatrix::zeros(r, r), |a, b, part| {
        let mut c = Coef::new();
        for k in 0..d {
            for l in 0..d {
                let coef = v[(k, a)].conj() * v[(l, b)] * w;
                // the functional reads Re or Im of coef * X_kl
                let (re, im) = match part {
                    Part::Re => (coef.re, -coef.im),
                    Part::Im => (coef.im, coef.re),
                };
                for i in 0..m {
                    for jj in 0..m {
                        let (row, col) = (idx(i, k, d), idx(jj, l, d));
                        if re != 0.0 {
                            c.add_part(row, col, Part::Re, re);
                        }
                        if im != 0.0 {
                            c.add_part(row, col, Part::Im, im);
                        }
                    }
                }
            }
        }
        vec![(z, Coef::part(r + a, r + b, part)), (j, c.scaled(-1.0))]
    });
    let sol = solve_sdp_precise(&p, opts, &format!("one-shot cost at M = {m}"))?;
    Ok(Solved {
        value: sol.primal_value,
        choi: ChoiMatrix::from_parts_unchecked(m, d, sol.block(j).hermitize()),
    })
}

fn finish(eps: f64, m_star: usize, scan: Vec<ScanEntry>, cert: Option<ChoiMatrix>, achieved: f64) -> OneShotResult {
    let (mio_residual, tp_residual) = cert
        .as_ref()
        .map(|c| (is_mio(c, 0.0).1, c.tp_residual()))
        .unwrap_or((0.0, 0.0));
    OneShotResult {
        epsilon: eps,
        m_star,
        log_m: (m_star as f64).log2(),
        achieved_fidelity_sq: achieved,
        mio_residual,
        tp_residual,
        scan,
        certificate: cert,
    }
}

/// Largest `M <= m_max` with `max_E Tr(Psi_M E(rho)) >= 1 - eps` over MIO;
/// `m_star = 1` when no `M >= 2` qualifies.
pub fn one_shot_distill_mio(rho: &DensityMatrix, eps: f64, m_max: usize, exec: Execution) -> Result<OneShotResult> {
    check_eps(eps)?;
    check_dim(rho.dim() * m_max.max(2))?;
    let opts = SolveOptions::default();
    let ms: Vec<usize> = (2..=m_max).collect();
    let solved = try_map_indexed(exec, ms.len(), |k| distill_at(rho, ms[k], &opts))?;
    let mut scan = Vec::with_capacity(ms.len());
    let mut best: Option<(usize, ChoiMatrix)> = None;
    for (&m, s) in ms.iter().zip(solved) {
        let feasible = s.value >= 1.0 - eps - FEASIBILITY_TOL;
        scan.push(ScanEntry { m, best_fidelity_sq: s.value, feasible });
        if feasible {
            best = Some((m, s.choi));
        }
    }
    Ok(match best {
        Some((m, choi)) => {
            let out = choi.apply_matrix(rho.matrix())?;
            let achieved = out.trace_product(&uniform_target(m)).re;
            finish(eps, m, scan, Some(choi), achieved)
        }
        None => finish(eps, 1, scan, None, 1.0),
    })
}

/// Smallest `M <= m_max` with `max_E F(rho, E(Psi_M))^2 >= 1 - eps` over MIO.
/// `M = 1` is the trivial one-dimensional resource.
pub fn one_shot_cost_mio(rho: &DensityMatrix, eps: f64, m_max: usize, exec: Execution) -> Result<OneShotResult> {
    check_eps(eps)?;
    if m_max == 0 {
        return Err(Error::InvalidArgument("m_max must be positive".into()));
    }
    check_dim(rho.dim() * m_max)?;
    let opts = SolveOptions::default();
    let ms: Vec<usize> = (1..=m_max).collect();
    let solved = try_map_indexed(exec, ms.len(), |k| cost_at(rho, ms[k], &opts))?;
    let mut scan = Vec::with_capacity(ms.len());
    let mut best: Option<(usize, ChoiMatrix)> = None;
    for (&m, s) in ms.iter().zip(solved) {
        let fsq = s.value.max(0.0).powi(2);
        let feasible = fsq >= 1.0 - eps - FEASIBILITY_TOL;
        scan.push(ScanEntry { m, best_fidelity_sq: fsq, feasible });
        if feasible && best.is_none() {
            best = Some((m, s.choi));
        }
    }
    let (m, choi) = best.ok_or_else(|| {
        Error::NotFound(format!("no M <= {m_max} reaches fidelity^2 {} under MIO", 1.0 - eps))
    })?;
    let x = choi.apply_matrix(&uniform_target(m))?;
    let f = fidelity_psd(rho.matrix(), &x.hermitize());
    Ok(finish(eps, m, scan, Some(choi), f * f))
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub epsilon: f64,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub lhs: f64,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub rhs: f64,
    pub holds: bool,
}

/// `C_max^{2 sqrt(eps)}(rho) <= log2 M*` for the one-shot cost.
pub fn check_cost_bound(rho: &DensityMatrix, eps: f64, m_max: usize, exec: Execution) -> Result<BoundReport> {
    let cost = one_shot_cost_mio(rho, eps, m_max, exec)?;
    let lhs = smooth_c_max(rho, 2.0 * eps.sqrt())?.value;
    Ok(BoundReport {
        epsilon: eps,
        lhs,
        rhs: cost.log_m,
        holds: lhs <= cost.log_m + 1e-6,
    })
}

/// `log2 M* <= C_min^eps(rho)` for one-shot distillation.
pub fn check_distill_bound(rho: &DensityMatrix, eps: f64, m_max: usize, exec: Execution) -> Result<BoundReport> {
    let dist = one_shot_distill_mio(rho, eps, m_max, exec)?;
    let rhs = smooth_c_min(rho, eps)?.value;
    Ok(BoundReport {
        epsilon: eps,
        lhs: dist.log_m,
        rhs,
        holds: dist.log_m <= rhs + 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::maximally_coherent;
    use crate::linalg::random_density_matrix;

    const EX: Execution = Execution::Sequential;

    fn check_cert(r: &OneShotResult) {
        assert!(r.mio_residual <= 1e-8, "{}", r.mio_residual);
        assert!(r.tp_residual <= 1e-8, "{}", r.tp_residual);
        if let Some(c) = &r.certificate {
            assert!(c.psd_residual() <= 1e-8);
        }
        assert!(r.achieved_fidelity_sq >= 1.0 - r.epsilon - 1e-7);
    }

    #[test]
    fn maximally_coherent_qubit() {
        let psi = maximally_coherent(2, None).unwrap().to_density();
        let d = one_shot_distill_mio(&psi, 0.01, 4, EX).unwrap();
        assert!(d.m_star >= 2);
        check_cert(&d);
        let c = one_shot_cost_mio(&psi, 0.01, 4, EX).unwrap();
        assert_eq!(c.m_star, 2);
        check_cert(&c);
        assert!(!c.scan[0].feasible);
    }

    #[test]
    fn incoherent_state() {
        let rho = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap();
        let d = one_shot_distill_mio(&rho, 0.01, 4, EX).unwrap();
        assert_eq!((d.m_star, d.log_m), (1, 0.0));
        // MIO outputs stay diagonal, so the overlap never exceeds 1/M
        for e in &d.scan {
            assert!(e.best_fidelity_sq <= 1.0 / e.m as f64 + 1e-7);
        }
        let c = one_shot_cost_mio(&rho, 0.01, 4, EX).unwrap();
        assert_eq!(c.m_star, 1);
        check_cert(&c);
    }

    #[test]
    fn large_epsilon_cases() {
        let rho = random_density_matrix(2, 2, 3).unwrap();
        // discard-and-prepare reaches 1/M
        let d = one_shot_distill_mio(&rho, 1.0 - 1.0 / 3.0 + 1e-3, 3, EX).unwrap();
        assert!(d.scan.iter().all(|e| e.feasible));
        assert_eq!(d.m_star, 3);
        let c = one_shot_cost_mio(&rho, 0.999, 3, EX).unwrap();
        assert_eq!(c.m_star, 1);
        assert!(one_shot_cost_mio(&rho, 0.0, 3, EX).is_err());
    }

    #[test]
    fn bounds_and_ordering_on_random_states() {
        for seed in 0..3 {
            let rho = random_density_matrix(2, 2, 60 + seed).unwrap();
            for eps in [0.01, 0.05] {
                let c = check_cost_bound(&rho, eps, 4, EX).unwrap();
                assert!(c.holds, "{c:?}");
                let d = check_distill_bound(&rho, eps, 4, EX).unwrap();
                assert!(d.holds, "{d:?}");
                assert!(c.rhs >= d.lhs - 1e-12);
            }
        }
        let q = random_density_matrix(3, 2, 5).unwrap();
        let c = one_shot_cost_mio(&q, 0.05, 4, Execution::Parallel).unwrap();
        check_cert(&c);
        let seq = one_shot_cost_mio(&q, 0.05, 4, EX).unwrap();
        assert_eq!(c.m_star, seq.m_star);
        assert_eq!(c.scan[2].best_fidelity_sq, seq.scan[2].best_fidelity_sq);
    }
}
