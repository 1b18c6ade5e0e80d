//! Subchannel discrimination games.
//!
//! An [`Instrument`] is a list of subchannels whose sum is a channel; a
//! player holding a probe state `rho` sends it through, measures a [`Povm`]
//! and guesses the branch. The instrument built from a `C_max` certificate
//! makes the optimal success probability exactly `2^{C_max(rho)}` times the
//! best incoherent-probe value.

mod simulate;

pub use simulate::{simulate_game, SimulationResult};

use rand::Rng;
use serde::Serialize;

use crate::channels::{
    classify, diagonal_unitary, maximally_coherent, optimal_overlap_channel, random_channel, ChannelClass,
    ChannelClassReport, KrausChannel,
};
use crate::error::{Error, Result};
use crate::linalg::json::MatrixJson;
use crate::linalg::random::{derive_seed, rng_from_seed};
use crate::linalg::{hermitian_eig, ComplexMatrix, DensityMatrix};
use crate::sdp::{solve_cmax_pair, solve_sdp_precise, BlockKind, CmaxCertificate, Coef, Objective, SdpProblem, SolveOptions};
use crate::tol;

/// Subchannels `E_a` with `sum_a E_a` trace preserving.
#[derive(Clone, Debug)]
pub struct Instrument {
    subchannels: Vec<KrausChannel>,
    total: KrausChannel,
    class: ChannelClassReport,
}

impl Instrument {
    pub fn new(subchannels: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        if subchannels.is_empty() {
            return Err(Error::InvalidArgument("instrument needs at least one subchannel".into()));
        }
        let subs = subchannels
            .into_iter()
            .map(KrausChannel::cp_map)
            .collect::<Result<Vec<_>>>()?;
        let (din, dout) = (subs[0].dim_in(), subs[0].dim_out());
        if subs.iter().any(|s| s.dim_in() != din || s.dim_out() != dout) {
            return Err(Error::InvalidArgument("subchannels act on different spaces".into()));
        }
        let total = KrausChannel::new(subs.iter().flat_map(|s| s.kraus().iter().cloned()).collect())?;
        let class = classify(&total, 1e-8);
        Ok(Self {
            subchannels: subs,
            total,
            class,
        })
    }

    pub fn len(&self) -> usize {
        self.subchannels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subchannels.is_empty()
    }

    pub fn dim_in(&self) -> usize {
        self.total.dim_in()
    }

    pub fn dim_out(&self) -> usize {
        self.total.dim_out()
    }

    pub fn subchannels(&self) -> &[KrausChannel] {
        &self.subchannels
    }

    pub fn total(&self) -> &KrausChannel {
        &self.total
    }

    /// Class membership of the total channel at tolerance `1e-8`.
    pub fn class(&self) -> &ChannelClassReport {
        &self.class
    }

    /// Unnormalized branch outputs `E_a(rho)`.
    pub fn outputs(&self, rho: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
        self.subchannels.iter().map(|s| s.apply_matrix(rho)).collect()
    }

    /// `Tr E_a(rho)` for every branch.
    pub fn branch_probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        Ok(self.outputs(rho.matrix())?.iter().map(|o| o.trace().re).collect())
    }
}

/// Effects `M_b >= 0` with `sum_b M_b = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
}

impl Povm {
    /// Validates positivity and completeness to `1e-8`.
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidArgument("POVM needs at least one effect".into()))?;
        let d = first.ensure_square()?;
        let mut sum = ComplexMatrix::zeros(d, d);
        for e in &effects {
            if e.ensure_square()? != d {
                return Err(Error::DimensionMismatch { expected: d, got: e.rows() });
            }
            let h = e.hermitian_residual();
            if h > 1e-8 {
                return Err(Error::NotHermitian(h));
            }
            let lmin = hermitian_eig(&e.hermitize())?.min();
            if lmin < -1e-8 {
                return Err(Error::NotPsd(lmin));
            }
            sum = &sum + e;
        }
        let r = (&sum - &ComplexMatrix::identity(d)).max_abs();
        if r > 1e-8 {
            return Err(Error::InvalidArgument(format!("POVM effects do not sum to I (residual {r:.3e})")));
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn to_json(&self) -> Vec<MatrixJson> {
        self.effects.iter().map(MatrixJson::from).collect()
    }
}

/// `U_k = sum_j exp(2 pi i j k / d) |j><j|`.
pub fn fourier_phase(d: usize, k: usize) -> ComplexMatrix {
    let phases: Vec<f64> = (0..d)
        .map(|j| 2.0 * std::f64::consts::PI * ((j * k) % d) as f64 / d as f64)
        .collect();
    diagonal_unitary(&phases)
}

/// `N_k = U_k |Psi+><Psi+| U_k^dagger`, the Fourier basis.
pub fn canonical_povm(d: usize) -> Result<Povm> {
    if d < 2 {
        return Err(Error::InvalidArgument("canonical POVM needs d >= 2".into()));
    }
    let psi = maximally_coherent(d, None)?.projector();
    Povm::new((0..d).map(|k| fourier_phase(d, k).sandwich(&psi)).collect())
}

pub fn build_cmax_instrument(rho: &DensityMatrix) -> Result<Instrument> {
    let cert = solve_cmax_pair(rho)?;
    build_cmax_instrument_from(rho, &cert)
}

/// `E_k(X) = (1/d) U_k E(X) U_k^dagger` for the overlap-optimal channel `E`.
pub fn build_cmax_instrument_from(rho: &DensityMatrix, cert: &CmaxCertificate) -> Result<Instrument> {
    let d = rho.dim();
    if d < 2 {
        return Err(Error::InvalidArgument("discrimination needs d >= 2".into()));
    }
    let ch = optimal_overlap_channel(rho, cert)?;
    let psi = maximally_coherent(d, None)?.projector();
    let mut twirl = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        twirl = &twirl + &fourier_phase(d, k).sandwich(&psi);
    }
    let r = (&twirl - &ComplexMatrix::identity(d)).max_abs();
    if r > 1e-10 {
        return Err(Error::Certification(format!("phase twirl of Psi+ is not I (residual {r:.3e})")));
    }
    let w = 1.0 / (d as f64).sqrt();
    Instrument::new(
        (0..d)
            .map(|k| {
                let u = fourier_phase(d, k);
                ch.kraus().iter().map(|m| u.matmul(m).scale(w)).collect()
            })
            .collect(),
    )
}

/// `E_k = p_k U_k (.) U_k^dagger` with `U_k = sum_j exp(i j phi_k) |j><j|`.
pub fn build_phase_instrument(d: usize, phases: &[f64], priors: &[f64]) -> Result<Instrument> {
    if phases.len() != priors.len() || phases.is_empty() {
        return Err(Error::InvalidArgument("need one prior per phase".into()));
    }
    if priors.iter().any(|&p| p < 0.0) || (priors.iter().sum::<f64>() - 1.0).abs() > tol::TRACE {
        return Err(Error::InvalidArgument("priors must be a probability vector".into()));
    }
    Instrument::new(
        phases
            .iter()
            .zip(priors)
            .map(|(&phi, &p)| {
                let u = diagonal_unitary(&(0..d).map(|j| j as f64 * phi).collect::<Vec<_>>());
                vec![u.scale(p.sqrt())]
            })
            .collect(),
    )
}

/// Branches `sqrt(p_a) K` over independent random DIO channels.
pub fn random_dio_instrument(d: usize, branches: usize, seed: u64) -> Result<Instrument> {
    let mut rng = rng_from_seed(seed);
    let mut w: Vec<f64> = (0..branches).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    let subs = w
        .iter()
        .enumerate()
        .map(|(a, &p)| {
            let ch = random_channel(d, 2, ChannelClass::Dio, derive_seed(seed, a as u64))?;
            Ok(ch.kraus().iter().map(|k| k.scale(p.sqrt())).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Instrument::new(subs)
}

/// `sum_a Tr(E_a(rho) M_a)`.
pub fn p_succ_fixed(inst: &Instrument, povm: &Povm, rho: &DensityMatrix) -> Result<f64> {
    if inst.len() != povm.len() {
        return Err(Error::InvalidArgument(format!(
            "{} subchannels but {} effects",
            inst.len(),
            povm.len()
        )));
    }
    if rho.dim() != inst.dim_in() || povm.effects[0].rows() != inst.dim_out() {
        return Err(Error::DimensionMismatch { expected: inst.dim_in(), got: rho.dim() });
    }
    let outs = inst.outputs(rho.matrix())?;
    Ok(outs
        .iter()
        .zip(&povm.effects)
        .map(|(o, m)| o.trace_product(m).re)
        .sum())
}

/// Optimal POVM value with its certificate.
#[derive(Clone, Debug)]
pub struct OptimalDiscrimination {
    pub value: f64,
    pub dual_value: f64,
    pub povm: Povm,
}

/// `max { sum_a Tr(E_a(rho) M_a) : M_a >= 0, sum_a M_a = I }`.
pub fn p_succ_opt(inst: &Instrument, rho: &DensityMatrix, opts: &SolveOptions) -> Result<OptimalDiscrimination> {
    if rho.dim() != inst.dim_in() {
        return Err(Error::DimensionMismatch { expected: inst.dim_in(), got: rho.dim() });
    }
    let d = inst.dim_out();
    let outs = inst.outputs(rho.matrix())?;
    if outs.len() == 1 {
        let v = outs[0].trace().re;
        return Ok(OptimalDiscrimination {
            value: v,
            dual_value: v,
            povm: Povm::new(vec![ComplexMatrix::identity(d)])?,
        });
    }
    let mut p = SdpProblem::new(Objective::Maximize);
    let blocks: Vec<_> = outs.iter().map(|_| p.add_block(d, BlockKind::Psd)).collect();
    for (b, o) in blocks.iter().zip(&outs) {
        p.add_objective(*b, Coef::dense(&o.hermitize()));
    }
    p.add_hermitian_equality(d, &ComplexMatrix::identity(d), |i, j, part| {
        blocks.iter().map(|&b| (b, Coef::part(i, j, part))).collect()
    });
    let sol = solve_sdp_precise(&p, opts, "discrimination POVM")?;
    let effects: Vec<ComplexMatrix> = blocks.iter().map(|&b| sol.block(b).hermitize()).collect();
    Ok(OptimalDiscrimination {
        value: sol.primal_value,
        dual_value: sol.dual_value,
        povm: Povm::new(effects)?,
    })
}

/// `max_sigma p_succ_opt(inst, sigma)` over incoherent `sigma`.
///
/// For a fixed POVM the success probability is linear in `sigma`, so the
/// optimum over POVMs is convex in `sigma` and is attained at a basis state.
pub fn p_succ_ico(inst: &Instrument, opts: &SolveOptions) -> Result<f64> {
    let d = inst.dim_in();
    let mut best = 0.0f64;
    for i in 0..d {
        best = best.max(p_succ_opt(inst, &DensityMatrix::basis(d, i), opts)?.value);
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct GameResult {
    pub dim: usize,
    /// Optimal success probability of the constructed instrument on `rho`.
    pub p_succ: f64,
    /// Success probability with the canonical Fourier POVM.
    pub p_succ_canonical: f64,
    pub p_ico: f64,
    /// `p_succ / p_ico`.
    pub ratio: f64,
    /// `2^{C_max(rho)}` from the certificate.
    pub two_pow_cmax: f64,
    pub branch_probabilities: Vec<f64>,
    pub povm_witness: Vec<MatrixJson>,
}

/// Plays the constructed instrument and checks `ratio = 2^{C_max}` within `tol`.
pub fn advantage_ratio(rho: &DensityMatrix, tol: f64) -> Result<GameResult> {
    let opts = SolveOptions::default();
    let cert = solve_cmax_pair(rho)?;
    let inst = build_cmax_instrument_from(rho, &cert)?;
    let best = p_succ_opt(&inst, rho, &opts)?;
    let canonical = p_succ_fixed(&inst, &canonical_povm(rho.dim())?, rho)?;
    let p_ico = p_succ_ico(&inst, &opts)?;
    let ratio = best.value / p_ico;
    if (ratio - cert.value).abs() > tol {
        return Err(Error::Certification(format!(
            "advantage ratio {ratio} differs from 2^C_max = {} by more than {tol:e}",
            cert.value
        )));
    }
    Ok(GameResult {
        dim: rho.dim(),
        p_succ: best.value,
        p_succ_canonical: canonical,
        p_ico,
        ratio,
        two_pow_cmax: cert.value,
        branch_probabilities: inst.branch_probabilities(rho)?,
        povm_witness: best.povm.to_json(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct UpperBoundCheck {
    pub samples: usize,
    pub max_ratio: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `p_succ(I, rho) / p_ico(I) <= 2^{C_max(rho)} + 1e-6` over random DIO
/// instruments with 2 to 4 branches.
pub fn dio_upper_bound_check(rho: &DensityMatrix, samples: usize, seed: u64) -> Result<UpperBoundCheck> {
    let opts = SolveOptions::default();
    let bound = solve_cmax_pair(rho)?.value;
    let mut max_ratio = 0.0f64;
    for s in 0..samples {
        let sub = derive_seed(seed, s as u64);
        let inst = random_dio_instrument(rho.dim(), 2 + s % 3, sub)?;
        let r = p_succ_opt(&inst, rho, &opts)?.value / p_succ_ico(&inst, &opts)?;
        max_ratio = max_ratio.max(r);
    }
    Ok(UpperBoundCheck {
        samples,
        max_ratio,
        bound,
        holds: max_ratio <= bound + 1e-6,
    })
}
