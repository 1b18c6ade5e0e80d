//! Smoothed max- and min-relative entropies of coherence.
//!
//! Smoothing is over subnormalized `rho'` with `Tr rho' <= Tr rho` and
//! `||rho' - rho||_1 <= eps`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{support_projector, ComplexMatrix, DensityMatrix};
use crate::measures::{c_max_with_certificate, c_min};
use crate::sdp::{solve_sdp_precise, BlockKind, Coef, IterRecord, Objective, SdpProblem, Sense, SolveOptions};
use crate::tol;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothResult {
    pub eps: f64,
    /// Bits; `-inf` when the zero operator is inside the smoothing ball.
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub value: f64,
    /// Absolute primal-dual gap of the underlying program (linear scale).
    pub gap: f64,
    pub iterations: usize,
    /// Optimal `rho'` for `C_max^eps`, optimal effect `A` for `C_min^eps`.
    #[serde(skip)]
    pub witness: ComplexMatrix,
    #[serde(skip)]
    pub trace: Vec<IterRecord>,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("smoothing parameter must be >= 0, got {eps}")));
    }
    Ok(())
}

pub fn smooth_c_max(rho: &DensityMatrix, eps: f64) -> Result<SmoothResult> {
    smooth_c_max_with(rho, eps, &SolveOptions::default())
}

/// `log2 min { sum_i s_i : diag(s) >= rho', ||rho' - rho||_1 <= eps, Tr rho' <= Tr rho }`.
///
/// The trace norm is split as `rho' - rho = P - Q` with `P, Q >= 0` and
/// `Tr(P + Q) <= eps`. `eps = 0` falls back to the unsmoothed program.
pub fn smooth_c_max_with(rho: &DensityMatrix, eps: f64, opts: &SolveOptions) -> Result<SmoothResult> {
    check_eps(eps)?;
    let d = rho.dim();
    if eps == 0.0 {
        let (value, cert) = c_max_with_certificate(rho)?;
        return Ok(SmoothResult {
            eps,
            value,
            gap: cert.gap,
            iterations: cert.iterations,
            witness: rho.matrix().clone(),
            trace: cert.trace,
        });
    }
    if eps >= rho.trace() - tol::TRACE {
        return Ok(SmoothResult {
            eps,
            value: f64::NEG_INFINITY,
            gap: 0.0,
            iterations: 0,
            witness: ComplexMatrix::zeros(d, d),
            trace: Vec::new(),
        });
    }
    let mut p = SdpProblem::new(Objective::Minimize);
    let s = p.add_block(d, BlockKind::Nonneg);
    let rp = p.add_block(d, BlockKind::Psd);
    let pp = p.add_block(d, BlockKind::Psd);
    let qq = p.add_block(d, BlockKind::Psd);
    let slack = p.add_block(d, BlockKind::Psd);
    p.add_objective(s, Coef::trace(d, 1.0));
    let zero = ComplexMatrix::zeros(d, d);
    p.add_hermitian_equality(d, &zero, |i, j, part| {
        let mut v = vec![
            (rp, Coef::part(i, j, part).scaled(-1.0)),
            (slack, Coef::part(i, j, part).scaled(-1.0)),
        ];
        if i == j {
            v.push((s, Coef::diag(i, 1.0)));
        }
        v
    });
    p.add_hermitian_equality(d, rho.matrix(), |i, j, part| {
        vec![
            (rp, Coef::part(i, j, part)),
            (pp, Coef::part(i, j, part).scaled(-1.0)),
            (qq, Coef::part(i, j, part)),
        ]
    });
    p.add_constraint(vec![(pp, Coef::trace(d, 1.0)), (qq, Coef::trace(d, 1.0))], Sense::Le, eps);
    p.add_constraint(vec![(rp, Coef::trace(d, 1.0))], Sense::Le, rho.trace());
    let sol = solve_sdp_precise(&p, opts, "smoothed C_max")?;
    let total: f64 = sol.vector(s).iter().sum();
    Ok(SmoothResult {
        eps,
        value: total.max(f64::MIN_POSITIVE).log2(),
        gap: sol.gap,
        iterations: sol.iterations,
        witness: sol.block(rp).clone(),
        trace: sol.trace,
    })
}

pub fn smooth_c_min(rho: &DensityMatrix, eps: f64) -> Result<SmoothResult> {
    smooth_c_min_with(rho, eps, &SolveOptions::default())
}

/// `-log2 min_A max_i A_ii` over effects `0 <= A <= I` with `Tr(A rho) >= 1 - eps`.
///
/// `eps = 0` uses the support projector, for which the minimum over incoherent
/// states has a closed form. Requires `eps < 1`.
pub fn smooth_c_min_with(rho: &DensityMatrix, eps: f64, opts: &SolveOptions) -> Result<SmoothResult> {
    check_eps(eps)?;
    if eps >= 1.0 {
        return Err(Error::InvalidArgument(format!("smoothing parameter must be < 1, got {eps}")));
    }
    let d = rho.dim();
    if eps == 0.0 {
        return Ok(SmoothResult {
            eps,
            value: c_min(rho, tol::RANK),
            gap: 0.0,
            iterations: 0,
            witness: support_projector(rho, tol::RANK),
            trace: Vec::new(),
        });
    }
    let mut p = SdpProblem::new(Objective::Minimize);
    let t = p.add_block(1, BlockKind::Nonneg);
    let a = p.add_block(d, BlockKind::Box);
    p.add_objective(t, Coef::diag(0, 1.0));
    for i in 0..d {
        p.add_constraint(vec![(t, Coef::diag(0, 1.0)), (a, Coef::diag(i, -1.0))], Sense::Ge, 0.0);
    }
    p.add_constraint(vec![(a, Coef::dense(rho.matrix()))], Sense::Ge, 1.0 - eps);
    let sol = solve_sdp_precise(&p, opts, "smoothed C_min")?;
    let tv = sol.vector(t)[0];
    let value = (-tv.max(f64::MIN_POSITIVE).log2()).max(0.0);
    Ok(SmoothResult {
        eps,
        value,
        gap: sol.gap,
        iterations: sol.iterations,
        witness: sol.block(a).clone(),
        trace: sol.trace,
    })
}
