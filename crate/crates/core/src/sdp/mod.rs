//! Dense semidefinite programming over complex Hermitian blocks.
//!
//! [`SdpProblem`] describes a problem over PSD, box (`0 <= X <= I`) and
//! nonnegative blocks; [`solve_sdp`] lowers it to standard conic form and runs
//! the interior-point engine. [`solve_cmax_pair`] is the specialized
//! unit-diagonal program behind `C_max`.

mod cmax;
mod ipm;
mod problem;
mod standard;

pub use cmax::{solve_cmax_pair, solve_cmax_pair_with, strictly_feasible_start, CmaxCertificate};
pub use ipm::{IterRecord, SolveOptions, Status};
pub use problem::{BlockId, BlockKind, BlockSpec, Coef, LinearConstraint, Objective, Part, SdpProblem, Sense};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use standard::Block;

/// Result of [`solve_sdp`].
#[derive(Clone, Debug)]
pub struct SdpSolution {
    /// One matrix per user block; nonnegative blocks come back as diagonal
    /// matrices.
    pub blocks: Vec<ComplexMatrix>,
    /// Multipliers of the user constraints, signed so that for a
    /// minimization the dual objective is `sum_k rhs_k dual_k` plus the
    /// contribution of box blocks.
    pub dual: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `|primal_value - dual_value|`.
    pub gap: f64,
    pub status: Status,
    pub iterations: usize,
    /// Largest violation of a user constraint at the returned point.
    pub max_violation: f64,
    /// Relative primal and dual residuals of the standard form.
    pub primal_infeas: f64,
    pub dual_infeas: f64,
    pub trace: Vec<IterRecord>,
}

impl SdpSolution {
    pub fn block(&self, id: BlockId) -> &ComplexMatrix {
        &self.blocks[id.0]
    }

    /// Diagonal of a block as reals (the natural view of a nonnegative block).
    pub fn vector(&self, id: BlockId) -> Vec<f64> {
        self.blocks[id.0].real_diagonal()
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// Turns non-optimal outcomes into [`Error::Solver`].
    pub fn require_optimal(self, what: &str) -> Result<Self> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(Error::Solver(format!(
                "{what}: status {:?} after {} iterations (gap {:.3e}, residuals {:.3e}/{:.3e})",
                self.status, self.iterations, self.gap, self.primal_infeas, self.dual_infeas
            )))
        }
    }
}

/// Solves `problem` to the tolerances in `opts`. Deterministic.
pub fn solve_sdp(problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    let compiled = problem.compile()?;
    let raw = ipm::solve(&compiled.form, opts, None);
    let blocks: Vec<ComplexMatrix> = compiled
        .block_cone
        .iter()
        .map(|&c| match &raw.x[c] {
            Block::Psd(m) => m.clone(),
            Block::Lp(v) => ComplexMatrix::from_diagonal(v),
        })
        .collect();
    let sign = compiled.sign;
    let dual = raw.y[..compiled.user_constraints]
        .iter()
        .map(|v| sign * v)
        .collect();
    let max_violation = problem
        .constraints
        .iter()
        .map(|con| {
            let lhs: f64 = con
                .terms
                .iter()
                .map(|(b, c)| match problem.blocks[b.0].kind {
                    BlockKind::Nonneg => c.eval_vec(&blocks[b.0].real_diagonal()),
                    _ => c.eval(&blocks[b.0]),
                })
                .sum();
            match con.sense {
                Sense::Eq => (lhs - con.rhs).abs(),
                Sense::Le => (lhs - con.rhs).max(0.0),
                Sense::Ge => (con.rhs - lhs).max(0.0),
            }
        })
        .fold(0.0, f64::max);
    let primal_value = sign * raw.primal_obj;
    let dual_value = sign * raw.dual_obj;
    Ok(SdpSolution {
        blocks,
        dual,
        primal_value,
        dual_value,
        gap: (primal_value - dual_value).abs(),
        status: raw.status,
        iterations: raw.iterations,
        max_violation,
        primal_infeas: raw.primal_infeas,
        dual_infeas: raw.dual_infeas,
        trace: raw.trace,
    })
}

/// Solves at gap and feasibility tolerance `1e-10` and falls back to `opts`
/// when the tight run does not certify optimality. Non-optimal outcomes of
/// the fallback become [`Error::Solver`] tagged with `what`.
pub fn solve_sdp_precise(problem: &SdpProblem, opts: &SolveOptions, what: &str) -> Result<SdpSolution> {
    let tight = SolveOptions {
        tol_gap: opts.tol_gap.min(1e-10),
        tol_feas: opts.tol_feas.min(1e-10),
        ..opts.clone()
    };
    let mut sol = solve_sdp(problem, &tight)?;
    if sol.is_optimal() {
        return Ok(sol);
    }
    // the best iterate of a stalled tight run may already meet `opts`
    if sol.status == Status::IterLimit
        && sol.primal_infeas <= opts.tol_feas
        && sol.dual_infeas <= opts.tol_feas
        && sol.gap <= opts.tol_gap * (1.0 + sol.primal_value.abs())
    {
        sol.status = Status::Optimal;
        return Ok(sol);
    }
    solve_sdp(problem, opts)?.require_optimal(what)
}

/// Writes a solver trace as CSV.
pub fn write_trace_csv<W: std::io::Write>(trace: &[IterRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", IterRecord::CSV_HEADER)?;
    for r in trace {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}
