//! Certification suite: every identity and inequality the toolkit relies on,
//! evaluated on seeded random states and collected into one report.
//!
//! Each record names the relation it checks with a formula anchor. Records
//! are emitted in a fixed order (state index, then check order) whatever the
//! thread schedule, and wall-clock timings live outside the serialized body.

use std::time::Instant;

use serde::Serialize;

use crate::channels::{classify, maximally_coherent, optimal_overlap_channel};
use crate::error::{Error, Result};
use crate::games::{build_cmax_instrument_from, p_succ_ico, p_succ_opt, simulate_game};
use crate::linalg::random::derive_seed;
use crate::linalg::matrix::vec_inner;
use crate::linalg::{check_dim, random_density_matrix, random_pure_state, DensityMatrix};
use crate::measures::{
    c_l1, c_max_with_certificate, c_min, c_r, cmin_io_violation_demo, pure_closed_forms, quasi_convexity_check,
    smooth_c_max, smooth_c_min,
};
use crate::oneshot::{check_cost_bound, check_distill_bound};
use crate::par::{map_indexed, Execution};
use crate::sdp::SolveOptions;
use crate::tol;

/// Seed and trial budget of the fixed violation search.
pub const VIOLATION_SEED: u64 = 0;
pub const VIOLATION_TRIALS: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertTolerances {
    pub chain: f64,
    pub sdp_gap: f64,
    pub qubit_closed_form: f64,
    pub pure_cmax: f64,
    pub pure_cmin: f64,
    pub overlap: f64,
    pub membership: f64,
    pub adjoint: f64,
    pub p_ico: f64,
    pub ratio: f64,
    /// Allowed Monte Carlo deviation in binomial standard deviations.
    pub sigmas: f64,
    pub smoothing: f64,
    pub one_shot: f64,
    pub quasi_convexity: f64,
}

impl Default for CertTolerances {
    fn default() -> Self {
        Self {
            chain: 3e-7,
            sdp_gap: tol::GAP,
            qubit_closed_form: 1e-7,
            pure_cmax: 1e-6,
            pure_cmin: 1e-9,
            overlap: 1e-6,
            membership: 1e-8,
            adjoint: 1e-6,
            p_ico: 1e-7,
            ratio: 1e-5,
            sigmas: 5.0,
            smoothing: 1e-6,
            one_shot: 1e-6,
            quasi_convexity: 1e-7,
        }
    }
}

impl CertTolerances {
    /// Every tolerance set to `x` (the Monte Carlo width included).
    pub fn uniform(x: f64) -> Self {
        Self {
            chain: x,
            sdp_gap: x,
            qubit_closed_form: x,
            pure_cmax: x,
            pure_cmin: x,
            overlap: x,
            membership: x,
            adjoint: x,
            p_ico: x,
            ratio: x,
            sigmas: x,
            smoothing: x,
            one_shot: x,
            quasi_convexity: x,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    /// Monte Carlo trials per state; `0` skips the simulation.
    pub trials: usize,
    /// Largest `M` scanned by the one-shot checks; `0` skips them.
    pub m_max: usize,
    pub tolerances: CertTolerances,
}

impl SuiteConfig {
    pub fn new(dim: usize, count: usize, seed: u64) -> Self {
        Self {
            dim,
            count,
            seed,
            epsilons: vec![0.01, 0.05],
            trials: 100_000,
            m_max: 8.min(tol::DIM_CAP / dim.max(1)),
            tolerances: CertTolerances::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    /// Index of the state in the suite; `None` for suite-level checks.
    pub state: Option<usize>,
    pub status: Status,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub lhs: f64,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub rhs: f64,
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedManifest {
    pub suite_seed: u64,
    /// `derive_seed(suite_seed, k)` for state `k`.
    pub state_seeds: Vec<u64>,
    pub violation_seed: u64,
    pub violation_trials: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificationReport {
    pub config: SuiteConfig,
    pub passed: bool,
    pub counts: StatusCounts,
    pub records: Vec<CheckRecord>,
    pub seeds: SeedManifest,
    /// Seconds spent per record, aligned with `records`. Not part of the body.
    #[serde(skip)]
    pub runtimes: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StatusCounts {
    pub pass: usize,
    pub fail: usize,
    pub error: usize,
}

impl CertificationReport {
    pub fn has_errors(&self) -> bool {
        self.counts.error > 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| r.status != Status::Pass)
    }
}

/// Collects the records of one state (or of the suite-level checks).
struct Recorder {
    state: Option<usize>,
    out: Vec<(CheckRecord, f64)>,
    clock: Instant,
}

impl Recorder {
    fn new(state: Option<usize>) -> Self {
        Self {
            state,
            out: Vec::new(),
            clock: Instant::now(),
        }
    }

    fn lap(&mut self) -> f64 {
        let t = self.clock.elapsed().as_secs_f64();
        self.clock = Instant::now();
        t
    }

    fn push(&mut self, name: &str, anchor: &str, passed: bool, lhs: f64, rhs: f64, tolerance: f64) {
        let t = self.lap();
        self.out.push((
            CheckRecord {
                name: name.into(),
                anchor: anchor.into(),
                state: self.state,
                status: if passed { Status::Pass } else { Status::Fail },
                lhs,
                rhs,
                tolerance,
                message: None,
            },
            t,
        ));
    }

    /// `lhs <= rhs + tol`.
    fn le(&mut self, name: &str, anchor: &str, lhs: f64, rhs: f64, tol: f64) {
        self.push(name, anchor, lhs <= rhs + tol, lhs, rhs, tol);
    }

    /// `|lhs - rhs| <= tol`.
    fn close(&mut self, name: &str, anchor: &str, lhs: f64, rhs: f64, tol: f64) {
        self.push(name, anchor, (lhs - rhs).abs() <= tol, lhs, rhs, tol);
    }

    fn error(&mut self, name: &str, anchor: &str, e: &Error) {
        let t = self.lap();
        self.out.push((
            CheckRecord {
                name: name.into(),
                anchor: anchor.into(),
                state: self.state,
                status: Status::Error,
                lhs: f64::NAN,
                rhs: f64::NAN,
                tolerance: f64::NAN,
                message: Some(e.to_string()),
            },
            t,
        ));
    }

    /// Runs `f`; an error becomes a single `Error` record under `name`.
    fn guard(&mut self, name: &str, anchor: &str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.error(name, anchor, &e);
        }
    }
}

const A_CHAIN_LOW: &str = "C_min(rho) <= C_r(rho)";
const A_CHAIN_MID: &str = "C_r(rho) <= C_max(rho)";
const A_CHAIN_TOP: &str = "C_max(rho) <= log2(1 + C_l1(rho))";
const A_GAP: &str = "2^{C_max(rho)} = min sum_i s_i = max Tr(rho tau)";
const A_QUBIT: &str = "2^{C_max(rho)} = 1 + 2|rho_01| for qubits";
const A_PURE_MAX: &str = "C_max(psi) = 2 log2 sum_i |psi_i|";
const A_PURE_MIN: &str = "C_min(psi) = -log2 max_i |psi_i|^2";
const A_OVERLAP: &str = "max_E d F(E(rho), Psi+)^2 = 2^{C_max(rho)}";
const A_MEMBER: &str = "optimal overlap channel is SIO, IO and DIO";
const A_ADJOINT: &str = "d E^dagger(Psi+) = tau";
const A_PICO: &str = "p_succ^ICO = 1/d for the constructed instrument";
const A_RATIO: &str = "max p_succ(I, rho) / p_succ^ICO(I) = 2^{C_max(rho)}";
const A_MC: &str = "simulated success frequency matches p_succ";
const A_SMOOTH_MAX: &str = "C_max^eps(rho) nonincreasing in eps";
const A_SMOOTH_MIN: &str = "C_min^eps(rho) nondecreasing in eps";
const A_SMOOTH_REL: &str = "C_min^eps(rho) <= C_max^eps(rho) - log2(1 - 2 eps)";
const A_COST: &str = "C_max^{2 sqrt(eps)}(rho) <= C_C,MIO^{(1),eps}(rho)";
const A_DISTILL: &str = "C_D,MIO^{(1),eps}(rho) <= C_min^eps(rho)";
const A_QUASI: &str = "C_max(sum p_i rho_i) <= max_i C_max(rho_i)";
const A_VIOLATION: &str = "sum_i p_i C_min(rho_i) > C_min(psi) for some IO";

fn state_checks(cfg: &SuiteConfig, k: usize, exec: Execution) -> Vec<(CheckRecord, f64)> {
    let d = cfg.dim;
    let t = &cfg.tolerances;
    let seed = derive_seed(cfg.seed, k as u64);
    let mut rec = Recorder::new(Some(k));
    let rho = match random_density_matrix(d, 1 + k % d, seed) {
        Ok(r) => r,
        Err(e) => {
            rec.error("state", "random state", &e);
            return rec.out;
        }
    };

    let (cmax, cert) = match c_max_with_certificate(&rho) {
        Ok(c) => c,
        Err(e) => {
            rec.error("sdp.c_max", A_GAP, &e);
            return rec.out;
        }
    };
    let cmin = c_min(&rho, tol::RANK);
    let cr = c_r(&rho);
    rec.le("chain.c_min_le_c_r", A_CHAIN_LOW, cmin, cr, t.chain);
    rec.le("chain.c_r_le_c_max", A_CHAIN_MID, cr, cmax, t.chain);
    rec.le("chain.c_max_le_log_l1", A_CHAIN_TOP, cmax, (1.0 + c_l1(&rho)).log2(), t.chain);
    rec.le("sdp.gap", A_GAP, cert.gap, 0.0, t.sdp_gap * (1.0 + cert.value));
    if d == 2 {
        let b = rho.matrix()[(0, 1)].norm();
        rec.close("qubit.closed_form", A_QUBIT, cmax.exp2(), 1.0 + 2.0 * b, t.qubit_closed_form);
    }

    rec.guard("pure.closed_form", A_PURE_MAX, |r| {
        let psi = random_pure_state(d, derive_seed(seed, 1))?;
        let cf = pure_closed_forms(&psi);
        let p = psi.to_density();
        let (v, _) = c_max_with_certificate(&p)?;
        r.close("pure.c_max", A_PURE_MAX, v, cf.c_max, t.pure_cmax);
        r.close("pure.c_min", A_PURE_MIN, c_min(&p, tol::RANK), cf.c_min, t.pure_cmin);
        Ok(())
    });

    rec.guard("overlap.fidelity", A_OVERLAP, |r| {
        let ch = optimal_overlap_channel(&rho, &cert)?;
        let target = maximally_coherent(d, None)?;
        let out = ch.apply(&rho)?;
        let v = target.amplitudes();
        let f2 = vec_inner(v, &out.matrix().mat_vec(v)).re;
        r.close("overlap.fidelity", A_OVERLAP, d as f64 * f2, cert.value, t.overlap);
        let cls = classify(&ch, t.membership);
        let worst = cls.sio_residual.max(cls.io_residual).max(cls.dio_residual);
        r.push(
            "overlap.membership",
            A_MEMBER,
            cls.is_sio && cls.is_io && cls.is_dio,
            worst,
            0.0,
            t.membership,
        );
        let adj = ch.adjoint_apply(&target.projector())?.scale(d as f64);
        r.le("overlap.adjoint", A_ADJOINT, (&adj - &cert.tau).max_abs(), 0.0, t.adjoint);
        Ok(())
    });

    rec.guard("game.setup", A_RATIO, |r| {
        let opts = SolveOptions::default();
        let inst = build_cmax_instrument_from(&rho, &cert)?;
        let p_ico = p_succ_ico(&inst, &opts)?;
        r.close("game.p_ico", A_PICO, p_ico, 1.0 / d as f64, t.p_ico);
        let best = p_succ_opt(&inst, &rho, &opts)?;
        r.close("game.ratio", A_RATIO, best.value / p_ico, cert.value, t.ratio);
        if cfg.trials > 0 {
            let sim = simulate_game(&inst, &best.povm, &rho, cfg.trials, derive_seed(seed, 2), exec)?;
            r.le(
                "game.monte_carlo",
                A_MC,
                (sim.frequency - sim.exact).abs(),
                0.0,
                t.sigmas * sim.std_dev + 1e-12,
            );
        }
        Ok(())
    });

    let mut prev_max = cmax;
    let mut prev_min = cmin;
    for &eps in &cfg.epsilons {
        rec.guard("smooth", A_SMOOTH_REL, |r| {
            let hi = smooth_c_max(&rho, eps)?;
            let lo = smooth_c_min(&rho, eps)?;
            r.le("smooth.c_max_monotone", A_SMOOTH_MAX, hi.value, prev_max, t.smoothing);
            r.le("smooth.c_min_monotone", A_SMOOTH_MIN, prev_min, lo.value, t.smoothing);
            if eps < 0.5 {
                r.le(
                    "smooth.min_max_relation",
                    A_SMOOTH_REL,
                    lo.value,
                    hi.value - (1.0 - 2.0 * eps).log2(),
                    t.smoothing,
                );
            }
            prev_max = hi.value;
            prev_min = lo.value;
            Ok(())
        });
    }

    if cfg.m_max >= 2 {
        for &eps in &cfg.epsilons {
            if 2.0 * eps.sqrt() < 2.0 {
                rec.guard("oneshot.cost_bound", A_COST, |r| {
                    let b = check_cost_bound(&rho, eps, cfg.m_max, exec)?;
                    r.le("oneshot.cost_bound", A_COST, b.lhs, b.rhs, t.one_shot);
                    Ok(())
                });
            }
            rec.guard("oneshot.distill_bound", A_DISTILL, |r| {
                let b = check_distill_bound(&rho, eps, cfg.m_max, exec)?;
                r.le("oneshot.distill_bound", A_DISTILL, b.lhs, b.rhs, t.one_shot);
                Ok(())
            });
        }
    }

    rec.guard("quasi_convexity", A_QUASI, |r| {
        let other = random_density_matrix(d, d, derive_seed(seed, 3))?;
        let mix = DensityMatrix::mixture(&[rho.clone(), other.clone()], &[0.5, 0.5])?;
        let (hi, _) = c_max_with_certificate(&mix)?;
        let (a, _) = c_max_with_certificate(&other)?;
        let holds = quasi_convexity_check(&[rho.clone(), other], &[0.5, 0.5])?;
        let bound = cmax.max(a);
        r.push("quasi_convexity", A_QUASI, holds && hi <= bound + t.quasi_convexity, hi, bound, t.quasi_convexity);
        Ok(())
    });

    rec.out
}

/// The fixed violation search, re-verified from the returned Kraus operators.
fn violation_check() -> Vec<(CheckRecord, f64)> {
    let mut rec = Recorder::new(None);
    rec.guard("violation.search", A_VIOLATION, |r| {
        let inst = cmin_io_violation_demo(VIOLATION_SEED, VIOLATION_TRIALS)?;
        let psi = inst.state.to_density();
        let before = c_min(&psi, tol::RANK);
        let mut after = 0.0;
        for k in inst.channel.kraus() {
            let out = k.matmul(psi.matrix()).matmul(&k.adjoint());
            let p = out.trace().re;
            if p > 1e-15 {
                let s = DensityMatrix::new(out.scale(1.0 / p))?;
                after += p * c_min(&s, tol::RANK);
            }
        }
        let io = classify(&inst.channel, 1e-12).is_io;
        r.push(
            "violation.io_raises_c_min",
            A_VIOLATION,
            io && after > before + crate::measures::VIOLATION_MARGIN,
            after,
            before,
            crate::measures::VIOLATION_MARGIN,
        );
        Ok(())
    });
    rec.out
}

/// Runs the whole suite. Solver failures do not abort: they become `Error`
/// records and the aggregate flag is cleared.
pub fn certify_suite(cfg: &SuiteConfig, exec: Execution) -> Result<CertificationReport> {
    check_dim(cfg.dim)?;
    if cfg.dim < 2 {
        return Err(Error::InvalidArgument("certification needs dim >= 2".into()));
    }
    if cfg.count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    if cfg.epsilons.iter().any(|e| !(0.0..1.0).contains(e) || *e == 0.0) {
        return Err(Error::InvalidArgument("epsilons must lie in (0, 1)".into()));
    }
    if cfg.m_max > 0 && cfg.dim * cfg.m_max > tol::DIM_CAP {
        return Err(Error::DimensionCap {
            dim: cfg.dim * cfg.m_max,
            cap: tol::DIM_CAP,
        });
    }
    // one extra task for the suite-level search
    let parts = map_indexed(exec, cfg.count + 1, |k| {
        if k < cfg.count {
            state_checks(cfg, k, exec)
        } else {
            violation_check()
        }
    });
    let mut records = Vec::new();
    let mut runtimes = Vec::new();
    let mut counts = StatusCounts::default();
    for (r, t) in parts.into_iter().flatten() {
        match r.status {
            Status::Pass => counts.pass += 1,
            Status::Fail => counts.fail += 1,
            Status::Error => counts.error += 1,
        }
        records.push(r);
        runtimes.push(t);
    }
    Ok(CertificationReport {
        config: cfg.clone(),
        passed: counts.fail == 0 && counts.error == 0,
        counts,
        records,
        runtimes,
        seeds: SeedManifest {
            suite_seed: cfg.seed,
            state_seeds: (0..cfg.count).map(|k| derive_seed(cfg.seed, k as u64)).collect(),
            violation_seed: VIOLATION_SEED,
            violation_trials: VIOLATION_TRIALS,
        },
    })
}
