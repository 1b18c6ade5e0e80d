use std::io::Write as _;
use std::path::Path;

use cohcert::certify::{certify_suite, CertTolerances, SuiteConfig};
use cohcert::channels::{channel_from_json_str, classify, maximally_coherent, optimal_overlap_channel, ChannelClassReport, ChannelJson};
use cohcert::games::{
    build_cmax_instrument_from, build_phase_instrument, canonical_povm, p_succ_fixed, p_succ_ico, p_succ_opt,
    simulate_game, SimulationResult,
};
use cohcert::linalg::json::MatrixJson;
use cohcert::linalg::matrix::vec_inner;
use cohcert::linalg::{ComplexMatrix, DensityMatrix, PureState};
use cohcert::measures::{
    c_l1, c_max, c_max_with_certificate, c_min, c_r, cmin_io_violation_demo, coherence_report, smooth_c_max,
    smooth_c_min, CoherenceReport, SmoothResult, VIOLATION_MARGIN,
};
use cohcert::oneshot::{one_shot_cost_mio, one_shot_distill_mio, regularized_sweep, OneShotResult, SweepRecord};
use cohcert::report::ser_f64;
use cohcert::sdp::{solve_cmax_pair_with, write_trace_csv, SolveOptions};
use cohcert::{tol, Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::write_atomic;
use crate::source::{Source, StateArgs};
use crate::{Ctx, InstrumentKind, Verdict};

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {x}")))
    }
}

fn check_eps_list(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::InvalidArgument("empty --eps list".into()));
    }
    for &e in eps {
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {e}")));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct MeasureBody {
    source: Source,
    report: CoherenceReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<MatrixJson>,
}

pub fn measure(ctx: &Ctx, state: &StateArgs, rank_tol: f64, closed_form: bool, trace: Option<&Path>) -> Result<Verdict> {
    positive("--tol", rank_tol)?;
    let (rho, source) = state.load()?;
    let report = coherence_report(&rho, rank_tol, closed_form, ctx.witness)?;
    if let Some(path) = trace {
        let cert = solve_cmax_pair_with(
            &rho,
            &SolveOptions {
                tol_gap: 1e-11,
                tol_feas: 1e-11,
                trace: true,
                ..SolveOptions::default()
            },
        )?;
        let mut buf = Vec::new();
        write_trace_csv(&cert.trace, &mut buf).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        write_atomic(path, &String::from_utf8_lossy(&buf))?;
    }
    let state = ctx.witness.then(|| MatrixJson::from(rho.matrix()));
    ctx.emitter.emit(&MeasureBody { source, report, state }, json!({}))?;
    Ok(Verdict::Ok)
}

#[derive(Serialize)]
struct ChannelBody {
    source: Source,
    mode: &'static str,
    channel: ChannelJson,
    class: ChannelClassReport,
    /// `d F(E(rho), Psi+)^2`.
    overlap: f64,
    two_pow_c_max: f64,
    c_max_before: f64,
    c_max_after: Option<f64>,
    output: Option<MatrixJson>,
}

pub fn channel(ctx: &Ctx, state: &StateArgs, apply: Option<&Path>, member_tol: f64) -> Result<Verdict> {
    positive("--tol", member_tol)?;
    let (rho, source) = state.load()?;
    let d = rho.dim();
    let (cmax, cert) = c_max_with_certificate(&rho)?;
    let (ch, mode) = match apply {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Parse(format!("cannot read {}: {e}", p.display())))?;
            (channel_from_json_str(&text)?, "apply")
        }
        None => (optimal_overlap_channel(&rho, &cert)?, "optimal_overlap"),
    };
    if ch.dim_in() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: ch.dim_in(),
        });
    }
    let out = ch.apply(&rho)?;
    let overlap = if ch.dim_out() == d {
        let v = maximally_coherent(d, None)?;
        d as f64 * vec_inner(v.amplitudes(), &out.matrix().mat_vec(v.amplitudes())).re
    } else {
        f64::NAN
    };
    let class = classify(&ch, member_tol);
    let body = ChannelBody {
        source,
        mode,
        channel: ch.to_json(),
        class,
        overlap,
        two_pow_c_max: cert.value,
        c_max_before: cmax,
        c_max_after: Some(c_max(&out)?),
        output: ctx.witness.then(|| MatrixJson::from(out.matrix())),
    };
    ctx.emitter.emit(&body, json!({}))?;
    if mode == "optimal_overlap" {
        let ok = (overlap - cert.value).abs() <= 1e-6 && body.class.is_sio && body.class.is_io && body.class.is_dio;
        if !ok {
            return Ok(Verdict::Failed(format!(
                "overlap {overlap} vs 2^C_max {} or membership failed",
                cert.value
            )));
        }
    }
    Ok(Verdict::Ok)
}

#[derive(Serialize)]
struct GameBody {
    source: Source,
    instrument: &'static str,
    dim: usize,
    p_succ: f64,
    p_succ_canonical: f64,
    p_ico: f64,
    ratio: f64,
    two_pow_c_max: f64,
    branch_probabilities: Vec<f64>,
    simulation: Option<SimulationResult>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    povm_witness: Option<Vec<MatrixJson>>,
}

pub fn game(ctx: &Ctx, state: &StateArgs, kind: InstrumentKind, trials: usize, seed: u64, ratio_tol: f64) -> Result<Verdict> {
    positive("--tol", ratio_tol)?;
    let (rho, source) = state.load()?;
    let d = rho.dim();
    if d < 2 {
        return Err(Error::InvalidArgument("games need dimension >= 2".into()));
    }
    let opts = SolveOptions::default();
    let (_, cert) = c_max_with_certificate(&rho)?;
    let (inst, name) = match kind {
        InstrumentKind::Cmax => (build_cmax_instrument_from(&rho, &cert)?, "cmax"),
        InstrumentKind::Phase => {
            let phases: Vec<f64> = (0..d).map(|k| std::f64::consts::TAU * k as f64 / d as f64).collect();
            (build_phase_instrument(d, &phases, &vec![1.0 / d as f64; d])?, "phase")
        }
    };
    let best = p_succ_opt(&inst, &rho, &opts)?;
    let p_ico = p_succ_ico(&inst, &opts)?;
    let simulation = if trials > 0 {
        Some(simulate_game(&inst, &best.povm, &rho, trials, seed, ctx.exec)?)
    } else {
        None
    };
    let body = GameBody {
        source,
        instrument: name,
        dim: d,
        p_succ: best.value,
        p_succ_canonical: p_succ_fixed(&inst, &canonical_povm(d)?, &rho)?,
        p_ico,
        ratio: best.value / p_ico,
        two_pow_c_max: cert.value,
        branch_probabilities: inst.branch_probabilities(&rho)?,
        simulation,
        seed,
        povm_witness: ctx.witness.then(|| best.povm.to_json()),
    };
    ctx.emitter.emit(&body, json!({}))?;
    if matches!(kind, InstrumentKind::Cmax) && (body.ratio - cert.value).abs() > ratio_tol {
        return Ok(Verdict::Failed(format!("ratio {} differs from 2^C_max {}", body.ratio, cert.value)));
    }
    if let Some(s) = &body.simulation {
        if !s.within_five_sigma {
            return Ok(Verdict::Failed(format!(
                "simulated frequency {} outside 5 sigma of {}",
                s.frequency, s.exact
            )));
        }
    }
    Ok(Verdict::Ok)
}

#[derive(Serialize)]
struct Bound {
    #[serde(serialize_with = "ser_f64")]
    lhs: f64,
    #[serde(serialize_with = "ser_f64")]
    rhs: f64,
    holds: bool,
}

#[derive(Serialize)]
struct OneShotEntry {
    epsilon: f64,
    distill: OneShotResult,
    /// `None` when no `M <= m_max` reaches the fidelity threshold.
    cost: Option<OneShotResult>,
    smooth_c_min: SmoothResult,
    smooth_c_max_at_2_sqrt_eps: SmoothResult,
    /// `log2 M*_D <= C_min^eps`.
    distill_bound: Bound,
    /// `C_max^{2 sqrt eps} <= log2 M*_C`.
    cost_bound: Option<Bound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distill_certificate: Option<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cost_certificate: Option<MatrixJson>,
}

#[derive(Serialize)]
struct OneShotBody {
    source: Source,
    m_max: usize,
    entries: Vec<OneShotEntry>,
}

pub fn oneshot(ctx: &Ctx, state: &StateArgs, eps: &[f64], m_max: Option<usize>, slack: f64) -> Result<Verdict> {
    check_eps_list(eps)?;
    positive("--tol", slack)?;
    let (rho, source) = state.load()?;
    let d = rho.dim();
    let m_max = m_max.unwrap_or((d * d).min(tol::DIM_CAP / d));
    if m_max < 2 {
        return Err(Error::InvalidArgument("--m-max must be at least 2".into()));
    }
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for &e in eps {
        let distill = one_shot_distill_mio(&rho, e, m_max, ctx.exec)?;
        let cost = match one_shot_cost_mio(&rho, e, m_max, ctx.exec) {
            Ok(c) => Some(c),
            Err(Error::NotFound(_)) => None,
            Err(err) => return Err(err),
        };
        let smin = smooth_c_min(&rho, e)?;
        let smax = smooth_c_max(&rho, 2.0 * e.sqrt())?;
        let distill_bound = Bound {
            lhs: distill.log_m,
            rhs: smin.value,
            holds: distill.log_m <= smin.value + slack,
        };
        let cost_bound = cost.as_ref().map(|c| Bound {
            lhs: smax.value,
            rhs: c.log_m,
            holds: smax.value <= c.log_m + slack,
        });
        if !distill_bound.holds {
            failures.push(format!("distillation bound at eps {e}"));
        }
        if cost_bound.as_ref().is_some_and(|b| !b.holds) {
            failures.push(format!("cost bound at eps {e}"));
        }
        entries.push(OneShotEntry {
            epsilon: e,
            distill_certificate: if ctx.witness { distill.certificate_json() } else { None },
            cost_certificate: if ctx.witness {
                cost.as_ref().and_then(OneShotResult::certificate_json)
            } else {
                None
            },
            distill,
            cost,
            smooth_c_min: smin,
            smooth_c_max_at_2_sqrt_eps: smax,
            distill_bound,
            cost_bound,
        });
    }
    ctx.emitter.emit(&OneShotBody { source, m_max, entries }, json!({}))?;
    if failures.is_empty() {
        Ok(Verdict::Ok)
    } else {
        Ok(Verdict::Failed(failures.join(", ")))
    }
}

#[derive(Serialize)]
struct SweepBody {
    source: Source,
    n_max: usize,
    records: Vec<SweepRecord>,
    /// Per epsilon, whether `gap_max` is nonincreasing in `n` (within 1e-7).
    gap_max_nonincreasing: Vec<bool>,
}

const SWEEP_CSV_HEADER: &str =
    "epsilon,n,value_max_over_n,value_min_over_n,cmax_over_n,cmin_over_n,c_r_target,gap_max,gap_min,unsmoothed_chain_holds";

fn sweep_csv(records: &[SweepRecord]) -> String {
    let f = |x: f64| cohcert::report::format_f64(x).trim_matches('"').to_string();
    let mut s = String::new();
    s.push_str(SWEEP_CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            f(r.epsilon),
            r.n,
            f(r.value_max_over_n),
            f(r.value_min_over_n),
            f(r.cmax_over_n),
            f(r.cmin_over_n),
            f(r.c_r_target),
            f(r.gap_max),
            f(r.gap_min),
            r.unsmoothed_chain_holds
        ));
    }
    s
}

pub fn sweep(ctx: &Ctx, state: &StateArgs, eps: &[f64], n_max: usize, csv: Option<&Path>) -> Result<Verdict> {
    if eps.is_empty() || eps.iter().any(|e| !(0.0..1.0).contains(e)) {
        return Err(Error::InvalidArgument("epsilons must lie in [0, 1)".into()));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("--n-max must be positive".into()));
    }
    let (rho, source) = state.load()?;
    let mut records = Vec::new();
    let mut trends = Vec::new();
    for &e in eps {
        let recs = regularized_sweep(&rho, e, n_max, ctx.exec)?;
        trends.push(recs.windows(2).all(|w| w[1].gap_max <= w[0].gap_max + 1e-7));
        records.extend(recs);
    }
    if let Some(p) = csv {
        write_atomic(p, &sweep_csv(&records))?;
    }
    let chain_ok = records.iter().all(|r| r.unsmoothed_chain_holds);
    ctx.emitter.emit(
        &SweepBody {
            source,
            n_max,
            records,
            gap_max_nonincreasing: trends,
        },
        json!({}),
    )?;
    if chain_ok {
        Ok(Verdict::Ok)
    } else {
        Ok(Verdict::Failed("unsmoothed per-copy chain violated".into()))
    }
}

#[allow(clippy::too_many_arguments)]
pub fn certify(
    ctx: &Ctx,
    dim: usize,
    count: usize,
    seed: u64,
    eps: Vec<f64>,
    tol_override: Option<f64>,
    trials: usize,
    m_max: Option<usize>,
) -> Result<Verdict> {
    if let Some(t) = tol_override {
        if t.is_nan() || t < 0.0 {
            return Err(Error::InvalidArgument(format!("--tol must be nonnegative, got {t}")));
        }
    }
    check_eps_list(&eps)?;
    let mut cfg = SuiteConfig::new(dim, count, seed);
    cfg.epsilons = eps;
    cfg.trials = trials;
    if let Some(m) = m_max {
        cfg.m_max = m;
    }
    if let Some(t) = tol_override {
        cfg.tolerances = CertTolerances::uniform(t);
    }
    let report = certify_suite(&cfg, ctx.exec)?;
    let runtimes: Vec<Value> = report
        .records
        .iter()
        .zip(&report.runtimes)
        .map(|(r, t)| json!({"name": r.name, "state": r.state, "seconds": t}))
        .collect();
    ctx.emitter.emit(&report, json!({ "check_runtimes": runtimes }))?;
    for r in report.failures() {
        eprintln!(
            "cohcert: {:?} {} (state {:?}): lhs {} rhs {} tol {}{}",
            r.status,
            r.name,
            r.state,
            r.lhs,
            r.rhs,
            r.tolerance,
            r.message.as_deref().map(|m| format!(": {m}")).unwrap_or_default()
        );
    }
    let _ = std::io::stderr().flush();
    if report.has_errors() {
        return Err(Error::Solver(format!("{} checks hit solver errors", report.counts.error)));
    }
    if !report.passed {
        return Ok(Verdict::Failed(format!("{} of {} checks failed", report.counts.fail, report.records.len())));
    }
    Ok(Verdict::Ok)
}

#[derive(Serialize)]
struct ExampleBody {
    /// `(|0><0| + |+><+|) / 2`.
    state: MatrixJson,
    c_min: f64,
    c_l1: f64,
    c_r: f64,
    c_max: f64,
}

#[derive(Serialize)]
struct DemoBody {
    seed: u64,
    trials: usize,
    margin: f64,
    violation: cohcert::measures::ViolationInstance,
    state_amplitudes: MatrixJson,
    kraus: Vec<MatrixJson>,
    mixed_example: ExampleBody,
}

pub fn demo(ctx: &Ctx, seed: u64, trials: usize) -> Result<Verdict> {
    let inst = cmin_io_violation_demo(seed, trials)?;
    let amps = ComplexMatrix::column(inst.state.amplitudes());
    let kraus = inst.channel.kraus().iter().map(MatrixJson::from).collect();
    let plus = PureState::from_real(&[1.0, 1.0])?.to_density();
    let rho = DensityMatrix::mixture(&[DensityMatrix::basis(2, 0), plus], &[0.5, 0.5])?;
    let example = ExampleBody {
        state: MatrixJson::from(rho.matrix()),
        c_min: c_min(&rho, tol::RANK),
        c_l1: c_l1(&rho),
        c_r: c_r(&rho),
        c_max: c_max(&rho)?,
    };
    ctx.emitter.emit(
        &DemoBody {
            seed,
            trials,
            margin: VIOLATION_MARGIN,
            state_amplitudes: MatrixJson::from(&amps),
            kraus,
            violation: inst,
            mixed_example: example,
        },
        json!({}),
    )?;
    Ok(Verdict::Ok)
}
