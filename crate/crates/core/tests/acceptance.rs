//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N ...: PASS|FAIL` line with the worst observed margin.
//!
//! Reference values come from oracles computed here: closed forms for pure
//! states and qubits, `log2 d` for maximally coherent states, the ordering
//! relations themselves, and direct arithmetic on returned objects.

use std::time::{Duration, Instant};

use cohcert::certify::{certify_suite, SuiteConfig};
use cohcert::channels::{classify, maximally_coherent, optimal_overlap_channel};
use cohcert::games::{build_cmax_instrument_from, p_succ_ico, p_succ_opt, simulate_game};
use cohcert::linalg::random::derive_seed;
use cohcert::linalg::{hermitian_eig, random_density_matrix, random_pure_state, ComplexMatrix, DensityMatrix, PureState};
use cohcert::measures::{
    c_l1, c_max, c_max_with_certificate, c_min, c_r, cmin_io_violation_demo, smooth_c_max, smooth_c_min,
};
use cohcert::oneshot::{one_shot_cost_mio, one_shot_distill_mio, regularized_sweep, OneShotResult};
use cohcert::par::Execution;
use cohcert::report::body_text;
use cohcert::sdp::SolveOptions;
use cohcert::tol;

const EX: Execution = Execution::Parallel;

fn report(n: u32, what: &str, ok: bool, detail: &str) {
    println!("criterion {n:>2} [{what}]: {} ({detail})", if ok { "PASS" } else { "FAIL" });
}

fn seed(tag: u64, d: usize, k: usize) -> u64 {
    derive_seed(derive_seed(tag, d as u64), k as u64)
}

#[test]
fn criterion_01_pure_state_closed_forms() {
    let start = Instant::now();
    let (mut worst_max, mut worst_min) = (0.0f64, 0.0f64);
    for d in 2..=6 {
        for k in 0..100 {
            let psi = random_pure_state(d, seed(1, d, k)).unwrap();
            let a = psi.amplitudes();
            let l1: f64 = a.iter().map(|z| z.norm()).sum();
            let pmax = a.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
            let rho = psi.to_density();
            worst_max = worst_max.max((c_max(&rho).unwrap() - 2.0 * l1.log2()).abs());
            worst_min = worst_min.max((c_min(&rho, tol::RANK) + pmax.log2()).abs());
        }
    }
    let t = start.elapsed();
    let ok = worst_max <= 1e-6 && worst_min <= 1e-9 && t <= Duration::from_secs(30);
    report(1, "pure-state closed forms", ok, &format!("C_max err {worst_max:.2e}, C_min err {worst_min:.2e}, {t:.1?}"));
    assert!(ok);
}

#[test]
fn criterion_02_maximally_coherent_states() {
    let mut worst = 0.0f64;
    for d in 2..=8 {
        let rho = maximally_coherent(d, None).unwrap().to_density();
        let target = (d as f64).log2();
        for v in [c_max(&rho).unwrap(), c_min(&rho, tol::RANK), c_r(&rho)] {
            worst = worst.max((v - target).abs());
        }
    }
    let ok = worst <= 1e-7;
    report(2, "maximally coherent states", ok, &format!("max |value - log2 d| = {worst:.2e}"));
    assert!(ok);
}

#[test]
fn criterion_03_inequality_chain() {
    let mut worst = f64::NEG_INFINITY;
    for d in [2usize, 3, 4, 6] {
        for k in 0..200 {
            let rho = random_density_matrix(d, 1 + k % d, seed(3, d, k)).unwrap();
            let (lo, mid, hi) = (c_min(&rho, tol::RANK), c_r(&rho), c_max(&rho).unwrap());
            let top = (1.0 + c_l1(&rho)).log2();
            worst = worst.max(lo - mid).max(mid - hi).max(hi - top);
        }
    }
    let ok = worst <= 3e-7;
    report(3, "C_min <= C_r <= C_max <= log2(1 + C_l1)", ok, &format!("largest violation {worst:.2e}"));
    assert!(ok);
}

/// Residuals of the `C_max` certificate recomputed from its parts.
fn certificate_residuals(rho: &DensityMatrix) -> (f64, f64, f64) {
    let (_, cert) = c_max_with_certificate(rho).unwrap();
    let d = rho.dim();
    let slack = &ComplexMatrix::from_diagonal(&cert.s) - rho.matrix();
    let primal = (-hermitian_eig(&slack.hermitize()).unwrap().min()).max(0.0);
    let tau_psd = (-hermitian_eig(&cert.tau.hermitize()).unwrap().min()).max(0.0);
    let tau_diag = cert.tau.real_diagonal().iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    let lower = rho.matrix().trace_product(&cert.tau).re;
    let gap = (cert.s.iter().sum::<f64>() - lower) / (1.0 + lower.abs());
    let _ = d;
    (gap, primal.max(tau_psd).max(tau_diag), cert.s.iter().fold(0.0f64, |m, v| m.max(-v)))
}

#[test]
fn criterion_04_sdp_certificates() {
    let (mut gap, mut feas) = (0.0f64, 0.0f64);
    for d in [2usize, 3, 4, 6] {
        for k in 0..100 {
            let rho = random_density_matrix(d, 1 + k % d, seed(4, d, k)).unwrap();
            let (g, f, s) = certificate_residuals(&rho);
            gap = gap.max(g);
            feas = feas.max(f).max(s);
        }
    }
    for d in [2usize, 3] {
        for k in 0..10 {
            let rho = random_density_matrix(d, d, seed(41, d, k)).unwrap();
            for eps in [0.01, 0.05, 0.1] {
                let a = smooth_c_max(&rho, eps).unwrap();
                let b = smooth_c_min(&rho, eps).unwrap();
                gap = gap.max(a.gap).max(b.gap);
            }
        }
    }
    let mut qubit = 0.0f64;
    for k in 0..100 {
        let rho = random_density_matrix(2, 1 + k % 2, seed(42, 2, k)).unwrap();
        let b = rho.matrix()[(0, 1)].norm();
        qubit = qubit.max((c_max(&rho).unwrap().exp2() - (1.0 + 2.0 * b)).abs());
    }
    let ok = gap <= 1e-8 && feas <= 1e-8 && qubit <= 1e-7;
    report(
        4,
        "SDP certificates",
        ok,
        &format!("relative gap {gap:.2e}, residual {feas:.2e}, qubit 1+2|b| err {qubit:.2e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_05_optimal_overlap_channel() {
    let (mut worst, mut members) = (0.0f64, true);
    for d in [2usize, 3, 4] {
        let target = maximally_coherent(d, None).unwrap();
        for k in 0..50 {
            let rho = random_density_matrix(d, 1 + k % d, seed(5, d, k)).unwrap();
            let (cmax, cert) = c_max_with_certificate(&rho).unwrap();
            let ch = optimal_overlap_channel(&rho, &cert).unwrap();
            let out = ch.apply(&rho).unwrap();
            let v = target.amplitudes();
            let f2: f64 = v
                .iter()
                .enumerate()
                .flat_map(|(i, a)| v.iter().enumerate().map(move |(j, b)| (i, j, a.conj() * b)))
                .map(|(i, j, w)| (w * out.matrix()[(i, j)]).re)
                .sum();
            worst = worst.max((d as f64 * f2 - cmax.exp2()).abs());
            let cls = classify(&ch, 1e-8);
            members &= cls.is_sio && cls.is_io && cls.is_dio;
        }
    }
    let ok = worst <= 1e-6 && members;
    report(5, "d F(E*(rho), Psi+)^2 = 2^C_max, E* in SIO/IO/DIO", ok, &format!("err {worst:.2e}, membership {members}"));
    assert!(ok);
}

#[test]
fn criterion_06_discrimination_game() {
    let opts = SolveOptions::default();
    let (mut ico, mut ratio, mut mc_ok, mut slowest) = (0.0f64, 0.0f64, true, Duration::ZERO);
    for d in 2..=6 {
        let start = Instant::now();
        for k in 0..5 {
            let rho = random_density_matrix(d, 1 + k % d, seed(6, d, k)).unwrap();
            let (cmax, cert) = c_max_with_certificate(&rho).unwrap();
            let inst = build_cmax_instrument_from(&rho, &cert).unwrap();
            let p_ico = p_succ_ico(&inst, &opts).unwrap();
            ico = ico.max((p_ico - 1.0 / d as f64).abs());
            let best = p_succ_opt(&inst, &rho, &opts).unwrap();
            ratio = ratio.max((best.value / p_ico - cmax.exp2()).abs());
            let sim = simulate_game(&inst, &best.povm, &rho, 100_000, seed(61, d, k), EX).unwrap();
            let sigma = (sim.exact * (1.0 - sim.exact) / 1e5).sqrt();
            mc_ok &= (sim.frequency - sim.exact).abs() <= 5.0 * sigma + 1e-12;
        }
        slowest = slowest.max(start.elapsed());
    }
    let ok = ico <= 1e-7 && ratio <= 1e-5 && mc_ok && slowest <= Duration::from_secs(60);
    report(
        6,
        "advantage ratio and Monte Carlo",
        ok,
        &format!("|p_ico - 1/d| {ico:.2e}, |ratio - 2^C_max| {ratio:.2e}, 5-sigma {mc_ok}, slowest d {slowest:.1?}"),
    );
    assert!(ok);
}

#[test]
fn criterion_07_mixed_c_min_example() {
    let plus = PureState::from_real(&[1.0, 1.0]).unwrap().to_density();
    let rho = DensityMatrix::mixture(&[DensityMatrix::basis(2, 0), plus], &[0.5, 0.5]).unwrap();
    let (cmin, l1) = (c_min(&rho, tol::RANK), c_l1(&rho));
    let ok = cmin == 0.0 && l1 > 0.0;
    report(7, "C_min = 0 with C_l1 > 0", ok, &format!("C_min {cmin:e}, C_l1 {l1}"));
    assert!(ok);
}

#[test]
fn criterion_08_smoothing() {
    let (mut zero, mut mono, mut relation) = (0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for d in [2usize, 3] {
        for k in 0..50 {
            let rho = random_density_matrix(d, 1 + k % d, seed(8, d, k)).unwrap();
            let cmax = c_max(&rho).unwrap();
            let cmin = c_min(&rho, tol::RANK);
            zero = zero
                .max((smooth_c_max(&rho, 0.0).unwrap().value - cmax).abs())
                .max((smooth_c_min(&rho, 0.0).unwrap().value - cmin).abs());
            let (mut pmax, mut pmin) = (cmax, cmin);
            for eps in [0.01, 0.05, 0.1] {
                let hi = smooth_c_max(&rho, eps).unwrap().value;
                let lo = smooth_c_min(&rho, eps).unwrap().value;
                mono = mono.max(hi - pmax).max(pmin - lo);
                relation = relation.max(lo - (hi - (1.0 - 2.0 * eps).log2()));
                (pmax, pmin) = (hi, lo);
            }
        }
    }
    let ok = zero <= 1e-7 && mono <= 1e-7 && relation <= 1e-6;
    report(
        8,
        "smoothing consistency, monotonicity, min/max relation",
        ok,
        &format!("eps=0 err {zero:.2e}, monotonicity violation {mono:.2e}, relation violation {relation:.2e}"),
    );
    assert!(ok);
}

fn certificate_ok(r: &OneShotResult) -> bool {
    r.mio_residual <= 1e-8
        && r.tp_residual <= 1e-8
        && r.certificate.as_ref().is_none_or(|c| c.psd_residual() <= 1e-8)
}

#[test]
fn criterion_09_one_shot_bounds() {
    let start = Instant::now();
    let (mut cost_v, mut dist_v, mut certs) = (f64::NEG_INFINITY, f64::NEG_INFINITY, true);
    for (d, count) in [(2usize, 25usize), (3, 10)] {
        for k in 0..count {
            let rho = random_density_matrix(d, 1 + k % d, seed(9, d, k)).unwrap();
            for eps in [0.01, 0.05] {
                let cost = one_shot_cost_mio(&rho, eps, 8, EX).unwrap();
                let dist = one_shot_distill_mio(&rho, eps, 8, EX).unwrap();
                certs &= certificate_ok(&cost) && certificate_ok(&dist);
                let lhs = smooth_c_max(&rho, 2.0 * eps.sqrt()).unwrap().value;
                cost_v = cost_v.max(lhs - cost.log_m);
                dist_v = dist_v.max(dist.log_m - smooth_c_min(&rho, eps).unwrap().value);
            }
        }
    }
    let t = start.elapsed();
    let ok = cost_v <= 1e-6 && dist_v <= 1e-6 && certs && t <= Duration::from_secs(600);
    report(
        9,
        "one-shot cost and distillation bounds",
        ok,
        &format!("cost violation {cost_v:.2e}, distillation violation {dist_v:.2e}, certificates {certs}, {t:.1?}"),
    );
    assert!(ok);
}

#[test]
fn criterion_10_regularization_trend() {
    let (mut trend_fail, mut chain_ok) = (Vec::new(), true);
    for k in 0..10 {
        let rho = random_density_matrix(2, 2, seed(10, 2, k)).unwrap();
        let recs = regularized_sweep(&rho, 0.1, 4, EX).unwrap();
        chain_ok &= recs.iter().all(|r| {
            r.cmin_over_n <= r.c_r_target && r.c_r_target <= r.cmax_over_n + 1e-7
        });
        let gaps: Vec<f64> = recs.iter().map(|r| r.gap_max).collect();
        if gaps.windows(2).any(|w| w[1] > w[0]) {
            trend_fail.push((k, gaps));
        }
    }
    let ok = trend_fail.is_empty() && chain_ok;
    let first = trend_fail
        .first()
        .map(|(k, g)| format!("; state {k} gaps {:?}", g.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>()))
        .unwrap_or_default();
    report(
        10,
        "gap |C^eps_max(rho^n)/n - C_r| nonincreasing, unsmoothed chain",
        ok,
        &format!("{} of 10 states with a growing gap, unsmoothed chain {chain_ok}{first}", trend_fail.len()),
    );
    assert!(chain_ok, "unsmoothed per-copy chain violated");
    assert!(trend_fail.is_empty(), "gap not nonincreasing for {} states", trend_fail.len());
}

#[test]
fn criterion_11_io_raises_average_c_min() {
    // documented seed set: {0}, 2000 trials
    let inst = cmin_io_violation_demo(0, 2000).unwrap();
    let psi = inst.state.to_density();
    let before = c_min(&psi, tol::RANK);
    let d = psi.dim();
    let mut completeness = ComplexMatrix::zeros(d, d);
    let mut io = true;
    let mut after = 0.0;
    for k in inst.channel.kraus() {
        completeness = &completeness + &k.adjoint().matmul(k);
        for j in 0..d {
            io &= (0..d).filter(|&i| k[(i, j)].norm() > 1e-12).count() <= 1;
        }
        let out = k.matmul(psi.matrix()).matmul(&k.adjoint());
        let p = out.trace().re;
        if p > 1e-15 {
            after += p * c_min(&DensityMatrix::new(out.scale(1.0 / p)).unwrap(), tol::RANK);
        }
    }
    let complete = (&completeness - &ComplexMatrix::identity(d)).max_abs() <= 1e-12;
    let ok = io && complete && after > before + 1e-3;
    report(
        11,
        "IO raising the average C_min",
        ok,
        &format!("sum p_i C_min(rho_i) = {after:.6} vs C_min(psi) = {before:.6}, IO {io}, complete {complete}"),
    );
    assert!(ok);
}

#[test]
fn criterion_12_certify_determinism() {
    let cfg = SuiteConfig {
        trials: 20_000,
        m_max: 4,
        ..SuiteConfig::new(2, 4, 7)
    };
    let a = body_text(&certify_suite(&cfg, Execution::Parallel).unwrap()).unwrap();
    let b = body_text(&certify_suite(&cfg, Execution::Sequential).unwrap()).unwrap();
    let ok = a == b;
    report(12, "byte-identical certify bodies", ok, &format!("{} bytes", a.len()));
    assert!(ok);
}
