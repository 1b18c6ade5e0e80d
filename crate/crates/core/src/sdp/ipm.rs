//! Infeasible-start primal-dual path-following method with Nesterov-Todd
//! scaling and a Mehrotra predictor-corrector step.

use crate::linalg::eig::{cholesky, hermitian_eig_unchecked, lower_inverse};
use crate::linalg::{ComplexMatrix, C64};
use crate::sdp::standard::{inner_all, norm_all, Block, Cone, StdForm};

/// Solver status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Status {
    Optimal,
    /// Primal infeasible, certified by a dual ray.
    Infeasible,
    /// Dual infeasible, certified by a primal ray.
    Unbounded,
    IterLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iter: usize,
    /// Keep one [`IterRecord`] per iteration.
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_gap: crate::tol::GAP,
            tol_feas: crate::tol::FEAS,
            max_iter: 200,
            trace: false,
        }
    }
}

/// One row of the debug trace.
#[derive(Clone, Debug, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub complementarity: f64,
    pub rel_gap: f64,
    pub primal_infeas: f64,
    pub dual_infeas: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

impl IterRecord {
    pub const CSV_HEADER: &'static str =
        "iter,primal_obj,dual_obj,complementarity,rel_gap,primal_infeas,dual_infeas,step_primal,step_dual";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.iter,
            self.primal_obj,
            self.dual_obj,
            self.complementarity,
            self.rel_gap,
            self.primal_infeas,
            self.dual_infeas,
            self.step_primal,
            self.step_dual
        )
    }
}

pub(crate) struct StartPoint {
    pub x: Vec<Block>,
    pub y: Vec<f64>,
    pub z: Vec<Block>,
}

pub(crate) struct RawSolution {
    pub x: Vec<Block>,
    pub y: Vec<f64>,
    pub status: Status,
    pub iterations: usize,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub primal_infeas: f64,
    pub dual_infeas: f64,
    pub trace: Vec<IterRecord>,
}

/// Trace bound under which ray certificates are trusted: a certified ray
/// rules out feasible points with trace below `1 / RAY_TOL`.
const RAY_TOL: f64 = 1e-8;
const STEP_FRACTION: f64 = 0.98;

enum Scaling {
    Psd {
        /// `G` with `W = G G^dagger`, `G^{-1} X G^{-dagger} = G^dagger Z G = diag(lam)`.
        g: ComplexMatrix,
        g_inv: ComplexMatrix,
        lam: Vec<f64>,
        w: ComplexMatrix,
        /// `L^{-1}` of `X = L L^dagger` rotated into the scaling basis.
        xstep: ComplexMatrix,
        /// `L V diag(lam)^{-1}`, used for dual step lengths.
        zstep: ComplexMatrix,
    },
    Lp {
        /// `x / z`.
        d: Vec<f64>,
    },
}

fn nt_scaling(x: &Block, z: &Block) -> Option<Scaling> {
    match (x, z) {
        (Block::Psd(x), Block::Psd(z)) => {
            let l = cholesky(x)?;
            let l_inv = lower_inverse(&l);
            let inner = l.adjoint().matmul(z).matmul(&l);
            let e = hermitian_eig_unchecked(&inner);
            if e.min() <= 0.0 || !e.min().is_finite() {
                return None;
            }
            let lam: Vec<f64> = e.values.iter().map(|v| v.sqrt()).collect();
            let n = lam.len();
            let lv = l.matmul(&e.vectors);
            let g = ComplexMatrix::from_fn(n, n, |i, j| lv[(i, j)] / lam[j].sqrt());
            let vh_linv = e.vectors.adjoint().matmul(&l_inv);
            let g_inv = ComplexMatrix::from_fn(n, n, |i, j| vh_linv[(i, j)] * lam[i].sqrt());
            let w = g.matmul(&g.adjoint()).hermitize();
            let zstep = ComplexMatrix::from_fn(n, n, |i, j| lv[(i, j)] / lam[j]);
            Some(Scaling::Psd {
                g,
                g_inv,
                lam,
                w,
                xstep: l_inv,
                zstep,
            })
        }
        (Block::Lp(x), Block::Lp(z)) => {
            if x.iter().chain(z).any(|&v| !(v > 0.0)) {
                return None;
            }
            Some(Scaling::Lp {
                d: x.iter().zip(z).map(|(a, b)| a / b).collect(),
            })
        }
        _ => None,
    }
}

/// Largest `alpha` with `X + alpha dX` in the cone (capped at `1e30`).
fn max_step_primal(s: &Scaling, x: &Block, dx: &Block) -> f64 {
    match (s, x, dx) {
        (Scaling::Psd { xstep, .. }, _, Block::Psd(dx)) => {
            let m = xstep.matmul(dx).matmul(&xstep.adjoint());
            let e = hermitian_eig_unchecked(&m);
            if e.min() < 0.0 {
                -1.0 / e.min()
            } else {
                1e30
            }
        }
        (Scaling::Lp { .. }, Block::Lp(x), Block::Lp(dx)) => ratio_step(x, dx),
        _ => unreachable!(),
    }
}

fn max_step_dual(s: &Scaling, z: &Block, dz: &Block) -> f64 {
    match (s, z, dz) {
        (Scaling::Psd { zstep, .. }, _, Block::Psd(dz)) => {
            // Z + a dZ >= 0  <=>  I + a K^dagger dZ K >= 0 with K = L V diag(lam)^{-1}
            let m = zstep.adjoint().matmul(dz).matmul(zstep);
            let e = hermitian_eig_unchecked(&m);
            if e.min() < 0.0 {
                -1.0 / e.min()
            } else {
                1e30
            }
        }
        (Scaling::Lp { .. }, Block::Lp(z), Block::Lp(dz)) => ratio_step(z, dz),
        _ => unreachable!(),
    }
}

fn ratio_step(x: &[f64], dx: &[f64]) -> f64 {
    x.iter()
        .zip(dx)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&v, &d)| -v / d)
        .fold(1e30, f64::min)
}

/// Dense real Cholesky factor (lower, row-major), or `None`.
fn real_cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let ljj = d.sqrt();
        l[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
            for k in 0..j {
                s -= ri[k] * rj[k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    y
}

/// Factors the Schur complement, adding diagonal regularization if needed.
fn factor_schur(mut m: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    if let Some(l) = real_cholesky(&m, n) {
        return Some(l);
    }
    let scale = (0..n).map(|i| m[i * n + i].abs()).fold(0.0, f64::max).max(1e-300);
    let mut reg = 1e-14 * scale;
    for _ in 0..8 {
        for i in 0..n {
            m[i * n + i] += reg;
        }
        if let Some(l) = real_cholesky(&m, n) {
            return Some(l);
        }
        reg *= 100.0;
    }
    None
}

/// `M_kl = <A_k, W A_l W>` summed over cones.
fn schur_matrix(form: &StdForm, scal: &[Scaling]) -> Vec<f64> {
    let m = form.m();
    let mut mat = vec![0.0; m * m];
    for (ci, cone) in form.cones.iter().enumerate() {
        let touch = &form.touch[ci];
        match (&scal[ci], cone) {
            (Scaling::Psd { w, .. }, Cone::Psd(n)) => {
                let n = *n;
                let pattern = &form.pattern[ci];
                let mut t = ComplexMatrix::zeros(n, n);
                let mut gbuf = ComplexMatrix::zeros(n, n);
                for (li, &(l, pl)) in touch.iter().enumerate() {
                    let part_l = &form.a[l].parts[pl];
                    // rows r of A_l W
                    for (r, cols) in &part_l.by_row {
                        let row = &mut t.as_mut_slice()[r * n..(r + 1) * n];
                        row.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                        for &(j, a) in cols {
                            let wrow = w.row(j);
                            for (o, wv) in row.iter_mut().zip(wrow) {
                                *o += a * wv;
                            }
                        }
                    }
                    for &(p, q) in pattern {
                        let mut acc = C64::new(0.0, 0.0);
                        for (r, _) in &part_l.by_row {
                            acc += w[(p, *r)] * t[(*r, q)];
                        }
                        gbuf[(p, q)] = acc;
                    }
                    for &(k, pk) in &touch[li..] {
                        let part_k = &form.a[k].parts[pk];
                        let v: f64 = part_k
                            .entries
                            .iter()
                            .map(|&(i, j, a)| a.re * gbuf[(i, j)].re + a.im * gbuf[(i, j)].im)
                            .sum();
                        mat[k * m + l] += v;
                        if k != l {
                            mat[l * m + k] += v;
                        }
                    }
                }
            }
            (Scaling::Lp { d }, Cone::Nonneg(_)) => {
                for (li, &(l, pl)) in touch.iter().enumerate() {
                    let part_l = &form.a[l].parts[pl];
                    for &(k, pk) in &touch[li..] {
                        let part_k = &form.a[k].parts[pk];
                        let mut v = 0.0;
                        for &(i, _, a) in &part_l.entries {
                            for &(j, _, b) in &part_k.entries {
                                if i == j {
                                    v += a.re * b.re * d[i];
                                }
                            }
                        }
                        mat[k * m + l] += v;
                        if k != l {
                            mat[l * m + k] += v;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    mat
}

/// `W B W` (PSD) or `d * b` (LP).
fn w_apply(s: &Scaling, b: &Block) -> Block {
    match (s, b) {
        (Scaling::Psd { w, .. }, Block::Psd(b)) => Block::Psd(w.matmul(b).matmul(w).hermitize()),
        (Scaling::Lp { d }, Block::Lp(b)) => Block::Lp(d.iter().zip(b).map(|(x, y)| x * y).collect()),
        _ => unreachable!(),
    }
}

struct Direction {
    dx: Vec<Block>,
    dy: Vec<f64>,
    dz: Vec<Block>,
}

/// Solves the scaled Newton system for a given complementarity right side.
fn direction(
    form: &StdForm,
    scal: &[Scaling],
    chol: &[f64],
    rp: &[f64],
    rd: &[Block],
    rc: &[Block],
) -> Direction {
    let m = form.m();
    let h: Vec<Block> = rc
        .iter()
        .zip(rd)
        .zip(scal)
        .map(|((rc, rd), s)| {
            let mut h = rc.clone();
            h.axpy(-1.0, &w_apply(s, rd));
            h
        })
        .collect();
    let ah = form.apply(&h);
    let rhs: Vec<f64> = rp.iter().zip(&ah).map(|(a, b)| a - b).collect();
    let dy = cholesky_solve(chol, m, &rhs);
    let aty = form.adjoint(&dy);
    let mut dx = h;
    let mut dz = rd.to_vec();
    for ((dxb, dzb), (at, s)) in dx.iter_mut().zip(dz.iter_mut()).zip(aty.iter().zip(scal)) {
        dxb.axpy(1.0, &w_apply(s, at));
        dzb.axpy(-1.0, at);
        if let Block::Psd(mm) = dxb {
            *mm = mm.hermitize();
        }
        if let Block::Psd(mm) = dzb {
            *mm = mm.hermitize();
        }
    }
    Direction { dx, dy, dz }
}

/// Corrector right side `G L_lam^{-1}(2 sigma mu I - 2 lam^2 - (dX~ dZ~ + dZ~ dX~)) G^dagger`.
fn corrector_rc(s: &Scaling, x: &Block, z: &Block, dxa: &Block, dza: &Block, sigma_mu: f64) -> Block {
    match (s, x, z, dxa, dza) {
        (Scaling::Psd { g, g_inv, lam, .. }, _, _, Block::Psd(dxa), Block::Psd(dza)) => {
            let n = lam.len();
            let dxt = g_inv.matmul(dxa).matmul(&g_inv.adjoint());
            let dzt = g.adjoint().matmul(dza).matmul(g);
            let prod = dxt.matmul(&dzt);
            let mut r = ComplexMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let mut v = -(prod[(i, j)] + prod[(j, i)].conj());
                    if i == j {
                        v += C64::new(2.0 * sigma_mu - 2.0 * lam[i] * lam[i], 0.0);
                    }
                    r[(i, j)] = v / (lam[i] + lam[j]);
                }
            }
            Block::Psd(g.matmul(&r).matmul(&g.adjoint()).hermitize())
        }
        (Scaling::Lp { .. }, Block::Lp(x), Block::Lp(z), Block::Lp(dxa), Block::Lp(dza)) => Block::Lp(
            (0..x.len())
                .map(|i| (sigma_mu - x[i] * z[i] - dxa[i] * dza[i]) / z[i])
                .collect(),
        ),
        _ => unreachable!(),
    }
}

fn default_start(form: &StdForm) -> StartPoint {
    let mut x = Vec::new();
    let mut z = Vec::new();
    for (ci, cone) in form.cones.iter().enumerate() {
        let n = cone.dim() as f64;
        let mut xi = 10f64.max(n.sqrt());
        let mut eta = 10f64.max(n.sqrt());
        for (k, con) in form.a.iter().enumerate() {
            let fa = con.frobenius_on(ci);
            if fa > 0.0 {
                xi = xi.max(n * (1.0 + form.b[k].abs()) / (1.0 + fa));
                eta = eta.max(fa);
            }
        }
        eta = eta.max(form.c[ci].norm_sq().sqrt());
        x.push(cone.identity(xi));
        z.push(cone.identity(eta));
    }
    StartPoint {
        x,
        y: vec![0.0; form.m()],
        z,
    }
}

fn psd_lambda_max(b: &Block) -> f64 {
    match b {
        Block::Psd(m) => hermitian_eig_unchecked(m).max(),
        Block::Lp(v) => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

fn dual_ray(form: &StdForm, y: &[f64]) -> bool {
    let by: f64 = form.b.iter().zip(y).map(|(a, b)| a * b).sum();
    if !(by > 0.0) {
        return false;
    }
    let yhat: Vec<f64> = y.iter().map(|v| v / by).collect();
    form.adjoint(&yhat).iter().all(|blk| psd_lambda_max(blk) <= RAY_TOL)
}

fn primal_ray(form: &StdForm, x: &[Block]) -> bool {
    let cx = form.objective(x);
    if !(cx < 0.0) {
        return false;
    }
    let ax = form.apply(x);
    ax.iter().map(|v| v.abs()).fold(0.0, f64::max) / (-cx) <= RAY_TOL
}

pub(crate) fn solve(form: &StdForm, opts: &SolveOptions, start: Option<StartPoint>) -> RawSolution {
    let StartPoint {
        mut x,
        mut y,
        mut z,
    } = start.unwrap_or_else(|| default_start(form));
    let nu = form.nu();
    let bnorm = form.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let cnorm = norm_all(&form.c);
    let mut trace = Vec::new();
    let mut status = Status::IterLimit;
    let mut iterations = 0;
    let mut stalls = 0;
    let (mut ap, mut ad) = (0.0, 0.0);
    // iterate with the smallest merit, returned when the method stalls
    let mut best: Option<(f64, RawSolution)> = None;

    loop {
        let ax = form.apply(&x);
        let rp: Vec<f64> = form.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = form.adjoint(&y);
        let rd: Vec<Block> = form
            .c
            .iter()
            .zip(&aty)
            .zip(&z)
            .map(|((c, at), z)| {
                let mut r = c.clone();
                r.axpy(-1.0, at);
                r.axpy(-1.0, z);
                r
            })
            .collect();
        let pobj = form.objective(&x);
        let dobj: f64 = form.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let comp = inner_all(&x, &z);
        let mu = comp / nu;
        let pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + bnorm);
        let dinf = norm_all(&rd) / (1.0 + cnorm);
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs());
        if opts.trace {
            trace.push(IterRecord {
                iter: iterations,
                primal_obj: pobj,
                dual_obj: dobj,
                complementarity: comp,
                rel_gap,
                primal_infeas: pinf,
                dual_infeas: dinf,
                step_primal: ap,
                step_dual: ad,
            });
        }
        let finish = |x: Vec<Block>, y: Vec<f64>, status, iterations, trace| RawSolution {
            x,
            y,
            status,
            iterations,
            primal_obj: pobj,
            dual_obj: dobj,
            primal_infeas: pinf,
            dual_infeas: dinf,
            trace,
        };
        if pinf <= opts.tol_feas
            && dinf <= opts.tol_feas
            && rel_gap <= opts.tol_gap
            && comp / (1.0 + pobj.abs()) <= opts.tol_gap
        {
            return finish(x, y, Status::Optimal, iterations, trace);
        }
        let ynorm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if ynorm > 1e3 && dual_ray(form, &y) {
            return finish(x, y, Status::Infeasible, iterations, trace);
        }
        let xnorm = x.iter().fold(0.0f64, |m, b| m.max(b.max_abs()));
        if xnorm > 1e3 && primal_ray(form, &x) {
            return finish(x, y, Status::Unbounded, iterations, trace);
        }
        let merit = pinf.max(dinf).max(rel_gap).max(comp.abs() / (1.0 + pobj.abs()));
        if best.as_ref().is_none_or(|(m, _)| merit < *m) {
            best = Some((merit, finish(x.clone(), y.clone(), Status::IterLimit, iterations, Vec::new())));
        }
        if iterations >= opts.max_iter || stalls >= 5 {
            if dual_ray(form, &y) {
                status = Status::Infeasible;
            } else if primal_ray(form, &x) {
                status = Status::Unbounded;
            }
            if status == Status::IterLimit {
                if let Some((_, mut b)) = best {
                    b.iterations = iterations;
                    b.trace = trace;
                    return b;
                }
            }
            return finish(x, y, status, iterations, trace);
        }
        iterations += 1;

        let Some(scal) = x
            .iter()
            .zip(&z)
            .map(|(x, z)| nt_scaling(x, z))
            .collect::<Option<Vec<_>>>()
        else {
            stalls = usize::MAX;
            continue;
        };
        let Some(chol) = factor_schur(schur_matrix(form, &scal), form.m()) else {
            stalls = usize::MAX;
            continue;
        };

        // predictor
        let rc_aff: Vec<Block> = x
            .iter()
            .map(|b| {
                let mut r = b.clone();
                r.axpy(-2.0, b);
                r
            })
            .collect(); // -X
        let aff = direction(form, &scal, &chol, &rp, &rd, &rc_aff);
        let step_len = |d: &Direction| {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for (i, s) in scal.iter().enumerate() {
                ap = ap.min(max_step_primal(s, &x[i], &d.dx[i]));
                ad = ad.min(max_step_dual(s, &z[i], &d.dz[i]));
            }
            (ap, ad)
        };
        let (ap_aff, ad_aff) = step_len(&aff);
        let (ap_aff, ad_aff) = (ap_aff.min(1.0), ad_aff.min(1.0));
        let mut comp_aff = 0.0;
        for i in 0..x.len() {
            let mut xa = x[i].clone();
            xa.axpy(ap_aff, &aff.dx[i]);
            let mut za = z[i].clone();
            za.axpy(ad_aff, &aff.dz[i]);
            comp_aff += xa.inner(&za);
        }
        let mu_aff = (comp_aff / nu).max(0.0);
        let ratio = if mu > 0.0 { mu_aff / mu } else { 0.0 };
        let sigma = ratio.powi(3).clamp(0.0, 1.0);

        // corrector
        let rc: Vec<Block> = (0..x.len())
            .map(|i| corrector_rc(&scal[i], &x[i], &z[i], &aff.dx[i], &aff.dz[i], sigma * mu))
            .collect();
        let dir = direction(form, &scal, &chol, &rp, &rd, &rc);
        let (apm, adm) = step_len(&dir);
        ap = (STEP_FRACTION * apm).min(1.0);
        ad = (STEP_FRACTION * adm).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            stalls += 1;
        } else {
            stalls = 0;
        }
        for i in 0..x.len() {
            x[i].axpy(ap, &dir.dx[i]);
            z[i].axpy(ad, &dir.dz[i]);
            if let Block::Psd(m) = &mut x[i] {
                *m = m.hermitize();
            }
            if let Block::Psd(m) = &mut z[i] {
                *m = m.hermitize();
            }
        }
        for (yk, dk) in y.iter_mut().zip(&dir.dy) {
            *yk += ad * dk;
        }
    }
}
