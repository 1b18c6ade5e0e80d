//! Per-copy smoothed quantities of `rho^{tensor n}` for small `n`.

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{tensor_power, DensityMatrix};
use crate::measures::{c_max, c_min, c_r, smooth_c_max, smooth_c_min};
use crate::par::{try_map_indexed, Execution};
use crate::tol;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub n: usize,
    pub epsilon: f64,
    /// `C_max^eps(rho^n) / n`.
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub value_max_over_n: f64,
    /// `C_min^eps(rho^n) / n`.
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub value_min_over_n: f64,
    pub cmax_over_n: f64,
    pub cmin_over_n: f64,
    pub c_r_target: f64,
    /// `|C_max^eps(rho^n) / n - C_r(rho)|`.
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub gap_max: f64,
    /// `|C_min^eps(rho^n) / n - C_r(rho)|`.
    #[serde(serialize_with = "crate::report::ser_f64")]
    pub gap_min: f64,
    /// `C_min(rho^n)/n <= C_r(rho) <= C_max(rho^n)/n + 1e-7`.
    pub unsmoothed_chain_holds: bool,
}

/// Records for `n = 1..=n_max`. `C_r` is additive, so the per-copy target is
/// `C_r(rho)` itself; the smoothed values are reported, not ordered.
pub fn regularized_sweep(rho: &DensityMatrix, eps: f64, n_max: usize, exec: Execution) -> Result<Vec<SweepRecord>> {
    let powers = (1..=n_max).map(|n| tensor_power(rho, n)).collect::<Result<Vec<_>>>()?;
    let target = c_r(rho);
    try_map_indexed(exec, n_max, |k| {
        let n = k + 1;
        let r = &powers[k];
        let nf = n as f64;
        let vmax = smooth_c_max(r, eps)?.value / nf;
        let vmin = if eps < 1.0 { smooth_c_min(r, eps)?.value / nf } else { f64::INFINITY };
        let cmax = c_max(r)? / nf;
        let cmin = c_min(r, tol::RANK) / nf;
        Ok(SweepRecord {
            n,
            epsilon: eps,
            value_max_over_n: vmax,
            value_min_over_n: vmin,
            cmax_over_n: cmax,
            cmin_over_n: cmin,
            c_r_target: target,
            gap_max: (vmax - target).abs(),
            gap_min: (vmin - target).abs(),
            unsmoothed_chain_holds: cmin <= target + 1e-7 && target <= cmax + 1e-7,
        })
    })
}
