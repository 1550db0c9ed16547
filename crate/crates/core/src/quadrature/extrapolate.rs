use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fit of `D(t) = c + a·t·ln(1/t) + b·t` to small-t samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitFit {
    pub c: f64,
    pub coeff_tlogt: f64,
    pub coeff_t: f64,
    pub err_estimate: f64,
    /// Median exponent p in |D(t) - c| ~ t^p over successive samples. NaN
    /// when the sequence already sits on the limit to working precision.
    pub observed_order: f64,
}

fn basis(t: f64) -> [f64; 3] {
    [1.0, t * (1.0 / t).ln(), t]
}

/// Least squares on an m x 3 system via Householder QR with column scaling.
fn least_squares(samples: &[(f64, f64)]) -> Result<[f64; 3]> {
    let m = samples.len();
    if m < 3 {
        return Err(Error::IllConditioned(format!("{m} samples for 3 unknowns")));
    }
    let mut a: Vec<[f64; 3]> = samples.iter().map(|&(t, _)| basis(t)).collect();
    let mut y: Vec<f64> = samples.iter().map(|&(_, d)| d).collect();
    let mut scale = [0.0_f64; 3];
    for row in &a {
        for j in 0..3 {
            scale[j] = scale[j].max(row[j].abs());
        }
    }
    if scale.iter().any(|&s| s == 0.0) {
        return Err(Error::IllConditioned("zero column in the fit basis".into()));
    }
    for row in &mut a {
        for j in 0..3 {
            row[j] /= scale[j];
        }
    }
    let mut diag = [0.0_f64; 3];
    for j in 0..3 {
        let norm = (j..m).map(|i| a[i][j] * a[i][j]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::IllConditioned("rank-deficient fit basis".into()));
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..m).map(|i| a[i][j]).collect();
        v[0] -= alpha;
        let vnorm2 = v.iter().map(|x| x * x).sum::<f64>();
        if vnorm2 > 0.0 {
            for k in j..3 {
                let dot = (j..m).map(|i| v[i - j] * a[i][k]).sum::<f64>();
                let f = 2.0 * dot / vnorm2;
                for i in j..m {
                    a[i][k] -= f * v[i - j];
                }
            }
            let dot = (j..m).map(|i| v[i - j] * y[i]).sum::<f64>();
            let f = 2.0 * dot / vnorm2;
            for i in j..m {
                y[i] -= f * v[i - j];
            }
        }
        diag[j] = a[j][j];
    }
    let dmax = diag.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
    let dmin = diag.iter().fold(f64::INFINITY, |acc, d| acc.min(d.abs()));
    if dmin <= 1e-13 * dmax {
        return Err(Error::IllConditioned(format!(
            "triangular factor condition ~{:.3e}",
            dmax / dmin
        )));
    }
    let mut x = [0.0_f64; 3];
    for j in (0..3).rev() {
        let mut s = y[j];
        for k in (j + 1)..3 {
            s -= a[j][k] * x[k];
        }
        x[j] = s / a[j][j];
    }
    for j in 0..3 {
        x[j] /= scale[j];
    }
    Ok(x)
}

/// Estimate `lim_{t→0} D(t)` from samples `(t, D(t))` with strictly
/// decreasing `t < 1`. The fit uses the smallest two thirds of the samples
/// (at least four); the error estimate adds the largest fit residual to the
/// change in the limit when the largest remaining `t` is dropped.
pub fn extrapolate_limit(samples: &[(f64, f64)]) -> Result<LimitFit> {
    let n = samples.len();
    if n < 4 {
        return Err(Error::Domain(format!("need at least 4 samples, got {n}")));
    }
    for w in samples.windows(2) {
        if !(w[1].0 < w[0].0) {
            return Err(Error::Domain("sample t values must be strictly decreasing".into()));
        }
    }
    if samples.iter().any(|&(t, d)| !(t > 0.0 && t < 1.0) || !d.is_finite()) {
        return Err(Error::Domain("samples need 0 < t < 1 and finite D".into()));
    }
    let m = (2 * n).div_ceil(3).max(4).min(n);
    let subset = &samples[n - m..];
    let (t_hi, t_lo) = (subset[0].0, subset[m - 1].0);
    if t_hi / t_lo < 2.0 {
        return Err(Error::IllConditioned(format!(
            "t range [{t_lo}, {t_hi}] too narrow"
        )));
    }

    let [c, a, b] = least_squares(subset)?;
    let max_resid = subset
        .iter()
        .map(|&(t, d)| {
            let [_, l, lin] = basis(t);
            (d - (c + a * l + b * lin)).abs()
        })
        .fold(0.0_f64, f64::max);
    let [c_drop, _, _] = least_squares(&subset[1..])?;
    let err_estimate = max_resid + (c - c_drop).abs();

    let floor = 1e-13 * c.abs().max(1.0);
    let mut orders: Vec<f64> = samples
        .windows(2)
        .filter_map(|w| {
            let e0 = (w[0].1 - c).abs();
            let e1 = (w[1].1 - c).abs();
            (e0 > floor && e1 > floor).then(|| (e0 / e1).ln() / (w[0].0 / w[1].0).ln())
        })
        .collect();
    orders.sort_by(f64::total_cmp);
    let observed_order = if orders.is_empty() {
        f64::NAN
    } else {
        orders[orders.len() / 2]
    };

    Ok(LimitFit {
        c,
        coeff_tlogt: a,
        coeff_t: b,
        err_estimate,
        observed_order,
    })
}
