use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::gauss::{WG, WGK, XGK};
use super::{compensated_sum, Estimate, QuadSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest error first; ties broken by position so the order is total.
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn sample<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteIntegrand { x, value: v })
    }
}

/// 15-point Kronrod estimate with the embedded 7-point Gauss error.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Panel> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = sample(f, c)?;
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs = kron.abs();
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = sample(f, c - dx)?;
        let f2 = sample(f, c + dx)?;
        kron += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * h;
    let roundoff = 50.0 * f64::EPSILON * abs * h.abs();
    let err = ((kron - gauss) * h).abs().max(roundoff);
    Ok(Panel { a, b, value, err })
}

/// Requested accuracy, floored at what double precision can deliver.
fn tolerance(spec: &QuadSpec, total: f64) -> f64 {
    spec.abs_tol
        .max(spec.rel_tol * total.abs())
        .max(64.0 * f64::EPSILON * total.abs())
}

/// Adaptive integration of `f` over [a, b].
pub fn integrate_1d<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<Estimate> {
    integrate_1d_points(f, &[a, b], spec)
}

/// Adaptive integration over [points[0], points[last]] with the interior
/// points used as forced panel boundaries (kinks, peaks).
pub fn integrate_1d_points<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    spec: &QuadSpec,
) -> Result<Estimate> {
    if points.len() < 2 {
        return Err(Error::Domain("need at least two integration limits".into()));
    }
    let lo = points[0];
    let hi = points[points.len() - 1];
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty or reversed interval [{lo}, {hi}]")));
    }
    let mut breaks: Vec<f64> = points
        .iter()
        .copied()
        .filter(|&x| x >= lo && x <= hi && x.is_finite())
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut heap = BinaryHeap::new();
    let mut frozen = Vec::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        let p = gk15(&mut f, w[0], w[1])?;
        total += p.value;
        total_err += p.err;
        heap.push(p);
    }

    loop {
        let tol = tolerance(spec, total);
        if total_err <= tol {
            break;
        }
        if heap.len() + frozen.len() >= spec.max_subdivisions {
            return Err(Error::MaxSubdivisions {
                subdivisions: heap.len() + frozen.len(),
                value: total,
                err: total_err,
            });
        }
        let Some(worst) = heap.pop() else {
            // Nothing left that can be refined; accept what roundoff allows.
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            frozen.push(worst);
            continue;
        }
        let left = gk15(&mut f, worst.a, mid)?;
        let right = gk15(&mut f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }

    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(frozen);
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = compensated_sum(panels.iter().map(|p| p.value));
    let err = panels.iter().map(|p| p.err).sum::<f64>();
    if err > tolerance(spec, value) {
        return Err(Error::MaxSubdivisions {
            subdivisions: panels.len(),
            value,
            err,
        });
    }
    Ok(Estimate { value, err })
}

/// Result of integrating over (0, 1] on dyadic panels.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicEstimate {
    pub value: f64,
    pub err: f64,
    /// Contribution of panel (2^{-k-1}, 2^{-k}], indexed by k.
    pub panels: Vec<f64>,
    /// Contribution of (0, 2^{-max_level}], from the linear extension of f.
    pub tail: f64,
}

/// Integrate `f` over (0, 1] on the dyadic panels (2^{-k-1}, 2^{-k}],
/// k < `max_level`. Below 2^{-max_level} the integrand is extended linearly
/// from its values at 2^{-max_level} and 2^{-max_level-1}. Partial sums are
/// accumulated from the smallest panel to the largest.
///
/// `breaks` are extra interior kink locations, honoured inside whichever
/// panel contains them.
pub fn integrate_dyadic<F: FnMut(f64) -> f64>(
    mut f: F,
    max_level: usize,
    breaks: &[f64],
    spec: &QuadSpec,
) -> Result<DyadicEstimate> {
    if max_level == 0 || max_level > 60 {
        return Err(Error::Domain(format!("dyadic depth {max_level} out of range")));
    }
    let mut panels = vec![0.0; max_level];
    let mut err = 0.0;
    for k in (0..max_level).rev() {
        let b = 0.5_f64.powi(k as i32);
        let a = 0.5 * b;
        let mut pts = vec![a];
        pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
        pts.push(b);
        let local = QuadSpec {
            abs_tol: spec.abs_tol * (b - a),
            ..*spec
        };
        let est = integrate_1d_points(&mut f, &pts, &local)?;
        panels[k] = est.value;
        err += est.err;
    }
    let h = 0.5_f64.powi(max_level as i32);
    let fh = sample(&mut f, h)?;
    let fh2 = sample(&mut f, 0.5 * h)?;
    let f0 = 2.0 * fh2 - fh;
    let tail = 0.5 * h * (f0 + fh);
    err += 0.5 * h * (fh - f0).abs();
    let value = compensated_sum(std::iter::once(tail).chain(panels.iter().rev().copied()));
    Ok(DyadicEstimate {
        value,
        err,
        panels,
        tail,
    })
}
