//! Heat content H_Ω(t), its decomposition
//! |Ω| - H = |Ω|φ(t) + (Per/π) t Ψ(t) - t R(t),
//! and the constant C_Ω = lim (|Ω| - H - (Per/π) t ln(1/t)) / t.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kappa, radial_kernel, tanh_deficit, tanh_pow_minus_one, unit_sphere_area, Dim};
use crate::quadrature::{
    extrapolate_limit, integrate_1d, integrate_1d_points, LimitFit, QuadSpec,
};
use crate::shapes::gamma::weighted_gamma_dyadic;
use crate::shapes::moment::rectangle_heat_content;
use crate::shapes::{gamma_weighted_integral, integrate_weighted, ShapeSpec};

/// Accuracy requested for J_d.
const J_TOL: f64 = 1e-13;
/// Allowed |C_formula - C_closed| before the report is rejected.
const CLOSED_FORM_GAP: f64 = 1e-6;

fn tight() -> QuadSpec {
    QuadSpec {
        abs_tol: 1e-14,
        rel_tol: 1e-14,
        ..QuadSpec::default()
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("t must be positive and finite, got {t}")))
    }
}

/// Radii t·4^k (k ≥ -1) below `upper`, where the kernel changes scale.
fn kernel_breaks(t: f64, upper: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = 0.25 * t;
    while r < upper {
        out.push(r);
        r *= 4.0;
    }
    out
}

/// H_Ω(t) = ∫ p_t(z) g_Ω(z) dz, clamped to [0, |Ω|].
pub fn heat_content(shape: &ShapeSpec, t: f64, quad: &QuadSpec) -> Result<f64> {
    check_t(t)?;
    quad.validate()?;
    let geo = shape.geometry();
    let value = match shape {
        ShapeSpec::Rectangle { half_widths } => rectangle_heat_content(*half_widths, t, quad)?.value,
        _ => {
            let d = geo.dim;
            integrate_weighted(
                shape,
                |r| radial_kernel(d, t, r),
                &kernel_breaks(t, geo.support_radius),
                quad,
            )?
            .value
        }
    };
    Ok(value.clamp(0.0, geo.volume))
}

/// ∫_0^1 cos^{d-1}(α v) dv.
fn cos_power_mean(d: Dim, alpha: f64) -> Result<f64> {
    Ok(match d.get() {
        1 => 1.0,
        2 => {
            if alpha < 1e-4 {
                let a2 = alpha * alpha;
                1.0 - a2 / 6.0 + a2 * a2 / 120.0
            } else {
                alpha.sin() / alpha
            }
        }
        n => {
            let p = n as i32 - 1;
            integrate_1d(|v: f64| (alpha * v).cos().powi(p), 0.0, 1.0, &tight())?.value
        }
    })
}

/// φ(t)/t, finite as t → 0 where it tends to `phi_slope`.
pub fn phi_over_t(shape: &ShapeSpec, t: f64) -> Result<f64> {
    check_t(t)?;
    let geo = shape.geometry();
    let d = geo.dim;
    let ell = geo.support_radius;
    let x = t / ell;
    let alpha = x.atan();
    // α/t = (atan(x)/x) / ℓ
    let ratio = if x < 1e-8 { 1.0 } else { alpha / x };
    Ok(unit_sphere_area(d) * kappa(d) * ratio / ell * cos_power_mean(d, alpha)?)
}

/// Kernel mass outside the support ball: φ(t) = ∫_{|z| > ℓ} p_t(z) dz.
pub fn phi(shape: &ShapeSpec, t: f64) -> Result<f64> {
    Ok(t * phi_over_t(shape, t)?)
}

/// lim_{t→0} φ(t)/t = A_d κ_d / ℓ.
pub fn phi_slope(shape: &ShapeSpec) -> f64 {
    let geo = shape.geometry();
    unit_sphere_area(geo.dim) * kappa(geo.dim) / geo.support_radius
}

/// Ψ(t) and F(t) = Ψ(t) - ln(1/t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiF {
    /// Direct quadrature of ∫_0^{ℓ/t} r^d (1+r²)^{-(d+1)/2} dr.
    pub psi: f64,
    /// ln(ℓ + √(ℓ²+t²)) + ∫_0^{asinh(ℓ/t)} (tanh^d - 1).
    pub f: f64,
    /// |Ψ - ln(1/t) - F| between the two routes.
    pub identity_gap: f64,
}

fn tanh_partial(d: Dim, upper: f64) -> Result<f64> {
    // beyond this the integrand is below e^{-2·cut}
    let cut = 25.0 + d.f();
    let top = upper.min(cut);
    let mut pts = vec![0.0];
    let mut b = 0.5;
    while b < top {
        pts.push(b);
        b *= 2.0;
    }
    pts.push(top);
    Ok(integrate_1d_points(|u| tanh_pow_minus_one(d, u), &pts, &tight())?.value)
}

pub fn psi_f(shape: &ShapeSpec, t: f64) -> Result<PsiF> {
    check_t(t)?;
    let geo = shape.geometry();
    let d = geo.dim;
    let ell = geo.support_radius;
    let f = (ell + ell.hypot(t)).ln() + tanh_partial(d, (ell / t).asinh())?;

    let upper = ell / t;
    let mut pts = vec![0.0];
    let mut b = 1.0;
    while b < upper {
        pts.push(b);
        b *= 4.0;
    }
    pts.push(upper);
    let n = d.get() as i32;
    let psi = integrate_1d_points(
        |r: f64| {
            let q = r.hypot(1.0);
            (r / q).powi(n) / q
        },
        &pts,
        &tight(),
    )?
    .value;
    let identity_gap = (psi + t.ln() - f).abs();
    let allowed = 1e-9 * psi.abs().max(1.0);
    if identity_gap > allowed {
        return Err(Error::ToleranceNotMet {
            requested: allowed,
            achieved: identity_gap,
        });
    }
    Ok(PsiF {
        psi,
        f,
        identity_gap,
    })
}

/// lim F(t) = ln(2ℓ) + J_d.
pub fn f_limit(shape: &ShapeSpec) -> Result<f64> {
    let geo = shape.geometry();
    Ok((2.0 * geo.support_radius).ln() + tanh_deficit(geo.dim, J_TOL)?)
}

/// R(t) = κ_d ∫_0^1 s⁻¹ γ(ℓs) (ℓs)^{d+1} / (t² + ℓ²s²)^{(d+1)/2} ds,
/// checked against 0 ≤ R(t) ≤ R_limit.
pub fn big_r(shape: &ShapeSpec, t: f64, quad: &QuadSpec) -> Result<f64> {
    check_t(t)?;
    let limit = r_limit(shape, quad)?;
    big_r_bounded(shape, t, limit, quad)
}

fn big_r_bounded(shape: &ShapeSpec, t: f64, limit: f64, quad: &QuadSpec) -> Result<f64> {
    let geo = shape.geometry();
    let d = geo.dim;
    let ell = geo.support_radius;
    let half = (d.f() + 1.0) / 2.0;
    let weight = |s: f64| {
        let x = ell * s / t;
        let x2 = x * x;
        (x2 / (1.0 + x2)).powf(half)
    };
    let r = kappa(d) * weighted_gamma_dyadic(shape, weight, Some(t / ell), quad)?.value;
    let slack = 1e-9 * (1.0 + limit.abs());
    if r < -slack || r > limit + slack {
        return Err(Error::MonotoneBound { r, limit });
    }
    Ok(r)
}

/// lim R(t) = κ_d ∫_0^1 s⁻¹ γ(ℓs) ds; requires the γ integral to pass the
/// integrability diagnostic.
pub fn r_limit(shape: &ShapeSpec, quad: &QuadSpec) -> Result<f64> {
    let gi = gamma_weighted_integral(shape, quad)?;
    Ok(kappa(shape.dim()) * gi.require_integrable()?)
}

/// All terms of the decomposition at one t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionBreakdown {
    pub t: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub phi: f64,
    pub psi: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// (|Ω| - H) - (|Ω|φ + (Per/π)tΨ - tR).
    pub residual: f64,
    /// |Ω| φ/t + (Per/π) F - R, which tends to C_Ω.
    #[serde(rename = "D")]
    pub d: f64,
}

/// Pieces that do not depend on t, computed once per shape.
#[derive(Debug, Clone, Copy)]
struct ShapeTerms {
    volume: f64,
    per_over_pi: f64,
    r_limit: f64,
}

impl ShapeTerms {
    fn new(shape: &ShapeSpec, quad: &QuadSpec) -> Result<Self> {
        let geo = shape.geometry();
        Ok(ShapeTerms {
            volume: geo.volume,
            per_over_pi: geo.perimeter / PI,
            r_limit: r_limit(shape, quad)?,
        })
    }
}

/// D(t) without the heat content.
fn d_value(shape: &ShapeSpec, t: f64, terms: &ShapeTerms, quad: &QuadSpec) -> Result<f64> {
    let pf = psi_f(shape, t)?;
    let r = big_r_bounded(shape, t, terms.r_limit, quad)?;
    Ok(terms.volume * phi_over_t(shape, t)? + terms.per_over_pi * pf.f - r)
}

fn breakdown_with(
    shape: &ShapeSpec,
    t: f64,
    terms: &ShapeTerms,
    quad: &QuadSpec,
) -> Result<ExpansionBreakdown> {
    check_t(t)?;
    let h = heat_content(shape, t, quad)?;
    let phi_t = phi_over_t(shape, t)?;
    let pf = psi_f(shape, t)?;
    let r = big_r_bounded(shape, t, terms.r_limit, quad)?;
    let phi = t * phi_t;
    let vol = terms.volume;
    let residual = (vol - h) - (vol * phi + terms.per_over_pi * t * pf.psi - t * r);
    Ok(ExpansionBreakdown {
        t,
        h,
        phi,
        psi: pf.psi,
        f: pf.f,
        r,
        residual,
        d: vol * phi_t + terms.per_over_pi * pf.f - r,
    })
}

pub fn decomposition(shape: &ShapeSpec, t: f64, quad: &QuadSpec) -> Result<ExpansionBreakdown> {
    check_t(t)?;
    breakdown_with(shape, t, &ShapeTerms::new(shape, quad)?, quad)
}

/// Decompositions over many t values, evaluated in parallel and returned
/// in input order. Each row fails or succeeds on its own.
pub fn decomposition_sweep(
    shape: &ShapeSpec,
    ts: &[f64],
    quad: &QuadSpec,
) -> Result<Vec<Result<ExpansionBreakdown>>> {
    let terms = ShapeTerms::new(shape, quad)?;
    Ok(ts
        .par_iter()
        .map(|&t| breakdown_with(shape, t, &terms, quad))
        .collect())
}

/// t_k = 2^{-k} for k = k_min..=k_max, decreasing.
pub fn dyadic_t_grid(k_min: i32, k_max: i32) -> Vec<f64> {
    (k_min..=k_max).map(|k| 0.5f64.powi(k)).collect()
}

/// The default grid 2^{-k}, k = 4..16.
pub fn default_t_grid() -> Vec<f64> {
    dyadic_t_grid(4, 16)
}

/// t-independent ingredients of the closed-form constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThirdTermPieces {
    /// ∫_0^1 s⁻¹ γ(ℓs) ds.
    pub gamma_integral: f64,
    pub f_limit: f64,
    pub phi_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThirdTermReport {
    pub shape: String,
    pub c_formula: f64,
    pub c_closed: Option<f64>,
    pub c_extrapolated: f64,
    pub extrapolation_err: f64,
    pub pieces: ThirdTermPieces,
    pub fit: LimitFit,
    /// (t, D(t)) in grid order.
    pub samples: Vec<(f64, f64)>,
}

/// Known value of C_Ω for the shapes where it has been worked out by hand.
pub fn closed_constant(shape: &ShapeSpec) -> Option<f64> {
    let ln2 = 2f64.ln();
    match shape {
        ShapeSpec::UnitBall(d) => match d.get() {
            1 => Some(2.0 / PI * (1.0 + 2f64.ln())),
            2 => Some(6.0 * ln2 - 2.0),
            3 => Some(4.0 * ln2),
            _ => None,
        },
        ShapeSpec::Interval { a, b } => Some(2.0 / PI * (1.0 + (b - a).ln())),
        _ if shape.is_unit_square() => Some(
            4.0 / PI * (2.0 * (SQRT_2 - 1.0) + (16.0 / (3.0 + 2.0 * SQRT_2)).ln()),
        ),
        _ => None,
    }
}

/// C_Ω = κ_d (|Ω| A_d / ℓ - ∫ s⁻¹γ) + (Per/π)(ln 2ℓ + J_d).
pub fn formula_constant(shape: &ShapeSpec, quad: &QuadSpec) -> Result<(f64, ThirdTermPieces)> {
    let geo = shape.geometry();
    let gi = gamma_weighted_integral(shape, quad)?;
    let gamma_integral = gi.require_integrable()?;
    let pieces = ThirdTermPieces {
        gamma_integral,
        f_limit: f_limit(shape)?,
        phi_slope: phi_slope(shape),
    };
    let c = geo.volume * pieces.phi_slope - kappa(geo.dim) * gamma_integral
        + geo.perimeter / PI * pieces.f_limit;
    Ok((c, pieces))
}

/// Closed-form constant plus its numerical limit from D(t) on `t_grid`.
pub fn third_term(shape: &ShapeSpec, quad: &QuadSpec, t_grid: &[f64]) -> Result<ThirdTermReport> {
    quad.validate()?;
    if t_grid.len() < 4 {
        return Err(Error::Domain(format!(
            "the t grid needs at least 4 points, got {}",
            t_grid.len()
        )));
    }
    if t_grid.windows(2).any(|w| !(w[1] < w[0])) || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Domain("the t grid must be positive and strictly decreasing".into()));
    }
    let (c_formula, pieces) = formula_constant(shape, quad)?;
    let c_closed = closed_constant(shape);
    if let Some(closed) = c_closed {
        if (c_formula - closed).abs() > CLOSED_FORM_GAP {
            return Err(Error::InconsistentConstant {
                formula: c_formula,
                closed,
            });
        }
    }
    let terms = ShapeTerms::new(shape, quad)?;
    let values: Vec<f64> = t_grid
        .par_iter()
        .map(|&t| d_value(shape, t, &terms, quad))
        .collect::<Result<_>>()?;
    let samples: Vec<(f64, f64)> = t_grid.iter().copied().zip(values).collect();
    let fit = extrapolate_limit(&samples)?;
    Ok(ThirdTermReport {
        shape: shape.label(),
        c_formula,
        c_closed,
        c_extrapolated: fit.c,
        extrapolation_err: fit.err_estimate,
        pieces,
        fit,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(d: usize) -> ShapeSpec {
        ShapeSpec::unit_ball(d).unwrap()
    }

    #[test]
    fn assembly_collapses_to_corollaries() {
        let ln2 = 2f64.ln();
        // d = 2: κ₂ = 1/(2π), A₂ = 2π, |B| = π, ℓ = 2, J₂ = -1
        let c2 = (PI * 2.0 * PI / 2.0 - PI * (PI - 4.0 * ln2)) / (2.0 * PI) + 2.0 * (4f64.ln() - 1.0);
        assert!((c2 - (6.0 * ln2 - 2.0)).abs() < 1e-12);
        // d = 3: κ₃ = 1/π², A₃ = 4π, |B| = 4π/3, J₃ = -ln2 - 1/2, Per/π = 4
        let c3 = (4.0 * PI / 3.0 * 4.0 * PI / 2.0 - 2.0 * PI * PI / 3.0) / (PI * PI)
            + 4.0 * (4f64.ln() - ln2 - 0.5);
        assert!((c3 - 4.0 * ln2).abs() < 1e-12);
        // square: ℓ = 2√2, |Q| = 4, Per/π = 8/π, J₂ = -1
        let gi = 2.0 * SQRT_2 * (PI - 8.0) + 8.0 * (2.0 * (3.0 + 2.0 * SQRT_2)).ln();
        let cq = (4.0 * 2.0 * PI / (2.0 * SQRT_2) - gi) / (2.0 * PI)
            + 8.0 / PI * ((4.0 * SQRT_2).ln() - 1.0);
        assert!((cq - closed_constant(&ShapeSpec::square()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn formula_matches_closed_forms() {
        let q = QuadSpec::default();
        for shape in [ball(2), ball(3), ball(1), ShapeSpec::square(), ShapeSpec::interval(0.0, 3.0).unwrap()] {
            let (c, _) = formula_constant(&shape, &q).unwrap();
            let want = closed_constant(&shape).unwrap();
            assert!((c - want).abs() < 1e-9, "{}: {c} vs {want}", shape.label());
        }
    }

    #[test]
    fn phi_properties() {
        let shape = ball(3);
        let mut prev = 0.0;
        for k in (0..30).rev() {
            let t = 0.5f64.powi(k);
            let p = phi(&shape, t).unwrap();
            assert!(p >= prev && p <= 1.0);
            prev = p;
        }
        assert!(phi(&shape, 1e-12).unwrap() < 1e-11);
        let ratio = phi_over_t(&shape, 1e-12).unwrap();
        assert!((ratio - phi_slope(&shape)).abs() < 1e-12);
        // d = 2: φ(t) = t/√(t²+ℓ²)
        let t = 0.37;
        assert!((phi(&ball(2), t).unwrap() - t / t.hypot(2.0)).abs() < 1e-15);
        // d = 3 against a direct tail quadrature
        let tail = integrate_1d_points(
            |r: f64| r * r / (1.0 + r * r).powi(2),
            &[2.0 / t, 100.0, 1e4],
            &tight(),
        )
        .unwrap()
        .value
            + 1e-4; // ∫_{10^4}^∞ r^{-2} dr to leading order
        let want = 4.0 * PI / (PI * PI) * tail;
        assert!((phi(&shape, t).unwrap() - want).abs() < 1e-8);
    }

    #[test]
    fn psi_f_identity_and_limit() {
        for shape in [ball(2), ball(3), ShapeSpec::square()] {
            for t in [0.5, 1e-2, 1e-5] {
                let pf = psi_f(&shape, t).unwrap();
                assert!(pf.identity_gap < 1e-10);
            }
            let lim = f_limit(&shape).unwrap();
            let pf = psi_f(&shape, 1e-9).unwrap();
            assert!((pf.f - lim).abs() < 1e-9);
        }
    }

    #[test]
    fn r_is_bounded_and_increasing_to_limit() {
        let q = QuadSpec::default();
        for shape in [ball(2), ShapeSpec::square()] {
            let lim = r_limit(&shape, &q).unwrap();
            let mut prev = 0.0;
            for k in 1..12 {
                let r = big_r(&shape, 0.5f64.powi(k), &q).unwrap();
                assert!(r >= prev - 1e-12 && r <= lim);
                prev = r;
            }
            let r = big_r(&shape, 1e-9, &q).unwrap();
            assert!((r - lim).abs() < 1e-6);
        }
    }

    #[test]
    fn heat_content_limits() {
        let q = QuadSpec::default();
        for shape in [ball(2), ball(3), ShapeSpec::square(), ShapeSpec::interval(0.0, 1.0).unwrap()] {
            let v = shape.geometry().volume;
            let h = heat_content(&shape, 1e-6, &q).unwrap();
            assert!(h > 0.99 * v && h <= v);
            let h = heat_content(&shape, 10.0, &q).unwrap();
            assert!(h > 0.0 && h < 0.5 * v);
        }
    }

    #[test]
    fn interval_heat_content_closed_form() {
        // ∫ (1-|y|)⁺ t/(π(t²+y²)) dy
        let q = QuadSpec::default();
        let t: f64 = 0.1;
        let want = 2.0 / PI * ((1.0 / t).atan() - t / 2.0 * (1.0 + 1.0 / (t * t)).ln());
        let h = heat_content(&ShapeSpec::interval(0.0, 1.0).unwrap(), t, &q).unwrap();
        assert!((h - want).abs() < 1e-12);
        // independent fine-grid oracle: composite Simpson on y = t·sinh(v)
        let n = 20_000;
        let vmax = (1.0 / t).asinh();
        let hstep = vmax / n as f64;
        let f = |v: f64| {
            let y = t * v.sinh();
            2.0 * (1.0 - y) * t / (PI * (t * t + y * y)) * t * v.cosh()
        };
        let mut acc = f(0.0) + f(vmax);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * hstep);
        }
        assert!((acc * hstep / 3.0 - want).abs() < 1e-10);
    }

    #[test]
    fn decomposition_residuals_are_small() {
        let q = QuadSpec::default();
        for shape in [ball(2), ball(3), ShapeSpec::square(), ShapeSpec::interval(0.0, 1.0).unwrap()] {
            for t in [0.1, 0.01, 0.001] {
                let b = decomposition(&shape, t, &q).unwrap();
                assert!(b.residual.abs() < 1e-8, "{} t={t}: {}", shape.label(), b.residual);
                assert!(b.phi >= 0.0 && b.phi <= 1.0 && b.r >= 0.0);
            }
        }
    }

    #[test]
    fn grid_validation() {
        let q = QuadSpec::default();
        assert!(third_term(&ball(2), &q, &[0.1, 0.05, 0.02]).is_err());
        assert!(third_term(&ball(2), &q, &[0.1, 0.2, 0.02, 0.01]).is_err());
        assert_eq!(default_t_grid().len(), 13);
    }
}
