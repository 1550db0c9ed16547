//! γ_Ω(ℓ_Ω s) = ∫_{S^{d-1}} [V_u/2 - (g(0) - g(ℓ s u)) / (ℓ s)] dH(u) and its
//! s⁻¹-weighted integral over (0, 1].

use std::cell::RefCell;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{ball_volume_raw, Dim};
use crate::quadrature::{
    integrate_1d, integrate_circle, integrate_dyadic, integrate_sphere, Estimate, QuadSpec,
};

use super::covariance::{covariance_along, directional_variation_unchecked, theta_complement};
use super::{Polygon, ShapeSpec};

/// Values below this are taken as a violation of γ ≥ 0.
const NEGATIVE_GAMMA_TOL: f64 = 1e-8;
/// Dyadic depth when γ has a closed form accurate down to tiny s.
const CLOSED_FORM_DEPTH: usize = 48;
/// Dyadic depth for the spherical-quadrature γ; below 2^-16 the integrand
/// is extended linearly (it is constant there for polygons).
const NUMERIC_DEPTH: usize = 16;
const NUMERIC_DEPTH_MAX: usize = 26;

/// Run a closure that may fail inside an integrator expecting `f64`.
pub(crate) struct Fallible {
    err: RefCell<Option<Error>>,
}

impl Fallible {
    pub(crate) fn new() -> Self {
        Fallible {
            err: RefCell::new(None),
        }
    }

    pub(crate) fn wrap(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    /// Prefer the captured error over the integrator's NaN complaint.
    pub(crate) fn finish<T>(self, r: Result<T>) -> Result<T> {
        match self.err.into_inner() {
            Some(e) => Err(e),
            None => r,
        }
    }
}

fn sphere_area_raw(d: usize) -> f64 {
    d as f64 * ball_volume_raw(d)
}

/// Ball: γ_B(2s) = A_d (w_{d-1}{1 - (1-s²)^{(d-1)/2}} - A_{d-1}{Θ(1) - Θ(√(1-s²))}/s).
fn ball_gamma(d: Dim, s: f64) -> Result<f64> {
    let n = d.get();
    let outer = sphere_area_raw(n);
    if n == 2 {
        // 2π((1 - √(1-s²)) - (arcsin(s)/s - 1))
        let root = (1.0 - s * s).sqrt();
        let first = s * s / (1.0 + root);
        let second = if s < 1e-3 {
            let s2 = s * s;
            s2 * (1.0 / 6.0 + s2 * (3.0 / 40.0 + s2 * (5.0 / 112.0 + s2 * 35.0 / 1152.0)))
        } else {
            s.asin() / s - 1.0
        };
        return Ok(outer * (first - second));
    }
    let shrink = -(((n as f64 - 1.0) / 2.0) * (-s * s).ln_1p()).exp_m1();
    Ok(outer
        * (ball_volume_raw(n - 1) * shrink - sphere_area_raw(n - 1) * theta_complement(d, s)? / s))
}

/// Square [-1,1]²: γ_Q(2√2 s), integrating the sector-wise deficit in closed
/// form (eight mirror-image sectors of width π/4).
fn square_gamma(s: f64) -> f64 {
    if s <= FRAC_1_SQRT_2 {
        return 4.0 * SQRT_2 * s;
    }
    // r = 2√2 s leaves the support within the sector for θ < α
    let c = 1.0 / (SQRT_2 * s);
    let alpha = c.min(1.0).acos();
    let sin_a = (1.0 - c * c).max(0.0).sqrt();
    let sector = 2.0 * (sin_a + 1.0 - c) - SQRT_2 * alpha / s
        + SQRT_2 * s * (0.5 - sin_a * sin_a);
    8.0 * sector
}

/// Angles in (0, 2π] where the circle of radius r meets a segment
/// e - v or v - e (e an edge, v a vertex): translations at which a vertex of
/// one copy crosses an edge of the other, so g(r u) changes its formula.
fn crossing_angles(shape: &ShapeSpec, r: f64) -> Vec<f64> {
    let poly = match shape {
        ShapeSpec::ConvexPolygon(p) => p.clone(),
        ShapeSpec::Rectangle { half_widths: [h1, h2] } => Polygon::new(vec![
            [-h1, -h2],
            [*h1, -h2],
            [*h1, *h2],
            [-h1, *h2],
        ])
        .expect("rectangle is a valid polygon"),
        _ => return Vec::new(),
    };
    let mut segments = Vec::new();
    for (a, b) in poly.edges() {
        for v in poly.vertices() {
            let ea = [a[0] - v[0], a[1] - v[1]];
            let eb = [b[0] - v[0], b[1] - v[1]];
            segments.push((ea, eb));
            segments.push(([-ea[0], -ea[1]], [-eb[0], -eb[1]]));
        }
    }
    let mut out = Vec::new();
    for (a, b) in segments {
        // |a + t(b-a)| = r
        let e = [b[0] - a[0], b[1] - a[1]];
        let qa = e[0] * e[0] + e[1] * e[1];
        if qa == 0.0 {
            continue;
        }
        let qb = 2.0 * (a[0] * e[0] + a[1] * e[1]);
        let qc = a[0] * a[0] + a[1] * a[1] - r * r;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
            if (0.0..=1.0).contains(&t) {
                let p = [a[0] + t * e[0], a[1] + t * e[1]];
                let mut ang = p[1].atan2(p[0]);
                if ang <= 0.0 {
                    ang += TAU;
                }
                out.push(ang);
            }
        }
    }
    out
}

/// V_u/2 - (g(0) - g(r u))/r, using exact small-shift forms where the
/// direct difference would cancel.
fn deficit_quotient(shape: &ShapeSpec, u: &[f64], r: f64, g0: f64) -> Result<f64> {
    match shape {
        ShapeSpec::Rectangle { half_widths: [h1, h2] } => {
            let (x, y) = (r * u[0].abs(), r * u[1].abs());
            if x <= 2.0 * h1 && y <= 2.0 * h2 {
                return Ok(r * u[0].abs() * u[1].abs());
            }
        }
        ShapeSpec::ConvexPolygon(p) => {
            let (q, r_max) = p.small_shift([u[0], u[1]]);
            if r <= r_max {
                return Ok(r * q);
            }
        }
        _ => {}
    }
    let v = directional_variation_unchecked(shape, u);
    Ok(0.5 * v - (g0 - covariance_along(shape, u, r)?) / r)
}

/// γ_Ω(ℓ s) by direct integration of the deficit over the sphere (circle for
/// d = 2, the two points ±1 for d = 1, product rule for d = 3).
pub fn gamma_numeric(shape: &ShapeSpec, s: f64, quad: &QuadSpec) -> Result<f64> {
    check_s(s)?;
    let geo = shape.geometry();
    let r = geo.support_radius * s;
    let g0 = geo.volume;
    let deficit = |u: &[f64]| deficit_quotient(shape, u, r, g0);
    match geo.dim.get() {
        1 => Ok(deficit(&[1.0])? + deficit(&[-1.0])?),
        2 => {
            let mut kinks = shape.planar_kinks();
            kinks.extend(crossing_angles(shape, r));
            let guard = Fallible::new();
            let est = integrate_circle(
                |t: f64| guard.wrap(deficit(&[t.cos(), t.sin()])),
                &kinks,
                quad,
            );
            Ok(guard.finish(est)?.value)
        }
        3 => {
            let guard = Fallible::new();
            let est = integrate_sphere(|u| guard.wrap(deficit(&u)), quad);
            Ok(guard.finish(est)?.value)
        }
        d => Err(Error::Domain(format!(
            "no sphere quadrature for d = {d}; only the ball has a γ formula there"
        ))),
    }
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("γ is evaluated for s in (0, 1], got {s}")))
    }
}

/// True when `gamma` uses a closed form rather than spherical quadrature.
fn has_closed_gamma(shape: &ShapeSpec) -> bool {
    match shape {
        ShapeSpec::UnitBall(_) | ShapeSpec::Interval { .. } => true,
        ShapeSpec::Rectangle { .. } => shape.is_unit_square(),
        ShapeSpec::ConvexPolygon(_) => false,
    }
}

/// γ_Ω(ℓ_Ω s) for s in (0, 1].
pub fn gamma(shape: &ShapeSpec, s: f64, quad: &QuadSpec) -> Result<f64> {
    check_s(s)?;
    let value = match shape {
        ShapeSpec::UnitBall(d) if d.get() >= 2 => ball_gamma(*d, s)?,
        // g is linear on its support, so the deficit vanishes identically
        ShapeSpec::UnitBall(_) | ShapeSpec::Interval { .. } => 0.0,
        _ if shape.is_unit_square() => square_gamma(s),
        _ => gamma_numeric(shape, s, quad)?,
    };
    if value < -NEGATIVE_GAMMA_TOL {
        return Err(Error::NegativeGamma { s, value });
    }
    Ok(value)
}

/// ∫_0^1 s⁻¹ γ_Ω(ℓ_Ω s) ds with the dyadic decay diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaIntegral {
    /// Numerical quadrature of s⁻¹γ.
    pub value: f64,
    pub err: f64,
    /// Class-W diagnostic: the dyadic contributions decay geometrically.
    pub integrable: bool,
    /// Known exact value, when there is one.
    pub closed_form: Option<f64>,
    /// Contribution of (2^{-k-1}, 2^{-k}] for each k.
    pub panels: Vec<f64>,
}

impl GammaIntegral {
    /// Error out when the integrability diagnostic failed.
    pub fn require_integrable(&self) -> Result<f64> {
        if self.integrable {
            Ok(self.value)
        } else {
            Err(Error::DivergenceSuspected(format!(
                "deepest dyadic contributions {:?}",
                &self.panels[self.panels.len().saturating_sub(4)..]
            )))
        }
    }
}

/// Exact value of the weighted γ integral where one is known.
pub(crate) fn closed_gamma_integral(shape: &ShapeSpec) -> Option<f64> {
    match shape {
        ShapeSpec::UnitBall(d) if d.get() == 2 => Some(PI * (PI - 4.0 * 2f64.ln())),
        ShapeSpec::UnitBall(d) if d.get() == 3 => Some(2.0 * PI * PI / 3.0),
        ShapeSpec::UnitBall(d) if d.get() == 1 => Some(0.0),
        ShapeSpec::Interval { .. } => Some(0.0),
        _ if shape.is_unit_square() => {
            Some(2.0 * SQRT_2 * (PI - 8.0) + 8.0 * (2.0 * (3.0 + 2.0 * SQRT_2)).ln())
        }
        _ => None,
    }
}

/// Panel locations where s ↦ γ(ℓ s) may have kinks.
pub(crate) fn gamma_breaks(shape: &ShapeSpec) -> Vec<f64> {
    if shape.is_unit_square() {
        return vec![FRAC_1_SQRT_2];
    }
    let Some(sp) = shape.support_polygon() else {
        return Vec::new();
    };
    let ell = shape.geometry().support_radius;
    let mut out = Vec::new();
    for (a, b) in sp.edges() {
        out.push(a[0].hypot(a[1]) / ell);
        let e = [b[0] - a[0], b[1] - a[1]];
        let foot = (a[0] * e[1] - a[1] * e[0]).abs() / e[0].hypot(e[1]);
        out.push(foot / ell);
    }
    out.retain(|&x| x > 0.0 && x < 1.0);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    out
}

/// Dyadic depth; `scale` is the smallest s at which the weight varies
/// (t/ℓ for the R integral). Numeric γ carries roundoff of order ε/s, so its
/// depth stays bounded.
fn dyadic_depth(shape: &ShapeSpec, scale: Option<f64>) -> usize {
    if has_closed_gamma(shape) {
        return CLOSED_FORM_DEPTH;
    }
    let wanted = scale.map_or(0, |x| (1.0 / x).log2().ceil().max(0.0) as usize + 6);
    wanted.clamp(NUMERIC_DEPTH, NUMERIC_DEPTH_MAX)
}

/// Integrate `weight(s) · γ(ℓ s) / s` over (0, 1] on dyadic panels.
pub(crate) fn weighted_gamma_dyadic<W: Fn(f64) -> f64>(
    shape: &ShapeSpec,
    weight: W,
    scale: Option<f64>,
    quad: &QuadSpec,
) -> Result<crate::quadrature::DyadicEstimate> {
    let guard = Fallible::new();
    let est = integrate_dyadic(
        |s| guard.wrap(gamma(shape, s, quad).map(|g| weight(s) * g / s)),
        dyadic_depth(shape, scale),
        &gamma_breaks(shape),
        quad,
    );
    guard.finish(est)
}

/// Geometric decay of the deepest non-negligible dyadic contributions.
fn decays_geometrically(panels: &[f64], floor: f64) -> bool {
    let tail: Vec<f64> = panels.iter().rev().take(10).map(|p| p.abs()).collect();
    // tail[0] is the deepest panel
    tail.windows(2).all(|w| {
        let (deep, shallow) = (w[0], w[1]);
        deep <= floor || deep <= 0.75 * shallow
    })
}

pub fn gamma_weighted_integral(shape: &ShapeSpec, quad: &QuadSpec) -> Result<GammaIntegral> {
    let est = weighted_gamma_dyadic(shape, |_| 1.0, None, quad)?;
    let floor = 10.0 * quad.abs_tol * 0.5_f64.powi(est.panels.len() as i32 - 10);
    Ok(GammaIntegral {
        value: est.value,
        err: est.err,
        integrable: decays_geometrically(&est.panels, floor),
        closed_form: closed_gamma_integral(shape),
        panels: est.panels,
    })
}

/// γ evaluator bundled with its weighted integral.
#[derive(Debug, Clone)]
pub struct GammaProfile {
    pub shape: ShapeSpec,
    pub weighted_integral: GammaIntegral,
    quad: QuadSpec,
}

impl GammaProfile {
    pub fn new(shape: &ShapeSpec, quad: &QuadSpec) -> Result<Self> {
        Ok(GammaProfile {
            shape: shape.clone(),
            weighted_integral: gamma_weighted_integral(shape, quad)?,
            quad: *quad,
        })
    }

    pub fn integrable(&self) -> bool {
        self.weighted_integral.integrable
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        gamma(&self.shape, s, &self.quad)
    }
}

fn eta(i: usize, theta: f64) -> f64 {
    match i {
        0 | 3 | 4 | 7 => 2.0 / theta.cos().abs(),
        _ => 2.0 / theta.sin().abs(),
    }
}

/// The eight sector integrals I_0..I_7 whose sum is ∫_0^1 s⁻¹γ_Q(2√2 s) ds
/// for the square [-1,1]².
pub fn square_i_terms(quad: &QuadSpec) -> Result<Vec<Estimate>> {
    (0..8)
        .map(|i| {
            let a = PI / 4.0 * i as f64;
            let b = PI / 4.0 * (i + 1) as f64;
            integrate_1d(
                |t: f64| {
                    let (c, s) = (t.cos().abs(), t.sin().abs());
                    let e = eta(i, t);
                    c * s * e + 2.0 * (c + s) * (2.0 * SQRT_2 / e).ln()
                        + SQRT_2 * (1.0 - 2.0 * SQRT_2 / e)
                },
                a,
                b,
                quad,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(d: usize) -> ShapeSpec {
        ShapeSpec::unit_ball(d).unwrap()
    }

    #[test]
    fn ball_examples() {
        let q = QuadSpec::default();
        let g = gamma(&ball(3), 0.5, &q).unwrap();
        assert!((g - PI * PI / 3.0).abs() < 1e-13);
        let g = gamma(&ball(2), 1.0, &q).unwrap();
        assert!((g - (4.0 * PI - PI * PI)).abs() < 1e-13);
        for s in [0.05f64, 0.3, 0.8] {
            let direct = 2.0 * PI
                * (2.0 - (1.0 - s * s).sqrt()
                    + (2.0 * (1.0f64 - s * s).sqrt().asin() - PI) / (2.0 * s));
            let g = gamma(&ball(2), s, &q).unwrap();
            assert!((g - direct).abs() < 1e-12, "s={s} {g} {direct}");
        }
    }

    #[test]
    fn small_s_ball2_is_smooth() {
        // γ_B(2s) ≈ 2π s²/3
        let q = QuadSpec::default();
        for s in [1e-9, 1e-6, 1e-4, 0.999e-3, 1.001e-3] {
            let g = gamma(&ball(2), s, &q).unwrap();
            let lead = 2.0 * PI * s * s / 3.0;
            assert!((g / lead - 1.0).abs() < 1e-5 + s, "s={s}");
        }
    }

    #[test]
    fn square_closed_form_against_fixed_grid() {
        // independent oracle: midpoint rule on 2^16 angles of the sector-wise Λ_Q
        let s = 0.9;
        let n = 1usize << 16;
        let h = TAU / n as f64;
        let mut acc = 0.0;
        for k in 0..n {
            let t = (k as f64 + 0.5) * h;
            let (c, sn) = (t.cos().abs(), t.sin().abs());
            let i = ((t / (PI / 4.0)) as usize).min(7);
            let e = eta(i, t);
            acc += if 2.0 * SQRT_2 * s <= e {
                2.0 * SQRT_2 * s * c * sn
            } else {
                2.0 * (c + sn) - SQRT_2 / s
            };
        }
        let oracle = acc * h;
        let got = gamma(&ShapeSpec::square(), s, &QuadSpec::default()).unwrap();
        assert!((got - oracle).abs() < 1e-6, "{got} vs {oracle}");
        assert!((got - 6.136_830_187_154_574).abs() < 1e-12);
    }

    #[test]
    fn square_numeric_route_matches_closed_form() {
        let q = QuadSpec::default();
        let sq = ShapeSpec::square();
        for s in [0.05, 0.3, 0.7, 0.71, 0.9, 1.0] {
            let a = gamma(&sq, s, &q).unwrap();
            let b = gamma_numeric(&sq, s, &q).unwrap();
            assert!((a - b).abs() < 1e-9, "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn ball_numeric_routes_match_closed_form() {
        let q = QuadSpec::default();
        for s in [0.1, 0.5, 0.95] {
            let a = gamma(&ball(2), s, &q).unwrap();
            let b = gamma_numeric(&ball(2), s, &q).unwrap();
            assert!((a - b).abs() < 1e-9, "d=2 s={s}");
            let a = gamma(&ball(3), s, &q).unwrap();
            let b = gamma_numeric(&ball(3), s, &q).unwrap();
            assert!((a - b).abs() < 1e-9, "d=3 s={s}");
        }
    }

    #[test]
    fn ball_bound_holds() {
        let q = QuadSpec::default();
        for d in 2..=6 {
            let sigma = if d == 2 { 1.0 } else { (d as f64 - 1.0) / 2.0 };
            let c = sphere_area_raw(d) * ball_volume_raw(d - 1) * sigma;
            for k in 1..=50 {
                let s = k as f64 / 50.0;
                let g = gamma(&ball(d), s, &q).unwrap();
                assert!(g >= -1e-12 && g <= c * s * s + 1e-12, "d={d} s={s}");
            }
        }
    }

    #[test]
    fn weighted_integrals_match_table() {
        let q = QuadSpec::default();
        for (shape, want) in [
            (ball(2), PI * (PI - 4.0 * 2f64.ln())),
            (ball(3), 2.0 * PI * PI / 3.0),
            (ShapeSpec::square(), 2.0 * SQRT_2 * (PI - 8.0) + 8.0 * (2.0 * (3.0 + 2.0 * SQRT_2)).ln()),
        ] {
            let gi = gamma_weighted_integral(&shape, &q).unwrap();
            assert!((gi.value - want).abs() < 1e-9, "{}: {} vs {want}", shape.label(), gi.value);
            assert!(gi.integrable);
            assert_eq!(gi.closed_form, Some(want));
        }
        let gi = gamma_weighted_integral(&ShapeSpec::interval(0.0, 2.0).unwrap(), &q).unwrap();
        assert_eq!(gi.value, 0.0);
        assert!(gi.integrable);
    }

    #[test]
    fn i_terms() {
        let q = QuadSpec::default();
        let terms = square_i_terms(&q).unwrap();
        for t in &terms {
            assert!((t.value - 0.738_187_964_392_432_8).abs() < 1e-12, "{}", t.value);
        }
        let sum: f64 = terms.iter().map(|e| e.value).sum();
        let gi = closed_gamma_integral(&ShapeSpec::square()).unwrap();
        assert!((sum - gi).abs() < 1e-11);
    }

    #[test]
    fn decay_diagnostic() {
        let geometric: Vec<f64> = (0..30).map(|k| 0.5f64.powi(k)).collect();
        assert!(decays_geometrically(&geometric, 1e-20));
        let flat = vec![0.3; 30];
        assert!(!decays_geometrically(&flat, 1e-20));
        let negligible = vec![1e-25; 30];
        assert!(decays_geometrically(&negligible, 1e-20));
    }

    #[test]
    fn domain_checks() {
        let q = QuadSpec::default();
        assert!(gamma(&ball(2), 0.0, &q).is_err());
        assert!(gamma(&ball(2), 1.5, &q).is_err());
    }
}
