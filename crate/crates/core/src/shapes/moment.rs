//! Radially weighted integrals ∫ w(|z|) g_Ω(z) dz over the covariance support.

use std::cell::Cell;
use std::f64::consts::TAU;

use crate::error::Result;
use crate::kernel::unit_sphere_area;
use crate::quadrature::{integrate_1d_points, integrate_circle, Estimate, QuadSpec};

use super::covariance::{ball_covariance, covariance};
use super::gamma::Fallible;
use super::ShapeSpec;

fn radial_points(r_breaks: &[f64], upper: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut inner: Vec<f64> = r_breaks
        .iter()
        .copied()
        .filter(|&r| r > 0.0 && r < upper * (1.0 - 1e-12))
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(upper);
    pts
}

/// ∫_{R^d} w(|z|) g_Ω(z) dz.
///
/// `r_breaks` are radii where w changes scale; they become forced panel
/// boundaries of every radial integral. Planar shapes are integrated in
/// polar coordinates with the angular panels split at the covariance kinks.
pub fn integrate_weighted<W: Fn(f64) -> f64>(
    shape: &ShapeSpec,
    w: W,
    r_breaks: &[f64],
    quad: &QuadSpec,
) -> Result<Estimate> {
    quad.validate()?;
    let ell = shape.geometry().support_radius;
    match shape {
        ShapeSpec::UnitBall(d) => {
            let area = unit_sphere_area(*d);
            let p = d.get() as i32 - 1;
            let guard = Fallible::new();
            let est = integrate_1d_points(
                |r| guard.wrap(ball_covariance(*d, r).map(|g| area * r.powi(p) * w(r) * g)),
                &radial_points(r_breaks, ell),
                quad,
            );
            guard.finish(est)
        }
        ShapeSpec::Interval { a, b } => {
            let len = b - a;
            let est = integrate_1d_points(
                |r| 2.0 * w(r) * (len - r),
                &radial_points(r_breaks, ell),
                quad,
            )?;
            Ok(est)
        }
        ShapeSpec::Rectangle { .. } | ShapeSpec::ConvexPolygon(_) => {
            let support = shape
                .support_polygon()
                .expect("planar shapes have a support polygon");
            let inner_quad = QuadSpec {
                abs_tol: quad.abs_tol / (4.0 * TAU),
                rel_tol: quad.rel_tol / 4.0,
                ..*quad
            };
            let inner_err = Cell::new(0.0_f64);
            let guard = Fallible::new();
            let est = integrate_circle(
                |theta: f64| {
                    let u = [theta.cos(), theta.sin()];
                    let rho = support.radial_extent(u);
                    let res = integrate_1d_points(
                        |r| {
                            let g = covariance(shape, &[r * u[0], r * u[1]]).unwrap_or(f64::NAN);
                            w(r) * g * r
                        },
                        &radial_points(r_breaks, rho),
                        &inner_quad,
                    );
                    guard.wrap(res.map(|e| {
                        inner_err.set(inner_err.get().max(e.err));
                        e.value
                    }))
                },
                &shape.planar_kinks(),
                quad,
            );
            let mut est = guard.finish(est)?;
            est.err += TAU * inner_err.get();
            Ok(est)
        }
    }
}

/// ∫ r^{k+1} t (t² + r²)^{-3/2} dr over [0, ρ] for k = 0, 1, 2, written to
/// avoid cancellation when ρ ≪ t.
fn planar_moments(t: f64, rho: f64) -> [f64; 3] {
    let q = t.hypot(rho);
    let x = rho / t;
    let m0 = rho * rho / (q * (q + t));
    let m1 = if x < 0.01 {
        // asinh(x) - x/√(1+x²) = x³/3 - 3x⁵/10 + 15x⁷/56 - 35x⁹/144
        let x2 = x * x;
        t * x * x2 * (1.0 / 3.0 + x2 * (-0.3 + x2 * (15.0 / 56.0 - x2 * 35.0 / 144.0)))
    } else {
        t * (x.asinh() - rho / q)
    };
    let gap = rho * rho / (q + t);
    let m2 = t * gap * gap / q;
    [m0, m1, m2]
}

/// Heat content of the rectangle [-h₁,h₁]×[-h₂,h₂] for the planar kernel,
/// using that g(ru) = (2h₁ - r|cos|)(2h₂ - r|sin|) is a quadratic in r on
/// each ray.
pub(crate) fn rectangle_heat_content(h: [f64; 2], t: f64, quad: &QuadSpec) -> Result<Estimate> {
    let shape = ShapeSpec::Rectangle { half_widths: h };
    let (a, b) = (2.0 * h[0], 2.0 * h[1]);
    // κ₂ = 1/(2π)
    let kappa = 1.0 / TAU;
    integrate_circle(
        |theta: f64| {
            let (c, s) = (theta.cos().abs(), theta.sin().abs());
            let rho = (a / c).min(b / s);
            let [m0, m1, m2] = planar_moments(t, rho);
            kappa * (a * b * m0 - (a * s + b * c) * m1 + c * s * m2)
        },
        &shape.planar_kinks(),
        quad,
    )
}
