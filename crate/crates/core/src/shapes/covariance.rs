
use crate::error::{Error, Result};
use crate::kernel::{ball_volume_raw, unit_ball_volume, Dim};
use crate::quadrature::{integrate_1d, integrate_circle, integrate_sphere, QuadSpec};

use super::ShapeSpec;

fn tight() -> QuadSpec {
    QuadSpec {
        abs_tol: 1e-15,
        rel_tol: 1e-14,
        ..QuadSpec::default()
    }
}

fn sphere_area_raw(d: usize) -> f64 {
    d as f64 * ball_volume_raw(d)
}

/// Θ(z) = ∫_0^{arcsin z} sin^{d-2}θ cos²θ dθ.
pub fn theta_integral(d: Dim, z: f64) -> Result<f64> {
    if d.get() < 2 {
        return Err(Error::Domain("Θ is defined for d ≥ 2".into()));
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("Θ needs 0 ≤ z ≤ 1, got {z}")));
    }
    Ok(match d.get() {
        2 => 0.5 * (z.asin() + z * (1.0 - z * z).sqrt()),
        3 => (1.0 - (1.0 - z * z).powf(1.5)) / 3.0,
        n => {
            if z == 0.0 {
                return Ok(0.0);
            }
            let p = (n - 2) as i32;
            integrate_1d(|t: f64| t.sin().powi(p) * t.cos().powi(2), 0.0, z.asin(), &tight())?.value
        }
    })
}

/// Θ(1) - Θ(√(1-s²)) = ∫_0^{arcsin s} cos^{d-2}φ sin²φ dφ, computed directly
/// so small s does not lose digits.
pub(crate) fn theta_complement(d: Dim, s: f64) -> Result<f64> {
    Ok(match d.get() {
        2 => {
            if s < 1e-3 {
                // (arcsin s - s√(1-s²))/2 = s³/3 + s⁵/10 + 3s⁷/56 + ...
                let s2 = s * s;
                s * s2 * (1.0 / 3.0 + s2 * (0.1 + s2 * (3.0 / 56.0 + s2 * 5.0 / 144.0)))
            } else {
                0.5 * (s.asin() - s * (1.0 - s * s).sqrt())
            }
        }
        3 => s * s * s / 3.0,
        n => {
            if s == 0.0 {
                return Ok(0.0);
            }
            let p = (n - 2) as i32;
            integrate_1d(|t: f64| t.cos().powi(p) * t.sin().powi(2), 0.0, s.asin(), &tight())?.value
        }
    })
}

/// |B ∩ (B + y)| for the unit ball at |y| = r.
pub(crate) fn ball_covariance(d: Dim, r: f64) -> Result<f64> {
    let s = 0.5 * r;
    if s >= 1.0 {
        return Ok(0.0);
    }
    let n = d.get();
    if n == 1 {
        return Ok(2.0 - r);
    }
    let g = unit_ball_volume(d)
        - 2.0 * sphere_area_raw(n - 1) * theta_complement(d, s)?
        - 2.0 * s * ball_volume_raw(n - 1) * (1.0 - s * s).powf((n as f64 - 1.0) / 2.0);
    Ok(g.max(0.0))
}

/// Set covariance g_Ω(y) = |Ω ∩ (Ω + y)|.
pub fn covariance(shape: &ShapeSpec, y: &[f64]) -> Result<f64> {
    shape.check_dim(y.len())?;
    let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(match shape {
        ShapeSpec::UnitBall(d) => ball_covariance(*d, r)?,
        ShapeSpec::Rectangle { half_widths: [h1, h2] } => {
            (2.0 * h1 - y[0].abs()).max(0.0) * (2.0 * h2 - y[1].abs()).max(0.0)
        }
        ShapeSpec::ConvexPolygon(p) => {
            if r >= p.diameter() {
                0.0
            } else {
                p.translate_overlap_area([y[0], y[1]])
            }
        }
        ShapeSpec::Interval { a, b } => (b - a - y[0].abs()).max(0.0),
    })
}

/// Covariance along the ray r·u, for a unit vector u of the shape's
/// dimension. Radial shapes ignore the direction.
pub(crate) fn covariance_along(shape: &ShapeSpec, u: &[f64], r: f64) -> Result<f64> {
    match shape {
        ShapeSpec::UnitBall(d) => ball_covariance(*d, r),
        ShapeSpec::Interval { a, b } => Ok((b - a - r).max(0.0)),
        _ => {
            let y: Vec<f64> = u.iter().map(|c| c * r).collect();
            covariance(shape, &y)
        }
    }
}

fn check_unit(u: &[f64]) -> Result<()> {
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitVector { norm });
    }
    Ok(())
}

/// Directional variation V_u(Ω); equals Σ_edges |e|·|n_e·u| for polygons,
/// 2·w_{d-1} for the ball and 2 for an interval.
pub fn directional_variation(shape: &ShapeSpec, u: &[f64]) -> Result<f64> {
    shape.check_dim(u.len())?;
    check_unit(u)?;
    Ok(directional_variation_unchecked(shape, u))
}

pub(crate) fn directional_variation_unchecked(shape: &ShapeSpec, u: &[f64]) -> f64 {
    match shape {
        ShapeSpec::UnitBall(d) => 2.0 * ball_volume_raw(d.get() - 1),
        ShapeSpec::Rectangle { half_widths: [h1, h2] } => {
            4.0 * h2 * u[0].abs() + 4.0 * h1 * u[1].abs()
        }
        ShapeSpec::ConvexPolygon(p) => p.projected_boundary([u[0], u[1]]),
        ShapeSpec::Interval { .. } => 2.0,
    }
}

/// Per(Ω) recovered as (1 / (2 w_{d-1})) ∫_{S^{d-1}} V_u.
pub fn perimeter_from_variations(shape: &ShapeSpec, quad: &QuadSpec) -> Result<f64> {
    let d = shape.dim().get();
    let norm = 1.0 / (2.0 * ball_volume_raw(d - 1));
    let total = match d {
        1 => {
            directional_variation_unchecked(shape, &[1.0])
                + directional_variation_unchecked(shape, &[-1.0])
        }
        2 => {
            integrate_circle(
                |t: f64| directional_variation_unchecked(shape, &[t.cos(), t.sin()]),
                &shape.planar_kinks(),
                quad,
            )?
            .value
        }
        3 => integrate_sphere(|u| directional_variation_unchecked(shape, &u), quad)?.value,
        _ => {
            return Err(Error::Domain(format!(
                "sphere quadrature is only available for d ≤ 3, got d = {d}"
            )))
        }
    };
    Ok(norm * total)
}

/// Evaluator for g_Ω together with its support radius.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceProfile {
    pub shape: ShapeSpec,
    pub support_radius: f64,
    /// False when g comes from the clipping engine or from quadrature.
    pub closed_form: bool,
}

impl CovarianceProfile {
    pub fn new(shape: &ShapeSpec) -> Self {
        let closed_form = match shape {
            ShapeSpec::UnitBall(d) => d.get() <= 3,
            ShapeSpec::Rectangle { .. } | ShapeSpec::Interval { .. } => true,
            ShapeSpec::ConvexPolygon(_) => false,
        };
        CovarianceProfile {
            shape: shape.clone(),
            support_radius: shape.geometry().support_radius,
            closed_form,
        }
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        covariance(&self.shape, y)
    }
}

/// Value of the d = 2 ball covariance in the arcsine closed form, used
/// by tests as an independent route.
#[cfg(test)]
pub(crate) fn ball2_closed(s: f64) -> f64 {
    2.0 * (1.0 - s * s).sqrt().asin() - 2.0 * s * (1.0 - s * s).sqrt()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use super::*;
    use crate::shapes::ShapeSpec;
    use proptest::prelude::*;

    fn dim(d: usize) -> Dim {
        Dim::new(d).unwrap()
    }

    #[test]
    fn theta_examples() {
        assert!((theta_integral(dim(2), 1.0).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((theta_integral(dim(3), 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(theta_integral(dim(2), 0.0).unwrap(), 0.0);
        for d in 2..=8 {
            let want = ball_volume_raw(d) / (2.0 * sphere_area_raw(d - 1));
            let got = theta_integral(dim(d), 1.0).unwrap();
            assert!((got - want).abs() < 1e-13, "d={d}: {got} vs {want}");
        }
        assert!(theta_integral(dim(2), 1.5).is_err());
        assert!(theta_integral(dim(1), 0.5).is_err());
    }

    #[test]
    fn theta_complement_matches_difference() {
        for d in 2..=6 {
            for s in [0.1, 0.5, 0.9] {
                let direct = theta_integral(dim(d), 1.0).unwrap()
                    - theta_integral(dim(d), (1.0 - s * s as f64).sqrt()).unwrap();
                let comp = theta_complement(dim(d), s).unwrap();
                assert!((direct - comp).abs() < 1e-13, "d={d} s={s}");
            }
        }
        // series branch continuity
        let a = theta_complement(dim(2), 0.999e-3).unwrap();
        let s: f64 = 0.999e-3;
        let b = 0.5 * (s.asin() - s * (1.0 - s * s).sqrt());
        assert!((a - b).abs() < 1e-18);
    }

    #[test]
    fn ball_covariance_closed_forms() {
        let b2 = ShapeSpec::unit_ball(2).unwrap();
        for s in [0.0, 0.1, 0.5, 0.77, 0.99] {
            let g = covariance(&b2, &[2.0 * s, 0.0]).unwrap();
            assert!((g - ball2_closed(s)).abs() < 1e-14, "s={s}");
        }
        let b3 = ShapeSpec::unit_ball(3).unwrap();
        let g = covariance(&b3, &[0.0, 0.0, 1.0]).unwrap();
        assert!((g - 5.0 * PI / 12.0).abs() < 1e-14);
        for s in [0.2, 0.6, 0.95] {
            let g = covariance(&b3, &[2.0 * s, 0.0, 0.0]).unwrap();
            let expanded = 4.0 * PI / 3.0 * (1.0 - s * s * s) - 2.0 * PI * s * (1.0 - s * s);
            assert!((g - expanded).abs() < 1e-14);
        }
        assert_eq!(covariance(&b3, &[0.0, 2.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn ball_covariance_general_d_is_a_volume() {
        // g(0) = w_d and g decreases to 0 at |y| = 2
        for d in 4..=7 {
            let b = ShapeSpec::unit_ball(d).unwrap();
            let mut y = vec![0.0; d];
            assert!((covariance(&b, &y).unwrap() - ball_volume_raw(d)).abs() < 1e-12);
            let mut last = f64::INFINITY;
            for k in 1..20 {
                y[0] = 0.1 * k as f64;
                let g = covariance(&b, &y).unwrap();
                assert!(g <= last && g >= 0.0);
                last = g;
            }
            y[0] = 1.9999;
            assert!(covariance(&b, &y).unwrap() < 1e-8);
        }
    }

    #[test]
    fn rectangle_examples() {
        let q = ShapeSpec::square();
        assert_eq!(covariance(&q, &[0.0, 0.0]).unwrap(), 4.0);
        assert_eq!(covariance(&q, &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(covariance(&q, &[2.0, 0.3]).unwrap(), 0.0);
        assert!(covariance(&q, &[1.0]).is_err());
    }

    #[test]
    fn directional_variation_examples() {
        let q = ShapeSpec::square();
        for t in [0.0, 0.4, 1.3, 2.9, 4.0] {
            let u = [f64::cos(t), f64::sin(t)];
            let v = directional_variation(&q, &u).unwrap();
            assert!((v - 4.0 * (u[0].abs() + u[1].abs())).abs() < 1e-14);
        }
        let b = ShapeSpec::unit_ball(2).unwrap();
        assert!((directional_variation(&b, &[0.6, 0.8]).unwrap() - 4.0).abs() < 1e-15);
        let p = ShapeSpec::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
        assert!((directional_variation(&p, &[1.0, 0.0]).unwrap() - 4.0).abs() < 1e-15);
        assert!(matches!(
            directional_variation(&q, &[1.0, 1.0]),
            Err(Error::NonUnitVector { .. })
        ));
    }

    #[test]
    fn perimeter_identity() {
        let spec = QuadSpec::default();
        let b2 = ShapeSpec::unit_ball(2).unwrap();
        assert!((perimeter_from_variations(&b2, &spec).unwrap() - 2.0 * PI).abs() < 1e-10);
        let q = ShapeSpec::square();
        assert!((perimeter_from_variations(&q, &spec).unwrap() - 8.0).abs() < 1e-8);
        let b3 = ShapeSpec::unit_ball(3).unwrap();
        assert!((perimeter_from_variations(&b3, &spec).unwrap() - 4.0 * PI).abs() < 1e-8);
        let shapes = [
            ShapeSpec::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap(),
            ShapeSpec::polygon(vec![[0.0, 0.0], [3.0, 0.2], [2.5, 1.7], [0.4, 2.0]]).unwrap(),
            ShapeSpec::rectangle(0.5, 2.0).unwrap(),
            ShapeSpec::interval(-1.0, 4.0).unwrap(),
        ];
        for s in &shapes {
            let p = perimeter_from_variations(s, &spec).unwrap();
            assert!((p - s.geometry().perimeter).abs() < 1e-8, "{}", s.label());
        }
        assert!(perimeter_from_variations(&ShapeSpec::unit_ball(4).unwrap(), &spec).is_err());
    }

    proptest! {
        #[test]
        fn polygon_square_agrees_with_rectangle(x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let q = ShapeSpec::square();
            let p = ShapeSpec::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
            let a = covariance(&q, &[x, y]).unwrap();
            let b = covariance(&p, &[x, y]).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }

        #[test]
        fn polygon_covariance_symmetric_and_bounded(x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let p = ShapeSpec::polygon(vec![[0.0, 0.0], [1.5, 0.1], [1.0, 1.2], [-0.2, 0.8]]).unwrap();
            let g = covariance(&p, &[x, y]).unwrap();
            let gm = covariance(&p, &[-x, -y]).unwrap();
            let v = p.geometry().volume;
            prop_assert!(g >= 0.0 && g <= v + 1e-14);
            prop_assert!((g - gm).abs() < 1e-12);
        }
    }
}
