use std::f64::consts::TAU;

use super::gauss::gauss_legendre;
use super::{Estimate, QuadSpec};
use crate::error::{Error, Result};

const MAX_ORDER: usize = 4096;

fn product_rule<F: FnMut([f64; 3]) -> f64>(f: &mut F, polar: usize, azimuth: usize) -> f64 {
    let rule = gauss_legendre(polar);
    let dphi = TAU / azimuth as f64;
    let mut total = 0.0;
    for (z, w) in rule.nodes.iter().zip(&rule.weights) {
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let mut ring = 0.0;
        for j in 0..azimuth {
            let phi = (j as f64 + 0.5) * dphi;
            ring += f([rho * phi.cos(), rho * phi.sin(), *z]);
        }
        total += w * ring * dphi;
    }
    total
}

/// Integrate over the unit sphere in R^3 with a Gauss-Legendre (in the polar
/// cosine) times uniform (in azimuth) product rule. The error is the change
/// when both orders are doubled; the doubled-order value is returned.
pub fn integrate_sphere<F: FnMut([f64; 3]) -> f64>(mut f: F, spec: &QuadSpec) -> Result<Estimate> {
    let (p, a) = (spec.sphere_polar_order, spec.sphere_azimuth_order);
    if p < 8 || a < 8 {
        return Err(Error::Domain("sphere rule orders must be at least 8".into()));
    }
    if 2 * p > MAX_ORDER || 2 * a > MAX_ORDER {
        return Err(Error::OrderLimit(format!(
            "sphere orders {p}x{a} exceed the doubling limit {MAX_ORDER}"
        )));
    }
    let coarse = product_rule(&mut f, p, a);
    let fine = product_rule(&mut f, 2 * p, 2 * a);
    if !fine.is_finite() {
        return Err(Error::NonFiniteIntegrand { x: 0.0, value: fine });
    }
    Ok(Estimate {
        value: fine,
        err: (fine - coarse).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn area_of_sphere() {
        let e = integrate_sphere(|_| 1.0, &QuadSpec::default()).unwrap();
        assert!((e.value - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn second_moment() {
        let e = integrate_sphere(|u| u[2] * u[2], &QuadSpec::default()).unwrap();
        assert!((e.value - 4.0 * PI / 3.0).abs() < 1e-12);
        let e = integrate_sphere(|u| u[0] * u[0], &QuadSpec::default()).unwrap();
        assert!((e.value - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn order_limit() {
        let spec = QuadSpec {
            sphere_polar_order: 4000,
            ..QuadSpec::default()
        };
        assert!(matches!(integrate_sphere(|_| 1.0, &spec), Err(Error::OrderLimit(_))));
    }
}
