//! Numerical integration substrate: adaptive 1-D Gauss-Kronrod, dyadic
//! panels for integrands on (0, 1], composite rules on the circle and the
//! 2-sphere, and the small-t limit fit.

mod adaptive;
mod circle;
mod extrapolate;
mod gauss;
mod sphere;

pub use adaptive::{integrate_1d, integrate_1d_points, integrate_dyadic, DyadicEstimate};
pub use circle::integrate_circle;
pub use extrapolate::{extrapolate_limit, LimitFit};
pub use gauss::{gauss_legendre, GaussRule};
pub use sphere::integrate_sphere;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and rule orders shared by every integration in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub sphere_polar_order: usize,
    pub sphere_azimuth_order: usize,
    pub circle_points_per_sector: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 10_000,
            sphere_polar_order: 64,
            sphere_azimuth_order: 128,
            circle_points_per_sector: 64,
        }
    }
}

impl QuadSpec {
    pub fn with_tol(tol: f64) -> Self {
        QuadSpec {
            abs_tol: tol,
            rel_tol: tol,
            ..QuadSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Domain("quadrature tolerances must be positive".into()));
        }
        if self.sphere_polar_order < 8
            || self.sphere_azimuth_order < 8
            || self.circle_points_per_sector < 8
        {
            return Err(Error::Domain("rule orders must be at least 8".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be positive".into()));
        }
        Ok(())
    }

    /// Same spec with both tolerances scaled, used for inner integrals of
    /// nested quadratures.
    pub fn tightened(&self, factor: f64) -> Self {
        QuadSpec {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }
}

/// An integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

/// Compensated (Neumaier) summation in the given order.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
