//! Dimension constants, the Poisson kernel, and the tanh deficit integral.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_1d, QuadSpec};

/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

/// Spatial dimension, 1 ≤ d ≤ 16.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dim(usize);

impl Dim {
    pub fn new(d: usize) -> Result<Dim> {
        if (1..=MAX_DIM).contains(&d) {
            Ok(Dim(d))
        } else {
            Err(Error::Domain(format!("dimension {d} outside 1..={MAX_DIM}")))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub(crate) fn f(self) -> f64 {
        self.0 as f64
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;
    fn try_from(d: usize) -> Result<Dim> {
        Dim::new(d)
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.0
    }
}

/// Γ(m/2) for integer m ≥ 1, by the exact recursion from Γ(1/2) and Γ(1).
pub(crate) fn gamma_half(m: usize) -> f64 {
    debug_assert!(m >= 1);
    let (mut x, mut g) = if m % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    let target = m as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// κ_d = Γ((d+1)/2) / π^{(d+1)/2}.
pub fn kappa(d: Dim) -> f64 {
    let n = d.get() + 1;
    gamma_half(n) / PI.powf(n as f64 / 2.0)
}

/// Volume of the unit ball, π^{d/2} / Γ(1 + d/2). Accepts d = 0 (w_0 = 1).
pub(crate) fn ball_volume_raw(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0) / gamma_half(d + 2)
}

pub fn unit_ball_volume(d: Dim) -> f64 {
    ball_volume_raw(d.get())
}

/// Surface area of the unit sphere S^{d-1}; for d = 1 this is the counting
/// measure of {-1, 1}.
pub fn unit_sphere_area(d: Dim) -> f64 {
    d.f() * unit_ball_volume(d)
}

/// Poisson kernel p_t(x) = κ_d t / (t² + |x|²)^{(d+1)/2}.
pub fn poisson_kernel(d: Dim, t: f64, x: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    if x.len() != d.get() {
        return Err(Error::DimensionMismatch {
            expected: d.get(),
            got: x.len(),
        });
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok(radial_kernel(d, t, r2.sqrt()))
}

/// p_t at distance r from the origin.
pub(crate) fn radial_kernel(d: Dim, t: f64, r: f64) -> f64 {
    kappa(d) * t / (t * t + r * r).powf((d.f() + 1.0) / 2.0)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// ln(1 + e^x) without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// tanh^d(θ) - 1 evaluated without cancellation for large θ.
pub(crate) fn tanh_pow_minus_one(d: Dim, theta: f64) -> f64 {
    // tanh θ = 1 - 2/(e^{2θ}+1)
    let q = 2.0 * (-softplus(2.0 * theta)).exp();
    (d.f() * (-q).ln_1p()).exp_m1()
}

/// Bound on |∫_0^∞ (tanh^d - 1)| from the binomial expansion.
pub fn tanh_deficit_bound(d: Dim) -> f64 {
    let n = d.get();
    (1..=n)
        .map(|j| binomial(n, j) * 2f64.powi(j as i32) / (2.0 * j as f64))
        .sum()
}

/// J_d = ∫_0^∞ (tanh^d θ - 1) dθ to absolute accuracy `tol`.
///
/// Uses tanh^d θ = 1 + Σ_j C(d,j) (-2)^j (e^{2θ}+1)^{-j}; each term is
/// integrated adaptively on [0, 25 + d] and the remainder is bounded by
/// Σ_j C(d,j) 2^j e^{-2jθ*} / (2j).
pub fn tanh_deficit(d: Dim, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let n = d.get();
    let cut = 25.0 + d.f();
    let tail: f64 = (1..=n)
        .map(|j| {
            let jf = j as f64;
            binomial(n, j) * 2f64.powi(j as i32) * (-2.0 * jf * cut).exp() / (2.0 * jf)
        })
        .sum();
    if tail > tol {
        return Err(Error::ToleranceNotMet {
            requested: tol,
            achieved: tail,
        });
    }
    let weight: f64 = (1..=n).map(|j| binomial(n, j) * 2f64.powi(j as i32)).sum();
    let spec = QuadSpec {
        abs_tol: 0.5 * (tol - tail).max(0.0) / weight,
        rel_tol: 1e-15,
        max_subdivisions: 2_000,
        ..QuadSpec::default()
    };
    let mut total = 0.0;
    let mut err_bound = tail;
    for j in 1..=n {
        let jf = j as f64;
        let est = integrate_1d(|th| (-jf * softplus(2.0 * th)).exp(), 0.0, cut, &spec)?;
        let c = binomial(n, j) * (-2f64).powi(j as i32);
        total += c * est.value;
        err_bound += c.abs() * est.err;
    }
    if err_bound > tol {
        return Err(Error::ToleranceNotMet {
            requested: tol,
            achieved: err_bound,
        });
    }
    Ok(total)
}

/// Dimension-dependent constants entering the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    pub dim: Dim,
    pub kappa: f64,
    pub ball_volume: f64,
    pub sphere_area: f64,
    pub tanh_deficit: f64,
}

impl KernelConstants {
    pub fn new(d: Dim, tol: f64) -> Result<Self> {
        Ok(KernelConstants {
            dim: d,
            kappa: kappa(d),
            ball_volume: unit_ball_volume(d),
            sphere_area: unit_sphere_area(d),
            tanh_deficit: tanh_deficit(d, tol)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dim(d: usize) -> Dim {
        Dim::new(d).unwrap()
    }

    #[test]
    fn dim_guard() {
        assert!(Dim::new(0).is_err());
        assert!(Dim::new(17).is_err());
        assert_eq!(Dim::new(16).unwrap().get(), 16);
    }

    #[test]
    fn gamma_half_values() {
        assert_relative_eq!(gamma_half(1), PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gamma_half(2), 1.0);
        assert_relative_eq!(gamma_half(5), 0.75 * PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gamma_half(10), 24.0);
    }

    #[test]
    fn kappa_table() {
        assert_relative_eq!(kappa(dim(1)), 1.0 / PI, max_relative = 1e-15);
        assert_relative_eq!(kappa(dim(2)), 1.0 / (2.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(kappa(dim(3)), 1.0 / (PI * PI), max_relative = 1e-15);
    }

    #[test]
    fn ball_and_sphere_table() {
        assert_relative_eq!(unit_ball_volume(dim(1)), 2.0, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area(dim(1)), 2.0, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(dim(2)), PI, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area(dim(2)), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(dim(3)), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area(dim(3)), 4.0 * PI, max_relative = 1e-15);
    }

    #[test]
    fn kappa_times_lower_ball_volume_is_one_over_pi() {
        for d in 1..=MAX_DIM {
            let k = kappa(dim(d)) * ball_volume_raw(d - 1);
            assert_relative_eq!(k, 1.0 / PI, max_relative = 1e-13);
        }
    }

    #[test]
    fn kernel_examples() {
        let z = [0.0, 0.0];
        assert_relative_eq!(poisson_kernel(dim(2), 1.0, &z).unwrap(), 1.0 / (2.0 * PI));
        assert_relative_eq!(
            poisson_kernel(dim(2), 2.0, &z).unwrap(),
            1.0 / (8.0 * PI),
            max_relative = 1e-15
        );
        let lhs = poisson_kernel(dim(3), 0.5, &[0.0, 0.0, 0.5]).unwrap();
        let rhs = 0.5f64.powi(-3) * poisson_kernel(dim(3), 1.0, &[0.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-14);
        assert!(poisson_kernel(dim(2), 0.0, &z).is_err());
        assert!(poisson_kernel(dim(2), 1.0, &[0.0]).is_err());
    }

    #[test]
    fn kernel_normalization() {
        // radial mass inside |x| <= 1e6 t, with r = t tan(phi)
        for d in 1..=3 {
            let dd = dim(d);
            let t = 0.3;
            let rmax = 1e6 * t;
            let spec = QuadSpec::default();
            let mass = integrate_1d(
                |r| unit_sphere_area(dd) * r.powi(d as i32 - 1) * radial_kernel(dd, t, r),
                0.0,
                rmax,
                &spec,
            )
            .or_else(|_| {
                // polar-angle substitution for the heavy tail
                integrate_1d(
                    |phi: f64| {
                        let r = t * phi.tan();
                        let jac = t / phi.cos().powi(2);
                        unit_sphere_area(dd) * r.powi(d as i32 - 1) * radial_kernel(dd, t, r) * jac
                    },
                    0.0,
                    (rmax / t).atan(),
                    &spec,
                )
            })
            .unwrap();
            assert!((1.0 - mass.value).abs() < 1e-4, "d={d} mass={}", mass.value);
        }
    }

    #[test]
    fn tanh_deficit_paper_table() {
        assert!((tanh_deficit(dim(2), 1e-12).unwrap() + 1.0).abs() < 1e-12);
        let j3 = -(2f64.ln()) - 0.5;
        assert!((tanh_deficit(dim(3), 1e-12).unwrap() - j3).abs() < 1e-12);
        assert!((tanh_deficit(dim(1), 1e-12).unwrap() + 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn tanh_deficit_d4_against_fixed_grid() {
        // composite Simpson on [0, 40] with 2^16 panels plus the e^{-80} tail bound
        let n = 1 << 16;
        let h = 40.0 / n as f64;
        let f = |x: f64| x.tanh().powi(4) - 1.0;
        let mut s = f(0.0) + f(40.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let oracle = s * h / 3.0;
        let got = tanh_deficit(dim(4), 1e-11).unwrap();
        assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
    }

    #[test]
    fn tanh_deficit_bounds() {
        for d in 1..=8 {
            let j = tanh_deficit(dim(d), 1e-10).unwrap();
            assert!(j < 0.0);
            assert!(j.abs() <= tanh_deficit_bound(dim(d)));
        }
    }

    #[test]
    fn stable_tanh_power() {
        for d in [1, 2, 5] {
            for th in [0.0, 0.3, 2.0, 10.0] {
                let direct = (th as f64).tanh().powi(d as i32) - 1.0;
                let stable = tanh_pow_minus_one(dim(d), th);
                assert!((direct - stable).abs() < 1e-14);
            }
            // large theta: -2d e^{-2θ}
            let th = 30.0;
            let stable = tanh_pow_minus_one(dim(d), th);
            assert_relative_eq!(stable, -2.0 * d as f64 * (-2.0 * th).exp(), max_relative = 1e-10);
        }
    }

    proptest! {
        #[test]
        fn kernel_scaling(t in 0.01f64..10.0, x in -5.0f64..5.0, y in -5.0f64..5.0, z in -5.0f64..5.0) {
            let d = dim(3);
            let lhs = poisson_kernel(d, t, &[x, y, z]).unwrap();
            let rhs = t.powi(-3) * poisson_kernel(d, 1.0, &[x / t, y / t, z / t]).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
        }
    }
}
