//! Randomized probes of the structural properties of g_Ω.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quadrature::QuadSpec;

use super::covariance::{covariance, directional_variation_unchecked};
use super::moment::integrate_weighted;
use super::ShapeSpec;

const PROBES: usize = 200;
const DIRECTIONS: usize = 24;

/// Outcome of one property probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    /// Worst deviation seen.
    pub achieved: f64,
    pub required: f64,
    /// Probe point at which `achieved` was attained.
    pub witness: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfCheckReport {
    pub shape: String,
    pub checks: Vec<PropertyCheck>,
}

impl SelfCheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Worst {
    value: f64,
    witness: Option<Vec<f64>>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: 0.0,
            witness: None,
        }
    }

    fn update(&mut self, value: f64, at: &[f64]) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.witness = Some(at.to_vec());
        }
    }

    fn check(self, name: &str, required: f64) -> PropertyCheck {
        PropertyCheck {
            name: name.to_string(),
            passed: self.value <= required,
            achieved: self.value,
            required,
            witness: self.witness,
        }
    }
}

fn random_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn scaled(u: &[f64], r: f64) -> Vec<f64> {
    u.iter().map(|c| c * r).collect()
}

/// Probe bounds, symmetry, total mass, compact support and the Lipschitz
/// slope of g_Ω. Violations are reported, not raised; only evaluation
/// failures produce an error.
pub fn covariance_self_checks(
    shape: &ShapeSpec,
    quad: &QuadSpec,
    seed: u64,
) -> Result<SelfCheckReport> {
    let geo = shape.geometry();
    let d = geo.dim.get();
    let ell = geo.support_radius;
    let vol = geo.volume;
    let origin = vec![0.0; d];
    let g0 = covariance(shape, &origin)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut bounds = Worst::new();
    bounds.update((g0 - vol).abs() / vol, &origin);
    let mut symmetry = Worst::new();
    let mut support = Worst::new();
    for _ in 0..PROBES {
        let u = random_direction(&mut rng, d);
        let y = scaled(&u, ell * rng.random::<f64>());
        let g = covariance(shape, &y)?;
        let minus: Vec<f64> = y.iter().map(|c| -c).collect();
        let gm = covariance(shape, &minus)?;
        bounds.update(((-g).max(g - g0).max(0.0)) / vol, &y);
        symmetry.update((g - gm).abs() / vol, &y);

        let far = scaled(&u, ell * (1.0 + rng.random::<f64>()));
        support.update(covariance(shape, &far)?.abs(), &far);
    }

    let mass = integrate_weighted(shape, |_| 1.0, &[], quad)?;
    let mut total = Worst::new();
    total.update((mass.value / (vol * vol) - 1.0).abs(), &origin);

    let mut lipschitz = Worst::new();
    for _ in 0..DIRECTIONS {
        let u = random_direction(&mut rng, d);
        let q = |r: f64| -> Result<f64> { Ok((g0 - covariance(shape, &scaled(&u, r))?) / r) };
        let (coarse, fine) = (q(1e-4)?, q(1e-5)?);
        let half_v = 0.5 * directional_variation_unchecked(shape, &u);
        let dev = (coarse / fine - 1.0).abs().max((fine / half_v - 1.0).abs());
        lipschitz.update(dev, &u);
    }

    Ok(SelfCheckReport {
        shape: shape.label(),
        checks: vec![
            bounds.check("bounds", 1e-12),
            symmetry.check("symmetry", 1e-12),
            total.check("total_mass", 1e-6),
            support.check("support", 0.0),
            lipschitz.check("lipschitz", 1e-2),
        ],
    })
}
