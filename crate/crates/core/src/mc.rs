//! Monte Carlo estimators for H_Ω(t) and g_Ω(y), independent of the
//! quadrature pipeline.
//!
//! Samples are drawn in blocks; block `b` uses a ChaCha8 generator seeded
//! with `seed` on stream `b`, and blocks contribute integer hit counts, so
//! the estimate does not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Dim;
use crate::shapes::ShapeSpec;

const BLOCK: u64 = 1 << 16;
const MIN_SAMPLES: u64 = 1_000;
const REJECTION_CAP: f64 = 1_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_hits(volume: f64, hits: u64, n: u64, seed: u64) -> Self {
        let p = hits as f64 / n as f64;
        McEstimate {
            mean: volume * p,
            stderr: volume * (p * (1.0 - p) / n as f64).sqrt(),
            n,
            seed,
        }
    }

    /// |value - mean| measured in standard errors (infinite when the
    /// estimate is exact and disagrees).
    pub fn z_score(&self, value: f64) -> f64 {
        let gap = (value - self.mean).abs();
        if gap == 0.0 {
            0.0
        } else {
            gap / self.stderr
        }
    }
}

/// Fill `out` with a draw from p₁ as G/|g₀|.
pub fn sample_cauchy_into<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let g0: f64 = loop {
        let g: f64 = rng.sample(StandardNormal);
        if g != 0.0 {
            break g.abs();
        }
    };
    for x in out.iter_mut() {
        let g: f64 = rng.sample(StandardNormal);
        *x = g / g0;
    }
}

/// One draw from the d-dimensional Cauchy law with density p₁.
pub fn sample_cauchy<R: Rng + ?Sized>(d: Dim, rng: &mut R) -> Vec<f64> {
    let mut out = vec![0.0; d.get()];
    sample_cauchy_into(rng, &mut out);
    out
}

/// Uniform sampler on Ω.
struct Uniform<'a> {
    shape: &'a ShapeSpec,
    lo: [f64; 2],
    hi: [f64; 2],
    /// Box area over shape area.
    expected_draws: f64,
}

impl<'a> Uniform<'a> {
    fn new(shape: &'a ShapeSpec) -> Self {
        let (lo, hi, expected_draws) = match shape {
            ShapeSpec::ConvexPolygon(p) => {
                let (lo, hi) = p.bounding_box();
                let box_area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
                (lo, hi, box_area / p.area())
            }
            _ => ([0.0; 2], [0.0; 2], 1.0),
        };
        Uniform {
            shape,
            lo,
            hi,
            expected_draws,
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R, out: &mut [f64], budget: &mut f64) -> Result<()> {
        match self.shape {
            ShapeSpec::UnitBall(d) => {
                let n = d.get();
                loop {
                    let mut norm = 0.0;
                    for x in out.iter_mut() {
                        *x = rng.sample(StandardNormal);
                        norm += *x * *x;
                    }
                    if norm > 0.0 {
                        let radius = rng.random::<f64>().powf(1.0 / n as f64);
                        let scale = radius / norm.sqrt();
                        out.iter_mut().for_each(|x| *x *= scale);
                        return Ok(());
                    }
                }
            }
            ShapeSpec::Rectangle { half_widths } => {
                for (x, h) in out.iter_mut().zip(half_widths) {
                    *x = h * (2.0 * rng.random::<f64>() - 1.0);
                }
                Ok(())
            }
            ShapeSpec::Interval { a, b } => {
                out[0] = a + (b - a) * rng.random::<f64>();
                Ok(())
            }
            ShapeSpec::ConvexPolygon(p) => loop {
                if *budget <= 0.0 {
                    return Err(Error::SamplingFailure(format!(
                        "rejection sampling exceeded {REJECTION_CAP}× the expected number of draws"
                    )));
                }
                *budget -= 1.0;
                let x = self.lo[0] + (self.hi[0] - self.lo[0]) * rng.random::<f64>();
                let y = self.lo[1] + (self.hi[1] - self.lo[1]) * rng.random::<f64>();
                if p.contains([x, y]) {
                    out[0] = x;
                    out[1] = y;
                    return Ok(());
                }
            },
        }
    }
}

fn check_n(n: u64) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::Domain(format!("need at least {MIN_SAMPLES} samples, got {n}")));
    }
    Ok(())
}

/// Count hits over `n` samples split into seeded blocks.
fn count_hits<F>(shape: &ShapeSpec, n: u64, seed: u64, trial: F) -> Result<u64>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64], &mut [f64]) -> Result<bool> + Sync,
{
    let d = shape.dim().get();
    let uniform = Uniform::new(shape);
    let blocks = n.div_ceil(BLOCK);
    let counts: Vec<u64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let size = BLOCK.min(n - b * BLOCK);
            let mut budget = REJECTION_CAP * uniform.expected_draws * size as f64;
            let mut x = vec![0.0; d];
            let mut scratch = vec![0.0; d];
            let mut hits = 0u64;
            for _ in 0..size {
                uniform.draw(&mut rng, &mut x, &mut budget)?;
                if trial(&mut rng, &mut x, &mut scratch)? {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect::<Result<_>>()?;
    Ok(counts.iter().sum())
}

/// |Ω|·P(X + tW ∈ Ω) with X uniform on Ω and W ~ p₁.
pub fn mc_heat_content(shape: &ShapeSpec, t: f64, n: u64, seed: u64) -> Result<McEstimate> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    check_n(n)?;
    let hits = count_hits(shape, n, seed, |rng, x, w| {
        sample_cauchy_into(rng, w);
        for (xi, wi) in x.iter_mut().zip(w.iter()) {
            *xi += t * wi;
        }
        shape.contains(x)
    })?;
    Ok(McEstimate::from_hits(shape.geometry().volume, hits, n, seed))
}

/// |Ω|·P(X - y ∈ Ω) with X uniform on Ω.
pub fn mc_covariance(shape: &ShapeSpec, y: &[f64], n: u64, seed: u64) -> Result<McEstimate> {
    shape.check_dim(y.len())?;
    check_n(n)?;
    let hits = count_hits(shape, n, seed, |_, x, _| {
        for (xi, yi) in x.iter_mut().zip(y) {
            *xi -= yi;
        }
        shape.contains(x)
    })?;
    Ok(McEstimate::from_hits(shape.geometry().volume, hits, n, seed))
}
