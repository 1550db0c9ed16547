use std::f64::consts::TAU;

use super::gauss::gauss_legendre;
use super::{compensated_sum, integrate_1d, Estimate, QuadSpec};
use crate::error::{Error, Result};

/// Integrate a function of the angle over the full circle.
///
/// `kinks` are angles in (0, 2π] where the integrand may fail to be smooth;
/// each inter-kink panel gets a composite Gauss-Legendre rule, checked
/// against a rule of twice the order. Panels where the two disagree are
/// handed to the adaptive integrator.
pub fn integrate_circle<F: FnMut(f64) -> f64>(
    mut f: F,
    kinks: &[f64],
    spec: &QuadSpec,
) -> Result<Estimate> {
    let mut ks: Vec<f64> = Vec::with_capacity(kinks.len());
    for &k in kinks {
        if !(k > 0.0 && k <= TAU) {
            return Err(Error::Domain(format!("kink angle {k} outside (0, 2π]")));
        }
        ks.push(k);
    }
    ks.sort_by(f64::total_cmp);
    ks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let mut bounds = Vec::with_capacity(ks.len() + 1);
    if ks.is_empty() {
        bounds.extend([0.0, TAU]);
    } else {
        bounds.extend(ks.iter().copied());
        bounds.push(ks[0] + TAU);
    }

    let n = spec.circle_points_per_sector;
    let lo = gauss_legendre(n);
    let hi = gauss_legendre(2 * n);
    let panels = bounds.len() - 1;
    let mut values = Vec::with_capacity(panels);
    let mut err = 0.0;
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        let share = QuadSpec {
            abs_tol: spec.abs_tol * (b - a) / TAU,
            ..*spec
        };
        let q1 = lo.integrate(a, b, &mut f);
        let q2 = hi.integrate(a, b, &mut f);
        if !(q1.is_finite() && q2.is_finite()) {
            return Err(Error::NonFiniteIntegrand { x: a, value: q2 });
        }
        let diff = (q2 - q1).abs();
        if diff <= share.abs_tol.max(share.rel_tol * q2.abs()) {
            values.push(q2);
            err += diff;
        } else {
            let e = integrate_1d(&mut f, a, b, &share)?;
            values.push(e.value);
            err += e.err;
        }
    }
    Ok(Estimate {
        value: compensated_sum(values),
        err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn constant_gives_circumference() {
        let e = integrate_circle(|_| 1.0, &[], &QuadSpec::default()).unwrap();
        assert!((e.value - TAU).abs() < 1e-13);
    }

    #[test]
    fn abs_cos_plus_abs_sin_with_listed_kinks() {
        let kinks = [FRAC_PI_2, PI, 1.5 * PI, TAU];
        let e = integrate_circle(
            |t: f64| t.cos().abs() + t.sin().abs(),
            &kinks,
            &QuadSpec::default(),
        )
        .unwrap();
        assert!((e.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn unlisted_kink_falls_back_to_adaptive() {
        let e = integrate_circle(|t: f64| t.cos().abs(), &[], &QuadSpec::default()).unwrap();
        assert!((e.value - 4.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_kinks_outside_range() {
        assert!(integrate_circle(|_| 1.0, &[7.0], &QuadSpec::default()).is_err());
    }
}
