use std::f64::consts::PI;

use poisson_heat::asymptotics::{formula_constant, heat_content};
use poisson_heat::shapes::{covariance, gamma, perimeter_from_variations};
use poisson_heat::{QuadSpec, ShapeSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scaled_polygon(base: &[[f64; 2]], lambda: f64) -> ShapeSpec {
    ShapeSpec::polygon(base.iter().map(|p| [lambda * p[0], lambda * p[1]]).collect()).unwrap()
}

const TRIANGLE: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]];

#[test]
fn polygon_square_covariance_matches_rectangle_at_random_points() {
    let poly = ShapeSpec::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
    let sq = ShapeSpec::square();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let y = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let a = covariance(&poly, &y).unwrap();
        let b = covariance(&sq, &y).unwrap();
        assert!((a - b).abs() < 1e-10, "{y:?}: {a} vs {b}");
    }
}

#[test]
fn polygon_gamma_matches_closed_form_square() {
    let q = QuadSpec::default();
    let poly = ShapeSpec::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
    for k in 1..=40 {
        let s = k as f64 / 40.0;
        let a = gamma(&poly, s, &q).unwrap();
        let b = gamma(&ShapeSpec::square(), s, &q).unwrap();
        assert!((a - b).abs() < 1e-9, "s={s}: {a} vs {b}");
    }
}

#[test]
fn perimeter_identity_for_polygons() {
    let q = QuadSpec::default();
    for shape in [
        scaled_polygon(&TRIANGLE, 1.0),
        ShapeSpec::polygon(vec![[0.0, 0.0], [2.0, 0.0], [2.5, 1.0], [1.0, 2.0], [-0.5, 1.0]]).unwrap(),
        ShapeSpec::rectangle(0.3, 2.0).unwrap(),
    ] {
        let p = perimeter_from_variations(&shape, &q).unwrap();
        assert!((p - shape.geometry().perimeter).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // C_{λΩ} = λ^{d-1} (C_Ω + (Per_Ω/π) ln λ) in the plane
    #[test]
    fn third_term_scaling(lambda in 0.3f64..4.0, h1 in 0.2f64..2.0, h2 in 0.2f64..2.0) {
        let q = QuadSpec::default();
        let base = ShapeSpec::rectangle(h1, h2).unwrap();
        let big = ShapeSpec::rectangle(lambda * h1, lambda * h2).unwrap();
        let (c, _) = formula_constant(&base, &q).unwrap();
        let (cl, _) = formula_constant(&big, &q).unwrap();
        let per = base.geometry().perimeter;
        let want = lambda * (c + per / PI * lambda.ln());
        prop_assert!((cl - want).abs() < 1e-7 * (1.0 + want.abs()), "{} vs {}", cl, want);
    }

    // H_{λΩ}(λt) = λ^d H_Ω(t)
    #[test]
    fn heat_content_scaling(lambda in 0.3f64..3.0, t in 0.005f64..1.0) {
        let q = QuadSpec::default();
        let a = heat_content(&scaled_polygon(&TRIANGLE, lambda), lambda * t, &q).unwrap();
        let b = heat_content(&scaled_polygon(&TRIANGLE, 1.0), t, &q).unwrap();
        prop_assert!((a - lambda * lambda * b).abs() < 1e-8 * lambda * lambda);
    }

    #[test]
    fn gamma_is_nonnegative_for_polygons(
        s in 0.001f64..1.0,
        x in 0.2f64..1.5,
        y in 0.3f64..1.5,
    ) {
        let q = QuadSpec::default();
        let shape = ShapeSpec::polygon(vec![[0.0, 0.0], [1.0, 0.0], [x, y]]).unwrap();
        prop_assert!(gamma(&shape, s, &q).unwrap() >= -1e-8);
    }

    #[test]
    fn interval_constant_matches_closed_form(len in 0.1f64..10.0) {
        let q = QuadSpec::default();
        let (c, _) = formula_constant(&ShapeSpec::interval(0.0, len).unwrap(), &q).unwrap();
        prop_assert!((c - 2.0 / PI * (1.0 + len.ln())).abs() < 1e-10);
    }
}
