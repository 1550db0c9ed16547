//! Shape descriptors, their exact geometry, set covariance functions, and
//! the γ deficit built from them.

mod checks;
mod covariance;
pub(crate) mod gamma;
pub(crate) mod moment;
pub mod polygon;

pub use checks::{covariance_self_checks, PropertyCheck, SelfCheckReport};
pub use covariance::{
    covariance, directional_variation, perimeter_from_variations, theta_integral,
    CovarianceProfile,
};
pub use gamma::{
    gamma, gamma_numeric, gamma_weighted_integral, square_i_terms, GammaIntegral, GammaProfile,
};
pub use moment::integrate_weighted;
pub use polygon::{Point, Polygon};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{unit_ball_volume, unit_sphere_area, Dim};

/// A bounded convex set Ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapeFile", into = "ShapeFile")]
pub enum ShapeSpec {
    /// The unit ball centered at the origin.
    UnitBall(Dim),
    /// [-h₁, h₁] × [-h₂, h₂].
    Rectangle { half_widths: [f64; 2] },
    ConvexPolygon(Polygon),
    /// (a, b) on the line.
    Interval { a: f64, b: f64 },
}

/// Volume, perimeter, and covariance support radius of a shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeGeometry {
    pub volume: f64,
    pub perimeter: f64,
    pub support_radius: f64,
    pub dim: Dim,
}

impl ShapeSpec {
    pub fn unit_ball(d: usize) -> Result<Self> {
        Ok(ShapeSpec::UnitBall(Dim::new(d)?))
    }

    pub fn rectangle(h1: f64, h2: f64) -> Result<Self> {
        if !(h1 > 0.0 && h2 > 0.0 && h1.is_finite() && h2.is_finite()) {
            return Err(Error::InvalidShape(format!(
                "rectangle half-widths must be positive, got ({h1}, {h2})"
            )));
        }
        Ok(ShapeSpec::Rectangle {
            half_widths: [h1, h2],
        })
    }

    /// The square [-1, 1]².
    pub fn square() -> Self {
        ShapeSpec::Rectangle {
            half_widths: [1.0, 1.0],
        }
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        Ok(ShapeSpec::ConvexPolygon(Polygon::new(vertices)?))
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidShape(format!("interval needs a < b, got ({a}, {b})")));
        }
        Ok(ShapeSpec::Interval { a, b })
    }

    pub fn dim(&self) -> Dim {
        match self {
            ShapeSpec::UnitBall(d) => *d,
            ShapeSpec::Rectangle { .. } | ShapeSpec::ConvexPolygon(_) => Dim::new(2).unwrap(),
            ShapeSpec::Interval { .. } => Dim::new(1).unwrap(),
        }
    }

    pub fn is_unit_square(&self) -> bool {
        matches!(self, ShapeSpec::Rectangle { half_widths } if *half_widths == [1.0, 1.0])
    }

    /// Short label for reports.
    pub fn label(&self) -> String {
        match self {
            ShapeSpec::UnitBall(d) => format!("ball{}", d.get()),
            ShapeSpec::Rectangle { half_widths: [h1, h2] } => {
                if self.is_unit_square() {
                    "square".into()
                } else {
                    format!("rectangle({h1},{h2})")
                }
            }
            ShapeSpec::ConvexPolygon(p) => format!("polygon[{}]", p.vertices().len()),
            ShapeSpec::Interval { a, b } => format!("interval({a},{b})"),
        }
    }

    pub fn geometry(&self) -> ShapeGeometry {
        let dim = self.dim();
        let (volume, perimeter, support_radius) = match self {
            ShapeSpec::UnitBall(d) => (unit_ball_volume(*d), unit_sphere_area(*d), 2.0),
            ShapeSpec::Rectangle { half_widths: [h1, h2] } => {
                (4.0 * h1 * h2, 4.0 * (h1 + h2), 2.0 * h1.hypot(*h2))
            }
            ShapeSpec::ConvexPolygon(p) => (p.area(), p.perimeter(), p.diameter()),
            ShapeSpec::Interval { a, b } => (b - a, 2.0, b - a),
        };
        ShapeGeometry {
            volume,
            perimeter,
            support_radius,
            dim,
        }
    }

    /// Closed-set membership test.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x.len())?;
        Ok(match self {
            ShapeSpec::UnitBall(_) => x.iter().map(|v| v * v).sum::<f64>() <= 1.0,
            ShapeSpec::Rectangle { half_widths } => {
                x[0].abs() <= half_widths[0] && x[1].abs() <= half_widths[1]
            }
            ShapeSpec::ConvexPolygon(p) => p.contains([x[0], x[1]]),
            ShapeSpec::Interval { a, b } => x[0] >= *a && x[0] <= *b,
        })
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        let d = self.dim().get();
        if len == d {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: d,
                got: len,
            })
        }
    }

    /// Support of the covariance function (the difference body) for planar
    /// shapes.
    pub(crate) fn support_polygon(&self) -> Option<Polygon> {
        match self {
            ShapeSpec::Rectangle { half_widths: [h1, h2] } => Some(
                Polygon::new(vec![
                    [-2.0 * h1, -2.0 * h2],
                    [2.0 * h1, -2.0 * h2],
                    [2.0 * h1, 2.0 * h2],
                    [-2.0 * h1, 2.0 * h2],
                ])
                .expect("rectangle support is a valid polygon"),
            ),
            ShapeSpec::ConvexPolygon(p) => Some(p.difference_body()),
            _ => None,
        }
    }

    /// Angles in (0, 2π] where planar integrands built from this shape may
    /// have kinks: edge directions and support-polygon vertex directions.
    pub(crate) fn planar_kinks(&self) -> Vec<f64> {
        use std::f64::consts::TAU;
        let mut out = Vec::new();
        let mut push = |x: f64, y: f64| {
            let mut a = y.atan2(x);
            if a <= 0.0 {
                a += TAU;
            }
            out.push(a);
        };
        match self {
            ShapeSpec::Rectangle { .. } => {
                for (x, y) in [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)] {
                    push(x, y);
                }
            }
            ShapeSpec::ConvexPolygon(p) => {
                for (a, b) in p.edges() {
                    push(b[0] - a[0], b[1] - a[1]);
                    push(a[0] - b[0], a[1] - b[1]);
                }
            }
            _ => {}
        }
        if let Some(sp) = self.support_polygon() {
            for v in sp.vertices() {
                push(v[0], v[1]);
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    }

    /// Parse the JSON shape description used by the command line tool.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ShapeFile =
            serde_json::from_str(text).map_err(|e| Error::ShapeFile(e.to_string()))?;
        ShapeSpec::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("shape serializes")
    }
}

/// On-disk shape format:
/// `{"kind": "ball"|"rectangle"|"polygon"|"interval", "dim": .., "half_widths": [..],
///   "vertices": [[x, y], ..], "a": .., "b": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_widths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl TryFrom<ShapeFile> for ShapeSpec {
    type Error = Error;

    fn try_from(f: ShapeFile) -> Result<ShapeSpec> {
        let need_dim = |expected: usize| -> Result<()> {
            match f.dim {
                Some(d) if d != expected => Err(Error::ShapeFile(format!(
                    "kind {:?} is {expected}-dimensional, got dim {d}",
                    f.kind
                ))),
                _ => Ok(()),
            }
        };
        match f.kind.as_str() {
            "ball" => {
                let d = f
                    .dim
                    .ok_or_else(|| Error::ShapeFile("ball requires \"dim\"".into()))?;
                ShapeSpec::unit_ball(d)
            }
            "rectangle" => {
                need_dim(2)?;
                match f.half_widths.as_deref() {
                    Some([h1, h2]) => ShapeSpec::rectangle(*h1, *h2),
                    _ => Err(Error::ShapeFile("rectangle requires two half_widths".into())),
                }
            }
            "polygon" => {
                need_dim(2)?;
                let v = f
                    .vertices
                    .ok_or_else(|| Error::ShapeFile("polygon requires \"vertices\"".into()))?;
                ShapeSpec::polygon(v)
            }
            "interval" => {
                need_dim(1)?;
                match (f.a, f.b) {
                    (Some(a), Some(b)) => ShapeSpec::interval(a, b),
                    _ => Err(Error::ShapeFile("interval requires \"a\" and \"b\"".into())),
                }
            }
            other => Err(Error::ShapeFile(format!("unknown shape kind {other:?}"))),
        }
    }
}

impl From<ShapeSpec> for ShapeFile {
    fn from(s: ShapeSpec) -> ShapeFile {
        let mut f = ShapeFile {
            kind: String::new(),
            dim: Some(s.dim().get()),
            half_widths: None,
            vertices: None,
            a: None,
            b: None,
        };
        match s {
            ShapeSpec::UnitBall(_) => f.kind = "ball".into(),
            ShapeSpec::Rectangle { half_widths } => {
                f.kind = "rectangle".into();
                f.half_widths = Some(half_widths.to_vec());
            }
            ShapeSpec::ConvexPolygon(p) => {
                f.kind = "polygon".into();
                f.vertices = Some(p.vertices().to_vec());
            }
            ShapeSpec::Interval { a, b } => {
                f.kind = "interval".into();
                f.a = Some(a);
                f.b = Some(b);
            }
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn geometry_examples() {
        let g = ShapeSpec::unit_ball(2).unwrap().geometry();
        assert!((g.volume - PI).abs() < 1e-15);
        assert!((g.perimeter - 2.0 * PI).abs() < 1e-15);
        assert_eq!(g.support_radius, 2.0);

        let g = ShapeSpec::square().geometry();
        assert_eq!((g.volume, g.perimeter), (4.0, 8.0));
        assert!((g.support_radius - 2.0 * 2f64.sqrt()).abs() < 1e-15);

        let tri = ShapeSpec::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let g = tri.geometry();
        assert!((g.volume - 0.5).abs() < 1e-15);
        assert!((g.perimeter - 2.0 - 2f64.sqrt()).abs() < 1e-15);
        assert!((g.support_radius - 2f64.sqrt()).abs() < 1e-15);

        let g = ShapeSpec::interval(0.0, 3.0).unwrap().geometry();
        assert_eq!((g.volume, g.perimeter, g.support_radius), (3.0, 2.0, 3.0));
    }

    #[test]
    fn invalid_shapes() {
        assert!(ShapeSpec::rectangle(0.0, 1.0).is_err());
        assert!(ShapeSpec::interval(1.0, 1.0).is_err());
        assert!(ShapeSpec::unit_ball(0).is_err());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let s = ShapeSpec::from_json(r#"{"kind":"ball","dim":3}"#).unwrap();
        assert_eq!(s, ShapeSpec::unit_ball(3).unwrap());
        let s = ShapeSpec::from_json(r#"{"kind":"rectangle","dim":2,"half_widths":[1,1]}"#).unwrap();
        assert!(s.is_unit_square());
        let p = ShapeSpec::from_json(r#"{"kind":"polygon","vertices":[[0,0],[1,0],[0,1]]}"#).unwrap();
        assert_eq!(ShapeSpec::from_json(&p.to_json()).unwrap(), p);
        let i = ShapeSpec::from_json(r#"{"kind":"interval","a":0,"b":2.5}"#).unwrap();
        assert_eq!(i, ShapeSpec::interval(0.0, 2.5).unwrap());

        assert!(ShapeSpec::from_json(r#"{"kind":"ball"}"#).is_err());
        assert!(ShapeSpec::from_json(r#"{"kind":"torus"}"#).is_err());
        assert!(ShapeSpec::from_json(r#"{"kind":"rectangle","dim":3,"half_widths":[1,1]}"#).is_err());
        assert!(ShapeSpec::from_json(r#"{"kind":"polygon","vertices":[[0,0],[0,1],[1,0]]}"#).is_err());
        assert!(ShapeSpec::from_json(r#"{"kind":"interval","a":0,"b":1,"c":2}"#).is_err());
    }
}
