//! Convex polygons: validation, exact geometry, and the translate-overlap
//! area by successive half-plane clipping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

const DUP_TOL: f64 = 1e-12;
/// Overlaps below this area are treated as empty.
const SLIVER_AREA: f64 = 1e-14;

#[inline]
fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Signed shoelace area, positive for counterclockwise order.
pub(crate) fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    // relative to the first vertex to limit cancellation
    let o = pts[0];
    let mut acc = 0.0;
    for i in 1..n - 1 {
        acc += cross(sub(pts[i], o), sub(pts[i + 1], o));
    }
    0.5 * acc
}

/// Keep the part of the convex polygon `poly` on the left of the directed
/// line a -> b.
pub(crate) fn clip_halfplane(poly: &[Point], a: Point, b: Point, out: &mut Vec<Point>) {
    out.clear();
    let n = poly.len();
    if n == 0 {
        return;
    }
    let dir = sub(b, a);
    let side = |p: Point| cross(dir, sub(p, a));
    let mut prev = poly[n - 1];
    let mut prev_s = side(prev);
    for &cur in poly {
        let cur_s = side(cur);
        if cur_s >= 0.0 {
            if prev_s < 0.0 {
                out.push(intersect(prev, cur, prev_s, cur_s));
            }
            out.push(cur);
        } else if prev_s >= 0.0 {
            out.push(intersect(prev, cur, prev_s, cur_s));
        }
        prev = cur;
        prev_s = cur_s;
    }
}

#[inline]
fn intersect(p: Point, q: Point, sp: f64, sq: f64) -> Point {
    let t = sp / (sp - sq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// Andrew's monotone chain; counterclockwise, collinear points dropped.
pub(crate) fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= DUP_TOL && (a[1] - b[1]).abs() <= DUP_TOL);
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if cross(sub(b, a), sub(p, a)) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// A convex polygon with counterclockwise vertices and no collinear or
/// repeated vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl TryFrom<Vec<Point>> for Polygon {
    type Error = Error;
    fn try_from(v: Vec<Point>) -> Result<Polygon> {
        Polygon::new(v)
    }
}

impl From<Polygon> for Vec<Point> {
    fn from(p: Polygon) -> Vec<Point> {
        p.vertices
    }
}

impl Polygon {
    /// Validate and normalize a vertex list. Collinear vertices are removed;
    /// clockwise, non-convex, repeated, or degenerate input is rejected.
    pub fn new(vertices: Vec<Point>) -> Result<Polygon> {
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidShape("non-finite polygon coordinate".into()));
        }
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidShape(format!("polygon needs at least 3 vertices, got {n}")));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if norm(sub(vertices[i], vertices[j])) <= DUP_TOL {
                    return Err(Error::InvalidShape(format!("repeated vertex at index {i} and {j}")));
                }
            }
        }
        let scale = vertices
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0_f64, |m, c| m.max(c.abs()))
            .max(1.0);
        let tol = 1e-12 * scale * scale;

        // drop collinear vertices
        let mut kept: Vec<Point> = vertices.clone();
        loop {
            let m = kept.len();
            if m < 3 {
                return Err(Error::InvalidShape("polygon is degenerate".into()));
            }
            let idx = (0..m).find(|&i| {
                let prev = kept[(i + m - 1) % m];
                let next = kept[(i + 1) % m];
                cross(sub(kept[i], prev), sub(next, kept[i])).abs() <= tol
            });
            match idx {
                Some(i) => {
                    kept.remove(i);
                }
                None => break,
            }
        }

        let m = kept.len();
        let mut turning = 0.0;
        for i in 0..m {
            let prev = kept[(i + m - 1) % m];
            let next = kept[(i + 1) % m];
            let e0 = sub(kept[i], prev);
            let e1 = sub(next, kept[i]);
            let c = cross(e0, e1);
            if c < 0.0 {
                return Err(Error::InvalidShape(if signed_area(&kept) < 0.0 {
                    "vertices must be in counterclockwise order".into()
                } else {
                    format!("polygon is not convex at vertex {i}")
                }));
            }
            turning += c.atan2(e0[0] * e1[0] + e0[1] * e1[1]);
        }
        if (turning - std::f64::consts::TAU).abs() > 1e-9 {
            return Err(Error::InvalidShape("polygon boundary is not simple".into()));
        }
        Ok(Polygon { vertices: kept })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Directed edges (start, end).
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| norm(sub(b, a))).sum()
    }

    /// Maximum pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut best = 0.0_f64;
        for i in 0..v.len() {
            for j in (i + 1)..v.len() {
                best = best.max(norm(sub(v[i], v[j])));
            }
        }
        best
    }

    /// Closed-set membership.
    pub fn contains(&self, p: Point) -> bool {
        self.edges().all(|(a, b)| cross(sub(b, a), sub(p, a)) >= 0.0)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Σ_edges |e|·|n_e·u|, twice the width of the shadow of the polygon on
    /// the line orthogonal to u.
    pub fn projected_boundary(&self, u: Point) -> f64 {
        // |e| |n_e·u| = |cross(e, u)|
        self.edges().map(|(a, b)| cross(sub(b, a), u).abs()).sum()
    }

    /// |P ∩ (P + y)|.
    pub fn translate_overlap_area(&self, y: Point) -> f64 {
        let mut cur = self.vertices.clone();
        let mut next = Vec::with_capacity(cur.len() + 4);
        for (a, b) in self.edges() {
            let a = [a[0] + y[0], a[1] + y[1]];
            let b = [b[0] + y[0], b[1] + y[1]];
            clip_halfplane(&cur, a, b, &mut next);
            std::mem::swap(&mut cur, &mut next);
            if cur.len() < 3 {
                return 0.0;
            }
        }
        let area = signed_area(&cur);
        if area < SLIVER_AREA {
            0.0
        } else {
            area
        }
    }

    /// The difference body P - P (support of the covariance function).
    pub fn difference_body(&self) -> Polygon {
        let v = &self.vertices;
        let mut pts = Vec::with_capacity(v.len() * v.len());
        for a in v {
            for b in v {
                pts.push(sub(*a, *b));
            }
        }
        Polygon {
            vertices: convex_hull(&pts),
        }
    }

    /// Small-translation structure of the covariance.
    ///
    /// P ∩ (P + r u) keeps the outward normals of P with support numbers
    /// h_e - r δ_e, δ_e = max(0, -n_e·u). While no edge shrinks to zero the
    /// area is quadratic in the support numbers, so
    /// |P| - |P ∩ (P + r u)| = r V_u/2 - r² q(u) for r ≤ r_max(u).
    /// Returns (q(u), r_max(u)).
    pub(crate) fn small_shift(&self, u: Point) -> (f64, f64) {
        let n = self.vertices.len();
        let mut len = Vec::with_capacity(n);
        let mut normal = Vec::with_capacity(n);
        for (a, b) in self.edges() {
            let e = sub(b, a);
            let l = norm(e);
            len.push(l);
            normal.push([e[1] / l, -e[0] / l]);
        }
        // exterior angle between normals i and i+1
        let (mut off, mut cot) = (vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            let (p, q) = (normal[i], normal[(i + 1) % n]);
            let th = cross(p, q).atan2(p[0] * q[0] + p[1] * q[1]);
            off[i] = 1.0 / th.sin();
            cot[i] = 1.0 / th.tan();
        }
        let delta: Vec<f64> = normal
            .iter()
            .map(|m| (-(m[0] * u[0] + m[1] * u[1])).max(0.0))
            .collect();
        let mut quad = 0.0;
        let mut r_max = f64::INFINITY;
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let next = (i + 1) % n;
            let m_delta = -(cot[prev] + cot[i]) * delta[i]
                + off[prev] * delta[prev]
                + off[i] * delta[next];
            quad += 0.5 * delta[i] * m_delta;
            if m_delta > 0.0 {
                r_max = r_max.min(len[i] / m_delta);
            }
        }
        (quad, r_max)
    }

    /// Largest r with r·u in the polygon; the origin must be interior.
    pub fn radial_extent(&self, u: Point) -> f64 {
        let mut best = f64::INFINITY;
        for (a, b) in self.edges() {
            let e = sub(b, a);
            // outward normal (unnormalized) for counterclockwise order
            let n = [e[1], -e[0]];
            let nu = n[0] * u[0] + n[1] * u[1];
            if nu > 0.0 {
                let h = n[0] * a[0] + n[1] * a[1];
                best = best.min(h / nu);
            }
        }
        best
    }
}
