use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Parametric cross-section families. Placement is given separately by
/// [`CrossSectionSpec::center`]; polygon vertices are relative to it too.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Rectangle { width: f64, height: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionSpec {
    #[serde(flatten)]
    pub shape: Shape,
    /// Translation of the shape; the tube axis always passes through y = 0.
    #[serde(default)]
    pub center: [f64; 2],
    /// Lattice points per unit length.
    pub resolution: usize,
}

const INSIDE_TOL: f64 = 1e-12;

impl CrossSectionSpec {
    pub fn new(shape: Shape, resolution: usize) -> Self {
        CrossSectionSpec {
            shape,
            center: [0.0, 0.0],
            resolution,
        }
    }

    pub fn disk(radius: f64, resolution: usize) -> Self {
        Self::new(Shape::Disk { radius }, resolution)
    }

    pub fn square(side: f64, resolution: usize) -> Self {
        Self::new(
            Shape::Rectangle {
                width: side,
                height: side,
            },
            resolution,
        )
    }

    pub fn ellipse(a: f64, b: f64, resolution: usize) -> Self {
        Self::new(Shape::Ellipse { a, b }, resolution)
    }

    pub fn with_center(mut self, center: [f64; 2]) -> Self {
        self.center = center;
        self
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::InvalidInput(m.to_string()));
        if self.resolution == 0 {
            return bad("resolution must be positive");
        }
        if !(self.center[0].is_finite() && self.center[1].is_finite()) {
            return bad("center must be finite");
        }
        match &self.shape {
            Shape::Disk { radius } if !(*radius > 0.0 && radius.is_finite()) => {
                return bad("disk radius must be positive")
            }
            Shape::Ellipse { a, b } if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) => {
                return bad("ellipse semi-axes must be positive")
            }
            Shape::Rectangle { width, height }
                if !(*width > 0.0 && *height > 0.0 && width.is_finite() && height.is_finite()) =>
            {
                return bad("rectangle sides must be positive")
            }
            Shape::Polygon { vertices } => validate_polygon(vertices)?,
            _ => {}
        }
        if !self.contains([0.0, 0.0]) {
            return Err(LabError::OriginExclusion);
        }
        Ok(())
    }

    fn local(&self, p: [f64; 2]) -> [f64; 2] {
        [p[0] - self.center[0], p[1] - self.center[1]]
    }

    /// Strict interior test; points on the boundary are outside.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let q = self.local(p);
        match &self.shape {
            Shape::Disk { radius } => (q[0] * q[0] + q[1] * q[1]).sqrt() < radius - INSIDE_TOL,
            Shape::Ellipse { a, b } => {
                let s = (q[0] / a).powi(2) + (q[1] / b).powi(2);
                s < 1.0 - INSIDE_TOL
            }
            Shape::Rectangle { width, height } => {
                q[0].abs() < 0.5 * width - INSIDE_TOL && q[1].abs() < 0.5 * height - INSIDE_TOL
            }
            Shape::Polygon { vertices } => {
                point_in_polygon(vertices, q) && edge_distance(vertices, q).0 > INSIDE_TOL
            }
        }
    }

    /// Distance from an interior point `p` to the first boundary crossing
    /// along the unit direction `d`.
    pub fn ray_to_boundary(&self, p: [f64; 2], d: [f64; 2]) -> f64 {
        let q = self.local(p);
        match &self.shape {
            Shape::Disk { radius } => quadratic_exit(q, d, [1.0 / radius, 1.0 / radius]),
            Shape::Ellipse { a, b } => quadratic_exit(q, d, [1.0 / a, 1.0 / b]),
            Shape::Rectangle { width, height } => {
                let mut t = f64::INFINITY;
                let half = [0.5 * width, 0.5 * height];
                for k in 0..2 {
                    if d[k] > 0.0 {
                        t = t.min((half[k] - q[k]) / d[k]);
                    } else if d[k] < 0.0 {
                        t = t.min((-half[k] - q[k]) / d[k]);
                    }
                }
                t
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut t = f64::INFINITY;
                for k in 0..n {
                    let a = vertices[k];
                    let b = vertices[(k + 1) % n];
                    if let Some(s) = ray_segment(q, d, a, b) {
                        t = t.min(s);
                    }
                }
                t
            }
        }
    }

    /// Outward unit normal at (or nearest to) the boundary point `p`.
    pub fn normal(&self, p: [f64; 2]) -> [f64; 2] {
        let q = self.local(p);
        let n = match &self.shape {
            Shape::Disk { .. } => q,
            Shape::Ellipse { a, b } => [q[0] / (a * a), q[1] / (b * b)],
            Shape::Rectangle { width, height } => {
                if q[0].abs() - 0.5 * width > q[1].abs() - 0.5 * height {
                    [q[0].signum(), 0.0]
                } else {
                    [0.0, q[1].signum()]
                }
            }
            Shape::Polygon { vertices } => {
                let (_, k) = edge_distance(vertices, q);
                let a = vertices[k];
                let b = vertices[(k + 1) % vertices.len()];
                let e = [b[0] - a[0], b[1] - a[1]];
                let s = signed_area(vertices).signum();
                [s * e[1], -s * e[0]]
            }
        };
        let l = (n[0] * n[0] + n[1] * n[1]).sqrt();
        [n[0] / l, n[1] / l]
    }

    pub fn area(&self) -> f64 {
        match &self.shape {
            Shape::Disk { radius } => PI * radius * radius,
            Shape::Ellipse { a, b } => PI * a * b,
            Shape::Rectangle { width, height } => width * height,
            Shape::Polygon { vertices } => signed_area(vertices).abs(),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match &self.shape {
            Shape::Disk { radius } => 2.0 * PI * radius,
            Shape::Ellipse { a, b } => {
                // Ramanujan's second approximation.
                let h = ((a - b) / (a + b)).powi(2);
                PI * (a + b) * (1.0 + 3.0 * h / (10.0 + (4.0 - 3.0 * h).sqrt()))
            }
            Shape::Rectangle { width, height } => 2.0 * (width + height),
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|k| {
                        let a = vertices[k];
                        let b = vertices[(k + 1) % n];
                        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
                    })
                    .sum()
            }
        }
    }

    /// K = max |y|^2 over the closure of S, measured from the tube axis.
    pub fn max_radius2(&self) -> f64 {
        let c = self.center;
        let pts: Vec<[f64; 2]> = match &self.shape {
            Shape::Disk { radius } => {
                let r = (c[0] * c[0] + c[1] * c[1]).sqrt() + radius;
                return r * r;
            }
            Shape::Ellipse { a, b } => (0..4096)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / 4096.0;
                    [a * t.cos(), b * t.sin()]
                })
                .collect(),
            Shape::Rectangle { width, height } => vec![
                [0.5 * width, 0.5 * height],
                [-0.5 * width, 0.5 * height],
                [0.5 * width, -0.5 * height],
                [-0.5 * width, -0.5 * height],
            ],
            Shape::Polygon { vertices } => vertices.clone(),
        };
        pts.iter()
            .map(|p| (p[0] + c[0]).powi(2) + (p[1] + c[1]).powi(2))
            .fold(0.0, f64::max)
    }

    /// Half-widths of an axis-aligned box containing S, about the center.
    pub fn half_extent(&self) -> [f64; 2] {
        match &self.shape {
            Shape::Disk { radius } => [*radius, *radius],
            Shape::Ellipse { a, b } => [*a, *b],
            Shape::Rectangle { width, height } => [0.5 * width, 0.5 * height],
            Shape::Polygon { vertices } => {
                let mut e = [0.0f64, 0.0f64];
                for v in vertices {
                    e[0] = e[0].max(v[0].abs());
                    e[1] = e[1].max(v[1].abs());
                }
                e
            }
        }
    }
}

/// Exit distance from the scaled unit ball `|diag(s)(q + t d)| = 1`.
fn quadratic_exit(q: [f64; 2], d: [f64; 2], s: [f64; 2]) -> f64 {
    let qs = [q[0] * s[0], q[1] * s[1]];
    let ds = [d[0] * s[0], d[1] * s[1]];
    let a = ds[0] * ds[0] + ds[1] * ds[1];
    let b = qs[0] * ds[0] + qs[1] * ds[1];
    let c = qs[0] * qs[0] + qs[1] * qs[1] - 1.0;
    let disc = (b * b - a * c).max(0.0);
    // Stable root of a t^2 + 2 b t + c = 0 with c < 0.
    let t = if b >= 0.0 { -c / (b + disc.sqrt()) } else { (-b + disc.sqrt()) / a };
    t.max(0.0)
}

fn ray_segment(q: [f64; 2], d: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Option<f64> {
    let e = [b[0] - a[0], b[1] - a[1]];
    let den = d[0] * e[1] - d[1] * e[0];
    if den.abs() < 1e-300 {
        return None;
    }
    let w = [a[0] - q[0], a[1] - q[1]];
    let t = (w[0] * e[1] - w[1] * e[0]) / den;
    let s = (w[0] * d[1] - w[1] * d[0]) / den;
    if t > 0.0 && (-1e-14..=1.0 + 1e-14).contains(&s) {
        Some(t)
    } else {
        None
    }
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|k| {
            let a = v[k];
            let b = v[(k + 1) % n];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

fn point_in_polygon(v: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance to the nearest edge and that edge's index.
fn edge_distance(v: &[[f64; 2]], p: [f64; 2]) -> (f64, usize) {
    let n = v.len();
    let mut best = (f64::INFINITY, 0);
    for k in 0..n {
        let a = v[k];
        let b = v[(k + 1) % n];
        let e = [b[0] - a[0], b[1] - a[1]];
        let l2 = e[0] * e[0] + e[1] * e[1];
        let t = (((p[0] - a[0]) * e[0] + (p[1] - a[1]) * e[1]) / l2).clamp(0.0, 1.0);
        let c = [a[0] + t * e[0] - p[0], a[1] + t * e[1] - p[1]];
        let dist = (c[0] * c[0] + c[1] * c[1]).sqrt();
        if dist < best.0 {
            best = (dist, k);
        }
    }
    best
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn validate_polygon(v: &[[f64; 2]]) -> Result<()> {
    let n = v.len();
    if n < 3 {
        return Err(LabError::InvalidInput("polygon needs at least 3 vertices".into()));
    }
    if v.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(LabError::InvalidInput("polygon vertices must be finite".into()));
    }
    if signed_area(v).abs() < 1e-14 {
        return Err(LabError::InvalidInput("polygon has zero area".into()));
    }
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(LabError::InvalidInput("polygon is not simple".into()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_distances() {
        let d = CrossSectionSpec::disk(1.0, 8);
        assert!((d.ray_to_boundary([0.5, 0.0], [1.0, 0.0]) - 0.5).abs() < 1e-14);
        let e = CrossSectionSpec::ellipse(1.0, 0.5, 8);
        assert!((e.ray_to_boundary([0.0, 0.25], [0.0, 1.0]) - 0.25).abs() < 1e-14);
        let s = CrossSectionSpec::square(1.0, 8);
        assert!((s.ray_to_boundary([0.1, 0.2], [0.0, -1.0]) - 0.7).abs() < 1e-14);
        let tri = CrossSectionSpec::new(
            Shape::Polygon {
                vertices: vec![[-1.0, -1.0], [1.0, -1.0], [0.0, 1.0]],
            },
            8,
        );
        assert!((tri.ray_to_boundary([0.0, 0.0], [0.0, -1.0]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normals_point_outward() {
        let e = CrossSectionSpec::ellipse(2.0, 1.0, 8);
        let n = e.normal([2.0, 0.0]);
        assert!((n[0] - 1.0).abs() < 1e-14 && n[1].abs() < 1e-14);
        let tri = CrossSectionSpec::new(
            Shape::Polygon {
                vertices: vec![[-1.0, -1.0], [0.0, 1.0], [1.0, -1.0]],
            },
            8,
        );
        let n = tri.normal([0.0, -1.0]);
        assert!((n[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn origin_must_be_inside() {
        let s = CrossSectionSpec::disk(1.0, 8).with_center([2.0, 0.0]);
        assert_eq!(s.validate().unwrap_err().code(), "origin-exclusion");
        let p = CrossSectionSpec::new(
            Shape::Polygon {
                vertices: vec![[1.0, 1.0], [2.0, 1.0], [1.5, 2.0]],
            },
            8,
        );
        assert_eq!(p.validate().unwrap_err().code(), "origin-exclusion");
    }

    #[test]
    fn bowtie_is_rejected() {
        let p = CrossSectionSpec::new(
            Shape::Polygon {
                vertices: vec![[-1.0, -1.0], [1.0, 1.0], [1.0, -1.0], [-1.0, 1.0]],
            },
            8,
        );
        assert_eq!(p.validate().unwrap_err().code(), "invalid-input");
    }

    #[test]
    fn bounding_radius() {
        assert!((CrossSectionSpec::square(1.0, 8).max_radius2() - 0.5).abs() < 1e-15);
        assert!((CrossSectionSpec::disk(1.0, 8).max_radius2() - 1.0).abs() < 1e-15);
    }
}
