use super::shape::CrossSectionSpec;
use crate::error::{LabError, Result};
use crate::linalg::sparse::{Assembler, SparseOperator};
use std::collections::HashMap;

/// Lattice directions in the order +y1, -y1, +y2, -y2.
pub const DIRS: [[i64; 2]; 4] = [[1, 0], [-1, 0], [0, 1], [0, -1]];

const OPPOSITE: [usize; 4] = [1, 0, 3, 2];
const THETA_MIN: f64 = 1e-2;

/// What a node sees one lattice step away.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Link {
    Node(usize),
    /// The boundary is crossed at `theta * h` (0 < theta <= 1).
    Wall {
        theta: f64,
        point: [f64; 2],
        normal: [f64; 2],
    },
}

#[derive(Debug, Clone)]
pub struct GridMesh2D {
    pub spec: CrossSectionSpec,
    pub h: f64,
    pub nodes: Vec<[f64; 2]>,
    pub lattice: Vec<[i64; 2]>,
    pub index: HashMap<[i64; 2], usize>,
    pub links: Vec<[Link; 4]>,
    /// Cell area owned by each node; sums to area(S) up to O(h^2).
    pub cell_weights: Vec<f64>,
    /// Weight of the boundary value in each `Wall` direction of each node.
    pub wall_weights: Vec<[f64; 4]>,
}

impl GridMesh2D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weight of the identity mass matrix used for normalization.
    pub fn mass(&self) -> f64 {
        self.h * self.h
    }

    pub fn mass_total(&self) -> f64 {
        self.mass() * self.len() as f64
    }

    /// Cell-based quadrature with trapezoid strips along the boundary.
    /// `wall_value(i, d)` is the integrand at the boundary point seen from
    /// node `i` in direction `d`.
    pub fn integrate<F>(&self, nodal: &[f64], wall_value: F) -> f64
    where
        F: Fn(usize, usize) -> f64,
    {
        let mut s = 0.0;
        for i in 0..self.len() {
            s += self.cell_weights[i] * nodal[i];
            for d in 0..4 {
                let w = self.wall_weights[i][d];
                if w != 0.0 {
                    s += w * wall_value(i, d);
                }
            }
        }
        s
    }
}

pub fn build_mesh(spec: &CrossSectionSpec) -> Result<GridMesh2D> {
    spec.validate()?;
    let res = spec.resolution as f64;
    let h = 1.0 / res;
    let ext = spec.half_extent();
    let lo = [
        ((spec.center[0] - ext[0]) * res).floor() as i64 - 1,
        ((spec.center[1] - ext[1]) * res).floor() as i64 - 1,
    ];
    let hi = [
        ((spec.center[0] + ext[0]) * res).ceil() as i64 + 1,
        ((spec.center[1] + ext[1]) * res).ceil() as i64 + 1,
    ];
    let coord = |k: [i64; 2]| [k[0] as f64 / res, k[1] as f64 / res];

    let mut nodes = Vec::new();
    let mut lattice = Vec::new();
    let mut index = HashMap::new();
    for j in lo[1]..=hi[1] {
        for i in lo[0]..=hi[0] {
            let p = coord([i, j]);
            if spec.contains(p) {
                index.insert([i, j], nodes.len());
                nodes.push(p);
                lattice.push([i, j]);
            }
        }
    }
    if nodes.len() < 9 {
        return Err(LabError::MeshTooCoarse(format!(
            "{} interior nodes at resolution {} (need at least 9)",
            nodes.len(),
            spec.resolution
        )));
    }

    let mut links = Vec::with_capacity(nodes.len());
    for (n, k) in lattice.iter().enumerate() {
        let p = nodes[n];
        let mut row = [Link::Node(0); 4];
        for (d, dir) in DIRS.iter().enumerate() {
            let unit = [dir[0] as f64, dir[1] as f64];
            let t = spec.ray_to_boundary(p, unit);
            let neighbor = index.get(&[k[0] + dir[0], k[1] + dir[1]]).copied();
            row[d] = match neighbor {
                Some(m) if t >= h * (1.0 - 1e-12) => Link::Node(m),
                _ => {
                    let tt = t.min(h);
                    let point = [p[0] + tt * unit[0], p[1] + tt * unit[1]];
                    Link::Wall {
                        theta: tt / h,
                        point,
                        normal: spec.normal(point),
                    }
                }
            };
        }
        links.push(row);
    }

    let (cell_weights, wall_weights) = strip_weights(h, &links);
    Ok(GridMesh2D {
        spec: spec.clone(),
        h,
        nodes,
        lattice,
        index,
        links,
        cell_weights,
        wall_weights,
    })
}

/// Each node owns four quadrants reaching h/2 toward inner neighbors and
/// all the way to the wall otherwise. Quadrants touching a wall use the
/// trapezoid rule between the node and the wall point; the outer corner of
/// a doubly cut quadrant is extrapolated linearly.
fn strip_weights(h: f64, links: &[[Link; 4]]) -> (Vec<f64>, Vec<[f64; 4]>) {
    let extent = |l: &Link| match l {
        Link::Node(_) => (0.5 * h, false),
        Link::Wall { theta, .. } => (theta * h, true),
    };
    let mut cell = vec![0.0; links.len()];
    let mut wall = vec![[0.0; 4]; links.len()];
    for (i, row) in links.iter().enumerate() {
        for dx in 0..2 {
            for dy in 2..4 {
                let (a, cx) = extent(&row[dx]);
                let (b, cy) = extent(&row[dy]);
                let area = a * b;
                match (cx, cy) {
                    (false, false) => cell[i] += area,
                    (true, false) => {
                        cell[i] += 0.5 * area;
                        wall[i][dx] += 0.5 * area;
                    }
                    (false, true) => {
                        cell[i] += 0.5 * area;
                        wall[i][dy] += 0.5 * area;
                    }
                    (true, true) => {
                        wall[i][dx] += 0.5 * area;
                        wall[i][dy] += 0.5 * area;
                    }
                }
            }
        }
    }
    (cell, wall)
}

/// Symmetric 5-point Dirichlet Laplacian; cut links put the wall at its
/// true distance `theta * h` in the diagonal.
pub fn assemble_transverse_laplacian(mesh: &GridMesh2D) -> SparseOperator {
    let n = mesh.len();
    let h2 = mesh.h * mesh.h;
    let mut a = Assembler::with_capacity(n, 5 * n);
    for (i, row) in mesh.links.iter().enumerate() {
        let mut diag = 0.0;
        for (d, link) in row.iter().enumerate() {
            match *link {
                Link::Node(j) => {
                    diag += 1.0 / h2;
                    // Mirror each pair once, from the +y1 / +y2 side.
                    if d == 0 || d == 2 {
                        debug_assert_eq!(mesh.links[j][OPPOSITE[d]], Link::Node(i));
                        a.add_sym(i, j, -1.0 / h2);
                    }
                }
                Link::Wall { theta, .. } => diag += 1.0 / (theta.max(THETA_MIN) * h2),
            }
        }
        a.add(i, i, diag);
    }
    a.build()
}

/// Nodal derivative along axis `axis` (0: y1, 1: y2) from the three-point
/// Lagrange stencil through the neighbors or wall points (where u = 0).
pub fn gradient_operator(mesh: &GridMesh2D, axis: usize) -> SparseOperator {
    let n = mesh.len();
    let (fwd, bwd) = if axis == 0 { (0, 1) } else { (2, 3) };
    let mut a = Assembler::with_capacity(n, 3 * n);
    let offset = |l: &Link| match l {
        Link::Node(_) => mesh.h,
        Link::Wall { theta, .. } => theta.max(THETA_MIN) * mesh.h,
    };
    for (i, row) in mesh.links.iter().enumerate() {
        let am = -offset(&row[bwd]);
        let bp = offset(&row[fwd]);
        let c_minus = -bp / (am * (am - bp));
        let c_mid = -(am + bp) / (am * bp);
        let c_plus = -am / (bp * (bp - am));
        a.add(i, i, c_mid);
        if let Link::Node(j) = row[bwd] {
            a.add(i, j, c_minus);
        }
        if let Link::Node(j) = row[fwd] {
            a.add(i, j, c_plus);
        }
    }
    a.build()
}

/// Rotation generator `J = y1 d/dy2 - y2 d/dy1`, i.e. `grad(u) . R y`.
pub fn rotation_operator(mesh: &GridMesh2D) -> SparseOperator {
    let g1 = gradient_operator(mesh, 0);
    let g2 = gradient_operator(mesh, 1);
    let mut a = Assembler::with_capacity(mesh.len(), 6 * mesh.len());
    for (i, j, v) in g2.entries() {
        a.add(i, j, mesh.nodes[i][0] * v);
    }
    for (i, j, v) in g1.entries() {
        a.add(i, j, -mesh.nodes[i][1] * v);
    }
    a.build()
}

/// Below this |n . d| the wall is hit at a grazing angle and the one-sided
/// normal derivative is not trusted; the nodal value is used instead.
const GRAZING: f64 = 0.25;

/// Linear functional giving `(J u)` at the wall point of link (i, d),
/// as sparse (node, coefficient) pairs.
pub fn wall_rotation_functional(mesh: &GridMesh2D, j_op: &SparseOperator, i: usize, d: usize) -> Vec<(usize, f64)> {
    let Link::Wall { theta, point, normal } = mesh.links[i][d] else {
        return Vec::new();
    };
    let dir = [DIRS[d][0] as f64, DIRS[d][1] as f64];
    let n_dot_d = normal[0] * dir[0] + normal[1] * dir[1];
    if n_dot_d < GRAZING {
        return j_op
            .matrix()
            .outer_view(i)
            .map(|row| row.iter().map(|(k, &v)| (k, v)).collect())
            .unwrap_or_default();
    }
    let a = theta.max(THETA_MIN) * mesh.h;
    let rb = [-point[1], point[0]];
    let tangential = normal[0] * rb[0] + normal[1] * rb[1];
    let factor = -tangential / n_dot_d;
    match mesh.links[i][OPPOSITE[d]] {
        Link::Node(m) => {
            let b = a + mesh.h;
            vec![(i, factor * b / (a * (b - a))), (m, -factor * a / (b * (b - a)))]
        }
        Link::Wall { .. } => vec![(i, factor / a)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_at_quarter_spacing() {
        let spec = CrossSectionSpec::square(1.0, 4);
        let mesh = build_mesh(&spec).unwrap();
        assert_eq!(mesh.len(), 9);
        let lap = assemble_transverse_laplacian(&mesh);
        for i in 0..9 {
            assert_eq!(lap.get(i, i), 64.0);
        }
        assert!(lap.is_symmetric());
        // Row-major with y2 slow.
        assert_eq!(mesh.nodes[0], [-0.25, -0.25]);
        assert_eq!(mesh.nodes[1], [0.0, -0.25]);
    }

    #[test]
    fn disk_nodes_are_interior() {
        let mesh = build_mesh(&CrossSectionSpec::disk(1.0, 2)).unwrap();
        for p in &mesh.nodes {
            assert!(p[0] * p[0] + p[1] * p[1] < 1.0);
        }
    }

    #[test]
    fn too_few_nodes() {
        let err = build_mesh(&CrossSectionSpec::square(1.0, 2)).unwrap_err();
        assert_eq!(err.code(), "mesh-too-coarse");
    }

    #[test]
    fn cell_weights_cover_the_area() {
        for spec in [
            CrossSectionSpec::disk(1.0, 16),
            CrossSectionSpec::ellipse(1.0, 0.5, 20),
            CrossSectionSpec::square(1.0, 10),
        ] {
            let mesh = build_mesh(&spec).unwrap();
            let total: f64 = mesh.integrate(&vec![1.0; mesh.len()], |_, _| 1.0);
            let tol = 2.0 * mesh.h * spec.perimeter();
            assert!((total - spec.area()).abs() < 0.05 * tol, "{total} vs {}", spec.area());
            assert!((mesh.mass_total() - spec.area()).abs() < tol);
        }
    }

    #[test]
    fn gradient_is_exact_for_quadratics_vanishing_on_square() {
        let mesh = build_mesh(&CrossSectionSpec::square(1.0, 8)).unwrap();
        let u: Vec<f64> = mesh.nodes.iter().map(|p| 0.25 - p[0] * p[0]).collect();
        let g = gradient_operator(&mesh, 0).matvec(&u);
        for (p, gi) in mesh.nodes.iter().zip(&g) {
            assert!((gi + 2.0 * p[0]).abs() < 1e-12);
        }
    }
}
