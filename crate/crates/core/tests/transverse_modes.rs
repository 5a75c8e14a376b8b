use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;
use std::num::NonZeroUsize;
use tubelab::geometry::{assemble_transverse_laplacian, build_mesh, solve_modes, CrossSectionSpec, ModeOptions, Shape, TransverseBasis};
use tubelab::lab::fit_rate;

fn bessel_j0(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..80 {
        term *= q / (k * k) as f64;
        sum += term;
    }
    sum
}

/// First zero of J0 by bisection on its power series.
fn first_bessel_zero() -> f64 {
    let (mut a, mut b) = (2.0, 3.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if bessel_j0(a) * bessel_j0(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

fn modes(spec: CrossSectionSpec) -> tubelab::geometry::TransverseModes {
    let mesh = build_mesh(&spec).unwrap();
    let op = assemble_transverse_laplacian(&mesh);
    solve_modes(&op, &mesh, &ModeOptions::default()).unwrap()
}

/// `C(square)` for the unit square centered on the axis from the exact
/// ground mode `2 cos(pi y1) cos(pi y2)`.
fn square_cs_oracle() -> f64 {
    let gl = GaussLegendre::new(NonZeroUsize::new(40).unwrap());
    gl.integrate(-0.5, 0.5, |y1| {
        gl.integrate(-0.5, 0.5, |y2| {
            let d1 = -2.0 * PI * (PI * y1).sin() * (PI * y2).cos();
            let d2 = -2.0 * PI * (PI * y1).cos() * (PI * y2).sin();
            let v = -y2 * d1 + y1 * d2;
            v * v
        })
    })
}

#[test]
fn bessel_oracle_is_the_known_root() {
    assert!((first_bessel_zero() - 2.404_825_557_695_773).abs() < 1e-12);
}

#[test]
fn square_eigenvalues_after_richardson() {
    let res = [16, 32, 64];
    let m: Vec<_> = res.iter().map(|&r| modes(CrossSectionSpec::square(1.0, r))).collect();
    // Second-order scheme: extrapolate the two finest, then check the
    // three-level estimate agrees.
    let rich = |a: f64, b: f64| (4.0 * b - a) / 3.0;
    let l0 = rich(m[1].lambda0, m[2].lambda0);
    let l1 = rich(m[1].lambda1, m[2].lambda1);
    let exact0 = 2.0 * PI * PI;
    let exact1 = 5.0 * PI * PI;
    assert!((l0 - exact0).abs() < 0.005 * exact0, "lambda0 {l0} vs {exact0}");
    assert!((l1 - exact1).abs() < 0.01 * exact1, "lambda1 {l1} vs {exact1}");
    let coarse = rich(m[0].lambda0, m[1].lambda0);
    assert!((coarse - l0).abs() < 0.005 * exact0);
}

#[test]
fn disk_ground_state_matches_bessel_zero() {
    let j = first_bessel_zero();
    let m = modes(CrossSectionSpec::disk(1.0, 48));
    assert!((m.lambda0 - j * j).abs() < 0.005 * j * j, "{} vs {}", m.lambda0, j * j);
    let radial = TransverseBasis::radial_disk(1.0, 200).unwrap();
    assert!((radial.lambda0 - j * j).abs() < 1e-3 * j * j);
}

#[test]
fn centered_disk_has_no_rotation_coupling() {
    let m = modes(CrossSectionSpec::disk(1.0, 64));
    assert!(m.c_s < 1e-6, "C(disk) = {}", m.c_s);
}

#[test]
fn square_constant_matches_quadrature_and_is_stable() {
    let oracle = square_cs_oracle();
    assert!((oracle - 0.144934).abs() < 1e-5, "oracle {oracle}");
    let a = modes(CrossSectionSpec::square(1.0, 48)).c_s;
    let b = modes(CrossSectionSpec::square(1.0, 96)).c_s;
    assert!(a > 0.0 && b > 0.0);
    assert!((a - b).abs() < 0.01 * b, "{a} vs {b}");
    assert!((b - oracle).abs() < 0.02 * oracle, "{b} vs {oracle}");
}

#[test]
fn orthogonality_residual_vanishes_under_refinement() {
    // Cut cells make single refinements noisy, so fit over a wide range.
    let res = [8usize, 12, 16, 24, 32, 48, 64, 96, 128];
    let h: Vec<f64> = res.iter().map(|&n| 1.0 / n as f64).collect();
    for spec in [
        CrossSectionSpec::ellipse(1.0, 0.6, 1).with_center([0.13, 0.07]),
        CrossSectionSpec::disk(0.5, 1).with_center([0.13, 0.07]),
    ] {
        let r: Vec<f64> = res
            .iter()
            .map(|&n| {
                let mut s = spec.clone();
                s.resolution = n;
                modes(s).orthogonality_residual
            })
            .collect();
        let fit = fit_rate(&h, &r).unwrap();
        assert!(fit.slope >= 1.0, "residuals {r:?}, order {}", fit.slope);
    }
}

#[test]
fn coarse_disk_matches_dense_spectrum() {
    let mesh = build_mesh(&CrossSectionSpec::disk(1.0, 8)).unwrap();
    assert!(mesh.len() <= 400);
    let op = assemble_transverse_laplacian(&mesh);
    let n = op.dim();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, j, v) in op.entries() {
        a[(i, j)] = v;
    }
    let mut dense: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    dense.sort_by(f64::total_cmp);
    let m = solve_modes(&op, &mesh, &ModeOptions::default()).unwrap();
    assert!((m.lambda0 - dense[0]).abs() < 1e-10 * dense[0]);
    assert!((m.lambda1 - dense[1]).abs() < 1e-10 * dense[1]);
}

#[test]
fn ellipse_couples_to_rotation() {
    let m = modes(CrossSectionSpec::ellipse(1.0, 0.5, 32));
    assert!(m.c_s > 0.01, "{}", m.c_s);
}

#[test]
fn square_residual_is_below_discretization_scale() {
    let m = modes(CrossSectionSpec::square(1.0, 64));
    let h = 1.0 / 64.0;
    assert!(m.orthogonality_residual < 10.0 * h * h);
    assert!(m.lambda0 < m.lambda1);
}

#[test]
fn polygon_must_contain_the_axis() {
    let spec = CrossSectionSpec::new(
        Shape::Polygon {
            vertices: vec![[1.0, 1.0], [2.0, 1.0], [2.0, 2.0], [1.0, 2.0]],
        },
        16,
    );
    assert_eq!(build_mesh(&spec).unwrap_err().code(), "origin-exclusion");
}
