use gauss_quad::GaussLegendre;
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::time::Instant;
use tubelab::geometry::TransverseBasis;
use tubelab::lab::random_admissible;
use tubelab::oned::boundary::{BoundaryOptions, SideSamples};
use tubelab::oned::operator::second_difference;
use tubelab::oned::{
    assemble_hd, assemble_t_eps, boundary_data, check_extension_membership, eval_v_eps, hardy_check, BoundaryData, ExtensionMatrix,
    Grid1D, TwistProfile,
};

/// Sign changes of the regular solution of `-phi'' - kappa/x phi = E phi`
/// on `(0, l)`, integrated by RK4 from a Frobenius start.
fn shooting_nodes(kappa: f64, energy: f64, l: f64) -> usize {
    let x0: f64 = 1e-4;
    let (phi0, dphi0) = {
        let mut a = [0.0f64; 12];
        a[1] = 1.0;
        for k in 2..a.len() {
            a[k] = -(kappa * a[k - 1] + energy * a[k - 2]) / (k * (k - 1)) as f64;
        }
        let phi: f64 = (1..a.len()).map(|k| a[k] * x0.powi(k as i32)).sum();
        let dphi: f64 = (1..a.len()).map(|k| k as f64 * a[k] * x0.powi(k as i32 - 1)).sum();
        (phi, dphi)
    };
    let f = |x: f64, y: [f64; 2]| [y[1], -(kappa / x + energy) * y[0]];
    let mut x = x0;
    let mut y = [phi0, dphi0];
    let mut nodes = 0;
    let mut step: f64 = 1e-4;
    while x < l {
        let h = step.min(l - x);
        let k1 = f(x, y);
        let k2 = f(x + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = f(x + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = f(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        let next = [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        if next[0].signum() != y[0].signum() {
            nodes += 1;
        }
        y = next;
        x += h;
        // Coarsen away from the singularity.
        step = (2e-3 * x).clamp(1e-4, 2e-3);
        if y[0].abs() > 1e200 {
            y = [y[0] * 1e-200, y[1] * 1e-200];
        }
    }
    nodes
}

/// `n`-th Dirichlet eigenvalue on `(0, l)` by bisection on the node count.
fn shooting_eigenvalue(kappa: f64, n: usize, l: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0, -1e-4);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if shooting_nodes(kappa, mid, l) >= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn dirichlet_hydrogen_against_shooting() {
    let start = Instant::now();
    let grid = Grid1D::staggered(200.0, 0.01).unwrap();
    let op = assemble_hd(1.0, &grid, &TwistProfile::Zero, 0.0).unwrap();
    let e = op.lowest_eigenvalues(6);
    for n in 1..=3 {
        let oracle = shooting_eigenvalue(1.0, n, 200.0);
        let exact = -1.0 / (4.0 * (n * n) as f64);
        assert!((oracle - exact).abs() < 1e-6, "oracle n={n}: {oracle}");
        for k in [2 * n - 2, 2 * n - 1] {
            assert!((e[k] - oracle).abs() <= 1e-3, "n={n}: {} vs {oracle}", e[k]);
        }
    }
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn half_lines_decouple_exactly() {
    let grid = Grid1D::staggered(200.0, 0.05).unwrap();
    let op = assemble_hd(1.0, &grid, &TwistProfile::Zero, 0.0).unwrap();
    assert_eq!(op.matrix.off[grid.split() - 1], 0.0);
    let (p, m) = (op.half_block(true), op.half_block(false));
    assert_eq!(p, m);
    let e = op.lowest_eigenvalues(6);
    for pair in e.chunks(2) {
        assert!((pair[0] - pair[1]).abs() < 1e-12);
    }
    // Each half block carries exactly one copy.
    assert_eq!(p.lowest(3), e.iter().step_by(2).copied().collect::<Vec<_>>());
}

#[test]
fn constant_twist_shifts_every_eigenvalue() {
    let grid = Grid1D::staggered(40.0, 0.05).unwrap();
    let c_s = 0.144934;
    let plain = assemble_hd(1.0, &grid, &TwistProfile::Zero, c_s).unwrap().lowest_eigenvalues(4);
    let twisted = assemble_hd(1.0, &grid, &TwistProfile::ConstantRate { rate: 0.5 }, c_s)
        .unwrap()
        .lowest_eigenvalues(4);
    for (a, b) in plain.iter().zip(&twisted) {
        assert!((b - a - 0.25 * c_s).abs() < 1e-10);
    }
}

#[test]
fn free_operator_ground_state_tends_to_zero() {
    let e: Vec<f64> = [10.0, 20.0, 40.0]
        .iter()
        .map(|&l| {
            let g = Grid1D::staggered(l, 0.05).unwrap();
            assemble_hd(0.0, &g, &TwistProfile::Zero, 0.0).unwrap().lowest_eigenvalues(1)[0]
        })
        .collect();
    assert!(e.iter().all(|&v| v > 0.0));
    assert!(e[0] > e[1] && e[1] > e[2]);
    assert!((e[2] - (PI / 40.0).powi(2)).abs() < 1e-3 * e[2]);
}

fn j0(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let (mut t, mut s) = (1.0, 1.0);
    for k in 1..80 {
        t *= q / (k * k) as f64;
        s += t;
    }
    s
}

/// `V` on the unit disk from the exact ground mode `J0(j r)`, by nested
/// Gauss-Legendre over the disk in polar coordinates.
fn disk_potential_oracle(x: f64, eps: f64, delta: f64) -> f64 {
    let j = 2.404_825_557_695_773;
    let gl = GaussLegendre::new(NonZeroUsize::new(60).unwrap());
    let reg = eps.powf(delta);
    let polar = |f: &dyn Fn(f64) -> f64| gl.integrate(0.0, 2.0 * PI, |_| gl.integrate(0.0, 1.0, |r| r * f(r)));
    let mass = polar(&|r| j0(j * r).powi(2));
    let pot = polar(&|r| j0(j * r).powi(2) / ((x * x + eps * eps * r * r).sqrt() + reg));
    -pot / mass
}

#[test]
fn coulomb_average_matches_disk_quadrature() {
    let basis = TransverseBasis::radial_disk(1.0, 4000).unwrap();
    let oracle = disk_potential_oracle(0.1, 0.05, 0.3);
    let v = eval_v_eps(0.1, 1.0, 0.05, 0.3, &basis).unwrap();
    assert!((v - oracle).abs() < 1e-6 * oracle.abs(), "{v} vs {oracle}");
}

#[test]
fn zero_coupling_potential_vanishes() {
    let basis = TransverseBasis::radial_disk(1.0, 16).unwrap();
    for x in [-2.0, -1e-3, 1e-3, 0.5] {
        assert_eq!(eval_v_eps(x, 0.0, 0.1, 0.3, &basis).unwrap(), 0.0);
    }
}

proptest! {
    #[test]
    fn regularized_potential_is_dominated_by_coulomb(
        x in prop_oneof![-5.0f64..-1e-6, 1e-6f64..5.0],
        eps in 1e-4f64..1.0,
        delta in 0.01f64..0.49,
    ) {
        let basis = TransverseBasis::radial_disk(1.0, 16).unwrap();
        let v = eval_v_eps(x, 1.0, eps, delta, &basis).unwrap();
        prop_assert!(v < 0.0);
        prop_assert!(v.abs() <= 1.0 / x.abs());
    }
}

#[test]
fn effective_operator_is_bounded_below_by_the_shift() {
    let basis = TransverseBasis::radial_disk(1.0, 32).unwrap();
    let grid = Grid1D::staggered(20.0, 0.05).unwrap();
    for eps in [0.2, 0.05] {
        let t = assemble_t_eps(1.0, eps, 0.3, 2.0, &grid, &basis).unwrap();
        let lowest = t.matrix.lowest(1)[0];
        assert!(lowest >= (2.0 - 1.0) / eps.powf(0.3), "eps {eps}: {lowest}");
    }
}

#[test]
fn free_effective_operator_is_laplacian_plus_shift() {
    let basis = TransverseBasis::radial_disk(1.0, 16).unwrap();
    let grid = Grid1D::staggered(10.0, 0.05).unwrap();
    let t = assemble_t_eps(0.0, 0.1, 0.3, 2.0, &grid, &basis).unwrap();
    let k = second_difference(&grid, false);
    let s = 2.0 / 0.1f64.powf(0.3);
    assert_eq!(t.matrix.off, k.off);
    for (a, b) in t.matrix.diag.iter().zip(&k.diag) {
        assert!((a - b - s).abs() < 1e-12 * a.abs());
    }
}

fn samples<F: Fn(f64) -> f64 + Copy, G: Fn(f64) -> f64 + Copy>(f: F, df: G) -> (SideSamples, SideSamples) {
    let o = BoundaryOptions::default();
    (SideSamples::from_fn(f, df, true, &o), SideSamples::from_fn(f, df, false, &o))
}

#[test]
fn boundary_values_of_model_functions() {
    let o = BoundaryOptions::default();
    let (p, m) = samples(|x| x, |_| 1.0);
    let d = boundary_data(&p, &m, 1.0, &o).unwrap();
    assert!(d.phi_plus.norm() < 1e-9);
    assert!((d.phitilde_plus.re - 1.0).abs() < 1e-3);
    assert!(!d.flags.any());

    let (p, m) = samples(|_| 1.0, |_| 0.0);
    let d = boundary_data(&p, &m, 1.0, &o).unwrap();
    assert!(d.flags.phitilde_plus);
    assert!(!d.flags.phi_plus);

    let kappa = 1.0;
    let (p, m) = samples(
        move |x: f64| 1.0 - kappa * x * (kappa * x.abs()).ln(),
        move |x: f64| -kappa * ((kappa * x.abs()).ln() + 1.0),
    );
    let d = boundary_data(&p, &m, kappa, &o).unwrap();
    assert!((d.phi_plus.re - 1.0).abs() < 1e-4);
    assert!((d.phitilde_plus.re + kappa).abs() < 1e-3, "{}", d.phitilde_plus);
}

#[test]
fn dirichlet_and_minus_identity_memberships() {
    let z = Complex64::new(0.0, 0.0);
    let c = |v: f64| Complex64::new(v, 0.0);
    let d = BoundaryData::new(z, z, c(0.7), c(-1.3));
    let (ok, r) = check_extension_membership(&d, &ExtensionMatrix::dirichlet(), 1e-12).unwrap();
    assert!(ok && r == 0.0);
    let d = BoundaryData::new(c(0.4), c(-2.0), z, z);
    let (ok, r) = check_extension_membership(&d, &ExtensionMatrix::minus_identity(), 1e-12).unwrap();
    assert!(ok && r < 1e-15);
}

proptest! {
    #[test]
    fn random_extension_accepts_solved_boundary_data(
        global in 0.0f64..6.28, mix in 0.0f64..6.28, p1 in 0.0f64..6.28, p2 in 0.0f64..6.28,
        a in -2.0f64..2.0, b in -2.0f64..2.0,
    ) {
        let ext = ExtensionMatrix::from_angles(global, mix, p1, p2);
        let u = ext.u;
        let id = Matrix2::<Complex64>::identity();
        let m = id - u;
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        prop_assume!(det.norm() > 1e-3);
        // Cramer's rule for (I - U) t = -i (I + U) (-phi+, phi-).
        let rhs = (id + u) * Vector2::new(-Complex64::new(a, 0.0), Complex64::new(b, 0.0)) * Complex64::new(0.0, -1.0);
        let t0 = (rhs[0] * m[(1, 1)] - m[(0, 1)] * rhs[1]) / det;
        let t1 = (m[(0, 0)] * rhs[1] - rhs[0] * m[(1, 0)]) / det;
        let d = BoundaryData::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0), t0, t1);
        let (ok, r) = check_extension_membership(&d, &ext, 1e-10).unwrap();
        prop_assert!(ok, "residual {r}");
    }
}

#[test]
fn hardy_ratio_of_model_functions() {
    let l = 10.0;
    let grid = Grid1D::staggered(l, 0.01).unwrap();
    let gauss = grid.sample(|x| x * (-x * x).exp());
    let sine = grid.sample(|x| (PI * x / l).sin());
    for w in [gauss, sine] {
        let r = hardy_check(&w, &grid);
        assert!(r > 0.0 && r < 1.0, "{r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]
    #[test]
    fn hardy_ratio_of_random_admissible_functions(seed in any::<u64>()) {
        let grid = Grid1D::staggered(10.0, 0.01).unwrap();
        let w = random_admissible(&grid, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(hardy_check(&w, &grid) <= 1.01);
    }
}
