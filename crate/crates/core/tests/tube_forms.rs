use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tubelab::geometry::{CrossSectionSpec, ModeOptions, TransverseBasis};
use tubelab::linalg::lanczos::{lowest_eigenpairs, LanczosOptions};
use tubelab::linalg::skyline::Skyline;
use tubelab::linalg::{norm, to_complex};
use tubelab::oned::operator::second_difference;
use tubelab::oned::{assemble_t_eps, TwistProfile};
use tubelab::tube::{
    apply_resolvent_complex, apply_resolvent_real, assemble_a_forms, assemble_b_form, cross_term_check, lift, project_onto_l,
    slice_overlap, TubeMode, TubeOperatorSpec, XDomain,
};

fn disk_spec(kappa: f64, eps: f64, length: f64) -> TubeOperatorSpec {
    let mut s = TubeOperatorSpec::new(kappa, eps, CrossSectionSpec::disk(1.0, 12));
    s.mode = TubeMode::Axisymmetric;
    s.x_domain = XDomain { length, spacing: 0.05 };
    s
}

fn disk_basis() -> TransverseBasis {
    TransverseBasis::radial_disk(1.0, 12).unwrap()
}

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen::<f64>() - 0.5).collect()
}

#[test]
fn free_form_on_limit_sector_is_the_axial_energy() {
    let basis = disk_basis();
    let spec = disk_spec(0.0, 0.1, 5.0);
    let b = assemble_b_form(&spec, &basis).unwrap();
    let kx = second_difference(&b.grid, false);
    let w: Vec<f64> = b.grid.x.iter().map(|&x| (-x * x).exp() * (1.0 + x)).collect();
    let energy = kx.quad_form(&w);
    let f = b.form(&lift(&w, &basis));
    assert!((f - energy).abs() < 1e-10 * energy, "{f} vs {energy}");
}

#[test]
fn free_form_with_constant_twist_adds_the_geometric_term() {
    let spec_cs = CrossSectionSpec::square(1.0, 12);
    let (basis, _, _) = TransverseBasis::cartesian(&spec_cs, &ModeOptions::default()).unwrap();
    let mut spec = TubeOperatorSpec::new(0.0, 0.1, spec_cs);
    spec.x_domain = XDomain { length: 3.0, spacing: 0.03 };
    spec.twist = TwistProfile::ConstantRate { rate: 0.5 };
    let b = assemble_b_form(&spec, &basis).unwrap();
    let kx = second_difference(&b.grid, false);
    let w: Vec<f64> = b.grid.x.iter().map(|&x| x * (-x * x).exp()).collect();
    let expected = kx.quad_form(&w) + 0.25 * basis.c_s * w.iter().map(|v| v * v).sum::<f64>();
    let f = b.form(&lift(&w, &basis));
    assert!((f - expected).abs() < 1e-10 * expected, "{f} vs {expected}");
}

#[test]
fn shifted_unregularized_form_is_nonnegative_on_random_vectors() {
    let basis = disk_basis();
    for eps in [0.2, 0.05] {
        let spec = disk_spec(1.0, eps, 10.0);
        let b = assemble_b_form(&spec, &basis).unwrap();
        let shift = 2.0 / eps.powf(0.3);
        for seed in 0..20 {
            let psi = random_vec(b.dim(), seed);
            let n2: f64 = psi.iter().map(|v| v * v).sum();
            assert!(b.form(&psi) + shift * n2 >= 0.0);
        }
    }
}

#[test]
fn complement_sector_sits_above_the_transverse_gap() {
    // Dense oracle: lowest eigenvalue of the free form restricted to the
    // orthogonal complement of the limit sector.
    let basis = TransverseBasis::radial_disk(1.0, 6).unwrap();
    let eps = 0.3;
    let mut spec = TubeOperatorSpec::new(0.0, eps, CrossSectionSpec::disk(1.0, 6));
    spec.mode = TubeMode::Axisymmetric;
    spec.x_domain = XDomain { length: 1.0, spacing: 0.01 };
    let b = assemble_b_form(&spec, &basis).unwrap();
    let n = b.dim();
    let nt = basis.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, j, v) in b.op.entries() {
        a[(i, j)] = v;
    }
    let mut p = DMatrix::<f64>::identity(n, n);
    for ix in 0..n / nt {
        for s in 0..nt {
            for t in 0..nt {
                p[(ix * nt + s, ix * nt + t)] -= basis.u0[s] * basis.u0[t];
            }
        }
    }
    let penalty = 1e6;
    let restricted = &p * &a * &p + (DMatrix::<f64>::identity(n, n) - &p) * penalty;
    let lowest = SymmetricEigen::new(restricted).eigenvalues.min();
    let gap = (basis.lambda1 - basis.lambda0) / (eps * eps);
    assert!(lowest >= gap * (1.0 - 1e-10), "{lowest} vs {gap}");
}

#[test]
fn shifted_regularized_form_differs_by_the_constant() {
    let basis = disk_basis();
    let spec = disk_spec(1.0, 0.1, 5.0).regularized(0.3, 2.0);
    let (a, a_dot) = assemble_a_forms(&spec, &basis).unwrap();
    let shift = spec.shift();
    let plain = a.op.materialized();
    let shifted = a_dot.op.materialized();
    for (i, j, v) in shifted.entries() {
        if i == j {
            assert_eq!(v, plain.get(i, i) + shift);
        } else {
            assert_eq!(v, plain.get(i, j));
        }
    }
}

#[test]
fn shifted_regularized_operator_is_bounded_below() {
    let basis = disk_basis();
    for eps in [0.2, 0.05] {
        let spec = disk_spec(1.0, eps, 10.0).regularized(0.3, 2.0);
        let (_, a_dot) = assemble_a_forms(&spec, &basis).unwrap();
        let op = a_dot.op.materialized();
        let fac = Skyline::factor(&op, 0.0).unwrap();
        let pairs = lowest_eigenpairs(&op, |v| fac.solve(v), &LanczosOptions::default(), &[]).unwrap();
        assert!(pairs.values[0] >= (2.0 - 1.0) / eps.powf(0.3), "eps {eps}: {}", pairs.values[0]);
    }
}

#[test]
fn resolvent_inverts_and_contracts() {
    let basis = disk_basis();
    let spec = disk_spec(1.0, 0.1, 5.0).regularized(0.3, 2.0);
    let (_, a_dot) = assemble_a_forms(&spec, &basis).unwrap();
    let v = random_vec(a_dot.dim(), 3);
    let theta: Vec<f64> = a_dot.op.matvec(&v).iter().zip(&v).map(|(a, b)| a + b).collect();
    let out = apply_resolvent_real(&a_dot.op, -1.0, &theta, 1e-10).unwrap();
    let err: f64 = out.psi.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    assert!(err <= 1e-8 * norm(&v));

    let z = Complex64::new(spec.shift(), 1.0);
    let theta = to_complex(&random_vec(a_dot.dim(), 4));
    let out = apply_resolvent_complex(&a_dot.op, z, &theta, 1e-10).unwrap();
    assert!(norm(&out.psi) <= norm(&theta));
}

#[test]
fn free_limit_sector_resolvent_reduces_to_one_dimension() {
    let basis = disk_basis();
    let spec = disk_spec(0.0, 0.1, 5.0).regularized(0.3, 2.0);
    let (_, a_dot) = assemble_a_forms(&spec, &basis).unwrap();
    let t = assemble_t_eps(0.0, 0.1, 0.3, 2.0, &a_dot.grid, &basis).unwrap();
    let z = Complex64::new(spec.shift(), 1.0);
    let w: Vec<Complex64> = a_dot.grid.x.iter().map(|&x| Complex64::new((-x * x).exp(), x * (-x * x).exp())).collect();
    let full = apply_resolvent_complex(&a_dot.op, z, &lift(&w, &basis), 1e-12).unwrap().psi;
    let reduced = lift(&t.matrix.solve(z, &w), &basis);
    let diff: f64 = full.iter().zip(&reduced).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    assert!(diff <= 1e-8 * norm(&reduced), "{diff}");
}

#[test]
fn projection_of_pure_sectors() {
    let basis = disk_basis();
    let w = random_vec(40, 1);
    let (w2, eta) = project_onto_l(&lift(&w, &basis), &basis);
    assert!(norm(&eta) < 1e-12 * norm(&w));
    for (a, b) in w.iter().zip(&w2) {
        assert!((a - b).abs() < 1e-12);
    }
    let mut psi = Vec::new();
    for c in &w {
        psi.extend(basis.u1.iter().map(|u| c * u));
    }
    let (w3, _) = project_onto_l(&psi, &basis);
    assert!(norm(&w3) < 1e-10 * norm(&w));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn projection_is_pythagorean(seed in any::<u64>(), slices in 1usize..40) {
        let basis = disk_basis();
        let psi = random_vec(slices * basis.len(), seed);
        let (w, eta) = project_onto_l(&psi, &basis);
        let total: f64 = psi.iter().map(|v| v * v).sum();
        let parts: f64 = w.iter().map(|v| v * v).sum::<f64>() + eta.iter().map(|v| v * v).sum::<f64>();
        prop_assert!((total - parts).abs() <= 1e-10 * total);
        prop_assert!(slice_overlap(&eta, &basis) < 1e-12);
    }
}

#[test]
fn cross_term_vanishes_without_complement_or_coupling() {
    let basis = disk_basis();
    for kappa in [1.0, 0.0] {
        let spec = disk_spec(kappa, 0.1, 5.0).regularized(0.3, 2.0);
        let (_, a_dot) = assemble_a_forms(&spec, &basis).unwrap();
        let t = assemble_t_eps(kappa, 0.1, 0.3, 2.0, &a_dot.grid, &basis).unwrap();
        let w: Vec<f64> = a_dot.grid.x.iter().map(|&x| (-x * x).exp()).collect();
        let zero = vec![0.0; a_dot.dim()];
        assert_eq!(cross_term_check(&w, &zero, &a_dot, &t, &basis).unwrap().m_value, 0.0);
        if kappa == 0.0 {
            let (_, eta) = project_onto_l(&random_vec(a_dot.dim(), 9), &basis);
            assert_eq!(cross_term_check(&w, &eta, &a_dot, &t, &basis).unwrap().m_value, 0.0);
        }
    }
}
