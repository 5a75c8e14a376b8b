use proptest::prelude::*;
use tubelab::lab::{QepsScenario, TestVector, TheoremTag};
use tubelab::oned::TwistProfile;
use tubelab_cli::config::{BoundaryFunction, ExperimentKind, Overrides, ShapeKind};
use tubelab_cli::{parse_config, parse_config_with, ExperimentConfig};

fn codes(text: &str) -> Vec<String> {
    parse_config(text).unwrap_err().violations.into_iter().map(|v| v.code).collect()
}

fn round_trip(c: &ExperimentConfig) {
    let text = c.to_toml();
    let again = parse_config(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    assert_eq!(&again, c, "{text}");
    assert_eq!(again.experiment_id(), c.experiment_id());
}

#[test]
fn minimal_attractive_sweep_gets_defaults() {
    let c = parse_config("experiment = \"converge\"\ntheorem = \"P1\"\n[physics]\nkappa = 1.5\n").unwrap();
    assert_eq!(c.physics.delta, Some(0.3));
    assert_eq!(c.physics.c, Some(3.0));
    assert_eq!(c.ladder.epsilons, vec![0.2, 0.1, 0.05, 0.025]);
    assert_eq!(c.geometry.shape, ShapeKind::Disk);
    assert_eq!(c.geometry.radius, Some(1.0));
}

#[test]
fn delta_outside_the_open_interval() {
    let e = parse_config("experiment = \"klaus\"\n[physics]\ndelta = 0.6\n").unwrap_err();
    assert!(e.to_string().contains("delta-range: requires 0 < δ < 1/2"), "{e}");
}

#[test]
fn shift_equal_to_coupling() {
    let e = parse_config("experiment = \"converge\"\ntheorem = \"P2\"\n[physics]\nkappa = 1.0\nc = 1.0\n").unwrap_err();
    assert!(e.to_string().contains("shift-too-small: requires c > κ"), "{e}");
}

#[test]
fn every_unknown_key_is_reported() {
    let text = r#"
experiment = "converge"
theorem = "T1"
colour = "blue"
[physics]
kappa = 1.0
bogus = 2
twist = { family = "zero", extra = 1 }
[solver]
tolerance = 1e-3
"#;
    let e = parse_config(text).unwrap_err();
    let msgs: Vec<String> = e.violations.iter().filter(|v| v.code == "unknown-key").map(|v| v.message.clone()).collect();
    for key in ["colour", "physics.bogus", "physics.twist.extra", "solver.tolerance"] {
        assert!(msgs.iter().any(|m| m.starts_with(key)), "{key} missing from {msgs:?}");
    }
}

#[test]
fn all_violations_are_listed_together() {
    let text = r#"
experiment = "converge"
theorem = "P1"
[physics]
kappa = 1.0
delta = 0.6
c = 0.5
[ladder]
epsilons = [0.2, 0.1]
[geometry]
shape = "ellipse"
a = 1.0
b = 0.5
mode = "axisymmetric"
"#;
    let c = codes(text);
    for code in ["delta-range", "shift-too-small", "ladder-length", "mode-conflict"] {
        assert!(c.iter().any(|x| x == code), "{code} missing from {c:?}");
    }
}

#[test]
fn empty_ladder_never_reaches_a_run() {
    let c = codes("experiment = \"converge\"\ntheorem = \"T1\"\n[ladder]\nepsilons = []\n");
    assert!(c.contains(&"ladder-length".to_string()), "{c:?}");
}

#[test]
fn ladder_must_decrease_inside_the_unit_interval() {
    let c = codes("experiment = \"qeps\"\n[ladder]\nepsilons = [0.1, 0.2, 1.5]\n");
    assert!(c.contains(&"ladder-order".to_string()));
    assert!(c.contains(&"ladder-range".to_string()));
}

#[test]
fn shape_parameters_must_match_the_shape() {
    let c = codes("experiment = \"modes\"\n[geometry]\nshape = \"rectangle\"\nwidth = 1.0\nradius = 2.0\nmode = \"full_tensor\"\n");
    assert!(c.contains(&"unknown-key".to_string()));
    assert!(c.contains(&"missing-field".to_string()));
}

#[test]
fn polygon_away_from_the_axis() {
    let text = "experiment = \"modes\"\n[geometry]\nshape = \"polygon\"\nvertices = [[1.0, 1.0], [2.0, 1.0], [2.0, 2.0]]\nmode = \"full_tensor\"\n";
    assert!(codes(text).contains(&"origin-exclusion".to_string()));
}

#[test]
fn experiment_kind_and_theorem_requirements() {
    assert!(codes("").contains(&"missing-field".to_string()));
    assert!(codes("experiment = \"converge\"").contains(&"missing-field".to_string()));
    assert!(codes("experiment = \"converge\"\ntheorem = \"T2\"\n").contains(&"kappa-sign".to_string()));
    assert!(codes("experiment = \"converge\"\ntheorem = \"Q1\"\n").contains(&"theorem-unsupported".to_string()));
    assert!(codes("experiment = \"gamma\"\n[physics]\nkappa = -1.0\n[gamma]\nfamily = \"gaussian\"\nwidth = 1.0\n")
        .contains(&"not-in-limit-domain".to_string()));
    assert!(codes("experiment = \"qeps\"\n[qeps]\nscenario = \"bounded_profile\"\np = 0.6\n").contains(&"p-range".to_string()));
    let o = Overrides {
        experiment: Some(ExperimentKind::Klaus),
        ..Overrides::default()
    };
    let e = parse_config_with("experiment = \"modes\"", &o).unwrap_err();
    assert_eq!(e.violations[0].code, "experiment-mismatch");
}

#[test]
fn overrides_fill_the_experiment_and_seed() {
    let o = Overrides {
        experiment: Some(ExperimentKind::Converge),
        theorem: Some(TheoremTag::T1),
        seed: Some(99),
        output_directory: None,
    };
    let c = parse_config_with("", &o).unwrap();
    assert_eq!(c.experiment, Some(ExperimentKind::Converge));
    assert_eq!(c.theorem, Some(TheoremTag::T1));
    assert_eq!(c.solver.seed, 99);
    let o = Overrides {
        seed: Some(u64::MAX),
        ..o
    };
    assert_eq!(parse_config_with("", &o).unwrap_err().violations[0].code, "solver");
}

#[test]
fn output_location_does_not_change_the_id() {
    let a = parse_config("experiment = \"modes\"\n[output]\ndirectory = \"a\"\n").unwrap();
    let b = parse_config("experiment = \"modes\"\n[output]\ndirectory = \"b\"\n").unwrap();
    assert_eq!(a.experiment_id(), b.experiment_id());
    let c = parse_config("experiment = \"modes\"\n[geometry]\nresolution = 17\n").unwrap();
    assert_ne!(a.experiment_id(), c.experiment_id());
}

#[test]
fn budget_is_checked_during_validation() {
    let text = "experiment = \"converge\"\ntheorem = \"P1\"\n[solver]\nbudget = 1000\n";
    assert!(codes(text).contains(&"grid-budget".to_string()));
}

#[test]
fn sections_with_tags_round_trip() {
    let texts = [
        "experiment = \"boundary-data\"\n[boundary_data]\nfunction = \"local_model\"\nphi_plus = 1.0\nphi_minus = -0.5\nphitilde_plus = 0.25\nphitilde_minus = 2.0\nextension = { kind = \"angles\", global = 0.1, mix = 0.2, phase1 = 0.3, phase2 = 0.4 }\n",
        "experiment = \"converge\"\ntheorem = \"T2\"\n[physics]\nkappa = -1.0\n[[strong.vectors]]\nkind = \"complement\"\ncenter = 0.0\nwidth = 1.0\n",
        "experiment = \"converge\"\ntheorem = \"T1\"\n[geometry]\nshape = \"rectangle\"\nwidth = 1.0\nheight = 1.0\nmode = \"modal\"\n[physics]\ntwist = { family = \"constant_rate\", rate = 0.5 }\n",
        "experiment = \"qeps\"\n[qeps]\nscenario = \"flat_profile\"\nm = 1.0\n",
        "experiment = \"tube-solve\"\n[tube_solve]\nform = \"b\"\nz = [-1.0, 0.0]\n",
        "experiment = \"spectrum-1d\"\n[physics]\ntwist = { family = \"compact_bump\", amplitude = 0.3, radius = 2.0 }\n[geometry]\nshape = \"ellipse\"\na = 1.0\nb = 0.6\ncenter = [0.1, 0.0]\nmode = \"full_tensor\"\n",
    ];
    for t in texts {
        let c = parse_config(t).unwrap_or_else(|e| panic!("{e}\n{t}"));
        round_trip(&c);
    }
    let c = parse_config(texts[0]).unwrap();
    assert!(matches!(c.boundary_data.unwrap().function, BoundaryFunction::LocalModel { phi_minus, .. } if phi_minus == -0.5));
    let c = parse_config(texts[1]).unwrap();
    assert_eq!(c.strong.unwrap().vectors, vec![TestVector::Complement { center: 0.0, width: 1.0 }]);
    assert_eq!(parse_config(texts[3]).unwrap().qeps, Some(QepsScenario::FlatProfile { m: 1.0 }));
}

proptest! {
    #[test]
    fn parse_serialize_parse_is_identity(
        kappa in 0.1f64..5.0,
        delta in 0.01f64..0.49,
        extra in 0.01f64..3.0,
        first in 0.3f64..1.0,
        ratio in 0.2f64..0.9,
        rungs in 3usize..7,
        rate in -2.0f64..2.0,
        resolution in 4usize..64,
        seed in 0..=i64::MAX as u64,
    ) {
        let mut c: ExperimentConfig = parse_config("experiment = \"converge\"\ntheorem = \"P1\"").unwrap();
        c.physics.kappa = kappa;
        c.physics.delta = Some(delta);
        c.physics.c = Some(kappa + extra);
        c.ladder.epsilons = (0..rungs).map(|k| first * ratio.powi(k as i32)).collect();
        c.geometry.resolution = resolution;
        c.geometry.mode = tubelab::tube::TubeMode::Modal;
        c.physics.twist = TwistProfile::ConstantRate { rate };
        c.solver.seed = seed;
        let text = c.to_toml();
        let again = parse_config(&text).unwrap();
        prop_assert_eq!(&again, &c);
        prop_assert_eq!(again.to_toml(), text);
    }
}
