//! Pipelines behind each experiment kind and the run orchestration.

use crate::config::{BoundaryFunction, ExperimentConfig, ExperimentKind, ExtensionChoice, OutputFormat, SolveForm};
use crate::error::CliError;
use crate::manifest::{unix_now, RunManifest, RunWriter, MANIFEST_SCHEMA_VERSION};
use crate::plots::emit_plots;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;
use tubelab::geometry::{ModeOptions, TransverseBasis, TransverseKind};
use tubelab::lab::{
    gamma_report, klaus_report, norm_resolvent_sweep, qeps_report, rung_spec, spectrum_convergence, strong_resolvent_sweep,
    ConvergenceReport, GammaOptions, NormPairing, SweepOptions, TheoremTag, SCHEMA_VERSION,
};
use tubelab::linalg::power::PowerOptions;
use tubelab::linalg::{norm, to_complex};
use tubelab::oned::boundary::{local_solution, regular_series, BoundaryOptions, SideSamples};
use tubelab::oned::{assemble_hd, boundary_data, check_extension_membership, ExtensionMatrix, Grid1D, TwistProfile};
use tubelab::tube::{apply_resolvent_complex, assemble_a_forms, assemble_b_form, SolveNorms, SolveRecord};
use tubelab::LabError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads for rung fan-out; the global pool when `None`.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

/// Everything a pipeline produced, held in memory until the writer takes it.
#[derive(Default)]
struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    reports: Vec<String>,
    pass: bool,
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

impl Outputs {
    fn new() -> Self {
        Outputs {
            pass: true,
            ..Default::default()
        }
    }

    fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<(), CliError> {
        let v = Versioned {
            schema_version: SCHEMA_VERSION,
            body,
        };
        let text = serde_json::to_string_pretty(&v)?;
        self.files.push((name.to_string(), text.into_bytes()));
        Ok(())
    }

    fn text(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text.into_bytes()));
    }

    fn report(&mut self, config: &ExperimentConfig, id: &str, mut report: ConvergenceReport) -> Result<(), CliError> {
        report.experiment_id = id.to_string();
        self.pass &= report.pass;
        for (k, &eps) in report.ladder.iter().enumerate() {
            let mut row = serde_json::Map::new();
            row.insert("rung".into(), k.into());
            row.insert("epsilon".into(), eps.into());
            if let Some(d) = report.distances.get(k) {
                row.insert("distance".into(), (*d).into());
            }
            for (name, series) in &report.series {
                if series.len() == report.ladder.len() {
                    row.insert(name.clone(), series[k].into());
                }
            }
            self.json(&format!("rung_{k}.json"), &row)?;
        }
        self.files
            .push(("report.json".into(), serde_json::to_string_pretty(&report)?.into_bytes()));
        if config.output.formats.contains(&OutputFormat::Csv) {
            self.text("report.csv", report.to_csv());
        }
        self.reports.push("report.json".into());
        Ok(())
    }
}

#[derive(Serialize)]
struct BasisRecord {
    kind: &'static str,
    lambda0: f64,
    lambda1: f64,
    #[serde(rename = "C_S")]
    c_s: f64,
    unknowns_per_slice: usize,
}

fn basis_record(b: &TransverseBasis) -> BasisRecord {
    BasisRecord {
        kind: match b.kind {
            TransverseKind::Cartesian => "cartesian",
            TransverseKind::Radial => "radial",
            TransverseKind::Modal => "modal",
        },
        lambda0: b.lambda0,
        lambda1: b.lambda1,
        c_s: b.c_s,
        unknowns_per_slice: b.len(),
    }
}

fn violations(v: Vec<crate::config::Violation>) -> CliError {
    CliError::Config(crate::config::ConfigError { violations: v })
}

fn tube_basis(config: &ExperimentConfig, out: &mut Outputs) -> Result<TransverseBasis, CliError> {
    let template = config.template().map_err(violations)?;
    let basis = template.basis(&ModeOptions::default())?;
    out.json("modes.json", &basis_record(&basis))?;
    Ok(basis)
}

fn modes(config: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let cs = config.cross_section().map_err(violations)?;
    let (_, mesh, modes) = TransverseBasis::cartesian(&cs, &ModeOptions::default())?;
    out.json("modes.json", &modes.record())?;
    if config.output.formats.contains(&OutputFormat::Csv) {
        let mut csv = String::from("y1,y2,u0\n");
        for (y, u) in mesh.nodes.iter().zip(&modes.u0) {
            csv.push_str(&format!("{:e},{:e},{:e}\n", y[0], y[1], u));
        }
        out.text("modes_nodal.csv", csv);
    }
    out.pass = modes.lambda0 < modes.lambda1;
    Ok(())
}

#[derive(Serialize)]
struct SpectrumRecord {
    kappa: f64,
    length: f64,
    spacing: f64,
    /// Levels of the positive half-line.
    eigenvalues: Vec<f64>,
    /// Levels of the negative half-line.
    mirrored: Vec<f64>,
    degeneracy_defect: f64,
    analytic_reference: Vec<Option<f64>>,
    max_abs_error: Option<f64>,
    pass: bool,
}

fn spectrum_1d(config: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let s = config.spectrum_1d.clone().unwrap_or_default();
    let kappa = config.physics.kappa;
    let twist = config.physics.twist;
    let c_s = if twist.is_zero() {
        0.0
    } else {
        let cs = config.cross_section().map_err(violations)?;
        TransverseBasis::cartesian(&cs, &ModeOptions::default())?.2.c_s
    };
    let grid = Grid1D::staggered(s.length, s.spacing)?;
    let h = assemble_hd(kappa, &grid, &twist, c_s)?;
    let plus = h.half_block(true).lowest(s.count);
    let minus = h.half_block(false).lowest(s.count);
    let defect = plus.iter().zip(&minus).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let offset = match twist {
        TwistProfile::Zero => Some(0.0),
        TwistProfile::ConstantRate { rate } => Some(rate * rate * c_s),
        TwistProfile::CompactBump { .. } => None,
    };
    let reference: Vec<Option<f64>> = (1..=plus.len())
        .map(|n| match offset {
            Some(o) if kappa > 0.0 => Some(-kappa * kappa / (4.0 * (n * n) as f64) + o),
            _ => None,
        })
        .collect();
    let errors: Vec<Option<f64>> = plus.iter().zip(&reference).map(|(e, r)| r.map(|r| (e - r).abs())).collect();
    let max_abs_error = errors.iter().flatten().copied().reduce(f64::max);
    let pass = defect == 0.0 && max_abs_error.map_or(true, |e| e <= s.tolerance);
    let mut csv = String::from("n,eigenvalue,analytic_reference,abs_error\n");
    for (k, e) in plus.iter().enumerate() {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        csv.push_str(&format!("{},{e:e},{},{}\n", k + 1, fmt(reference[k]), fmt(errors[k])));
    }
    out.json(
        "spectrum.json",
        &SpectrumRecord {
            kappa,
            length: s.length,
            spacing: s.spacing,
            eigenvalues: plus,
            mirrored: minus,
            degeneracy_defect: defect,
            analytic_reference: reference,
            max_abs_error,
            pass,
        },
    )?;
    if config.output.formats.contains(&OutputFormat::Csv) {
        out.text("spectrum.csv", csv);
    }
    out.pass = pass;
    Ok(())
}

#[derive(Serialize)]
struct BoundaryRecord {
    phi_plus: Complex64,
    phi_minus: Complex64,
    phitilde_plus: Complex64,
    phitilde_minus: Complex64,
    flags: tubelab::oned::boundary::DivergenceFlags,
    extension: ExtensionChoice,
    extension_residual: Option<f64>,
    in_extension: bool,
}

fn boundary(config: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let b = config.boundary_data.clone().unwrap_or_default();
    let kappa = config.physics.kappa;
    let opts = BoundaryOptions {
        r0: b.r0,
        count: b.count,
        ..BoundaryOptions::default()
    };
    let (plus, minus) = match b.function {
        BoundaryFunction::Regular { energy } => (
            SideSamples::from_fn(|x| regular_series(kappa, energy, x).0, |x| regular_series(kappa, energy, x).1, true, &opts),
            SideSamples::from_fn(|x| regular_series(kappa, energy, -x).0, |x| -regular_series(kappa, energy, -x).1, false, &opts),
        ),
        BoundaryFunction::LocalModel {
            phi_plus,
            phi_minus,
            phitilde_plus,
            phitilde_minus,
        } => (
            SideSamples::from_fn(
                |x| local_solution(kappa, phi_plus, phitilde_plus, x).0,
                |x| local_solution(kappa, phi_plus, phitilde_plus, x).1,
                true,
                &opts,
            ),
            SideSamples::from_fn(
                |x| local_solution(kappa, phi_minus, phitilde_minus, x).0,
                |x| local_solution(kappa, phi_minus, phitilde_minus, x).1,
                false,
                &opts,
            ),
        ),
    };
    let data = boundary_data(&plus, &minus, kappa, &opts)?;
    let ext = match b.extension {
        ExtensionChoice::Dirichlet => ExtensionMatrix::dirichlet(),
        ExtensionChoice::MinusIdentity => ExtensionMatrix::minus_identity(),
        ExtensionChoice::Angles {
            global,
            mix,
            phase1,
            phase2,
        } => ExtensionMatrix::from_angles(global, mix, phase1, phase2),
    };
    let (in_extension, residual) = match check_extension_membership(&data, &ext, b.tolerance) {
        Ok((ok, r)) => (ok, Some(r)),
        Err(LabError::NotInAdjointDomain { .. }) => (false, None),
        Err(e) => return Err(e.into()),
    };
    out.json(
        "boundary_data.json",
        &BoundaryRecord {
            phi_plus: data.phi_plus,
            phi_minus: data.phi_minus,
            phitilde_plus: data.phitilde_plus,
            phitilde_minus: data.phitilde_minus,
            flags: data.flags,
            extension: b.extension,
            extension_residual: residual,
            in_extension,
        },
    )?;
    out.pass = in_extension;
    Ok(())
}

fn tube_solve(config: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let ts = config.tube_solve.clone().unwrap_or_default();
    let ladder = config.ladder()?;
    let template = config.template().map_err(violations)?;
    let basis = tube_basis(config, out)?;
    let rtol = config.solver.rtol;
    let records: Vec<SolveRecord> = ladder
        .epsilons
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            let run = || -> tubelab::Result<SolveRecord> {
                let (op, shift) = match ts.form {
                    SolveForm::ADot => {
                        let spec = rung_spec(&template, &ladder, eps);
                        (assemble_a_forms(&spec, &basis)?.1, spec.shift())
                    }
                    SolveForm::B => {
                        let spec = template.with_epsilon(eps);
                        (assemble_b_form(&spec, &basis)?, 0.0)
                    }
                };
                let z = Complex64::new(shift + ts.z[0], ts.z[1]);
                let theta = to_complex(&ts.vector.build(&op.grid, &basis));
                let sol = apply_resolvent_complex(&op.op, z, &theta, rtol)?;
                Ok(SolveRecord {
                    epsilon: eps,
                    shift: [z.re, z.im],
                    iterations: sol.iterations,
                    residual: sol.residual,
                    norms: SolveNorms {
                        theta: norm(&theta),
                        psi: norm(&sol.psi),
                    },
                })
            };
            run().map_err(|e| e.at_rung(i, eps))
        })
        .collect::<tubelab::Result<_>>()?;
    for (k, r) in records.iter().enumerate() {
        out.json(&format!("solve_rung_{k}.json"), r)?;
    }
    out.pass = records.iter().all(|r| r.residual <= rtol);
    Ok(())
}

fn converge(config: &ExperimentConfig, id: &str, out: &mut Outputs) -> Result<(), CliError> {
    let ladder = config.ladder()?;
    let template = config.template().map_err(violations)?;
    let basis = tube_basis(config, out)?;
    let sweep = SweepOptions {
        power: PowerOptions {
            max_iter: config.solver.power_max_iter,
            stagnation: config.solver.power_stagnation,
            seed: config.solver.seed,
        },
        rtol: config.solver.rtol,
    };
    let report = match config.theorem {
        Some(TheoremTag::T1) => spectrum_convergence(&ladder, &template, &basis)?,
        Some(TheoremTag::T2) => {
            let vectors = config.strong.clone().unwrap_or_default().vectors;
            strong_resolvent_sweep(&ladder, &template, &vectors, &basis)?
        }
        Some(TheoremTag::P1) => norm_resolvent_sweep(NormPairing::Inverse, &ladder, &template, &basis, &sweep)?,
        Some(TheoremTag::P2) => norm_resolvent_sweep(NormPairing::ShiftedComplex, &ladder, &template, &basis, &sweep)?,
        Some(TheoremTag::P3) => norm_resolvent_sweep(NormPairing::OneDimensional, &ladder, &template, &basis, &sweep)?,
        other => {
            return Err(LabError::InvalidInput(format!("converge cannot run {other:?}")).into());
        }
    };
    out.report(config, id, report)
}

fn klaus(config: &ExperimentConfig, id: &str, out: &mut Outputs) -> Result<(), CliError> {
    let basis = tube_basis(config, out)?;
    let (k, report) = klaus_report(config.physics.kappa, config.delta(), &config.ladder.epsilons, &basis)?;
    out.json("klaus.json", &k)?;
    out.report(config, id, report)
}

fn qeps(config: &ExperimentConfig, id: &str, out: &mut Outputs) -> Result<(), CliError> {
    let scenario = config.qeps.ok_or_else(|| LabError::InvalidInput("qeps scenario missing".into()))?;
    let (q, report) = qeps_report(scenario, config.physics.kappa, config.delta(), &config.ladder.epsilons)?;
    out.json("qeps.json", &q)?;
    out.report(config, id, report)
}

fn gamma(config: &ExperimentConfig, id: &str, out: &mut Outputs) -> Result<(), CliError> {
    let w = config.gamma.unwrap_or_default();
    let ladder = config.ladder()?;
    let template = config.template().map_err(violations)?;
    let basis = tube_basis(config, out)?;
    let opts = GammaOptions {
        seed: config.solver.seed,
        ..GammaOptions::default()
    };
    let (g, report) = gamma_report(&w, &ladder, &template, &basis, &opts)?;
    out.json("gamma.json", &g)?;
    out.report(config, id, report)
}

fn compute(config: &ExperimentConfig, id: &str) -> Result<Outputs, CliError> {
    let mut out = Outputs::new();
    match config.kind() {
        Some(ExperimentKind::Modes) => modes(config, &mut out)?,
        Some(ExperimentKind::Spectrum1d) => spectrum_1d(config, &mut out)?,
        Some(ExperimentKind::BoundaryData) => boundary(config, &mut out)?,
        Some(ExperimentKind::TubeSolve) => tube_solve(config, &mut out)?,
        Some(ExperimentKind::Converge) => converge(config, id, &mut out)?,
        Some(ExperimentKind::Klaus) => klaus(config, id, &mut out)?,
        Some(ExperimentKind::Qeps) => qeps(config, id, &mut out)?,
        Some(ExperimentKind::Gamma) => gamma(config, id, &mut out)?,
        None => return Err(LabError::InvalidInput("no experiment selected".into()).into()),
    }
    Ok(out)
}

/// Directory of a run: the output directory joined with the first 16 hex
/// digits of the experiment id.
pub fn run_dir(config: &ExperimentConfig) -> PathBuf {
    config.output.directory.join(&config.experiment_id()[..16])
}

/// Validates, computes, then writes every artifact and the manifest.
/// Nothing touches the disk before validation and the budget check pass.
/// Pipeline errors still produce a manifest that records them.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let v = config.validate();
    if !v.is_empty() {
        return Err(violations(v));
    }
    let id = config.experiment_id();
    let dir = run_dir(config);
    if dir.join(crate::manifest::MANIFEST_FILE).exists() {
        return Err(CliError::RunExists(dir));
    }
    let started = unix_now();
    let computed = match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Pool(e.to_string()))?
            .install(|| compute(config, &id)),
        None => compute(config, &id),
    };
    let mut writer = RunWriter::create(&dir)?;
    let mut errors = Vec::new();
    let mut pass = false;
    match computed {
        Ok(out) => {
            for (name, bytes) in &out.files {
                writer.write(name, bytes)?;
            }
            let reports: Vec<PathBuf> = out.reports.iter().map(|r| dir.join(r)).collect();
            for script in emit_plots(&reports)? {
                writer.adopt(&script)?;
            }
            pass = out.pass;
        }
        Err(e) => errors.push(format!("{} [{}]", e, e.code())),
    }
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        experiment_id: id,
        experiment: config.kind().map(|k| k.as_str()).unwrap_or_default().to_string(),
        tool_version: TOOL_VERSION.to_string(),
        started,
        finished: unix_now(),
        config: config.clone(),
        artifacts: Vec::new(),
        pass,
        errors,
    };
    let manifest = writer.finish(manifest)?;
    Ok(RunOutcome { dir, manifest })
}
