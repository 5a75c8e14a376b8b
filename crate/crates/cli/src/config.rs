//! Declarative run description, parsed from TOML.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use tubelab::geometry::{CrossSectionSpec, Shape};
use tubelab::lab::{default_test_vectors, EpsilonLadder, QepsScenario, TestVector, TheoremTag, TrialFunction};
use tubelab::oned::TwistProfile;
use tubelab::tube::{TubeMode, TubeOperatorSpec, XDomain, DEFAULT_BUDGET, DEFAULT_RTOL};
use tubelab::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Modes,
    #[serde(rename = "spectrum-1d")]
    Spectrum1d,
    BoundaryData,
    TubeSolve,
    Converge,
    Klaus,
    Qeps,
    Gamma,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Modes => "modes",
            ExperimentKind::Spectrum1d => "spectrum-1d",
            ExperimentKind::BoundaryData => "boundary-data",
            ExperimentKind::TubeSolve => "tube-solve",
            ExperimentKind::Converge => "converge",
            ExperimentKind::Klaus => "klaus",
            ExperimentKind::Qeps => "qeps",
            ExperimentKind::Gamma => "gamma",
        }
    }
}

/// One failed check, rendered as `code: message`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: String,
    pub message: String,
}

impl Violation {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Violation {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

impl From<LabError> for Violation {
    fn from(e: LabError) -> Self {
        let code = e.code();
        let text = e.to_string();
        let message = text.strip_prefix(&format!("{code}: ")).unwrap_or(&text).to_string();
        Violation::new(code, message)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    #[default]
    Disk,
    Ellipse,
    Rectangle,
    Polygon,
}

/// Cross-section and transverse discretization. Only the parameters of the
/// chosen shape may be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryConfig {
    pub shape: ShapeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<[f64; 2]>>,
    pub center: [f64; 2],
    /// Lattice points per unit length.
    pub resolution: usize,
    pub mode: TubeMode,
    pub transverse_modes: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            shape: ShapeKind::Disk,
            radius: None,
            a: None,
            b: None,
            width: None,
            height: None,
            vertices: None,
            center: [0.0, 0.0],
            resolution: 16,
            mode: TubeMode::Axisymmetric,
            transverse_modes: 16,
        }
    }
}

impl GeometryConfig {
    pub fn cross_section(&self) -> Result<CrossSectionSpec, Vec<Violation>> {
        let mut v = Vec::new();
        let given = [
            ("radius", self.radius.is_some()),
            ("a", self.a.is_some()),
            ("b", self.b.is_some()),
            ("width", self.width.is_some()),
            ("height", self.height.is_some()),
            ("vertices", self.vertices.is_some()),
        ];
        let needed: &[&str] = match self.shape {
            ShapeKind::Disk => &["radius"],
            ShapeKind::Ellipse => &["a", "b"],
            ShapeKind::Rectangle => &["width", "height"],
            ShapeKind::Polygon => &["vertices"],
        };
        for (key, present) in given {
            if present && !needed.contains(&key) {
                v.push(Violation::new(
                    "unknown-key",
                    format!("geometry.{key} does not apply to shape {:?}", self.shape),
                ));
            }
            if !present && needed.contains(&key) {
                v.push(Violation::new("missing-field", format!("geometry.{key} is required")));
            }
        }
        if !v.is_empty() {
            return Err(v);
        }
        let shape = match self.shape {
            ShapeKind::Disk => Shape::Disk {
                radius: self.radius.unwrap_or_default(),
            },
            ShapeKind::Ellipse => Shape::Ellipse {
                a: self.a.unwrap_or_default(),
                b: self.b.unwrap_or_default(),
            },
            ShapeKind::Rectangle => Shape::Rectangle {
                width: self.width.unwrap_or_default(),
                height: self.height.unwrap_or_default(),
            },
            ShapeKind::Polygon => Shape::Polygon {
                vertices: self.vertices.clone().unwrap_or_default(),
            },
        };
        let spec = CrossSectionSpec::new(shape, self.resolution).with_center(self.center);
        spec.validate().map_err(|e| vec![e.into()])?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicsConfig {
    pub kappa: f64,
    /// Defaults to 0.3.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Defaults to `2 |kappa|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub twist: TwistProfile,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            kappa: 1.0,
            delta: None,
            c: None,
            twist: TwistProfile::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LadderConfig {
    pub epsilons: Vec<f64>,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            epsilons: vec![0.2, 0.1, 0.05, 0.025],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DomainConfig {
    /// Half-length `L` of the axial interval.
    pub length: f64,
    pub spacing: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            length: 20.0,
            spacing: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub seed: u64,
    pub rtol: f64,
    pub power_max_iter: usize,
    pub power_stagnation: f64,
    /// Largest number of tube unknowns per rung.
    pub budget: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 11,
            rtol: DEFAULT_RTOL,
            power_max_iter: 30,
            power_stagnation: 1e-4,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    /// Parent of the per-experiment run directories.
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("runs"),
            formats: vec![OutputFormat::Json, OutputFormat::Csv],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Spectrum1dConfig {
    pub count: usize,
    pub length: f64,
    pub spacing: f64,
    /// Largest accepted error against the analytic levels, when known.
    pub tolerance: f64,
}

impl Default for Spectrum1dConfig {
    fn default() -> Self {
        Spectrum1dConfig {
            count: 3,
            length: 200.0,
            spacing: 0.01,
            tolerance: 1e-3,
        }
    }
}

/// Function whose boundary data is extracted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "function", rename_all = "snake_case")]
pub enum BoundaryFunction {
    /// Regular solution at energy `E` on both half-lines; Dirichlet data.
    Regular { energy: f64 },
    /// Local model in the adjoint domain with prescribed one-sided data.
    LocalModel {
        phi_plus: f64,
        phi_minus: f64,
        phitilde_plus: f64,
        phitilde_minus: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtensionChoice {
    #[default]
    Dirichlet,
    MinusIdentity,
    Angles { global: f64, mix: f64, phase1: f64, phase2: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDataConfig {
    #[serde(flatten)]
    pub function: BoundaryFunction,
    #[serde(default)]
    pub extension: ExtensionChoice,
    /// Largest sampling radius. Extrapolation in x leaves an error of
    /// order r0 ln^2 r0, so this sits well below the membership tolerance.
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default = "default_sample_count")]
    pub count: usize,
    #[serde(default = "default_membership_tol")]
    pub tolerance: f64,
}

fn default_r0() -> f64 {
    1e-8
}

fn default_sample_count() -> usize {
    4
}

fn default_membership_tol() -> f64 {
    1e-6
}

impl Default for BoundaryDataConfig {
    fn default() -> Self {
        BoundaryDataConfig {
            function: BoundaryFunction::Regular { energy: -0.25 },
            extension: ExtensionChoice::Dirichlet,
            r0: default_r0(),
            count: default_sample_count(),
            tolerance: default_membership_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolveForm {
    /// Regularized and shifted form.
    #[default]
    ADot,
    /// Unregularized form.
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TubeSolveConfig {
    pub form: SolveForm,
    /// Spectral point relative to the form's shift, `[re, im]`.
    pub z: [f64; 2],
    pub vector: TestVector,
}

impl Default for TubeSolveConfig {
    fn default() -> Self {
        TubeSolveConfig {
            form: SolveForm::ADot,
            z: [0.0, 1.0],
            vector: TestVector::Limit { center: 3.0, width: 1.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrongConfig {
    pub vectors: Vec<TestVector>,
}

impl Default for StrongConfig {
    fn default() -> Self {
        StrongConfig {
            vectors: default_test_vectors(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    /// Pairing or claim checked by `converge`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremTag>,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub ladder: LadderConfig,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum_1d: Option<Spectrum1dConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_data: Option<BoundaryDataConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tube_solve: Option<TubeSolveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strong: Option<StrongConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qeps: Option<QepsScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<TrialFunction>,
}

/// Command-line values that take precedence over the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<ExperimentKind>,
    pub theorem: Option<TheoremTag>,
    pub seed: Option<u64>,
    pub output_directory: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", lines.join("\n"))
    }
}

impl std::error::Error for ConfigError {}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_with(text, &Overrides::default())
}

/// Parses, applies overrides, fills defaults and validates, reporting
/// every violation found.
pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let fail = |v: Vec<Violation>| Err(ConfigError { violations: v });
    let doc: toml::Table = match text.parse() {
        Ok(t) => t,
        Err(e) => return fail(vec![Violation::new("parse-error", e.to_string().trim())]),
    };
    let mut config: ExperimentConfig = match toml::Value::Table(doc.clone()).try_into() {
        Ok(c) => c,
        Err(e) => return fail(vec![Violation::new("schema", e.to_string().trim())]),
    };
    let mut violations = Vec::new();
    match toml::Value::try_from(&config) {
        Ok(toml::Value::Table(known)) => unknown_keys(&doc, &known, "", &mut violations),
        _ => violations.push(Violation::new("schema", "configuration does not serialize")),
    }
    if let Some(kind) = overrides.experiment {
        match config.experiment {
            Some(k) if k != kind => violations.push(Violation::new(
                "experiment-mismatch",
                format!("the document describes {} but {} was requested", k.as_str(), kind.as_str()),
            )),
            _ => config.experiment = Some(kind),
        }
    }
    if let Some(t) = overrides.theorem {
        config.theorem = Some(t);
    }
    if let Some(s) = overrides.seed {
        config.solver.seed = s;
    }
    if let Some(d) = &overrides.output_directory {
        config.output.directory = d.clone();
    }
    config.fill_defaults();
    violations.extend(config.validate());
    if violations.is_empty() {
        Ok(config)
    } else {
        fail(violations)
    }
}

/// Keys of `doc` that the typed configuration does not carry.
fn unknown_keys(doc: &toml::Table, known: &toml::Table, prefix: &str, out: &mut Vec<Violation>) {
    for (key, value) in doc {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match known.get(key) {
            None => out.push(Violation::new("unknown-key", format!("{path} is not part of the schema"))),
            Some(k) => walk_value(value, k, &path, out),
        }
    }
}

fn walk_value(doc: &toml::Value, known: &toml::Value, path: &str, out: &mut Vec<Violation>) {
    match (doc, known) {
        (toml::Value::Table(d), toml::Value::Table(k)) => unknown_keys(d, k, path, out),
        (toml::Value::Array(d), toml::Value::Array(k)) => {
            for (i, (dv, kv)) in d.iter().zip(k).enumerate() {
                walk_value(dv, kv, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

impl ExperimentConfig {
    pub fn kind(&self) -> Option<ExperimentKind> {
        self.experiment
    }

    pub fn delta(&self) -> f64 {
        self.physics.delta.unwrap_or(0.3)
    }

    pub fn c(&self) -> f64 {
        self.physics.c.unwrap_or(2.0 * self.physics.kappa.abs())
    }

    /// Replaces every optional value the selected experiment uses by its
    /// default, so that serializing the result spells out the whole run.
    pub fn fill_defaults(&mut self) {
        self.physics.delta = Some(self.delta());
        self.physics.c = Some(self.c());
        if self.geometry.shape == ShapeKind::Disk && self.geometry.radius.is_none() {
            self.geometry.radius = Some(1.0);
        }
        match self.experiment {
            Some(ExperimentKind::Spectrum1d) => {
                self.spectrum_1d.get_or_insert_with(Spectrum1dConfig::default);
            }
            Some(ExperimentKind::BoundaryData) => {
                self.boundary_data.get_or_insert_with(BoundaryDataConfig::default);
            }
            Some(ExperimentKind::TubeSolve) => {
                self.tube_solve.get_or_insert_with(TubeSolveConfig::default);
            }
            Some(ExperimentKind::Converge) if self.theorem == Some(TheoremTag::T2) => {
                self.strong.get_or_insert_with(StrongConfig::default);
            }
            Some(ExperimentKind::Qeps) => {
                self.qeps.get_or_insert(QepsScenario::BoundedProfile { p: 0.9 });
            }
            Some(ExperimentKind::Gamma) => {
                self.gamma.get_or_insert_with(TrialFunction::default);
            }
            _ => {}
        }
    }

    pub fn cross_section(&self) -> Result<CrossSectionSpec, Vec<Violation>> {
        self.geometry.cross_section()
    }

    pub fn ladder(&self) -> tubelab::Result<EpsilonLadder> {
        EpsilonLadder::new(self.ladder.epsilons.clone(), self.delta(), self.physics.kappa, self.c())
    }

    /// Tube spec at the first rung; rungs replace epsilon and the
    /// regularization.
    pub fn template(&self) -> Result<TubeOperatorSpec, Vec<Violation>> {
        let cs = self.cross_section()?;
        let eps = self.ladder.epsilons.first().copied().unwrap_or(1.0);
        let mut s = TubeOperatorSpec::new(self.physics.kappa, eps, cs);
        s.twist = self.physics.twist;
        s.mode = self.geometry.mode;
        s.transverse_modes = self.geometry.transverse_modes;
        s.x_domain = XDomain {
            length: self.domain.length,
            spacing: self.domain.spacing,
        };
        s.budget = self.solver.budget;
        Ok(s)
    }

    fn uses_tube(&self) -> bool {
        match self.experiment {
            Some(ExperimentKind::TubeSolve | ExperimentKind::Gamma) => true,
            Some(ExperimentKind::Converge) => matches!(
                self.theorem,
                Some(TheoremTag::T1 | TheoremTag::T2 | TheoremTag::P1 | TheoremTag::P2)
            ),
            _ => false,
        }
    }

    /// Every violated constraint, including the unknown budget of tube
    /// runs. Empty means the run may start.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let kappa = self.physics.kappa;
        let delta = self.delta();
        let c = self.c();
        let Some(kind) = self.experiment else {
            v.push(Violation::new("missing-field", "experiment is required"));
            return v;
        };
        if !kappa.is_finite() {
            v.push(Violation::new("invalid-input", "kappa must be finite"));
        }
        if !(delta > 0.0 && delta < 0.5) {
            v.push(Violation::new("delta-range", format!("requires 0 < δ < 1/2, got δ = {delta}")));
        }
        if kappa > 0.0 && !(c > kappa) {
            v.push(Violation::new("shift-too-small", format!("requires c > κ, got c = {c}, κ = {kappa}")));
        }
        if let Err(e) = self.physics.twist.validate() {
            v.push(e.into());
        }
        let eps = &self.ladder.epsilons;
        if eps.len() < 3 {
            v.push(Violation::new("ladder-length", format!("requires at least 3 rungs, got {}", eps.len())));
        }
        if !eps.iter().all(|&e| e > 0.0 && e <= 1.0) {
            v.push(Violation::new("ladder-range", "every epsilon must lie in (0, 1]"));
        }
        if !eps.windows(2).all(|w| w[1] < w[0]) {
            v.push(Violation::new("ladder-order", "epsilons must be strictly decreasing"));
        }
        if !(self.domain.length > 0.0 && self.domain.spacing > 0.0 && self.domain.spacing * 10.0 <= self.domain.length) {
            v.push(Violation::new("domain", "requires length > 0 and 0 < spacing <= length / 10"));
        }
        if !(self.solver.rtol > 0.0 && self.solver.rtol < 1e-2) {
            v.push(Violation::new("solver", "rtol must lie in (0, 1e-2)"));
        }
        if self.solver.power_max_iter == 0 || !(self.solver.power_stagnation > 0.0) {
            v.push(Violation::new("solver", "power iteration needs max_iter >= 1 and stagnation > 0"));
        }
        if self.solver.seed > i64::MAX as u64 {
            v.push(Violation::new("solver", "seed must not exceed 2^63 - 1"));
        }
        if !self.output.formats.contains(&OutputFormat::Json) {
            v.push(Violation::new("output-format", "json output is required"));
        }
        let geometry_ok = match self.cross_section() {
            Ok(_) => true,
            Err(g) => {
                v.extend(g);
                false
            }
        };
        match self.geometry.mode {
            TubeMode::Axisymmetric => {
                let centered_disk = self.geometry.shape == ShapeKind::Disk && self.geometry.center == [0.0, 0.0];
                if !centered_disk {
                    v.push(Violation::new("mode-conflict", "axisymmetric mode requires a disk centered on the axis"));
                }
                if !self.physics.twist.is_zero() {
                    v.push(Violation::new("mode-conflict", "axisymmetric mode requires zero twist"));
                }
            }
            TubeMode::Modal if self.geometry.transverse_modes < 2 => {
                v.push(Violation::new("mode-conflict", "modal mode needs at least 2 transverse modes"));
            }
            _ => {}
        }
        let need_sign = |v: &mut Vec<Violation>, ok: bool, what: &str| {
            if !ok {
                v.push(Violation::new("kappa-sign", format!("{} requires {what}, got κ = {kappa}", kind.as_str())));
            }
        };
        match kind {
            ExperimentKind::Converge => match self.theorem {
                None => v.push(Violation::new("missing-field", "converge requires theorem")),
                Some(TheoremTag::T1) => need_sign(&mut v, kappa != 0.0, "κ != 0"),
                Some(TheoremTag::T2) => need_sign(&mut v, kappa < 0.0, "κ < 0"),
                Some(TheoremTag::P1 | TheoremTag::P2 | TheoremTag::P3) => need_sign(&mut v, kappa > 0.0, "κ > 0"),
                Some(t) => v.push(Violation::new(
                    "theorem-unsupported",
                    format!("converge runs T1, T2, P1, P2 or P3, not {}", t.as_str()),
                )),
            },
            ExperimentKind::Klaus => need_sign(&mut v, kappa > 0.0, "κ > 0"),
            ExperimentKind::Gamma => {
                need_sign(&mut v, kappa < 0.0, "κ < 0");
                if let Some(w) = &self.gamma {
                    let w0 = w.value(0.0);
                    if w0 != 0.0 {
                        v.push(LabError::NotInLimitDomain { w0 }.into());
                    }
                }
            }
            ExperimentKind::Qeps => {
                need_sign(&mut v, kappa != 0.0, "κ != 0");
                if let Some(s) = &self.qeps {
                    if let Err(e) = s.validate(delta) {
                        v.push(e.into());
                    }
                }
            }
            ExperimentKind::BoundaryData => {
                if kappa == 0.0 {
                    v.push(LabError::LogRegularizationUndefined.into());
                }
                if let Some(b) = &self.boundary_data {
                    if b.count < 3 {
                        v.push(LabError::NeedThreePoints { got: b.count }.into());
                    }
                    if !(b.r0 > 0.0 && b.tolerance > 0.0) {
                        v.push(Violation::new("invalid-input", "boundary_data needs r0 > 0 and tolerance > 0"));
                    }
                }
            }
            ExperimentKind::Spectrum1d => {
                if let Some(s) = &self.spectrum_1d {
                    if s.count == 0 || !(s.length > 0.0 && s.spacing > 0.0 && s.spacing * 10.0 <= s.length) {
                        v.push(Violation::new("domain", "spectrum_1d needs count >= 1 and 0 < spacing <= length / 10"));
                    }
                }
            }
            ExperimentKind::Modes | ExperimentKind::TubeSolve => {}
        }
        if kind == ExperimentKind::Converge && self.theorem == Some(TheoremTag::T2) {
            if let Some(s) = &self.strong {
                if s.vectors.is_empty() {
                    v.push(Violation::new("invalid-input", "strong.vectors must not be empty"));
                }
            }
        }
        if geometry_ok && v.is_empty() && self.uses_tube() {
            if let Ok(t) = self.template() {
                if let Err(e) = t.check_budget() {
                    v.push(e.into());
                }
            }
        }
        v
    }

    /// Hex SHA-256 of the canonical JSON of everything except the output
    /// location.
    pub fn experiment_id(&self) -> String {
        let mut c = self.clone();
        c.output.directory = PathBuf::new();
        let bytes = serde_json::to_vec(&c).unwrap_or_default();
        crate::manifest::sha256_hex(&bytes)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }
}
