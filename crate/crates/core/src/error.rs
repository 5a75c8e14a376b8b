use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

/// Every failure carries a stable kebab-case code, see [`LabError::code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("origin-exclusion: the point y = (0, 0) is not inside the cross-section")]
    OriginExclusion,
    #[error("mesh-too-coarse: {0}")]
    MeshTooCoarse(String),
    #[error("eigensolver-stall: no convergence after {iterations} steps (residual {residual:.3e})")]
    EigensolverStall { iterations: usize, residual: f64 },
    #[error("ground-state-degenerate: lambda1 - lambda0 = {gap:.3e}")]
    GroundStateDegenerate { gap: f64 },
    #[error("origin-on-grid: node at x = 0 (index {index})")]
    OriginOnGrid { index: usize },
    #[error("delta-range: requires 0 < delta < 1/2, got {delta}")]
    DeltaRange { delta: f64 },
    #[error("shift-too-small: requires c > kappa, got c = {c}, kappa = {kappa}")]
    ShiftTooSmall { c: f64, kappa: f64 },
    #[error("log-regularization-undefined: kappa must be nonzero")]
    LogRegularizationUndefined,
    #[error("need-3-points: got {got} samples")]
    NeedThreePoints { got: usize },
    #[error("not-in-adjoint-domain: regularized boundary derivative diverges ({side})")]
    NotInAdjointDomain { side: String },
    #[error("grid-budget: {unknowns} unknowns exceed the budget of {budget}")]
    GridBudget { unknowns: usize, budget: usize },
    #[error("mode-conflict: {0}")]
    ModeConflict(String),
    #[error("linear-solve-stall: residual history {history:?}")]
    LinearSolveStall { history: Vec<f64> },
    #[error("not-orthogonal: slice inner product {max:.3e} above tolerance")]
    NotOrthogonal { max: f64 },
    #[error("norm-estimate-unreliable: Rayleigh history {history:?}")]
    NormEstimateUnreliable { history: Vec<f64> },
    #[error("degenerate-fit: {0}")]
    DegenerateFit(String),
    #[error("p-range: requires 3/4 < p < 1, got {p}")]
    PRange { p: f64 },
    #[error("not-in-limit-domain: w(0) = {w0:.3e}")]
    NotInLimitDomain { w0: f64 },
    #[error("report-not-found: {0}")]
    ReportNotFound(String),
    #[error("invalid-input: {0}")]
    InvalidInput(String),
    #[error("rung {rung} (epsilon = {epsilon}): {source}")]
    AtRung {
        rung: usize,
        epsilon: f64,
        source: Box<LabError>,
    },
}

impl LabError {
    pub fn code(&self) -> &'static str {
        match self {
            LabError::OriginExclusion => "origin-exclusion",
            LabError::MeshTooCoarse(_) => "mesh-too-coarse",
            LabError::EigensolverStall { .. } => "eigensolver-stall",
            LabError::GroundStateDegenerate { .. } => "ground-state-degenerate",
            LabError::OriginOnGrid { .. } => "origin-on-grid",
            LabError::DeltaRange { .. } => "delta-range",
            LabError::ShiftTooSmall { .. } => "shift-too-small",
            LabError::LogRegularizationUndefined => "log-regularization-undefined",
            LabError::NeedThreePoints { .. } => "need-3-points",
            LabError::NotInAdjointDomain { .. } => "not-in-adjoint-domain",
            LabError::GridBudget { .. } => "grid-budget",
            LabError::ModeConflict(_) => "mode-conflict",
            LabError::LinearSolveStall { .. } => "linear-solve-stall",
            LabError::NotOrthogonal { .. } => "not-orthogonal",
            LabError::NormEstimateUnreliable { .. } => "norm-estimate-unreliable",
            LabError::DegenerateFit(_) => "degenerate-fit",
            LabError::PRange { .. } => "p-range",
            LabError::NotInLimitDomain { .. } => "not-in-limit-domain",
            LabError::ReportNotFound(_) => "report-not-found",
            LabError::InvalidInput(_) => "invalid-input",
            LabError::AtRung { source, .. } => source.code(),
        }
    }

    pub fn at_rung(self, rung: usize, epsilon: f64) -> LabError {
        LabError::AtRung {
            rung,
            epsilon,
            source: Box::new(self),
        }
    }
}

pub fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 0.5 {
        Ok(())
    } else {
        Err(LabError::DeltaRange { delta })
    }
}

/// Attractive runs need `c > kappa` so that the shifted form stays positive.
pub fn check_shift(kappa: f64, c: f64) -> Result<()> {
    if kappa > 0.0 && c <= kappa {
        Err(LabError::ShiftTooSmall { c, kappa })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_survive_rung_context() {
        let e = LabError::LinearSolveStall { history: vec![1.0] }.at_rung(2, 0.05);
        assert_eq!(e.code(), "linear-solve-stall");
        assert!(e.to_string().contains("rung 2"));
    }

    #[test]
    fn delta_and_shift_guards() {
        assert!(check_delta(0.3).is_ok());
        assert_eq!(check_delta(0.6).unwrap_err().code(), "delta-range");
        assert_eq!(check_delta(0.0).unwrap_err().code(), "delta-range");
        assert_eq!(check_shift(1.0, 1.0).unwrap_err().code(), "shift-too-small");
        assert!(check_shift(1.0, 2.0).is_ok());
        assert!(check_shift(-1.0, 0.0).is_ok());
    }
}
