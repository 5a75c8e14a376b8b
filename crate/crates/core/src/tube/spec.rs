use crate::error::{check_delta, check_shift, LabError, Result};
use crate::geometry::{build_mesh, CrossSectionSpec, ModeOptions, Shape, TransverseBasis};
use crate::oned::{Grid1D, TwistProfile};
use serde::{Deserialize, Serialize};

pub const DEFAULT_BUDGET: usize = 3_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TubeMode {
    #[default]
    FullTensor,
    Axisymmetric,
    /// Lowest transverse eigenvectors of the mesh as the transverse basis.
    Modal,
}

pub const DEFAULT_TRANSVERSE_MODES: usize = 16;

/// Truncation `[-L, L]` and spacing of the axial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XDomain {
    pub length: f64,
    pub spacing: f64,
}

impl Default for XDomain {
    fn default() -> Self {
        XDomain {
            length: 40.0,
            spacing: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeOperatorSpec {
    pub kappa: f64,
    pub epsilon: f64,
    /// Regularization exponent; `None` for the unregularized form.
    pub delta: Option<f64>,
    pub c: Option<f64>,
    pub twist: TwistProfile,
    pub cross_section: CrossSectionSpec,
    pub x_domain: XDomain,
    pub mode: TubeMode,
    /// Basis size in [`TubeMode::Modal`].
    pub transverse_modes: usize,
    pub budget: usize,
}

impl TubeOperatorSpec {
    pub fn new(kappa: f64, epsilon: f64, cross_section: CrossSectionSpec) -> Self {
        TubeOperatorSpec {
            kappa,
            epsilon,
            delta: None,
            c: None,
            twist: TwistProfile::Zero,
            cross_section,
            x_domain: XDomain::default(),
            mode: TubeMode::FullTensor,
            transverse_modes: DEFAULT_TRANSVERSE_MODES,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn regularized(mut self, delta: f64, c: f64) -> Self {
        self.delta = Some(delta);
        self.c = Some(c);
        self
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        let mut s = self.clone();
        s.epsilon = epsilon;
        s
    }

    /// `c / eps^delta`, or 0 when either is absent.
    pub fn shift(&self) -> f64 {
        match (self.delta, self.c) {
            (Some(d), Some(c)) => c / self.epsilon.powf(d),
            _ => 0.0,
        }
    }

    /// Constraint checks that need no mesh.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(LabError::InvalidInput(format!("epsilon must lie in (0, 1], got {}", self.epsilon)));
        }
        if let Some(d) = self.delta {
            check_delta(d)?;
        }
        if let Some(c) = self.c {
            if self.kappa > 0.0 {
                check_shift(self.kappa, c)?;
            }
        }
        self.twist.validate()?;
        self.cross_section.validate()?;
        if self.mode == TubeMode::Axisymmetric {
            let centered_disk = matches!(self.cross_section.shape, Shape::Disk { .. }) && self.cross_section.center == [0.0, 0.0];
            if !centered_disk {
                return Err(LabError::ModeConflict("axisymmetric mode requires a disk centered on the axis".into()));
            }
            if !self.twist.is_zero() {
                return Err(LabError::ModeConflict("axisymmetric mode requires zero twist".into()));
            }
        }
        Ok(())
    }

    pub fn x_grid(&self) -> Result<Grid1D> {
        Grid1D::staggered(self.x_domain.length, self.x_domain.spacing)
    }

    /// Number of transverse unknowns per axial node.
    pub fn transverse_count(&self) -> Result<usize> {
        match self.mode {
            TubeMode::FullTensor => Ok(build_mesh(&self.cross_section)?.len()),
            TubeMode::Modal => Ok(self.transverse_modes),
            TubeMode::Axisymmetric => match self.cross_section.shape {
                Shape::Disk { radius } => Ok(((radius * self.cross_section.resolution as f64).round() as usize).max(3)),
                _ => Err(LabError::ModeConflict("axisymmetric mode requires a disk".into())),
            },
        }
    }

    /// Validates everything, including the unknown budget, before any
    /// eigenproblem is solved.
    pub fn check_budget(&self) -> Result<usize> {
        self.validate()?;
        let nx = (self.x_domain.length / self.x_domain.spacing).round() as usize * 2;
        let unknowns = nx * self.transverse_count()?;
        if unknowns > self.budget {
            return Err(LabError::GridBudget {
                unknowns,
                budget: self.budget,
            });
        }
        Ok(unknowns)
    }

    /// Transverse data for this spec's mode.
    pub fn basis(&self, opts: &ModeOptions) -> Result<TransverseBasis> {
        match self.mode {
            TubeMode::FullTensor => Ok(TransverseBasis::cartesian(&self.cross_section, opts)?.0),
            TubeMode::Modal => TransverseBasis::modal(&self.cross_section, self.transverse_modes, opts),
            TubeMode::Axisymmetric => TransverseBasis::axisymmetric(&self.cross_section),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axisymmetric_with_twist_conflicts() {
        let mut s = TubeOperatorSpec::new(-1.0, 0.1, CrossSectionSpec::disk(1.0, 16));
        s.mode = TubeMode::Axisymmetric;
        s.validate().unwrap();
        s.twist = TwistProfile::ConstantRate { rate: 0.5 };
        assert_eq!(s.validate().unwrap_err().code(), "mode-conflict");
    }

    #[test]
    fn budget_is_checked_before_assembly() {
        let mut s = TubeOperatorSpec::new(-1.0, 0.1, CrossSectionSpec::square(1.0, 40));
        s.budget = 10_000;
        assert_eq!(s.check_budget().unwrap_err().code(), "grid-budget");
    }

    #[test]
    fn attractive_shift_must_exceed_coupling() {
        let s = TubeOperatorSpec::new(1.0, 0.1, CrossSectionSpec::disk(1.0, 16)).regularized(0.3, 1.0);
        assert_eq!(s.validate().unwrap_err().code(), "shift-too-small");
    }
}
