use serde::{Deserialize, Serialize};

/// Rotation rate `alpha'(x)` of the cross-section along the tube, with
/// `alpha(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TwistProfile {
    #[default]
    Zero,
    ConstantRate { rate: f64 },
    /// `A (1 - (x/r)^2)^2` on `|x| < r`, zero outside; C^1.
    CompactBump { amplitude: f64, radius: f64 },
}

impl TwistProfile {
    pub fn rate(&self, x: f64) -> f64 {
        match *self {
            TwistProfile::Zero => 0.0,
            TwistProfile::ConstantRate { rate } => rate,
            TwistProfile::CompactBump { amplitude, radius } => {
                let s = x / radius;
                if s.abs() < 1.0 {
                    amplitude * (1.0 - s * s).powi(2)
                } else {
                    0.0
                }
            }
        }
    }

    /// `alpha(x) = int_0^x alpha'`.
    pub fn angle(&self, x: f64) -> f64 {
        match *self {
            TwistProfile::Zero => 0.0,
            TwistProfile::ConstantRate { rate } => rate * x,
            TwistProfile::CompactBump { amplitude, radius } => {
                let s = x.clamp(-radius, radius) / radius;
                amplitude * radius * (s - 2.0 * s.powi(3) / 3.0 + s.powi(5) / 5.0)
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match *self {
            TwistProfile::Zero => 0.0,
            TwistProfile::ConstantRate { rate } => rate.abs(),
            TwistProfile::CompactBump { amplitude, .. } => amplitude.abs(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sup_norm() == 0.0
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ok = match *self {
            TwistProfile::Zero => true,
            TwistProfile::ConstantRate { rate } => rate.is_finite(),
            TwistProfile::CompactBump { amplitude, radius } => amplitude.is_finite() && radius > 0.0 && radius.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(crate::LabError::InvalidInput(format!("invalid twist profile {self:?}")))
        }
    }
}
