use super::ladder::RateFit;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremTag {
    T1,
    T2,
    P1,
    P2,
    P3,
    P4,
    Q1,
    Q2,
    #[serde(rename = "KLAUS")]
    Klaus,
}

impl TheoremTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremTag::T1 => "T1",
            TheoremTag::T2 => "T2",
            TheoremTag::P1 => "P1",
            TheoremTag::P2 => "P2",
            TheoremTag::P3 => "P3",
            TheoremTag::P4 => "P4",
            TheoremTag::Q1 => "Q1",
            TheoremTag::Q2 => "Q2",
            TheoremTag::Klaus => "KLAUS",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_uppercase().as_str() {
            "T1" => TheoremTag::T1,
            "T2" => TheoremTag::T2,
            "P1" => TheoremTag::P1,
            "P2" => TheoremTag::P2,
            "P3" => TheoremTag::P3,
            "P4" => TheoremTag::P4,
            "Q1" => TheoremTag::Q1,
            "Q2" => TheoremTag::Q2,
            "KLAUS" => TheoremTag::Klaus,
            _ => return None,
        })
    }
}

/// Per-rung results of one experiment with its pass decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub experiment_id: String,
    pub theorem_tag: TheoremTag,
    pub ladder: Vec<f64>,
    pub distances: Vec<f64>,
    /// Further per-rung columns, keyed by name.
    pub series: BTreeMap<String, Vec<f64>>,
    /// Fits of individual series.
    pub fits: BTreeMap<String, RateFit>,
    /// Fit of `distances` when one was made.
    pub fit: Option<RateFit>,
    pub theoretical_slope: Option<f64>,
    pub pass: bool,
    pub runtime_seconds: f64,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub fn new(tag: TheoremTag, ladder: Vec<f64>) -> Self {
        ConvergenceReport {
            schema_version: SCHEMA_VERSION,
            experiment_id: String::new(),
            theorem_tag: tag,
            ladder,
            distances: Vec::new(),
            series: BTreeMap::new(),
            fits: BTreeMap::new(),
            fit: None,
            theoretical_slope: None,
            pass: false,
            runtime_seconds: 0.0,
            notes: Vec::new(),
        }
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.get(name).map(|v| v.as_slice())
    }

    /// Copy with the wall-clock field zeroed, for bitwise comparisons.
    pub fn without_timing(&self) -> Self {
        ConvergenceReport {
            runtime_seconds: 0.0,
            ..self.clone()
        }
    }

    /// CSV mirror: one row per rung with `epsilon`, `distance` and every
    /// series of matching length.
    pub fn to_csv(&self) -> String {
        let n = self.ladder.len();
        let cols: Vec<(&String, &Vec<f64>)> = self.series.iter().filter(|(_, v)| v.len() == n).collect();
        let mut out = String::from("epsilon,distance");
        for (k, _) in &cols {
            out.push(',');
            out.push_str(k);
        }
        out.push('\n');
        for i in 0..n {
            out.push_str(&format!("{:e}", self.ladder[i]));
            out.push(',');
            if let Some(d) = self.distances.get(i) {
                out.push_str(&format!("{d:e}"));
            }
            for (_, v) in &cols {
                out.push_str(&format!(",{:e}", v[i]));
            }
            out.push('\n');
        }
        out
    }
}
