//! Epsilon-ladder experiments: resolvent distances, spectra, the Klaus
//! checklist, `Q^eps`, form limits and sampled properties.

pub mod gamma;
pub mod klaus;
pub mod ladder;
pub mod norm;
pub mod props;
pub mod qeps;
pub mod report;
pub mod spectrum;
pub mod strong;

pub use gamma::{gamma_report, gamma_trial_check, limit_form, trial_form_series, tube_trial_form, GammaOptions, GammaReport, TrialFunction};
pub use klaus::{klaus_check, klaus_report, KlausReport};
pub use ladder::{fit_rate, strictly_decreasing, strictly_increasing, EpsilonLadder, RateFit};
pub use norm::{norm_resolvent_sweep, rung_norm, rung_spec, NormPairing, RungNorm, SweepOptions, SLOPE_SLACK};
pub use props::{cross_term_sweep, form_positivity, hardy_sweep, random_admissible, CrossTermSweep, PositivityRung};
pub use qeps::{qeps_estimate, qeps_report, qeps_sweep, QepsReport, QepsScenario};
pub use report::{ConvergenceReport, TheoremTag, SCHEMA_VERSION};
pub use spectrum::{rung_spectrum, spectrum_convergence, twist_shift, RungSpectrum, TwistShift};
pub use strong::{default_test_vectors, strong_resolvent_sweep, TestVector};
