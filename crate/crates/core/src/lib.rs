//! Product-limit estimators for twice-censored survival data.
//!
//! Model I observes `Y = max(min(T, V₁), U₁)` (competing risks with left
//! censoring), Model II observes `Y = min(max(T, U₂), V₂)` (complementary
//! risks with right censoring). Both invert in closed form into
//! product-limit estimators of `F_T`; under Turnbull's doubly censored model
//! the two bracket the self-consistent estimator.
//!
//! - [`measures`]: step measures, hazard point masses, product-integrals
//! - [`sample`]: observations, file parsing, grouped counts
//! - [`estimators`]: Model I/II inversion engines and closed-form fits
//! - [`turnbull`]: self-consistent EM and the bounds check
//! - [`simulate`]: latent samplers, exact oracles, Monte Carlo studies

pub mod error;
pub mod estimators;
pub mod measures;
pub mod sample;
pub mod simulate;
pub mod turnbull;

pub use error::{Error, ParseError, Result};
pub use estimators::{
    condition_11_diagnostic, fit_model_one, fit_model_two, invert_model_one, invert_model_two, sample_diagnostics,
    Diagnostics, FitWarning, ModelOneFit, ModelTwoFit,
};
pub use measures::{
    cdf_from_reverse_hazard, point_mass_convert, sup_distance, survival_from_hazard, HazardIncrements, HazardKind,
    MonotoneStepFunction, Orientation, StepMeasure,
};
pub use sample::{group, parse_dataset, validate_for_model, CsvFormat, GroupedSample, Model, Observation};
pub use simulate::{
    analytic_subdistributions, bootstrap_ci, bootstrap_coverage, convergence_study, normality_study, sample_latent,
    Dist, LatentSpec, StudyReport,
};
pub use turnbull::{check_bounds, fit_turnbull, self_consistency_residual, BoundsReport, TurnbullFit, TurnbullOptions};
