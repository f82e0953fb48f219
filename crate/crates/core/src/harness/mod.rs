// SPDX-License-Identifier: Apache-2.0

//! Experiments: convergence tables and rate fits, lemma checks, and the
//! fractional-coupling instability sweep.

mod instability;
mod lemmas;
mod rate;
mod reference;
mod strong;

pub use instability::{
    instability_sweep, log_norm_of_power, verdict, InstabilityRow, InstabilityVerdict,
    INSTABILITY_FACTOR, SWEEP_SEED,
};
pub use lemmas::{
    consistency_slope, verify_all, verify_lemma, LemmaGrids, LemmaId, LemmaReport, IDENTITY_TOL,
    LEMMA_TOL, REFINEMENT_TOL,
};
pub use rate::{
    error_curve, error_curve_with_reference, fit_rate, select_fit_rows, RateFit, RateOptions,
    RateReport, RateRow, BOUND_TOL, DEFAULT_FIT_WINDOW,
};
pub use reference::{ExactReference, Weight, ORACLE_TOL, SHIFT_THRESHOLD};
pub use strong::strong_errors;
