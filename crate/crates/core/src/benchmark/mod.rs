//! Experiment harness: batch runs over problems, dimensions, starting points
//! and solvers, Dolan-Moré performance profiles, and a two-parameter study
//! of `(τ, λ₀)`.

mod profile;
mod study;
mod suite;

pub use profile::{
    performance_profile, write_profile_csv, write_profile_dat, Metric, ProfileCurve, PROFILE_HEADER,
};
pub use study::{
    grid_samples, parameter_study, random_samples, write_study_csv, Sampler, StudyOptions,
    StudyRow, STUDY_HEADER,
};
pub use suite::{
    read_results_csv, run_suite, worker_count, write_results_csv, RunRecord, SuiteSpec,
    RESULTS_HEADER,
};
