//! Trial farming, timing and scaling fits.

mod experiment;
mod fit;

pub use experiment::{
    read_results_csv, run_experiment, summarize, write_results_csv, write_series_dat, Engine, ExperimentOutput,
    ExperimentPlan, RunRecord, SizeSummary, RESULTS_HEADER,
};
pub use fit::{
    estimate_exponents, fit_models, parse_series, ExponentReport, FitReport, Model, ModelFit, NLS_MAX_ITERATIONS,
    NLS_RELATIVE_STEP,
};
