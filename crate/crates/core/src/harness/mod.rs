//! Simulation harness: scenarios, single trials, Monte Carlo studies and CSV
//! output.

mod csv;
mod metrics;
mod scenario;
mod trial;

pub use csv::{format_number, write_csv, write_csv_to, CsvTable};
pub use metrics::{rmse_curve, run_monte_carlo, run_study, RmseCurve, Study};
pub use scenario::{
    default_initial_cov, load_scenario, ControlSchedule, GridSpec, Scenario, CONFIG_KEYS,
    DEFAULT_ALTITUDE, DEFAULT_DT, DEFAULT_EXTENT, DEFAULT_LANDMARK_LENGTH, DEFAULT_LANDMARK_WIDTH,
    DEFAULT_LEG_LENGTH, DEFAULT_STEPS, DEFAULT_SURVEY_SPEED, DEFAULT_TRUTH_ALTITUDE_VAR,
    DEFAULT_TURN_RATE,
};
pub use trial::{detection_rate, run_trial, run_trial_with, simulate_truth, StepRecord, TrialLog};
