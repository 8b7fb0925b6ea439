//! Monte Carlo aggregation of trial errors.

use rayon::prelude::*;

use super::{detection_rate, run_trial, Scenario, TrialLog};
use crate::{Error, Result};

/// Per-step root-mean-square 3-D position error `(x, y, altitude)` over `runs`
/// trials.
#[derive(Clone, Debug, PartialEq)]
pub struct RmseCurve {
    pub dt: f64,
    pub rmse: Vec<f64>,
    pub runs: usize,
}

impl RmseCurve {
    pub fn len(&self) -> usize {
        self.rmse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rmse.is_empty()
    }

    pub fn time_average(&self) -> f64 {
        mean(&self.rmse)
    }

    /// Mean over steps `[from, to)` given as fractions of the curve length.
    pub fn window_mean(&self, from: f64, to: f64) -> f64 {
        let n = self.rmse.len() as f64;
        let a = (from * n).round() as usize;
        let b = ((to * n).round() as usize).min(self.rmse.len());
        mean(&self.rmse[a.min(b)..b])
    }

    /// Least-squares slope of RMSE against time, in m/s.
    pub fn slope(&self) -> f64 {
        let n = self.rmse.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let t_mean = (n + 1.0) / 2.0 * self.dt;
        let r_mean = self.time_average();
        let (mut num, mut den) = (0.0, 0.0);
        for (i, r) in self.rmse.iter().enumerate() {
            let dt = (i + 1) as f64 * self.dt - t_mean;
            num += dt * (r - r_mean);
            den += dt * dt;
        }
        num / den
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// RMSE curve over logs of equal length, summed in the given order.
pub fn rmse_curve(logs: &[TrialLog]) -> RmseCurve {
    let steps = logs.first().map_or(0, |l| l.records.len());
    let dt = logs.first().map_or(0.0, |l| l.dt);
    let mut sums = vec![0.0; steps];
    for log in logs {
        assert_eq!(log.records.len(), steps, "trial logs differ in length");
        for (s, r) in sums.iter_mut().zip(&log.records) {
            *s += r.squared_error();
        }
    }
    let runs = logs.len();
    RmseCurve {
        dt,
        rmse: sums.into_iter().map(|s| (s / runs as f64).sqrt()).collect(),
        runs,
    }
}

/// Aggregate of a Monte Carlo batch.
#[derive(Clone, Debug, PartialEq)]
pub struct Study {
    pub curve: RmseCurve,
    /// Detection rate of each run, in run order.
    pub detection_rates: Vec<f64>,
    /// Degenerate update count of each run, in run order.
    pub degenerate_updates: Vec<usize>,
}

impl Study {
    pub fn mean_detection_rate(&self) -> f64 {
        mean(&self.detection_rates)
    }
}

struct RunSummary {
    squared_errors: Vec<f64>,
    detection_rate: f64,
    degenerate_updates: usize,
    dt: f64,
}

/// Runs `runs` trials with seeds `seed_base + i`, concurrently, and aggregates
/// them in run order so the result does not depend on the thread count.
pub fn run_study(
    scenario: &Scenario,
    runs: usize,
    seed_base: u64,
    use_landmarks: bool,
) -> Result<Study> {
    if runs == 0 {
        return Err(Error::InvalidParameter {
            name: "runs",
            reason: "must be at least 1".into(),
        });
    }
    scenario.validate()?;
    let summaries: Vec<RunSummary> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let log = run_trial(scenario, seed_base.wrapping_add(i as u64), use_landmarks)?;
            Ok(RunSummary {
                squared_errors: log.records.iter().map(|r| r.squared_error()).collect(),
                detection_rate: detection_rate(&log),
                degenerate_updates: log.degenerate_updates(),
                dt: log.dt,
            })
        })
        .collect::<Result<_>>()?;

    let steps = summaries[0].squared_errors.len();
    let mut sums = vec![0.0; steps];
    for s in &summaries {
        for (acc, e) in sums.iter_mut().zip(&s.squared_errors) {
            *acc += e;
        }
    }
    Ok(Study {
        curve: RmseCurve {
            dt: summaries[0].dt,
            rmse: sums.into_iter().map(|s| (s / runs as f64).sqrt()).collect(),
            runs,
        },
        detection_rates: summaries.iter().map(|s| s.detection_rate).collect(),
        degenerate_updates: summaries.iter().map(|s| s.degenerate_updates).collect(),
    })
}

pub fn run_monte_carlo(
    scenario: &Scenario,
    runs: usize,
    seed_base: u64,
    use_landmarks: bool,
) -> Result<RmseCurve> {
    run_study(scenario, runs, seed_base, use_landmarks).map(|s| s.curve)
}
