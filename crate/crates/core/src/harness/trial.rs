//! A single simulated run: ground truth, measurements and the filter.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Scenario;
use crate::filter::{GaussianBelief, NavigationFilter};
use crate::map::LandmarkMap;
use crate::motion::{sample_driving_noise, step, VehicleState};
use crate::sonar::{
    measure_altitude_compass, JointMeasurement, MeasurementRegistry, MeasurementSource,
};
use crate::Result;

// Independent random streams per run, so the truth trajectory does not depend
// on whether landmarks are measured.
const TRUTH_STREAM: u64 = 0;
const LANDMARK_STREAM: u64 = 1;
const NAV_SENSOR_STREAM: u64 = 2;
const FILTER_STREAM: u64 = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub truth: VehicleState,
    pub estimate: VehicleState,
    /// Diagonal of the posterior covariance: x, y, heading, altitude.
    pub variance: [f64; 4],
    pub detections: usize,
    pub degenerate: bool,
}

impl StepRecord {
    /// Squared error of `(x, y, altitude)`.
    pub fn squared_error(&self) -> f64 {
        let dx = self.estimate.x - self.truth.x;
        let dy = self.estimate.y - self.truth.y;
        let da = self.estimate.altitude - self.truth.altitude;
        dx * dx + dy * dy + da * da
    }
}

/// Per-step records of one run, steps `1..=steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialLog {
    pub dt: f64,
    pub records: Vec<StepRecord>,
}

impl TrialLog {
    pub fn degenerate_updates(&self) -> usize {
        self.records.iter().filter(|r| r.degenerate).count()
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Runs one trial with the scenario's configured measurement source.
///
/// With `use_landmarks = false` the map is empty for both the measurement
/// generator and the filter, which reduces the filter to dead reckoning with
/// compass and altimeter.
pub fn run_trial(scenario: &Scenario, seed: u64, use_landmarks: bool) -> Result<TrialLog> {
    let registry = MeasurementRegistry::default();
    let source = registry.get(&scenario.measurement)?;
    run_trial_with(scenario, seed, use_landmarks, source)
}

pub fn run_trial_with(
    scenario: &Scenario,
    seed: u64,
    use_landmarks: bool,
    source: &dyn MeasurementSource,
) -> Result<TrialLog> {
    let empty = LandmarkMap::default();
    let map = if use_landmarks { &scenario.map } else { &empty };
    let controls = scenario.schedule.per_step(scenario.steps, scenario.dt);

    let mut truth_rng = stream(seed, TRUTH_STREAM);
    let mut landmark_rng = stream(seed, LANDMARK_STREAM);
    let mut nav_rng = stream(seed, NAV_SENSOR_STREAM);
    let mut filter_rng = stream(seed, FILTER_STREAM);

    let truth_noise = scenario.truth_noise();
    let mut truth = scenario.initial_state;
    let mut filter = NavigationFilter::new(
        GaussianBelief::from_state(&truth, scenario.initial_cov),
        scenario.noise,
        scenario.sensor,
        scenario.dt,
        scenario.particle_count,
    );

    let mut records = Vec::with_capacity(scenario.steps);
    for (k, control) in (1..=scenario.steps).zip(controls) {
        let noise = sample_driving_noise(&truth_noise, &mut truth_rng);
        truth = step(&truth, &control, &noise, scenario.dt);
        filter.predict(&control)?;

        let (mut detections, mut degenerate) = (0, false);
        if k % scenario.ping_stride == 0 {
            let landmarks = source.measure(&truth, map, &scenario.sensor, &mut landmark_rng)?;
            let (altitude, compass) =
                measure_altitude_compass(&truth, &scenario.sensor, &mut nav_rng);
            let z = JointMeasurement {
                landmarks,
                altitude,
                compass,
            };
            detections = z.detection_count();
            degenerate = filter.update(&z, map, &mut filter_rng)?;
        }

        let cov = filter.belief().cov;
        records.push(StepRecord {
            step: k,
            truth,
            estimate: filter.estimate(),
            variance: [cov[(0, 0)], cov[(1, 1)], cov[(2, 2)], cov[(3, 3)]],
            detections,
            degenerate,
        });
    }
    Ok(TrialLog {
        dt: scenario.dt,
        records,
    })
}

/// True states for steps `1..=steps`, drawn from the same stream a trial with
/// this seed uses.
pub fn simulate_truth(scenario: &Scenario, seed: u64, steps: usize) -> Vec<VehicleState> {
    let mut rng = stream(seed, TRUTH_STREAM);
    let truth_noise = scenario.truth_noise();
    let mut truth = scenario.initial_state;
    scenario
        .schedule
        .per_step(steps, scenario.dt)
        .into_iter()
        .map(|control| {
            let noise = sample_driving_noise(&truth_noise, &mut rng);
            truth = step(&truth, &control, &noise, scenario.dt);
            truth
        })
        .collect()
}

/// Fraction of steps with at least one landmark detection.
pub fn detection_rate(log: &TrialLog) -> f64 {
    if log.records.is_empty() {
        return 0.0;
    }
    let hits = log.records.iter().filter(|r| r.detections > 0).count();
    hits as f64 / log.records.len() as f64
}
