//! Measurement likelihoods, evaluated in the log domain.

use std::f64::consts::PI;

use super::{predicted_ranges, JointMeasurement, LandmarkMeasurement, SensorParams};
use crate::geometry::Landmark;
use crate::motion::{wrap_angle, VehicleState};

/// Log-density of a zero-mean Gaussian with variance `var` at `residual`.
///
/// A zero variance is treated as a point mass: 0 at the origin, -inf elsewhere.
pub fn gaussian_log_density(residual: f64, var: f64) -> f64 {
    if var > 0.0 {
        -0.5 * (2.0 * PI * var).ln() - 0.5 * residual * residual / var
    } else if residual == 0.0 {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

/// Log-likelihood of one landmark measurement given a hypothesized state.
///
/// If the hypothesis sees the landmark, the measurement (the sentinel counts
/// as `[r_max, r_max]`) is scored by an isotropic 2-D Gaussian around the
/// predicted ranges. Otherwise the likelihood is a unit pulse at the sentinel:
/// 0 for a missed detection, -inf for a reported one.
pub fn landmark_log_likelihood(
    z: &LandmarkMeasurement,
    hyp: &VehicleState,
    landmark: &Landmark,
    sensor: &SensorParams,
) -> f64 {
    match predicted_ranges(hyp, landmark, sensor) {
        Some(pred) => {
            let [z1, z2] = z.as_array(sensor.r_max);
            gaussian_log_density(z1 - pred.near, sensor.var_range)
                + gaussian_log_density(z2 - pred.far, sensor.var_range)
        }
        None => match z {
            LandmarkMeasurement::NotDetected => 0.0,
            LandmarkMeasurement::Detected(_) => f64::NEG_INFINITY,
        },
    }
}

pub fn compass_log_likelihood(compass: f64, hyp: &VehicleState, sensor: &SensorParams) -> f64 {
    gaussian_log_density(wrap_angle(compass - hyp.heading), sensor.var_compass)
}

pub fn altitude_log_likelihood(altitude: f64, hyp: &VehicleState, sensor: &SensorParams) -> f64 {
    gaussian_log_density(altitude - hyp.altitude, sensor.var_altitude)
}

/// Sum of compass, altitude and per-landmark log-likelihoods, in that order.
///
/// `map` must have one landmark per entry of `z.landmarks`.
pub fn joint_log_likelihood(
    z: &JointMeasurement,
    hyp: &VehicleState,
    map: &[Landmark],
    sensor: &SensorParams,
) -> f64 {
    assert_eq!(
        z.landmarks.len(),
        map.len(),
        "measurement and map sizes differ"
    );
    let mut total = compass_log_likelihood(z.compass, hyp, sensor)
        + altitude_log_likelihood(z.altitude, hyp, sensor);
    for (zd, landmark) in z.landmarks.iter().zip(map) {
        total += landmark_log_likelihood(zd, hyp, landmark, sensor);
    }
    total
}
