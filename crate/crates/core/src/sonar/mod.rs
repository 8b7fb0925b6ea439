//! Sensor layer: landmark slant-range detections, altitude and compass
//! readings, synthetic ping lines, and the measurement likelihoods.

mod likelihood;
mod ping;
mod source;

pub use likelihood::{
    altitude_log_likelihood, compass_log_likelihood, gaussian_log_density, joint_log_likelihood,
    landmark_log_likelihood,
};
pub use ping::{
    extract_measurements, rasterize_ping, rasterize_ping_with, write_pgm, Channel, PingLine,
};
pub use source::{MeasurementRegistry, MeasurementSource, ModelSource, PixelSource};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{slant_ranges, swath_landmark_intersection, Landmark, SlantRangePair};
use crate::motion::{wrap_angle, VehicleState};
use crate::{Error, Result};

/// Sonar, altimeter and compass parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorParams {
    /// Maximum slant range on each side, m.
    pub r_max: f64,
    /// Slant-range noise variance, m².
    pub var_range: f64,
    /// Altitude measurement noise variance, m².
    pub var_altitude: f64,
    /// Compass noise variance, rad².
    pub var_compass: f64,
    pub pixels_per_side: usize,
}

impl Default for SensorParams {
    fn default() -> Self {
        Self {
            r_max: 20.0,
            var_range: 2.5,
            var_altitude: 0.5,
            var_compass: 0.2,
            pixels_per_side: 400,
        }
    }
}

impl SensorParams {
    /// Slant-range extent of one pixel, m.
    pub fn resolution(&self) -> f64 {
        self.r_max / self.pixels_per_side as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad =
            |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return bad("r_max", format!("must be positive, got {}", self.r_max));
        }
        for (name, v) in [
            ("var_r", self.var_range),
            ("var_a", self.var_altitude),
            ("var_c", self.var_compass),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(
                    name,
                    format!("variance must be finite and non-negative, got {v}"),
                );
            }
        }
        if self.pixels_per_side == 0 {
            return bad("pixels_per_side", "must be at least 1".into());
        }
        Ok(())
    }
}

/// Slant ranges to one landmark, or the reserved "not detected" value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LandmarkMeasurement {
    Detected(SlantRangePair),
    /// Stands for `[r_max, r_max]`.
    NotDetected,
}

impl LandmarkMeasurement {
    pub fn is_detected(&self) -> bool {
        matches!(self, LandmarkMeasurement::Detected(_))
    }

    /// Measurement as a vector, with the sentinel mapped to `[r_max, r_max]`.
    pub fn as_array(&self, r_max: f64) -> [f64; 2] {
        match self {
            LandmarkMeasurement::Detected(pair) => pair.as_array(),
            LandmarkMeasurement::NotDetected => [r_max, r_max],
        }
    }
}

/// All measurements taken at one ping: one entry per map landmark, then
/// altitude and compass.
#[derive(Clone, Debug, PartialEq)]
pub struct JointMeasurement {
    pub landmarks: Vec<LandmarkMeasurement>,
    pub altitude: f64,
    pub compass: f64,
}

impl JointMeasurement {
    pub fn detection_count(&self) -> usize {
        self.landmarks.iter().filter(|m| m.is_detected()).count()
    }
}

/// Adds range noise to a noiseless pair, clamps each range into
/// `[altitude, r_max - resolution]` and re-sorts.
pub fn perturb_ranges(
    pair: &SlantRangePair,
    noise: [f64; 2],
    altitude: f64,
    sensor: &SensorParams,
) -> SlantRangePair {
    let hi = sensor.r_max - sensor.resolution();
    let lo = altitude.min(hi);
    let near = (pair.near + noise[0]).clamp(lo, hi);
    let far = (pair.far + noise[1]).clamp(lo, hi);
    SlantRangePair::sorted(near, far)
}

fn range_noise<R: Rng + ?Sized>(sensor: &SensorParams, rng: &mut R) -> [f64; 2] {
    let sd = sensor.var_range.sqrt();
    let a: f64 = StandardNormal.sample(rng);
    let b: f64 = StandardNormal.sample(rng);
    [sd * a, sd * b]
}

/// Noiseless slant ranges the sonar would report for `landmark`, if any.
pub fn predicted_ranges(
    state: &VehicleState,
    landmark: &Landmark,
    sensor: &SensorParams,
) -> Option<SlantRangePair> {
    swath_landmark_intersection(landmark, state, sensor.r_max)
        .map(|(p1, p2)| slant_ranges(&p1, &p2, state))
}

/// Model-level landmark measurement: noisy slant ranges on detection.
///
/// Noise is only drawn when the landmark is detected.
pub fn measure_landmark<R: Rng + ?Sized>(
    state: &VehicleState,
    landmark: &Landmark,
    sensor: &SensorParams,
    rng: &mut R,
) -> LandmarkMeasurement {
    match predicted_ranges(state, landmark, sensor) {
        Some(pair) => {
            let noise = range_noise(sensor, rng);
            LandmarkMeasurement::Detected(perturb_ranges(&pair, noise, state.altitude, sensor))
        }
        None => LandmarkMeasurement::NotDetected,
    }
}

/// Noisy altitude and wrapped compass heading.
pub fn measure_altitude_compass<R: Rng + ?Sized>(
    state: &VehicleState,
    sensor: &SensorParams,
    rng: &mut R,
) -> (f64, f64) {
    let a: f64 = StandardNormal.sample(rng);
    let c: f64 = StandardNormal.sample(rng);
    altitude_compass_reading(
        state,
        sensor.var_altitude.sqrt() * a,
        sensor.var_compass.sqrt() * c,
    )
}

/// Altitude and compass readings for given noise values.
pub fn altitude_compass_reading(
    state: &VehicleState,
    altitude_noise: f64,
    compass_noise: f64,
) -> (f64, f64) {
    (
        state.altitude + altitude_noise,
        wrap_angle(state.heading + compass_noise),
    )
}
