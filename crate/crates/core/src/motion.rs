//! Vehicle state transition.
//!
//! The vehicle follows a coordinated-turn model: speed and turn rate commands
//! are perturbed by Gaussian noise, the heading receives an additional noise
//! rate, and the altitude above the seafloor performs a random walk.

use std::f64::consts::PI;

use nalgebra::Vector4;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Below this absolute turn rate (rad/s) the straight-line limit is used.
pub const STRAIGHT_LINE_TURN_RATE: f64 = 1e-6;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Planar pose plus altitude above the seafloor.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Heading in radians, measured counter-clockwise from the x axis.
    pub heading: f64,
    pub altitude: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, heading: f64, altitude: f64) -> Self {
        Self {
            x,
            y,
            heading,
            altitude,
        }
    }

    /// State as `[x, y, heading, altitude]`.
    pub fn to_vector(&self) -> Vector4<f64> {
        Vector4::new(self.x, self.y, self.heading, self.altitude)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ControlInput {
    /// Commanded speed in m/s.
    pub speed: f64,
    /// Commanded turn rate in rad/s.
    pub turn_rate: f64,
}

impl ControlInput {
    pub fn new(speed: f64, turn_rate: f64) -> Self {
        Self { speed, turn_rate }
    }
}

/// One realization of the driving noise vector.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DrivingNoise {
    /// Speed noise, m/s.
    pub speed: f64,
    /// Turn-rate noise, rad/s.
    pub turn_rate: f64,
    /// Heading noise, applied as a rate (multiplied by the step duration).
    pub heading: f64,
    /// Altitude increment, m.
    pub altitude: f64,
}

impl DrivingNoise {
    pub fn new(speed: f64, turn_rate: f64, heading: f64, altitude: f64) -> Self {
        Self {
            speed,
            turn_rate,
            heading,
            altitude,
        }
    }
}

/// Variances of the four driving noise components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DrivingNoiseParams {
    pub var_speed: f64,
    pub var_turn_rate: f64,
    pub var_heading: f64,
    pub var_altitude: f64,
}

impl DrivingNoiseParams {
    pub fn new(var_speed: f64, var_turn_rate: f64, var_heading: f64, var_altitude: f64) -> Self {
        Self {
            var_speed,
            var_turn_rate,
            var_heading,
            var_altitude,
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [
            self.var_speed,
            self.var_turn_rate,
            self.var_heading,
            self.var_altitude,
        ]
    }

    pub fn validate(&self) -> crate::Result<()> {
        let names = ["var_s", "var_t", "var_theta", "var_gamma"];
        for (name, v) in names.into_iter().zip(self.as_array()) {
            if !(v.is_finite() && v >= 0.0) {
                return Err(crate::Error::InvalidParameter {
                    name,
                    reason: format!("variance must be finite and non-negative, got {v}"),
                });
            }
        }
        Ok(())
    }
}

impl Default for DrivingNoiseParams {
    /// Speed 1.5 m²/s², turn rate 0.5 rad²/s², heading 0.2 rad², altitude 0.1 m².
    fn default() -> Self {
        Self::new(1.5, 0.5, 0.2, 0.1)
    }
}

/// Advances `state` by `dt` seconds.
///
/// Position follows the arc of radius `v_s / v_t` using the heading at the
/// start of the step; the heading then advances by `(v_t + n_theta) * dt` and
/// is wrapped. The altitude random walk is clamped at zero.
pub fn step(
    state: &VehicleState,
    control: &ControlInput,
    noise: &DrivingNoise,
    dt: f64,
) -> VehicleState {
    let v_s = control.speed + noise.speed;
    let v_t = control.turn_rate + noise.turn_rate;

    let (dx, dy) = if v_t.abs() < STRAIGHT_LINE_TURN_RATE {
        let d = v_s * dt;
        (d * state.heading.cos(), d * state.heading.sin())
    } else {
        // sin(a + b) - sin(a) = 2 cos(a + b/2) sin(b/2), and likewise for cos;
        // this form stays accurate as v_t approaches the threshold.
        let half = 0.5 * v_t * dt;
        let chord = 2.0 * (v_s / v_t) * half.sin();
        let mid = state.heading + half;
        (chord * mid.cos(), chord * mid.sin())
    };

    VehicleState {
        x: state.x + dx,
        y: state.y + dy,
        heading: wrap_angle(state.heading + v_t * dt + noise.heading * dt),
        altitude: (state.altitude + noise.altitude).max(0.0),
    }
}

/// Draws four independent zero-mean Gaussian noise components.
pub fn sample_driving_noise<R: Rng + ?Sized>(
    params: &DrivingNoiseParams,
    rng: &mut R,
) -> DrivingNoise {
    let mut draw = |var: f64| {
        let z: f64 = StandardNormal.sample(rng);
        var.sqrt() * z
    };
    DrivingNoise {
        speed: draw(params.var_speed),
        turn_rate: draw(params.var_turn_rate),
        heading: draw(params.var_heading),
        altitude: draw(params.var_altitude),
    }
}
