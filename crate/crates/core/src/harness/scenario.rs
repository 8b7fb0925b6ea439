//! Scenario definition and the key-value config loader.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};

use crate::filter::{DEFAULT_PARTICLE_COUNT, MIN_PARTICLES};
use crate::geometry::{Landmark, Point2};
use crate::map::LandmarkMap;
use crate::motion::{ControlInput, DrivingNoiseParams, VehicleState};
use crate::sonar::{MeasurementRegistry, SensorParams};
use crate::{Error, Result};

pub const DEFAULT_DT: f64 = 0.1;
pub const DEFAULT_STEPS: usize = 12_000;
pub const DEFAULT_EXTENT: f64 = 1500.0;
pub const DEFAULT_LANDMARK_LENGTH: f64 = 3.0;
pub const DEFAULT_LANDMARK_WIDTH: f64 = 2.0;
pub const DEFAULT_LEG_LENGTH: f64 = 400.0;
pub const DEFAULT_SURVEY_SPEED: f64 = 1.5;
pub const DEFAULT_TURN_RATE: f64 = 0.3;
pub const DEFAULT_ALTITUDE: f64 = 5.0;
/// Per-step altitude variance of the simulated vehicle. Zero models a
/// surface vehicle over a flat bottom; the filter keeps its own `var_gamma`.
pub const DEFAULT_TRUTH_ALTITUDE_VAR: f64 = 0.0;

/// Piecewise-constant control inputs, each held for a duration in seconds.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSchedule {
    segments: Vec<(f64, ControlInput)>,
}

impl ControlSchedule {
    pub fn new(segments: Vec<(f64, ControlInput)>) -> Self {
        Self { segments }
    }

    /// Straight legs of `leg_length` at `speed`, joined by 180 degree turns at
    /// `turn_rate` alternating left and right, repeated to cover `duration`.
    pub fn lawnmower(leg_length: f64, speed: f64, turn_rate: f64, duration: f64) -> Self {
        let leg = leg_length / speed;
        let turn = if turn_rate > 0.0 { PI / turn_rate } else { 0.0 };
        let mut segments = Vec::new();
        let mut t = 0.0;
        let mut left = true;
        while t < duration {
            segments.push((leg, ControlInput::new(speed, 0.0)));
            t += leg;
            if turn > 0.0 {
                let rate = if left { turn_rate } else { -turn_rate };
                segments.push((turn, ControlInput::new(speed, rate)));
                t += turn;
                left = !left;
            }
        }
        Self { segments }
    }

    pub fn segments(&self) -> &[(f64, ControlInput)] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|(d, _)| d).sum()
    }

    /// Control for every step `1..=steps`, sampled at the middle of each step.
    pub fn per_step(&self, steps: usize, dt: f64) -> Vec<ControlInput> {
        let mut out = Vec::with_capacity(steps);
        let mut seg = 0;
        let mut seg_end = self.segments.first().map_or(0.0, |s| s.0);
        for k in 0..steps {
            let t = (k as f64 + 0.5) * dt;
            while t >= seg_end && seg + 1 < self.segments.len() {
                seg += 1;
                seg_end += self.segments[seg].0;
            }
            out.push(
                self.segments
                    .get(seg)
                    .map_or(ControlInput::default(), |s| s.1),
            );
        }
        out
    }
}

/// Inputs of the evenly spaced landmark grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub spacing: f64,
    pub extent: f64,
    pub orientation: f64,
    pub length: f64,
    pub width: f64,
}

impl GridSpec {
    pub fn with_spacing(spacing: f64) -> Self {
        Self {
            spacing,
            extent: DEFAULT_EXTENT,
            orientation: 0.0,
            length: DEFAULT_LANDMARK_LENGTH,
            width: DEFAULT_LANDMARK_WIDTH,
        }
    }

    pub fn build(&self) -> Result<LandmarkMap> {
        LandmarkMap::grid(
            self.spacing,
            self.extent,
            self.orientation,
            self.length,
            self.width,
        )
    }
}

/// Everything one simulation run needs.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub map: LandmarkMap,
    /// Grid the map was generated from, if any.
    pub grid: Option<GridSpec>,
    pub schedule: ControlSchedule,
    /// Driving noise assumed by the filter.
    pub noise: DrivingNoiseParams,
    /// Altitude variance of the simulated truth, replacing `noise.var_altitude`
    /// when the true trajectory is drawn.
    pub truth_altitude_var: f64,
    pub sensor: SensorParams,
    pub dt: f64,
    pub steps: usize,
    pub initial_state: VehicleState,
    pub initial_cov: Matrix4<f64>,
    pub particle_count: usize,
    /// Measure every `ping_stride`-th step.
    pub ping_stride: usize,
    /// Name of the registered measurement source.
    pub measurement: String,
}

impl Scenario {
    /// Default survey over a landmark grid with the given spacing.
    pub fn with_grid(grid: GridSpec) -> Result<Self> {
        let sensor = SensorParams::default();
        let duration = DEFAULT_STEPS as f64 * DEFAULT_DT;
        let scenario = Self {
            map: grid.build()?,
            grid: Some(grid),
            schedule: ControlSchedule::lawnmower(
                DEFAULT_LEG_LENGTH,
                DEFAULT_SURVEY_SPEED,
                DEFAULT_TURN_RATE,
                duration,
            ),
            noise: DrivingNoiseParams::default(),
            truth_altitude_var: DEFAULT_TRUTH_ALTITUDE_VAR,
            sensor,
            dt: DEFAULT_DT,
            steps: DEFAULT_STEPS,
            initial_state: VehicleState::new(0.0, 0.0, 0.0, DEFAULT_ALTITUDE),
            initial_cov: default_initial_cov(&sensor),
            particle_count: DEFAULT_PARTICLE_COUNT,
            ping_stride: 1,
            measurement: "model".into(),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn with_spacing(spacing: f64) -> Result<Self> {
        Self::with_grid(GridSpec::with_spacing(spacing))
    }

    /// Driving noise of the simulated truth.
    pub fn truth_noise(&self) -> DrivingNoiseParams {
        DrivingNoiseParams {
            var_altitude: self.truth_altitude_var,
            ..self.noise
        }
    }

    /// Checks the invariants that the config loader also enforces.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if self.steps == 0 {
            return Err(Error::config("steps", "must be at least 1"));
        }
        if let Some(grid) = &self.grid {
            if !(grid.spacing > 0.0 && grid.spacing.is_finite()) {
                return Err(Error::config(
                    "spacing",
                    format!("must be positive, got {}", grid.spacing),
                ));
            }
            if !(grid.extent >= 0.0 && grid.extent.is_finite()) {
                return Err(Error::config("extent", "must be non-negative"));
            }
        }
        if self.particle_count < MIN_PARTICLES {
            return Err(Error::config(
                "particles",
                format!("must be at least {MIN_PARTICLES}"),
            ));
        }
        if self.ping_stride == 0 {
            return Err(Error::config("ping_stride", "must be at least 1"));
        }
        let needed = self.steps as f64 * self.dt;
        if self.schedule.total_duration() < needed * (1.0 - 1e-12) {
            return Err(Error::config(
                "schedule",
                format!(
                    "covers {} s but the run lasts {needed} s",
                    self.schedule.total_duration()
                ),
            ));
        }
        self.noise.validate().map_err(as_config)?;
        if !(self.truth_altitude_var >= 0.0 && self.truth_altitude_var.is_finite()) {
            return Err(Error::config("truth_var_gamma", "must be non-negative"));
        }
        self.sensor.validate().map_err(as_config)?;
        if self.initial_state.altitude < 0.0 {
            return Err(Error::config("initial_altitude", "must be non-negative"));
        }
        if crate::filter::factorize(&self.initial_cov).is_err() {
            return Err(Error::config(
                "initial_cov",
                "must be positive semidefinite",
            ));
        }
        MeasurementRegistry::default()
            .get(&self.measurement)
            .map_err(|_| {
                Error::config(
                    "measurement",
                    format!("unknown source `{}`", self.measurement),
                )
            })?;
        Ok(())
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => Error::config(name, reason),
        other => other,
    }
}

/// Initial covariance: range variance on x and y, compass variance on the
/// heading, altimeter variance on the altitude.
pub fn default_initial_cov(sensor: &SensorParams) -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(
        sensor.var_range,
        sensor.var_range,
        sensor.var_compass,
        sensor.var_altitude,
    ))
}

/// Keys accepted by [`load_scenario`].
pub const CONFIG_KEYS: &[&str] = &[
    "spacing",
    "extent",
    "landmark_length",
    "landmark_width",
    "landmark_orientation",
    "landmarks",
    "leg_length",
    "survey_speed",
    "turn_rate",
    "schedule",
    "var_s",
    "var_t",
    "var_theta",
    "var_gamma",
    "truth_var_gamma",
    "r_max",
    "var_r",
    "var_a",
    "var_c",
    "pixels_per_side",
    "dt",
    "steps",
    "initial_x",
    "initial_y",
    "initial_heading",
    "initial_altitude",
    "initial_cov",
    "particles",
    "ping_stride",
    "measurement",
];

struct Keys {
    table: toml::Table,
}

impl Keys {
    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(v) => as_float(v)
                .map(Some)
                .ok_or_else(|| Error::config(key, format!("expected a number, got {v}"))),
        }
    }

    fn float_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.float(key)?.unwrap_or(default))
    }

    fn count_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.table.get(key) {
            None => Ok(default),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(v) => Err(Error::config(
                key,
                format!("expected a non-negative integer, got {v}"),
            )),
        }
    }

    /// Array of fixed-width numeric rows.
    fn rows(&self, key: &str, width: usize) -> Result<Option<Vec<Vec<f64>>>> {
        let Some(v) = self.table.get(key) else {
            return Ok(None);
        };
        let err = || Error::config(key, format!("expected an array of {width}-number arrays"));
        let rows = v.as_array().ok_or_else(err)?;
        rows.iter()
            .map(|row| {
                let row = row.as_array().ok_or_else(err)?;
                if row.len() != width {
                    return Err(err());
                }
                row.iter().map(|x| as_float(x).ok_or_else(err)).collect()
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn vector(&self, key: &str, len: usize) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.table.get(key) else {
            return Ok(None);
        };
        let err = || Error::config(key, format!("expected an array of {len} numbers"));
        let items = v.as_array().ok_or_else(err)?;
        if items.len() != len {
            return Err(err());
        }
        items
            .iter()
            .map(|x| as_float(x).ok_or_else(err))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

fn as_float(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(f) => Some(*f),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

/// Parses a flat TOML key-value config into a scenario.
///
/// Unknown keys are rejected. `spacing` is required unless an explicit
/// `landmarks` list is given; every other key has a default.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<syntax>", e.message().to_string()))?;
    if let Some(key) = table.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(Error::config(key.clone(), "unknown key"));
    }
    let keys = Keys { table };

    let (map, grid) = match keys.rows("landmarks", 5)? {
        Some(rows) => {
            let landmarks = rows
                .iter()
                .map(|r| Landmark::new(Point2::new(r[0], r[1]), r[2], r[3], r[4]))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::config("landmarks", e.to_string()))?;
            (LandmarkMap::new(landmarks), None)
        }
        None => {
            let spacing = keys
                .float("spacing")?
                .ok_or_else(|| Error::config("spacing", "required key is missing"))?;
            let grid = GridSpec {
                spacing,
                extent: keys.float_or("extent", DEFAULT_EXTENT)?,
                orientation: keys.float_or("landmark_orientation", 0.0)?,
                length: keys.float_or("landmark_length", DEFAULT_LANDMARK_LENGTH)?,
                width: keys.float_or("landmark_width", DEFAULT_LANDMARK_WIDTH)?,
            };
            if !(spacing > 0.0 && spacing.is_finite()) {
                return Err(Error::config(
                    "spacing",
                    format!("must be positive, got {spacing}"),
                ));
            }
            if !(grid.extent >= 0.0 && grid.extent.is_finite()) {
                return Err(Error::config("extent", "must be non-negative"));
            }
            let map = grid.build().map_err(|e| match e {
                Error::InvalidParameter {
                    name: "landmark width",
                    reason,
                } => Error::config("landmark_width", reason),
                Error::InvalidParameter {
                    name: "landmark length",
                    reason,
                } => Error::config("landmark_length", reason),
                other => Error::config("landmark_orientation", other.to_string()),
            })?;
            (map, Some(grid))
        }
    };

    let defaults = DrivingNoiseParams::default();
    let noise = DrivingNoiseParams::new(
        keys.float_or("var_s", defaults.var_speed)?,
        keys.float_or("var_t", defaults.var_turn_rate)?,
        keys.float_or("var_theta", defaults.var_heading)?,
        keys.float_or("var_gamma", defaults.var_altitude)?,
    );
    let ds = SensorParams::default();
    let sensor = SensorParams {
        r_max: keys.float_or("r_max", ds.r_max)?,
        var_range: keys.float_or("var_r", ds.var_range)?,
        var_altitude: keys.float_or("var_a", ds.var_altitude)?,
        var_compass: keys.float_or("var_c", ds.var_compass)?,
        pixels_per_side: keys.count_or("pixels_per_side", ds.pixels_per_side)?,
    };
    let dt = keys.float_or("dt", DEFAULT_DT)?;
    let steps = keys.count_or("steps", DEFAULT_STEPS)?;

    let schedule = match keys.rows("schedule", 3)? {
        Some(rows) => ControlSchedule::new(
            rows.iter()
                .map(|r| (r[0], ControlInput::new(r[1], r[2])))
                .collect(),
        ),
        None => {
            let speed = keys.float_or("survey_speed", DEFAULT_SURVEY_SPEED)?;
            let leg = keys.float_or("leg_length", DEFAULT_LEG_LENGTH)?;
            let turn = keys.float_or("turn_rate", DEFAULT_TURN_RATE)?;
            if !(speed > 0.0 && speed.is_finite()) {
                return Err(Error::config("survey_speed", "must be positive"));
            }
            if !(leg > 0.0 && leg.is_finite()) {
                return Err(Error::config("leg_length", "must be positive"));
            }
            if !(turn >= 0.0 && turn.is_finite()) {
                return Err(Error::config("turn_rate", "must be non-negative"));
            }
            let duration = if dt > 0.0 { steps as f64 * dt } else { 0.0 };
            ControlSchedule::lawnmower(leg, speed, turn, duration)
        }
    };

    let initial_state = VehicleState::new(
        keys.float_or("initial_x", 0.0)?,
        keys.float_or("initial_y", 0.0)?,
        crate::motion::wrap_angle(keys.float_or("initial_heading", 0.0)?),
        keys.float_or("initial_altitude", DEFAULT_ALTITUDE)?,
    );
    let initial_cov = match keys.vector("initial_cov", 4)? {
        Some(d) => Matrix4::from_diagonal(&Vector4::new(d[0], d[1], d[2], d[3])),
        None => default_initial_cov(&sensor),
    };
    let measurement = match keys.table.get("measurement") {
        None => "model".to_string(),
        Some(toml::Value::String(s)) => s.clone(),
        Some(v) => {
            return Err(Error::config(
                "measurement",
                format!("expected a string, got {v}"),
            ))
        }
    };

    let scenario = Scenario {
        map,
        grid,
        schedule,
        noise,
        truth_altitude_var: keys.float_or("truth_var_gamma", DEFAULT_TRUTH_ALTITUDE_VAR)?,
        sensor,
        dt,
        steps,
        initial_state,
        initial_cov,
        particle_count: keys.count_or("particles", DEFAULT_PARTICLE_COUNT)?,
        ping_stride: keys.count_or("ping_stride", 1)?,
        measurement,
    };
    scenario.validate()?;
    Ok(scenario)
}
