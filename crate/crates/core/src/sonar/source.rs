//! Interchangeable ways of turning a true vehicle state into landmark
//! measurements, registered by name.

use rand::RngCore;

use super::{
    extract_measurements, measure_landmark, perturb_ranges, range_noise, rasterize_ping_with,
    LandmarkMeasurement, SensorParams,
};
use crate::geometry::Point2;
use crate::map::LandmarkMap;
use crate::motion::VehicleState;
use crate::{Error, Result};

/// Produces one measurement per map landmark for a single ping.
///
/// Implementations draw range noise only for detected landmarks, in id order,
/// so that sources stay interchangeable under a shared random stream.
pub trait MeasurementSource: Send + Sync {
    fn name(&self) -> &'static str;

    fn measure(
        &self,
        state: &VehicleState,
        map: &LandmarkMap,
        sensor: &SensorParams,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<LandmarkMeasurement>>;
}

/// Landmarks within swath reach of the vehicle, ascending by id.
fn candidates(state: &VehicleState, map: &LandmarkMap, sensor: &SensorParams) -> Vec<usize> {
    if state.altitude.abs() > sensor.r_max {
        return Vec::new();
    }
    let reach = (sensor.r_max * sensor.r_max - state.altitude * state.altitude).sqrt()
        + map.max_circumradius()
        + 1e-6;
    map.ids_near(Point2::new(state.x, state.y), reach)
}

/// Direct geometric measurement model: swath/rectangle crossings plus noise.
#[derive(Debug, Default, Clone, Copy)]
pub struct ModelSource;

impl MeasurementSource for ModelSource {
    fn name(&self) -> &'static str {
        "model"
    }

    fn measure(
        &self,
        state: &VehicleState,
        map: &LandmarkMap,
        sensor: &SensorParams,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<LandmarkMeasurement>> {
        let mut out = vec![LandmarkMeasurement::NotDetected; map.len()];
        for id in candidates(state, map, sensor) {
            out[id] = measure_landmark(state, &map[id], sensor, rng);
        }
        Ok(out)
    }
}

/// Rasterizes a binary ping line, extracts ranges from its edges, then adds
/// range noise.
#[derive(Debug, Default, Clone, Copy)]
pub struct PixelSource;

impl MeasurementSource for PixelSource {
    fn name(&self) -> &'static str {
        "pixels"
    }

    fn measure(
        &self,
        state: &VehicleState,
        map: &LandmarkMap,
        sensor: &SensorParams,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<LandmarkMeasurement>> {
        let ids = candidates(state, map, sensor);
        let ping = rasterize_ping_with(state, ids.iter().map(|&id| (id, &map[id])), sensor);
        let mut out = extract_measurements(&ping, map.len(), sensor)?;
        for &id in &ids {
            if let LandmarkMeasurement::Detected(pair) = out[id] {
                let noise = range_noise(sensor, rng);
                out[id] = LandmarkMeasurement::Detected(perturb_ranges(
                    &pair,
                    noise,
                    state.altitude,
                    sensor,
                ));
            }
        }
        Ok(out)
    }
}

/// Named measurement sources. The default registry holds `model` and `pixels`.
pub struct MeasurementRegistry {
    sources: Vec<Box<dyn MeasurementSource>>,
}

impl MeasurementRegistry {
    pub fn empty() -> Self {
        Self {
            sources: Vec::new(),
        }
    }

    /// Adds a source, replacing any existing source with the same name.
    pub fn register(&mut self, source: Box<dyn MeasurementSource>) {
        self.sources.retain(|s| s.name() != source.name());
        self.sources.push(source);
    }

    pub fn get(&self, name: &str) -> Result<&dyn MeasurementSource> {
        self.sources
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::UnknownSource(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.sources.iter().map(|s| s.name()).collect()
    }
}

impl Default for MeasurementRegistry {
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register(Box::new(ModelSource));
        registry.register(Box::new(PixelSource));
        registry
    }
}
