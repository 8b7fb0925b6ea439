//! Synthetic ping lines and edge-based range extraction.
//!
//! A ping line holds one binary pixel row per side. Pixel `p` covers the
//! slant-range bin `[p * res, (p + 1) * res)`. Landmark pixels carry the id of
//! the landmark that produced them.

use std::io::Write;

use super::{LandmarkMeasurement, SensorParams};
use crate::geometry::{swath_endpoints, Landmark, Point2, Segment2, SlantRangePair};
use crate::motion::VehicleState;
use crate::{Error, Result};

/// Slack when converting range boundaries to pixel indices.
const INDEX_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub set: Vec<bool>,
    pub labels: Vec<Option<usize>>,
}

impl Channel {
    fn empty(pixels: usize) -> Self {
        Self {
            set: vec![false; pixels],
            labels: vec![None; pixels],
        }
    }

    fn mark(&mut self, first: usize, last: usize, id: usize) {
        for p in first..=last {
            self.set[p] = true;
            match self.labels[p] {
                Some(existing) if existing <= id => {}
                _ => self.labels[p] = Some(id),
            }
        }
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// Maximal runs of set pixels sharing a label, as `(first, last, label)`.
    fn runs(&self) -> Result<Vec<(usize, usize, usize)>> {
        let mut runs = Vec::new();
        let mut p = 0;
        while p < self.set.len() {
            if !self.set[p] {
                p += 1;
                continue;
            }
            let label = self.labels[p]
                .ok_or_else(|| Error::MalformedPing(format!("set pixel {p} has no label")))?;
            let first = p;
            while p + 1 < self.set.len() && self.set[p + 1] && self.labels[p + 1] == Some(label) {
                p += 1;
            }
            runs.push((first, p, label));
            p += 1;
        }
        Ok(runs)
    }
}

/// One received ping: binary pixels on the port and starboard channels.
#[derive(Clone, Debug, PartialEq)]
pub struct PingLine {
    pub port: Channel,
    pub starboard: Channel,
    /// Slant-range extent of a pixel, m.
    pub resolution: f64,
}

impl PingLine {
    pub fn empty(sensor: &SensorParams) -> Self {
        Self {
            port: Channel::empty(sensor.pixels_per_side),
            starboard: Channel::empty(sensor.pixels_per_side),
            resolution: sensor.resolution(),
        }
    }

    /// Pixel row ordered from the far port edge to the far starboard edge.
    pub fn row(&self) -> impl Iterator<Item = bool> + '_ {
        self.port
            .set
            .iter()
            .rev()
            .chain(self.starboard.set.iter())
            .copied()
    }
}

/// Rasterizes the landmarks of `landmarks` (indexed by position) into a ping.
pub fn rasterize_ping(
    state: &VehicleState,
    landmarks: &[Landmark],
    sensor: &SensorParams,
) -> PingLine {
    rasterize_ping_with(state, landmarks.iter().enumerate(), sensor)
}

/// Rasterizes `(id, landmark)` pairs into a ping line.
///
/// Each landmark occupies a horizontal interval of each half-swath; the
/// corresponding slant-range interval sets every pixel whose bin it overlaps.
/// On overlap the lower landmark id keeps the pixel label.
pub fn rasterize_ping_with<'a, I>(
    state: &VehicleState,
    landmarks: I,
    sensor: &SensorParams,
) -> PingLine
where
    I: IntoIterator<Item = (usize, &'a Landmark)>,
{
    let mut ping = PingLine::empty(sensor);
    let Ok(swath) = swath_endpoints(state, sensor.r_max) else {
        return ping;
    };
    let nadir = Point2::new(state.x, state.y);
    let half_width = swath.begin.distance(&nadir);
    if half_width <= 0.0 {
        return ping;
    }
    let halves = [
        Segment2::new(nadir, swath.begin),
        Segment2::new(nadir, swath.end),
    ];
    let res = ping.resolution;
    let last_pixel = sensor.pixels_per_side - 1;

    for (id, landmark) in landmarks {
        if landmark.center.distance(&nadir) > half_width + landmark.circumradius() {
            continue;
        }
        for (half, channel) in halves.iter().zip([&mut ping.port, &mut ping.starboard]) {
            let Some((t0, t1)) = landmark.clip(half) else {
                continue;
            };
            let near = (t0 * half_width).hypot(state.altitude);
            let far = (t1 * half_width).hypot(state.altitude);
            let first = ((near / res + INDEX_EPS).floor() as usize).min(last_pixel);
            let last = ((far / res - INDEX_EPS).ceil() as usize)
                .saturating_sub(1)
                .clamp(first, last_pixel);
            channel.mark(first, last, id);
        }
    }
    ping
}

/// Extracts one measurement per landmark id in `0..map_size`.
///
/// A run spans `[first * res, (last + 1) * res]`. A landmark seen on a single
/// channel reports the run's near and far edges. A landmark seen on both
/// channels straddles the nadir; its two swath crossings are the far edges of
/// the two runs.
pub fn extract_measurements(
    ping: &PingLine,
    map_size: usize,
    sensor: &SensorParams,
) -> Result<Vec<LandmarkMeasurement>> {
    let res = ping.resolution;
    debug_assert!((res - sensor.resolution()).abs() < 1e-12);
    // Per landmark and channel: (near edge, far edge).
    let mut spans: Vec<[Option<(f64, f64)>; 2]> = vec![[None, None]; map_size];
    for (side, channel) in [&ping.port, &ping.starboard].into_iter().enumerate() {
        for (first, last, label) in channel.runs()? {
            let slot = spans.get_mut(label).ok_or_else(|| {
                Error::MalformedPing(format!("label {label} outside map of size {map_size}"))
            })?;
            let near = first as f64 * res;
            let far = (last + 1) as f64 * res;
            slot[side] = Some(match slot[side] {
                Some((n, f)) => (n.min(near), f.max(far)),
                None => (near, far),
            });
        }
    }
    Ok(spans
        .into_iter()
        .map(|span| match span {
            [Some((near, far)), None] | [None, Some((near, far))] => {
                LandmarkMeasurement::Detected(SlantRangePair::sorted(near, far))
            }
            [Some((_, port_far)), Some((_, starboard_far))] => {
                LandmarkMeasurement::Detected(SlantRangePair::sorted(port_far, starboard_far))
            }
            [None, None] => LandmarkMeasurement::NotDetected,
        })
        .collect())
}

/// Writes ping lines as a plain grey-map image, one row per ping, port on the left.
pub fn write_pgm<W: Write>(pings: &[PingLine], out: &mut W) -> std::io::Result<()> {
    let width = pings
        .first()
        .map_or(0, |p| p.port.len() + p.starboard.len());
    writeln!(out, "P2 {} {} 1", width, pings.len())?;
    let mut line = String::with_capacity(2 * width);
    for ping in pings {
        line.clear();
        for (i, bit) in ping.row().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push(if bit { '1' } else { '0' });
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
