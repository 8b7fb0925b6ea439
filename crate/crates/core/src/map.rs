//! Known landmark map with a uniform-grid spatial index.

use std::collections::HashMap;
use std::ops::Deref;

use crate::geometry::{Landmark, Point2};
use crate::Result;

/// Landmarks indexed by id, plus buckets keyed by the cell of each center.
#[derive(Clone, Debug)]
pub struct LandmarkMap {
    landmarks: Vec<Landmark>,
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    max_circumradius: f64,
}

impl LandmarkMap {
    pub fn new(landmarks: Vec<Landmark>) -> Self {
        let max_circumradius = landmarks
            .iter()
            .map(Landmark::circumradius)
            .fold(0.0, f64::max);
        let cell = 25.0_f64.max(2.0 * max_circumradius);
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (id, lm) in landmarks.iter().enumerate() {
            buckets
                .entry(Self::key(cell, &lm.center))
                .or_default()
                .push(id);
        }
        Self {
            landmarks,
            cell,
            buckets,
            max_circumradius,
        }
    }

    /// Square grid of identical landmarks with centers at integer multiples
    /// of `spacing` inside `[-extent, extent]` on both axes.
    pub fn grid(
        spacing: f64,
        extent: f64,
        orientation: f64,
        length: f64,
        width: f64,
    ) -> Result<Self> {
        let n = (extent / spacing).floor() as i64;
        let mut landmarks = Vec::with_capacity(((2 * n + 1) * (2 * n + 1)) as usize);
        for j in -n..=n {
            for i in -n..=n {
                let center = Point2::new(i as f64 * spacing, j as f64 * spacing);
                landmarks.push(Landmark::new(center, orientation, length, width)?);
            }
        }
        Ok(Self::new(landmarks))
    }

    fn key(cell: f64, p: &Point2) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    pub fn landmarks(&self) -> &[Landmark] {
        &self.landmarks
    }

    pub fn max_circumradius(&self) -> f64 {
        self.max_circumradius
    }

    /// Ids, ascending, of landmarks whose centers lie in the box
    /// `[lo.x - margin, hi.x + margin] x [lo.y - margin, hi.y + margin]`.
    pub fn ids_in_box(&self, lo: Point2, hi: Point2, margin: f64) -> Vec<usize> {
        let lo = Point2::new(lo.x - margin, lo.y - margin);
        let hi = Point2::new(hi.x + margin, hi.y + margin);
        let (i0, j0) = Self::key(self.cell, &lo);
        let (i1, j1) = Self::key(self.cell, &hi);
        let mut ids = Vec::new();
        let cells = (i1.saturating_sub(i0).saturating_add(1))
            .saturating_mul(j1.saturating_sub(j0).saturating_add(1));
        if cells < 0 || cells as usize > self.buckets.len() {
            ids.extend(self.landmarks.iter().enumerate().filter_map(|(id, lm)| {
                let c = lm.center;
                (c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y).then_some(id)
            }));
            return ids;
        }
        for j in j0..=j1 {
            for i in i0..=i1 {
                if let Some(bucket) = self.buckets.get(&(i, j)) {
                    ids.extend(bucket.iter().copied().filter(|&id| {
                        let c = self.landmarks[id].center;
                        c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y
                    }));
                }
            }
        }
        ids.sort_unstable();
        ids
    }

    /// Ids of landmarks whose center is within `radius` of `p`, ascending.
    pub fn ids_near(&self, p: Point2, radius: f64) -> Vec<usize> {
        let mut ids = self.ids_in_box(p, p, radius);
        ids.retain(|&id| self.landmarks[id].center.distance(&p) <= radius);
        ids
    }
}

impl Deref for LandmarkMap {
    type Target = [Landmark];

    fn deref(&self) -> &[Landmark] {
        &self.landmarks
    }
}

impl Default for LandmarkMap {
    fn default() -> Self {
        Self::new(Vec::new())
    }
}

impl From<Vec<Landmark>> for LandmarkMap {
    fn from(landmarks: Vec<Landmark>) -> Self {
        Self::new(landmarks)
    }
}
