//! Planar geometry of the sonar swath and the landmark rectangles.
//!
//! One ping ensonifies a cross-track segment of the seafloor (the swath).
//! A landmark is detected when the swath crosses its rectangle; the two
//! crossing points are converted to slant ranges through the water column.

use crate::motion::VehicleState;
use crate::{Error, Result};

/// Tolerance for segment intersection tests, in meters.
pub const GEOMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn sub(&self, other: &Point2) -> (f64, f64) {
        (self.x - other.x, self.y - other.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment2 {
    pub begin: Point2,
    pub end: Point2,
}

impl Segment2 {
    pub const fn new(begin: Point2, end: Point2) -> Self {
        Self { begin, end }
    }

    pub fn length(&self) -> f64 {
        self.begin.distance(&self.end)
    }

    /// Point at parameter `t`, where `t = 0` is `begin` and `t = 1` is `end`.
    pub fn point_at(&self, t: f64) -> Point2 {
        Point2::new(
            self.begin.x + t * (self.end.x - self.begin.x),
            self.begin.y + t * (self.end.y - self.begin.y),
        )
    }
}

/// Oriented rectangle on the seafloor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Landmark {
    pub center: Point2,
    /// Rotation of the length axis from the x axis, radians.
    pub orientation: f64,
    pub length: f64,
    pub width: f64,
}

impl Landmark {
    pub fn new(center: Point2, orientation: f64, length: f64, width: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "landmark length",
                reason: format!("must be positive, got {length}"),
            });
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "landmark width",
                reason: format!("must be positive, got {width}"),
            });
        }
        if !(center.x.is_finite() && center.y.is_finite() && orientation.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "landmark center",
                reason: "coordinates and orientation must be finite".into(),
            });
        }
        Ok(Self {
            center,
            orientation: crate::motion::wrap_angle(orientation),
            length,
            width,
        })
    }

    /// Distance from the center to any corner.
    pub fn circumradius(&self) -> f64 {
        0.5 * self.length.hypot(self.width)
    }

    /// Corners in counter-clockwise order starting from the local `(-l/2, -w/2)` corner.
    pub fn corners(&self) -> [Point2; 4] {
        let (s, c) = self.orientation.sin_cos();
        let hl = 0.5 * self.length;
        let hw = 0.5 * self.width;
        [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)]
            .map(|(u, v)| Point2::new(self.center.x + c * u - s * v, self.center.y + s * u + c * v))
    }

    /// Coordinates of `p` in the landmark frame (length axis first).
    fn local_coords(&self, p: &Point2) -> (f64, f64) {
        let (s, c) = self.orientation.sin_cos();
        let (dx, dy) = p.sub(&self.center);
        (c * dx + s * dy, -s * dx + c * dy)
    }

    /// True when `p` lies inside the rectangle by more than `margin`.
    pub fn contains_strictly(&self, p: &Point2, margin: f64) -> bool {
        let (u, v) = self.local_coords(p);
        u.abs() < 0.5 * self.length - margin && v.abs() < 0.5 * self.width - margin
    }

    /// Parameter interval of `segment` that lies inside the closed rectangle.
    ///
    /// Slab clipping in the landmark frame; returns `None` for a miss or a
    /// chord shorter than [`GEOMETRY_TOLERANCE`].
    pub fn clip(&self, segment: &Segment2) -> Option<(f64, f64)> {
        let (u0, v0) = self.local_coords(&segment.begin);
        let (u1, v1) = self.local_coords(&segment.end);
        let mut t_lo = 0.0_f64;
        let mut t_hi = 1.0_f64;
        for (p0, d, half) in [
            (u0, u1 - u0, 0.5 * self.length),
            (v0, v1 - v0, 0.5 * self.width),
        ] {
            if d == 0.0 {
                if p0.abs() > half {
                    return None;
                }
                continue;
            }
            let mut ta = (-half - p0) / d;
            let mut tb = (half - p0) / d;
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t_lo = t_lo.max(ta);
            t_hi = t_hi.min(tb);
            if t_lo > t_hi {
                return None;
            }
        }
        if (t_hi - t_lo) * segment.length() <= GEOMETRY_TOLERANCE {
            return None;
        }
        Some((t_lo, t_hi))
    }
}

/// Sorted pair of slant ranges to the two swath/landmark crossings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlantRangePair {
    pub near: f64,
    pub far: f64,
}

impl SlantRangePair {
    /// Builds a pair from two ranges in any order.
    pub fn sorted(a: f64, b: f64) -> Self {
        if a <= b {
            Self { near: a, far: b }
        } else {
            Self { near: b, far: a }
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.near, self.far]
    }
}

/// Seafloor segment covered by one ping: port endpoint first, starboard second.
pub fn swath_endpoints(state: &VehicleState, r_max: f64) -> Result<Segment2> {
    let half = swath_half_width(state.altitude, r_max).ok_or_else(|| {
        Error::Domain(format!(
            "altitude {} exceeds maximum slant range {r_max}",
            state.altitude
        ))
    })?;
    let (s, c) = state.heading.sin_cos();
    // Port is the heading direction rotated by +90 degrees: (-sin, cos).
    let (px, py) = (-s * half, c * half);
    Ok(Segment2::new(
        Point2::new(state.x + px, state.y + py),
        Point2::new(state.x - px, state.y - py),
    ))
}

/// Horizontal reach of the swath on each side, `None` if the seafloor is out of range.
fn swath_half_width(altitude: f64, r_max: f64) -> Option<f64> {
    let a2 = altitude * altitude;
    let r2 = r_max * r_max;
    if a2 > r2 || !altitude.is_finite() {
        None
    } else {
        Some((r2 - a2).sqrt())
    }
}

/// The four sides of the landmark rectangle, each running corner to corner.
pub fn landmark_sides(landmark: &Landmark) -> [Segment2; 4] {
    let c = landmark.corners();
    [
        Segment2::new(c[0], c[1]),
        Segment2::new(c[1], c[2]),
        Segment2::new(c[2], c[3]),
        Segment2::new(c[3], c[0]),
    ]
}

/// Result of intersecting segment `a` with segment `b`, parameterized along `a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SegmentIntersection {
    None,
    Point(f64),
    /// Collinear overlap between the two parameters.
    Overlap(f64, f64),
}

fn cross(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn dot(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

/// Intersects two segments with [`GEOMETRY_TOLERANCE`] slack at the endpoints.
pub fn segment_intersection(a: &Segment2, b: &Segment2) -> SegmentIntersection {
    let r = a.end.sub(&a.begin);
    let s = b.end.sub(&b.begin);
    let qp = b.begin.sub(&a.begin);
    let len_r = r.0.hypot(r.1);
    let len_s = s.0.hypot(s.1);
    if len_r <= GEOMETRY_TOLERANCE || len_s <= GEOMETRY_TOLERANCE {
        return SegmentIntersection::None;
    }
    let denom = cross(r, s);
    if denom.abs() <= 1e-12 * len_r * len_s {
        // Parallel: only collinear overlap counts.
        if (cross(qp, r) / len_r).abs() > GEOMETRY_TOLERANCE {
            return SegmentIntersection::None;
        }
        let rr = dot(r, r);
        let t0 = dot(qp, r) / rr;
        let t1 = t0 + dot(s, r) / rr;
        let lo = t0.min(t1).max(0.0);
        let hi = t0.max(t1).min(1.0);
        let slack = GEOMETRY_TOLERANCE / len_r;
        return if hi - lo > slack {
            SegmentIntersection::Overlap(lo, hi)
        } else if hi - lo >= -slack {
            SegmentIntersection::Point(lo.clamp(0.0, 1.0))
        } else {
            SegmentIntersection::None
        };
    }
    let t = cross(qp, s) / denom;
    let u = cross(qp, r) / denom;
    let slack_t = GEOMETRY_TOLERANCE / len_r;
    let slack_u = GEOMETRY_TOLERANCE / len_s;
    if (-slack_t..=1.0 + slack_t).contains(&t) && (-slack_u..=1.0 + slack_u).contains(&u) {
        SegmentIntersection::Point(t.clamp(0.0, 1.0))
    } else {
        SegmentIntersection::None
    }
}

/// Crossing points of the swath with the landmark boundary.
///
/// Returns `None` when the swath touches no side, when the only contact is a
/// single tangent point, or when the seafloor is beyond `r_max`. If the swath
/// crosses the boundary once and ends inside the rectangle, the swath endpoint
/// is the second point. Points are ordered from port to starboard.
pub fn swath_landmark_intersection(
    landmark: &Landmark,
    state: &VehicleState,
    r_max: f64,
) -> Option<(Point2, Point2)> {
    let half = swath_half_width(state.altitude, r_max)?;
    let dx = state.x - landmark.center.x;
    let dy = state.y - landmark.center.y;
    let reach = half + landmark.circumradius() + GEOMETRY_TOLERANCE;
    if dx * dx + dy * dy > reach * reach {
        return None;
    }
    let swath = swath_endpoints(state, r_max).ok()?;

    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    for side in landmark_sides(landmark) {
        match segment_intersection(&swath, &side) {
            SegmentIntersection::None => {}
            SegmentIntersection::Point(t) => {
                t_min = t_min.min(t);
                t_max = t_max.max(t);
            }
            SegmentIntersection::Overlap(a, b) => {
                t_min = t_min.min(a);
                t_max = t_max.max(b);
            }
        }
    }
    if t_min > t_max {
        return None;
    }
    let length = swath.length();
    if (t_max - t_min) * length > GEOMETRY_TOLERANCE {
        return Some((swath.point_at(t_min), swath.point_at(t_max)));
    }

    // One crossing: complete with the swath endpoint that lies inside.
    let crossing = swath.point_at(t_min);
    if landmark.contains_strictly(&swath.begin, GEOMETRY_TOLERANCE) {
        Some((swath.begin, crossing))
    } else if landmark.contains_strictly(&swath.end, GEOMETRY_TOLERANCE) {
        Some((crossing, swath.end))
    } else {
        None
    }
}

/// Slant ranges from the vehicle to two seafloor points, sorted ascending.
pub fn slant_ranges(p1: &Point2, p2: &Point2, state: &VehicleState) -> SlantRangePair {
    let vehicle = Point2::new(state.x, state.y);
    let slant = |p: &Point2| p.distance(&vehicle).hypot(state.altitude);
    SlantRangePair::sorted(slant(p1), slant(p2))
}

/// Horizontal range on the seafloor corresponding to a slant range.
pub fn horizontal_from_slant(slant_range: f64, altitude: f64) -> Result<f64> {
    if !(altitude >= 0.0 && slant_range >= altitude) {
        return Err(Error::Domain(format!(
            "slant range {slant_range} is shorter than altitude {altitude}"
        )));
    }
    Ok(((slant_range - altitude) * (slant_range + altitude)).sqrt())
}
