//! Independent oracles shared by the oracle tests and the acceptance report.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sonarnav::filter::{predict, update, GaussianBelief, NavigationFilter};
use sonarnav::geometry::{swath_landmark_intersection, Landmark, Point2};
use sonarnav::harness::default_initial_cov;
use sonarnav::map::LandmarkMap;
use sonarnav::motion::{
    sample_driving_noise, step, wrap_angle, ControlInput, DrivingNoise, DrivingNoiseParams,
    VehicleState,
};
use sonarnav::sonar::{
    extract_measurements, landmark_log_likelihood, measure_altitude_compass, perturb_ranges,
    predicted_ranges, rasterize_ping, JointMeasurement, LandmarkMeasurement, MeasurementSource,
    ModelSource, SensorParams,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn angle<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(-PI..PI)
}

// ---------------------------------------------------------------- geometry

#[derive(Debug, Default)]
pub struct GeometryReport {
    pub compared: usize,
    pub excluded: usize,
    pub detections: usize,
    pub flag_mismatches: usize,
    pub max_point_error: f64,
}

fn inside(lm: &Landmark, p: (f64, f64)) -> bool {
    let (s, c) = lm.orientation.sin_cos();
    let (dx, dy) = (p.0 - lm.center.x, p.1 - lm.center.y);
    let u = c * dx + s * dy;
    let v = -s * dx + c * dy;
    u.abs() <= 0.5 * lm.length && v.abs() <= 0.5 * lm.width
}

fn distance_to_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (ex, ey) = (b.0 - a.0, b.1 - a.1);
    let t = (((p.0 - a.0) * ex + (p.1 - a.1) * ey) / (ex * ex + ey * ey)).clamp(0.0, 1.0);
    (a.0 + t * ex - p.0).hypot(a.1 + t * ey - p.1)
}

/// Refines the boundary between an inside parameter and an outside one.
fn bisect(lm: &Landmark, at: impl Fn(f64) -> (f64, f64), mut t_in: f64, mut t_out: f64) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (t_in + t_out);
        if inside(lm, at(mid)) {
            t_in = mid;
        } else {
            t_out = mid;
        }
    }
    t_in
}

/// Compares `swath_landmark_intersection` with dense sampling along the swath.
pub fn geometry_oracle(draws: usize, seed: u64) -> GeometryReport {
    let mut rng = rng(seed);
    let mut report = GeometryReport::default();
    const SAMPLES: usize = 10_000;
    for _ in 0..draws {
        let r_max = rng.random_range(5.0..40.0);
        let state = VehicleState::new(
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            angle(&mut rng),
            rng.random_range(0.0..0.9) * r_max,
        );
        let half = (r_max * r_max - state.altitude * state.altitude).sqrt();
        let reach = half + 4.0;
        let lm = Landmark::new(
            Point2::new(
                state.x + rng.random_range(-reach..reach),
                state.y + rng.random_range(-reach..reach),
            ),
            angle(&mut rng),
            rng.random_range(0.5..10.0),
            rng.random_range(0.5..6.0),
        )
        .unwrap();

        let (s, c) = state.heading.sin_cos();
        let port = (state.x - s * half, state.y + c * half);
        let starboard = (state.x + s * half, state.y - c * half);
        let at = |t: f64| {
            (
                port.0 + t * (starboard.0 - port.0),
                port.1 + t * (starboard.1 - port.1),
            )
        };

        let near_corner = lm
            .corners()
            .iter()
            .any(|k| distance_to_segment((k.x, k.y), port, starboard) < 1e-6);
        if near_corner {
            report.excluded += 1;
            continue;
        }
        report.compared += 1;

        let hits: Vec<usize> = (0..=SAMPLES)
            .filter(|&i| inside(&lm, at(i as f64 / SAMPLES as f64)))
            .collect();
        let expected = match (hits.first(), hits.last()) {
            (Some(&a), Some(&b)) => {
                let dt = 1.0 / SAMPLES as f64;
                let ta = if a == 0 {
                    0.0
                } else {
                    bisect(&lm, at, a as f64 * dt, (a - 1) as f64 * dt)
                };
                let tb = if b == SAMPLES {
                    1.0
                } else {
                    bisect(&lm, at, b as f64 * dt, (b + 1) as f64 * dt)
                };
                Some((at(ta), at(tb)))
            }
            _ => None,
        };
        let got = swath_landmark_intersection(&lm, &state, r_max);
        match (got, expected) {
            (Some((p1, p2)), Some((q1, q2))) => {
                report.detections += 1;
                let e1 = (p1.x - q1.0).hypot(p1.y - q1.1);
                let e2 = (p2.x - q2.0).hypot(p2.y - q2.1);
                report.max_point_error = report.max_point_error.max(e1).max(e2);
            }
            (None, None) => {}
            _ => report.flag_mismatches += 1,
        }
    }
    report
}

// -------------------------------------------------------------- round trip

#[derive(Debug, Default)]
pub struct RoundTripReport {
    pub configurations: usize,
    pub missed: usize,
    pub max_error: f64,
}

/// Rasterizes single detected landmarks and compares the extracted ranges
/// with the noiseless model ranges.
pub fn round_trip(configurations: usize, seed: u64) -> RoundTripReport {
    let sensor = SensorParams::default();
    let mut rng = rng(seed);
    let mut report = RoundTripReport::default();
    while report.configurations < configurations {
        let state = VehicleState::new(0.0, 0.0, angle(&mut rng), rng.random_range(0.5..15.0));
        let lm = Landmark::new(
            Point2::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)),
            angle(&mut rng),
            rng.random_range(0.5..6.0),
            rng.random_range(0.5..4.0),
        )
        .unwrap();
        let Some(model) = predicted_ranges(&state, &lm, &sensor) else {
            continue;
        };
        report.configurations += 1;
        let ping = rasterize_ping(&state, &[lm], &sensor);
        match extract_measurements(&ping, 1, &sensor).unwrap()[0] {
            LandmarkMeasurement::Detected(pair) => {
                let err = (pair.near - model.near)
                    .abs()
                    .max((pair.far - model.far).abs());
                report.max_error = report.max_error.max(err);
            }
            LandmarkMeasurement::NotDetected => report.missed += 1,
        }
    }
    report
}

// ---------------------------------------------------------------- predict

#[derive(Debug, Default)]
pub struct PredictReport {
    pub max_position_error: f64,
    pub max_heading_error: f64,
    /// Largest covariance error divided by its allowance; at most 1 passes.
    pub worst_cov_ratio: f64,
}

fn random_belief<R: Rng>(rng: &mut R) -> GaussianBelief {
    let sd = Vector4::new(
        rng.random_range(0.1..3.0),
        rng.random_range(0.1..3.0),
        rng.random_range(0.02..0.3),
        rng.random_range(0.1..0.7),
    );
    let b = Matrix4::from_fn(|_, _| normal(rng));
    let m = b * b.transpose() + Matrix4::identity();
    let scale = Matrix4::from_diagonal(&m.diagonal().map(|v| 1.0 / v.sqrt()));
    let corr = scale * m * scale;
    let d = Matrix4::from_diagonal(&sd);
    let mean = Vector4::new(
        rng.random_range(-50.0..50.0),
        rng.random_range(-50.0..50.0),
        angle(rng),
        rng.random_range(4.0..10.0),
    );
    GaussianBelief::new(mean, d * corr * d)
}

/// Sample moments of `step` applied to `samples` draws of belief and noise.
pub fn monte_carlo_prediction<R: Rng>(
    belief: &GaussianBelief,
    control: &ControlInput,
    noise: &DrivingNoiseParams,
    dt: f64,
    samples: usize,
    rng: &mut R,
) -> GaussianBelief {
    let root = belief.cov.cholesky().expect("positive definite").l();
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let e = Vector4::from_fn(|_, _| normal(rng));
        let s = belief.mean + root * e;
        let n = sample_driving_noise(noise, rng);
        out.push(step(&VehicleState::new(s[0], s[1], s[2], s[3]), control, &n, dt).to_vector());
    }
    let n = samples as f64;
    let (mut sin, mut cos) = (0.0, 0.0);
    let mut mean = Vector4::zeros();
    for v in &out {
        mean += v;
        sin += v[2].sin();
        cos += v[2].cos();
    }
    mean /= n;
    mean[2] = sin.atan2(cos);
    let mut cov = Matrix4::zeros();
    for v in &out {
        let mut d = v - mean;
        d[2] = wrap_angle(d[2]);
        cov += d * d.transpose();
    }
    GaussianBelief::new(mean, cov / n)
}

pub fn predict_oracle(cases: usize, samples: usize, seed: u64) -> PredictReport {
    let mut rng = rng(seed);
    let noise = DrivingNoiseParams::default();
    let dt = 0.1;
    let mut report = PredictReport::default();
    for _ in 0..cases {
        let belief = random_belief(&mut rng);
        let control = ControlInput::new(rng.random_range(0.0..3.0), rng.random_range(-0.5..0.5));
        let ut = predict(&belief, &control, &noise, dt).unwrap();
        let mc = monte_carlo_prediction(&belief, &control, &noise, dt, samples, &mut rng);
        for i in [0, 1, 3] {
            report.max_position_error = report
                .max_position_error
                .max((ut.mean[i] - mc.mean[i]).abs());
        }
        report.max_heading_error = report
            .max_heading_error
            .max(wrap_angle(ut.mean[2] - mc.mean[2]).abs());
        for (a, b) in ut.cov.iter().zip(mc.cov.iter()) {
            let allowed = (0.1 * b.abs()).max(0.01);
            report.worst_cov_ratio = report.worst_cov_ratio.max((a - b).abs() / allowed);
        }
    }
    report
}

// ----------------------------------------------------------------- update

/// One 1-D instance: only x is uncertain; y, heading and altitude are known.
pub struct UpdateInstance {
    pub pred: GaussianBelief,
    pub z: JointMeasurement,
    pub map: LandmarkMap,
    pub sensor: SensorParams,
}

impl UpdateInstance {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let sensor = SensorParams::default();
        let altitude = 5.0;
        let heading = angle(rng);
        let mu = rng.random_range(-2.0..2.0);
        let sigma: f64 = rng.random_range(0.5..2.0);
        let truth_x = mu + sigma * normal(rng).clamp(-2.0, 2.0);
        let truth = VehicleState::new(truth_x, 0.0, heading, altitude);
        let (s, c) = heading.sin_cos();
        loop {
            let along = rng.random_range(-1.0..1.0);
            let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let lateral = side * rng.random_range(4.0..14.0);
            let center = Point2::new(truth_x + c * along - s * lateral, s * along + c * lateral);
            let lm = Landmark::new(
                center,
                angle(rng),
                rng.random_range(2.0..6.0),
                rng.random_range(1.0..3.0),
            )
            .unwrap();
            let Some(pair) = predicted_ranges(&truth, &lm, &sensor) else {
                continue;
            };
            let sd = sensor.var_range.sqrt();
            let noisy = perturb_ranges(
                &pair,
                [sd * normal(rng), sd * normal(rng)],
                altitude,
                &sensor,
            );
            let mut cov = Matrix4::zeros();
            cov[(0, 0)] = sigma * sigma;
            return Self {
                pred: GaussianBelief::new(Vector4::new(mu, 0.0, heading, altitude), cov),
                z: JointMeasurement {
                    landmarks: vec![LandmarkMeasurement::Detected(noisy)],
                    altitude,
                    compass: heading,
                },
                map: LandmarkMap::new(vec![lm]),
                sensor,
            };
        }
    }

    /// Posterior mean of x by Bayes' rule on a grid of step 0.01 m over ±5σ.
    pub fn grid_posterior_mean(&self) -> f64 {
        let mu = self.pred.mean[0];
        let sigma = self.pred.cov[(0, 0)].sqrt();
        let steps = (10.0 * sigma / 0.01).round() as usize;
        let log_post: Vec<(f64, f64)> = (0..=steps)
            .map(|i| {
                let x = mu - 5.0 * sigma + i as f64 * 0.01;
                let hyp =
                    VehicleState::new(x, self.pred.mean[1], self.pred.mean[2], self.pred.mean[3]);
                let prior = -0.5 * ((x - mu) / sigma).powi(2);
                (
                    x,
                    prior
                        + landmark_log_likelihood(
                            &self.z.landmarks[0],
                            &hyp,
                            &self.map[0],
                            &self.sensor,
                        ),
                )
            })
            .collect();
        let max = log_post
            .iter()
            .map(|p| p.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for (x, lp) in log_post {
            let w = (lp - max).exp();
            num += w * x;
            den += w;
        }
        num / den
    }

    pub fn filter_mean(&self, particles: usize, seed: u64) -> f64 {
        let out = update(
            &self.pred,
            &self.z,
            &self.map,
            &self.sensor,
            particles,
            &mut rng(seed),
        )
        .unwrap();
        assert!(!out.degenerate);
        out.belief.mean[0]
    }
}

/// Absolute posterior-mean errors against the grid oracle, one per instance.
pub fn update_oracle(instances: usize, particles: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng(seed);
    (0..instances)
        .map(|i| {
            let inst = UpdateInstance::random(&mut rng);
            (inst.filter_mean(particles, seed.wrapping_add(1000 + i as u64))
                - inst.grid_posterior_mean())
            .abs()
        })
        .collect()
}

// ------------------------------------------------------------- singularity

/// Largest per-component gap between a step at turn rate 1e-9 and the
/// straight-line motion it approaches.
pub fn singularity_gap(cases: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let state = VehicleState::new(
            rng.random_range(-1e3..1e3),
            rng.random_range(-1e3..1e3),
            angle(&mut rng),
            rng.random_range(0.0..20.0),
        );
        let speed = rng.random_range(0.0..5.0);
        let dt = rng.random_range(0.01..1.0);
        let control = ControlInput::new(speed, 1e-9);
        let got = step(&state, &control, &DrivingNoise::default(), dt);
        let d = speed * dt;
        let gaps = [
            got.x - (state.x + d * state.heading.cos()),
            got.y - (state.y + d * state.heading.sin()),
            wrap_angle(got.heading - (state.heading + 1e-9 * dt)),
            got.altitude - state.altitude,
        ];
        worst = gaps.iter().fold(worst, |w, g| w.max(g.abs()));
    }
    worst
}

// ----------------------------------------------------------------- timing

/// Median wall time in milliseconds of one predict+update with `particles`
/// particles and 25 landmarks around the vehicle.
pub fn step_timing_ms(repeats: usize, particles: usize) -> f64 {
    let sensor = SensorParams::default();
    let noise = DrivingNoiseParams::default();
    let dt = 0.1;
    let landmarks = (0..25)
        .map(|i| {
            let (r, c) = ((i / 5) as f64 - 2.0, (i % 5) as f64 - 2.0);
            Landmark::new(Point2::new(8.0 * c, 8.0 * r), 0.3 * i as f64, 3.0, 2.0).unwrap()
        })
        .collect();
    let map = LandmarkMap::new(landmarks);
    let mut truth = VehicleState::new(-3.0, 1.0, 0.2, 5.0);
    let mut filter = NavigationFilter::new(
        GaussianBelief::from_state(&truth, default_initial_cov(&sensor)),
        noise,
        sensor,
        dt,
        particles,
    );
    let control = ControlInput::new(1.5, 0.0);
    let mut rng = rng(7);
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let n = sample_driving_noise(&noise, &mut rng);
        truth = step(&truth, &control, &n, dt);
        let landmarks = ModelSource
            .measure(&truth, &map, &sensor, &mut rng)
            .unwrap();
        let (altitude, compass) = measure_altitude_compass(&truth, &sensor, &mut rng);
        let z = JointMeasurement {
            landmarks,
            altitude,
            compass,
        };
        let start = Instant::now();
        filter.predict(&control).unwrap();
        filter.update(&z, &map, &mut rng).unwrap();
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}
