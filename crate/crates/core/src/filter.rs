//! Navigation filter: sigma-point prediction, particle update.
//!
//! The posterior is carried as a Gaussian over `[x, y, heading, altitude]`.
//! Prediction augments the state with the four driving-noise components and
//! pushes `2N` symmetric sigma points (N = 8, equal weights, no central point)
//! through the motion model. The update conditions on the altimeter and
//! compass in closed form, draws particles from the result, weights them by
//! the landmark likelihoods and refits a Gaussian to the weighted particles.
//!
//! No resampling step is needed: particles are drawn fresh from the refitted
//! Gaussian at every update, so weight degeneracy cannot build up across steps.
//! When every particle has zero weight the update is skipped and flagged.

use nalgebra::{Cholesky, Matrix2, Matrix4, SMatrix, SVector, Vector2, Vector4};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::Point2;
use crate::map::LandmarkMap;
use crate::motion::{
    step, wrap_angle, ControlInput, DrivingNoise, DrivingNoiseParams, VehicleState,
};
use crate::sonar::{landmark_log_likelihood, JointMeasurement, SensorParams};
use crate::{Error, Result};

/// Dimension of the noise-augmented state.
pub const AUGMENTED_DIM: usize = 8;
/// First diagonal jitter tried when a covariance fails to factorize.
pub const INITIAL_JITTER: f64 = 1e-9;
/// Jitter retries, each ten times larger than the last.
pub const JITTER_ATTEMPTS: usize = 3;
/// Weight sums below this are treated as underflow.
pub const MIN_WEIGHT_SUM: f64 = 1e-300;
pub const DEFAULT_PARTICLE_COUNT: usize = 1000;
/// Four antithetic pairs are needed for a full-rank sample covariance.
pub const MIN_PARTICLES: usize = 8;

const HEADING: usize = 2;
const ALTITUDE: usize = 3;

pub type AugmentedVector = SVector<f64, AUGMENTED_DIM>;
pub type AugmentedMatrix = SMatrix<f64, AUGMENTED_DIM, AUGMENTED_DIM>;

/// Gaussian approximation of the state posterior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianBelief {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

impl GaussianBelief {
    pub fn new(mean: Vector4<f64>, cov: Matrix4<f64>) -> Self {
        Self { mean, cov }
    }

    pub fn from_state(state: &VehicleState, cov: Matrix4<f64>) -> Self {
        Self::new(state.to_vector(), cov)
    }
}

/// State belief stacked with the driving-noise distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugmentedGaussian {
    pub mean: AugmentedVector,
    pub cov: AugmentedMatrix,
}

impl AugmentedGaussian {
    /// Mean `[mu, 0, 0, 0, 0]`, covariance `blockdiag(C, diag(noise variances))`.
    pub fn new(belief: &GaussianBelief, noise: &DrivingNoiseParams) -> Self {
        let mut mean = AugmentedVector::zeros();
        mean.fixed_rows_mut::<4>(0).copy_from(&belief.mean);
        let mut cov = AugmentedMatrix::zeros();
        cov.fixed_view_mut::<4, 4>(0, 0).copy_from(&belief.cov);
        for (i, v) in noise.as_array().into_iter().enumerate() {
            cov[(4 + i, 4 + i)] = v;
        }
        Self { mean, cov }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaPointSet {
    pub points: Vec<AugmentedVector>,
    pub weights: Vec<f64>,
}

/// Lower-triangular `L` with `L Lᵀ = m`, adding escalating diagonal jitter on failure.
pub fn factorize<const D: usize>(m: &SMatrix<f64, D, D>) -> Result<SMatrix<f64, D, D>> {
    if let Some(chol) = Cholesky::new(*m) {
        return Ok(chol.l());
    }
    let mut jitter = INITIAL_JITTER;
    for _ in 0..JITTER_ATTEMPTS {
        let jittered = m + SMatrix::<f64, D, D>::identity() * jitter;
        if let Some(chol) = Cholesky::new(jittered) {
            return Ok(chol.l());
        }
        jitter *= 10.0;
    }
    Err(Error::Factorization {
        attempts: JITTER_ATTEMPTS,
    })
}

/// `2N` points `mean ± column_i(L)` with `L Lᵀ = N Σ`, each weighted `1/(2N)`.
pub fn sigma_points(aug: &AugmentedGaussian) -> Result<SigmaPointSet> {
    let n = AUGMENTED_DIM;
    let root = factorize(&(aug.cov * n as f64))?;
    let mut points = Vec::with_capacity(2 * n);
    for i in 0..n {
        points.push(aug.mean + root.column(i));
    }
    for i in 0..n {
        points.push(aug.mean - root.column(i));
    }
    Ok(SigmaPointSet {
        points,
        weights: vec![1.0 / (2 * n) as f64; 2 * n],
    })
}

/// Weighted mean and covariance of state vectors.
///
/// The heading mean is circular and heading residuals are wrapped. Weights
/// must sum to one. The covariance is symmetrized.
pub fn weighted_moments(points: &[Vector4<f64>], weights: &[f64]) -> GaussianBelief {
    debug_assert_eq!(points.len(), weights.len());
    let mut mean = Vector4::zeros();
    let (mut sin_sum, mut cos_sum) = (0.0, 0.0);
    for (p, &w) in points.iter().zip(weights) {
        mean += p * w;
        let (s, c) = p[HEADING].sin_cos();
        sin_sum += w * s;
        cos_sum += w * c;
    }
    mean[HEADING] = sin_sum.atan2(cos_sum);

    let mut cov = Matrix4::zeros();
    for (p, &w) in points.iter().zip(weights) {
        let mut d = p - mean;
        d[HEADING] = wrap_angle(d[HEADING]);
        cov += d * d.transpose() * w;
    }
    GaussianBelief::new(mean, symmetrize(&cov))
}

fn symmetrize(m: &Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

/// Predicted belief after one motion step.
pub fn predict(
    belief: &GaussianBelief,
    control: &ControlInput,
    noise: &DrivingNoiseParams,
    dt: f64,
) -> Result<GaussianBelief> {
    let sigma = sigma_points(&AugmentedGaussian::new(belief, noise))?;
    let propagated: Vec<Vector4<f64>> = sigma
        .points
        .iter()
        .map(|p| {
            let state = VehicleState::new(p[0], p[1], p[2], p[3]);
            let n = DrivingNoise::new(p[4], p[5], p[6], p[7]);
            step(&state, control, &n, dt).to_vector()
        })
        .collect();
    Ok(weighted_moments(&propagated, &sigma.weights))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateOutcome {
    pub belief: GaussianBelief,
    /// Set when no particle had positive weight; `belief` is then the prediction.
    pub degenerate: bool,
}

/// Standard-normal 4-vectors in antithetic pairs, whitened so that their
/// sample mean is exactly zero and their sample covariance exactly identity.
///
/// Each update draws a fresh set at 10 Hz, so plain i.i.d. draws would inject
/// sampling noise of order `C / count` into the mean and bias the covariance
/// low at every step, which compounds over a run. With an odd count the last
/// vector is zero.
pub fn standard_normal_draws<R: Rng + ?Sized>(
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vector4<f64>>> {
    let pairs = count / 2;
    let half: Vec<Vector4<f64>> = (0..pairs)
        .map(|_| Vector4::from_fn(|_, _| StandardNormal.sample(rng)))
        .collect();
    let mut second = Matrix4::zeros();
    for e in &half {
        second += e * e.transpose();
    }
    // Both members of a pair contribute the same outer product.
    second *= 2.0 / count as f64;
    let whitening = factorize(&second)?
        .try_inverse()
        .ok_or(Error::Factorization {
            attempts: JITTER_ATTEMPTS,
        })?;
    let mut draws = Vec::with_capacity(count);
    for e in &half {
        let w = whitening * e;
        draws.push(w);
        draws.push(-w);
    }
    if count % 2 == 1 {
        draws.push(Vector4::zeros());
    }
    Ok(draws)
}

/// `count` particles from the Gaussian belief, built from
/// [`standard_normal_draws`].
pub fn draw_particles<R: Rng + ?Sized>(
    belief: &GaussianBelief,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vector4<f64>>> {
    let root = factorize(&belief.cov)?;
    Ok(standard_normal_draws(count, rng)?
        .into_iter()
        .map(|e| belief.mean + root * e)
        .collect())
}

/// Conditions the belief on the altimeter and compass readings.
///
/// Both sensors observe a state component directly with Gaussian noise, so
/// this is an exact linear update (compass innovation wrapped). A singular
/// innovation covariance, as with a noiseless sensor on a certain state,
/// contributes nothing.
pub fn condition_on_nav_sensors(
    belief: &GaussianBelief,
    altitude: f64,
    compass: f64,
    sensor: &SensorParams,
) -> GaussianBelief {
    let h = SMatrix::<f64, 2, 4>::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let r = Matrix2::new(sensor.var_compass, 0.0, 0.0, sensor.var_altitude);
    let innovation = Vector2::new(
        wrap_angle(compass - belief.mean[HEADING]),
        altitude - belief.mean[ALTITUDE],
    );
    let s = h * belief.cov * h.transpose() + r;
    let s_inv = match s.try_inverse() {
        Some(inv) if inv.iter().all(|v| v.is_finite()) => inv,
        _ => s
            .pseudo_inverse(1e-300)
            .unwrap_or_else(|_| Matrix2::zeros()),
    };
    let gain = belief.cov * h.transpose() * s_inv;
    let mut mean = belief.mean + gain * innovation;
    mean[HEADING] = wrap_angle(mean[HEADING]);
    // Joseph form keeps the result positive semidefinite.
    let a = Matrix4::identity() - gain * h;
    let cov = a * belief.cov * a.transpose() + gain * r * gain.transpose();
    GaussianBelief::new(mean, symmetrize(&cov))
}

/// Particle update for the landmark measurements.
///
/// The altimeter and compass factors of the joint likelihood are applied in
/// closed form first ([`condition_on_nav_sensors`]). Particles are then drawn
/// from that conditioned Gaussian and weighted by the landmark factors alone,
/// which targets the same posterior as weighting draws from the prediction by
/// the full joint likelihood, with far less sampling noise.
///
/// `map` must match `z.landmarks` in length. Landmarks too far from every
/// particle to be seen are not evaluated per particle; their factor is 0
/// for a missed detection and -inf for a reported one, exactly as a full
/// evaluation would give. When no landmark is within reach of any particle
/// the weights are flat and the conditioned Gaussian is returned as is.
pub fn update<R: Rng + ?Sized>(
    pred: &GaussianBelief,
    z: &JointMeasurement,
    map: &LandmarkMap,
    sensor: &SensorParams,
    particle_count: usize,
    rng: &mut R,
) -> Result<UpdateOutcome> {
    if particle_count < MIN_PARTICLES {
        return Err(Error::InvalidParameter {
            name: "particles",
            reason: format!("need at least {MIN_PARTICLES}, got {particle_count}"),
        });
    }
    assert_eq!(
        z.landmarks.len(),
        map.len(),
        "measurement and map sizes differ"
    );
    let skip = UpdateOutcome {
        belief: *pred,
        degenerate: true,
    };

    let proposal = condition_on_nav_sensors(pred, z.altitude, z.compass, sensor);
    let particles = draw_particles(&proposal, particle_count, rng)?;

    let (mut lo, mut hi) = (
        Point2::new(f64::INFINITY, f64::INFINITY),
        Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in &particles {
        lo = Point2::new(lo.x.min(p[0]), lo.y.min(p[1]));
        hi = Point2::new(hi.x.max(p[0]), hi.y.max(p[1]));
    }
    let margin = sensor.r_max + map.max_circumradius() + 1e-6;
    let candidates = map.ids_in_box(lo, hi, margin);
    let unseen_detection = z
        .landmarks
        .iter()
        .enumerate()
        .any(|(id, m)| m.is_detected() && candidates.binary_search(&id).is_err());
    if unseen_detection {
        return Ok(skip);
    }
    if candidates.is_empty() {
        return Ok(UpdateOutcome {
            belief: proposal,
            degenerate: false,
        });
    }

    let log_weights: Vec<f64> = particles
        .iter()
        .map(|p| {
            let hyp = VehicleState::from_vector(p);
            let mut lw = 0.0;
            for &id in &candidates {
                lw += landmark_log_likelihood(&z.landmarks[id], &hyp, &map[id], sensor);
                if lw == f64::NEG_INFINITY {
                    break;
                }
            }
            lw
        })
        .collect();

    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Ok(skip);
    }
    let mut weights: Vec<f64> = log_weights.iter().map(|lw| (lw - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total < MIN_WEIGHT_SUM || total.is_infinite() {
        return Ok(skip);
    }
    for w in &mut weights {
        *w /= total;
    }
    Ok(UpdateOutcome {
        belief: weighted_moments(&particles, &weights),
        degenerate: false,
    })
}

/// Posterior-mean state estimate, heading wrapped.
pub fn mmse_estimate(belief: &GaussianBelief) -> VehicleState {
    let mut state = VehicleState::from_vector(&belief.mean);
    state.heading = wrap_angle(state.heading);
    state
}

/// One predict/update cycle.
#[allow(clippy::too_many_arguments)]
pub fn filter_step<R: Rng + ?Sized>(
    belief: &GaussianBelief,
    control: &ControlInput,
    z: &JointMeasurement,
    map: &LandmarkMap,
    sensor: &SensorParams,
    noise: &DrivingNoiseParams,
    dt: f64,
    particle_count: usize,
    rng: &mut R,
) -> Result<(GaussianBelief, bool)> {
    let pred = predict(belief, control, noise, dt)?;
    let out = update(&pred, z, map, sensor, particle_count, rng)?;
    Ok((out.belief, out.degenerate))
}

/// Stateful filter holding the current belief and its fixed parameters.
#[derive(Clone, Debug)]
pub struct NavigationFilter {
    belief: GaussianBelief,
    noise: DrivingNoiseParams,
    sensor: SensorParams,
    dt: f64,
    particle_count: usize,
    degenerate_updates: usize,
}

impl NavigationFilter {
    pub fn new(
        initial: GaussianBelief,
        noise: DrivingNoiseParams,
        sensor: SensorParams,
        dt: f64,
        particle_count: usize,
    ) -> Self {
        Self {
            belief: initial,
            noise,
            sensor,
            dt,
            particle_count,
            degenerate_updates: 0,
        }
    }

    pub fn belief(&self) -> &GaussianBelief {
        &self.belief
    }

    pub fn estimate(&self) -> VehicleState {
        mmse_estimate(&self.belief)
    }

    /// Number of updates skipped because all weights vanished.
    pub fn degenerate_updates(&self) -> usize {
        self.degenerate_updates
    }

    pub fn predict(&mut self, control: &ControlInput) -> Result<()> {
        self.belief = predict(&self.belief, control, &self.noise, self.dt)?;
        Ok(())
    }

    /// Returns whether the update was degenerate.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        z: &JointMeasurement,
        map: &LandmarkMap,
        rng: &mut R,
    ) -> Result<bool> {
        let out = update(&self.belief, z, map, &self.sensor, self.particle_count, rng)?;
        self.belief = out.belief;
        if out.degenerate {
            self.degenerate_updates += 1;
        }
        Ok(out.degenerate)
    }
}
