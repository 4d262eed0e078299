//! Positions of the four internal states, their motion in time, and the
//! classicality constraint `h(x) = f(d11) + f(d22) - f(d12) - f(d21)`.
//!
//! Index convention: `d_ab` is the distance between state `a` of body A and
//! state `b` of body B.

use std::io::Read;

use crate::error::{Error, Result};
use crate::potentials::Potential;

pub type Vec3 = [f64; 3];

/// Relative step used by [`constraint_gradient`] when none is given.
pub const DEFAULT_GRADIENT_STEP: f64 = 1e-6;

/// Minimum distance, relative to the plane separation, below which a
/// rotating-approach trajectory counts as colliding at `L / v`.
const COLLISION_RESOLUTION: f64 = 1e-12;

fn distance(p: &Vec3, q: &Vec3) -> f64 {
    let dx = p[0] - q[0];
    let dy = p[1] - q[1];
    let dz = p[2] - q[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

fn lerp(p: &Vec3, q: &Vec3, s: f64) -> Vec3 {
    [
        p[0] + s * (q[0] - p[0]),
        p[1] + s * (q[1] - p[1]),
        p[2] + s * (q[2] - p[2]),
    ]
}

/// The four state-dependent distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distances {
    pub d11: f64,
    pub d12: f64,
    pub d21: f64,
    pub d22: f64,
}

impl Distances {
    pub fn new(d11: f64, d12: f64, d21: f64, d22: f64) -> Result<Self> {
        let d = Self { d11, d12, d21, d22 };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        for v in self.to_array() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveDistance(v));
            }
        }
        Ok(())
    }

    /// `[d11, d12, d21, d22]`, matching the basis order of the two-qubit state.
    pub fn to_array(&self) -> [f64; 4] {
        [self.d11, self.d12, self.d21, self.d22]
    }

    pub fn min(&self) -> f64 {
        self.to_array().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// `h = f(d11) + f(d22) - f(d12) - f(d21)`.
    pub fn constraint_residual(&self, potential: &Potential) -> Result<f64> {
        self.validate()?;
        Ok(self.residual_unchecked(potential))
    }

    pub(crate) fn residual_unchecked(&self, potential: &Potential) -> f64 {
        let diagonal = potential.eval_unchecked(self.d11) + potential.eval_unchecked(self.d22);
        let cross = potential.eval_unchecked(self.d12) + potential.eval_unchecked(self.d21);
        diagonal - cross
    }
}

/// Positions of states 1 and 2 of body A and of body B: a point of R^12.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateConfiguration {
    a1: Vec3,
    a2: Vec3,
    b1: Vec3,
    b2: Vec3,
}

impl StateConfiguration {
    /// Fails unless every cross distance `|a_i - b_j|` is positive.
    pub fn new(a1: Vec3, a2: Vec3, b1: Vec3, b2: Vec3) -> Result<Self> {
        let cfg = Self { a1, a2, b1, b2 };
        if cfg.coordinates().iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidTrajectory(
                "configuration coordinates must be finite".into(),
            ));
        }
        cfg.distances_unchecked().validate()?;
        Ok(cfg)
    }

    /// From `[a1, a2, b1, b2]` flattened.
    pub fn from_coordinates(x: &[f64; 12]) -> Result<Self> {
        Self::new(
            [x[0], x[1], x[2]],
            [x[3], x[4], x[5]],
            [x[6], x[7], x[8]],
            [x[9], x[10], x[11]],
        )
    }

    pub fn coordinates(&self) -> [f64; 12] {
        let mut x = [0.0; 12];
        for (k, p) in [self.a1, self.a2, self.b1, self.b2].iter().enumerate() {
            x[3 * k..3 * k + 3].copy_from_slice(p);
        }
        x
    }

    pub fn a1(&self) -> Vec3 {
        self.a1
    }
    pub fn a2(&self) -> Vec3 {
        self.a2
    }
    pub fn b1(&self) -> Vec3 {
        self.b1
    }
    pub fn b2(&self) -> Vec3 {
        self.b2
    }

    pub fn distances(&self) -> Distances {
        self.distances_unchecked()
    }

    /// `(a, b)` position pairs in the order `11, 12, 21, 22`.
    fn cross_pairs(&self) -> [(Vec3, Vec3); 4] {
        [
            (self.a1, self.b1),
            (self.a1, self.b2),
            (self.a2, self.b1),
            (self.a2, self.b2),
        ]
    }

    fn distances_unchecked(&self) -> Distances {
        Distances {
            d11: distance(&self.a1, &self.b1),
            d12: distance(&self.a1, &self.b2),
            d21: distance(&self.a2, &self.b1),
            d22: distance(&self.a2, &self.b2),
        }
    }

    pub fn constraint_residual(&self, potential: &Potential) -> Result<f64> {
        self.distances().constraint_residual(potential)
    }
}

/// Central-difference gradient of `h` with respect to the twelve
/// coordinates `[a1, a2, b1, b2]`.
///
/// `step` defaults to `1e-6` times the smallest cross distance.
pub fn constraint_gradient(
    cfg: &StateConfiguration,
    potential: &Potential,
    step: Option<f64>,
) -> Result<[f64; 12]> {
    let step = step.unwrap_or(DEFAULT_GRADIENT_STEP * cfg.distances().min());
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::NonPositiveDistance(step));
    }
    let x = cfg.coordinates();
    let h_at = |x: &[f64; 12]| -> Result<f64> {
        StateConfiguration {
            a1: [x[0], x[1], x[2]],
            a2: [x[3], x[4], x[5]],
            b1: [x[6], x[7], x[8]],
            b2: [x[9], x[10], x[11]],
        }
        .distances_unchecked()
        .constraint_residual(potential)
    };
    let mut grad = [0.0; 12];
    for k in 0..12 {
        let mut plus = x;
        let mut minus = x;
        plus[k] += step;
        minus[k] -= step;
        grad[k] = (h_at(&plus)? - h_at(&minus)?) / (plus[k] - minus[k]);
    }
    Ok(grad)
}

/// Four states on one line: `d11 = x`, `d12 = d21 = x + dx`, `d22 = x + 2 dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollinearStatic {
    x: f64,
    dx: f64,
}

impl CollinearStatic {
    pub fn new(x: f64, dx: f64) -> Result<Self> {
        if !(x > 0.0 && x.is_finite() && dx.is_finite()) {
            return Err(Error::InvalidTrajectory(format!(
                "collinear separation must be positive and finite, got x = {x}, dx = {dx}"
            )));
        }
        if !(x + dx > 0.0 && x + 2.0 * dx > 0.0) {
            return Err(Error::NonPositiveDistance(x + 2.0 * dx));
        }
        Ok(Self { x, dx })
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn distances(&self) -> Distances {
        let mid = self.x + self.dx;
        Distances {
            d11: self.x,
            d12: mid,
            d21: mid,
            d22: self.x + 2.0 * self.dx,
        }
    }

    /// A1 at the origin, A2 at `-dx`, B1 at `x`, B2 at `x + dx` on the x axis.
    pub fn configuration(&self) -> StateConfiguration {
        StateConfiguration {
            a1: [0.0; 3],
            a2: [-self.dx, 0.0, 0.0],
            b1: [self.x, 0.0, 0.0],
            b2: [self.x + self.dx, 0.0, 0.0],
        }
    }
}

/// Body B approaches body A along the normal of two parallel planes at speed
/// `v` while spinning in its plane at angular velocity `omega`:
///
/// ```text
/// d11 = d22 = sqrt((L - v t)^2 + x0^2 sin^2(omega t / 2))
/// d12 = d21 = sqrt((L - v t)^2 + x0^2 cos^2(omega t / 2))
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatingApproach {
    separation: f64,
    speed: f64,
    angular_velocity: f64,
    state_separation: f64,
}

impl RotatingApproach {
    pub fn new(
        separation: f64,
        speed: f64,
        angular_velocity: f64,
        state_separation: f64,
    ) -> Result<Self> {
        if !(separation > 0.0 && separation.is_finite()) {
            return Err(Error::InvalidTrajectory(format!(
                "plane separation must be positive, got {separation}"
            )));
        }
        if !(speed >= 0.0 && speed.is_finite()) {
            return Err(Error::InvalidTrajectory(format!(
                "approach speed must be non-negative, got {speed}"
            )));
        }
        if !angular_velocity.is_finite() {
            return Err(Error::InvalidTrajectory(format!(
                "angular velocity must be finite, got {angular_velocity}"
            )));
        }
        if !(state_separation >= 0.0 && state_separation.is_finite()) {
            return Err(Error::InvalidTrajectory(format!(
                "state separation must be non-negative, got {state_separation}"
            )));
        }
        Ok(Self {
            separation,
            speed,
            angular_velocity,
            state_separation,
        })
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }
    pub fn speed(&self) -> f64 {
        self.speed
    }
    pub fn angular_velocity(&self) -> f64 {
        self.angular_velocity
    }
    pub fn state_separation(&self) -> f64 {
        self.state_separation
    }

    /// `L / v`, when the planes meet. `None` for `v = 0`.
    pub fn collision_time(&self) -> Option<f64> {
        (self.speed > 0.0).then(|| self.separation / self.speed)
    }

    /// First time a state-dependent distance vanishes.
    ///
    /// All distances are bounded below by `|L - v t|`, and at `t = L / v`
    /// the smallest one is `x0 * min(|sin(omega t / 2)|, |cos(omega t / 2)|)`.
    /// So the horizon is `L / v` when that vanishes and unbounded otherwise.
    pub fn horizon(&self) -> f64 {
        let Some(t_bar) = self.collision_time() else {
            return f64::INFINITY;
        };
        let half_angle = 0.5 * self.angular_velocity * t_bar;
        let closest = self.state_separation * half_angle.sin().abs().min(half_angle.cos().abs());
        if closest <= COLLISION_RESOLUTION * self.separation {
            t_bar
        } else {
            f64::INFINITY
        }
    }

    pub fn distances(&self, t: f64) -> Distances {
        let plane = self.separation - self.speed * t;
        let half_angle = 0.5 * self.angular_velocity * t;
        let same = plane.hypot(self.state_separation * half_angle.sin());
        let cross = plane.hypot(self.state_separation * half_angle.cos());
        Distances {
            d11: same,
            d12: cross,
            d21: cross,
            d22: same,
        }
    }

    /// A rests in the plane `z = 0` with its states at `(±x0/2, 0, 0)`; B's
    /// midpoint sits at `(0, 0, L - v t)` and its axis is turned by `omega t`.
    pub fn configuration(&self, t: f64) -> StateConfiguration {
        let r = 0.5 * self.state_separation;
        let z = self.separation - self.speed * t;
        let (s, c) = (self.angular_velocity * t).sin_cos();
        StateConfiguration {
            a1: [r, 0.0, 0.0],
            a2: [-r, 0.0, 0.0],
            b1: [r * c, r * s, z],
            b2: [-r * c, -r * s, z],
        }
    }
}

/// Configurations sampled at strictly increasing times, with positions
/// interpolated linearly in between.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrajectory {
    times: Vec<f64>,
    configurations: Vec<StateConfiguration>,
}

/// Smallest `|p + s q|` for `s` in `[0, 1]`.
fn min_norm_on_segment(p: &Vec3, q: &Vec3) -> f64 {
    let qq = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
    let s = if qq > 0.0 {
        (-(p[0] * q[0] + p[1] * q[1] + p[2] * q[2]) / qq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let at = [p[0] + s * q[0], p[1] + s * q[1], p[2] + s * q[2]];
    distance(&at, &[0.0; 3])
}

impl SampledTrajectory {
    /// Needs at least two samples. Fails if interpolation between two
    /// samples would bring any pair of states into contact.
    pub fn new(samples: Vec<(f64, StateConfiguration)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidTrajectory(
                "a sampled trajectory needs at least two samples".into(),
            ));
        }
        if samples[0].0 < 0.0 || !samples[0].0.is_finite() {
            return Err(Error::InvalidTrajectory(format!(
                "sample times must be finite and non-negative, got {}",
                samples[0].0
            )));
        }
        for w in samples.windows(2) {
            let ((t0, c0), (t1, c1)) = (&w[0], &w[1]);
            if !(t1 > t0 && t1.is_finite()) {
                return Err(Error::InvalidTrajectory(format!(
                    "sample times must be strictly increasing ({t0} then {t1})"
                )));
            }
            for ((a0, b0), (a1, b1)) in c0.cross_pairs().into_iter().zip(c1.cross_pairs()) {
                let start = [a0[0] - b0[0], a0[1] - b0[1], a0[2] - b0[2]];
                let end = [a1[0] - b1[0], a1[1] - b1[1], a1[2] - b1[2]];
                let drift = [end[0] - start[0], end[1] - start[1], end[2] - start[2]];
                let closest = min_norm_on_segment(&start, &drift);
                if closest <= 0.0 {
                    return Err(Error::NonPositiveDistance(closest));
                }
            }
        }
        let (times, configurations) = samples.into_iter().unzip();
        Ok(Self {
            times,
            configurations,
        })
    }

    /// Reads `t, a1x, a1y, a1z, a2x, a2y, a2z, b1x, b1y, b1z, b2x, b2y, b2z`
    /// rows. A header row is expected.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut samples = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::InvalidTrajectory(e.to_string()))?;
            if record.len() != 13 {
                return Err(Error::InvalidTrajectory(format!(
                    "row {}: expected 13 columns (time and 12 coordinates), got {}",
                    line + 1,
                    record.len()
                )));
            }
            let mut values = [0.0; 13];
            for (slot, field) in values.iter_mut().zip(record.iter()) {
                *slot = field.parse().map_err(|_| {
                    Error::InvalidTrajectory(format!("row {}: bad number {field:?}", line + 1))
                })?;
            }
            let mut coords = [0.0; 12];
            coords.copy_from_slice(&values[1..]);
            samples.push((values[0], StateConfiguration::from_coordinates(&coords)?));
        }
        Self::new(samples)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn configuration(&self, t: f64) -> StateConfiguration {
        let last = self.times.len() - 1;
        let i = self.times.partition_point(|&s| s <= t).clamp(1, last) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let (c0, c1) = (&self.configurations[i], &self.configurations[i + 1]);
        StateConfiguration {
            a1: lerp(&c0.a1, &c1.a1, s),
            a2: lerp(&c0.a2, &c1.a2, s),
            b1: lerp(&c0.b1, &c1.b1, s),
            b2: lerp(&c0.b2, &c1.b2, s),
        }
    }
}

/// How the four states move in time.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    Static(StateConfiguration),
    CollinearStatic(CollinearStatic),
    RotatingApproach(RotatingApproach),
    Sampled(SampledTrajectory),
}

impl Trajectory {
    /// `t_max`: the trajectory is defined on `[0, t_max)`. Sampled
    /// trajectories are defined on `[first sample, last sample]`.
    pub fn horizon(&self) -> f64 {
        match self {
            Self::Static(_) | Self::CollinearStatic(_) => f64::INFINITY,
            Self::RotatingApproach(r) => r.horizon(),
            Self::Sampled(s) => s.end(),
        }
    }

    pub fn start(&self) -> f64 {
        match self {
            Self::Sampled(s) => s.start(),
            _ => 0.0,
        }
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        let t_max = self.horizon();
        let inside = match self {
            Self::Sampled(s) => t >= s.start() && t <= t_max,
            _ => t >= 0.0 && t < t_max,
        };
        if inside {
            Ok(())
        } else {
            Err(Error::OutOfHorizon { t, t_max })
        }
    }

    pub fn distances_at(&self, t: f64) -> Result<Distances> {
        self.check_time(t)?;
        Ok(self.distances_unchecked(t))
    }

    pub(crate) fn distances_unchecked(&self, t: f64) -> Distances {
        match self {
            Self::Static(cfg) => cfg.distances(),
            Self::CollinearStatic(c) => c.distances(),
            Self::RotatingApproach(r) => r.distances(t),
            Self::Sampled(s) => s.configuration(t).distances(),
        }
    }

    pub fn configuration_at(&self, t: f64) -> Result<StateConfiguration> {
        self.check_time(t)?;
        Ok(match self {
            Self::Static(cfg) => *cfg,
            Self::CollinearStatic(c) => c.configuration(),
            Self::RotatingApproach(r) => r.configuration(t),
            Self::Sampled(s) => s.configuration(t),
        })
    }

    /// `a`, every point in `(a, b)` where the distances have a kink, and `b`.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut points = vec![a];
        if let Self::Sampled(s) = self {
            points.extend(s.times().iter().copied().filter(|&t| t > a && t < b));
        }
        points.push(b);
        points
    }
}
