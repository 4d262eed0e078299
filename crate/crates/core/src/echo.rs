//! Multipole echo: cancel the phase of the dominant inverse-power term so
//! that the entanglement left at the cancellation time comes from the next
//! term of the expansion.
//!
//! Body B approaches at speed `v` and spins at angular velocity `ω` (see
//! [`RotatingApproach`]). On that path `d11 = d22` and `d12 = d21`, so the
//! phase of the term `c_n d^(-n)` is
//!
//! ```text
//! φ_n(t) = 2 c_n ∫_0^t [d11(τ)^(-n) - d12(τ)^(-n)] dτ
//! ```
//!
//! The integrand has the sign of `cos(ω τ)` for every `n`, so each `φ_n` is
//! monotone between consecutive zeros of `cos(ω τ)`.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::RotatingApproach;
use crate::numerics::{
    bisect, integrate, sign_changes, BisectionStop, Bracket, CumulativeIntegral, QuadratureSpec,
};
use crate::potentials::{inverse_power, LaurentSeries};

/// Scan nodes per half turn `π/ω` when looking for the null time.
pub const SCAN_POINTS_PER_HALF_TURN: usize = 64;
/// Upper bound on scan nodes for one null-time search.
pub const MAX_SCAN_POINTS: usize = 1_000_000;
/// The search stops this fraction of `t̄` short of the collision.
pub const COLLISION_GUARD: f64 = 1e-6;
/// Bisection on `φ_lead` continues until its magnitude is below this.
pub const NULL_RESIDUAL: f64 = 1e-12;
/// Final bracket width around `t*`, relative to `t̄`.
pub const NULL_BRACKET: f64 = 1e-12;

/// Geometry and the two inverse-power terms the protocol works with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoParams {
    /// Initial plane separation `L`.
    pub separation: f64,
    /// Approach speed `v`.
    pub speed: f64,
    /// Spin rate `ω` of body B.
    pub angular_velocity: f64,
    /// Distance `x0` between the two states of each body.
    pub state_separation: f64,
    /// Order `n1` of the term whose phase is cancelled.
    pub leading_term: u32,
    /// Order `n2` of the term whose phase is measured.
    pub probe_term: u32,
    pub leading_coefficient: f64,
    pub probe_coefficient: f64,
}

impl EchoParams {
    /// Leading `1/d` and probe `1/d²` terms with unit coefficients.
    pub fn new(separation: f64, speed: f64, angular_velocity: f64, state_separation: f64) -> Self {
        Self {
            separation,
            speed,
            angular_velocity,
            state_separation,
            leading_term: 1,
            probe_term: 2,
            leading_coefficient: 1.0,
            probe_coefficient: 1.0,
        }
    }

    pub fn with_terms(mut self, leading: (u32, f64), probe: (u32, f64)) -> Self {
        (self.leading_term, self.leading_coefficient) = leading;
        (self.probe_term, self.probe_coefficient) = probe;
        self
    }

    pub fn with_motion(mut self, speed: f64, angular_velocity: f64) -> Self {
        self.speed = speed;
        self.angular_velocity = angular_velocity;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidEchoParams(msg));
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return fail(format!(
                "separation must be positive, got {}",
                self.separation
            ));
        }
        if !(self.state_separation > 0.0 && self.state_separation.is_finite()) {
            return fail(format!(
                "state separation must be positive, got {}",
                self.state_separation
            ));
        }
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return fail(format!("speed must be non-negative, got {}", self.speed));
        }
        if !self.angular_velocity.is_finite() {
            return fail(format!(
                "angular velocity must be finite, got {}",
                self.angular_velocity
            ));
        }
        if self.leading_term == 0 || self.probe_term <= self.leading_term {
            return fail(format!(
                "need 0 < leading term < probe term, got {} and {}",
                self.leading_term, self.probe_term
            ));
        }
        if !(self.leading_coefficient.is_finite() && self.probe_coefficient.is_finite()) {
            return fail("term coefficients must be finite".into());
        }
        Ok(())
    }

    /// `t̄ = L / v`. `None` when `v = 0`.
    pub fn collision_time(&self) -> Option<f64> {
        (self.speed > 0.0).then(|| self.separation / self.speed)
    }
}

/// Where the leading phase cancels, and what the probe term left behind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullMeasurement {
    pub t_star: f64,
    pub leading_phase: f64,
    pub probe_phase: f64,
}

/// The echo protocol for one parameter set.
#[derive(Debug, Clone)]
pub struct EchoProtocol {
    params: EchoParams,
    trajectory: RotatingApproach,
    quadrature: QuadratureSpec,
}

impl EchoProtocol {
    pub fn new(params: EchoParams) -> Result<Self> {
        params.validate()?;
        let trajectory = RotatingApproach::new(
            params.separation,
            params.speed,
            params.angular_velocity,
            params.state_separation,
        )?;
        Ok(Self {
            params,
            trajectory,
            quadrature: QuadratureSpec::default(),
        })
    }

    pub fn with_quadrature(mut self, spec: QuadratureSpec) -> Self {
        self.quadrature = spec;
        self
    }

    pub fn params(&self) -> &EchoParams {
        &self.params
    }

    pub fn trajectory(&self) -> &RotatingApproach {
        &self.trajectory
    }

    /// `c_n` for the leading or probe order.
    pub fn coefficient(&self, n: u32) -> Result<f64> {
        if n == self.params.leading_term {
            Ok(self.params.leading_coefficient)
        } else if n == self.params.probe_term {
            Ok(self.params.probe_coefficient)
        } else {
            Err(Error::MissingTerm(n))
        }
    }

    fn term_integrand(&self, n: u32, coefficient: f64) -> impl Fn(f64) -> f64 + '_ {
        move |tau| {
            let d = self.trajectory.distances(tau);
            2.0 * coefficient * (inverse_power(d.d11, n) - inverse_power(d.d12, n))
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let t_max = self.trajectory.horizon();
        if t >= 0.0 && t < t_max {
            Ok(())
        } else {
            Err(Error::OutOfHorizon { t, t_max })
        }
    }

    /// `φ_n(t)` for an arbitrary coefficient.
    pub fn term_phase_with(&self, n: u32, coefficient: f64, t: f64) -> Result<f64> {
        if n == 0 {
            return Err(Error::MissingTerm(n));
        }
        self.check_time(t)?;
        integrate(
            self.term_integrand(n, coefficient),
            0.0,
            t,
            &self.quadrature,
        )
    }

    /// `φ_n(t)` for the leading or probe term.
    pub fn term_phase(&self, n: u32, t: f64) -> Result<f64> {
        self.term_phase_with(n, self.coefficient(n)?, t)
    }

    /// Phase of every term of `series` at time `t`, for checking how well
    /// several leading orders cancel together.
    pub fn term_residuals(&self, series: &LaurentSeries, t: f64) -> Result<Vec<(u32, f64)>> {
        series
            .terms()
            .map(|(n, c)| Ok((n, self.term_phase_with(n, c, t)?)))
            .collect()
    }

    /// End of the null-time search and the time scale it is measured in.
    ///
    /// For `v > 0` that is just short of the collision `t̄`. Without
    /// approach the search covers one full turn `2π/ω`.
    pub fn search_window(&self) -> Result<(f64, f64)> {
        let scale = match self.params.collision_time() {
            Some(t_bar) => t_bar.min(self.trajectory.horizon()),
            None if self.params.angular_velocity != 0.0 => {
                2.0 * PI / self.params.angular_velocity.abs()
            }
            None => return Err(Error::NoRootFound),
        };
        Ok((scale - COLLISION_GUARD * scale, scale))
    }

    /// Scan nodes on `[0, end]`: a uniform grid with
    /// [`SCAN_POINTS_PER_HALF_TURN`] nodes per `π/ω`, plus every zero of
    /// `cos(ω t)` so each monotone stretch of `φ_n` is bracketed.
    fn scan_grid(&self, end: f64) -> Vec<f64> {
        let omega = self.params.angular_velocity.abs();
        let half_turns = end * omega / PI;
        let cells = ((SCAN_POINTS_PER_HALF_TURN as f64 * half_turns).ceil() as usize)
            .clamp(SCAN_POINTS_PER_HALF_TURN, MAX_SCAN_POINTS - 1);
        let step = end / cells as f64;
        let mut grid: Vec<f64> = (0..cells).map(|i| step * i as f64).collect();
        grid.push(end);
        if omega > 0.0 {
            let mut k = 0.0;
            loop {
                let turning = (2.0 * k + 1.0) * PI / (2.0 * omega);
                if turning >= end {
                    break;
                }
                grid.push(turning);
                k += 1.0;
            }
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }

    /// `t*`: the last zero of the leading-term phase before the collision.
    pub fn find_null_time(&self) -> Result<f64> {
        let (end, scale) = self.search_window()?;
        let grid = self.scan_grid(end);
        let n = self.params.leading_term;
        let mut phase = CumulativeIntegral::new(
            self.term_integrand(n, self.params.leading_coefficient),
            0.0,
            self.quadrature,
        );
        // t = 0 is a trivial zero; start the scan after it.
        let nodes = &grid[1..];
        let values = nodes
            .iter()
            .map(|&t| phase.value_at(t))
            .collect::<Result<Vec<_>>>()?;
        let last = sign_changes(&values).pop().ok_or(Error::NoRootFound)?;
        match last {
            Bracket::Exact(i) => Ok(nodes[i]),
            Bracket::Interval(i) => bisect(
                |t| phase.value_at(t),
                nodes[i],
                nodes[i + 1],
                values[i],
                values[i + 1],
                BisectionStop {
                    width: NULL_BRACKET * scale,
                    residual: Some(NULL_RESIDUAL),
                },
            ),
        }
    }

    /// Runs the protocol: finds `t*` and evaluates both phases there.
    pub fn measure(&self) -> Result<NullMeasurement> {
        let t_star = self.find_null_time()?;
        Ok(NullMeasurement {
            t_star,
            leading_phase: self.term_phase(self.params.leading_term, t_star)?,
            probe_phase: self.term_phase(self.params.probe_term, t_star)?,
        })
    }

    /// `φ_probe(t*)`.
    pub fn probe_phase_at_null(&self) -> Result<f64> {
        let t_star = self.find_null_time()?;
        self.term_phase(self.params.probe_term, t_star)
    }
}

/// One `(ω, v)` point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoSweepRecord {
    pub omega: f64,
    pub v: f64,
    /// `NaN` when not converged.
    pub t_star: f64,
    pub t_bar: f64,
    /// `NaN` when not converged.
    pub phi2_at_t_star: f64,
    pub converged: bool,
}

impl EchoSweepRecord {
    /// `log10 |φ_probe(t*)|`.
    pub fn log10_phi2(&self) -> f64 {
        self.phi2_at_t_star.abs().log10()
    }
}

fn sweep_point(
    template: &EchoParams,
    quadrature: &QuadratureSpec,
    omega: f64,
    v: f64,
) -> EchoSweepRecord {
    let params = template.with_motion(v, omega);
    let outcome = EchoProtocol::new(params).and_then(|p| {
        let p = p.with_quadrature(*quadrature);
        let t_star = p.find_null_time()?;
        Ok((t_star, p.term_phase(params.probe_term, t_star)?))
    });
    let (t_star, phi2, converged) = match outcome {
        Ok((t, phi)) => (t, phi, true),
        Err(_) => (f64::NAN, f64::NAN, false),
    };
    EchoSweepRecord {
        omega,
        v,
        t_star,
        t_bar: params.separation / v,
        phi2_at_t_star: phi2,
        converged,
    }
}

/// Runs the protocol on every `(ω, v)` pair, in parallel on the current
/// rayon pool.
///
/// Records come back sorted by `ω`, then `v`, whatever the scheduling.
/// Points where no null time exists are flagged with `converged = false`.
pub fn sweep(
    template: &EchoParams,
    quadrature: &QuadratureSpec,
    v_grid: &[f64],
    omega_grid: &[f64],
) -> Result<Vec<EchoSweepRecord>> {
    if v_grid.is_empty() || omega_grid.is_empty() {
        return Err(Error::InvalidEchoParams(
            "sweep grids must be non-empty".into(),
        ));
    }
    if let Some(bad) = v_grid
        .iter()
        .chain(omega_grid)
        .find(|x| !(**x > 0.0 && x.is_finite()))
    {
        return Err(Error::InvalidEchoParams(format!(
            "sweep speeds and angular velocities must be positive, got {bad}"
        )));
    }
    template.with_motion(v_grid[0], omega_grid[0]).validate()?;
    quadrature.validate()?;

    let mut omegas = omega_grid.to_vec();
    let mut speeds = v_grid.to_vec();
    omegas.sort_by(f64::total_cmp);
    speeds.sort_by(f64::total_cmp);
    let points: Vec<(f64, f64)> = omegas
        .iter()
        .flat_map(|&w| speeds.iter().map(move |&v| (w, v)))
        .collect();
    Ok(points
        .par_iter()
        .map(|&(w, v)| sweep_point(template, quadrature, w, v))
        .collect())
}

/// Formats a double with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Writes `omega,v,t_star,t_bar,phi2,converged` rows, optionally followed by
/// a `log10_phi2` column.
pub fn write_sweep_csv<W: Write>(
    records: &[EchoSweepRecord],
    mut out: W,
    with_log10: bool,
) -> io::Result<()> {
    write!(out, "omega,v,t_star,t_bar,phi2,converged")?;
    if with_log10 {
        write!(out, ",log10_phi2")?;
    }
    writeln!(out)?;
    for r in records {
        write!(
            out,
            "{},{},{},{},{},{}",
            format_float(r.omega),
            format_float(r.v),
            format_float(r.t_star),
            format_float(r.t_bar),
            format_float(r.phi2_at_t_star),
            r.converged
        )?;
        if with_log10 {
            write!(out, ",{}", format_float(r.log10_phi2()))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
