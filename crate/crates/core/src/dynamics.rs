//! Exact evolution under the diagonal, state-dependent Hamiltonian
//! `H = Σ f(d_ab(t)) |a,b><a,b|` and the entanglement it builds up.
//!
//! Since `H` is diagonal at all times, each basis amplitude only picks up
//! the phase `exp(-i θ_ab(t))` with `θ_ab(t) = ∫_0^t f(d_ab(τ)) dτ` (ħ = 1).
//! Global phases are kept.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Trajectory;
use crate::numerics::{integrate_piecewise, QuadratureSpec};
use crate::potentials::Potential;

/// Largest deviation of the squared norm from one that
/// [`TwoQubitState::concurrence`] accepts.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Coefficients of `H = g1 1⊗1 + g2 σz⊗1 + g3 1⊗σz + g4 σz⊗σz`, with
/// `σz = +1` on state 1 and `-1` on state 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingCoefficients {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub g4: f64,
}

impl CouplingCoefficients {
    /// Decomposes the four diagonal energies `f(d11), f(d12), f(d21), f(d22)`.
    pub fn from_energies(f11: f64, f12: f64, f21: f64, f22: f64) -> Self {
        Self {
            g1: (f11 + f12 + f21 + f22) / 4.0,
            g2: (f11 + f12 - f21 - f22) / 4.0,
            g3: (f11 - f12 + f21 - f22) / 4.0,
            g4: (f11 - f12 - f21 + f22) / 4.0,
        }
    }

    /// `[f(d11), f(d12), f(d21), f(d22)]`.
    pub fn energies(&self) -> [f64; 4] {
        let Self { g1, g2, g3, g4 } = *self;
        [
            g1 + g2 + g3 + g4,
            g1 + g2 - g3 - g4,
            g1 - g2 + g3 - g4,
            g1 - g2 - g3 + g4,
        ]
    }
}

/// Pure state `a|1,1> + b|1,2> + c|2,1> + d|2,2>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    amplitudes: [Complex64; 4],
}

impl TwoQubitState {
    /// Fails with [`Error::NotNormalized`] when the squared norm is off by
    /// more than [`NORM_TOLERANCE`].
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self> {
        let state = Self { amplitudes };
        state.check_normalized()?;
        Ok(state)
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm = amplitudes
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized(norm * norm));
        }
        Ok(Self {
            amplitudes: amplitudes.map(|a| a / norm),
        })
    }

    /// `|a, b>` for `a, b` in `{1, 2}`.
    pub fn basis(a: u8, b: u8) -> Self {
        assert!(
            matches!(a, 1 | 2) && matches!(b, 1 | 2),
            "states are labelled 1 and 2"
        );
        let mut amplitudes = [Complex64::new(0.0, 0.0); 4];
        amplitudes[usize::from(2 * (a - 1) + (b - 1))] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// `(|1> + |2>)/√2 ⊗ (|1> + |2>)/√2`.
    pub fn symmetric_product() -> Self {
        Self {
            amplitudes: [Complex64::new(0.5, 0.0); 4],
        }
    }

    /// Product state built from single-body amplitudes `(α1, α2)` and `(β1, β2)`.
    pub fn product(a: [Complex64; 2], b: [Complex64; 2]) -> Result<Self> {
        Self::normalized([a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
    }

    /// `(|1,1> + |2,2>)/√2`.
    pub fn bell() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        Self {
            amplitudes: [h, z, z, h],
        }
    }

    /// `(e^{-iφ}/2) (e^{2iφ}|1,1> + |1,2> + |2,1> + e^{2iφ}|2,2>)`: the
    /// symmetric product state after the `σz⊗σz` part of the evolution has
    /// accumulated the phase `φ`.
    pub fn entangling_phase_state(phi: f64) -> Self {
        let outer = Complex64::from_polar(0.5, -phi);
        let diagonal = outer * Complex64::from_polar(1.0, 2.0 * phi);
        Self {
            amplitudes: [diagonal, outer, outer, diagonal],
        }
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    fn check_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE || !n.is_finite() {
            Err(Error::NotNormalized(n))
        } else {
            Ok(())
        }
    }

    /// Multiplies amplitude `k` by `exp(-i θ_k)`.
    pub fn apply_diagonal_phases(&self, theta: [f64; 4]) -> Self {
        let mut amplitudes = self.amplitudes;
        for (amp, th) in amplitudes.iter_mut().zip(theta) {
            *amp *= Complex64::from_polar(1.0, -th);
        }
        Self { amplitudes }
    }

    /// Pure-state concurrence `2 |a d - b c|`.
    pub fn concurrence(&self) -> Result<f64> {
        self.check_normalized()?;
        let [a, b, c, d] = self.amplitudes;
        Ok((2.0 * (a * d - b * c).norm()).min(1.0))
    }

    /// `|<self|other>|`, insensitive to global phase.
    pub fn overlap(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(x, y)| x.conj() * y)
            .sum::<Complex64>()
            .norm()
    }
}

/// A trajectory and a potential, with the quadrature settings used to
/// accumulate phases along it.
#[derive(Debug, Clone)]
pub struct Simulation {
    trajectory: Trajectory,
    potential: Potential,
    quadrature: QuadratureSpec,
}

impl Simulation {
    pub fn new(trajectory: Trajectory, potential: Potential) -> Self {
        Self {
            trajectory,
            potential,
            quadrature: QuadratureSpec::default(),
        }
    }

    pub fn with_quadrature(mut self, spec: QuadratureSpec) -> Self {
        self.quadrature = spec;
        self
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    fn integrate_to<F: FnMut(f64) -> f64>(&self, t: f64, integrand: F) -> Result<f64> {
        self.trajectory.check_time(t)?;
        let start = self.trajectory.start();
        let points = self.trajectory.breakpoints(start, t);
        integrate_piecewise(integrand, &points, &self.quadrature)
    }

    /// `[θ11, θ12, θ21, θ22]` at time `t`.
    ///
    /// Only `θ11` is integrated directly; the others are offsets from it, so
    /// relative phases keep their accuracy when the absolute phases are large.
    pub fn phases(&self, t: f64) -> Result<[f64; 4]> {
        let energies = |tau: f64| {
            self.trajectory
                .distances_unchecked(tau)
                .to_array()
                .map(|d| self.potential.eval_unchecked(d))
        };
        let base = self.integrate_to(t, |tau| energies(tau)[0])?;
        let mut theta = [base; 4];
        for (k, slot) in theta.iter_mut().enumerate().skip(1) {
            *slot += self.integrate_to(t, |tau| {
                let f = energies(tau);
                f[k] - f[0]
            })?;
        }
        Ok(theta)
    }

    /// The exact state at time `t`, starting from `initial`.
    pub fn evolve(&self, t: f64, initial: &TwoQubitState) -> Result<TwoQubitState> {
        Ok(initial.apply_diagonal_phases(self.phases(t)?))
    }

    /// `Φ(t) = ∫_0^t [f(d11) + f(d22) - f(d12) - f(d21)] dτ`.
    ///
    /// For the symmetric product state the exact concurrence at time `t` is
    /// `|sin(Φ/2)|`.
    pub fn entangling_phase(&self, t: f64) -> Result<f64> {
        self.integrate_to(t, |tau| {
            self.trajectory
                .distances_unchecked(tau)
                .residual_unchecked(&self.potential)
        })
    }

    /// Couplings of the Hamiltonian at time `t`.
    pub fn couplings_at(&self, t: f64) -> Result<CouplingCoefficients> {
        let d = self.trajectory.distances_at(t)?;
        let f = |x| self.potential.eval_unchecked(x);
        Ok(CouplingCoefficients::from_energies(
            f(d.d11),
            f(d.d12),
            f(d.d21),
            f(d.d22),
        ))
    }
}

/// Evolves `initial` to time `t` with default quadrature settings.
pub fn evolve(
    trajectory: &Trajectory,
    potential: &Potential,
    t: f64,
    initial: &TwoQubitState,
) -> Result<TwoQubitState> {
    Simulation::new(trajectory.clone(), potential.clone()).evolve(t, initial)
}

/// `Φ(t)` with default quadrature settings. See [`Simulation::entangling_phase`].
pub fn entangling_phase(trajectory: &Trajectory, potential: &Potential, t: f64) -> Result<f64> {
    Simulation::new(trajectory.clone(), potential.clone()).entangling_phase(t)
}

/// Leading-order phase for a power law on the collinear static geometry,
/// `λ t α(α+1) δx² / x^(2+α)`, valid for `δx ≪ x`.
pub fn collinear_power_law_phase(coupling: f64, exponent: f64, x: f64, dx: f64, t: f64) -> f64 {
    coupling * t * exponent * (exponent + 1.0) * dx * dx / x.powf(2.0 + exponent)
}
