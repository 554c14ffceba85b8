//! Transition probability of a Gaussian wavepacket under one square pulse.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::breit_rabi::FieldConfig;
use crate::dynamics::WavepacketState;
use crate::error::{Error, Result};
use crate::pulse::{coupling_omega0, rabi_frequency, PulseSpec};
use crate::quadrature::{integrate, Tolerance};

/// Initial number of equal pieces the integration window is split into.
const INITIAL_PIECES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSettings {
    /// Half-width of the integration window in units of the RMS width.
    pub window_sigmas: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            window_sigmas: 8.0,
            rel_tol: 1e-10,
            max_subdivisions: 1 << 15,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_sigmas >= 5.0) {
            return Err(Error::invalid("window_sigmas", "must be at least 5"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::invalid("rel_tol", "must lie in (0, 1)"));
        }
        if self.max_subdivisions < INITIAL_PIECES {
            return Err(Error::invalid(
                "max_subdivisions",
                format!("must be at least {INITIAL_PIECES}"),
            ));
        }
        Ok(())
    }
}

/// Probability with quadrature diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityEstimate {
    pub probability: f64,
    /// Estimated absolute quadrature error.
    pub error: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

/// Rabi formula for a point particle at `z`:
/// `(2|Omega_0| / Omega_R)^2 sin^2(Omega_R tau / 2)`.
pub fn point_probability(z: f64, pulse: &PulseSpec, cfg: &FieldConfig) -> f64 {
    let rabi = rabi_frequency(z, pulse, cfg);
    let envelope = 2.0 * coupling_omega0(pulse) / rabi;
    let s = (0.5 * rabi * pulse.tau).sin();
    envelope * envelope * s * s
}

/// The Rabi formula averaged over the Gaussian position density of `state`.
pub fn transition_probability(
    state: &WavepacketState,
    pulse: &PulseSpec,
    cfg: &FieldConfig,
    q: &QuadratureSettings,
) -> Result<ProbabilityEstimate> {
    q.validate()?;
    if !(state.dz > 0.0) {
        return Err(Error::invalid("dz", "wavepacket width must be positive"));
    }
    let (center, width) = (state.z, state.dz);
    let norm = 1.0 / (width * (2.0 * PI).sqrt());
    let density = |z: f64| {
        let u = (z - center) / width;
        norm * (-0.5 * u * u).exp()
    };
    let half = q.window_sigmas * width;
    let tol = Tolerance {
        rel: q.rel_tol,
        // Below the resolution of any probability we report.
        abs: 1e-15,
        max_subdivisions: q.max_subdivisions,
    };
    let result = integrate(
        |z| density(z) * point_probability(z, pulse, cfg),
        center - half,
        center + half,
        INITIAL_PIECES,
        tol,
    )?;
    Ok(ProbabilityEstimate {
        probability: result.value.clamp(0.0, 1.0),
        error: result.error,
        intervals: result.intervals,
        evaluations: result.evaluations,
    })
}
