//! Center-of-mass motion between pulses.
//!
//! Positive z points up. Accelerations are reported downward-positive, so an
//! atom with acceleration `g` follows `z(t) = z0 + v0 t - g t^2 / 2`.

use serde::Serialize;

use crate::breit_rabi::{
    kappa, reduced_eigenvalue_slope, FieldConfig, Level, Sigma, StretchedBranch,
};
use crate::constants::CONSTANTS;
use crate::error::{Error, Result};

/// Largest step used when integrating motion in the lower level.
pub const MAX_STEP: f64 = 10e-6;

/// Gaussian center-of-mass state plus internal level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WavepacketState {
    /// Expected position (m).
    pub z: f64,
    /// Expected velocity `<P>/M` (m/s).
    pub v: f64,
    /// RMS position width at time `t` (m).
    pub dz: f64,
    /// RMS momentum width (kg m/s); constant in a uniform force.
    pub dp: f64,
    pub level: Level,
    pub sigma: Sigma,
    /// Current time (s).
    pub t: f64,
    /// Time at which the packet had minimum uncertainty.
    pub t_ref: f64,
    /// RMS width at `t_ref`.
    pub dz_ref: f64,
}

impl WavepacketState {
    /// Minimum-uncertainty packet at time `t`.
    pub fn coherent(z: f64, v: f64, dz: f64, level: Level, sigma: Sigma, t: f64) -> Result<Self> {
        if !(dz > 0.0 && dz.is_finite()) {
            return Err(Error::invalid(
                "dz",
                format!("RMS width must be positive, got {dz}"),
            ));
        }
        Ok(Self {
            z,
            v,
            dz,
            dp: CONSTANTS.hbar / (2.0 * dz),
            level,
            sigma,
            t,
            t_ref: t,
            dz_ref: dz,
        })
    }

    pub fn branch(&self) -> StretchedBranch {
        StretchedBranch::new(self.sigma, self.level)
    }

    /// Same motional state after an internal transition.
    pub fn with_level(self, level: Level) -> Self {
        Self { level, ..self }
    }
}

/// Constant acceleration in the upper level: `g0 + sigma * eta * g_sum * gamma1 / M`.
pub fn g_effective(cfg: &FieldConfig, level: Level, sigma: Sigma) -> Result<f64> {
    if level != Level::Upper {
        return Err(Error::LevelMismatch { expected: "F+" });
    }
    let scale = cfg.scale();
    Ok(CONSTANTS.g0 + sigma.sign() * cfg.eta * scale.g_sum * scale.gamma1 / cfg.species.mass)
}

/// Downward-positive acceleration `g0 + (1/M) dV/dz` at position `z`.
pub fn acceleration_at(cfg: &FieldConfig, level: Level, sigma: Sigma, z: f64) -> f64 {
    let branch = StretchedBranch::new(sigma, level);
    let dv_dz = cfg.species.hyperfine_energy()
        * kappa(cfg)
        * reduced_eigenvalue_slope(branch, cfg.kz(z), &cfg.species);
    CONSTANTS.g0 + dv_dz / cfg.species.mass
}

/// Fixed-step RK4 for `z'' = -accel(z)`. Returns `(z, v)` after `duration`.
pub fn integrate_rk4<A: Fn(f64) -> f64>(
    z: f64,
    v: f64,
    duration: f64,
    max_step: f64,
    accel: A,
) -> (f64, f64) {
    if duration <= 0.0 {
        return (z, v);
    }
    let steps = (duration / max_step).ceil().max(1.0) as usize;
    let h = duration / steps as f64;
    let (mut z, mut v) = (z, v);
    for _ in 0..steps {
        let k1z = v;
        let k1v = -accel(z);
        let k2z = v + 0.5 * h * k1v;
        let k2v = -accel(z + 0.5 * h * k1z);
        let k3z = v + 0.5 * h * k2v;
        let k3v = -accel(z + 0.5 * h * k2z);
        let k4z = v + h * k3v;
        let k4v = -accel(z + h * k3z);
        z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    (z, v)
}

/// Advances `<Z>` and `<P>/M` by `dt`; widths are left untouched.
pub fn evolve_expected(
    state: &WavepacketState,
    dt: f64,
    cfg: &FieldConfig,
) -> Result<WavepacketState> {
    if !(dt >= 0.0) {
        return Err(Error::invalid("dt", "must be non-negative"));
    }
    if dt == 0.0 {
        return Ok(*state);
    }
    let (z, v) = match state.level {
        Level::Upper => {
            let g = g_effective(cfg, Level::Upper, state.sigma)?;
            (state.z + state.v * dt - 0.5 * g * dt * dt, state.v - g * dt)
        }
        Level::Lower => integrate_rk4(state.z, state.v, dt, MAX_STEP, |z| {
            acceleration_at(cfg, Level::Lower, state.sigma, z)
        }),
    };
    Ok(WavepacketState {
        z,
        v,
        t: state.t + dt,
        ..*state
    })
}

/// Free-particle spreading of the RMS width; momentum width is unchanged.
pub fn evolve_width(state: &WavepacketState, dt: f64, mass: f64) -> Result<WavepacketState> {
    if !(dt >= 0.0) {
        return Err(Error::invalid("dt", "must be non-negative"));
    }
    let t = state.t + dt;
    Ok(WavepacketState {
        dz: spread_width(state.dz_ref, t - state.t_ref, mass),
        t,
        ..*state
    })
}

/// `sqrt(dz0^2 + (hbar t / (2 M dz0))^2)`.
pub fn spread_width(dz0: f64, elapsed: f64, mass: f64) -> f64 {
    let growth = CONSTANTS.hbar * elapsed / (2.0 * mass * dz0);
    dz0.hypot(growth)
}

/// Position, velocity and width together.
pub fn evolve(state: &WavepacketState, dt: f64, cfg: &FieldConfig) -> Result<WavepacketState> {
    let moved = evolve_expected(state, dt, cfg)?;
    Ok(WavepacketState {
        dz: spread_width(state.dz_ref, moved.t - state.t_ref, cfg.species.mass),
        ..moved
    })
}
