//! Single-pulse selection: coupling, Rabi frequency, position and velocity widths.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::breit_rabi::{
    d_transition_dz, epsilon, kappa, resonant_position, transition_angular_frequency, FieldConfig,
    Sigma,
};
use crate::constants::CONSTANTS;
use crate::error::{Error, Result};

/// Above this `|kz|` the low-field width formula is flagged as unreliable.
pub const LOW_FIELD_LIMIT: f64 = 0.05;

/// How the microwave coupling `Omega_0` is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingModel {
    /// `2 |Omega_0| tau = pi`, independent of position.
    PiPulseCalibrated,
}

/// A square microwave pi-pulse `B0 cos[omega_a (t - t0)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseSpec {
    /// Application time (s).
    pub t0: f64,
    /// Duration (s).
    pub tau: f64,
    /// Microwave angular frequency (rad/s).
    pub omega_a: f64,
    pub sigma: Sigma,
    pub coupling: CouplingModel,
}

impl PulseSpec {
    pub fn new(t0: f64, tau: f64, omega_a: f64, sigma: Sigma) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid(
                "tau",
                format!("pulse duration must be positive, got {tau}"),
            ));
        }
        if !(omega_a.is_finite() && omega_a > 0.0) {
            return Err(Error::invalid(
                "omega_a",
                "must be a positive angular frequency",
            ));
        }
        if !t0.is_finite() {
            return Err(Error::invalid("t0", "must be finite"));
        }
        Ok(Self {
            t0,
            tau,
            omega_a,
            sigma,
            coupling: CouplingModel::PiPulseCalibrated,
        })
    }

    /// Pulse tuned to resonance at position `z`.
    pub fn resonant_at(z: f64, t0: f64, tau: f64, sigma: Sigma, cfg: &FieldConfig) -> Result<Self> {
        Self::new(t0, tau, transition_angular_frequency(sigma, z, cfg), sigma)
    }

    /// Resonant position of this pulse's frequency.
    pub fn center(&self, cfg: &FieldConfig) -> Result<f64> {
        resonant_position(self.omega_a, self.sigma, cfg)
    }
}

/// `|Omega_0|` (rad/s). Only its magnitude enters downstream formulas.
pub fn coupling_omega0(pulse: &PulseSpec) -> f64 {
    match pulse.coupling {
        CouplingModel::PiPulseCalibrated => PI / (2.0 * pulse.tau),
    }
}

/// `delta(z) = omega_transition(z) - omega_a` (rad/s).
pub fn detuning(z: f64, pulse: &PulseSpec, cfg: &FieldConfig) -> f64 {
    transition_angular_frequency(pulse.sigma, z, cfg) - pulse.omega_a
}

/// Generalized Rabi frequency `sqrt(delta^2 + 4|Omega_0|^2)`.
pub fn rabi_frequency(z: f64, pulse: &PulseSpec, cfg: &FieldConfig) -> f64 {
    let d = detuning(z, pulse, cfg);
    let o = coupling_omega0(pulse);
    (d * d + 4.0 * o * o).sqrt()
}

/// Width of the selected position band, `2 Omega_R / |d omega / dz|` at `z_center`.
pub fn position_width(pulse: &PulseSpec, cfg: &FieldConfig, z_center: f64) -> Result<f64> {
    cfg.require_gradient()?;
    let slope = d_transition_dz(pulse.sigma, z_center, cfg);
    if slope == 0.0 {
        return Err(Error::ZeroGradient);
    }
    Ok(2.0 * rabi_frequency(z_center, pulse, cfg) / slope.abs())
}

/// Low-field width and whether the operating point is actually low field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowFieldWidth {
    pub delta_z: f64,
    pub kz: f64,
    pub within_low_field: bool,
}

/// `hbar Omega_R / (mu_B eta) * (I + 1/2) / I` with `Omega_R = pi / tau`.
pub fn position_width_low_field(
    pulse: &PulseSpec,
    cfg: &FieldConfig,
    z_center: f64,
) -> Result<LowFieldWidth> {
    cfg.require_gradient()?;
    let spin = cfg.species.nuclear_spin;
    let rabi = 2.0 * coupling_omega0(pulse);
    let delta_z = CONSTANTS.hbar * rabi / (CONSTANTS.mu_b * cfg.eta.abs()) * (spin + 0.5) / spin;
    let kz = cfg.kz(z_center);
    Ok(LowFieldWidth {
        delta_z,
        kz,
        within_low_field: kz.abs() < LOW_FIELD_LIMIT,
    })
}

/// `2 delta_z / delta_t`.
pub fn velocity_width(delta_z: f64, delta_t: f64) -> Result<f64> {
    if !(delta_t > 0.0) {
        return Err(Error::invalid("delta_t", "must be positive"));
    }
    Ok(2.0 * delta_z / delta_t)
}

/// Raman velocity selectivity `1 / (2 k delta_t_R)`.
pub fn raman_width(k: f64, delta_t_r: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::invalid("k", "wave number must be positive"));
    }
    if !(delta_t_r > 0.0) {
        return Err(Error::invalid("delta_t_r", "must be positive"));
    }
    Ok(1.0 / (2.0 * k * delta_t_r))
}

/// Result of selecting with one pulse (and optionally a second after `delta_t`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionResult {
    pub delta_z: f64,
    pub delta_v: Option<f64>,
    pub z_center: f64,
    pub rabi_resonant: f64,
}

impl SelectionResult {
    pub fn compute(pulse: &PulseSpec, cfg: &FieldConfig, delta_t: Option<f64>) -> Result<Self> {
        let z_center = pulse.center(cfg)?;
        let delta_z = position_width(pulse, cfg, z_center)?;
        let delta_v = delta_t.map(|dt| velocity_width(delta_z, dt)).transpose()?;
        Ok(Self {
            delta_z,
            delta_v,
            z_center,
            rabi_resonant: rabi_frequency(z_center, pulse, cfg),
        })
    }
}

/// Wavepacket quantities entering the localization diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Localization {
    /// Expected position at the pulse (m).
    pub z: f64,
    /// Expected momentum at the pulse (kg m/s).
    pub p: f64,
    /// RMS width at t = 0 (m).
    pub dz0: f64,
    /// RMS width at the pulse (m).
    pub dz_t0: f64,
    /// Pulse time measured from t = 0 (s).
    pub t0: f64,
}

/// Localization figure of merit; the width formula is trustworthy when this is `<< 1`.
///
/// `eps |(p/(hbar kappa))^2 + 1/(2[kappa^2 dZ0^2 + i eps dW t0])|
///   * pi dW / Omega_R(z) * [2 pi kappa^2 dZ(t0)^2]^(-1/4)`
pub fn validity_diagnostic(
    pulse: &PulseSpec,
    cfg: &FieldConfig,
    loc: &Localization,
) -> Result<f64> {
    if !(loc.dz0 > 0.0) {
        return Err(Error::invalid("dz0", "must be positive"));
    }
    if !(loc.dz_t0 > 0.0) {
        return Err(Error::invalid("dz_t0", "must be positive"));
    }
    cfg.require_gradient()?;
    let k = kappa(cfg);
    let eps = epsilon(cfg);
    let dw = cfg.species.delta_w;
    let momentum = loc.p / (CONSTANTS.hbar * k);
    let spread = Complex64::new(k * k * loc.dz0 * loc.dz0, eps * dw * loc.t0);
    let bracket = Complex64::new(momentum * momentum, 0.0) + (2.0 * spread).inv();
    let rabi = rabi_frequency(loc.z, pulse, cfg);
    let localization = (2.0 * PI * k * k * loc.dz_t0 * loc.dz_t0).powf(-0.25);
    Ok(eps * bracket.norm() * PI * dw / rabi * localization)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{get_species, AtomSpecies};

    fn cfg() -> FieldConfig {
        FieldConfig::new(get_species("Rb87").unwrap(), 0.25, 0.0).unwrap()
    }

    fn pulse_at(z: f64, tau: f64) -> PulseSpec {
        PulseSpec::resonant_at(z, 0.0, tau, Sigma::Plus, &cfg()).unwrap()
    }

    #[test]
    fn coupling_pi_condition() {
        let p10 = pulse_at(0.0, 10e-6);
        let p5 = pulse_at(0.0, 5e-6);
        assert!((coupling_omega0(&p10) - 1.570_796e5).abs() < 1.0);
        assert_eq!(coupling_omega0(&p5), 2.0 * coupling_omega0(&p10));
        assert_eq!(2.0 * coupling_omega0(&p10) * p10.tau, PI);
    }

    #[test]
    fn rabi_on_and_off_resonance() {
        let c = cfg();
        let p = pulse_at(0.0, 10e-6);
        assert_eq!(rabi_frequency(0.0, &p, &c), PI / 10e-6);
        let far = 1e-3;
        let d = detuning(far, &p, &c).abs();
        assert!((rabi_frequency(far, &p, &c) - d) / d < 0.01);
        let dz = position_width(&p, &c, 0.0).unwrap();
        let r = rabi_frequency(dz / 2.0, &p, &c);
        // Detuning at the half-width equals 2|Omega_0| up to the curvature of the splitting.
        assert!((r / (2f64.sqrt() * PI / 10e-6) - 1.0).abs() < 1e-4, "{r}");
    }

    #[test]
    fn widths_reproduce_worked_example() {
        let c = cfg();
        let p10 = pulse_at(0.0, 10e-6);
        let dz = position_width(&p10, &c, 0.0).unwrap();
        assert!((dz - 19e-6).abs() < 0.5e-6, "{dz}");
        let low = position_width_low_field(&p10, &c, 0.0).unwrap();
        assert!((low.delta_z - 19e-6).abs() < 0.5e-6);
        assert!(low.within_low_field);
        assert!((low.delta_z - dz).abs() / dz < 0.01);

        let p5 = pulse_at(0.0, 5e-6);
        let dz5 = position_width(&p5, &c, 0.0).unwrap();
        assert!((dz5 - 38e-6).abs() < 1e-6);
    }

    #[test]
    fn low_field_spin_factor() {
        let c = cfg();
        let half = AtomSpecies::new("I-half", 1e-25, 0.5, 2.0, 1.0, 1e10).unwrap();
        let c_half = FieldConfig::new(half, 0.25, 0.0).unwrap();
        let p = pulse_at(0.0, 10e-6);
        let rb = position_width_low_field(&p, &c, 0.0).unwrap().delta_z;
        let ih = position_width_low_field(&p, &c_half, 0.0).unwrap().delta_z;
        assert!((ih / rb - 1.5).abs() < 1e-12);
    }

    #[test]
    fn low_field_flag() {
        let c = cfg();
        let p = pulse_at(0.1, 10e-6);
        let low = position_width_low_field(&p, &c, 0.1).unwrap();
        assert!(!low.within_low_field);
    }

    #[test]
    fn zero_gradient() {
        let c = FieldConfig::new(get_species("Rb87").unwrap(), 0.0, 0.0).unwrap();
        let p = PulseSpec::new(0.0, 1e-5, c.species.delta_w, Sigma::Plus).unwrap();
        assert_eq!(position_width(&p, &c, 0.0), Err(Error::ZeroGradient));
    }

    #[test]
    fn velocity_and_raman_widths() {
        let v = velocity_width(19e-6, 0.028).unwrap();
        assert!((v - 1.357e-3).abs() < 1e-6);
        assert!((velocity_width(38e-6, 0.028).unwrap() - 2.714e-3).abs() < 1e-6);
        assert!(velocity_width(1e-5, 0.0).is_err());

        let r = raman_width(2.0 * 8.05e6, 1e-3).unwrap();
        assert!((r - 3.105_59e-5).abs() < 1e-9);
        assert_eq!(raman_width(4.0 * 8.05e6, 1e-3).unwrap(), r / 2.0);
        assert!(raman_width(0.0, 1e-3).is_err());
    }

    #[test]
    fn selection_result() {
        let c = cfg();
        let p = pulse_at(0.01, 10e-6);
        let s = SelectionResult::compute(&p, &c, Some(0.028)).unwrap();
        assert!((s.z_center - 0.01).abs() < 1e-9);
        assert_eq!(s.delta_v.unwrap(), 2.0 * s.delta_z / 0.028);
        assert!((s.rabi_resonant - PI / 10e-6).abs() < 1.0);
        assert!(SelectionResult::compute(&p, &c, None)
            .unwrap()
            .delta_v
            .is_none());
    }

    #[test]
    fn validity_reductions() {
        let c = cfg();
        let p = pulse_at(0.0, 10e-6);
        let dz0 = 3e-6;
        let loc = Localization {
            z: 0.0,
            p: 0.0,
            dz0,
            dz_t0: dz0,
            t0: 0.0,
        };
        let got = validity_diagnostic(&p, &c, &loc).unwrap();
        let k = kappa(&c);
        let eps = epsilon(&c);
        let manual = eps
            * (1.0 / (2.0 * k * k * dz0 * dz0))
            * (PI * c.species.delta_w / (PI / 10e-6))
            * (2.0 * PI * k * k * dz0 * dz0).powf(-0.25);
        assert!((got - manual).abs() / manual < 1e-12);

        // Monotone decreasing in dZ(0) for zero momentum.
        let mut last = f64::INFINITY;
        for i in 1..200 {
            let dz = i as f64 * 0.5e-6;
            let v = validity_diagnostic(
                &p,
                &c,
                &Localization {
                    dz0: dz,
                    dz_t0: dz,
                    ..loc
                },
            )
            .unwrap();
            assert!(v < last);
            last = v;
        }

        assert!(validity_diagnostic(&p, &c, &Localization { dz0: 0.0, ..loc }).is_err());
    }

    #[test]
    fn validity_linear_in_epsilon_prefactor() {
        // Doubling the mass halves epsilon while leaving kappa and the bracket unchanged
        // when the momentum term is absent.
        let rb = get_species("Rb87").unwrap();
        let heavy = AtomSpecies::new(
            "heavy",
            2.0 * rb.mass,
            rb.nuclear_spin,
            rb.g_s,
            rb.g_i,
            rb.delta_w,
        )
        .unwrap();
        let c1 = cfg();
        let c2 = FieldConfig::new(heavy, 0.25, 0.0).unwrap();
        let p = pulse_at(0.0, 10e-6);
        let loc = Localization {
            z: 0.0,
            p: 0.0,
            dz0: 3e-6,
            dz_t0: 3e-6,
            t0: 0.0,
        };
        let a = validity_diagnostic(&p, &c1, &loc).unwrap();
        let b = validity_diagnostic(&p, &c2, &loc).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
    }
}
