//! Anti-Helmholtz coil pair and field-stability budgets.

use serde::Serialize;

use crate::breit_rabi::{d_transition_dz, FieldConfig};
use crate::constants::{CONSTANTS, TESLA_PER_GAUSS};
use crate::error::{Error, Result};
use crate::pulse::{position_width, rabi_frequency, PulseSpec};

/// Two coaxial loops at `z = +-half_separation` carrying opposite currents.
/// The loop at `+half_separation` carries `+current`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoilPair {
    pub radius: f64,
    pub current: f64,
    pub half_separation: f64,
    pub turns: u32,
}

impl CoilPair {
    pub fn new(radius: f64, current: f64, half_separation: f64, turns: u32) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid("radius", "must be positive"));
        }
        if !(half_separation > 0.0) {
            return Err(Error::invalid("half_separation", "must be positive"));
        }
        if turns == 0 {
            return Err(Error::invalid("turns", "must be at least 1"));
        }
        if !current.is_finite() {
            return Err(Error::invalid("current", "must be finite"));
        }
        Ok(Self {
            radius,
            current,
            half_separation,
            turns,
        })
    }

    fn prefactor(&self) -> f64 {
        0.5 * CONSTANTS.mu0 * self.turns as f64 * self.current * self.radius * self.radius
    }

    /// Current needed for a central gradient `eta` with the given geometry and turns.
    pub fn current_for_gradient(
        radius: f64,
        half_separation: f64,
        turns: u32,
        eta: f64,
    ) -> Result<f64> {
        let unit = Self::new(radius, 1.0, half_separation, turns)?;
        Ok(eta / gradient_at_center(&unit))
    }
}

/// Axial field `B_z(z)` of the pair (T).
pub fn on_axis_field(coils: &CoilPair, z: f64) -> f64 {
    let r2 = coils.radius * coils.radius;
    let d = coils.half_separation;
    let loop_term = |u: f64| (r2 + u * u).powf(-1.5);
    coils.prefactor() * (loop_term(z - d) - loop_term(z + d))
}

/// `dB_z/dz` at the centre: `3 mu0 N I R^2 d / (R^2 + d^2)^(5/2)`.
pub fn gradient_at_center(coils: &CoilPair) -> f64 {
    let r2 = coils.radius * coils.radius;
    let d = coils.half_separation;
    6.0 * coils.prefactor() * d * (r2 + d * d).powf(-2.5)
}

/// Half-separation maximizing the central gradient at fixed radius and current.
pub fn optimal_half_separation(radius: f64) -> f64 {
    0.5 * radius
}

/// Largest `|z|` for which `|B(z) - eta z| < tolerance * |eta z|`, found by
/// scanning outward in steps of `step`.
pub fn linearity_extent(coils: &CoilPair, tolerance: f64, step: f64) -> f64 {
    let eta = gradient_at_center(coils);
    if eta == 0.0 {
        return 0.0;
    }
    let limit = 10.0 * (coils.radius + coils.half_separation);
    let mut z = step;
    while z < limit {
        let deviation = (on_axis_field(coils, z) - eta * z).abs() / (eta * z).abs();
        if deviation >= tolerance {
            return z - step;
        }
        z += step;
    }
    limit
}

/// Position of the field zero once a uniform `bias` is added.
pub fn shifted_zero(eta: f64, bias: f64) -> Result<f64> {
    if eta == 0.0 {
        return Err(Error::ZeroGradient);
    }
    Ok(-bias / eta)
}

/// Field-stability requirements for keeping the detuning below `Omega_R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityBudget {
    /// Rabi frequency at the pulse's resonance (rad/s).
    pub rabi: f64,
    /// Position band width of the pulse (m).
    pub delta_z: f64,
    /// Bias-field drift that shifts the transition by `Omega_R` (T).
    pub bias_tolerance: f64,
    pub bias_tolerance_gauss: f64,
    /// Fractional gradient drift that moves the resonance at `displacement` by `delta_z / 2`.
    pub gradient_fractional_tolerance: f64,
    pub displacement: f64,
}

pub fn stability_budget(
    pulse: &PulseSpec,
    cfg: &FieldConfig,
    displacement: f64,
) -> Result<StabilityBudget> {
    if !(displacement > 0.0) {
        return Err(Error::invalid("displacement", "must be positive"));
    }
    cfg.require_gradient()?;
    let center = pulse.center(cfg)?;
    let rabi = rabi_frequency(center, pulse, cfg);
    // The splitting depends on eta*z + bias only, so d/dB = (d/dz) / eta.
    let per_tesla = (d_transition_dz(pulse.sigma, center, cfg) / cfg.eta).abs();
    let bias_tolerance = rabi / per_tesla;
    let delta_z = position_width(pulse, cfg, center)?;
    Ok(StabilityBudget {
        rabi,
        delta_z,
        bias_tolerance,
        bias_tolerance_gauss: bias_tolerance / TESLA_PER_GAUSS,
        gradient_fractional_tolerance: delta_z / (2.0 * displacement),
        displacement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::breit_rabi::Sigma;
    use crate::constants::get_species;

    fn reference_coils() -> CoilPair {
        let i = CoilPair::current_for_gradient(0.05, 0.025, 100, 0.25).unwrap();
        CoilPair::new(0.05, i, 0.025, 100).unwrap()
    }

    #[test]
    fn field_is_odd() {
        let c = reference_coils();
        assert_eq!(on_axis_field(&c, 0.0), 0.0);
        for z in [1e-4, 3e-3, 0.02, 0.2] {
            assert_eq!(on_axis_field(&c, -z), -on_axis_field(&c, z));
        }
    }

    #[test]
    fn central_gradient_and_fit() {
        let c = reference_coils();
        assert!((gradient_at_center(&c) - 0.25).abs() < 1e-12);
        let h = 1e-6;
        let fd = (on_axis_field(&c, h) - on_axis_field(&c, -h)) / (2.0 * h);
        assert!((fd - 0.25).abs() / 0.25 < 1e-8);

        // Least-squares slope over |z| <= 2 mm. Independent oracle (numpy, 401 points):
        // relative deviation -1.0289e-3 from the central gradient.
        let zs: Vec<f64> = (0..=400).map(|i| -2e-3 + 4e-3 * i as f64 / 400.0).collect();
        let num: f64 = zs.iter().map(|&z| z * on_axis_field(&c, z)).sum();
        let den: f64 = zs.iter().map(|&z| z * z).sum();
        let fit = num / den;
        assert!(
            (fit / 0.25 - 1.0 + 1.0289e-3).abs() < 1e-6,
            "{}",
            fit / 0.25 - 1.0
        );
    }

    #[test]
    fn gradient_peaks_at_half_radius() {
        let r = 0.05;
        let grad = |d: f64| gradient_at_center(&CoilPair::new(r, 10.0, d, 1).unwrap());
        let best = (1..2000)
            .map(|i| i as f64 * r / 1000.0)
            .max_by(|a, b| grad(*a).total_cmp(&grad(*b)))
            .unwrap();
        assert!((best - optimal_half_separation(r)).abs() <= r / 1000.0);
    }

    #[test]
    fn gradient_linear_in_current() {
        let a = CoilPair::new(0.05, 2.0, 0.025, 10).unwrap();
        let b = CoilPair::new(0.05, 6.0, 0.025, 10).unwrap();
        assert!((gradient_at_center(&b) / gradient_at_center(&a) - 3.0).abs() < 1e-14);
        let zero = CoilPair::new(0.05, 0.0, 0.025, 10).unwrap();
        assert_eq!(gradient_at_center(&zero), 0.0);
    }

    #[test]
    fn linearity_region() {
        // Oracle: the 1 % deviation point of the d = R/2 pair, solved numerically
        // (scipy brentq on the closed-form field) at |z| = 4.8452 mm = 0.1938 d.
        let c = reference_coils();
        let extent = linearity_extent(&c, 0.01, 1e-6);
        assert!((extent - 4.8452e-3).abs() < 2e-6, "{extent}");
    }

    #[test]
    fn shifted_zero_values() {
        assert_eq!(shifted_zero(0.25, 0.0).unwrap(), 0.0);
        assert!((shifted_zero(0.25, 25e-4).unwrap() + 0.01).abs() < 1e-15);
        assert_eq!(
            shifted_zero(0.25, -25e-4).unwrap(),
            -shifted_zero(0.25, 25e-4).unwrap()
        );
        assert_eq!(shifted_zero(0.0, 1e-4), Err(Error::ZeroGradient));
    }

    #[test]
    fn budget_numbers() {
        let cfg = FieldConfig::new(get_species("Rb87").unwrap(), 0.25, 0.0).unwrap();
        let p10 = PulseSpec::resonant_at(0.0, 0.0, 10e-6, Sigma::Plus, &cfg).unwrap();
        let b = stability_budget(&p10, &cfg, 0.01).unwrap();
        assert!((b.gradient_fractional_tolerance - 9.5e-4).abs() < 0.2e-4);
        // hbar*pi/tau / (1.5 mu_B) = 2.38e-6 T
        assert!(
            (b.bias_tolerance_gauss - 0.0238).abs() < 0.0005,
            "{}",
            b.bias_tolerance_gauss
        );

        let p5 = PulseSpec::resonant_at(0.0, 0.0, 5e-6, Sigma::Plus, &cfg).unwrap();
        let b5 = stability_budget(&p5, &cfg, 0.01).unwrap();
        assert!((b5.bias_tolerance / b.bias_tolerance - 2.0).abs() < 1e-12);
        assert!(
            (b5.gradient_fractional_tolerance / b.gradient_fractional_tolerance - 2.0).abs()
                < 1e-12
        );
        assert!(stability_budget(&p10, &cfg, 0.0).is_err());
    }
}
