//! Stretched-state Breit-Rabi energies in a linear field gradient.
//!
//! Energies are measured from the zero-field midpoint of the two hyperfine
//! levels, so the upper stretched state sits at `+hbar*dW/2` and the lower at
//! `-hbar*dW/2` when the field vanishes. The dimensionless field coordinate is
//! `x = kappa * z`, which with a bias field generalizes to
//! `x = g_sum * (eta*z + bias) / (hbar*dW)`.

use serde::{Deserialize, Serialize};

use crate::constants::{AtomSpecies, CONSTANTS};
use crate::error::{Error, Result};
use crate::roots::bisect_newton;

/// Sign selecting the `|F-, +-F-> <-> |F+, +-F+>` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sigma {
    Plus,
    Minus,
}

impl Sigma {
    pub fn sign(self) -> f64 {
        match self {
            Sigma::Plus => 1.0,
            Sigma::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sigma::Plus => Sigma::Minus,
            Sigma::Minus => Sigma::Plus,
        }
    }

    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(Sigma::Plus),
            -1 => Ok(Sigma::Minus),
            other => Err(Error::invalid(
                "sigma",
                format!("must be +1 or -1, got {other}"),
            )),
        }
    }
}

/// Hyperfine level: `Lower` is F- = I - 1/2, `Upper` is F+ = I + 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    Lower,
    Upper,
}

impl Level {
    pub fn other(self) -> Self {
        match self {
            Level::Lower => Level::Upper,
            Level::Upper => Level::Lower,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Level::Lower => "F-",
            Level::Upper => "F+",
        }
    }
}

/// One stretched state: a level together with the branch sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StretchedBranch {
    pub sigma: Sigma,
    pub level: Level,
}

impl StretchedBranch {
    pub fn new(sigma: Sigma, level: Level) -> Self {
        Self { sigma, level }
    }
}

/// Magnetic-moment combinations that set the field scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyScale {
    /// `g_s*mu_B + g_i*mu_N` (J/T).
    pub g_sum: f64,
    /// `(g_s*mu_B - 2I*g_i*mu_N) / (2*g_sum)`.
    pub gamma1: f64,
    /// `g_i*mu_N / g_sum`.
    pub gamma2: f64,
}

impl EnergyScale {
    pub fn of(species: &AtomSpecies) -> Self {
        let electron = species.g_s * CONSTANTS.mu_b;
        let nuclear = species.g_i * CONSTANTS.mu_n;
        let g_sum = electron + nuclear;
        Self {
            g_sum,
            gamma1: (electron - 2.0 * species.nuclear_spin * nuclear) / (2.0 * g_sum),
            gamma2: nuclear / g_sum,
        }
    }
}

/// Static field along z: `B(z) = eta * z + bias`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldConfig {
    /// Gradient (T/m).
    pub eta: f64,
    /// Uniform bias field (T).
    pub bias: f64,
    pub species: AtomSpecies,
}

impl FieldConfig {
    pub fn new(species: AtomSpecies, eta: f64, bias: f64) -> Result<Self> {
        if !eta.is_finite() {
            return Err(Error::invalid("eta", "must be finite"));
        }
        if !bias.is_finite() {
            return Err(Error::invalid("bias", "must be finite"));
        }
        Ok(Self { eta, bias, species })
    }

    /// Fails with [`Error::ZeroGradient`] when no selection is possible.
    pub fn require_gradient(&self) -> Result<()> {
        if self.eta == 0.0 {
            Err(Error::ZeroGradient)
        } else {
            Ok(())
        }
    }

    pub fn scale(&self) -> EnergyScale {
        EnergyScale::of(&self.species)
    }

    /// Field coordinate `x = kappa*(z + bias/eta)` at position `z`.
    pub fn kz(&self, z: f64) -> f64 {
        self.scale().g_sum * (self.eta * z + self.bias) / self.species.hyperfine_energy()
    }

    /// Position where the total field vanishes.
    pub fn field_zero(&self) -> Result<f64> {
        self.require_gradient()?;
        Ok(-self.bias / self.eta)
    }
}

/// `kappa = g_sum * eta / (hbar*dW)` (1/m); sign follows `eta`.
pub fn kappa(cfg: &FieldConfig) -> f64 {
    cfg.scale().g_sum * cfg.eta / cfg.species.hyperfine_energy()
}

/// `epsilon = hbar^2 kappa^2 / (2 M hbar dW)`.
pub fn epsilon(cfg: &FieldConfig) -> f64 {
    let k = kappa(cfg);
    let hbar = CONSTANTS.hbar;
    hbar * hbar * k * k / (2.0 * cfg.species.mass * cfg.species.hyperfine_energy())
}

/// Eigenvalue in units of `hbar*dW` at field coordinate `kz`.
pub fn reduced_eigenvalue(branch: StretchedBranch, kz: f64, species: &AtomSpecies) -> f64 {
    let scale = EnergyScale::of(species);
    let s = branch.sigma.sign();
    match branch.level {
        Level::Upper => 0.5 + s * scale.gamma1 * kz,
        Level::Lower => {
            let f_minus = species.f_minus();
            let ratio = f_minus / species.f_plus();
            -s * f_minus * scale.gamma2 * kz - 0.5 * (1.0 + 2.0 * s * ratio * kz + kz * kz).sqrt()
        }
    }
}

/// `d/d(kz)` of [`reduced_eigenvalue`].
pub fn reduced_eigenvalue_slope(branch: StretchedBranch, kz: f64, species: &AtomSpecies) -> f64 {
    let scale = EnergyScale::of(species);
    let s = branch.sigma.sign();
    match branch.level {
        Level::Upper => s * scale.gamma1,
        Level::Lower => {
            let f_minus = species.f_minus();
            let ratio = f_minus / species.f_plus();
            let root = (1.0 + 2.0 * s * ratio * kz + kz * kz).sqrt();
            -s * f_minus * scale.gamma2 - 0.5 * (s * ratio + kz) / root
        }
    }
}

/// Stretched-state energy (J) at field coordinate `kz`.
pub fn eigenvalue(branch: StretchedBranch, kz: f64, species: &AtomSpecies) -> f64 {
    species.hyperfine_energy() * reduced_eigenvalue(branch, kz, species)
}

fn reduced_splitting(sigma: Sigma, kz: f64, species: &AtomSpecies) -> f64 {
    reduced_eigenvalue(StretchedBranch::new(sigma, Level::Upper), kz, species)
        - reduced_eigenvalue(StretchedBranch::new(sigma, Level::Lower), kz, species)
}

fn reduced_splitting_slope(sigma: Sigma, kz: f64, species: &AtomSpecies) -> f64 {
    reduced_eigenvalue_slope(StretchedBranch::new(sigma, Level::Upper), kz, species)
        - reduced_eigenvalue_slope(StretchedBranch::new(sigma, Level::Lower), kz, species)
}

/// `[V_upper - V_lower] / hbar` at position `z` (rad/s).
pub fn transition_angular_frequency(sigma: Sigma, z: f64, cfg: &FieldConfig) -> f64 {
    cfg.species.delta_w * reduced_splitting(sigma, cfg.kz(z), &cfg.species)
}

/// Analytic `d/dz` of [`transition_angular_frequency`] ((rad/s)/m).
pub fn d_transition_dz(sigma: Sigma, z: f64, cfg: &FieldConfig) -> f64 {
    cfg.species.delta_w * kappa(cfg) * reduced_splitting_slope(sigma, cfg.kz(z), &cfg.species)
}

/// Position interval on which [`resonant_position`] searches by default:
/// `|kz| <= 1` around the field zero, where the splitting is monotonic in z.
pub fn default_search_interval(cfg: &FieldConfig) -> Result<(f64, f64)> {
    let zero = cfg.field_zero()?;
    let reach = 1.0 / kappa(cfg).abs();
    Ok((zero - reach, zero + reach))
}

/// Position where the transition is resonant with `omega_a`.
pub fn resonant_position(omega_a: f64, sigma: Sigma, cfg: &FieldConfig) -> Result<f64> {
    let (lo, hi) = default_search_interval(cfg)?;
    resonant_position_in(omega_a, sigma, cfg, lo, hi)
}

/// As [`resonant_position`] but searching an explicit interval.
pub fn resonant_position_in(
    omega_a: f64,
    sigma: Sigma,
    cfg: &FieldConfig,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    cfg.require_gradient()?;
    bisect_newton(
        |z| transition_angular_frequency(sigma, z, cfg) - omega_a,
        |z| d_transition_dz(sigma, z, cfg),
        lo,
        hi,
        1e-12,
    )
}
