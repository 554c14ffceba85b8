//! Physical constants and the alkali species registry.
//!
//! Constants are CODATA 2018. Species data follow the D. A. Steck alkali
//! line compilations ("Rubidium 87 D Line Data" etc.), with the nuclear
//! g-factor converted to the convention used throughout this crate:
//!
//! `g_i` is expressed in units of the nuclear magneton and enters the
//! Zeeman Hamiltonian as `-g_i * mu_N * I_z * B`, so that the combination
//! `g_s * mu_B + g_i * mu_N` is the full stretched-state moment difference.
//! With this convention `g_i` is positive for all alkali ground states
//! (Steck's `g_I` in Bohr magnetons is negative; `g_i = -g_I^Steck * mu_B / mu_N`).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Fundamental constants in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Bohr magneton (J/T).
    pub mu_b: f64,
    /// Nuclear magneton (J/T).
    pub mu_n: f64,
    /// Gravitational acceleration (m/s^2). Fixed at 9.8, not the standard 9.80665.
    pub g0: f64,
    /// Vacuum permeability (T m / A).
    pub mu0: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    mu_b: 9.274_010_078_3e-24,
    mu_n: 5.050_783_746_1e-27,
    g0: 9.8,
    mu0: 1.256_637_062_12e-6,
};

/// Free-electron spin g-factor (CODATA 2018, sign dropped).
pub const ELECTRON_G: f64 = 2.002_319_304_362_56;

/// 1 G/cm expressed in T/m.
pub const TESLA_PER_METER_PER_GAUSS_PER_CM: f64 = 0.01;
/// 1 G expressed in T.
pub const TESLA_PER_GAUSS: f64 = 1e-4;

/// Immutable ground-state data for one alkali isotope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomSpecies {
    pub name: &'static str,
    /// Atomic mass (kg).
    pub mass: f64,
    /// Nuclear spin I; `2 * I` is a positive integer.
    pub nuclear_spin: f64,
    /// Electron g-factor.
    pub g_s: f64,
    /// Nuclear g-factor in nuclear magnetons (see module docs for the sign).
    pub g_i: f64,
    /// Ground-state hyperfine splitting as an angular frequency (rad/s).
    pub delta_w: f64,
}

impl AtomSpecies {
    /// Builds a species record, checking the invariants the formulas rely on.
    pub fn new(
        name: &'static str,
        mass: f64,
        nuclear_spin: f64,
        g_s: f64,
        g_i: f64,
        delta_w: f64,
    ) -> Result<Self> {
        let two_i = 2.0 * nuclear_spin;
        if !(two_i >= 1.0 && two_i.fract() == 0.0) {
            return Err(Error::invalid(
                "nuclear_spin",
                format!("2I must be a positive integer, got I = {nuclear_spin}"),
            ));
        }
        if !(mass > 0.0) {
            return Err(Error::invalid("mass", "must be positive"));
        }
        if !(delta_w > 0.0) {
            return Err(Error::invalid("delta_w", "must be positive"));
        }
        if !(g_s > 0.0) {
            return Err(Error::invalid("g_s", "must be positive"));
        }
        Ok(Self {
            name,
            mass,
            nuclear_spin,
            g_s,
            g_i,
            delta_w,
        })
    }

    /// F+ = I + 1/2.
    pub fn f_plus(&self) -> f64 {
        self.nuclear_spin + 0.5
    }

    /// F- = I - 1/2.
    pub fn f_minus(&self) -> f64 {
        self.nuclear_spin - 0.5
    }

    /// Hyperfine splitting energy (J).
    pub fn hyperfine_energy(&self) -> f64 {
        CONSTANTS.hbar * self.delta_w
    }
}

const GHZ: f64 = 2.0 * PI * 1e9;

// Steck, "Rubidium 87 D Line Data" rev. 2.2.1: m = 1.443 160 648e-25 kg,
// Delta E_hfs / h = 6.834 682 610 904 290 GHz, g_I = -0.000 995 141 4.
const RB87: AtomSpecies = AtomSpecies {
    name: "Rb87",
    mass: 1.443_160_648e-25,
    nuclear_spin: 1.5,
    g_s: ELECTRON_G,
    g_i: 1.827_231_542_047_266_5,
    delta_w: 6.834_682_610_904_29 * GHZ,
};

// Steck, "Rubidium 85 D Line Data" rev. 2.2.1: m = 1.409 993 199e-25 kg,
// Delta E_hfs / h = 3.035 732 439 GHz, g_I = -0.000 293 640 00.
const RB85: AtomSpecies = AtomSpecies {
    name: "Rb85",
    mass: 1.409_993_199e-25,
    nuclear_spin: 2.5,
    g_s: ELECTRON_G,
    g_i: 0.539_167_871_024_921,
    delta_w: 3.035_732_439 * GHZ,
};

// Steck, "Sodium D Line Data" rev. 2.2.1: m = 3.817 540 29e-26 kg,
// Delta E_hfs / h = 1.771 626 128 8 GHz, g_I = -0.000 804 610 80.
const NA23: AtomSpecies = AtomSpecies {
    name: "Na23",
    mass: 3.817_540_29e-26,
    nuclear_spin: 1.5,
    g_s: ELECTRON_G,
    g_i: 1.477_388_271_487_735,
    delta_w: 1.771_626_128_8 * GHZ,
};

// Steck, "Cesium D Line Data" rev. 2.2.1: m = 2.206 946 95e-25 kg,
// Delta E_hfs / h = 9.192 631 770 GHz (exact), g_I = -0.000 398 853 95.
const CS133: AtomSpecies = AtomSpecies {
    name: "Cs133",
    mass: 2.206_946_95e-25,
    nuclear_spin: 3.5,
    g_s: ELECTRON_G,
    g_i: 0.732_356_746_599_17,
    delta_w: 9.192_631_770 * GHZ,
};

const REGISTRY: [AtomSpecies; 4] = [RB87, RB85, NA23, CS133];

/// Names of all compiled-in species.
pub fn species_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|s| s.name).collect()
}

/// All compiled-in species.
pub fn registered_species() -> &'static [AtomSpecies] {
    &REGISTRY
}

/// Looks up a species by name (case-sensitive, e.g. `"Rb87"`).
pub fn get_species(name: &str) -> Result<AtomSpecies> {
    REGISTRY
        .iter()
        .find(|s| s.name == name)
        .copied()
        .ok_or_else(|| Error::UnknownSpecies {
            name: name.to_owned(),
            available: species_names(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rb87_record() {
        let rb = get_species("Rb87").unwrap();
        assert_eq!(rb.nuclear_spin, 1.5);
        assert_eq!(rb.f_plus(), 2.0);
        assert_eq!(rb.f_minus(), 1.0);
        assert!((rb.mass - 1.44316e-25).abs() / 1.44316e-25 < 1e-5);
        assert!((rb.delta_w / (2.0 * PI) - 6.834_682_611e9).abs() < 1.0);
    }

    #[test]
    fn unknown_species_lists_names() {
        let err = get_species("Xx999").unwrap_err();
        match &err {
            Error::UnknownSpecies { available, .. } => assert!(available.contains(&"Rb87")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("Rb87"));
    }

    #[test]
    fn lookups_are_repeatable() {
        assert_eq!(get_species("Cs133").unwrap(), get_species("Cs133").unwrap());
    }

    #[test]
    fn registry_invariants() {
        let c = CONSTANTS;
        for v in [c.hbar, c.mu_b, c.mu_n, c.g0, c.mu0] {
            assert!(v > 0.0);
        }
        assert_eq!(c.g0, 9.8);
        for s in registered_species() {
            assert_eq!(s.f_plus() - s.f_minus(), 1.0);
            assert!(
                s.g_s * c.mu_b / (s.g_i.abs() * c.mu_n) > 100.0,
                "{}",
                s.name
            );
            let checked =
                AtomSpecies::new(s.name, s.mass, s.nuclear_spin, s.g_s, s.g_i, s.delta_w).unwrap();
            assert_eq!(&checked, s);
        }
    }

    #[test]
    fn rejects_bad_spin() {
        assert!(AtomSpecies::new("bad", 1e-25, 0.0, 2.0, 1.0, 1e10).is_err());
        assert!(AtomSpecies::new("bad", 1e-25, 0.7, 2.0, 1.0, 1e10).is_err());
        assert!(AtomSpecies::new("ok", 1e-25, 0.5, 2.0, 1.0, 1e10).is_ok());
    }
}
