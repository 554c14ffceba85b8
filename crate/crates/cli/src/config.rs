use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use velsel::breit_rabi::Sigma;
use velsel::dynamics::g_effective;
use velsel::monte_carlo::{EnsembleSpec, ProbabilityMode};
use velsel::probability::QuadratureSettings;
use velsel::{get_species, FieldConfig, Level, PulseSpec};

use crate::units::{AngularFrequency, Current, Field, Gradient, Length, Quantity, Time, Velocity};

/// Malformed or incomplete configuration; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub species: String,
    pub eta: Quantity<Gradient>,
    #[serde(default = "zero_field")]
    pub bias: Quantity<Field>,
    /// `+1` or `-1`.
    #[serde(default = "plus_one")]
    pub sigma: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_t: Option<Quantity<Time>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pulses: Vec<PulseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavepacket: Option<WavepacketConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coils: Option<CoilConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn zero_field() -> Quantity<Field> {
    "0 G".parse().expect("literal")
}

fn plus_one() -> i32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub duration: Quantity<Time>,
    /// Pulse start; defaults to 0 for the first pulse and `delta_t` for the second.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Quantity<Time>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonant_at: Option<Quantity<Length>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<Quantity<AngularFrequency>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavepacketConfig {
    pub dz0: Quantity<Length>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub from: Quantity<Length>,
    pub to: Quantity<Length>,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n: usize,
    #[serde(default = "zero_length")]
    pub z_mean: Quantity<Length>,
    pub z_rms: Quantity<Length>,
    /// Defaults to the launch velocity that reaches the second resonance after `delta_t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_mean: Option<Quantity<Velocity>>,
    pub v_rms: Quantity<Velocity>,
    #[serde(default = "averaged")]
    pub mode: ProbabilityMode,
    #[serde(default = "unit_efficiency")]
    pub survival_efficiency: f64,
}

fn zero_length() -> Quantity<Length> {
    "0 m".parse().expect("literal")
}

fn averaged() -> ProbabilityMode {
    ProbabilityMode::Averaged
}

fn unit_efficiency() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoilConfig {
    pub radius: Quantity<Length>,
    pub half_separation: Quantity<Length>,
    pub turns: u32,
    /// When absent, the current that produces `eta` at the centre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current: Option<Quantity<Current>>,
    pub displacement: Quantity<Length>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        get_species(&self.species).map_err(|e| config_err(format!("field `species`: {e}")))?;
        Sigma::from_sign(self.sigma).map_err(|_| config_err("field `sigma`: must be +1 or -1"))?;
        if let Some(dt) = &self.delta_t {
            if !(dt.si() > 0.0) {
                return Err(config_err("field `delta_t`: must be positive"));
            }
        }
        for (i, p) in self.pulses.iter().enumerate() {
            if !(p.duration.si() > 0.0) {
                return Err(config_err(format!(
                    "field `pulses[{i}].duration`: must be positive"
                )));
            }
            if p.resonant_at.is_some() == p.frequency.is_some() {
                return Err(config_err(format!(
                    "field `pulses[{i}]`: give exactly one of `resonant_at` or `frequency`"
                )));
            }
        }
        if let Some(w) = &self.wavepacket {
            if !(w.dz0.si() > 0.0) {
                return Err(config_err("field `wavepacket.dz0`: must be positive"));
            }
        }
        if let Some(s) = &self.scan {
            if s.points < 2 {
                return Err(config_err("field `scan.points`: need at least 2"));
            }
        }
        if let Some(e) = &self.ensemble {
            if e.n == 0 {
                return Err(config_err("field `ensemble.n`: must be at least 1"));
            }
            if !(e.z_rms.si() > 0.0) || !(e.v_rms.si() > 0.0) {
                return Err(config_err(
                    "fields `ensemble.z_rms`, `ensemble.v_rms`: must be positive",
                ));
            }
            if !(0.0..=1.0).contains(&e.survival_efficiency) {
                return Err(config_err(
                    "field `ensemble.survival_efficiency`: must lie in [0, 1]",
                ));
            }
        }
        if let Some(c) = &self.coils {
            if !(c.radius.si() > 0.0) || !(c.half_separation.si() > 0.0) || c.turns == 0 {
                return Err(config_err(
                    "field `coils`: radius, half_separation and turns must be positive",
                ));
            }
            if !(c.displacement.si() > 0.0) {
                return Err(config_err("field `coils.displacement`: must be positive"));
            }
        }
        self.quadrature
            .validate()
            .map_err(|e| config_err(format!("field `quadrature`: {e}")))?;
        Ok(())
    }

    pub fn sigma(&self) -> Sigma {
        Sigma::from_sign(self.sigma).expect("validated")
    }

    pub fn field(&self) -> velsel::Result<FieldConfig> {
        FieldConfig::new(get_species(&self.species)?, self.eta.si(), self.bias.si())
    }

    pub fn require_delta_t(&self) -> anyhow::Result<f64> {
        self.delta_t
            .as_ref()
            .map(Quantity::si)
            .ok_or_else(|| config_err("field `delta_t` is required for this command"))
    }

    pub fn require_pulses(&self, count: usize) -> anyhow::Result<()> {
        if self.pulses.len() < count {
            return Err(config_err(format!(
                "field `pulses`: this command needs at least {count} pulse(s), found {}",
                self.pulses.len()
            )));
        }
        Ok(())
    }

    pub fn require_dz0(&self) -> anyhow::Result<f64> {
        self.wavepacket
            .as_ref()
            .map(|w| w.dz0.si())
            .ok_or_else(|| config_err("field `wavepacket.dz0` is required for this command"))
    }

    /// Start time of pulse `index`.
    pub fn pulse_start(&self, index: usize) -> anyhow::Result<f64> {
        let p = &self.pulses[index];
        match (&p.start, index) {
            (Some(t), _) => Ok(t.si()),
            (None, 0) => Ok(0.0),
            (None, 1) => self
                .require_delta_t()
                .map_err(|_| config_err("field `pulses[1].start`: set it or give `delta_t`")),
            (None, _) => Err(config_err(format!(
                "field `pulses[{index}].start` is required"
            ))),
        }
    }

    pub fn pulse(&self, index: usize, cfg: &FieldConfig) -> anyhow::Result<PulseSpec> {
        let p = &self.pulses[index];
        let t0 = self.pulse_start(index)?;
        let spec = match (&p.resonant_at, &p.frequency) {
            (Some(z), _) => PulseSpec::resonant_at(z.si(), t0, p.duration.si(), self.sigma(), cfg)?,
            (None, Some(f)) => PulseSpec::new(t0, p.duration.si(), f.si(), self.sigma())?,
            (None, None) => unreachable!("validated"),
        };
        Ok(spec)
    }

    pub fn pulses(&self, cfg: &FieldConfig) -> anyhow::Result<Vec<PulseSpec>> {
        (0..self.pulses.len()).map(|i| self.pulse(i, cfg)).collect()
    }

    /// Ensemble for the first two pulses; the default mean velocity launches
    /// atoms from the first resonance to reach the second after `delta_t`.
    pub fn ensemble(
        &self,
        cfg: &FieldConfig,
        first: &PulseSpec,
        second: &PulseSpec,
    ) -> anyhow::Result<EnsembleSpec> {
        let e = self
            .ensemble
            .as_ref()
            .ok_or_else(|| config_err("section `[ensemble]` is required for this command"))?;
        let dt = self.require_delta_t()?;
        let v_mean = match &e.v_mean {
            Some(v) => v.si(),
            None => {
                let g = g_effective(cfg, Level::Upper, self.sigma())?;
                (second.center(cfg)? - first.center(cfg)? + 0.5 * g * dt * dt) / dt
            }
        };
        Ok(EnsembleSpec {
            n: e.n,
            z_mean: e.z_mean.si(),
            z_rms: e.z_rms.si(),
            v_mean,
            v_rms: e.v_rms.si(),
            dz0: self.require_dz0()?,
            seed: self.seed,
            sigma: self.sigma(),
            mode: e.mode,
            survival_efficiency: e.survival_efficiency,
        })
    }
}
