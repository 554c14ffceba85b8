use std::fmt::Write as _;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use velsel::apparatus::{
    gradient_at_center, linearity_extent, optimal_half_separation, shifted_zero, stability_budget,
    CoilPair,
};
use velsel::breit_rabi::{eigenvalue, transition_angular_frequency};
use velsel::constants::TESLA_PER_METER_PER_GAUSS_PER_CM;
use velsel::dynamics::{g_effective, spread_width, WavepacketState};
use velsel::monte_carlo::{run_monte_carlo, write_atoms_csv};
use velsel::phase_space::selection_cell;
use velsel::probability::transition_probability;
use velsel::pulse::{
    detuning, position_width, position_width_low_field, rabi_frequency, validity_diagnostic,
    velocity_width, Localization,
};
use velsel::{FieldConfig, Level, PulseSpec, StretchedBranch};

use crate::config::RunConfig;

/// Text produced by a command: the primary output plus an optional JSON side report.
pub struct Output {
    pub primary: String,
    pub summary: Option<String>,
}

fn json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types always serialize")
}

/// Velocity of the trajectory from the first to the second resonance, at time `t`.
fn reference_velocity(
    cfg: &RunConfig,
    field: &FieldConfig,
    pulses: &[PulseSpec],
    t: f64,
) -> Result<Option<f64>> {
    let (Some(dt), [first, second, ..]) = (cfg.delta_t.as_ref().map(|q| q.si()), pulses) else {
        return Ok(None);
    };
    let g = g_effective(field, Level::Upper, cfg.sigma())?;
    let launch = (second.center(field)? - first.center(field)? + 0.5 * g * dt * dt) / dt;
    Ok(Some(launch - g * t))
}

pub fn scan(cfg: &RunConfig) -> Result<Output> {
    let scan = cfg.scan.as_ref().ok_or_else(|| {
        crate::config::ConfigError("section `[scan]` is required for `scan`".into())
    })?;
    let field = cfg.field()?;
    let sigma = cfg.sigma();
    let omega_a = match cfg.pulses.first() {
        Some(_) => cfg.pulse(0, &field)?.omega_a,
        None => field.species.delta_w,
    };
    let reference = PulseSpec::new(0.0, 1.0, omega_a, sigma)?;
    let lower = StretchedBranch::new(sigma, Level::Lower);
    let upper = StretchedBranch::new(sigma, Level::Upper);
    let (a, b) = (scan.from.si(), scan.to.si());
    let mut out = String::from("z_m,kz,V_minus_J,V_plus_J,transition_Hz,detuning_rad_s\n");
    for i in 0..scan.points {
        let z = a + (b - a) * i as f64 / (scan.points - 1) as f64;
        let kz = field.kz(z);
        let transition =
            transition_angular_frequency(sigma, z, &field) / (2.0 * std::f64::consts::PI);
        writeln!(
            out,
            "{z:.16e},{kz:.16e},{:.16e},{:.16e},{transition:.16e},{:.16e}",
            eigenvalue(lower, kz, &field.species),
            eigenvalue(upper, kz, &field.species),
            detuning(z, &reference, &field),
        )?;
    }
    Ok(Output {
        primary: out,
        summary: None,
    })
}

fn displacement(cfg: &RunConfig, field: &FieldConfig, pulses: &[PulseSpec]) -> Result<Option<f64>> {
    if let Some(c) = &cfg.coils {
        return Ok(Some(c.displacement.si()));
    }
    if let [first, second, ..] = pulses {
        let d = (second.center(field)? - first.center(field)?).abs();
        return Ok((d > 0.0).then_some(d));
    }
    Ok(None)
}

pub fn select(cfg: &RunConfig) -> Result<Output> {
    cfg.require_pulses(1)?;
    let field = cfg.field()?;
    field.require_gradient()?;
    let pulses = cfg.pulses(&field)?;
    let delta_t = cfg.delta_t.as_ref().map(|q| q.si());
    let dz0 = cfg.wavepacket.as_ref().map(|w| w.dz0.si());
    let shift = displacement(cfg, &field, &pulses)?;
    let mut notes = Vec::new();
    if delta_t.is_none() {
        notes.push("delta_t not given: delta_v_m_s omitted".to_owned());
    }
    if dz0.is_none() {
        notes.push("wavepacket.dz0 not given: validity_diagnostic omitted".to_owned());
    }
    if shift.is_none() {
        notes.push("no displacement (coils.displacement or two distinct resonances): stability_budget omitted".to_owned());
    }
    let mut reports = Vec::new();
    for (i, p) in pulses.iter().enumerate() {
        let z_center = p.center(&field)?;
        let general = position_width(p, &field, z_center)?;
        let low = position_width_low_field(p, &field, z_center)?;
        let mut r = json!({
            "index": i,
            "t0_s": p.t0,
            "tau_s": p.tau,
            "omega_a_rad_s": p.omega_a,
            "z_center_m": z_center,
            "rabi_rad_s": rabi_frequency(z_center, p, &field),
            "delta_z_m": { "general": general, "low_field": low.delta_z },
            "kz": low.kz,
            "low_field_valid": low.within_low_field,
        });
        if let Some(dt) = delta_t {
            r["delta_v_m_s"] = json!(velocity_width(general, dt)?);
        }
        if let Some(dz0) = dz0 {
            let v = reference_velocity(cfg, &field, &pulses, p.t0)?;
            if v.is_none() && i == 0 {
                notes.push(
                    "validity_diagnostic uses zero mean momentum (needs two pulses and delta_t)"
                        .to_owned(),
                );
            }
            let loc = Localization {
                z: z_center,
                p: field.species.mass * v.unwrap_or(0.0),
                dz0,
                dz_t0: spread_width(dz0, p.t0, field.species.mass),
                t0: p.t0,
            };
            r["validity_diagnostic"] = json!(validity_diagnostic(p, &field, &loc)?);
        }
        if let Some(d) = shift {
            let b = stability_budget(p, &field, d)?;
            r["stability_budget"] = json!({
                "criterion": "detuning drift below Omega_R",
                "displacement_m": b.displacement,
                "bias_tolerance_T": b.bias_tolerance,
                "bias_tolerance_G": b.bias_tolerance_gauss,
                "bias_reference_G": 0.2,
                "gradient_fractional_tolerance": b.gradient_fractional_tolerance,
            });
        }
        reports.push(r);
    }
    let report = json!({ "config": to_value(cfg), "pulses": reports, "notes": notes });
    Ok(Output {
        primary: json_text(&report),
        summary: None,
    })
}

pub fn probability(cfg: &RunConfig) -> Result<Output> {
    cfg.require_pulses(1)?;
    let dz0 = cfg.require_dz0()?;
    let field = cfg.field()?;
    field.require_gradient()?;
    let pulses = cfg.pulses(&field)?;
    let mut reports = Vec::new();
    for (i, p) in pulses.iter().enumerate() {
        let z = p.center(&field)?;
        let dz = spread_width(dz0, p.t0, field.species.mass);
        let level = if i % 2 == 0 {
            Level::Lower
        } else {
            Level::Upper
        };
        let state = WavepacketState::coherent(z, 0.0, dz, level, cfg.sigma(), p.t0)?;
        let est = transition_probability(&state, p, &field, &cfg.quadrature)?;
        reports.push(json!({
            "index": i,
            "t0_s": p.t0,
            "tau_s": p.tau,
            "z_m": z,
            "dz_m": dz,
            "probability": est.probability,
            "error_estimate": est.error,
            "intervals": est.intervals,
            "evaluations": est.evaluations,
        }));
    }
    let report = json!({ "config": to_value(cfg), "pulses": reports });
    Ok(Output {
        primary: json_text(&report),
        summary: None,
    })
}

pub fn bands(cfg: &RunConfig) -> Result<Output> {
    cfg.require_pulses(2)?;
    let dt = cfg.require_delta_t()?;
    let field = cfg.field()?;
    let pulses = cfg.pulses(&field)?;
    let cell = selection_cell(&pulses[0], &pulses[1], &field, dt)?;
    let margin = 2.0 * cell.velocity_width();
    let (v_lo, v_hi) = (cell.v_min - margin, cell.v_max + margin);
    let mut out = String::from("curve,point,z_m,v_m_s\n");
    for (k, band) in cell.bands.iter().enumerate() {
        for (side, offset) in [("lower", -band.half_width), ("upper", band.half_width)] {
            // a_z z + a_v v = centre + offset, traced at the two end velocities.
            for (j, v) in [v_lo, v_hi].into_iter().enumerate() {
                let z = (band.center + offset - band.a_v * v) / band.a_z;
                writeln!(out, "band{}_{side},{j},{z:.16e},{v:.16e}", k + 1)?;
            }
        }
    }
    for (j, (z, v)) in cell
        .vertices
        .iter()
        .chain(cell.vertices.first())
        .enumerate()
    {
        writeln!(out, "cell,{j},{z:.16e},{v:.16e}")?;
    }
    Ok(Output {
        primary: out,
        summary: None,
    })
}

pub fn simulate(cfg: &RunConfig) -> Result<Output> {
    cfg.require_pulses(2)?;
    let dt = cfg.require_delta_t()?;
    let field = cfg.field()?;
    field.require_gradient()?;
    let pulses = cfg.pulses(&field)?;
    let spec = cfg.ensemble(&field, &pulses[0], &pulses[1])?;
    let result = run_monte_carlo(&spec, &pulses[0], &pulses[1], &field, dt, &cfg.quadrature)?;
    let mut csv = Vec::new();
    write_atoms_csv(&result.atoms, &mut csv).context("formatting CSV")?;
    let dz1 = position_width(&pulses[0], &field, result.cell.z_start)?;
    let predicted = velocity_width(dz1, dt)?;
    let s = &result.summary;
    let summary = json!({
        "config": to_value(cfg),
        "ensemble": to_value(&spec),
        "summary": to_value(s),
        "analytic": {
            "delta_v_m_s": predicted,
            "cell_velocity_width_m_s": result.cell.velocity_width(),
            "v_f_m_s": result.cell.v_center,
            "z_f_m": result.cell.z_center,
            "cell_area_m2_s": result.cell.area(),
        },
        "velocity_width_ratio": s.velocity_full_width.map(|w| w / predicted),
    });
    Ok(Output {
        primary: String::from_utf8(csv).expect("CSV is ASCII"),
        summary: Some(json_text(&summary)),
    })
}

pub fn coils(cfg: &RunConfig) -> Result<Output> {
    let c = cfg.coils.as_ref().ok_or_else(|| {
        crate::config::ConfigError("section `[coils]` is required for `coils`".into())
    })?;
    let (radius, d0) = (c.radius.si(), c.half_separation.si());
    let current = match &c.current {
        Some(i) => i.si(),
        None => CoilPair::current_for_gradient(radius, d0, c.turns, cfg.eta.si())?,
    };
    let pair = CoilPair::new(radius, current, d0, c.turns)?;
    let eta = gradient_at_center(&pair);
    let mut notes = Vec::new();
    let mut report = json!({
        "config": to_value(cfg),
        "current_A": current,
        "ampere_turns": current * c.turns as f64,
        "gradient_T_m": eta,
        "gradient_G_cm": eta / TESLA_PER_METER_PER_GAUSS_PER_CM,
        "optimal_half_separation_m": optimal_half_separation(radius),
        "max_gradient_geometry": (d0 - optimal_half_separation(radius)).abs() <= 1e-9 * radius,
    });
    if eta == 0.0 {
        notes.push("zero gradient: no field zero, no selection possible".to_owned());
    } else {
        let extent = linearity_extent(&pair, 0.01, 1e-3 * d0.min(radius) / 100.0);
        report["linearity_extent_1pct_m"] = json!(extent);
        report["linearity_extent_over_min_r_d0"] = json!(extent / d0.min(radius));
        report["shifted_zero_m"] = json!(shifted_zero(eta, cfg.bias.si())?);
        if !cfg.pulses.is_empty() {
            let field = FieldConfig::new(cfg.field()?.species, eta, cfg.bias.si())?;
            let pulse = cfg.pulse(0, &field)?;
            let b = stability_budget(&pulse, &field, c.displacement.si())?;
            report["stability_budget"] = json!({
                "criterion": "detuning drift below Omega_R",
                "displacement_m": b.displacement,
                "rabi_rad_s": b.rabi,
                "delta_z_m": b.delta_z,
                "bias_tolerance_T": b.bias_tolerance,
                "bias_tolerance_G": b.bias_tolerance_gauss,
                "bias_reference_G": 0.2,
                "gradient_fractional_tolerance": b.gradient_fractional_tolerance,
            });
        } else {
            notes.push("no pulses: stability_budget omitted".to_owned());
        }
    }
    report["notes"] = json!(notes);
    Ok(Output {
        primary: json_text(&report),
        summary: None,
    })
}
