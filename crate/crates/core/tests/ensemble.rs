use velsel::dynamics::{evolve_expected, g_effective, WavepacketState};
use velsel::monte_carlo::{principal_axis_slope, run_monte_carlo, EnsembleSpec, ProbabilityMode};
use velsel::probability::{point_probability, QuadratureSettings};
use velsel::quadrature::{integrate, Tolerance};
use velsel::{get_species, FieldConfig, Level, PulseSpec, Sigma};

const DT: f64 = 0.028;

fn setup() -> (FieldConfig, PulseSpec, PulseSpec, f64) {
    let c = FieldConfig::new(get_species("Rb87").unwrap(), 0.25, 0.0).unwrap();
    let p1 = PulseSpec::resonant_at(0.0, 0.0, 10e-6, Sigma::Plus, &c).unwrap();
    let p2 = PulseSpec::resonant_at(0.01, DT, 10e-6, Sigma::Plus, &c).unwrap();
    let g = g_effective(&c, Level::Upper, Sigma::Plus).unwrap();
    (c, p1, p2, g)
}

fn cloud(n: usize, seed: u64, mode: ProbabilityMode, g: f64) -> EnsembleSpec {
    EnsembleSpec {
        n,
        z_mean: 0.0,
        z_rms: 1e-3,
        v_mean: g * DT,
        v_rms: 0.01,
        dz0: 3e-6,
        seed,
        sigma: Sigma::Plus,
        mode,
        survival_efficiency: 1.0,
    }
}

#[test]
fn first_band_survivors_lie_along_one_over_delta_t() {
    let (c, p1, p2, g) = setup();
    let r = run_monte_carlo(
        &cloud(100_000, 5, ProbabilityMode::PointThreshold, g),
        &p1,
        &p2,
        &c,
        DT,
        &QuadratureSettings::default(),
    )
    .unwrap();
    let pts: Vec<(f64, f64)> = r
        .atoms
        .iter()
        .filter(|a| a.survived_p1)
        .map(|a| (a.z_second, a.v_second))
        .collect();
    assert!(pts.len() > 300);
    let slope = principal_axis_slope(&pts).unwrap();
    assert!((slope * DT - 1.0).abs() < 0.02, "slope {slope}");
}

#[test]
fn expected_survivors_match_band_integral() {
    // For bands much narrower than the cloud the kept fraction is
    // rho(z0R, v0) * (int P1 dz)(int P2 dz) / delta_t.
    let (c, p1, p2, g) = setup();
    let spec = cloud(100_000, 9, ProbabilityMode::Point, g);
    let r = run_monte_carlo(&spec, &p1, &p2, &c, DT, &QuadratureSettings::default()).unwrap();
    let tol = Tolerance {
        rel: 1e-10,
        abs: 0.0,
        max_subdivisions: 1 << 16,
    };
    let a1 = integrate(|z| point_probability(z, &p1, &c), -2e-3, 2e-3, 64, tol)
        .unwrap()
        .value;
    let a2 = integrate(|z| point_probability(z, &p2, &c), 8e-3, 12e-3, 64, tol)
        .unwrap()
        .value;
    let dv0 = r.cell.v_center + g * DT - spec.v_mean;
    let rho = (-0.5 * (dv0 / spec.v_rms).powi(2)).exp()
        / (2.0 * std::f64::consts::PI * spec.z_rms * spec.v_rms);
    let oracle = rho * a1 * a2 / DT * spec.n as f64;
    let ratio = r.summary.expected_survivors / oracle;
    assert!(
        (ratio - 1.0).abs() < 0.25,
        "expected {} oracle {oracle}",
        r.summary.expected_survivors
    );
}

#[test]
fn cleaning_separates_the_two_levels() {
    let (c, _, _, g) = setup();
    let up = WavepacketState::coherent(0.0, g * DT, 3e-6, Level::Upper, Sigma::Plus, 0.0).unwrap();
    let a = evolve_expected(&up, DT, &c).unwrap();
    let b = evolve_expected(&up.with_level(Level::Lower), DT, &c).unwrap();
    assert!((a.z - b.z).abs() > 1e-3, "{}", (a.z - b.z).abs());
}

#[test]
fn wide_bands_keep_the_whole_cloud() {
    let (c, _, _, g) = setup();
    // Sub-nanosecond pulses select centimetre bands around the cloud's own trajectory.
    let p1 = PulseSpec::resonant_at(0.0, 0.0, 2e-11, Sigma::Plus, &c).unwrap();
    let p2 = PulseSpec::resonant_at(0.5 * g * DT * DT, DT, 2e-11, Sigma::Plus, &c).unwrap();
    let spec = EnsembleSpec {
        z_rms: 1e-6,
        v_rms: 1e-6,
        ..cloud(2000, 1, ProbabilityMode::Point, g)
    };
    let r = run_monte_carlo(&spec, &p1, &p2, &c, DT, &QuadratureSettings::default()).unwrap();
    assert!(r
        .atoms
        .iter()
        .all(|a| a.p1 > 1.0 - 1e-6 && a.p2 > 1.0 - 1e-6));
    assert_eq!(r.summary.fraction_p2, 1.0);
}

#[test]
fn conditional_width_matches_profile_correlation() {
    // Oracle: sqrt(24) * RMS of the cross-correlation of the two point-mode
    // Rabi profiles over the cell support, from an FFT on a 5 nm grid (numpy):
    // 1.0627 times 2 dz / dt.
    let (c, p1, p2, g) = setup();
    let r = run_monte_carlo(
        &cloud(100_000, 21, ProbabilityMode::Point, g),
        &p1,
        &p2,
        &c,
        DT,
        &QuadratureSettings::default(),
    )
    .unwrap();
    let ratio =
        r.summary.velocity_full_width.unwrap() / (2.0 * r.cell.bands[0].half_width * 2.0 / DT);
    assert!((ratio - 1.0627).abs() < 0.02, "{ratio}");
}
