use proptest::prelude::*;
use velsel::apparatus::{on_axis_field, CoilPair};
use velsel::breit_rabi::{
    d_transition_dz, eigenvalue, epsilon, reduced_eigenvalue, transition_angular_frequency,
};
use velsel::dynamics::{evolve, WavepacketState};
use velsel::phase_space::{band_from_first_pulse, band_from_second_pulse};
use velsel::probability::{transition_probability, QuadratureSettings};
use velsel::pulse::{coupling_omega0, position_width, position_width_low_field, rabi_frequency};
use velsel::quadrature::{integrate, Tolerance};
use velsel::{get_species, FieldConfig, Level, PulseSpec, Sigma, StretchedBranch};

const SPECIES: [&str; 4] = ["Rb87", "Rb85", "Na23", "Cs133"];

fn cfg(name: &str, eta: f64) -> FieldConfig {
    FieldConfig::new(get_species(name).unwrap(), eta, 0.0).unwrap()
}

fn sigma() -> impl Strategy<Value = Sigma> {
    prop_oneof![Just(Sigma::Plus), Just(Sigma::Minus)]
}

fn level() -> impl Strategy<Value = Level> {
    prop_oneof![Just(Level::Lower), Just(Level::Upper)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn transition_slope_matches_finite_difference(
        s in 0usize..4, sg in sigma(), z in -0.02f64..0.02, eta in 0.05f64..1.0,
    ) {
        let c = cfg(SPECIES[s], eta);
        let h = 1e-7;
        let fd = (transition_angular_frequency(sg, z + h, &c)
            - transition_angular_frequency(sg, z - h, &c)) / (2.0 * h);
        let exact = d_transition_dz(sg, z, &c);
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{fd} {exact}");
    }

    #[test]
    fn branch_reflection(s in 0usize..4, lv in level(), x in -5.0f64..5.0) {
        let sp = get_species(SPECIES[s]).unwrap();
        let a = eigenvalue(StretchedBranch::new(Sigma::Plus, lv), x, &sp);
        let b = eigenvalue(StretchedBranch::new(Sigma::Minus, lv), -x, &sp);
        prop_assert!((a - b).abs() <= 1e-15 * sp.hyperfine_energy());
    }

    #[test]
    fn epsilon_quadratic_in_gradient(s in 0usize..4, eta in 0.01f64..2.0) {
        let e1 = epsilon(&cfg(SPECIES[s], eta));
        let e2 = epsilon(&cfg(SPECIES[s], 2.0 * eta));
        prop_assert!((e2 / e1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_lower_level_is_smooth_near_zero(s in 0usize..4, sg in sigma(), x in -1e-3f64..1e-3) {
        let sp = get_species(SPECIES[s]).unwrap();
        let br = StretchedBranch::new(sg, Level::Lower);
        let x0 = reduced_eigenvalue(br, 0.0, &sp);
        let h = 1e-6;
        let slope = (reduced_eigenvalue(br, h, &sp) - reduced_eigenvalue(br, -h, &sp)) / (2.0 * h);
        let linear = x0 + slope * x;
        prop_assert!((reduced_eigenvalue(br, x, &sp) - linear).abs() < 1e-6);
    }

    #[test]
    fn low_field_width_linearization(tau in 2e-6f64..50e-6, z in -2e-3f64..2e-3) {
        let c = cfg("Rb87", 0.25);
        let p = PulseSpec::resonant_at(z, 0.0, tau, Sigma::Plus, &c).unwrap();
        let general = position_width(&p, &c, z).unwrap();
        let low = position_width_low_field(&p, &c, z).unwrap();
        prop_assert!(low.within_low_field);
        prop_assert!((low.delta_z / general - 1.0).abs() < 1e-2);
    }

    #[test]
    fn rabi_frequency_bounded_below(tau in 1e-6f64..1e-4, z in -0.05f64..0.05, z0 in -0.01f64..0.01) {
        let c = cfg("Rb87", 0.25);
        let p = PulseSpec::resonant_at(z0, 0.0, tau, Sigma::Plus, &c).unwrap();
        prop_assert!(rabi_frequency(z, &p, &c) >= 2.0 * coupling_omega0(&p) * (1.0 - 1e-15));
    }

    #[test]
    fn width_mirror_symmetry(s in 0usize..4, tau in 2e-6f64..50e-6, z in -0.02f64..0.02) {
        let c = cfg(SPECIES[s], 0.25);
        let p = PulseSpec::resonant_at(z, 0.0, tau, Sigma::Plus, &c).unwrap();
        let m = PulseSpec::resonant_at(-z, 0.0, tau, Sigma::Minus, &c).unwrap();
        let a = position_width(&p, &c, z).unwrap();
        let b = position_width(&m, &c, -z).unwrap();
        prop_assert!((a / b - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spreading_keeps_momentum_width(dz0 in 0.5e-6f64..20e-6, t1 in 0.0f64..0.05, t2 in 0.0f64..0.05) {
        let c = cfg("Rb87", 0.25);
        let s = WavepacketState::coherent(0.0, 0.3, dz0, Level::Upper, Sigma::Plus, 0.0).unwrap();
        let (early, late) = (t1.min(t2), t1.max(t2));
        let a = evolve(&s, early, &c).unwrap();
        let b = evolve(&s, late, &c).unwrap();
        prop_assert_eq!(a.dp, s.dp);
        prop_assert_eq!(b.dp, s.dp);
        prop_assert!(b.dz >= a.dz && a.dz >= s.dz);
    }

    #[test]
    fn coil_field_odd(z in -0.2f64..0.2, r in 0.01f64..0.2, d in 0.005f64..0.2, i in -50.0f64..50.0) {
        let c = CoilPair::new(r, i, d, 10).unwrap();
        prop_assert_eq!(on_axis_field(&c, -z), -on_axis_field(&c, z));
    }

    #[test]
    fn band_membership_follows_trajectories(
        dz in -9e-6f64..9e-6, v in -0.05f64..0.05, dt in 1e-3f64..0.05,
    ) {
        let c = cfg("Rb87", 0.25);
        let p = PulseSpec::resonant_at(0.0, 0.0, 10e-6, Sigma::Plus, &c).unwrap();
        let band = band_from_first_pulse(&p, &c, dt).unwrap();
        let start = WavepacketState::coherent(dz, v, 1e-6, Level::Upper, Sigma::Plus, 0.0).unwrap();
        let end = evolve(&start, dt, &c).unwrap();
        prop_assert!(band.contains(end.z, end.v));
        let outside = WavepacketState { z: 2e-5 + dz.abs(), ..start };
        let end = evolve(&outside, dt, &c).unwrap();
        prop_assert!(!band.contains(end.z, end.v));

        let second = band_from_second_pulse(&p, &c).unwrap();
        prop_assert!(second.contains(0.0, v));
        prop_assert!(!second.contains(2e-5, v));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn probability_is_a_probability(
        tau in 2e-6f64..40e-6, dz in 0.3e-6f64..30e-6, offset in -60e-6f64..60e-6,
    ) {
        let c = cfg("Rb87", 0.25);
        let p = PulseSpec::resonant_at(0.0, 0.0, tau, Sigma::Plus, &c).unwrap();
        let s = WavepacketState::coherent(offset, 0.0, dz, Level::Lower, Sigma::Plus, 0.0).unwrap();
        let est = transition_probability(&s, &p, &c, &QuadratureSettings::default()).unwrap();
        prop_assert!((0.0..=1.0).contains(&est.probability));
    }

    #[test]
    fn probability_stable_under_tighter_tolerance(tau in 4e-6f64..20e-6, dz in 1e-6f64..10e-6) {
        let c = cfg("Rb87", 0.25);
        let p = PulseSpec::resonant_at(0.0, 0.0, tau, Sigma::Plus, &c).unwrap();
        let s = WavepacketState::coherent(0.0, 0.0, dz, Level::Lower, Sigma::Plus, 0.0).unwrap();
        let q = QuadratureSettings::default();
        let tight = QuadratureSettings { rel_tol: q.rel_tol / 2.0, ..q };
        let a = transition_probability(&s, &p, &c, &q).unwrap().probability;
        let b = transition_probability(&s, &p, &c, &tight).unwrap().probability;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn probability_mirror_symmetry(tau in 4e-6f64..20e-6, dz in 1e-6f64..10e-6, z in -5e-3f64..5e-3) {
        let c = cfg("Rb87", 0.25);
        let q = QuadratureSettings::default();
        let p = PulseSpec::resonant_at(z, 0.0, tau, Sigma::Plus, &c).unwrap();
        let m = PulseSpec::resonant_at(-z, 0.0, tau, Sigma::Minus, &c).unwrap();
        let sp = WavepacketState::coherent(z + 2e-6, 0.0, dz, Level::Lower, Sigma::Plus, 0.0).unwrap();
        let sm = WavepacketState::coherent(-z - 2e-6, 0.0, dz, Level::Lower, Sigma::Minus, 0.0).unwrap();
        let a = transition_probability(&sp, &p, &c, &q).unwrap().probability;
        let b = transition_probability(&sm, &m, &c, &q).unwrap().probability;
        prop_assert!((a - b).abs() < 1e-8);
    }
}

/// Midpoint Riemann sum with `n` slices.
fn riemann<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[test]
fn quadrature_matches_riemann_sum() {
    let tol = Tolerance {
        rel: 1e-12,
        abs: 0.0,
        max_subdivisions: 1 << 14,
    };
    type Case<'a> = (&'a dyn Fn(f64) -> f64, f64, f64);
    let cases: [Case; 3] = [
        (
            &|x: f64| (-x * x).exp() * (5.0 * x).cos().powi(2),
            -4.0,
            4.0,
        ),
        (&|x: f64| 1.0 / (1.0 + 25.0 * x * x), -1.0, 1.0),
        (&|x: f64| (30.0 * x).sin().powi(2) / (1.0 + x * x), 0.0, 3.0),
    ];
    for (f, a, b) in cases {
        let q = integrate(f, a, b, 8, tol).unwrap().value;
        let r = riemann(f, a, b, 1_000_000);
        assert!((q - r).abs() <= 1e-8 * r.abs(), "{q} {r}");
    }
}
