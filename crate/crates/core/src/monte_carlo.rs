//! Seeded Monte Carlo of the two-pulse selection sequence.
//!
//! Every atom owns a ChaCha8 stream `(seed, atom index)`, so results do not
//! depend on how the ensemble is partitioned across workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::breit_rabi::{FieldConfig, Level, Sigma};
use crate::dynamics::{evolve, spread_width, WavepacketState};
use crate::error::{Error, Result};
use crate::phase_space::{selection_cell, SelectionCell};
use crate::probability::{point_probability, transition_probability, QuadratureSettings};
use crate::pulse::PulseSpec;

/// How each atom's transfer probability is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilityMode {
    /// Rabi formula averaged over the wavepacket density, Bernoulli draw.
    Averaged,
    /// Rabi formula at the expected position, Bernoulli draw.
    Point,
    /// Rabi formula at the expected position, transferred iff `p >= 1/2`.
    PointThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub z_mean: f64,
    pub z_rms: f64,
    pub v_mean: f64,
    pub v_rms: f64,
    /// Wavepacket RMS width of each atom at the first pulse (m).
    pub dz0: f64,
    pub seed: u64,
    pub sigma: Sigma,
    pub mode: ProbabilityMode,
    /// Probability that a cleaning pulse keeps a transferred atom.
    pub survival_efficiency: f64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid(
                "n",
                "ensemble must contain at least one atom",
            ));
        }
        for (name, value) in [
            ("z_rms", self.z_rms),
            ("v_rms", self.v_rms),
            ("dz0", self.dz0),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        if !(0.0..=1.0).contains(&self.survival_efficiency) {
            return Err(Error::invalid("survival_efficiency", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// One simulated atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomRecord {
    pub id: usize,
    pub z0: f64,
    pub v0: f64,
    /// First- and second-pulse transfer probabilities. `p2` is evaluated on the
    /// upper-level trajectory whether or not the atom survived the first pulse.
    pub p1: f64,
    pub p2: f64,
    pub survived_p1: bool,
    pub survived_p2: bool,
    /// Expected position and velocity at the second pulse on the upper-level trajectory.
    pub z_second: f64,
    pub v_second: f64,
}

impl AtomRecord {
    /// Position and velocity at the second pulse, for atoms kept by both pulses.
    pub fn final_state(&self) -> Option<(f64, f64)> {
        self.survived_p2.then_some((self.z_second, self.v_second))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub n: usize,
    pub survivors_p1: usize,
    pub survivors_p2: usize,
    pub fraction_p1: f64,
    pub fraction_p2: f64,
    /// `sum_i eff^2 p1_i p2_i`: expected number of final survivors.
    pub expected_survivors: f64,
    pub z_rms: Option<f64>,
    pub v_rms: Option<f64>,
    /// `max - min` over final survivors.
    pub z_range: Option<f64>,
    pub v_range: Option<f64>,
    /// `sqrt(24)` times the RMS second-pulse velocity of the selected atoms,
    /// over the analytic cell's velocity support. Each sampled atom is weighted
    /// by its selection probability integrated over the initial position
    /// distribution at its sampled velocity. For the triangular marginal of
    /// two equal bands this equals the support width.
    pub velocity_full_width: Option<f64>,
    /// Same statistic weighted by each atom's own `p1 * p2`; unbiased but
    /// noisier, since only atoms sampled inside both bands contribute.
    pub velocity_full_width_sampled: Option<f64>,
    /// `v_max - v_min` of the analytic cell.
    pub analytic_velocity_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub atoms: Vec<AtomRecord>,
    pub summary: EnsembleSummary,
    pub cell: SelectionCell,
}

impl EnsembleResult {
    pub fn survivors(&self) -> impl Iterator<Item = &AtomRecord> {
        self.atoms.iter().filter(|a| a.survived_p2)
    }
}

struct Context<'a> {
    spec: &'a EnsembleSpec,
    first: &'a PulseSpec,
    second: &'a PulseSpec,
    cfg: &'a FieldConfig,
    delta_t: f64,
    quadrature: &'a QuadratureSettings,
}

impl Context<'_> {
    fn probability(&self, state: &WavepacketState, pulse: &PulseSpec) -> Result<f64> {
        match self.spec.mode {
            ProbabilityMode::Averaged => {
                Ok(transition_probability(state, pulse, self.cfg, self.quadrature)?.probability)
            }
            ProbabilityMode::Point | ProbabilityMode::PointThreshold => {
                Ok(point_probability(state.z, pulse, self.cfg))
            }
        }
    }

    fn transferred(&self, p: f64, u: f64) -> bool {
        match self.spec.mode {
            ProbabilityMode::PointThreshold => p >= 0.5,
            _ => u < p,
        }
    }

    fn atom(&self, id: usize) -> Result<AtomRecord> {
        let spec = self.spec;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(id as u64);
        // Fixed draw order keeps every stream aligned regardless of outcomes.
        let gz: f64 = rng.sample(StandardNormal);
        let gv: f64 = rng.sample(StandardNormal);
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let clean1: f64 = rng.random();
        let clean2: f64 = rng.random();

        let z0 = spec.z_mean + spec.z_rms * gz;
        let v0 = spec.v_mean + spec.v_rms * gv;
        let start = WavepacketState::coherent(z0, v0, spec.dz0, Level::Lower, spec.sigma, 0.0)?;

        let p1 = self.probability(&start, self.first)?;
        let survived_p1 = self.transferred(p1, u1) && clean1 < spec.survival_efficiency;

        let moved = evolve(&start.with_level(Level::Upper), self.delta_t, self.cfg)?;
        let p2 = self.probability(&moved, self.second)?;
        let survived_p2 =
            survived_p1 && self.transferred(p2, u2) && clean2 < spec.survival_efficiency;

        Ok(AtomRecord {
            id,
            z0,
            v0,
            p1,
            p2,
            survived_p1,
            survived_p2,
            z_second: moved.z,
            v_second: moved.v,
        })
    }

    /// Transfer probability of a wavepacket of width `width` centred at `z`.
    fn profile_value(&self, z: f64, width: f64, pulse: &PulseSpec) -> Result<f64> {
        let point = || point_probability(z, pulse, self.cfg);
        Ok(match self.spec.mode {
            ProbabilityMode::Averaged => {
                let state =
                    WavepacketState::coherent(z, 0.0, width, Level::Upper, self.spec.sigma, 0.0)?;
                transition_probability(&state, pulse, self.cfg, self.quadrature)?.probability
            }
            ProbabilityMode::Point => point(),
            ProbabilityMode::PointThreshold => f64::from(u8::from(point() >= 0.5)),
        })
    }

    fn chunk(&self, range: std::ops::Range<usize>) -> Result<Vec<AtomRecord>> {
        range.map(|i| self.atom(i)).collect()
    }
}

fn prepare(
    spec: &EnsembleSpec,
    first: &PulseSpec,
    second: &PulseSpec,
    cfg: &FieldConfig,
    delta_t: f64,
    quadrature: &QuadratureSettings,
) -> Result<SelectionCell> {
    spec.validate()?;
    quadrature.validate()?;
    if first.sigma != spec.sigma || second.sigma != spec.sigma {
        return Err(Error::invalid(
            "sigma",
            "pulses and ensemble must address the same branch",
        ));
    }
    selection_cell(first, second, cfg, delta_t)
}

fn chunk_ranges(n: usize, partitions: usize) -> Vec<std::ops::Range<usize>> {
    let parts = partitions.clamp(1, n);
    (0..parts)
        .map(|k| (k * n / parts)..((k + 1) * n / parts))
        .collect()
}

/// Runs the ensemble with the default strategy (parallel when the `parallel`
/// feature is enabled).
pub fn run_monte_carlo(
    spec: &EnsembleSpec,
    first: &PulseSpec,
    second: &PulseSpec,
    cfg: &FieldConfig,
    delta_t: f64,
    quadrature: &QuadratureSettings,
) -> Result<EnsembleResult> {
    let partitions = if cfg!(feature = "parallel") {
        spec.n.div_ceil(1024)
    } else {
        1
    };
    run_monte_carlo_partitioned(spec, first, second, cfg, delta_t, quadrature, partitions)
}

/// Single-threaded reference path.
pub fn run_monte_carlo_sequential(
    spec: &EnsembleSpec,
    first: &PulseSpec,
    second: &PulseSpec,
    cfg: &FieldConfig,
    delta_t: f64,
    quadrature: &QuadratureSettings,
) -> Result<EnsembleResult> {
    let cell = prepare(spec, first, second, cfg, delta_t, quadrature)?;
    let ctx = Context {
        spec,
        first,
        second,
        cfg,
        delta_t,
        quadrature,
    };
    let atoms = ctx.chunk(0..spec.n)?;
    finish(&ctx, atoms, cell)
}

/// Splits the atoms into `partitions` contiguous chunks, each one a unit of
/// parallel work. Output is identical for every partition count.
pub fn run_monte_carlo_partitioned(
    spec: &EnsembleSpec,
    first: &PulseSpec,
    second: &PulseSpec,
    cfg: &FieldConfig,
    delta_t: f64,
    quadrature: &QuadratureSettings,
    partitions: usize,
) -> Result<EnsembleResult> {
    let cell = prepare(spec, first, second, cfg, delta_t, quadrature)?;
    let ctx = Context {
        spec,
        first,
        second,
        cfg,
        delta_t,
        quadrature,
    };
    let ranges = chunk_ranges(spec.n, partitions);

    #[cfg(feature = "parallel")]
    let chunks: Vec<Result<Vec<AtomRecord>>> = {
        use rayon::prelude::*;
        ranges.into_par_iter().map(|r| ctx.chunk(r)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let chunks: Vec<Result<Vec<AtomRecord>>> = ranges.into_iter().map(|r| ctx.chunk(r)).collect();

    let mut atoms = Vec::with_capacity(spec.n);
    for chunk in chunks {
        atoms.extend(chunk?);
    }
    finish(&ctx, atoms, cell)
}

fn rms(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Some((values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt())
}

fn range(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(hi - lo)
}

fn full_width(samples: impl Iterator<Item = (f64, f64)>, center: f64) -> Option<f64> {
    let (mut w_sum, mut wv, mut wv2) = (0.0, 0.0, 0.0);
    for (w, v) in samples {
        let dv = v - center;
        w_sum += w;
        wv += w * dv;
        wv2 += w * dv * dv;
    }
    if !(w_sum > 0.0) {
        return None;
    }
    let mean = wv / w_sum;
    let var = (wv2 / w_sum - mean * mean).max(0.0);
    Some(24f64.sqrt() * var.sqrt())
}

fn in_support<'a>(
    atoms: &'a [AtomRecord],
    cell: &'a SelectionCell,
) -> impl Iterator<Item = &'a AtomRecord> {
    atoms
        .iter()
        .filter(|a| (cell.v_min..=cell.v_max).contains(&a.v_second))
}

/// Selection probability tabulated on a uniform grid; zero outside it.
struct Profile {
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl Profile {
    fn tabulate(
        ctx: &Context,
        pulse: &PulseSpec,
        center: f64,
        half_span: f64,
        step: f64,
        width: f64,
    ) -> Result<Self> {
        let count = (2.0 * half_span / step).ceil() as usize + 1;
        let start = center - half_span;
        let values = (0..count)
            .map(|j| ctx.profile_value(start + j as f64 * step, width, pulse))
            .collect::<Result<_>>()?;
        Ok(Self {
            start,
            step,
            values,
        })
    }

    fn at(&self, z: f64) -> f64 {
        let x = (z - self.start) / self.step;
        if !(x >= 0.0) {
            return 0.0;
        }
        let j = x.floor() as usize;
        match (self.values.get(j), self.values.get(j + 1)) {
            (Some(&a), Some(&b)) => a + (b - a) * (x - j as f64),
            (Some(&a), None) if x == j as f64 => a,
            _ => 0.0,
        }
    }
}

/// Grid resolution and extent, in units of the narrower band width.
const STEPS_PER_WIDTH: f64 = 50.0;
const SPAN_WIDTHS: f64 = 40.0;

/// Full width with each atom weighted by `int rho(z0) P1(z0) P2(z0 + s(v0)) dz0`,
/// where `s(v0)` is the displacement between the pulses at the atom's velocity.
fn conditional_velocity_full_width(
    ctx: &Context,
    atoms: &[AtomRecord],
    cell: &SelectionCell,
) -> Result<Option<f64>> {
    let spec = ctx.spec;
    if spec.survival_efficiency == 0.0 {
        return Ok(None);
    }
    let (dz1, dz2) = (
        2.0 * cell.bands[0].half_width,
        2.0 * cell.bands[1].half_width,
    );
    let step = dz1.min(dz2) / STEPS_PER_WIDTH;
    let span = SPAN_WIDTHS * dz1;
    let width2 = spread_width(spec.dz0, ctx.delta_t, ctx.cfg.species.mass);
    let p1 = Profile::tabulate(ctx, ctx.first, cell.z_start, span, step, spec.dz0)?;
    let p2 = Profile::tabulate(
        ctx,
        ctx.second,
        cell.z_center,
        span + dz1 + dz2,
        step,
        width2,
    )?;
    let density: Vec<f64> = (0..p1.values.len())
        .map(|j| {
            let u = (p1.start + j as f64 * step - spec.z_mean) / spec.z_rms;
            (-0.5 * u * u).exp() * p1.values[j]
        })
        .collect();
    let samples = in_support(atoms, cell).map(|a| {
        let shift = a.z_second - a.z0;
        let w: f64 = density
            .iter()
            .enumerate()
            .map(|(j, d)| d * p2.at(p1.start + j as f64 * step + shift))
            .sum();
        (w, a.v_second)
    });
    Ok(full_width(samples, cell.v_center))
}

/// Full width with each atom weighted by its own `p1 * p2`.
pub fn sampled_velocity_full_width(atoms: &[AtomRecord], cell: &SelectionCell) -> Option<f64> {
    full_width(
        in_support(atoms, cell).map(|a| (a.p1 * a.p2, a.v_second)),
        cell.v_center,
    )
}

fn finish(ctx: &Context, atoms: Vec<AtomRecord>, cell: SelectionCell) -> Result<EnsembleResult> {
    let spec = ctx.spec;
    let survivors_p1 = atoms.iter().filter(|a| a.survived_p1).count();
    let finals: Vec<&AtomRecord> = atoms.iter().filter(|a| a.survived_p2).collect();
    let zs: Vec<f64> = finals.iter().map(|a| a.z_second).collect();
    let vs: Vec<f64> = finals.iter().map(|a| a.v_second).collect();
    let eff2 = spec.survival_efficiency * spec.survival_efficiency;
    let expected_survivors = atoms.iter().map(|a| a.p1 * a.p2 * eff2).sum();
    let n = atoms.len();
    let summary = EnsembleSummary {
        n,
        survivors_p1,
        survivors_p2: finals.len(),
        fraction_p1: survivors_p1 as f64 / n as f64,
        fraction_p2: finals.len() as f64 / n as f64,
        expected_survivors,
        z_rms: rms(&zs),
        v_rms: rms(&vs),
        z_range: range(&zs),
        v_range: range(&vs),
        velocity_full_width: conditional_velocity_full_width(ctx, &atoms, &cell)?,
        velocity_full_width_sampled: if spec.survival_efficiency > 0.0 {
            sampled_velocity_full_width(&atoms, &cell)
        } else {
            None
        },
        analytic_velocity_width: cell.velocity_width(),
    };
    Ok(EnsembleResult {
        atoms,
        summary,
        cell,
    })
}

pub const CSV_HEADER: &str = "atom_id,z0,v0,survived_p1,survived_p2,z_final,v_final,p1,p2";

/// Writes one row per atom in id order. Reals use 17 significant digits;
/// `z_final` and `v_final` are empty for discarded atoms.
pub fn write_atoms_csv<W: std::io::Write>(atoms: &[AtomRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for a in atoms {
        let (zf, vf) = match a.final_state() {
            Some((z, v)) => (format!("{z:.16e}"), format!("{v:.16e}")),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{},{:.16e},{:.16e},{},{},{},{},{:.16e},{:.16e}",
            a.id, a.z0, a.v0, a.survived_p1 as u8, a.survived_p2 as u8, zf, vf, a.p1, a.p2
        )?;
    }
    Ok(())
}

/// Slope `dv/dz` of the major principal axis of a point cloud.
pub fn principal_axis_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mz = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut szz, mut svv, mut szv) = (0.0, 0.0, 0.0);
    for &(z, v) in points {
        szz += (z - mz) * (z - mz);
        svv += (v - mv) * (v - mv);
        szv += (z - mz) * (v - mv);
    }
    let theta = 0.5 * (2.0 * szv).atan2(szz - svv);
    Some(theta.tan())
}
