//! Two-pulse selection geometry in the (z, v) plane.
//!
//! Each pulse selects a strip `|a_z z + a_v v - center| <= half_width`. The
//! first strip is carried forward to the second pulse by the free-fall map,
//! which tilts it to slope `1/delta_t`; the second strip is vertical. Their
//! intersection is a parallelogram, the selected cell.

use serde::Serialize;

use crate::breit_rabi::{FieldConfig, Level};
use crate::dynamics::g_effective;
use crate::error::{Error, Result};
use crate::pulse::{position_width, PulseSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSpaceBand {
    pub a_z: f64,
    pub a_v: f64,
    pub center: f64,
    pub half_width: f64,
}

impl PhaseSpaceBand {
    pub fn new(a_z: f64, a_v: f64, center: f64, half_width: f64) -> Result<Self> {
        if a_z == 0.0 && a_v == 0.0 {
            return Err(Error::invalid("normal", "band normal must be non-zero"));
        }
        if !(half_width >= 0.0) {
            return Err(Error::invalid("half_width", "must be non-negative"));
        }
        Ok(Self {
            a_z,
            a_v,
            center,
            half_width,
        })
    }

    pub fn coordinate(&self, z: f64, v: f64) -> f64 {
        self.a_z * z + self.a_v * v
    }

    pub fn contains(&self, z: f64, v: f64) -> bool {
        (self.coordinate(z, v) - self.center).abs() <= self.half_width
    }

    /// Same band widened by `extra` on each side (in band-coordinate units).
    pub fn dilated(&self, extra: f64) -> Self {
        Self {
            half_width: self.half_width + extra,
            ..*self
        }
    }

    /// Slope `dv/dz` of the band edges; infinite for a vertical band.
    pub fn slope(&self) -> f64 {
        if self.a_v == 0.0 {
            f64::INFINITY
        } else {
            -self.a_z / self.a_v
        }
    }

    /// z-interval selected at velocity `v`, or `None` for a horizontal band.
    fn z_interval(&self, v: f64) -> Option<(f64, f64)> {
        if self.a_z == 0.0 {
            return None;
        }
        let lo = (self.center - self.half_width - self.a_v * v) / self.a_z;
        let hi = (self.center + self.half_width - self.a_v * v) / self.a_z;
        Some(if lo <= hi { (lo, hi) } else { (hi, lo) })
    }
}

/// Band selected by the first pulse, as seen at the second pulse `delta_t` later.
///
/// An atom in the upper level at `(z, v)` at time `delta_t` started at
/// `z - v*delta_t - g_eff*delta_t^2/2`, which must lie within half a width of
/// the first pulse's resonance.
pub fn band_from_first_pulse(
    pulse: &PulseSpec,
    cfg: &FieldConfig,
    delta_t: f64,
) -> Result<PhaseSpaceBand> {
    if !(delta_t > 0.0) {
        return Err(Error::invalid("delta_t", "must be positive"));
    }
    let z_start = pulse.center(cfg)?;
    let width = position_width(pulse, cfg, z_start)?;
    let g = g_effective(cfg, Level::Upper, pulse.sigma)?;
    PhaseSpaceBand::new(
        1.0,
        -delta_t,
        z_start + 0.5 * g * delta_t * delta_t,
        0.5 * width,
    )
}

/// Vertical band `|z - z_f| <= width/2` selected by the second pulse.
pub fn band_from_second_pulse(pulse: &PulseSpec, cfg: &FieldConfig) -> Result<PhaseSpaceBand> {
    let z_f = pulse.center(cfg)?;
    let width = position_width(pulse, cfg, z_f)?;
    PhaseSpaceBand::new(1.0, 0.0, z_f, 0.5 * width)
}

/// Corners of the parallelogram common to two bands, counter-clockwise.
pub fn intersect(first: &PhaseSpaceBand, second: &PhaseSpaceBand) -> Result<[(f64, f64); 4]> {
    let det = first.a_z * second.a_v - first.a_v * second.a_z;
    let scale = (first.a_z.abs() + first.a_v.abs()) * (second.a_z.abs() + second.a_v.abs());
    if det.abs() <= 1e-14 * scale {
        // Parallel: disjoint strips have no intersection; overlapping ones are unbounded.
        let n1 = first.a_z.hypot(first.a_v);
        let n2 = second.a_z.hypot(second.a_v);
        let same_dir = first.a_z * second.a_z + first.a_v * second.a_v >= 0.0;
        let c2 = if same_dir {
            second.center
        } else {
            -second.center
        } / n2;
        let gap = (first.center / n1 - c2).abs();
        return if gap > first.half_width / n1 + second.half_width / n2 {
            Err(Error::EmptyIntersection)
        } else {
            Err(Error::invalid(
                "bands",
                "parallel bands have an unbounded intersection",
            ))
        };
    }
    let solve = |s1: f64, s2: f64| {
        let z = (s1 * second.a_v - first.a_v * s2) / det;
        let v = (first.a_z * s2 - s1 * second.a_z) / det;
        (z, v)
    };
    let (h1, h2) = (first.half_width, second.half_width);
    let (c1, c2) = (first.center, second.center);
    let mut corners = [
        solve(c1 - h1, c2 - h2),
        solve(c1 + h1, c2 - h2),
        solve(c1 + h1, c2 + h2),
        solve(c1 - h1, c2 + h2),
    ];
    let signed = shoelace(&corners);
    if signed < 0.0 {
        corners.reverse();
    }
    Ok(corners)
}

/// Signed polygon area (positive for counter-clockwise vertices).
fn shoelace(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (x0, y0) = poly[i];
            let (x1, y1) = poly[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum::<f64>()
        * 0.5
}

/// The cell selected by two pulses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionCell {
    /// Second-pulse resonance `z_f` (m).
    pub z_center: f64,
    /// `(z_f - z_0R - g_eff delta_t^2 / 2) / delta_t` (m/s).
    pub v_center: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// First-pulse resonance `z_0R` (m).
    pub z_start: f64,
    pub delta_t: f64,
    pub bands: [PhaseSpaceBand; 2],
    /// Counter-clockwise parallelogram corners `(z, v)`.
    pub vertices: [(f64, f64); 4],
}

pub fn selection_cell(
    first: &PulseSpec,
    second: &PulseSpec,
    cfg: &FieldConfig,
    delta_t: f64,
) -> Result<SelectionCell> {
    let b1 = band_from_first_pulse(first, cfg, delta_t)?;
    let b2 = band_from_second_pulse(second, cfg)?;
    let vertices = intersect(&b1, &b2)?;
    let z_start = first.center(cfg)?;
    let z_f = b2.center;
    let g = g_effective(cfg, Level::Upper, first.sigma)?;
    let v_center = (z_f - z_start - 0.5 * g * delta_t * delta_t) / delta_t;
    let v_min = vertices.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let v_max = vertices
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SelectionCell {
        z_center: z_f,
        v_center,
        v_min,
        v_max,
        z_start,
        delta_t,
        bands: [b1, b2],
        vertices,
    })
}

impl SelectionCell {
    pub fn velocity_width(&self) -> f64 {
        self.v_max - self.v_min
    }

    /// Analytic parallelogram area `4 h1 h2 / |det|`.
    pub fn area(&self) -> f64 {
        let [b1, b2] = &self.bands;
        let det = b1.a_z * b2.a_v - b1.a_v * b2.a_z;
        4.0 * b1.half_width * b2.half_width / det.abs()
    }

    pub fn contains(&self, z: f64, v: f64) -> bool {
        self.bands.iter().all(|b| b.contains(z, v))
    }

    /// Length of the cell's cross-section at velocity `v`.
    pub fn overlap_length(&self, v: f64) -> f64 {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for b in &self.bands {
            match b.z_interval(v) {
                Some((a, c)) => {
                    lo = lo.max(a);
                    hi = hi.min(c);
                }
                None => {
                    if !b.contains(0.0, v) {
                        return 0.0;
                    }
                }
            }
        }
        (hi - lo).max(0.0)
    }

    /// Velocity marginal of a uniform density on the cell, normalized to unit area.
    ///
    /// The grid has `resolution` uniform points on `[v_min, v_max]` plus the
    /// corner velocities, where the marginal has kinks; it is piecewise linear
    /// between grid points, so trapezoidal sums over the table are exact.
    pub fn marginal_velocity(&self, resolution: usize) -> Result<MarginalTable> {
        if resolution < 2 {
            return Err(Error::invalid("resolution", "need at least 2 points"));
        }
        let span = self.v_max - self.v_min;
        let mut v: Vec<f64> = (0..resolution)
            .map(|i| self.v_min + span * i as f64 / (resolution - 1) as f64)
            .collect();
        v.extend(self.vertices.iter().map(|p| p.1));
        v.sort_by(f64::total_cmp);
        v.dedup();
        let area = self.area();
        let density = v.iter().map(|&vi| self.overlap_length(vi) / area).collect();
        Ok(MarginalTable { v, density })
    }
}

/// Tabulated density on a sorted velocity grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalTable {
    pub v: Vec<f64>,
    pub density: Vec<f64>,
}

impl MarginalTable {
    pub fn integral(&self) -> f64 {
        self.v
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(v, d)| 0.5 * (d[0] + d[1]) * (v[1] - v[0]))
            .sum()
    }

    /// Full width at half maximum, interpolating linearly between grid points.
    pub fn fwhm(&self) -> f64 {
        let peak = self.density.iter().copied().fold(0.0, f64::max);
        let half = 0.5 * peak;
        let n = self.v.len();
        let first = (0..n).find(|&i| self.density[i] >= half).unwrap_or(0);
        let last = (0..n)
            .rev()
            .find(|&i| self.density[i] >= half)
            .unwrap_or(n - 1);
        let cross = |i: usize, j: usize| {
            let (d0, d1) = (self.density[i], self.density[j]);
            if d1 == d0 {
                self.v[i]
            } else {
                self.v[i] + (half - d0) / (d1 - d0) * (self.v[j] - self.v[i])
            }
        };
        let left = if first == 0 {
            self.v[0]
        } else {
            cross(first - 1, first)
        };
        let right = if last + 1 == n {
            self.v[n - 1]
        } else {
            cross(last, last + 1)
        };
        right - left
    }
}
