//! Chordal, arc and loop Loewner energies.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::{refine_polyline, CurveSamples};
use crate::driving::DrivingFunction;
use crate::error::{Error, Result};
use crate::maps::{is_infinity, ComplexPoint};
use crate::tracer::grow_through;
use crate::zipper::{compute_driving, unzip_rooted, zip_sequence, ZipperOptions};

/// Default initial-arc fractions of the total length.
pub const DEFAULT_EPS_SCHEDULE: [f64; 6] = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];

/// Allowed relative decrease between consecutive partial energies.
pub const MONOTONE_SLACK: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeScheme {
    /// `½ Σ (ΔW)² / Δt`, the Dirichlet energy of the piecewise linear interpolant.
    Increments,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    /// `+∞` when the divergence detector fired, otherwise equal to `grid_value`.
    pub value: f64,
    pub grid_value: f64,
    pub derivative_scheme: DerivativeScheme,
    pub grid_resolution: f64,
    pub diverged: bool,
    /// Coefficient `c` in `E(ε) ≈ c ln(1/ε)` near `t = 0`, when measurable.
    pub divergence_rate: Option<f64>,
}

pub fn increment_energy(w: &DrivingFunction) -> f64 {
    let (t, v) = (w.t(), w.w());
    0.5 * t.windows(2).zip(v.windows(2)).map(|(t, v)| (v[1] - v[0]).powi(2) / (t[1] - t[0])).sum::<f64>()
}

pub fn chordal_energy(w: &DrivingFunction) -> Result<EnergyReport> {
    let grid_value = increment_energy(w);
    let (diverged, rate) = detect_divergence(w);
    Ok(EnergyReport {
        value: if diverged { f64::INFINITY } else { grid_value },
        grid_value,
        derivative_scheme: DerivativeScheme::Increments,
        grid_resolution: w.resolution(),
        diverged,
        divergence_rate: rate,
    })
}

/// Energy of the restriction to `[0, t_max]`.
pub fn chordal_energy_truncated(w: &DrivingFunction, t_max: f64) -> Result<EnergyReport> {
    chordal_energy(&w.window(0.0, t_max.min(w.total_capacity()))?)
}

/// Energies of `W` restricted to `[T 2^{-l}, T]` for the dyadic levels resolved by the grid,
/// meaning each band `[T 2^{-l}, T 2^{1-l}]` holds at least two grid cells.
pub fn dyadic_tail_energies(w: &DrivingFunction) -> Vec<f64> {
    const MIN_BAND_CELLS: usize = 2;
    let (t, v) = (w.t(), w.w());
    let total = w.total_capacity();
    let cell = |i: usize| (v[i + 1] - v[i]).powi(2) / (t[i + 1] - t[i]);
    let mut out = Vec::new();
    let mut prev_start = t.len() - 1;
    let mut level = 0;
    while level <= 200 {
        let cut = total * 0.5f64.powi(level);
        let start = t.partition_point(|&x| x < cut * (1.0 - 1e-12));
        if cut < t[1] || (level > 0 && prev_start - start < MIN_BAND_CELLS) {
            break;
        }
        // the interpolant's energy density is constant on a cell, so a straddling cell splits by Δt
        let partial =
            if start > 0 { cell(start - 1) * (t[start] - cut).max(0.0) / (t[start] - t[start - 1]) } else { 0.0 };
        out.push(0.5 * ((start..t.len() - 1).map(cell).sum::<f64>() + partial));
        prev_start = start;
        level += 1;
    }
    out
}

/// Fires when the energy gained per dyadic level near `t = 0` fails to shrink by more
/// than 10% for three consecutive levels.
pub fn detect_divergence(w: &DrivingFunction) -> (bool, Option<f64>) {
    let e = dyadic_tail_energies(w);
    if e.len() < 5 {
        return (false, None);
    }
    let d: Vec<f64> = e.windows(2).map(|p| p[1] - p[0]).collect();
    let last = &d[d.len() - 4..];
    let total = *e.last().unwrap();
    let floor = 1e-12 + 1e-6 * total;
    let rate = last.iter().sum::<f64>() / (last.len() as f64 * core::f64::consts::LN_2);
    let growing = last.iter().all(|&x| x > floor) && last.windows(2).all(|p| p[1] >= 0.9 * p[0]);
    (growing, if rate > 0.0 { Some(rate) } else { None })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdditivityGap {
    pub gap: f64,
    /// The split fell between grid points and was realized by interpolation.
    pub interpolated: bool,
}

pub fn additivity_gap(w: &DrivingFunction, split: f64) -> Result<AdditivityGap> {
    let total = w.total_capacity();
    if !(split > 0.0 && split < total) {
        return Err(Error::input("split must lie strictly inside (0, T)"));
    }
    let interpolated = w.t().binary_search_by(|x| x.partial_cmp(&split).unwrap()).is_err();
    let whole = increment_energy(w);
    let head = increment_energy(&w.window(0.0, split)?);
    let tail = increment_energy(&w.window(split, total)?);
    Ok(AdditivityGap { gap: (whole - head - tail).abs(), interpolated })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopEnergyReport {
    pub eps_schedule: Vec<f64>,
    /// Sample index where each initial arc ends.
    pub eps_indices: Vec<usize>,
    pub partial_energies: Vec<f64>,
    pub extrapolated: f64,
    /// Geometric tail added to the last partial energy.
    pub tail_estimate: f64,
    pub root_index: usize,
    /// Number of points actually unzipped after smooth subdivision.
    pub unzipped_samples: usize,
}

fn validate_schedule(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::input("empty eps schedule"));
    }
    if eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::input("eps fractions must lie in (0, 1)"));
    }
    if eps.windows(2).any(|p| !(p[1] < p[0])) {
        return Err(Error::input("eps schedule must be strictly decreasing"));
    }
    Ok(())
}

/// Last partial plus a geometric tail fitted to the final two differences.
pub fn geometric_tail(partials: &[f64]) -> f64 {
    if partials.len() < 3 {
        return 0.0;
    }
    let m = partials.len();
    let d1 = partials[m - 2] - partials[m - 3];
    let d2 = partials[m - 1] - partials[m - 2];
    if !(d1 > 0.0 && d2 > 0.0) {
        return 0.0;
    }
    let rho = (d2 / d1).min(0.9);
    d2 * rho / (1.0 - rho)
}

fn check_monotone(partials: &[f64]) -> Result<()> {
    let floor = 1e-4;
    for p in partials.windows(2) {
        if p[1] < p[0] - MONOTONE_SLACK * p[0].abs().max(floor) {
            return Err(Error::NonMonotone { partials: partials.to_vec() });
        }
    }
    Ok(())
}

/// Offsets (along `pts`, starting at the root) where the initial arcs of the given
/// length fractions end.
fn eps_offsets(pts: &[ComplexPoint], closed: bool, eps: &[f64]) -> Vec<usize> {
    let n = pts.len();
    let finite = pts.iter().all(|z| !is_infinity(*z));
    let hi = n.saturating_sub(2).max(1);
    if !finite {
        return eps.iter().map(|&f| ((f * n as f64).round() as usize).clamp(1, hi)).collect();
    }
    let mut cum = Vec::with_capacity(n);
    cum.push(0.0);
    for w in pts.windows(2) {
        let last = *cum.last().unwrap();
        cum.push(last + (w[1] - w[0]).norm());
    }
    let total = cum[n - 1] + if closed { (pts[0] - pts[n - 1]).norm() } else { 0.0 };
    eps.iter().map(|&f| cum.partition_point(|&s| s < f * total).clamp(1, hi)).collect()
}

/// Energy contributed by each unzipped sample (`k²/2` per slit).
fn step_energies(slits: &[crate::maps::TiltedSlitParams]) -> Vec<f64> {
    slits.iter().map(|s| 0.5 * s.k * s.k).collect()
}

pub fn loop_energy(curve: &CurveSamples, root_index: usize, eps_schedule: &[f64]) -> Result<LoopEnergyReport> {
    loop_energy_with(curve, root_index, eps_schedule, &ZipperOptions::default())
}

pub fn loop_energy_with(
    curve: &CurveSamples,
    root_index: usize,
    eps_schedule: &[f64],
    opts: &ZipperOptions,
) -> Result<LoopEnergyReport> {
    if !curve.closed() {
        return Err(Error::input("expected a closed loop"));
    }
    validate_schedule(eps_schedule)?;
    let n = curve.len();
    if n < opts.min_samples {
        return Err(Error::input(alloc::format!("at least {} samples required", opts.min_samples)));
    }
    if root_index >= n {
        return Err(Error::input("root index out of range"));
    }
    if let Some((_, j)) = curve.first_self_intersection() {
        return Err(Error::geometry(j, "loop is not simple"));
    }
    let rot = curve.rotated(root_index)?;
    let r = if rot.has_infinity() { 1 } else { opts.refine_factor(n) };
    let pts = refine_polyline(rot.points(), true, r, None);
    let m = pts.len();
    let unz = unzip_rooted(&pts, m - 1, &[], opts, |j| (root_index + j.div_ceil(r)) % n)?;
    let energies = step_energies(&unz.slits);
    let offsets = eps_offsets(&pts, true, eps_schedule);
    let partials: Vec<f64> =
        offsets.iter().map(|&e| energies[(e.max(1) - 1).min(energies.len())..].iter().sum()).collect();
    check_monotone(&partials)?;
    let tail = geometric_tail(&partials);
    Ok(LoopEnergyReport {
        eps_schedule: eps_schedule.to_vec(),
        eps_indices: offsets.iter().map(|&e| (root_index + e.div_ceil(r)) % n).collect(),
        extrapolated: partials.last().copied().unwrap_or(0.0) + tail,
        partial_energies: partials,
        tail_estimate: tail,
        root_index,
        unzipped_samples: m,
    })
}

pub fn arc_energy(arc: &CurveSamples, root_index: usize) -> Result<LoopEnergyReport> {
    arc_energy_with(arc, root_index, &DEFAULT_EPS_SCHEDULE, &ZipperOptions::default())
}

/// Arc energy rooted at an endpoint or interior sample: the far side is unzipped from the root,
/// then the near side is unzipped as a second slit growing from the root toward the far tip.
pub fn arc_energy_with(
    arc: &CurveSamples,
    root_index: usize,
    eps_schedule: &[f64],
    opts: &ZipperOptions,
) -> Result<LoopEnergyReport> {
    if arc.closed() {
        return Err(Error::input("expected an open arc"));
    }
    validate_schedule(eps_schedule)?;
    let n = arc.len();
    if n < opts.min_samples {
        return Err(Error::input(alloc::format!("at least {} samples required", opts.min_samples)));
    }
    if root_index >= n {
        return Err(Error::input("root index out of range"));
    }
    if let Some((_, j)) = arc.first_self_intersection() {
        return Err(Error::geometry(j, "arc is not simple"));
    }
    let (work, root, flipped) =
        if root_index == n - 1 { (arc.reversed(), 0, true) } else { (arc.clone(), root_index, false) };
    let r = if work.has_infinity() { 1 } else { opts.refine_factor(n) };
    let refined = refine_polyline(work.points(), false, r, None);
    let rr = root * r;
    let far = &refined[rr..];
    let near: Vec<ComplexPoint> = refined[..rr].iter().rev().copied().collect();
    let user_index = |j: usize| {
        let i = root + j.div_ceil(r);
        if flipped {
            n - 1 - i.min(n - 1)
        } else {
            i.min(n - 1)
        }
    };
    let unz = unzip_rooted(far, far.len() - 1, &near, opts, user_index)?;
    let energies = step_energies(&unz.slits);

    let mut second = 0.0;
    if !unz.carried.is_empty() {
        let pivot = unz.end_value;
        let mut targets: Vec<Complex64> = unz
            .carried
            .iter()
            .map(|&z| if is_infinity(z) { Complex64::new(0.0, 0.0) } else { -Complex64::new(1.0, 0.0) / (z - pivot) })
            .collect();
        let slits = zip_sequence(&mut targets, 0.0, &mut [], opts, 0).map_err(|e| match e {
            Error::Geometry { index, reason } => Error::geometry(root.saturating_sub(index.div_ceil(r)), reason),
            other => other,
        })?;
        second = step_energies(&slits).iter().sum();
    }

    let offsets = eps_offsets(far, false, eps_schedule);
    let partials: Vec<f64> =
        offsets.iter().map(|&e| second + energies[(e.max(1) - 1).min(energies.len())..].iter().sum::<f64>()).collect();
    check_monotone(&partials)?;
    let tail = geometric_tail(&partials);
    Ok(LoopEnergyReport {
        eps_schedule: eps_schedule.to_vec(),
        eps_indices: offsets.iter().map(|&e| user_index(e)).collect(),
        extrapolated: partials.last().copied().unwrap_or(0.0) + tail,
        partial_energies: partials,
        tail_estimate: tail,
        root_index,
        unzipped_samples: refined.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootSweep {
    pub roots: Vec<usize>,
    pub energies: Vec<f64>,
    pub mean: f64,
    /// `(max − min) / mean`.
    pub relative_spread: f64,
    pub absolute_spread: f64,
}

pub fn root_sweep(curve: &CurveSamples, roots: &[usize], eps_schedule: &[f64]) -> Result<RootSweep> {
    if roots.is_empty() {
        return Err(Error::input("no roots given"));
    }
    let mut energies = Vec::with_capacity(roots.len());
    for &r in roots {
        energies.push(loop_energy(curve, r, eps_schedule)?.extrapolated);
    }
    let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = energies.iter().sum::<f64>() / energies.len() as f64;
    Ok(RootSweep {
        roots: roots.to_vec(),
        relative_spread: if mean > 0.0 { (max - min) / mean } else { 0.0 },
        absolute_spread: max - min,
        mean,
        energies,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReversibilityGap {
    pub forward: f64,
    pub reverse: f64,
    /// `|forward − reverse| / max(forward, reverse, floor)`.
    pub gap: f64,
}

/// Relative energy floor used when both orientations have (near) zero energy.
pub const REVERSIBILITY_FLOOR: f64 = 1e-3;

/// Compares the energy of a chord in `(H, 0, ∞)` with that of its reversal. The chord is
/// completed to ∞ by the hyperbolic geodesic from its tip, then relabelled by `z ↦ −1/z`.
pub fn reversibility_gap(chord: &CurveSamples, t_max: Option<f64>) -> Result<ReversibilityGap> {
    let (w, cap) = compute_driving(chord)?;
    let mut pts = chord.points().to_vec();
    if let Some(tm) = t_max {
        let keep = cap.t.partition_point(|&t| t <= tm).max(2);
        pts.truncate(keep);
    }
    let keep = pts.len();
    let w = if keep < w.len() { DrivingFunction::new(w.t()[..keep].to_vec(), w.w()[..keep].to_vec())? } else { w };
    let forward = increment_energy(&w);

    let slits: Vec<_> = cap.slits().copied().collect();
    let used = if keep < chord.len() {
        let (_, c2) = compute_driving(&CurveSamples::arc(pts.clone())?)?;
        c2.slits().copied().collect::<Vec<_>>()
    } else {
        slits
    };
    let tip = pts[keep - 1];
    let h_last = (pts[keep - 1] - pts[keep - 2]).norm();
    let tail = *w.w().last().unwrap();
    let scale = w.total_capacity().sqrt().max(h_last);
    let mut geodesic: Vec<ComplexPoint> = Vec::new();
    let mut y = 1e-4 * scale;
    let mut last = tip;
    while y < 1e4 * scale {
        let g = grow_through(&used, Complex64::new(tail, y))?;
        if (g - last).norm() >= h_last {
            geodesic.push(g);
            last = g;
        }
        y *= 1.05;
    }
    let mut rev: Vec<ComplexPoint> = Vec::with_capacity(geodesic.len() + keep);
    rev.push(Complex64::new(0.0, 0.0));
    let inv = |z: Complex64| -Complex64::new(1.0, 0.0) / z;
    rev.extend(geodesic.iter().rev().map(|&z| inv(z)));
    rev.extend(pts[1..keep].iter().rev().map(|&z| inv(z)));
    let (wr, _) = compute_driving(&CurveSamples::arc(rev)?)?;
    let reverse = increment_energy(&wr);
    let gap = (forward - reverse).abs() / forward.max(reverse).max(REVERSIBILITY_FLOOR);
    Ok(ReversibilityGap { forward, reverse, gap })
}
