//! Energy minimizing chords and loops through prescribed points.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::{hausdorff_distance, refine_polyline, CurveSamples};
use crate::driving::DrivingFunction;
use crate::energy::{increment_energy, loop_energy, root_sweep, RootSweep, DEFAULT_EPS_SCHEDULE};
use crate::error::{Error, Result};
use crate::maps::{is_infinity, ComplexPoint};
use crate::tracer::{grow_through, slit_steps, trace_curve};
use crate::zipper::{compute_driving, unzip_rooted, RootedUnzip, ZipperOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    pub points: Vec<ComplexPoint>,
    pub closed: bool,
    /// Curve through the points, in order, fixing the isotopy class.
    pub initial_curve: Option<CurveSamples>,
}

impl ConstraintSet {
    pub fn new(points: Vec<ComplexPoint>, closed: bool) -> Result<Self> {
        if points.iter().any(|z| is_infinity(*z) || !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::input("constraint points must be finite"));
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::input("constraint points must be distinct"));
                }
            }
        }
        Ok(ConstraintSet { points, closed, initial_curve: None })
    }

    pub fn with_initial_curve(mut self, curve: CurveSamples) -> Self {
        self.initial_curve = Some(curve);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizerResult {
    pub curve: CurveSamples,
    pub energy: f64,
    pub iterations: usize,
    /// Chords: constraint residual. Loops: largest chordal energy of a free arc in the
    /// complement of the others.
    pub stationarity: f64,
    pub converged: bool,
    /// Energy after each accepted iteration, starting with the initial curve.
    pub energy_history: Vec<f64>,
    /// Replacements refused because they broke simplicity or raised the energy.
    pub rejected_steps: usize,
    /// Sample index of each constraint point in `curve`.
    pub constraint_indices: Vec<usize>,
    pub driving: Option<DrivingFunction>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChordOptions {
    pub cells: usize,
    pub substeps: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for ChordOptions {
    fn default() -> Self {
        ChordOptions { cells: 48, substeps: 4, max_iterations: 200, tolerance: 1e-9 }
    }
}

/// Minimal chordal energy `−8 ln sin φ` of a chord from 0 to ∞ through `r e^{iφ}`.
pub fn chord_energy_bound(phi: f64) -> f64 {
    -8.0 * phi.sin().ln()
}

pub fn minimize_chord_through_point(phi: f64, r: f64) -> Result<MinimizerResult> {
    minimize_chord_through_point_with(phi, r, &ChordOptions::default())
}

struct ChordProblem {
    n: usize,
    spu: usize,
    phi: f64,
}

impl ChordProblem {
    fn driving(&self, u: &[f64]) -> Result<DrivingFunction> {
        let n = self.n;
        let t = (0..=n).map(|i| i as f64 / n as f64).collect();
        let mut w = Vec::with_capacity(n + 1);
        w.push(0.0);
        w.extend_from_slice(u);
        DrivingFunction::new(t, w)
    }

    fn tip(&self, u: &[f64]) -> Result<ComplexPoint> {
        let (slits, _) = slit_steps(&self.driving(u)?, self.spu)?;
        grow_through(&slits, Complex64::new(u[self.n - 1], 0.0))
    }

    fn residual(&self, u: &[f64]) -> Result<f64> {
        let z = self.tip(u)?;
        Ok(z.im.atan2(z.re) - self.phi)
    }

    fn energy(&self, u: &[f64]) -> f64 {
        let mut prev = 0.0;
        let mut e = 0.0;
        for &x in u {
            e += (x - prev) * (x - prev);
            prev = x;
        }
        0.5 * self.n as f64 * e
    }

    /// Solves `H y = g` for the energy Hessian `H = n DᵀD` (tridiagonal).
    fn solve_hessian(&self, g: &[f64]) -> Vec<f64> {
        let n = self.n;
        let scale = n as f64;
        let mut c = alloc::vec![0.0; n];
        let mut d = alloc::vec![0.0; n];
        for i in 0..n {
            let diag = if i + 1 == n { 1.0 } else { 2.0 };
            let denom = diag + if i > 0 { c[i - 1] } else { 0.0 };
            c[i] = -1.0 / denom;
            d[i] = (g[i] / scale + if i > 0 { d[i - 1] } else { 0.0 }) / denom;
        }
        let mut y = alloc::vec![0.0; n];
        y[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = d[i] - c[i] * y[i + 1];
        }
        y
    }
}

/// Minimizes the Dirichlet energy of a piecewise linear driving function on `[0, 1]`
/// subject to the traced tip lying on the ray of angle `φ`, then rescales so that the tip
/// lands on `r e^{iφ}` and continues along the hyperbolic geodesic to ∞.
pub fn minimize_chord_through_point_with(phi: f64, r: f64, opts: &ChordOptions) -> Result<MinimizerResult> {
    if !(phi > 0.0 && phi < PI) || !(r > 0.0) || !r.is_finite() {
        return Err(Error::input("need 0 < phi < pi and r > 0"));
    }
    if opts.cells < 2 || opts.substeps == 0 {
        return Err(Error::input("need at least two cells and one substep"));
    }
    let n = opts.cells;
    let prob = ChordProblem { n, spu: n * opts.substeps, phi };
    let mut u = alloc::vec![0.0; n];
    let mut c = prob.residual(&u)?;
    let mut history = alloc::vec![prob.energy(&u)];
    let mut converged = false;
    let mut iterations = 0;
    let mut rejected = 0;
    let h = 1e-6;
    while iterations < opts.max_iterations {
        iterations += 1;
        let mut g = alloc::vec![0.0; n];
        for i in 0..n {
            let mut up = u.clone();
            up[i] += h;
            let mut dn = u.clone();
            dn[i] -= h;
            g[i] = (prob.residual(&up)? - prob.residual(&dn)?) / (2.0 * h);
        }
        let y = prob.solve_hessian(&g);
        let gy: f64 = g.iter().zip(&y).map(|(a, b)| a * b).sum();
        if !(gy > 0.0) {
            return Err(Error::Degenerate("constraint gradient vanishes".into()));
        }
        let gu: f64 = g.iter().zip(&u).map(|(a, b)| a * b).sum();
        let mu = (gu - c) / gy;
        let target: Vec<f64> = y.iter().map(|v| mu * v).collect();
        let lambda = mu.abs();
        let merit = |e: f64, c: f64| e + (2.0 * lambda + 1.0) * c.abs();
        let current = merit(prob.energy(&u), c);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let cand: Vec<f64> = u.iter().zip(&target).map(|(a, b)| a + step * (b - a)).collect();
            if let Ok(cc) = prob.residual(&cand) {
                if merit(prob.energy(&cand), cc) <= current + 1e-14 || step < 1e-6 {
                    accepted = Some((cand, cc));
                    break;
                }
            }
            step *= 0.5;
            rejected += 1;
        }
        let Some((next, cn)) = accepted else {
            break;
        };
        let moved = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        u = next;
        c = cn;
        history.push(prob.energy(&u));
        if moved < opts.tolerance && c.abs() < opts.tolerance {
            converged = true;
            break;
        }
    }

    let tip = prob.tip(&u)?;
    let t_total = (r / tip.norm()).powi(2);
    let a = t_total.sqrt();
    let w = prob.driving(&u)?.scaled(a)?;
    let trace = trace_curve(&w, (opts.substeps as f64 * n as f64 / t_total).ceil() as usize)?;
    let (slits, _) = slit_steps(&w, (opts.substeps as f64 * n as f64 / t_total).ceil() as usize)?;
    let mut pts = trace.points.into_points();
    let end = *w.w().last().unwrap();
    let h_last = (pts[pts.len() - 1] - pts[pts.len() - 2]).norm();
    let mut y = 1e-3 * a;
    let mut last = pts[pts.len() - 1];
    while y < 1e3 * a {
        let z = grow_through(&slits, Complex64::new(end, y))?;
        if (z - last).norm() >= h_last {
            pts.push(z);
            last = z;
        }
        y *= 1.05;
    }
    let tip_index = n;
    Ok(MinimizerResult {
        curve: CurveSamples::arc(pts)?,
        energy: prob.energy(&u),
        iterations,
        stationarity: c.abs(),
        converged,
        energy_history: history,
        rejected_steps: rejected,
        constraint_indices: alloc::vec![0, tip_index],
        driving: Some(w),
    })
}

fn unzip_arc(arc: &[ComplexPoint], opts: &ZipperOptions) -> Result<(RootedUnzip, usize)> {
    if arc.len() < 3 {
        return Err(Error::input("arc needs at least three samples"));
    }
    let r = opts.refine_factor(arc.len());
    let pts = refine_polyline(arc, false, r, None);
    let m = pts.len();
    Ok((unzip_rooted(&pts, m - 1, &[], opts, |j| j.div_ceil(r))?, m))
}

fn map_to_half_plane(unz: &RootedUnzip, z: ComplexPoint) -> Result<ComplexPoint> {
    let mut w = crate::maps::sqrt_branch(unz.mobius.apply(z))?;
    for s in &unz.slits {
        w = s.inverse(w)?;
    }
    Ok(w - unz.end_value)
}

fn map_from_half_plane(unz: &RootedUnzip, w: ComplexPoint) -> Result<ComplexPoint> {
    let v = grow_through(&unz.slits, w + unz.end_value)?;
    Ok(unz.mobius.inverse().apply(v * v))
}

/// Hyperbolic geodesic in the complement of an arc on the sphere, joining the arc's last
/// sample to its first one, with `samples` points equally spaced in arclength.
pub fn hyperbolic_geodesic(complement_of: &CurveSamples, samples: usize) -> Result<CurveSamples> {
    if complement_of.closed() || complement_of.has_infinity() {
        return Err(Error::input("expected a finite arc"));
    }
    if samples < 3 {
        return Err(Error::input("need at least three samples"));
    }
    let arc = complement_of.points();
    let (unz, _) = unzip_arc(arc, &ZipperOptions::default())?;
    let scale = unz.slits.iter().map(|s| s.dt).sum::<f64>().sqrt().max(1e-12);
    let start = arc[arc.len() - 1];
    let end = arc[0];
    let size = arc.iter().map(|z| (z - end).norm()).fold(0.0, f64::max);
    let mut pts = alloc::vec![start];
    let mut y = 1e-5 * scale;
    while y < 1e5 * scale {
        let z = map_from_half_plane(&unz, Complex64::new(0.0, y))?;
        if z.re.is_finite() && z.im.is_finite() && (z - pts[pts.len() - 1]).norm() > 1e-9 * size {
            pts.push(z);
        }
        y *= 1.05;
    }
    if (pts[pts.len() - 1] - end).norm() > 1e-9 * size {
        pts.push(end);
    } else {
        let last = pts.len() - 1;
        pts[last] = end;
    }
    CurveSamples::arc(pts)?.resample_chordal(samples)
}

/// Chordal energy of `arc` (from the last sample of `rest` to its first) inside the
/// complement of `rest`.
pub fn arc_energy_in_complement(rest: &CurveSamples, arc: &CurveSamples) -> Result<f64> {
    let (unz, _) = unzip_arc(rest.points(), &ZipperOptions::default())?;
    let pts = arc.points();
    let mut chord = Vec::with_capacity(pts.len());
    chord.push(Complex64::new(0.0, 0.0));
    for &z in &pts[1..pts.len() - 1] {
        let w = map_to_half_plane(&unz, z)?;
        if !(w.im > 0.0) {
            return Err(Error::geometry(0, "arc touches the complement's boundary"));
        }
        chord.push(w);
    }
    let (w, _) = compute_driving(&CurveSamples::arc(chord)?)?;
    Ok(increment_energy(&w))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopOptions {
    pub samples_per_arc: usize,
    pub max_sweeps: usize,
    /// Sweeps stop once no arc moves by more than this fraction of the constraint diameter.
    pub tolerance: f64,
    pub eps_schedule: Vec<f64>,
    /// Visit the arcs last to first within each sweep.
    pub reverse_sweeps: bool,
}

impl Default for LoopOptions {
    fn default() -> Self {
        LoopOptions {
            samples_per_arc: 96,
            max_sweeps: 12,
            tolerance: 2e-3,
            eps_schedule: DEFAULT_EPS_SCHEDULE.to_vec(),
            reverse_sweeps: false,
        }
    }
}

pub fn minimize_loop(constraints: &ConstraintSet) -> Result<MinimizerResult> {
    minimize_loop_with(constraints, &LoopOptions::default())
}

fn initial_arcs(cs: &ConstraintSet, per_arc: usize) -> Result<Vec<CurveSamples>> {
    let z = &cs.points;
    let n = z.len();
    let mut arcs = Vec::with_capacity(n);
    match &cs.initial_curve {
        None => {
            for i in 0..n {
                let (a, b) = (z[i], z[(i + 1) % n]);
                let pts = (0..per_arc).map(|k| a + (b - a) * (k as f64 / (per_arc - 1) as f64)).collect();
                arcs.push(CurveSamples::arc(pts)?);
            }
        }
        Some(curve) => {
            let pts = curve.points();
            let m = pts.len();
            let idx: Vec<usize> = z
                .iter()
                .map(|&p| {
                    (0..m).min_by(|&a, &b| (pts[a] - p).norm().partial_cmp(&(pts[b] - p).norm()).unwrap()).unwrap()
                })
                .collect();
            let shift = idx[0];
            let rel: Vec<usize> = idx.iter().map(|&i| (i + m - shift) % m).collect();
            if rel.windows(2).any(|p| p[1] <= p[0]) {
                return Err(Error::input("initial curve does not visit the constraints in order"));
            }
            for i in 0..n {
                let (a, b) = (idx[i], idx[(i + 1) % n]);
                let mut seg = alloc::vec![z[i]];
                let mut k = (a + 1) % m;
                while k != b {
                    seg.push(pts[k]);
                    k = (k + 1) % m;
                }
                seg.push(z[(i + 1) % n]);
                arcs.push(CurveSamples::arc(seg)?.resample(per_arc)?);
            }
        }
    }
    Ok(arcs)
}

/// Joins arcs `from, from+1, …` (cyclically, `count` of them) into one polyline.
fn join(arcs: &[CurveSamples], from: usize, count: usize) -> Vec<ComplexPoint> {
    let n = arcs.len();
    let mut out: Vec<ComplexPoint> = Vec::new();
    for k in 0..count {
        let a = arcs[(from + k) % n].points();
        let skip = if out.is_empty() { 0 } else { 1 };
        out.extend_from_slice(&a[skip..]);
    }
    out
}

fn assemble(arcs: &[CurveSamples]) -> Result<(CurveSamples, Vec<usize>)> {
    let mut pts = join(arcs, 0, arcs.len());
    pts.pop();
    let mut idx = Vec::with_capacity(arcs.len());
    let mut at = 0;
    for a in arcs {
        idx.push(at);
        at += a.len() - 1;
    }
    Ok((CurveSamples::closed_loop(pts)?, idx))
}

fn rest_of(arcs: &[CurveSamples], i: usize) -> Result<CurveSamples> {
    CurveSamples::arc(join(arcs, i + 1, arcs.len() - 1))
}

/// Local minimizer of the loop energy through the constraint points by replacing each arc
/// between consecutive constraints with the hyperbolic geodesic in the complement of the
/// others. Sweeps that would raise the energy or break simplicity are refused.
pub fn minimize_loop_with(cs: &ConstraintSet, opts: &LoopOptions) -> Result<MinimizerResult> {
    if !cs.closed {
        return Err(Error::input("loop minimization needs a closed constraint set"));
    }
    if cs.points.len() < 3 {
        return Err(Error::input("need at least three constraint points"));
    }
    if opts.samples_per_arc < 8 {
        return Err(Error::input("need at least eight samples per arc"));
    }
    let n = cs.points.len();
    let diameter = cs.points.iter().flat_map(|a| cs.points.iter().map(move |b| (a - b).norm())).fold(0.0, f64::max);
    let mut arcs = initial_arcs(cs, opts.samples_per_arc)?;
    let energy_of = |arcs: &[CurveSamples]| -> Result<f64> {
        let (curve, _) = assemble(arcs)?;
        Ok(loop_energy(&curve, 0, &opts.eps_schedule)?.extrapolated)
    };
    let mut energy = energy_of(&arcs)?;
    let mut history = alloc::vec![energy];
    let mut rejected = 0;
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let saved = arcs.clone();
        let mut moved = 0.0f64;
        for step in 0..n {
            let i = if opts.reverse_sweeps { n - 1 - step } else { step };
            let rest = rest_of(&arcs, i)?;
            let geo = match hyperbolic_geodesic(&rest, opts.samples_per_arc) {
                Ok(g) => g,
                Err(_) => {
                    rejected += 1;
                    continue;
                }
            };
            let old = core::mem::replace(&mut arcs[i], geo);
            if !assemble(&arcs)?.0.is_simple() {
                arcs[i] = old;
                rejected += 1;
                continue;
            }
            moved = moved.max(hausdorff_distance(old.points(), arcs[i].points()));
        }
        let next = energy_of(&arcs)?;
        if next > energy {
            arcs = saved;
            rejected += 1;
            converged = moved < opts.tolerance * diameter;
            break;
        }
        energy = next;
        history.push(energy);
        if moved < opts.tolerance * diameter {
            converged = true;
            break;
        }
    }
    let mut stationarity = 0.0f64;
    for i in 0..n {
        let rest = rest_of(&arcs, i)?;
        stationarity = stationarity.max(arc_energy_in_complement(&rest, &arcs[i])?);
    }
    let (curve, idx) = assemble(&arcs)?;
    Ok(MinimizerResult {
        curve,
        energy,
        iterations: sweeps,
        stationarity,
        converged,
        energy_history: history,
        rejected_steps: rejected,
        constraint_indices: idx,
        driving: None,
    })
}

/// Loop energy of a minimizer rooted at each of the given samples.
pub fn minimizer_root_sweep(result: &MinimizerResult, roots: &[usize]) -> Result<RootSweep> {
    if !result.curve.closed() {
        return Err(Error::input("root sweeps apply to loops"));
    }
    root_sweep(&result.curve, roots, &DEFAULT_EPS_SCHEDULE)
}
