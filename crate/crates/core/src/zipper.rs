//! Zipper inversion: driving functions of sampled curves and uniformizers of
//! slit complements, built one straight slit per sample segment.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::{refine_polyline, CurveSamples};
use crate::driving::DrivingFunction;
use crate::error::{Error, Result};
use crate::maps::{
    is_infinity, sqrt_branch, ComplexPoint, ConformalComposition, MapStep, MobiusMap, Normalization, TiltedSlitParams,
};
use crate::tracer::MAX_SLOPE;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZipperOptions {
    pub max_slope: f64,
    pub min_samples: usize,
    /// Curves with fewer samples are subdivided along a smooth interpolant until they reach
    /// about this many, by a factor of at most `max_refine`.
    pub target_samples: usize,
    pub max_refine: usize,
}

impl Default for ZipperOptions {
    fn default() -> Self {
        ZipperOptions { max_slope: MAX_SLOPE, min_samples: 8, target_samples: 1024, max_refine: 8 }
    }
}

impl ZipperOptions {
    pub fn refine_factor(&self, samples: usize) -> usize {
        if samples == 0 {
            return 1;
        }
        self.target_samples.div_ceil(samples).clamp(1, self.max_refine.max(1))
    }
}

/// Capacity parametrization `t(s)` of a curve together with the slit maps that unzip it.
#[derive(Clone, Debug, PartialEq)]
pub struct CapacityMap {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub maps: ConformalComposition,
    /// Number of slit maps applied once sample `i` has been unzipped.
    pub marks: Vec<usize>,
}

impl CapacityMap {
    pub fn slits(&self) -> impl Iterator<Item = &TiltedSlitParams> {
        self.maps.steps.iter().filter_map(|s| match s {
            MapStep::SlitInverse(p) => Some(p),
            _ => None,
        })
    }
}

/// The straight slit from `base` whose tip is `tip`.
pub fn fit_slit(base: f64, tip: ComplexPoint) -> Result<TiltedSlitParams> {
    let d = tip - base;
    if !(d.im > 0.0) || !d.re.is_finite() {
        return Err(Error::domain("slit tip must lie in the open upper half-plane"));
    }
    let psi = d.im.atan2(d.re);
    let alpha = 1.0 - psi / PI;
    let beta = 1.0 - alpha;
    let l = d.norm() / (alpha.powf(alpha) * beta.powf(beta));
    let dt = alpha * beta * l * l / 4.0;
    TiltedSlitParams::from_theta(PI / 2.0 - psi, dt, base)
}

/// Unzips `targets` in order starting from the real point `base`; every later target and
/// every carried point is pushed through each slit. `offset` is added to reported indices.
pub(crate) fn zip_sequence(
    targets: &mut [Complex64],
    mut base: f64,
    carried: &mut [Complex64],
    opts: &ZipperOptions,
    offset: usize,
) -> Result<Vec<TiltedSlitParams>> {
    let mut slits = Vec::with_capacity(targets.len());
    for j in 0..targets.len() {
        let slit = fit_slit(base, targets[j])
            .map_err(|_| Error::geometry(offset + j, "curve image leaves the upper half-plane"))?;
        if slit.k.abs() > opts.max_slope {
            return Err(Error::StepRefinement { index: offset + j, slope: slit.k });
        }
        for z in targets[j + 1..].iter_mut() {
            *z = slit.inverse(*z)?;
        }
        for z in carried.iter_mut() {
            *z = slit.inverse(*z)?;
        }
        base = slit.driving_value();
        slits.push(slit);
    }
    Ok(slits)
}

pub fn compute_driving(curve: &CurveSamples) -> Result<(DrivingFunction, CapacityMap)> {
    compute_driving_with(curve, &ZipperOptions::default())
}

pub fn compute_driving_with(curve: &CurveSamples, opts: &ZipperOptions) -> Result<(DrivingFunction, CapacityMap)> {
    if curve.closed() {
        return Err(Error::input("expected an arc attached to the real axis, got a loop"));
    }
    let pts = curve.points();
    if pts.len() < opts.min_samples {
        return Err(Error::input(alloc::format!("at least {} samples required, got {}", opts.min_samples, pts.len())));
    }
    if pts.iter().any(|z| is_infinity(*z)) {
        return Err(Error::input("a chord in the half-plane must have finite samples"));
    }
    let scale = pts.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    if pts[0].im.abs() > 1e-12 * scale {
        return Err(Error::input("curve must start on the real axis"));
    }
    if let Some(i) = pts[1..].iter().position(|z| !(z.im > 0.0)) {
        return Err(Error::domain(alloc::format!("sample {} leaves the upper half-plane", i + 1)));
    }
    if let Some((_, j)) = curve.first_self_intersection() {
        return Err(Error::geometry(j, "curve is not simple"));
    }
    let (path, marks) = zipper_path(pts, opts);
    let to_sample = |index: usize| marks.partition_point(|&m| m < index);
    let mut targets = path[1..].to_vec();
    let slits = zip_sequence(&mut targets, pts[0].re, &mut [], opts, 1).map_err(|e| match e {
        Error::Geometry { index, reason } => Error::Geometry { index: to_sample(index), reason },
        Error::StepRefinement { index, slope } => Error::StepRefinement { index: to_sample(index), slope },
        other => other,
    })?;

    let mut t = Vec::with_capacity(pts.len());
    let mut w = Vec::with_capacity(pts.len());
    t.push(0.0);
    w.push(pts[0].re);
    let mut acc = 0.0;
    let mut next_mark = 1;
    for (j, s) in slits.iter().enumerate() {
        acc += s.dt;
        if next_mark < marks.len() && marks[next_mark] == j + 1 {
            t.push(acc);
            w.push(s.driving_value());
            next_mark += 1;
        }
    }
    let driving = DrivingFunction::new(t.clone(), w)?;
    let maps =
        ConformalComposition { steps: slits.into_iter().map(MapStep::SlitInverse).collect(), normalization: None };
    Ok((driving, CapacityMap { s: curve.arclength().to_vec(), t, maps, marks }))
}

/// Ratio between consecutive arclength positions near the start of a chord.
const START_GRADING: f64 = 1.05;

/// The polyline actually unzipped for a chord: smooth subdivision to the target resolution,
/// then geometric grading toward the base point. Returns the path and, for every input sample,
/// its index in the path.
fn zipper_path(pts: &[ComplexPoint], opts: &ZipperOptions) -> (Vec<ComplexPoint>, Vec<usize>) {
    let r = opts.refine_factor(pts.len());
    let refined = refine_polyline(pts, false, r, Some(0.0));
    let mut cum = Vec::with_capacity(refined.len());
    cum.push(0.0);
    for w in refined.windows(2) {
        let last = *cum.last().unwrap();
        cum.push(last + (w[1] - w[0]).norm());
    }
    let h = cum[1];
    let reach = h / (START_GRADING - 1.0);
    let mut graded = Vec::new();
    let mut sigma = reach;
    while sigma > 1e-2 * h {
        graded.push(sigma);
        sigma /= START_GRADING;
    }
    graded.reverse();

    let mut path = Vec::with_capacity(refined.len() + graded.len());
    let mut marks = Vec::with_capacity(pts.len());
    let mut g = 0;
    let mut seg = 0;
    for (i, (&z, &s)) in refined.iter().zip(&cum).enumerate() {
        while g < graded.len() && graded[g] < s * (1.0 - 1e-9) {
            let target = graded[g];
            while cum[seg + 1] < target {
                seg += 1;
            }
            g += 1;
            // graded points coarser than the local spacing would only leave sliver steps
            let len = cum[seg + 1] - cum[seg];
            if target * (1.0 - 1.0 / START_GRADING) >= 0.5 * len {
                continue;
            }
            let u = (target - cum[seg]) / len;
            path.push(refined[seg] + (refined[seg + 1] - refined[seg]) * u);
        }
        if g < graded.len() && (graded[g] - s).abs() <= 1e-9 * s {
            g += 1;
        }
        if i % r == 0 {
            marks.push(path.len());
        }
        path.push(z);
    }
    (path, marks)
}

/// Lifts a curve in `C ∖ R₊` starting at 0 into the upper half-plane by the square-root branch.
pub fn attach_and_lift(gamma: &CurveSamples) -> Result<CurveSamples> {
    if gamma.closed() {
        return Err(Error::input("expected an arc, got a loop"));
    }
    let pts = gamma.points();
    if pts.iter().any(|z| is_infinity(*z)) {
        return Err(Error::input("curve must be finite"));
    }
    let scale = pts.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if pts[0].norm() > 1e-12 * scale {
        return Err(Error::input("curve must start at the origin"));
    }
    for (i, w) in pts.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if b.im == 0.0 && b.re > 0.0 {
            return Err(Error::BranchCut { re: b.re });
        }
        if i > 0 && a.im * b.im < 0.0 {
            let x = a.re - a.im * (b.re - a.re) / (b.im - a.im);
            if x > 0.0 {
                return Err(Error::BranchCut { re: x });
            }
        }
    }
    let mut lifted = Vec::with_capacity(pts.len());
    lifted.push(Complex64::new(0.0, 0.0));
    for &z in &pts[1..] {
        lifted.push(sqrt_branch(z)?);
    }
    CurveSamples::arc(lifted)
}

/// Möbius map sending `root` to ∞ and `next` to 0 so that the segment between them lands on `R₊`.
/// When `root` is ∞ the segment is the ray arriving at `next` along the line from `after`.
pub(crate) fn root_mobius(root: ComplexPoint, next: ComplexPoint, after: ComplexPoint) -> Result<MobiusMap> {
    let one = Complex64::new(1.0, 0.0);
    if is_infinity(next) {
        return Err(Error::input("the sample after the root must be finite"));
    }
    if is_infinity(root) {
        if is_infinity(after) {
            return Err(Error::input("degenerate ray at the root"));
        }
        let d = next - after;
        let u = d / d.norm();
        MobiusMap::affine(one / u, -next / u)
    } else {
        MobiusMap::new(one, -next, -one, root)
    }
}

/// Result of unzipping a rooted arc on the sphere.
#[derive(Clone, Debug)]
pub(crate) struct RootedUnzip {
    pub mobius: MobiusMap,
    /// `slits[j]` unzips the sample at offset `j + 2` from the root.
    pub slits: Vec<TiltedSlitParams>,
    /// Images of the samples after `upto`, in order.
    pub rest: Vec<Complex64>,
    pub carried: Vec<Complex64>,
    pub end_value: f64,
}

/// Sends `points[0]` to ∞ and `points[1]` to 0, lifts by the square root and unzips the samples
/// at offsets `2..=upto`. `index_of` converts offsets into user-facing sample indices.
pub(crate) fn unzip_rooted(
    points: &[ComplexPoint],
    upto: usize,
    carried: &[ComplexPoint],
    opts: &ZipperOptions,
    index_of: impl Fn(usize) -> usize,
) -> Result<RootedUnzip> {
    if points.len() < 3 || upto >= points.len() || upto < 1 {
        return Err(Error::input("rooted arc needs at least three samples and 1 <= upto < n"));
    }
    let mobius = root_mobius(points[0], points[1], points[2])?;
    let lift = |j: usize, z: ComplexPoint| -> Result<Complex64> {
        let w = mobius.apply(z);
        if is_infinity(w) {
            return Err(Error::geometry(index_of(j), "sample coincides with the root"));
        }
        sqrt_branch(w).map_err(|_| Error::geometry(index_of(j), "curve meets its initial segment"))
    };
    let mut images = Vec::with_capacity(points.len() - 1);
    images.push(Complex64::new(0.0, 0.0));
    for (j, &z) in points.iter().enumerate().skip(2) {
        images.push(lift(j, z)?);
    }
    let mut carried_images = Vec::with_capacity(carried.len());
    for &z in carried {
        let w = mobius.apply(z);
        carried_images.push(if is_infinity(w) { w } else { sqrt_branch(w)? });
    }
    let (head, tail) = images.split_at_mut(upto);
    let mut carry_all: Vec<Complex64> = tail.to_vec();
    let split = carry_all.len();
    carry_all.extend_from_slice(&carried_images);
    let slits = zip_sequence(&mut head[1..], 0.0, &mut carry_all, opts, 2).map_err(|e| match e {
        Error::Geometry { index, reason } => Error::Geometry { index: index_of(index), reason },
        Error::StepRefinement { index, slope } => Error::StepRefinement { index: index_of(index), slope },
        other => other,
    })?;
    let end_value = slits.last().map(|s| s.driving_value()).unwrap_or(0.0);
    let carried = carry_all.split_off(split);
    Ok(RootedUnzip { mobius, slits, rest: carry_all, carried, end_value })
}

/// Conformal map from the sphere minus the loop arc `γ[root, eps]` onto the upper half-plane,
/// sending `γ(eps)` to 0 and `γ(root)` to ∞, together with the image of the remaining arc.
pub fn uniformize_slit_complement(
    curve: &CurveSamples,
    root_index: usize,
    eps_index: usize,
) -> Result<(ConformalComposition, CurveSamples)> {
    uniformize_slit_complement_with(curve, root_index, eps_index, &ZipperOptions::default())
}

pub fn uniformize_slit_complement_with(
    curve: &CurveSamples,
    root_index: usize,
    eps_index: usize,
    opts: &ZipperOptions,
) -> Result<(ConformalComposition, CurveSamples)> {
    if !curve.closed() {
        return Err(Error::input("expected a closed loop"));
    }
    let n = curve.len();
    if root_index >= n || eps_index >= n {
        return Err(Error::input("sample index out of range"));
    }
    if n < opts.min_samples {
        return Err(Error::input(alloc::format!("at least {} samples required", opts.min_samples)));
    }
    let e = (eps_index + n - root_index) % n;
    if e == 0 || e + 2 > n {
        return Err(Error::input("eps index must leave at least two samples after the initial arc"));
    }
    if let Some((_, j)) = curve.first_self_intersection() {
        return Err(Error::geometry(j, "loop is not simple"));
    }
    let rot = curve.rotated(root_index)?;
    let pts = rot.points();
    let unz = unzip_rooted(pts, e, &[], opts, |j| (j + root_index) % n)?;

    let origin = unz.end_value;
    let first_after = unz.rest[0];
    let radius = (first_after - origin).norm();
    if !(radius > 0.0) {
        return Err(Error::input("initial arc too short for a stable normalization; refine the loop"));
    }
    let normalize = MobiusMap::affine(Complex64::new(1.0 / radius, 0.0), Complex64::new(-origin / radius, 0.0))?;

    let mut comp = ConformalComposition::new();
    comp.push(MapStep::Mobius(unz.mobius));
    comp.push(MapStep::SqrtBranch);
    for s in &unz.slits {
        comp.push(MapStep::SlitInverse(*s));
    }
    comp.push(MapStep::Mobius(normalize));
    comp.normalization = Some(Normalization { to_zero: pts[e], to_infinity: pts[0] });

    let mut chord = Vec::with_capacity(unz.rest.len() + 1);
    chord.push(Complex64::new(0.0, 0.0));
    for z in &unz.rest {
        let w = normalize.apply(*z);
        if !(w.im > 0.0) {
            return Err(Error::geometry(0, "image chord touches the real axis"));
        }
        chord.push(w);
    }
    let chord = CurveSamples::arc(chord)?;
    if let Some((_, j)) = chord.first_self_intersection() {
        return Err(Error::geometry((root_index + e + j) % n, "image chord is not simple"));
    }
    Ok((comp, chord))
}
