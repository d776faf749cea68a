//! Regularity diagnostics for driving functions of tangentially attached curves:
//! moduli of continuity, Hölder exponent fits, the vertical growth bound and the
//! boundary integral `L_s`.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::CurveSamples;
use crate::driving::DrivingFunction;
use crate::error::{Error, Result};
use crate::maps::{sqrt_upper, TiltedSlitParams};
use crate::tracer::grow_through;
use crate::zipper::{attach_and_lift, compute_driving_with, ZipperOptions};

/// Minimum number of scales a Hölder fit accepts.
pub const MIN_SCALES: usize = 8;
/// Residual ratio below which the `log(1/δ)` corrected fit is preferred.
const LOG_GAIN: f64 = 0.75;

#[derive(Clone, Debug, PartialEq)]
pub struct HolderFit {
    pub exponent: f64,
    pub constant: f64,
    pub log_correction: bool,
    /// Root mean square residual of the selected fit in log space.
    pub residual: f64,
    pub delta_range: (f64, f64),
    /// Slope of the uncorrected fit.
    pub plain_exponent: f64,
}

/// `ω(δ) = sup |g(s) − g(s')|` over grid pairs with `|s − s'| ≤ δ`.
pub fn modulus_of_continuity(grid: &[f64], values: &[f64], deltas: &[f64]) -> Result<Vec<f64>> {
    if grid.len() != values.len() || grid.len() < 2 {
        return Err(Error::input("grid and values must have equal length of at least 2"));
    }
    if grid.windows(2).any(|p| !(p[1] > p[0])) || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("grid must be strictly increasing and values finite"));
    }
    let h = grid.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min);
    deltas
        .iter()
        .map(|&d| {
            if !(d >= h) {
                return Err(Error::Resolution { delta: d, resolution: h });
            }
            Ok(window_oscillation(grid, values, d))
        })
        .collect()
}

fn window_oscillation(grid: &[f64], values: &[f64], delta: f64) -> f64 {
    let mut hi: VecDeque<usize> = VecDeque::new();
    let mut lo: VecDeque<usize> = VecDeque::new();
    let mut start = 0;
    let mut best = 0.0f64;
    for j in 0..grid.len() {
        while grid[j] - grid[start] > delta {
            start += 1;
        }
        while hi.back().is_some_and(|&i| values[i] <= values[j]) {
            hi.pop_back();
        }
        hi.push_back(j);
        while lo.back().is_some_and(|&i| values[i] >= values[j]) {
            lo.pop_back();
        }
        lo.push_back(j);
        while hi[0] < start {
            hi.pop_front();
        }
        while lo[0] < start {
            lo.pop_front();
        }
        best = best.max(values[hi[0]] - values[lo[0]]);
    }
    best
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    (slope, icpt, (rss / n).sqrt())
}

/// Least squares fit of `log ω` against `log δ`, optionally with a `log(1/δ)` factor.
pub fn holder_fit(pairs: &[(f64, f64)]) -> Result<HolderFit> {
    if pairs.len() < MIN_SCALES {
        return Err(Error::input(alloc::format!("need at least {} scales, got {}", MIN_SCALES, pairs.len())));
    }
    if pairs.iter().any(|&(d, w)| !(d > 0.0) || !w.is_finite() || w < 0.0) {
        return Err(Error::input("scales must be positive and moduli finite"));
    }
    let dmin = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let dmax = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    if dmax < 100.0 * dmin {
        return Err(Error::input("scales must span at least two decades"));
    }
    let wmin = pairs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let wmax = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    if !(wmin > 0.0) || wmax - wmin <= 1e-12 * wmax {
        return Err(Error::Degenerate("modulus is constant, exponent undefined".into()));
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let (slope, icpt, res) = least_squares(&x, &y);
    let mut fit = HolderFit {
        exponent: slope,
        constant: icpt.exp(),
        log_correction: false,
        residual: res,
        delta_range: (dmin, dmax),
        plain_exponent: slope,
    };
    if dmax < 1.0 {
        let yc: Vec<f64> = pairs.iter().map(|p| (p.1 / (1.0 / p.0).ln()).ln()).collect();
        let (cs, ci, cr) = least_squares(&x, &yc);
        if cr < LOG_GAIN * res {
            fit.exponent = cs;
            fit.constant = ci.exp();
            fit.log_correction = true;
            fit.residual = cr;
        }
    }
    Ok(fit)
}

/// Scales `top · 2^{-m/2}`, `m = 0, 1, …`, down to `floor`.
pub fn half_octave_scales(top: f64, floor: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut d = top;
    while d >= floor && out.len() < 200 {
        out.push(d);
        d /= core::f64::consts::SQRT_2;
    }
    out
}

/// Which function a regularity fit was performed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FittedQuantity {
    Driving,
    Derivative,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub beta: f64,
    pub quantity: FittedQuantity,
    pub predicted_exponent: f64,
    pub fit: HolderFit,
    pub scales: Vec<(f64, f64)>,
    /// Slope of the first cell of `W`.
    pub initial_derivative: f64,
    pub max_derivative: f64,
    pub driving: DrivingFunction,
}

impl RegularityReport {
    pub fn exponent_error(&self) -> f64 {
        (self.fit.exponent - self.predicted_exponent).abs()
    }

    /// `|Ẇ(0)| ≤ fraction · max |Ẇ|`.
    pub fn initial_derivative_vanishes(&self, fraction: f64) -> bool {
        self.initial_derivative.abs() <= fraction * self.max_derivative
    }
}

/// Driving function of a curve attached to `R₊` at 0 from within `C ∖ R₊`.
pub fn attached_driving(
    curve: &CurveSamples,
) -> Result<(DrivingFunction, Vec<usize>, Vec<TiltedSlitParams>, CurveSamples)> {
    let lifted = attach_and_lift(curve)?;
    let (w, cap) = compute_driving_with(&lifted, &ZipperOptions::default())?;
    let slits = cap.slits().copied().collect();
    Ok((w, cap.marks, slits, lifted))
}

/// Fits the Hölder exponent of `W` (for `β ≤ 1/2`) or of `Ẇ` (for `β > 1/2`)
/// for a tangentially attached curve whose tangent is `C^{0,β}`.
pub fn verify_regularity_shift(curve: &CurveSamples, beta: f64) -> Result<RegularityReport> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::input("beta must lie in (0, 1]"));
    }
    let (w, _, _, _) = attached_driving(curve)?;
    let (mid, slope) = w.derivative();
    let (quantity, grid, values, predicted) = if beta <= 0.5 {
        (FittedQuantity::Driving, w.t().to_vec(), w.w().to_vec(), beta + 0.5)
    } else {
        (FittedQuantity::Derivative, mid, slope.clone(), beta - 0.5)
    };
    let total = w.total_capacity();
    let h = grid.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min);
    let deltas = half_octave_scales(total / 2.0, scale_floor(&grid).max(h));
    let omegas = modulus_of_continuity(&grid, &values, &deltas)?;
    let mut scales: Vec<(f64, f64)> = deltas.into_iter().zip(omegas).collect();
    // drop the largest scale and the two smallest
    if scales.len() > 3 {
        scales.remove(0);
        scales.truncate(scales.len() - 2);
    }
    let fit = holder_fit(&scales)?;
    let max_derivative = slope.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    Ok(RegularityReport {
        beta,
        quantity,
        predicted_exponent: predicted,
        fit,
        scales,
        initial_derivative: slope[0],
        max_derivative,
        driving: w,
    })
}

/// Smallest scale at which every window around the start of the grid holds several samples.
fn scale_floor(grid: &[f64]) -> f64 {
    let span = grid[grid.len() - 1] - grid[0];
    let mut widest = 0.0f64;
    for p in grid.windows(2) {
        if p[0] - grid[0] > 1e-3 * span {
            break;
        }
        widest = widest.max(p[1] - p[0]);
    }
    2.0 * widest
}

/// Unwrapped direction of each segment, placed at the segment's arclength midpoint.
pub fn tangent_angles(curve: &CurveSamples) -> (Vec<f64>, Vec<f64>) {
    let pts = curve.points();
    let s = curve.arclength();
    let mut mid = Vec::with_capacity(pts.len() - 1);
    let mut angle: Vec<f64> = Vec::with_capacity(pts.len() - 1);
    for i in 0..pts.len() - 1 {
        let d = pts[i + 1] - pts[i];
        let mut a = d.im.atan2(d.re);
        if let Some(&prev) = angle.last() {
            a += (2.0 * PI) * ((prev - a) / (2.0 * PI)).round();
        }
        mid.push(0.5 * (s[i] + s[i + 1]));
        angle.push(a);
    }
    (mid, angle)
}

/// Largest `R ≤ 1/2` with `ω(R) ≤ 1/5`, where `ω` is the modulus of continuity of the unit
/// tangent in arclength. On `[0, R]` the capacity of the lifted curve obeys `s/5 ≤ t ≤ s/2`.
pub fn regular_radius(curve: &CurveSamples) -> f64 {
    let (mid, angle) = tangent_angles(curve);
    let u: Vec<Complex64> = angle.iter().map(|&a| Complex64::from_polar(1.0, a)).collect();
    let mut radius = 0.5f64;
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            let d = mid[j] - mid[i];
            if d >= radius {
                break;
            }
            if (u[j] - u[i]).norm() > 0.2 {
                radius = d;
                break;
            }
        }
    }
    radius.min(curve.total_length())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    /// `sup |W_t| / (ω(5t) √t)` over the evaluated samples.
    pub ratio: f64,
    pub t_at_max: f64,
    pub evaluated: usize,
    /// Samples skipped because the tangent modulus vanishes at `5t`.
    pub excluded: usize,
}

/// Empirical constant in `|W_t| ≤ c ω(5t) √t`, with `ω` the modulus of the tangent
/// direction in arclength, counting the direction −1 in which `R₊` arrives at 0.
/// Samples with `5t` beyond the curve length are not used.
pub fn vertical_bound_check(curve: &CurveSamples) -> Result<BoundCheck> {
    let (w, _, _, _) = attached_driving(curve)?;
    let total = curve.total_length();
    let (mut mid, mut angle) = tangent_angles(curve);
    // the positive reals arrive at 0 heading in direction −1
    let incoming = PI + 2.0 * PI * ((angle[0] - PI) / (2.0 * PI)).round();
    mid.insert(0, 0.0);
    angle.insert(0, incoming);
    let w0 = w.w()[0];
    let mut out = BoundCheck { ratio: 0.0, t_at_max: 0.0, evaluated: 0, excluded: 0 };
    for (&t, &x) in w.t().iter().zip(w.w()).skip(1) {
        let d = 5.0 * t;
        if d > total {
            break;
        }
        let om = window_oscillation(&mid, &angle, d);
        if om <= 1e-14 {
            out.excluded += 1;
            continue;
        }
        out.evaluated += 1;
        let r = (x - w0).abs() / (om * t.sqrt());
        if r > out.ratio {
            out.ratio = r;
            out.t_at_max = t;
        }
    }
    Ok(out)
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq)]
pub struct LsEstimate {
    /// Arclength of the sample the estimate was taken at.
    pub s: f64,
    pub sample_index: usize,
    pub t: f64,
    pub L: f64,
    /// Contribution of `|r| > r_max`, already included in `L`.
    pub integrand_tail: f64,
    pub v0: f64,
    /// Centered difference quotient of `W` at the sample.
    pub finite_difference: f64,
}

/// Largest accepted `|integrand_tail| / max(|L|, 1/√S)`.
pub const LS_TAIL_THRESHOLD: f64 = 0.05;

/// Evaluates `L_s` at several positions along one unzipped curve.
#[derive(Clone, Debug)]
pub struct LsAnalyzer {
    driving: DrivingFunction,
    marks: Vec<usize>,
    slits: Vec<TiltedSlitParams>,
    arclength: Vec<f64>,
    r_max: f64,
    ratio: f64,
}

impl LsAnalyzer {
    pub fn new(curve: &CurveSamples) -> Result<Self> {
        let (driving, marks, slits, _) = attached_driving(curve)?;
        let root = curve.total_length().sqrt();
        let r_max = 10.0 * root;
        Ok(LsAnalyzer { driving, marks, slits, arclength: curve.arclength().to_vec(), r_max, ratio: 1.02 })
    }

    pub fn driving(&self) -> &DrivingFunction {
        &self.driving
    }

    /// Estimate at the sample nearest to arclength `s`.
    pub fn estimate(&self, s: f64) -> Result<LsEstimate> {
        let n = self.arclength.len();
        let j = match self.arclength.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
            Ok(j) => j,
            Err(j) => {
                if j == 0 {
                    0
                } else if j == n || s - self.arclength[j - 1] < self.arclength[j] - s {
                    j - 1
                } else {
                    j
                }
            }
        };
        if j == 0 || j + 1 >= n {
            return Err(Error::input("s must be interior to the curve"));
        }
        self.estimate_at(j)
    }

    pub fn estimate_at(&self, j: usize) -> Result<LsEstimate> {
        let m = self.marks[j];
        if m == 0 {
            return Err(Error::input("s must be interior to the curve"));
        }
        let slits = regrow_near_tip(&self.slits[..m])?;
        let wj = self.driving.w()[j];
        let tip = grow_through(&slits, Complex64::new(wj, 0.0))?;
        let gs = tip * tip;
        let last = self.slits[m.saturating_sub(2)..m].iter().map(|s| s.dt).fold(0.0, f64::max);
        let r_min = INNER_RADIUS * last.sqrt();
        if !(r_min < 0.1 * self.r_max) {
            return Err(Error::Resolution { delta: self.r_max, resolution: r_min });
        }

        let mut radii = Vec::new();
        let mut r = r_min;
        while r < self.r_max {
            radii.push(r);
            r *= self.ratio;
        }
        radii.push(self.r_max);

        let zeta = |x: f64, prev: Complex64| -> Result<Complex64> {
            let f = grow_through(&slits, Complex64::new(x + wj, 0.0))?;
            let root = sqrt_upper(f * f - gs);
            Ok(if (root - prev).norm() <= (root + prev).norm() { root } else { -root })
        };
        // ζ along each half-line, from r_max inward so the branch follows continuously
        let side = |sign: f64| -> Result<Vec<Complex64>> {
            let mut out = alloc::vec![Complex64::new(0.0, 0.0); radii.len()];
            let mut prev = Complex64::new(sign * self.r_max, 0.0);
            for (k, &r) in radii.iter().enumerate().rev() {
                prev = zeta(sign * r, prev)?;
                out[k] = prev;
            }
            Ok(out)
        };
        let pos = side(1.0)?;
        let neg = side(-1.0)?;
        let v0 = arg(pos[0] - neg[0]);

        let mut integral = 0.0;
        let mut first = [0.0; 2];
        for (n, (z, sign)) in [(&pos, 1.0), (&neg, -1.0)].into_iter().enumerate() {
            let mut last = 0.0;
            for k in 0..radii.len() - 1 {
                let dz = (z[k + 1] - z[k]) * sign;
                let mut dv = arg(dz) - v0;
                dv += (2.0 * PI) * ((last - dv) / (2.0 * PI)).round();
                last = dv;
                if k == 0 {
                    first[n] = dv;
                }
                integral += dv * (1.0 / radii[k] - 1.0 / radii[k + 1]);
            }
        }
        // |r| < r_min: the odd part cancels, the even part is quadratic
        let rbar = r_min * self.ratio.sqrt();
        let inner = (first[0] + first[1]) * r_min / (rbar * rbar);
        let tail = -2.0 * v0 / (PI * self.r_max);
        let l = (integral + inner) / PI + tail;
        let scale = 1.0 / self.arclength[self.arclength.len() - 1].sqrt();
        if tail.abs() > LS_TAIL_THRESHOLD * l.abs().max(scale) {
            return Err(Error::Truncation { tail });
        }
        let (t, w) = (self.driving.t(), self.driving.w());
        Ok(LsEstimate {
            s: self.arclength[j],
            sample_index: j,
            t: t[j],
            L: l,
            integrand_tail: tail,
            v0,
            finite_difference: (w[j + 1] - w[j - 1]) / (t[j + 1] - t[j - 1]),
        })
    }
}

/// Inner cutoff of the `r` integral in units of `√Δt` of the larger of the last two slits.
const INNER_RADIUS: f64 = 1.0;
/// Substeps of the last cell when the tip is regrown.
const TIP_SUBSTEPS: f64 = 400.0;

/// Replaces each slit near the tip by substeps of the linear driving function with the same
/// endpoints. A single tilted slit has a square-root driving function whose one-sided
/// derivatives do not match the curve's, so the tip region is refined until the substeps are
/// small compared to the distance from the tip.
fn regrow_near_tip(slits: &[TiltedSlitParams]) -> Result<Vec<TiltedSlitParams>> {
    let mut out = Vec::with_capacity(slits.len() + 4 * TIP_SUBSTEPS as usize);
    let mut back = 0.0;
    let mut q_of = Vec::with_capacity(slits.len());
    for s in slits.iter().rev() {
        back += s.dt;
        q_of.push(((TIP_SUBSTEPS * s.dt / back).ceil() as usize).max(1));
    }
    q_of.reverse();
    for (s, &q) in slits.iter().zip(&q_of) {
        if q == 1 {
            out.push(*s);
            continue;
        }
        let dw = s.driving_value() - s.base;
        let (sdt, sdw) = (s.dt / q as f64, dw / q as f64);
        let k = sdw / sdt.sqrt();
        for i in 0..q {
            out.push(TiltedSlitParams::from_slope(k, sdt, s.base + dw * (i as f64 / q as f64))?);
        }
    }
    Ok(out)
}

fn arg(z: Complex64) -> f64 {
    z.im.atan2(z.re)
}

/// `|L_s| / (ω(s)/√s + ∫₀^{√s} ω(r²)/r² dr)` with `ω` the modulus of the tangent direction.
pub fn ls_bound_ratio(curve: &CurveSamples, est: &LsEstimate) -> Result<f64> {
    let (mid, angle) = tangent_angles(curve);
    let s = est.s;
    let root = s.sqrt();
    let om = |d: f64| window_oscillation(&mid, &angle, d);
    let mut integral = 0.0;
    let n = 400;
    let h = mid.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min);
    let lo = h.sqrt();
    // ω(r²) vanishes below the grid spacing; integrate in log r above it
    let step = (root / lo).ln() / n as f64;
    for i in 0..n {
        let r = lo * ((i as f64 + 0.5) * step).exp();
        integral += om(r * r) / r * step;
    }
    let denom = om(s) / root + integral;
    if !(denom > 0.0) {
        return Err(Error::Degenerate("tangent direction is constant".into()));
    }
    Ok(est.L.abs() / denom)
}

/// `L_s` of a tangentially attached curve at arclength `s`.
pub fn estimate_ls(curve: &CurveSamples, s: f64) -> Result<LsEstimate> {
    LsAnalyzer::new(curve)?.estimate(s)
}
