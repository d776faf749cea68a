//! Elementary conformal maps: Möbius transformations, the square-root
//! branch onto the upper half-plane and the straight tilted-slit family.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type ComplexPoint = Complex64;

/// Default absolute tolerance for map round trips.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// The point at infinity. Any point with an infinite component is treated as infinity.
pub fn infinity() -> ComplexPoint {
    Complex64::new(f64::INFINITY, 0.0)
}

pub fn is_infinity(z: ComplexPoint) -> bool {
    z.re.is_infinite() || z.im.is_infinite()
}

pub fn approx_eq(a: ComplexPoint, b: ComplexPoint, tol: f64) -> bool {
    match (is_infinity(a), is_infinity(b)) {
        (true, true) => true,
        (false, false) => (a - b).norm() <= tol,
        _ => false,
    }
}

/// Logarithm with argument in `[0, π]`, continuous on the closed upper half-plane.
#[inline]
pub(crate) fn log_upper(z: Complex64) -> Complex64 {
    let im = if z.im > 0.0 { z.im } else { 0.0 };
    Complex64::new(z.norm().ln(), im.atan2(z.re))
}

pub fn k_of_theta(theta: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_4).contains(&theta) {
        return Err(Error::domain("theta must lie in [0, pi/4]"));
    }
    Ok(slope_of_tilt(theta))
}

/// Driving coefficient of a slit tilted by `theta` from the vertical, for any `|theta| < π/2`.
/// Negative tilts lean right and give negative coefficients.
pub fn slope_of_tilt(theta: f64) -> f64 {
    8.0 * theta / (PI * PI - 4.0 * theta * theta).sqrt()
}

/// Inverse of [`slope_of_tilt`].
pub fn theta_of_k(k: f64) -> f64 {
    FRAC_PI_2 * k / (k * k + 16.0).sqrt()
}

pub fn b_of_k(k: f64) -> Result<ComplexPoint> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::domain("k must be finite and nonnegative"));
    }
    Ok(tip_coefficient(k))
}

/// `B(k)` extended to signed `k`; the slit tip at capacity `t` is `B(k)√t`.
pub fn tip_coefficient(k: f64) -> ComplexPoint {
    let s = (k * k + 16.0).sqrt();
    let modulus = 2.0 * ((s + k) / (s - k)).powf(k / (2.0 * s));
    Complex64::from_polar(modulus, FRAC_PI_2 - theta_of_k(k))
}

/// Square root onto the upper half-plane, with its cut along the positive reals.
pub fn sqrt_branch(z: ComplexPoint) -> Result<ComplexPoint> {
    if is_infinity(z) {
        return Ok(infinity());
    }
    if z.im == 0.0 && z.re > 0.0 {
        return Err(Error::BranchCut { re: z.re });
    }
    Ok(sqrt_upper(z))
}

#[inline]
pub(crate) fn sqrt_upper(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && s.re < 0.0) {
        -s
    } else {
        s
    }
}

/// Which face of a slit a boundary point belongs to. `Left` faces the negative reals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlitSide {
    Left,
    Right,
}

/// A straight slit of half-plane capacity `dt` attached at `base` with tilt `theta`.
///
/// `forward` maps the upper half-plane onto the slit complement and
/// `inverse` is the hydrodynamically normalized mapping-out function,
/// `inverse(z) = z + 2 dt / z + O(1/z^2)`, sending the tip to `base + k √dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltedSlitParams {
    pub k: f64,
    pub theta: f64,
    pub dt: f64,
    pub base: f64,
    alpha: f64,
    p: f64,
    q: f64,
}

impl TiltedSlitParams {
    pub fn from_slope(k: f64, dt: f64, base: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::domain("slope must be finite"));
        }
        Self::build(k, theta_of_k(k), dt, base)
    }

    pub fn from_theta(theta: f64, dt: f64, base: f64) -> Result<Self> {
        if !(theta.abs() < FRAC_PI_2) {
            return Err(Error::domain("tilt must satisfy |theta| < pi/2"));
        }
        Self::build(slope_of_tilt(theta), theta, dt, base)
    }

    fn build(k: f64, theta: f64, dt: f64, base: f64) -> Result<Self> {
        if !(dt >= 0.0) || !dt.is_finite() || !base.is_finite() {
            return Err(Error::domain("dt must be finite and nonnegative, base finite"));
        }
        let alpha = 0.5 + theta / PI;
        let beta = 1.0 - alpha;
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::domain("slit tilt degenerates to the real axis"));
        }
        let l = 2.0 * (dt / (alpha * beta)).sqrt();
        Ok(TiltedSlitParams { k, theta, dt, base, alpha, p: beta * l, q: alpha * l })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The real interval that the forward map folds onto the two faces of the slit.
    pub fn preimage_interval(&self) -> (f64, f64) {
        (self.base - self.p, self.base + self.q)
    }

    pub fn tip(&self) -> ComplexPoint {
        Complex64::new(self.base, 0.0) + tip_coefficient(self.k) * self.dt.sqrt()
    }

    /// Driving value after the slit has been mapped out.
    pub fn driving_value(&self) -> f64 {
        self.base + self.critical()
    }

    #[inline]
    fn critical(&self) -> f64 {
        self.q * self.alpha - self.p * (1.0 - self.alpha)
    }

    #[inline]
    fn length(&self) -> f64 {
        self.p + self.q
    }

    #[inline]
    fn log_h(&self, w: Complex64) -> Complex64 {
        log_upper(w + self.p) * self.alpha + log_upper(w - self.q) * (1.0 - self.alpha)
    }

    #[inline]
    fn log_h_prime(&self, w: Complex64) -> Complex64 {
        self.alpha / (w + self.p) + (1.0 - self.alpha) / (w - self.q)
    }

    pub fn forward(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        if self.dt == 0.0 || is_infinity(z) {
            return Ok(z);
        }
        let mut w = z - self.base;
        if w.im < 0.0 {
            if w.im < -1e-12 * (w.norm() + self.length()) {
                return Err(Error::domain("point below the real axis"));
            }
            w.im = 0.0;
        }
        Ok(self.log_h(w).exp() + self.base)
    }

    pub fn inverse(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        if self.dt == 0.0 || is_infinity(z) {
            return Ok(z);
        }
        let mut zeta = z - self.base;
        if zeta.im < 0.0 {
            if zeta.im < -1e-12 * (zeta.norm() + self.length()) {
                return Err(Error::domain("point below the real axis"));
            }
            zeta.im = 0.0;
        }
        let w = if zeta.im == 0.0 { Complex64::new(self.solve_real(zeta.re), 0.0) } else { self.solve_complex(zeta)? };
        Ok(w + self.base)
    }

    /// Preimage of a point on the slit, seen from the given face.
    pub fn inverse_on_slit(&self, z: ComplexPoint, side: SlitSide) -> Result<f64> {
        if self.dt == 0.0 {
            return Ok(z.re);
        }
        let r = (z - self.base).norm();
        let tip_r = (self.tip() - self.base).norm();
        if r > tip_r * (1.0 + 1e-9) {
            return Err(Error::domain("point is beyond the slit tip"));
        }
        Ok(self.base + self.slit_preimage(r.min(tip_r), side))
    }

    fn slit_preimage(&self, r: f64, side: SlitSide) -> f64 {
        let wc = self.critical();
        let target = r.ln();
        let g = |x: f64| {
            let v = self.alpha * (x + self.p).abs().ln() + (1.0 - self.alpha) * (self.q - x).abs().ln();
            let d = self.alpha / (x + self.p) - (1.0 - self.alpha) / (self.q - x);
            (v - target, d)
        };
        match side {
            SlitSide::Left => safeguarded_root(g, -self.p, wc),
            SlitSide::Right => safeguarded_root(g, wc, self.q),
        }
    }

    fn solve_real(&self, x: f64) -> f64 {
        if x == 0.0 {
            return self.q;
        }
        let target = x.abs().ln();
        let g = |u: f64| {
            let v = self.alpha * (u + self.p).abs().ln() + (1.0 - self.alpha) * (u - self.q).abs().ln();
            let d = self.alpha / (u + self.p) + (1.0 - self.alpha) / (u - self.q);
            (v - target, d)
        };
        if x > 0.0 {
            safeguarded_root(g, x.max(self.q), x + self.q)
        } else {
            safeguarded_root(g, x - self.p, x.min(-self.p))
        }
    }

    fn solve_complex(&self, zeta: Complex64) -> Result<Complex64> {
        let target = log_upper(zeta);
        let scale = 1.0 + target.norm();
        let tol = 1e-13 * scale;

        if zeta.norm() > 4.0 * self.length() {
            let far = zeta + 2.0 * self.dt / zeta;
            if far.im >= 0.0 {
                let r0 = (self.log_h(far) - target).norm();
                let (w, r) = self.newton(target, far, r0, tol);
                if r <= tol {
                    return Ok(w);
                }
            }
        }

        let mut best = (Complex64::new(0.0, 0.0), f64::INFINITY);
        let consider = |w: Complex64, best: &mut (Complex64, f64)| {
            if !(w.re.is_finite() && w.im.is_finite()) {
                return;
            }
            let w = Complex64::new(w.re, w.im.max(0.0));
            let r = (self.log_h(w) - target).norm();
            if r < best.1 {
                *best = (w, r);
            }
        };

        for guess in self.initial_guesses(zeta, target) {
            consider(guess, &mut best);
        }
        let (w, r) = self.newton(target, best.0, best.1, tol);
        if r <= tol * 1e3 {
            return Ok(w);
        }

        // Points hugging a face of the slit: start from the boundary preimage on each side.
        let mut fallback = (w, r);
        let tip_r = (self.tip() - self.base).norm();
        let rad = zeta.norm().min(tip_r);
        for side in [SlitSide::Left, SlitSide::Right] {
            let x = self.slit_preimage(rad, side);
            let mut start = (Complex64::new(x, 0.0), f64::INFINITY);
            consider(start.0, &mut start);
            let d = self.log_h_prime(start.0 + Complex64::new(0.0, 1e-12 * self.length()));
            consider(start.0 - (self.log_h(start.0) - target) / d, &mut start);
            let cand = self.newton(target, start.0, start.1, tol);
            if cand.1 < fallback.1 {
                fallback = cand;
            }
        }
        if fallback.1 <= (tol * 1e3).max(1e-8 * scale) {
            Ok(fallback.0)
        } else {
            Err(Error::NonConvergence { iterations: 200, residual: fallback.1 })
        }
    }

    fn initial_guesses(&self, zeta: Complex64, target: Complex64) -> [Complex64; 4] {
        let a = self.alpha;
        let b = 1.0 - a;
        let l = self.length();
        let far = zeta + 2.0 * self.dt / zeta;

        let wc = self.critical();
        let log_tip = self.log_h(Complex64::new(wc, 0.0));
        let mut s = (-(target - log_tip)).sqrt();
        if s.im < 0.0 {
            s = -s;
        }
        let near_tip = Complex64::new(wc, 0.0) + s * (l * (2.0 * a * b).sqrt());

        let rot = Complex64::from_polar(1.0, PI * b);
        let left = (zeta / (rot * l.powf(b))).powf(1.0 / a) - self.p;
        let right = (zeta / l.powf(a)).powf(1.0 / b) + self.q;
        [far, near_tip, left, right]
    }

    fn newton(&self, target: Complex64, mut w: Complex64, mut r: f64, tol: f64) -> (Complex64, f64) {
        let mut f = self.log_h(w) - target;
        for _ in 0..100 {
            if r <= tol {
                break;
            }
            let step = f / self.log_h_prime(w);
            let mut lambda = 1.0;
            let mut moved = false;
            for _ in 0..50 {
                let mut cand = w - step * lambda;
                if cand.im < 0.0 {
                    cand.im = 0.0;
                }
                let fc = self.log_h(cand) - target;
                let rc = fc.norm();
                if rc < r {
                    w = cand;
                    f = fc;
                    r = rc;
                    moved = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !moved {
                break;
            }
        }
        (w, r)
    }
}

/// Root of a monotone function on `[lo, hi]` by Newton steps kept inside a shrinking bracket.
pub(crate) fn safeguarded_root(f: impl Fn(f64) -> (f64, f64), lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let flo = f(lo).0;
    let fhi = f(hi).0;
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    let increasing = fhi > flo;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, d) = f(x);
        if v == 0.0 {
            return x;
        }
        if (v < 0.0) == increasing {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * x.abs().max(hi.abs()).max(1e-300) {
            break;
        }
        let newton = x - v / d;
        x = if newton.is_finite() && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    x
}

pub fn tilted_slit_forward(p: &TiltedSlitParams, z: ComplexPoint) -> Result<ComplexPoint> {
    p.forward(z)
}

pub fn tilted_slit_inverse(p: &TiltedSlitParams, w: ComplexPoint) -> Result<ComplexPoint> {
    p.inverse(w)
}

/// `z ↦ (a z + b) / (c z + d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        let det = a * d - b * c;
        if !(scale.is_finite()) || !(det.norm() > 1e-14 * scale * scale) {
            return Err(Error::domain("degenerate Mobius map"));
        }
        Ok(MobiusMap { a, b, c, d }.normalized())
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        MobiusMap { a: one, b: zero, c: zero, d: one }
    }

    /// `z ↦ scale · z + shift`.
    pub fn affine(scale: Complex64, shift: Complex64) -> Result<Self> {
        Self::new(scale, shift, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    fn normalized(self) -> Self {
        let s = self.a.norm().max(self.b.norm()).max(self.c.norm()).max(self.d.norm());
        MobiusMap { a: self.a / s, b: self.b / s, c: self.c / s, d: self.d / s }
    }

    pub fn apply(&self, z: ComplexPoint) -> ComplexPoint {
        if is_infinity(z) {
            return if self.c == Complex64::new(0.0, 0.0) { infinity() } else { self.a / self.c };
        }
        let den = self.c * z + self.d;
        if den == Complex64::new(0.0, 0.0) {
            return infinity();
        }
        (self.a * z + self.b) / den
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MobiusMap) -> MobiusMap {
        MobiusMap {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
        }
        .normalized()
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MapStep {
    Mobius(MobiusMap),
    SqrtBranch,
    SlitForward(TiltedSlitParams),
    SlitInverse(TiltedSlitParams),
}

impl MapStep {
    pub fn apply(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        match self {
            MapStep::Mobius(m) => Ok(m.apply(z)),
            MapStep::SqrtBranch => sqrt_branch(z),
            MapStep::SlitForward(p) => p.forward(z),
            MapStep::SlitInverse(p) => p.inverse(z),
        }
    }

    pub fn apply_inverse(&self, w: ComplexPoint) -> Result<ComplexPoint> {
        match self {
            MapStep::Mobius(m) => Ok(m.inverse().apply(w)),
            MapStep::SqrtBranch => Ok(if is_infinity(w) { w } else { w * w }),
            MapStep::SlitForward(p) => p.inverse(w),
            MapStep::SlitInverse(p) => p.forward(w),
        }
    }
}

/// Which points a composition sends to `0` and to `∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalization {
    pub to_zero: ComplexPoint,
    pub to_infinity: ComplexPoint,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConformalComposition {
    pub steps: Vec<MapStep>,
    pub normalization: Option<Normalization>,
}

impl ConformalComposition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, step: MapStep) {
        self.steps.push(step);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn apply(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        self.steps.iter().try_fold(z, |acc, s| s.apply(acc))
    }

    pub fn apply_inverse(&self, w: ComplexPoint) -> Result<ComplexPoint> {
        self.steps.iter().rev().try_fold(w, |acc, s| s.apply_inverse(acc))
    }

    /// Largest `|inverse(apply(z)) − z|` over the given points.
    pub fn round_trip_error(&self, points: &[ComplexPoint]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &z in points {
            let back = self.apply_inverse(self.apply(z)?)?;
            if is_infinity(z) != is_infinity(back) {
                return Ok(f64::INFINITY);
            }
            if !is_infinity(z) {
                worst = worst.max((back - z).norm());
            }
        }
        Ok(worst)
    }
}
