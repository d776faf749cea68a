//! Analytic test curves.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::CurveSamples;
use crate::error::{Error, Result};
use crate::maps::ComplexPoint;

fn need(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::input(alloc::format!("need at least {min} samples")));
    }
    Ok(())
}

fn positive(x: f64, name: &str) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::input(alloc::format!("{name} must be positive")));
    }
    Ok(())
}

/// `[0, i·height]` with `n` equally spaced samples.
pub fn vertical_segment(height: f64, n: usize) -> Result<CurveSamples> {
    tilted_ray(0.0, height, n)
}

/// Segment of the given length from 0 at angle `π/2 − theta` from the positive reals.
pub fn tilted_ray(theta: f64, length: f64, n: usize) -> Result<CurveSamples> {
    need(n, 2)?;
    if !(theta.abs() < PI / 2.0) || !(length > 0.0) {
        return Err(Error::input("tilt must satisfy |theta| < pi/2 and length > 0"));
    }
    let dir = Complex64::from_polar(1.0, PI / 2.0 - theta);
    CurveSamples::arc((0..n).map(|i| dir * (length * i as f64 / (n - 1) as f64)).collect())
}

pub fn circle(center: ComplexPoint, radius: f64, n: usize) -> Result<CurveSamples> {
    need(n, 3)?;
    positive(radius, "radius")?;
    CurveSamples::closed_loop(
        (0..n).map(|i| center + Complex64::from_polar(radius, 2.0 * PI * i as f64 / n as f64)).collect(),
    )
}

/// Ellipse with semi-axes `a` (horizontal) and `b`, sampled uniformly in arclength.
pub fn ellipse(a: f64, b: f64, n: usize) -> Result<CurveSamples> {
    need(n, 3)?;
    positive(a, "a")?;
    positive(b, "b")?;
    let dense = 64 * n;
    let pts: Vec<_> = (0..dense)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / dense as f64;
            Complex64::new(a * t.cos(), b * t.sin())
        })
        .collect();
    CurveSamples::closed_loop(pts)?.resample(n)
}

/// Circular arc of the given centre and radius from `start` radians through `sweep` radians.
pub fn circular_arc(center: ComplexPoint, radius: f64, start: f64, sweep: f64, n: usize) -> Result<CurveSamples> {
    need(n, 2)?;
    positive(radius, "radius")?;
    if !(sweep != 0.0 && sweep.abs() < 2.0 * PI) {
        return Err(Error::input("sweep must satisfy 0 < |sweep| < 2 pi"));
    }
    CurveSamples::arc(
        (0..n).map(|i| center + Complex64::from_polar(radius, start + sweep * i as f64 / (n - 1) as f64)).collect(),
    )
}

/// Arc-length parametrized curve of piecewise constant curvature, starting at `start` with
/// direction angle `heading`. Samples are equally spaced in arclength.
pub fn constant_curvature_pieces(
    start: ComplexPoint,
    heading: f64,
    pieces: &[(f64, f64)],
    n: usize,
) -> Result<CurveSamples> {
    need(n, 2)?;
    if pieces.is_empty() || pieces.iter().any(|&(_, l)| !(l > 0.0)) {
        return Err(Error::input("pieces need positive lengths"));
    }
    let total: f64 = pieces.iter().map(|p| p.1).sum();
    let mut pts = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = total * i as f64 / (n - 1) as f64;
        let mut z = start;
        let mut angle = heading;
        for &(kappa, len) in pieces {
            let run = s.min(len);
            z += arc_displacement(angle, kappa, run);
            angle += kappa * run;
            s -= run;
            if s <= 0.0 {
                break;
            }
        }
        pts.push(z);
    }
    CurveSamples::arc(pts)
}

fn arc_displacement(angle: f64, kappa: f64, s: f64) -> Complex64 {
    let u = Complex64::from_polar(1.0, angle);
    if (kappa * s).abs() < 1e-8 {
        u * Complex64::new(s, kappa * s * s / 2.0)
    } else {
        u * (Complex64::from_polar(1.0, kappa * s) - 1.0) / Complex64::new(0.0, kappa)
    }
}

/// A unit-radius quarter circle followed tangentially by a radius-2 quarter circle
/// (curvature jumps from 1 to 1/2).
pub fn two_arc_concatenation(n: usize) -> Result<CurveSamples> {
    constant_curvature_pieces(Complex64::new(0.0, 0.0), PI / 2.0, &[(-1.0, PI / 2.0), (-0.5, PI)], n)
}

/// Arclength grid `s_j = S (j/n)^grading`.
pub fn graded_grid(length: f64, n: usize, grading: f64) -> Vec<f64> {
    (0..=n).map(|j| length * (j as f64 / n as f64).powf(grading)).collect()
}

/// `γ(s) = −s`, the straight continuation of the positive reals.
pub fn straight_continuation(length: f64, n: usize) -> Result<CurveSamples> {
    need(n, 2)?;
    CurveSamples::arc((0..n).map(|i| Complex64::new(-length * i as f64 / (n - 1) as f64, 0.0)).collect())
}

/// Circle arc of curvature `kappa` leaving 0 in direction −1 and bending into the upper half-plane.
pub fn tangent_circle(kappa: f64, length: f64, n: usize, grading: f64) -> Result<CurveSamples> {
    need(n, 2)?;
    if !(kappa > 0.0) || !(length > 0.0) || !(kappa * length < 2.0 * PI) {
        return Err(Error::input("need kappa > 0 and 0 < kappa * length < 2 pi"));
    }
    let pts = graded_grid(length, n - 1, grading).into_iter().map(|s| arc_displacement(PI, -kappa, s)).collect();
    CurveSamples::arc(pts)
}

/// Tangentially attached curve with `γ'(s) = exp(i(π + a s^β))`, on a grid graded toward 0.
pub fn c1beta(beta: f64, a: f64, length: f64, n: usize, grading: f64) -> Result<CurveSamples> {
    need(n, 2)?;
    if !(beta > 0.0 && beta <= 1.0) || !(length > 0.0) || !(grading >= 1.0) {
        return Err(Error::input("need 0 < beta <= 1, length > 0 and grading >= 1"));
    }
    let pts = graded_grid(length, n - 1, grading).into_iter().map(|s| c1beta_point(beta, a, s)).collect();
    CurveSamples::arc(pts)
}

/// `∫₀^s exp(i(π + a x^β)) dx` by its power series.
pub fn c1beta_point(beta: f64, a: f64, s: f64) -> ComplexPoint {
    if s == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let x = Complex64::new(0.0, a * s.powf(beta));
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for m in 0..200 {
        let add = term / (m as f64 * beta + 1.0);
        sum += add;
        if add.norm() < 1e-18 * sum.norm() && m > 2 {
            break;
        }
        term = term * x / (m as f64 + 1.0);
    }
    -sum * s
}
