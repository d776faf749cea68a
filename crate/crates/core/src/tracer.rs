//! Forward Loewner solver: traces the curve generated by a driving function
//! by composing exact tilted-slit maps, one per sub-step.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::CurveSamples;
use crate::driving::DrivingFunction;
use crate::error::{Error, Result};
use crate::maps::{is_infinity, ComplexPoint, TiltedSlitParams};

/// Largest `|ΔW|/√Δt` realized by a single slit map.
pub const MAX_SLOPE: f64 = 40.0;

const MAX_SUBSTEPS_PER_CELL: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct CurveTrace {
    pub points: CurveSamples,
    pub t_of_point: Vec<f64>,
}

/// Slit maps for the piecewise linear interpolant of `w`, together with the
/// number of slits accumulated at each grid point.
pub fn slit_steps(w: &DrivingFunction, steps_per_unit: usize) -> Result<(Vec<TiltedSlitParams>, Vec<usize>)> {
    let (t, v) = (w.t(), w.w());
    let mut slits = Vec::new();
    let mut marks = Vec::with_capacity(t.len());
    marks.push(0);
    for i in 0..t.len() - 1 {
        let dt = t[i + 1] - t[i];
        let dw = v[i + 1] - v[i];
        let mut m = ((dt * steps_per_unit as f64).ceil() as usize).max(1);
        let slope = dw.abs() / dt.sqrt();
        if slope > MAX_SLOPE {
            let needed = (slope / MAX_SLOPE).powi(2).ceil();
            if needed > MAX_SUBSTEPS_PER_CELL as f64 {
                return Err(Error::StepRefinement { index: i, slope });
            }
            m = m.max(needed as usize);
        }
        let (sdt, sdw) = (dt / m as f64, dw / m as f64);
        let k = sdw / sdt.sqrt();
        for j in 0..m {
            let base = v[i] + dw * (j as f64 / m as f64);
            slits.push(TiltedSlitParams::from_slope(k, sdt, base)?);
        }
        marks.push(slits.len());
    }
    Ok((slits, marks))
}

/// Image of `z` under the inverse of the mapping-out function after the first `n` slits.
pub fn grow_through(slits: &[TiltedSlitParams], z: ComplexPoint) -> Result<ComplexPoint> {
    slits.iter().rev().try_fold(z, |acc, s| s.forward(acc))
}

pub fn trace_curve(w: &DrivingFunction, steps_per_unit: usize) -> Result<CurveTrace> {
    if steps_per_unit == 0 {
        return Err(Error::input("steps_per_unit must be positive"));
    }
    let (slits, marks) = slit_steps(w, steps_per_unit)?;
    let mut pts = Vec::with_capacity(marks.len());
    pts.push(Complex64::new(w.w()[0], 0.0));
    for &m in &marks[1..] {
        let last = &slits[m - 1];
        pts.push(grow_through(&slits[..m - 1], last.tip())?);
    }
    let mut keep_pts: Vec<ComplexPoint> = Vec::with_capacity(pts.len());
    let mut keep_t = Vec::with_capacity(pts.len());
    for (p, &t) in pts.into_iter().zip(w.t()) {
        if keep_pts.last() != Some(&p) {
            keep_pts.push(p);
            keep_t.push(t);
        }
    }
    Ok(CurveTrace { points: CurveSamples::arc(keep_pts)?, t_of_point: keep_t })
}

/// `g_{t_end}(z)`: flows `z` under the Loewner equation driven by `w` up to `t_end`.
pub fn evolve_point(w: &DrivingFunction, z: ComplexPoint, t_end: f64, steps_per_unit: usize) -> Result<ComplexPoint> {
    if is_infinity(z) || t_end <= 0.0 {
        return Ok(z);
    }
    if !(z.im > 0.0) {
        return Err(Error::domain("point must lie in the open upper half-plane"));
    }
    let window = w.window(0.0, t_end.min(w.total_capacity()))?;
    let (slits, _) = slit_steps(&window, steps_per_unit.max(1))?;
    let scale = z.norm() + t_end.sqrt();
    let mut g = z;
    let mut elapsed = 0.0;
    for s in &slits {
        g = s.inverse(g)?;
        elapsed += s.dt;
        if g.im <= 1e-13 * scale {
            return Err(Error::Swallowed { time: elapsed });
        }
    }
    Ok(g)
}
