use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::maps::{is_infinity, ComplexPoint};

/// Ordered samples of a simple arc or a Jordan loop.
///
/// A loop is stored without repeating its first point; the closing segment is implicit.
/// Points may include the infinity sentinel, in which case arclength is infinite from there on.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSamples {
    points: Vec<ComplexPoint>,
    closed: bool,
    arclength: Vec<f64>,
}

impl CurveSamples {
    pub fn new(mut points: Vec<ComplexPoint>, closed: bool) -> Result<Self> {
        if closed && points.len() > 1 && points.first() == points.last() {
            points.pop();
        }
        if points.len() < 2 {
            return Err(Error::input("a curve needs at least two samples"));
        }
        for (i, z) in points.iter().enumerate() {
            if z.re.is_nan() || z.im.is_nan() {
                return Err(Error::input(alloc::format!("sample {i} is NaN")));
            }
        }
        for i in 1..points.len() {
            let (a, b) = (points[i - 1], points[i]);
            if a == b || (is_infinity(a) && is_infinity(b)) {
                return Err(Error::input(alloc::format!("samples {} and {i} coincide", i - 1)));
            }
        }
        let arclength = cumulative_length(&points);
        Ok(CurveSamples { points, closed, arclength })
    }

    pub fn arc(points: Vec<ComplexPoint>) -> Result<Self> {
        Self::new(points, false)
    }

    pub fn closed_loop(points: Vec<ComplexPoint>) -> Result<Self> {
        Self::new(points, true)
    }

    pub fn points(&self) -> &[ComplexPoint] {
        &self.points
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn arclength(&self) -> &[f64] {
        &self.arclength
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<ComplexPoint> {
        self.points
    }

    /// Total length, including the closing segment of a loop.
    pub fn total_length(&self) -> f64 {
        let last = *self.arclength.last().unwrap_or(&0.0);
        if self.closed {
            last + segment_length(self.points[self.points.len() - 1], self.points[0])
        } else {
            last
        }
    }

    pub fn has_infinity(&self) -> bool {
        self.points.iter().any(|z| is_infinity(*z))
    }

    /// Loop samples re-indexed so that `root` comes first.
    pub fn rotated(&self, root: usize) -> Result<CurveSamples> {
        if !self.closed {
            return Err(Error::input("only loops can be rotated"));
        }
        if root >= self.len() {
            return Err(Error::input("root index out of range"));
        }
        let mut pts = Vec::with_capacity(self.len());
        pts.extend_from_slice(&self.points[root..]);
        pts.extend_from_slice(&self.points[..root]);
        CurveSamples::new(pts, true)
    }

    pub fn reversed(&self) -> CurveSamples {
        let mut pts = self.points.clone();
        pts.reverse();
        CurveSamples::new(pts, self.closed).expect("reversal keeps samples valid")
    }

    /// First pair of non-adjacent segments that meet, if any.
    pub fn first_self_intersection(&self) -> Option<(usize, usize)> {
        first_crossing(&self.points, self.closed)
    }

    pub fn is_simple(&self) -> bool {
        self.first_self_intersection().is_none()
    }

    /// `n` samples equally spaced in arclength. Finite curves only.
    pub fn resample(&self, n: usize) -> Result<CurveSamples> {
        self.resample_with(n, |a, b| (b - a).norm())
    }

    /// Like [`CurveSamples::resample`], but equally spaced in chordal distance on the sphere,
    /// which keeps long excursions from starving the rest of the curve.
    pub fn resample_chordal(&self, n: usize) -> Result<CurveSamples> {
        self.resample_with(n, chordal_distance)
    }

    fn resample_with(&self, n: usize, dist: impl Fn(ComplexPoint, ComplexPoint) -> f64) -> Result<CurveSamples> {
        if self.has_infinity() {
            return Err(Error::input("cannot resample a curve through infinity"));
        }
        if n < 2 {
            return Err(Error::input("need at least two samples"));
        }
        let mut pts = self.points.clone();
        if self.closed {
            pts.push(self.points[0]);
        }
        let mut cum = Vec::with_capacity(pts.len());
        cum.push(0.0);
        for w in pts.windows(2) {
            cum.push(cum[cum.len() - 1] + dist(w[0], w[1]));
        }
        let total = *cum.last().unwrap();
        let count = if self.closed { n } else { n - 1 };
        let mut out = Vec::with_capacity(n);
        let mut seg = 0;
        for i in 0..n {
            let s = total * i as f64 / count as f64;
            while seg + 2 < cum.len() && cum[seg + 1] < s {
                seg += 1;
            }
            let len = cum[seg + 1] - cum[seg];
            let u = if len > 0.0 { ((s - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
            out.push(pts[seg] + (pts[seg + 1] - pts[seg]) * u);
        }
        if !self.closed {
            out[n - 1] = pts[pts.len() - 1];
        }
        CurveSamples::new(out, self.closed)
    }
}

/// Chordal distance between two finite points of the Riemann sphere.
pub fn chordal_distance(a: ComplexPoint, b: ComplexPoint) -> f64 {
    2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
}

/// Subdivides every segment into `r` pieces along a centripetal Catmull-Rom spline through
/// the samples. Original samples sit at multiples of `r`. Collinear samples stay collinear.
/// With `floor = Some(y)`, interior points that would fall to or below height `y` are
/// replaced by the straight-line interpolant.
pub fn refine_polyline(points: &[ComplexPoint], closed: bool, r: usize, floor: Option<f64>) -> Vec<ComplexPoint> {
    let n = points.len();
    if r <= 1 || n < 2 {
        return points.to_vec();
    }
    let segs = if closed { n } else { n - 1 };
    let get = |i: isize| -> ComplexPoint {
        if closed {
            points[i.rem_euclid(n as isize) as usize]
        } else if i < 0 {
            points[0] * 2.0 - points[1]
        } else if i as usize >= n {
            points[n - 1] * 2.0 - points[n - 2]
        } else {
            points[i as usize]
        }
    };
    let mut out = Vec::with_capacity(segs * r + 1);
    for s in 0..segs {
        let i = s as isize;
        let (p0, p1, p2, p3) = (get(i - 1), get(i), get(i + 1), get(i + 2));
        out.push(p1);
        let finite = [p0, p1, p2, p3].iter().all(|z| !is_infinity(*z));
        for j in 1..r {
            let u = j as f64 / r as f64;
            let lin = p1 + (p2 - p1) * u;
            let mut z = if finite { catmull_rom(p0, p1, p2, p3, u) } else { lin };
            if !(z.re.is_finite() && z.im.is_finite()) {
                z = lin;
            }
            if let Some(y) = floor {
                if !(z.im > y) {
                    z = lin;
                }
            }
            out.push(z);
        }
    }
    if !closed {
        out.push(points[n - 1]);
    }
    out
}

fn catmull_rom(p0: Complex64, p1: Complex64, p2: Complex64, p3: Complex64, u: f64) -> Complex64 {
    let knot = |a: Complex64, b: Complex64| (b - a).norm().sqrt().max(1e-300);
    let t0 = 0.0;
    let t1 = t0 + knot(p0, p1);
    let t2 = t1 + knot(p1, p2);
    let t3 = t2 + knot(p2, p3);
    let t = t1 + u * (t2 - t1);
    let lerp = |a: Complex64, b: Complex64, ta: f64, tb: f64| a * ((tb - t) / (tb - ta)) + b * ((t - ta) / (tb - ta));
    let a1 = lerp(p0, p1, t0, t1);
    let a2 = lerp(p1, p2, t1, t2);
    let a3 = lerp(p2, p3, t2, t3);
    let b1 = lerp(a1, a2, t0, t2);
    let b2 = lerp(a2, a3, t1, t3);
    lerp(b1, b2, t1, t2)
}

fn segment_length(a: ComplexPoint, b: ComplexPoint) -> f64 {
    if is_infinity(a) || is_infinity(b) {
        f64::INFINITY
    } else {
        (b - a).norm()
    }
}

fn cumulative_length(points: &[ComplexPoint]) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in points.windows(2) {
        acc += segment_length(w[0], w[1]);
        out.push(acc);
    }
    out
}

#[inline]
fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

#[inline]
fn on_segment(a: Complex64, b: Complex64, c: Complex64) -> bool {
    c.re >= a.re.min(b.re) && c.re <= a.re.max(b.re) && c.im >= a.im.min(b.im) && c.im <= a.im.max(b.im)
}

pub fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

pub(crate) fn first_crossing(points: &[ComplexPoint], closed: bool) -> Option<(usize, usize)> {
    let n = points.len();
    let m = if closed { n } else { n - 1 };
    let seg = |i: usize| (points[i], points[(i + 1) % n]);
    let boxes: Vec<Option<[f64; 4]>> = (0..m)
        .map(|i| {
            let (a, b) = seg(i);
            if is_infinity(a) || is_infinity(b) {
                None
            } else {
                Some([a.re.min(b.re), a.re.max(b.re), a.im.min(b.im), a.im.max(b.im)])
            }
        })
        .collect();
    for j in 2..m {
        let Some(bj) = boxes[j] else { continue };
        for (i, bi) in boxes.iter().enumerate().take(j - 1) {
            if closed && i == 0 && j == m - 1 {
                continue;
            }
            let Some(bi) = *bi else { continue };
            if bi[1] < bj[0] || bj[1] < bi[0] || bi[3] < bj[2] || bj[3] < bi[2] {
                continue;
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            if segments_intersect(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Distance from `z` to the segment `[a, b]`.
pub fn point_segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let u = (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + d * u)).norm()
}

fn directed_hausdorff(from: &[Complex64], to: &[Complex64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &z in from.iter().filter(|z| !is_infinity(**z)) {
        let mut best = f64::INFINITY;
        if to.len() == 1 {
            best = (z - to[0]).norm();
        }
        for w in to.windows(2) {
            if is_infinity(w[0]) || is_infinity(w[1]) {
                continue;
            }
            best = best.min(point_segment_distance(z, w[0], w[1]));
        }
        worst = worst.max(best);
    }
    worst
}

/// Hausdorff distance between two polylines, measured from vertices to segments.
pub fn hausdorff_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}
