use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Samples of a driving function on a capacity grid `0 = t_0 < t_1 < ... < t_N = T`,
/// interpolated linearly between grid points.
#[derive(Clone, Debug, PartialEq)]
pub struct DrivingFunction {
    t: Vec<f64>,
    w: Vec<f64>,
}

impl DrivingFunction {
    pub fn new(t: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if t.len() != w.len() {
            return Err(Error::input("time and value columns differ in length"));
        }
        if t.len() < 2 {
            return Err(Error::input("a driving function needs at least two samples"));
        }
        if t[0] != 0.0 {
            return Err(Error::input("the capacity grid must start at 0"));
        }
        for (i, (&ti, &wi)) in t.iter().zip(&w).enumerate() {
            if !ti.is_finite() || !wi.is_finite() {
                return Err(Error::input(alloc::format!("non-finite sample at index {i}")));
            }
        }
        if let Some(i) = t.windows(2).position(|p| !(p[1] > p[0])) {
            return Err(Error::input(alloc::format!("capacity grid not increasing at index {}", i + 1)));
        }
        Ok(DrivingFunction { t, w })
    }

    /// Samples `f` on `n` equal cells of `[0, total]`.
    pub fn from_fn(f: impl Fn(f64) -> f64, total: f64, n: usize) -> Result<Self> {
        if !(total > 0.0) || n == 0 {
            return Err(Error::input("need positive capacity and at least one cell"));
        }
        let t: Vec<f64> = (0..=n).map(|i| total * i as f64 / n as f64).collect();
        let w = t.iter().map(|&s| f(s)).collect();
        Self::new(t, w)
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn total_capacity(&self) -> f64 {
        *self.t.last().unwrap()
    }

    /// Largest cell width.
    pub fn resolution(&self) -> f64 {
        self.t.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max)
    }

    /// Index of the cell `[t_i, t_{i+1}]` containing `s` (clamped to the grid).
    pub fn cell_of(&self, s: f64) -> usize {
        let n = self.t.len();
        match self.t.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    pub fn value_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.w[0];
        }
        if s >= self.total_capacity() {
            return *self.w.last().unwrap();
        }
        let i = self.cell_of(s);
        let u = (s - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.w[i] + u * (self.w[i + 1] - self.w[i])
    }

    /// Restriction to `[a, b]`, re-based so the new grid starts at 0. Values are kept.
    pub fn window(&self, a: f64, b: f64) -> Result<DrivingFunction> {
        if !(a >= 0.0 && b > a && b <= self.total_capacity() * (1.0 + 1e-15)) {
            return Err(Error::input("window must satisfy 0 <= a < b <= T"));
        }
        let b = b.min(self.total_capacity());
        let mut t = Vec::new();
        let mut w = Vec::new();
        t.push(0.0);
        w.push(self.value_at(a));
        for (&ti, &wi) in self.t.iter().zip(&self.w) {
            if ti > a && ti < b {
                t.push(ti - a);
                w.push(wi);
            }
        }
        t.push(b - a);
        w.push(self.value_at(b));
        DrivingFunction::new(t, w)
    }

    /// `a · W(t / a²)`, the Brownian rescaling.
    pub fn scaled(&self, a: f64) -> Result<DrivingFunction> {
        if !(a > 0.0) {
            return Err(Error::input("scale must be positive"));
        }
        DrivingFunction::new(self.t.iter().map(|t| a * a * t).collect(), self.w.iter().map(|w| a * w).collect())
    }

    /// Cell slopes `ΔW/Δt` at cell midpoints.
    pub fn derivative(&self) -> (Vec<f64>, Vec<f64>) {
        let mid = self.t.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        let slope = self.t.windows(2).zip(self.w.windows(2)).map(|(t, w)| (w[1] - w[0]) / (t[1] - t[0])).collect();
        (mid, slope)
    }
}
