use std::f64::consts::PI;

use loewner_core::catalog;
use loewner_core::energy::{
    additivity_gap, arc_energy, arc_energy_with, chordal_energy, increment_energy, loop_energy, reversibility_gap,
    root_sweep, DEFAULT_EPS_SCHEDULE,
};
use loewner_core::maps::infinity;
use loewner_core::tracer::{grow_through, slit_steps, trace_curve};
use loewner_core::zipper::ZipperOptions;
use loewner_core::{CurveSamples, DrivingFunction};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn linear_and_zero_driving() {
    let w = DrivingFunction::from_fn(|t| 0.7 * t, 2.0, 50).unwrap();
    let r = chordal_energy(&w).unwrap();
    assert!((r.value - 0.49 * 2.0 / 2.0).abs() < 1e-12);
    assert!(!r.diverged);
    let z = DrivingFunction::from_fn(|_| 0.0, 1.0, 10).unwrap();
    assert_eq!(chordal_energy(&z).unwrap().value, 0.0);
}

#[test]
fn square_root_corner_grows_logarithmically() {
    let k: f64 = 1.2;
    let mut previous = 0.0;
    for eps in [1e-2f64, 1e-3, 1e-4] {
        let n = 3000;
        let t: Vec<f64> = (0..=n).map(|i| eps * (1.0 / eps).powf(i as f64 / n as f64) - eps).collect();
        let w: Vec<f64> = t.iter().map(|t| k * (t + eps).sqrt()).collect();
        let e = increment_energy(&DrivingFunction::new(t, w).unwrap());
        let expect = k * k / 8.0 * (1.0 / eps).ln();
        assert!((e - expect).abs() < 0.02 * expect);
        assert!(e > previous);
        previous = e;
    }
}

#[test]
fn off_grid_additivity_within_one_cell() {
    let w = DrivingFunction::from_fn(|t| (5.0 * t).sin(), 1.0, 40).unwrap();
    let g = additivity_gap(&w, 0.3337).unwrap();
    let cell = w.cell_of(0.3337);
    let (t, v) = (w.t(), w.w());
    let one_cell = 0.5 * (v[cell + 1] - v[cell]).powi(2) / (t[cell + 1] - t[cell]);
    assert!(g.interpolated && g.gap <= one_cell);
}

#[test]
fn circle_loop_energy_vanishes_at_every_root() {
    let circle = catalog::circle(c(1.0, -2.0), 3.0, 512).unwrap();
    let sweep = root_sweep(&circle, &[0, 100, 257, 400], &DEFAULT_EPS_SCHEDULE).unwrap();
    assert!(sweep.energies.iter().all(|&e| e <= 0.05), "{:?}", sweep.energies);
}

#[test]
fn ellipse_root_invariance() {
    let ellipse = catalog::ellipse(2.0, 1.0, 512).unwrap();
    let roots: Vec<usize> = (0..8).map(|i| 64 * i).collect();
    let sweep = root_sweep(&ellipse, &roots, &DEFAULT_EPS_SCHEDULE).unwrap();
    assert!(sweep.relative_spread <= 0.05, "{:?}", sweep);
    let reversed = loop_energy(&ellipse.reversed(), 0, &DEFAULT_EPS_SCHEDULE).unwrap().extrapolated;
    assert!((reversed - sweep.mean).abs() <= 0.05 * sweep.mean);
}

#[test]
fn squared_chord_rooted_at_infinity() {
    // the chord traced by W = 0.5 t, continued from its tip by the hyperbolic geodesic
    let w = DrivingFunction::from_fn(|t| 0.5 * t, 1.0, 256).unwrap();
    let chordal = increment_energy(&w);
    let (slits, _) = slit_steps(&w, 256).unwrap();
    let mut eta = trace_curve(&w, 256).unwrap().points.into_points();
    let mut y = 0.05;
    while y < 300.0 {
        eta.push(grow_through(&slits, c(0.5, y)).unwrap());
        y *= 1.05;
    }
    let mut pts = vec![infinity()];
    let mut x = eta.last().unwrap().norm_sqr();
    while x > 1e-3 {
        pts.push(c(x, 0.0));
        x /= 1.05;
    }
    pts.extend(eta.iter().map(|z| z * z));
    let lp = CurveSamples::closed_loop(pts).unwrap();
    let e = loop_energy(&lp, 0, &DEFAULT_EPS_SCHEDULE).unwrap().extrapolated;
    assert!((e - chordal).abs() <= 0.05 * chordal, "{e} vs {chordal}");
}

#[test]
fn arc_energies_of_lines_and_circles() {
    let seg = catalog::tilted_ray(0.3, 1.0, 200).unwrap();
    assert!(arc_energy(&seg, 0).unwrap().extrapolated <= 0.05);
    let arc = catalog::circular_arc(c(0.0, 0.0), 1.0, 0.3, 2.0, 200).unwrap();
    assert!(arc_energy(&arc, 0).unwrap().extrapolated <= 0.05);
    assert!(arc_energy(&arc, 100).unwrap().extrapolated <= 0.05);
}

#[test]
fn two_arc_concatenation_is_finite_and_stable() {
    let two = catalog::two_arc_concatenation(400).unwrap();
    let r = arc_energy_with(&two, 0, &DEFAULT_EPS_SCHEDULE, &ZipperOptions::default()).unwrap();
    assert!(r.extrapolated.is_finite() && r.extrapolated > 0.0);
    let p = &r.partial_energies;
    for pair in p.windows(2) {
        assert!((pair[1] - pair[0]).abs() <= 0.05 * pair[0]);
    }
}

#[test]
fn reversibility() {
    let v = reversibility_gap(&catalog::vertical_segment(1.0, 100).unwrap(), None).unwrap();
    assert!(v.forward < 1e-6 && v.reverse < 1e-6);
    let w = DrivingFunction::from_fn(|t| 0.5 * t, 1.0, 256).unwrap();
    let traced = trace_curve(&w, 256).unwrap().points;
    assert!(reversibility_gap(&traced, None).unwrap().gap <= 0.05);
    let arc = catalog::circular_arc(c(1.0, 0.0), 1.0, PI, -PI / 2.0, 200).unwrap();
    assert!(reversibility_gap(&arc, None).unwrap().gap <= 0.05);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_scale_invariant(a in 0.1f64..10.0, b in -2.0f64..2.0, f in 0.5f64..5.0) {
        let w = DrivingFunction::from_fn(|t| b * (f * t).sin(), 1.0, 100).unwrap();
        let s = w.scaled(a).unwrap();
        let (e, es) = (increment_energy(&w), increment_energy(&s));
        prop_assert!((e - es).abs() <= 1e-9 * (1.0 + e));
    }

    #[test]
    fn additivity_at_grid_points(split in 1usize..99, b in -2.0f64..2.0) {
        let w = DrivingFunction::from_fn(|t| b * t * t + (3.0 * t).cos(), 1.0, 100).unwrap();
        let g = additivity_gap(&w, w.t()[split]).unwrap();
        prop_assert!(!g.interpolated && g.gap <= 1e-12 * (1.0 + increment_energy(&w)));
    }

    #[test]
    fn energy_is_nonnegative_and_translation_invariant(b in -2.0f64..2.0, shift in -5.0f64..5.0) {
        let w = DrivingFunction::from_fn(|t| b * t.sqrt() * (2.0 * t).cos(), 1.0, 64).unwrap();
        let moved = DrivingFunction::new(w.t().to_vec(), w.w().iter().map(|x| x + shift).collect()).unwrap();
        let e = increment_energy(&w);
        prop_assert!(e >= 0.0);
        prop_assert!((e - increment_energy(&moved)).abs() <= 1e-9 * (1.0 + e));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn loop_energy_is_similarity_invariant(rot in 0.0f64..std::f64::consts::TAU, scale in 0.2f64..5.0, dx in -3.0f64..3.0) {
        let base = catalog::ellipse(1.5, 1.0, 256).unwrap();
        let m = Complex64::from_polar(scale, rot);
        let moved = CurveSamples::closed_loop(base.points().iter().map(|z| m * z + dx).collect()).unwrap();
        let a = loop_energy(&base, 0, &DEFAULT_EPS_SCHEDULE).unwrap().extrapolated;
        let b = loop_energy(&moved, 0, &DEFAULT_EPS_SCHEDULE).unwrap().extrapolated;
        prop_assert!((a - b).abs() <= 0.02 * a, "{} vs {}", a, b);
    }
}
