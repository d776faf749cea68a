use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use loewner_core::catalog;
use loewner_core::curve::hausdorff_distance;
use loewner_core::energy::{
    chordal_energy, increment_energy, loop_energy, root_sweep, DEFAULT_EPS_SCHEDULE, MONOTONE_SLACK,
};
use loewner_core::maps::{b_of_k, k_of_theta};
use loewner_core::minimizer::{minimize_chord_through_point, minimize_loop, ConstraintSet};
use loewner_core::regularity::{
    attached_driving, estimate_ls, regular_radius, verify_regularity_shift, vertical_bound_check,
};
use loewner_core::tracer::trace_curve;
use loewner_core::zipper::compute_driving;
use loewner_core::{CurveSamples, DrivingFunction};
use num_complex::Complex64;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn slit_oracle() -> Outcome {
    let k = k_of_theta(PI / 4.0).map_err(err)?;
    let dk = (k - 4.0 / 3f64.sqrt()).abs();
    let b0 = b_of_k(0.0).map_err(err)?;
    let db0 = (b0 - Complex64::new(0.0, 2.0)).norm();
    let mut min_mod = f64::INFINITY;
    for i in 0..100 {
        let k = 20.0 * i as f64 / 99.0;
        min_mod = min_mod.min(b_of_k(k).map_err(err)?.norm());
    }
    check(
        dk < 1e-12 && db0 < 1e-12 && min_mod >= 2.0,
        format!("|k(pi/4) - 4/sqrt3| = {dk:.1e}, |B(0) - 2i| = {db0:.1e}, min|B| = {min_mod:.6}"),
    )
}

fn inverse_solver() -> Outcome {
    let theta = PI / 8.0;
    let k = k_of_theta(theta).map_err(err)?;
    let (w, _) = compute_driving(&catalog::tilted_ray(theta, 1.0, 256).map_err(err)?).map_err(err)?;
    let mut worst = 0.0f64;
    for (&t, &x) in w.t().iter().zip(w.w()).skip(1) {
        worst = worst.max(((x / t.sqrt()).abs() - k).abs() / k);
    }
    let y = 2.0;
    let (v, _) = compute_driving(&catalog::vertical_segment(y, 256).map_err(err)?).map_err(err)?;
    let cap_err = (v.total_capacity() - y * y / 4.0).abs() / (y * y / 4.0);
    check(
        worst <= 0.02 && cap_err <= 0.005,
        format!("max |W/sqrt(t)| deviation {:.3}%, vertical capacity error {:.3}%", 100.0 * worst, 100.0 * cap_err),
    )
}

fn spacing(c: &CurveSamples) -> f64 {
    c.points().windows(2).map(|p| (p[1] - p[0]).norm()).fold(0.0, f64::max)
}

fn round_trip() -> Outcome {
    let curves: Vec<(&str, CurveSamples)> = vec![
        ("vertical", catalog::vertical_segment(1.0, 200).map_err(err)?),
        ("tilted", catalog::tilted_ray(0.4, 1.0, 200).map_err(err)?),
        ("arc", catalog::circular_arc(Complex64::new(1.0, 0.0), 1.0, PI, -PI / 2.0, 200).map_err(err)?),
        ("lifted circle", attached_driving(&catalog::tangent_circle(1.0, 1.0, 200, 1.0).map_err(err)?).map_err(err)?.3),
    ];
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for (name, c) in &curves {
        let (w, _) = compute_driving(c).map_err(err)?;
        let tr = trace_curve(&w, (64.0 * c.len() as f64 / w.total_capacity()).ceil() as usize).map_err(err)?;
        let ratio = hausdorff_distance(c.points(), tr.points.points()) / spacing(c);
        worst = worst.max(ratio);
        detail += &format!("{name} {ratio:.3}h, ");
    }
    let w = DrivingFunction::from_fn(|t| 0.3 * t, 1.0, 1024).map_err(err)?;
    let tr = trace_curve(&w, 1024).map_err(err)?;
    let (back, _) = compute_driving(&tr.points).map_err(err)?;
    let mut sup = 0.0f64;
    for (&t, &x) in back.t().iter().zip(back.w()) {
        sup = sup.max((x - 0.3 * t).abs());
    }
    detail += &format!("sup |W - 0.3t| = {sup:.2e}");
    check(worst <= 10.0 && sup <= 1e-2, detail)
}

fn capacity_bounds() -> Outcome {
    let curves = vec![
        ("tangent circle", catalog::tangent_circle(1.0, 1.0, 400, 1.0).map_err(err)?),
        ("tangent circle k=3", catalog::tangent_circle(3.0, 1.5, 400, 1.0).map_err(err)?),
        ("c1beta 0.25", catalog::c1beta(0.25, 1.0, 1.0, 400, 2.0).map_err(err)?),
        ("c1beta 0.75", catalog::c1beta(0.75, 1.0, 1.0, 400, 2.0).map_err(err)?),
        ("straight", catalog::straight_continuation(1.0, 400).map_err(err)?),
    ];
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (name, c) in &curves {
        let (w, marks, _, _) = attached_driving(c).map_err(err)?;
        let s = c.arclength();
        if w.len() != s.len() {
            return Err(format!("{name}: {} capacities for {} samples ({} marks)", w.len(), s.len(), marks.len()));
        }
        let radius = regular_radius(c);
        for (&si, &ti) in s.iter().zip(w.t()).skip(1).take_while(|p| *p.0 <= radius) {
            lo = lo.min(ti / si);
            hi = hi.max(ti / si);
        }
    }
    check(lo >= 0.2 && hi <= 0.5, format!("t/s in [{lo:.4}, {hi:.4}]"))
}

fn corner_divergence() -> Outcome {
    let k: f64 = 2.0;
    let mut worst = 0.0f64;
    for eps in [1e-2f64, 1e-3, 1e-4] {
        let n = 4000;
        let t: Vec<f64> = (0..=n).map(|i| eps * (1.0 / eps).powf(i as f64 / n as f64) - eps).collect();
        let w: Vec<f64> = t.iter().map(|t| k * (t + eps).sqrt()).collect();
        let e = increment_energy(&DrivingFunction::new(t, w).map_err(err)?);
        let expect = k * k / 8.0 * (1.0 / eps).ln();
        worst = worst.max((e - expect).abs() / expect);
    }
    let n = 4000;
    let t: Vec<f64> = (0..=n).map(|i| (i as f64 / n as f64).powi(4)).collect();
    let w: Vec<f64> = t.iter().map(|t| k * t.sqrt()).collect();
    let report = chordal_energy(&DrivingFunction::new(t, w).map_err(err)?).map_err(err)?;
    check(
        worst <= 0.02 && report.diverged,
        format!("max relative error {:.3}%, detector fired: {}", 100.0 * worst, report.diverged),
    )
}

fn circle_energy() -> Outcome {
    let c = catalog::circle(Complex64::new(0.0, 0.0), 1.0, 512).map_err(err)?;
    let r = loop_energy(&c, 0, &DEFAULT_EPS_SCHEDULE).map_err(err)?;
    let p = &r.partial_energies;
    let monotone = p.windows(2).all(|w| w[1] >= w[0] - MONOTONE_SLACK * w[0].abs().max(1e-4));
    check(
        r.extrapolated <= 0.05 && monotone,
        format!(
            "energy {:.3e}, partials {:?}",
            r.extrapolated,
            p.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>()
        ),
    )
}

fn root_invariance() -> Outcome {
    let c = catalog::ellipse(2.0, 1.0, 512).map_err(err)?;
    let roots: Vec<usize> = (0..8).map(|i| i * 64).collect();
    let r = root_sweep(&c, &roots, &DEFAULT_EPS_SCHEDULE).map_err(err)?;
    check(r.relative_spread <= 0.05, format!("mean {:.4}, relative spread {:.3}%", r.mean, 100.0 * r.relative_spread))
}

fn chord_minimizer() -> Outcome {
    let a = minimize_chord_through_point(PI / 3.0, 1.0).map_err(err)?.energy;
    let target = -8.0 * (PI / 3.0).sin().ln();
    let b = minimize_chord_through_point(PI / 2.0, 1.0).map_err(err)?.energy;
    let c = minimize_chord_through_point(PI / 2.0 + 0.1, 1.0).map_err(err)?.energy;
    let ok = (a - target).abs() <= 0.05 * target && b <= 0.01 && (0.04 / 1.5..=1.5 * 0.04).contains(&c);
    check(ok, format!("pi/3: {a:.4} (target {target:.4}), pi/2: {b:.2e}, pi/2+0.1: {c:.4}"))
}

fn loop_minimizer() -> Outcome {
    let rect = ConstraintSet::new(
        vec![Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(2.0, 1.0), Complex64::new(0.0, 1.0)],
        true,
    )
    .map_err(err)?;
    let r = minimize_loop(&rect).map_err(err)?;
    let monotone = r.energy_history.windows(2).all(|w| w[1] <= w[0]);
    let tri =
        ConstraintSet::new(vec![Complex64::new(0.0, 0.0), Complex64::new(3.0, 0.0), Complex64::new(1.0, 2.0)], true)
            .map_err(err)?;
    let t = minimize_loop(&tri).map_err(err)?;
    check(
        r.converged && r.stationarity <= 0.05 && monotone && t.energy <= 0.05,
        format!(
            "rectangle: stationarity {:.2e}, {} sweeps, energies {:?}; triangle energy {:.3e}",
            r.stationarity,
            r.iterations,
            r.energy_history.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>(),
            t.energy
        ),
    )
}

fn regularity_shift() -> Outcome {
    let mut detail = String::new();
    let mut ok = true;
    for beta in [0.25, 0.75] {
        let c = catalog::c1beta(beta, 1.0, 1.0, 2048, 2.0).map_err(err)?;
        let r = verify_regularity_shift(&c, beta).map_err(err)?;
        ok &= r.exponent_error() <= 0.1;
        detail += &format!("beta {beta}: exponent {:.3} vs {:.3}; ", r.fit.exponent, r.predicted_exponent);
        if beta > 0.5 {
            ok &= r.initial_derivative_vanishes(0.05);
            detail += &format!("|W'(0)|/max = {:.3}", r.initial_derivative.abs() / r.max_derivative);
        }
    }
    check(ok, detail)
}

fn derivative_identity() -> Outcome {
    let c = catalog::tangent_circle(1.0, 1.0, 512, 1.0).map_err(err)?;
    let mut worst = 0.0f64;
    for s in [0.2, 0.35, 0.5, 0.65, 0.8] {
        let est = estimate_ls(&c, s).map_err(err)?;
        let ratio = 3.0 * est.L / est.finite_difference;
        worst = worst.max((ratio - 1.0).abs());
    }
    check(worst <= 0.1, format!("max |3 L_s / W' - 1| = {:.3}%", 100.0 * worst))
}

fn bound_check() -> Outcome {
    let a = vertical_bound_check(&catalog::c1beta(0.75, 1.0, 1.0, 1024, 2.0).map_err(err)?).map_err(err)?;
    let b = vertical_bound_check(&catalog::c1beta(0.75, 1.0, 1.0, 2048, 2.0).map_err(err)?).map_err(err)?;
    let change = (b.ratio - a.ratio).abs() / a.ratio.max(b.ratio);
    check(
        a.ratio.is_finite() && b.ratio.is_finite() && change <= 0.1,
        format!("sup ratio {:.4} -> {:.4} ({:.2}% change)", a.ratio, b.ratio, 100.0 * change),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("slit-map oracle", slit_oracle),
        ("inverse solver on rays", inverse_solver),
        ("round trip", round_trip),
        ("capacity bounds", capacity_bounds),
        ("corner divergence", corner_divergence),
        ("circle loop energy", circle_energy),
        ("root invariance", root_invariance),
        ("minimal chord energy", chord_minimizer),
        ("loop minimizer stationarity", loop_minimizer),
        ("regularity shift", regularity_shift),
        ("derivative identity", derivative_identity),
        ("bound check", bound_check),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("[{:>2}] PASS {name} ({secs:.1}s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("[{:>2}] FAIL {name} ({secs:.1}s): {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
