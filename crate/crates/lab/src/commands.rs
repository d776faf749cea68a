use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use loewner_core::catalog;
use loewner_core::energy::{arc_energy_with, chordal_energy, dyadic_tail_energies, loop_energy};
use loewner_core::minimizer::{
    chord_energy_bound, minimize_chord_through_point_with, minimize_loop_with, ChordOptions, ConstraintSet,
    LoopOptions, MinimizerResult,
};
use loewner_core::regularity::{attached_driving, verify_regularity_shift, vertical_bound_check, FittedQuantity};
use loewner_core::tracer::trace_curve;
use loewner_core::zipper::{compute_driving, ZipperOptions};
use loewner_core::{CurveSamples, DrivingFunction};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, ScheduleSource};
use crate::error::{LabError, Result, EXIT_CONVERGENCE, EXIT_OK};
use crate::formats::{
    load, parse_curve, parse_driving, parse_input, write_csv, write_json, CurveFile, CurveKind, DrivingFile, Energy,
    Input, Loaded, Point, FORMAT_VERSION,
};

/// Files written by a command and the exit code it asks for.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub code: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub name: String,
    pub hash: String,
}

/// Envelope shared by every JSON report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub command: String,
    pub format_version: u32,
    pub config: RunConfig,
    pub eps_schedule_source: ScheduleSource,
    pub inputs: Vec<InputRecord>,
    pub result: T,
}

pub struct Context {
    pub config: RunConfig,
    pub schedule_source: ScheduleSource,
}

impl Context {
    fn out(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    fn prepare(&self) -> Result<()> {
        let dir = &self.config.output_dir;
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))
    }

    pub(crate) fn report<T: Serialize>(&self, command: &str, inputs: &[&Loaded], result: T) -> Report<T> {
        Report {
            command: command.to_string(),
            format_version: FORMAT_VERSION,
            config: self.config.clone(),
            eps_schedule_source: self.schedule_source,
            inputs: inputs.iter().map(|l| InputRecord { name: l.name.clone(), hash: l.hash.clone() }).collect(),
            result,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub samples: usize,
    pub total_capacity: f64,
    pub simple: bool,
}

pub fn trace(ctx: &Context, input: &Path) -> Result<Outcome> {
    let file = load(input)?;
    let w = parse_driving(&file)?.driving()?;
    let tr = trace_curve(&w, ctx.config.steps_per_unit)?;
    ctx.prepare()?;
    let curve_path = ctx.out("curve.json");
    let csv_path = ctx.out("trace.csv");
    let report_path = ctx.out("report.json");
    write_json(&curve_path, &CurveFile::new(CurveKind::Chord, &tr.points))?;
    write_csv(
        &csv_path,
        &["t", "re", "im"],
        tr.t_of_point.iter().zip(tr.points.points()).map(|(&t, z)| (t, z.re, z.im)),
    )?;
    let result =
        TraceResult { samples: tr.points.len(), total_capacity: w.total_capacity(), simple: tr.points.is_simple() };
    write_json(&report_path, &ctx.report("trace", &[&file], result))?;
    Ok(Outcome { files: vec![curve_path, csv_path, report_path], code: EXIT_OK })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveResult {
    pub kind: CurveKind,
    pub samples: usize,
    pub total_capacity: f64,
    pub max_abs_w: f64,
    /// Round trip of the unzipping maps at seeded random points of the half-plane.
    pub round_trip_error: Option<f64>,
    pub probes: usize,
}

const PROBES: usize = 64;

fn driving_of(kind: CurveKind, curve: &CurveSamples, seed: u64) -> Result<(DrivingFunction, Option<f64>)> {
    match kind {
        CurveKind::Chord => {
            let (w, cap) = compute_driving(curve)?;
            let scale = w.total_capacity().sqrt().max(1e-12);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let probes: Vec<Complex64> = (0..PROBES)
                .map(|_| Complex64::new(rng.gen_range(-2.0..2.0) * scale, rng.gen_range(0.1..2.0) * scale))
                .collect();
            let err = cap.maps.round_trip_error(&probes)?;
            Ok((w, Some(err)))
        }
        CurveKind::Tangential => Ok((attached_driving(curve)?.0, None)),
        other => Err(LabError::input(format!(
            "driving functions need a chord-in-H or tangential-to-R+ curve, got {}",
            serde_json::to_string(&other).unwrap_or_default()
        ))),
    }
}

pub fn drive(ctx: &Context, input: &Path) -> Result<Outcome> {
    let file = load(input)?;
    let cf = parse_curve(&file)?;
    let curve = cf.samples()?;
    let (w, err) = driving_of(cf.kind, &curve, ctx.config.seed)?;
    ctx.prepare()?;
    let csv_path = ctx.out("driving.csv");
    let json_path = ctx.out("driving.json");
    let report_path = ctx.out("report.json");
    write_csv(&csv_path, &["t", "W"], w.t().iter().zip(w.w()))?;
    write_json(&json_path, &DrivingFile::new(&w))?;
    let result = DriveResult {
        kind: cf.kind,
        samples: w.len(),
        total_capacity: w.total_capacity(),
        max_abs_w: w.w().iter().fold(0.0, |m, v| m.max(v.abs())),
        round_trip_error: err,
        probes: if err.is_some() { PROBES } else { 0 },
    };
    write_json(&report_path, &ctx.report("drive", &[&file], result))?;
    Ok(Outcome { files: vec![csv_path, json_path, report_path], code: EXIT_OK })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyResult {
    pub energy: Energy,
    pub grid_value: f64,
    pub diverged: bool,
    pub divergence_rate: Option<f64>,
    pub grid_resolution: f64,
    pub total_capacity: f64,
    /// Energy of `[2^{-k-1} T, 2^{-k} T]` for `k = 0, 1, ...`.
    pub dyadic_tail_energies: Vec<f64>,
}

pub fn energy(ctx: &Context, input: &Path) -> Result<Outcome> {
    let file = load(input)?;
    let w = match parse_input(&file)? {
        Input::Driving(d) => d.driving()?,
        Input::Curve(c) => driving_of(c.kind, &c.samples()?, ctx.config.seed)?.0,
    };
    let r = chordal_energy(&w)?;
    ctx.prepare()?;
    let csv_path = ctx.out("energy.csv");
    let report_path = ctx.out("report.json");
    let (t, v) = (w.t(), w.w());
    let mut acc = 0.0;
    let mut rows = vec![(t[0], 0.0)];
    for i in 1..t.len() {
        acc += 0.5 * (v[i] - v[i - 1]).powi(2) / (t[i] - t[i - 1]);
        rows.push((t[i], acc));
    }
    write_csv(&csv_path, &["t", "cumulative_energy"], rows)?;
    let result = EnergyResult {
        energy: Energy(r.value),
        grid_value: r.grid_value,
        diverged: r.diverged,
        divergence_rate: r.divergence_rate,
        grid_resolution: r.grid_resolution,
        total_capacity: w.total_capacity(),
        dyadic_tail_energies: dyadic_tail_energies(&w),
    };
    write_json(&report_path, &ctx.report("energy", &[&file], result))?;
    Ok(Outcome { files: vec![csv_path, report_path], code: EXIT_OK })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopEnergyResult {
    pub root_index: usize,
    pub energy: Energy,
    pub eps_schedule: Vec<f64>,
    pub partial_energies: Vec<f64>,
    pub tail_estimate: f64,
    pub unzipped_samples: usize,
}

fn rooted_energy(ctx: &Context, input: &Path, root: usize, closed: bool) -> Result<Outcome> {
    let file = load(input)?;
    let cf = parse_curve(&file)?;
    let (want, command) = if closed { (CurveKind::Loop, "loop-energy") } else { (CurveKind::Arc, "arc-energy") };
    if cf.kind != want {
        return Err(LabError::input(format!("{command} needs a curve of kind {}", serde_json::to_string(&want)?)));
    }
    let curve = cf.samples()?;
    let eps = &ctx.config.eps_schedule;
    let r = if closed {
        loop_energy(&curve, root, eps)?
    } else {
        arc_energy_with(&curve, root, eps, &ZipperOptions::default())?
    };
    ctx.prepare()?;
    let csv_path = ctx.out("partials.csv");
    let report_path = ctx.out("report.json");
    write_csv(&csv_path, &["eps", "partial_energy"], r.eps_schedule.iter().zip(&r.partial_energies))?;
    let result = LoopEnergyResult {
        root_index: r.root_index,
        energy: Energy(r.extrapolated),
        eps_schedule: r.eps_schedule.clone(),
        partial_energies: r.partial_energies.clone(),
        tail_estimate: r.tail_estimate,
        unzipped_samples: r.unzipped_samples,
    };
    write_json(&report_path, &ctx.report(command, &[&file], result))?;
    Ok(Outcome { files: vec![csv_path, report_path], code: EXIT_OK })
}

pub fn loop_energy_cmd(ctx: &Context, input: &Path, root: usize) -> Result<Outcome> {
    rooted_energy(ctx, input, root, true)
}

pub fn arc_energy_cmd(ctx: &Context, input: &Path, root: usize) -> Result<Outcome> {
    rooted_energy(ctx, input, root, false)
}

/// Input of `minimize`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Problem {
    /// Chord from 0 to ∞ in the upper half-plane through `r e^{iφ}`.
    Chord { version: u32, phi: f64, r: f64 },
    /// Jordan curve through the points, in their order.
    Loop {
        version: u32,
        points: Vec<Point>,
        #[serde(default)]
        initial_curve: Option<Vec<Point>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub energy: Energy,
    /// Closed-form minimum, when one is known.
    pub exact_minimum: Option<f64>,
    pub iterations: usize,
    pub stationarity: f64,
    pub converged: bool,
    pub energy_history: Vec<f64>,
    pub rejected_steps: usize,
    pub constraint_indices: Vec<usize>,
}

pub fn minimize(ctx: &Context, input: &Path) -> Result<Outcome> {
    let file = load(input)?;
    let problem: Problem =
        serde_json::from_slice(&file.bytes).map_err(|e| LabError::input(format!("{}: {e}", file.name)))?;
    let (res, kind, exact): (MinimizerResult, CurveKind, Option<f64>) = match &problem {
        Problem::Chord { version, phi, r } => {
            check_version(*version)?;
            let mut opts = ChordOptions::default();
            if let Some(t) = ctx.config.tolerance {
                opts.tolerance = t;
            }
            (minimize_chord_through_point_with(*phi, *r, &opts)?, CurveKind::Chord, Some(chord_energy_bound(*phi)))
        }
        Problem::Loop { version, points, initial_curve } => {
            check_version(*version)?;
            let mut cs = ConstraintSet::new(points.iter().map(|p| p.0).collect(), true)?;
            if let Some(init) = initial_curve {
                cs = cs.with_initial_curve(CurveSamples::closed_loop(init.iter().map(|p| p.0).collect())?);
            }
            let mut opts = LoopOptions { eps_schedule: ctx.config.eps_schedule.clone(), ..LoopOptions::default() };
            if let Some(t) = ctx.config.tolerance {
                opts.tolerance = t;
            }
            let exact = (points.len() <= 3).then_some(0.0);
            (minimize_loop_with(&cs, &opts)?, CurveKind::Loop, exact)
        }
    };
    ctx.prepare()?;
    let curve_path = ctx.out("curve.json");
    let csv_path = ctx.out("history.csv");
    let report_path = ctx.out("report.json");
    write_json(&curve_path, &CurveFile::new(kind, &res.curve))?;
    write_csv(&csv_path, &["iteration", "energy"], res.energy_history.iter().enumerate())?;
    let converged = res.converged;
    let result = MinimizeResult {
        energy: Energy(res.energy),
        exact_minimum: exact,
        iterations: res.iterations,
        stationarity: res.stationarity,
        converged,
        energy_history: res.energy_history,
        rejected_steps: res.rejected_steps,
        constraint_indices: res.constraint_indices,
    };
    write_json(&report_path, &ctx.report("minimize", &[&file], result))?;
    Ok(Outcome {
        files: vec![curve_path, csv_path, report_path],
        code: if converged { EXIT_OK } else { EXIT_CONVERGENCE },
    })
}

fn check_version(v: u32) -> Result<()> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(LabError::input(format!("unsupported format version {v}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityResult {
    pub beta: f64,
    /// `"driving"` for `β ≤ 1/2`, otherwise `"derivative"`.
    pub quantity: String,
    pub predicted_exponent: f64,
    pub exponent: f64,
    pub constant: f64,
    pub log_correction: bool,
    pub fit_residual: f64,
    pub delta_range: (f64, f64),
    pub exponent_error: f64,
    pub initial_derivative: f64,
    pub max_derivative: f64,
    pub bound_ratio: f64,
    pub bound_t_at_max: f64,
    pub bound_evaluated: usize,
    pub bound_excluded: usize,
}

pub fn regularity(ctx: &Context, input: &Path, beta: Option<f64>) -> Result<Outcome> {
    let file = load(input)?;
    let cf = parse_curve(&file)?;
    if cf.kind != CurveKind::Tangential {
        return Err(LabError::input("regularity needs a tangential-to-R+ curve"));
    }
    let beta = beta.or(cf.beta).ok_or_else(|| LabError::input("no beta given and none recorded in the curve file"))?;
    let curve = cf.samples()?;
    let r = verify_regularity_shift(&curve, beta)?;
    let b = vertical_bound_check(&curve)?;
    ctx.prepare()?;
    let csv_path = ctx.out("modulus.csv");
    let report_path = ctx.out("report.json");
    write_csv(&csv_path, &["delta", "omega"], r.scales.iter())?;
    let result = RegularityResult {
        beta,
        quantity: match r.quantity {
            FittedQuantity::Driving => "driving",
            FittedQuantity::Derivative => "derivative",
        }
        .to_string(),
        predicted_exponent: r.predicted_exponent,
        exponent: r.fit.exponent,
        constant: r.fit.constant,
        log_correction: r.fit.log_correction,
        fit_residual: r.fit.residual,
        delta_range: r.fit.delta_range,
        exponent_error: r.exponent_error(),
        initial_derivative: r.initial_derivative,
        max_derivative: r.max_derivative,
        bound_ratio: b.ratio,
        bound_t_at_max: b.t_at_max,
        bound_evaluated: b.evaluated,
        bound_excluded: b.excluded,
    };
    write_json(&report_path, &ctx.report("regularity", &[&file], result))?;
    Ok(Outcome { files: vec![csv_path, report_path], code: EXIT_OK })
}

/// Parses a number, optionally written as a multiple or fraction of `pi` (`pi/8`, `2pi/3`, `0.5*pi`).
pub fn parse_value(text: &str) -> Option<f64> {
    let s = text.trim();
    if let Ok(x) = s.parse::<f64>() {
        return x.is_finite().then_some(x);
    }
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let (neg, num) = match num.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, num),
    };
    let coef = num.strip_suffix("pi")?.trim_end_matches('*').trim();
    let c = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().ok()? };
    let v = if neg { -c } else { c } * PI / den;
    (v.is_finite() && den != 0.0).then_some(v)
}

struct Params<'a> {
    pairs: Vec<(&'a str, f64)>,
    used: Vec<bool>,
}

impl<'a> Params<'a> {
    fn parse(raw: &'a [String]) -> Result<Self> {
        let mut pairs = Vec::new();
        for p in raw {
            let (k, v) =
                p.split_once('=').ok_or_else(|| LabError::input(format!("parameter {p:?} is not key=value")))?;
            let x = parse_value(v).ok_or_else(|| LabError::input(format!("parameter {k}: cannot parse {v:?}")))?;
            pairs.push((k.trim(), x));
        }
        let used = vec![false; pairs.len()];
        Ok(Params { pairs, used })
    }

    fn get(&mut self, key: &str, default: f64) -> f64 {
        for (i, (k, v)) in self.pairs.iter().enumerate() {
            if *k == key {
                self.used[i] = true;
                return *v;
            }
        }
        default
    }

    fn finish(&self) -> Result<()> {
        match self.used.iter().position(|u| !u) {
            Some(i) => Err(LabError::input(format!("unknown parameter {:?}", self.pairs[i].0))),
            None => Ok(()),
        }
    }
}

pub const CATALOG: [&str; 9] =
    ["vertical", "ray", "circle", "ellipse", "arc", "two-arcs", "tangent-circle", "c1beta", "straight"];

/// Builds one of the analytic test curves.
pub fn catalog_curve(name: &str, raw: &[String], n: usize) -> Result<CurveFile> {
    let mut p = Params::parse(raw)?;
    let mut beta = None;
    let (kind, curve) = match name {
        "vertical" => (CurveKind::Chord, catalog::vertical_segment(p.get("height", 1.0), n)?),
        "ray" => (CurveKind::Chord, catalog::tilted_ray(p.get("theta", PI / 8.0), p.get("length", 1.0), n)?),
        "circle" => {
            let c = Complex64::new(p.get("cx", 0.0), p.get("cy", 0.0));
            (CurveKind::Loop, catalog::circle(c, p.get("radius", 1.0), n)?)
        }
        "ellipse" => (CurveKind::Loop, catalog::ellipse(p.get("a", 2.0), p.get("b", 1.0), n)?),
        "arc" => {
            let c = Complex64::new(p.get("cx", 0.0), p.get("cy", 0.0));
            let (r, start, sweep) = (p.get("radius", 1.0), p.get("start", 0.0), p.get("sweep", PI));
            (CurveKind::Arc, catalog::circular_arc(c, r, start, sweep, n)?)
        }
        "two-arcs" => (CurveKind::Chord, catalog::two_arc_concatenation(n)?),
        "tangent-circle" => {
            let (k, l, g) = (p.get("kappa", 1.0), p.get("length", 1.0), p.get("grading", 1.0));
            (CurveKind::Tangential, catalog::tangent_circle(k, l, n, g)?)
        }
        "c1beta" => {
            let b = p.get("beta", 0.75);
            beta = Some(b);
            let (a, l, g) = (p.get("a", 0.5), p.get("length", 1.0), p.get("grading", 2.0));
            (CurveKind::Tangential, catalog::c1beta(b, a, l, n, g)?)
        }
        "straight" => (CurveKind::Tangential, catalog::straight_continuation(p.get("length", 1.0), n)?),
        other => {
            return Err(LabError::input(format!("unknown catalog curve {other:?}; known: {}", CATALOG.join(", "))))
        }
    };
    p.finish()?;
    let mut file = CurveFile::new(kind, &curve);
    file.beta = beta;
    Ok(file)
}

pub fn catalog_cmd(ctx: &Context, name: &str, params: &[String], n: usize) -> Result<Outcome> {
    let file = catalog_curve(name, params, n)?;
    ctx.prepare()?;
    let path = ctx.out(&format!("{name}.json"));
    write_json(&path, &file)?;
    Ok(Outcome { files: vec![path], code: EXIT_OK })
}
