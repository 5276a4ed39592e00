use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use subconv::analysis::{LimitClass, Verdict};
use subconv::descriptor::{catalog, ScalarModel};
use subconv::folding::{
    apply_corollary_syst, apply_corollary_syst0, check_fold_consistency, check_h5, check_h6,
    fold_planar, iterate_system, FoldConsistency, HypothesisCheck, DEFAULT_ENVELOPE_GRID,
    DEFAULT_SEARCH_HI,
};
use subconv::models::{
    check_lam_condition, competition_threshold, make_generalized_ricker, ricker_fixed_points,
    sigmoid_bh_translated, sigmoid_bh_window, sp3_spec, FixedPoints, LamCondition, SpatialSystem,
};
use subconv::{
    build_report, ConvergenceReport, Model, ModelDescriptor, PlanarSystem, Threshold,
    ThresholdWindow, Tolerances,
};

use crate::args::{AnalyzeArgs, BoundChoice, Format, ModelArgs, RunArgs};
use crate::config::{load_config, parse_sequence, Experiment, SimulationRecord, DEFAULT_STEPS, SCHEMA_VERSION};
use crate::failure::{Failure, Kind, Outcome};

pub const DEFAULT_FOLD_TOL: f64 = 1e-9;

/// Global flags shared by every command.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub json: bool,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub seed: u64,
}

impl Ctx {
    fn emit(&self, text: &str) -> Outcome {
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|e| {
                Failure::config(format!("cannot write {}: {e}", path.display()))
            }),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_either<T: Serialize>(&self, value: &T, human: impl FnOnce() -> String) -> Outcome {
        if self.json {
            self.emit(&(serde_json::to_string_pretty(value)? + "\n"))
        } else {
            self.emit(&human())
        }
    }
}

fn experiment(run: &RunArgs) -> Outcome<Experiment> {
    let mut exp = match &run.config {
        Some(path) => {
            if run.model.model.is_some() {
                return Err(Failure::config("give either --config or --model, not both"));
            }
            load_config(path)?
        }
        None => Experiment {
            model: run.model.descriptor()?,
            initial: None,
            steps: DEFAULT_STEPS,
            format: None,
            bound: None,
            tolerances: None,
            fold_tol: None,
        },
    };
    if let Some(init) = &run.init {
        exp.initial = Some(init.clone());
    }
    if let Some(steps) = run.steps {
        exp.steps = steps;
    }
    if run.format.is_some() {
        exp.format = run.format;
    }
    Ok(exp)
}

fn fixed_len<const N: usize>(init: &[f64], what: &str) -> Outcome<[f64; N]> {
    init.try_into().map_err(|_| {
        Failure::config(format!("{what} needs {N} initial values, got {}", init.len()))
    })
}

fn require_init(exp: &Experiment) -> Outcome<&[f64]> {
    exp.initial
        .as_deref()
        .ok_or_else(|| Failure::config("no initial values; use --init"))
}

pub fn simulate(ctx: &Ctx, run: &RunArgs) -> Outcome {
    let exp = experiment(run)?;
    let init = require_init(&exp)?;
    let format = if ctx.json {
        Format::Json
    } else {
        exp.format.unwrap_or_default()
    };
    let mut record = SimulationRecord {
        schema: SCHEMA_VERSION,
        model: exp.model.clone(),
        initial: init.to_vec(),
        steps: exp.steps,
        x: Vec::new(),
        y: None,
        z: None,
        halt: None,
    };
    let csv = match exp.model.build()? {
        Model::Scalar(m) => {
            let traj = m.equation.iterate(init, exp.steps)?;
            record.x = traj.terms.clone();
            record.halt = traj.halt.clone();
            traj.to_csv()
        }
        Model::Planar(sys) => {
            let [x0, y0] = fixed_len(init, "a planar system")?;
            let orbit = iterate_system(&sys, (x0, y0), exp.steps)?;
            record.x = orbit.xs();
            record.y = Some(orbit.ys());
            record.halt = orbit.halt.clone();
            orbit.to_csv()
        }
        Model::Spatial(sys) => {
            let orbit = sys.iterate(fixed_len(init, "a three-dimensional system")?, exp.steps)?;
            record.x = orbit.xs();
            record.y = Some(orbit.points.iter().map(|p| p[1]).collect());
            record.z = Some(orbit.points.iter().map(|p| p[2]).collect());
            record.halt = orbit.halt.clone();
            orbit.to_csv()
        }
    };
    match format {
        Format::Csv => ctx.emit(&csv)?,
        Format::Json => ctx.emit(&(serde_json::to_string_pretty(&record)? + "\n"))?,
    }
    match record.halt {
        Some(h) => Err(Failure::new(
            Kind::BlowUp,
            anyhow::anyhow!("iteration stopped at n = {}: {} (partial output written)", h.index, h.reason),
        )),
        None => Ok(()),
    }
}

fn scalar_report(
    descriptor: &ModelDescriptor,
    m: &ScalarModel,
    choice: BoundChoice,
    init: &[f64],
    steps: usize,
    tol: &Tolerances,
) -> Outcome<ConvergenceReport> {
    let bound = match choice {
        BoundChoice::Figure => m.bound.as_ref(),
        BoundChoice::Rigorous => m.alternate_bound.as_ref().or(m.bound.as_ref()),
    };
    if let Some(bound) = bound {
        let traj = m.equation.iterate(init, steps)?;
        return Ok(build_report(&m.equation, bound, &traj, tol)?);
    }
    if let Some(t) = &m.translated {
        let moved: Vec<f64> = init.iter().map(|x| x - t.offset).collect();
        let traj = t.equation.iterate(&moved, steps)?;
        return Ok(build_report(&t.equation, &t.bound, &traj, tol)?.with_offset(t.offset));
    }
    if let ModelDescriptor::SigmoidBh(spec) = descriptor {
        sigmoid_bh_translated(spec)?;
    }
    Err(Failure::config(format!(
        "{} has no bounding function to analyze with",
        m.equation.name()
    )))
}

fn established(check: HypothesisCheck) -> Outcome<HypothesisCheck> {
    match check {
        HypothesisCheck::Fails { hypothesis, reason } => Err(Failure::new(
            Kind::Bound,
            anyhow::anyhow!("hypothesis {hypothesis:?} fails: {reason}"),
        )),
        ok => Ok(ok),
    }
}

fn planar_report(
    sys: &PlanarSystem,
    init: &[f64],
    steps: usize,
    tol: &Tolerances,
) -> Outcome<ConvergenceReport> {
    let [x0, y0] = fixed_len(init, "a planar system")?;
    let orbit = iterate_system(sys, (x0, y0), steps)?;
    if sys.h6().is_some() {
        let check = established(check_h6(sys, DEFAULT_ENVELOPE_GRID, DEFAULT_SEARCH_HI)?)?;
        Ok(apply_corollary_syst0(sys, &orbit, &check, tol)?)
    } else {
        let check = established(check_h5(sys, DEFAULT_ENVELOPE_GRID, DEFAULT_SEARCH_HI)?)?;
        Ok(apply_corollary_syst(sys, &orbit, &check, tol)?)
    }
}

fn spatial_report(
    sys: &SpatialSystem,
    init: &[f64],
    steps: usize,
    tol: &Tolerances,
) -> Outcome<ConvergenceReport> {
    let (eq, bound) = sys.folded_with_bound()?;
    let initial = sys.fold_initial(fixed_len(init, "a three-dimensional system")?)?;
    let traj = eq.iterate(&initial, steps.saturating_sub(2))?;
    Ok(build_report(&eq, &bound, &traj, tol)?)
}

fn analyze_one(
    descriptor: &ModelDescriptor,
    model: &Model,
    choice: BoundChoice,
    init: &[f64],
    steps: usize,
    tol: &Tolerances,
) -> Outcome<ConvergenceReport> {
    match model {
        Model::Scalar(m) => scalar_report(descriptor, m, choice, init, steps, tol),
        Model::Planar(sys) => planar_report(sys, init, steps, tol),
        Model::Spatial(sys) => spatial_report(sys, init, steps, tol),
    }
}

fn dimension(model: &Model) -> usize {
    match model {
        Model::Scalar(m) => m.equation.order(),
        Model::Planar(_) => 2,
        Model::Spatial(_) => 3,
    }
}

fn verdict_label(v: &Verdict) -> String {
    match v {
        Verdict::ConvergingToZero => "converging to 0".into(),
        Verdict::ConvergingToFixedPoint { value } => format!("converging to {value}"),
        Verdict::Inconclusive => "inconclusive".into(),
        Verdict::Violated { reason } => format!("VIOLATED ({reason})"),
    }
}

fn describe(report: &ConvergenceReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "equation: {}", report.equation);
    let _ = writeln!(
        s,
        "bound: {} ({:?}), alpha = {} ({:?})",
        report.bound, report.claim, report.threshold.alpha, report.threshold.kind
    );
    let [lo, hi] = report.window.as_pair();
    let _ = writeln!(s, "window: ({lo}, {hi}), stride {}", report.stride);
    match report.crossing_index {
        Some(n) => {
            let _ = writeln!(s, "first crossing: n = {n}");
        }
        None => {
            let _ = writeln!(s, "first crossing: none");
        }
    }
    for p in &report.predictions {
        let _ = writeln!(
            s,
            "prediction: x_{{{} + {}j}} {}; chain {}",
            p.n0,
            p.stride,
            verdict_label(&p.verdict),
            if p.chain_verified { "verified" } else { "broken" }
        );
    }
    if let Some(n) = report.full_convergence_from {
        let _ = writeln!(s, "whole sequence converges from n = {n}");
    }
    for (label, limits) in [("x", &report.limits), ("y", &report.y_limits)] {
        for l in limits {
            let class = match l.limit.class {
                LimitClass::Zero => "0".to_string(),
                LimitClass::FixedPoint(v) => format!("{v}"),
                LimitClass::Inconclusive => "inconclusive".to_string(),
            };
            let _ = writeln!(
                s,
                "{label} class {} (from n = {}): limit {class}, tail mean {}",
                l.residue_class, l.start, l.limit.tail_mean
            );
        }
    }
    s
}

fn violated(report: &ConvergenceReport) -> Option<Failure> {
    report.any_violated().then(|| {
        Failure::new(
            Kind::Violated,
            anyhow::anyhow!("soundness alarm: a prediction was violated in {}", report.equation),
        )
    })
}

#[derive(Debug, Serialize)]
struct BatchEntry {
    index: usize,
    initial: Vec<f64>,
    crossing_index: Option<usize>,
    predictions: usize,
    full_convergence_from: Option<usize>,
    violated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn analyze(ctx: &Ctx, args: &AnalyzeArgs) -> Outcome {
    let exp = experiment(&args.run)?;
    let model = exp.model.build()?;
    let choice = args.bound.or(exp.bound).unwrap_or_default();
    let mut tol = exp.tolerances.unwrap_or_default();
    if let Some(z) = ctx.tol {
        tol.zero = z;
    }
    let Some(count) = args.batch else {
        let report = analyze_one(&exp.model, &model, choice, require_init(&exp)?, exp.steps, &tol)?;
        ctx.emit_either(&report, || describe(&report))?;
        return violated(&report).map_or(Ok(()), Err);
    };

    if args.init_max.is_nan() || args.init_max <= 0.0 {
        return Err(Failure::config("--init-max must be positive"));
    }
    let dim = dimension(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let initials: Vec<Vec<f64>> = (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.0..args.init_max)).collect())
        .collect();
    let results: Vec<(usize, Outcome<ConvergenceReport>)> = initials
        .par_iter()
        .enumerate()
        .map(|(i, init)| (i, analyze_one(&exp.model, &model, choice, init, exp.steps, &tol)))
        .collect();
    let mut entries = Vec::with_capacity(count);
    for (i, result) in results {
        let initial = initials[i].clone();
        let entry = match result {
            Ok(r) => BatchEntry {
                index: i,
                initial,
                crossing_index: r.crossing_index,
                predictions: r.predictions.len(),
                full_convergence_from: r.full_convergence_from,
                violated: r.any_violated(),
                error: None,
            },
            Err(f) if f.kind == Kind::BlowUp => BatchEntry {
                index: i,
                initial,
                crossing_index: None,
                predictions: 0,
                full_convergence_from: None,
                violated: false,
                error: Some(f.error.to_string()),
            },
            Err(f) => return Err(f),
        };
        entries.push(entry);
    }
    ctx.emit_either(&entries, || {
        let mut s = String::new();
        for e in &entries {
            let _ = writeln!(
                s,
                "#{:<4} init {:?}: crossing {:?}, {} prediction(s){}{}",
                e.index,
                e.initial,
                e.crossing_index,
                e.predictions,
                if e.violated { ", VIOLATED" } else { "" },
                e.error.as_deref().map(|m| format!(", stopped: {m}")).unwrap_or_default()
            );
        }
        s
    })?;
    let bad = entries.iter().filter(|e| e.violated).count();
    if bad > 0 {
        return Err(Failure::new(
            Kind::Violated,
            anyhow::anyhow!("soundness alarm: {bad} of {count} runs had a violated prediction"),
        ));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ThresholdReport {
    model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    condition: Option<LamCondition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fixed_points: Option<FixedPoints>,
    threshold: Threshold,
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<ThresholdWindow>,
}

fn ricker_threshold(
    model: &str,
    lambda: f64,
    a: f64,
    b: f64,
    threshold: Threshold,
) -> Outcome<ThresholdReport> {
    Ok(ThresholdReport {
        model: model.into(),
        condition: Some(check_lam_condition(lambda, a, b)?),
        fixed_points: Some(ricker_fixed_points(lambda, a, b)?),
        threshold,
        window: None,
    })
}

fn flag_sequence(raw: &Option<String>, flag: &str) -> Outcome<subconv::ParameterSequence> {
    let raw = raw
        .as_deref()
        .ok_or_else(|| Failure::config(format!("threshold needs --{flag}")))?;
    parse_sequence(flag, raw)
}

fn threshold_report(flags: &ModelArgs) -> Outcome<ThresholdReport> {
    let name = flags.name()?;
    match name {
        "ricker" | "sp3" => {
            let spec = if name == "sp3" {
                sp3_spec(flags.k.unwrap_or(3))?
            } else {
                flags.ricker_spec()?
            };
            let (_, bound) = make_generalized_ricker(&spec)?;
            ricker_threshold(name, spec.lambda, spec.a_sup(), spec.b_inf(), bound.threshold())
        }
        "competition" | "competition-swapped" => {
            let delta1 = flags
                .delta1
                .ok_or_else(|| Failure::config("threshold needs --delta1"))?;
            let r1 = flag_sequence(&flags.r1, "r1")?.sup();
            let a1 = flag_sequence(&flags.a1, "a1")?.inf();
            Ok(ThresholdReport {
                model: name.into(),
                condition: None,
                fixed_points: None,
                threshold: competition_threshold(r1, a1, delta1)?,
                window: None,
            })
        }
        "adult-juvenile" => {
            let Model::Planar(sys) = flags.descriptor()?.build()? else {
                unreachable!("adult-juvenile is planar")
            };
            let check = established(check_h5(&sys, DEFAULT_ENVELOPE_GRID, DEFAULT_SEARCH_HI)?)?;
            let lambda = flags.lambda.unwrap_or_default();
            let a = flag_sequence(&flags.r, "r")?.sup() + flag_sequence(&flags.s, "s")?.sup().ln();
            ricker_threshold(name, lambda, a, 1.0, check.threshold().expect("established"))
        }
        "sigmoid-bh" => {
            let ModelDescriptor::SigmoidBh(spec) = flags.descriptor()? else {
                unreachable!("sigmoid-bh descriptor")
            };
            spec.validate()?;
            let window = sigmoid_bh_window(spec.a.sup(), spec.p.value(), spec.b)?;
            let alpha = spec.a.sup().powf(-1.0 / (spec.p.value() - 1.0));
            Ok(ThresholdReport {
                model: name.into(),
                condition: None,
                fixed_points: None,
                threshold: Threshold::crossing(alpha),
                window: Some(window),
            })
        }
        "threed" => {
            let Model::Spatial(sys) = flags.descriptor()?.build()? else {
                unreachable!("threed is spatial")
            };
            let spec = sys.as_ricker_spec()?;
            let (_, bound) = sys.folded_with_bound()?;
            ricker_threshold(name, spec.lambda, spec.a_sup(), spec.b_inf(), bound.threshold())
        }
        other => Err(Failure::config(format!("unknown model {other:?}"))),
    }
}

fn describe_threshold(t: &ThresholdReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model: {}", t.model);
    if let Some(c) = &t.condition {
        let verdict = if c.equality {
            "holds with equality"
        } else if c.holds {
            "holds"
        } else {
            "fails"
        };
        let _ = writeln!(s, "existence condition: {verdict} (right-hand side {})", c.rhs);
    }
    match t.fixed_points {
        Some(FixedPoints::Pair { u_star, u_bar }) => {
            let _ = writeln!(s, "u* = {u_star}\nu_bar = {u_bar}");
        }
        Some(FixedPoints::Tangent { u }) => {
            let _ = writeln!(s, "tangent fixed point at u = {u}");
        }
        Some(FixedPoints::None) => {
            let _ = writeln!(s, "no positive fixed point");
        }
        None => {}
    }
    let _ = writeln!(s, "alpha = {} ({:?})", t.threshold.alpha, t.threshold.kind);
    if let Some(w) = &t.window {
        let _ = writeln!(s, "window = ({}, {})", w.lo, w.hi);
    }
    s
}

pub fn threshold(ctx: &Ctx, flags: &ModelArgs) -> Outcome {
    let report = threshold_report(flags)?;
    ctx.emit_either(&report, || describe_threshold(&report))
}

#[derive(Debug, Serialize)]
struct FoldOutput {
    descriptor: Option<ModelDescriptor>,
    order: usize,
    dominant_lag: usize,
    consistency: FoldConsistency,
}

pub fn fold(ctx: &Ctx, run: &RunArgs) -> Outcome {
    let exp = experiment(run)?;
    let tol = ctx.tol.or(exp.fold_tol).unwrap_or(DEFAULT_FOLD_TOL);
    let steps = exp.steps;
    let out = match exp.model.build()? {
        Model::Planar(sys) => {
            let eq = fold_planar(&sys)?;
            let [x0, y0] = match &exp.initial {
                Some(init) => fixed_len(init, "a planar system")?,
                None => [1.0, 1.0],
            };
            FoldOutput {
                descriptor: eq.descriptor().cloned(),
                order: eq.order(),
                dominant_lag: eq.dominant_lag(),
                consistency: check_fold_consistency(&sys, (x0, y0), steps, tol)?,
            }
        }
        Model::Spatial(sys) => {
            let eq = sys.folded()?;
            let init = match &exp.initial {
                Some(init) => fixed_len(init, "a three-dimensional system")?,
                None => [1.0; 3],
            };
            FoldOutput {
                descriptor: eq.descriptor().cloned(),
                order: eq.order(),
                dominant_lag: eq.dominant_lag(),
                consistency: sys.check_fold_consistency(init, steps, tol)?,
            }
        }
        Model::Scalar(_) => {
            return Err(Failure::config(
                "fold needs a planar or three-dimensional system",
            ))
        }
    };
    ctx.emit_either(&out, || {
        let c = &out.consistency;
        let mut s = String::new();
        if let Some(d) = &out.descriptor {
            let _ = writeln!(s, "folded: {}", serde_json::to_string(d).unwrap_or_default());
        }
        let _ = writeln!(s, "order {}, dominant lag {}", out.order, out.dominant_lag);
        let _ = writeln!(
            s,
            "consistency: {} over {} terms, max relative deviation {:e}; y recovered at {} indices ({} skipped), max deviation {:e}",
            if c.passed { "pass" } else { "FAIL" },
            c.compared,
            c.max_rel_deviation,
            c.y_checked,
            c.y_skipped,
            c.y_max_rel_deviation
        );
        s
    })?;
    let c = &out.consistency;
    if c.passed {
        Ok(())
    } else {
        Err(Failure::new(
            Kind::Fold,
            anyhow::anyhow!(
                "fold consistency failed: max relative deviation {:e}, first divergent index {:?}",
                c.max_rel_deviation.max(c.y_max_rel_deviation),
                c.first_divergent_index
            ),
        ))
    }
}

pub fn models(ctx: &Ctx) -> Outcome {
    let entries = catalog();
    ctx.emit_either(&entries, || {
        let width = entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
        entries
            .iter()
            .map(|e| format!("{:<width$}  {:<8} {}\n", e.name, e.kind, e.summary))
            .collect()
    })
}
