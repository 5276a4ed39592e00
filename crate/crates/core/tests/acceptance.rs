//! Acceptance suite: one pass/fail line per criterion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subconv::analysis::{
    build_report, detect_crossing, verify_monotone_to_zero, MonotoneVerdict, Tolerances, Verdict,
};
use subconv::criteria::{check_inequality_chain, ThresholdWindow};
use subconv::folding::{
    apply_corollary_syst, apply_corollary_syst0, check_fold_consistency, check_h5, check_h6,
    iterate_system, DEFAULT_ENVELOPE_GRID, DEFAULT_SEARCH_HI,
};
use subconv::models::{
    check_lam_condition, competition_threshold, make_adult_juvenile, make_competition,
    make_generalized_ricker, make_sigmoid_bh, make_sp3, ricker_fixed_points,
    sigmoid_bh_translated, sigmoid_bh_window, AdultJuvenileParams, CompetitionParams,
    FixedPoints, RationalExponent, RickerFamilySpec, SigmoidBHSpec, SpatialSystem, ThreeDParams,
};
use subconv::{ConvergenceReport, ParameterSequence, Threshold};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn strictly_decreasing(xs: &[f64]) -> Option<usize> {
    (1..xs.len()).find(|&j| xs[j].partial_cmp(&xs[j - 1]) != Some(std::cmp::Ordering::Less))
}

fn no_violations(report: &ConvergenceReport) -> Result<(), String> {
    ensure(!report.any_violated(), || {
        format!("violated prediction in {}", report.equation)
    })
}

fn sp3_lag1() -> Outcome {
    let m = make_sp3(1).map_err(err)?;
    let traj = m.equation.iterate(&[1.0; 3], 214).map_err(err)?;
    let window = m.figure_bound.window();
    let n0 = detect_crossing(&traj.terms, &window, 0).ok_or("no crossing")?;
    ensure(n0 == 14, || format!("crossing at {n0}, expected 14"))?;
    let tail = &traj.terms[n0..];
    let positive: Vec<f64> = tail.iter().copied().take_while(|&x| x > 0.0).collect();
    if let Some(j) = strictly_decreasing(&positive) {
        return Err(format!("x_{} >= x_{}", n0 + j, n0 + j - 1));
    }
    ensure(tail.iter().skip(positive.len()).all(|&x| x == 0.0), || {
        "nonzero term after reaching 0".into()
    })?;
    let below = traj.terms.iter().skip(n0).position(|&x| x < 1e-10).ok_or("never below 1e-10")?;
    ensure(below <= 200, || format!("below 1e-10 only after {below} steps"))?;
    Ok(format!(
        "crossing at n = {n0} of (0, {:.6}); x_n < 1e-10 from n = {}",
        window.hi,
        n0 + below
    ))
}

fn sp3_lag2() -> Outcome {
    let m = make_sp3(2).map_err(err)?;
    let traj = m.equation.iterate(&[1.0; 3], 97).map_err(err)?;
    let window = m.figure_bound.window();
    let n0 = detect_crossing(&traj.terms, &window, 0).ok_or("no crossing")?;
    ensure(n0 == 25, || format!("crossing at {n0}, expected 25"))?;
    let h = m.figure_bound.symmetrized();
    let chain = check_inequality_chain(&traj.terms, n0, 2, |u| h(u));
    ensure(chain.holds(), || format!("chain: {chain:?}"))?;
    let sub: Vec<f64> = traj.terms[n0..].iter().step_by(2).copied().take_while(|&x| x > 0.0).collect();
    if let Some(j) = strictly_decreasing(&sub) {
        return Err(format!("subsequence not decreasing at j = {j}"));
    }
    Ok(format!("crossing at n = {n0} of (0, {:.6}); chain holds", window.hi))
}

fn sp3_lag3() -> Outcome {
    let m = make_sp3(3).map_err(err)?;
    let traj = m.equation.iterate(&[1.0; 3], 398).map_err(err)?;
    let bound = &m.figure_bound;
    let window = bound.window();
    ensure((window.hi - 0.05494).abs() < 1e-4, || format!("alpha = {}", window.hi))?;
    let first = detect_crossing(&traj.terms, &window, 0).ok_or("no crossing")?;
    ensure(first.abs_diff(132) <= 5, || format!("first crossing at {first}"))?;
    let second = (first..traj.terms.len())
        .find(|&n| n % 3 != first % 3 && window.contains_strict(traj.terms[n]))
        .ok_or("no second class")?;
    ensure(second.abs_diff(166) <= 5, || format!("second crossing at {second}"))?;
    let h = bound.symmetrized();
    for n0 in [first, second] {
        let chain = check_inequality_chain(&traj.terms, n0, 3, |u| h(u));
        ensure(chain.holds(), || format!("chain from {n0}: {chain:?}"))?;
        let sub: Vec<f64> = traj.terms[n0..].iter().step_by(3).copied().collect();
        ensure(
            matches!(verify_monotone_to_zero(&sub, 1e-8), MonotoneVerdict::Verified),
            || format!("class of {n0} not verified decreasing below 1e-8"),
        )?;
        let last = traj.terms.iter().enumerate().rev().find(|(n, _)| n % 3 == n0 % 3).unwrap();
        ensure(*last.1 < 1e-8, || format!("x_{} = {}", last.0, last.1))?;
    }
    let report = build_report(&m.equation, bound, &traj, &Tolerances::default()).map_err(err)?;
    no_violations(&report)?;
    let third = (0..3).find(|r| *r != first % 3 && *r != second % 3).unwrap();
    let lim = report
        .limits
        .iter()
        .find(|l| l.residue_class == third)
        .ok_or("no limit for third class")?;
    let u_bar = match ricker_fixed_points(1.5, 1.5, 0.9).map_err(err)? {
        FixedPoints::Pair { u_bar, .. } => u_bar,
        other => return Err(format!("fixed points {other:?}")),
    };
    ensure((lim.limit.tail_mean - u_bar).abs() < 1e-2, || {
        format!("third class tail mean {}", lim.limit.tail_mean)
    })?;
    Ok(format!(
        "crossings at n = {first} and n = {second}; third class tends to {:.6}",
        lim.limit.tail_mean
    ))
}

fn threshold_oracle() -> Outcome {
    let (u_star, u_bar) = match ricker_fixed_points(1.5, 1.5, 0.9).map_err(err)? {
        FixedPoints::Pair { u_star, u_bar } => (u_star, u_bar),
        other => return Err(format!("fixed points {other:?}")),
    };
    let residual = |u: f64| (u.sqrt() * (1.5 - 0.9 * u).exp() - 1.0).abs();
    ensure(residual(u_star) < 1e-9 && residual(u_bar) < 1e-9, || {
        format!("residuals {} {}", residual(u_star), residual(u_bar))
    })?;
    ensure((u_star - 0.05494).abs() < 5e-5, || format!("u* = {u_star}"))?;
    ensure((u_bar - 2.0712).abs() < 5e-5, || format!("u_bar = {u_bar}"))?;
    let phi = |u: f64| 0.5 * u.ln() - 0.9 * u + 1.5;
    let n = 1_000_000;
    let (lo, hi) = (1e-6, 10.0);
    let step = (hi - lo) / n as f64;
    let mut brackets = Vec::new();
    let mut prev = phi(lo);
    for i in 1..=n {
        let u = lo + step * i as f64;
        let cur = phi(u);
        if (prev < 0.0) != (cur < 0.0) {
            brackets.push((u - step, u));
        }
        prev = cur;
    }
    ensure(brackets.len() == 2, || format!("{} sign changes", brackets.len()))?;
    let inside = |(a, b): (f64, f64), r: f64| a <= r && r <= b;
    ensure(inside(brackets[0], u_star) && inside(brackets[1], u_bar), || {
        format!("brackets {brackets:?} miss ({u_star}, {u_bar})")
    })?;
    Ok(format!("u* = {u_star:.12}, u_bar = {u_bar:.12}; grid brackets agree"))
}

fn lam_boundary() -> Outcome {
    let c = check_lam_condition(2.0, 1.0, 1.0).map_err(err)?;
    ensure(c.holds && c.equality, || format!("{c:?}"))?;
    let fp = ricker_fixed_points(2.0, 1.0, 1.0).map_err(err)?;
    ensure(fp == FixedPoints::Tangent { u: 1.0 }, || format!("{fp:?}"))?;
    Ok("equality with rhs = 1; tangent at u = 1".into())
}

fn planar_fold() -> Outcome {
    let sys = make_adult_juvenile(&AdultJuvenileParams::constant(0.8, 1.0, 2.0, 2.0)).map_err(err)?;
    let r = check_fold_consistency(&sys, (1.0, 1.0), 100, 1e-9).map_err(err)?;
    ensure(r.passed, || format!("{r:?}"))?;
    // Recovery in the form y_n = x_{n+1} / s.
    let orbit = iterate_system(&sys, (1.0, 1.0), 100).map_err(err)?;
    let xs = orbit.xs();
    let ys = orbit.ys();
    let worst = (0..100)
        .map(|n| {
            let y = xs[n + 1] / 0.8;
            if y == ys[n] {
                0.0
            } else {
                (y - ys[n]).abs() / y.abs().max(ys[n].abs())
            }
        })
        .fold(0.0, f64::max);
    ensure(worst <= 1e-9, || format!("y recovery deviation {worst:e}"))?;
    Ok(format!(
        "x deviation {:.1e}, y deviation {:.1e} over 100 steps",
        r.max_rel_deviation, worst
    ))
}

fn random_threed(rng: &mut ChaCha8Rng) -> ThreeDParams {
    ThreeDParams {
        a: ParameterSequence::periodic_exact(vec![rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5)])
            .unwrap(),
        p: rng.gen_range(0.0..0.5).into(),
        b: rng.gen_range(0.0..0.5),
        c: rng.gen_range(0.5..1.5),
        d: rng.gen_range(0.0..0.5),
        q: rng.gen_range(0.5..1.5),
        r: rng.gen_range(0.5..1.5),
        s: rng.gen_range(0.5..1.5),
    }
}

fn spatial_fold() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for draw in 0..10 {
        let params = random_threed(&mut rng);
        let init = [rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0)];
        let sys = SpatialSystem::new(params).map_err(err)?;
        let r = sys.check_fold_consistency(init, 50, 1e-9).map_err(err)?;
        ensure(r.passed, || format!("draw {draw}: {r:?}"))?;
        worst = worst.max(r.max_rel_deviation);
    }
    Ok(format!("10 draws, worst deviation {worst:.1e}"))
}

fn competition_global() -> Outcome {
    let params = CompetitionParams::constant(1.0, 1.0, 0.5, 1.0, 1.0, 0.5, [2.0; 4]);
    let sys = make_competition(&params, false).map_err(err)?;
    let check = check_h6(&sys, DEFAULT_ENVELOPE_GRID, DEFAULT_SEARCH_HI).map_err(err)?;
    ensure(check.threshold() == Some(Threshold::unbounded()), || format!("{check:?}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let init = (rng.gen_range(0.01..10.0), rng.gen_range(0.01..10.0));
        let orbit = iterate_system(&sys, init, 200).map_err(err)?;
        let xs = orbit.xs();
        let ys = orbit.ys();
        let positive: Vec<f64> = xs.iter().copied().take_while(|&x| x > 0.0).collect();
        if let Some(j) = strictly_decreasing(&positive) {
            return Err(format!("from {init:?}: x not decreasing at n = {j}"));
        }
        ensure(xs[200] < 1e-8 && ys[200] < 1e-8, || {
            format!("from {init:?}: ({}, {}) at n = 200", xs[200], ys[200])
        })?;
        let report = apply_corollary_syst0(&sys, &orbit, &check, &Tolerances::default()).map_err(err)?;
        no_violations(&report)?;
        ensure(report.full_convergence_from == Some(0), || {
            format!("from {init:?}: convergence from {:?}", report.full_convergence_from)
        })?;
    }
    Ok("20 initial points reach (x, y) < 1e-8 by n = 200, x decreasing from n = 0".into())
}

fn competition_sharpness() -> Outcome {
    let t = competition_threshold(3.0, 2.0, 2.0).map_err(err)?;
    ensure(t == Threshold::crossing(1.0), || format!("{t:?}"))?;
    let params = CompetitionParams::constant(3.0, 2.0, 0.5, 1.0, 1.0, 0.5, [2.0; 4]);
    let sys = make_competition(&params, false).map_err(err)?;
    let below = iterate_system(&sys, (0.99, 0.0), 200).map_err(err)?.xs();
    let positive: Vec<f64> = below.iter().copied().take_while(|&x| x > 0.0).collect();
    if let Some(j) = strictly_decreasing(&positive) {
        return Err(format!("from 0.99: not decreasing at n = {j}"));
    }
    let above = iterate_system(&sys, (1.01, 0.0), 200).map_err(err)?.xs();
    let coupled = iterate_system(&sys, (1.01, 0.5), 200).map_err(err)?.xs();
    Ok(format!(
        "alpha = 1; from (0.99, 0) x_200 = {:.3e}; recorded from (1.01, 0) x_200 = {:.6}, from (1.01, 0.5) x_200 = {:.3e}",
        below[200], above[200], coupled[200]
    ))
}

fn system_parity() -> Outcome {
    let sys = make_adult_juvenile(&AdultJuvenileParams::constant(0.8, 1.0, 2.0, 2.0)).map_err(err)?;
    let check = check_h5(&sys, DEFAULT_ENVELOPE_GRID, DEFAULT_SEARCH_HI).map_err(err)?;
    let alpha = check.threshold().ok_or_else(|| format!("{check:?}"))?.alpha;
    ensure((alpha - 0.15859433956303934).abs() < 1e-10, || format!("alpha = {alpha}"))?;
    let mut runs = 0;
    for (x0, y0) in [(1.0, 0.1), (2.0, 0.05), (0.5, 0.15), (3.0, 0.01)] {
        let orbit = iterate_system(&sys, (x0, y0), 200).map_err(err)?;
        let report = apply_corollary_syst(&sys, &orbit, &check, &Tolerances::default()).map_err(err)?;
        no_violations(&report)?;
        let odd = report
            .predictions
            .iter()
            .find(|p| p.n0 % 2 == 1)
            .ok_or_else(|| format!("({x0}, {y0}) never enters at an odd index"))?;
        ensure(odd.verdict == Verdict::ConvergingToZero, || {
            format!("({x0}, {y0}): odd class verdict {:?}", odd.verdict)
        })?;
        let xs = orbit.xs();
        let mut idx = odd.n0;
        while idx < xs.len() {
            ensure(idx % 2 == odd.n0 % 2, || "parity mismatch".into())?;
            idx += odd.stride;
        }
        let y = report
            .y_limits
            .iter()
            .find(|l| l.residue_class == 0)
            .ok_or("no even y class")?;
        ensure(y.monotone == MonotoneVerdict::Verified, || {
            format!("({x0}, {y0}): even y class {:?}", y.monotone)
        })?;
        runs += 1;
    }
    Ok(format!("{runs} runs: odd x and even y classes verified, alpha = {alpha:.12}"))
}

fn soundness_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let tol = Tolerances::default();
    let mut predictions = 0;
    for draw in 0..100 {
        let reports: Vec<ConvergenceReport> = match draw % 5 {
            0 => {
                let k = rng.gen_range(1..=3);
                let m = make_sp3(k).map_err(err)?;
                let init: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..3.0)).collect();
                let traj = m.equation.iterate(&init, 300).map_err(err)?;
                vec![build_report(&m.equation, &m.rigorous_bound, &traj, &tol).map_err(err)?]
            }
            1 => {
                let m = rng.gen_range(1..=3);
                let k = rng.gen_range(1..=m);
                let b: Vec<ParameterSequence> = (0..m)
                    .map(|i| {
                        let lo = if i + 1 == k { 0.2 } else { 0.0 };
                        ParameterSequence::periodic_exact(vec![rng.gen_range(lo..1.5), rng.gen_range(lo..1.5)])
                            .unwrap()
                    })
                    .collect();
                let a = ParameterSequence::periodic_exact(vec![rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)])
                    .unwrap();
                let spec = RickerFamilySpec::new(rng.gen_range(1.1..3.0), k, a, b);
                let (eq, bound) = make_generalized_ricker(&spec).map_err(err)?;
                let init: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..3.0)).collect();
                let traj = eq.iterate(&init, 300).map_err(err)?;
                vec![build_report(&eq, &bound, &traj, &tol).map_err(err)?]
            }
            2 => {
                let a = rng.gen_range(0.5..3.0);
                let spec = SigmoidBHSpec {
                    a: a.into(),
                    c: rng.gen_range(0.0..1.0).into(),
                    q: rng.gen_range(0.5..2.0).into(),
                    p: RationalExponent::integer(rng.gen_range(2..=4)).unwrap(),
                    b: rng.gen_range(0.0..2.0),
                    k: rng.gen_range(1..=2),
                    l: rng.gen_range(1..=2),
                };
                let (eq, bound) = sigmoid_bh_translated(&spec).map_err(err)?;
                let m = eq.order();
                let init: Vec<f64> = (0..m).map(|_| rng.gen_range(-spec.b..spec.b + 2.0)).collect();
                let traj = eq.iterate(&init, 200).map_err(err)?;
                vec![build_report(&eq, &bound, &traj, &tol).map_err(err)?]
            }
            3 => {
                let params = AdultJuvenileParams {
                    s: ParameterSequence::periodic_exact(vec![rng.gen_range(0.3..1.0), rng.gen_range(0.3..1.0)]).unwrap(),
                    t: rng.gen_range(0.2..2.0).into(),
                    r: rng.gen_range(0.5..3.0).into(),
                    lambda: rng.gen_range(1.2..3.0),
                };
                let sys = make_adult_juvenile(&params).map_err(err)?;
                let check = check_h5(&sys, 60, DEFAULT_SEARCH_HI).map_err(err)?;
                let orbit = iterate_system(&sys, (rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0)), 200)
                    .map_err(err)?;
                if check.is_applicable() {
                    vec![apply_corollary_syst(&sys, &orbit, &check, &tol).map_err(err)?]
                } else {
                    Vec::new()
                }
            }
            _ => {
                let r1 = rng.gen_range(0.5..4.0);
                let params = CompetitionParams::constant(
                    r1,
                    rng.gen_range(0.5..3.0),
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.5..4.0),
                    rng.gen_range(0.5..3.0),
                    rng.gen_range(0.0..1.0),
                    [rng.gen_range(1.2..3.0), rng.gen_range(1.2..3.0), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)],
                );
                let swapped = rng.gen_bool(0.5);
                let sys = make_competition(&params, swapped).map_err(err)?;
                let orbit = iterate_system(&sys, (rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0)), 200)
                    .map_err(err)?;
                if swapped {
                    let check = check_h5(&sys, 60, DEFAULT_SEARCH_HI).map_err(err)?;
                    if check.is_applicable() {
                        vec![apply_corollary_syst(&sys, &orbit, &check, &tol).map_err(err)?]
                    } else {
                        Vec::new()
                    }
                } else {
                    let check = check_h6(&sys, 60, DEFAULT_SEARCH_HI).map_err(err)?;
                    if check.is_applicable() {
                        vec![apply_corollary_syst0(&sys, &orbit, &check, &tol).map_err(err)?]
                    } else {
                        Vec::new()
                    }
                }
            }
        };
        for report in &reports {
            no_violations(report).map_err(|e| format!("draw {draw}: {e}"))?;
            for p in &report.predictions {
                ensure(p.chain_verified, || format!("draw {draw}: chain fails from {}", p.n0))?;
                ensure(!matches!(p.verdict, Verdict::Violated { .. }), || {
                    format!("draw {draw}: {:?}", p.verdict)
                })?;
                predictions += 1;
            }
        }
    }
    Ok(format!("100 draws, {predictions} predictions, none violated"))
}

fn sigmoid_window() -> Outcome {
    let spec = SigmoidBHSpec {
        a: 2.0.into(),
        c: 0.0.into(),
        q: 1.0.into(),
        p: RationalExponent::integer(3).unwrap(),
        b: 1.0,
        k: 1,
        l: 1,
    };
    let window = sigmoid_bh_window(2.0, 3.0, 1.0).map_err(err)?;
    ensure(
        (window.lo - 0.29289).abs() < 1e-5 && (window.hi - 1.70711).abs() < 1e-5,
        || format!("window {window:?}"),
    )?;
    let eq = make_sigmoid_bh(&spec).map_err(err)?;
    let n = 25;
    for i in 1..n {
        let x0 = window.lo + (window.hi - window.lo) * i as f64 / n as f64;
        let traj = eq.iterate(&[x0], 200).map_err(err)?;
        let dist: Vec<f64> = traj.terms.iter().map(|x| (x - 1.0).abs()).collect();
        let nonzero: Vec<f64> = dist.iter().copied().take_while(|&d| d > 0.0).collect();
        if let Some(j) = strictly_decreasing(&nonzero) {
            return Err(format!("x0 = {x0}: |x_n - 1| not decreasing at n = {j}"));
        }
        ensure(dist[200] < 1e-8, || format!("x0 = {x0}: |x_200 - 1| = {}", dist[200]))?;
    }
    let open = ThresholdWindow::open(window.lo, window.hi);
    ensure(open.contains(1.0), || "window misses b".into())?;
    Ok(format!(
        "window ({:.5}, {:.5}); {} starts converge to 1",
        window.lo,
        window.hi,
        n - 1
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("sp3 k=1: crossing and full monotone convergence", sp3_lag1),
        ("sp3 k=2: crossing and stride-2 chain", sp3_lag2),
        ("sp3 k=3: two zero classes and a fixed-point class", sp3_lag3),
        ("Ricker fixed points against a grid oracle", threshold_oracle),
        ("tangent boundary of the existence condition", lam_boundary),
        ("adult-juvenile fold equivalence", planar_fold),
        ("three-dimensional fold equivalence", spatial_fold),
        ("competition global convergence", competition_global),
        ("competition threshold sharpness", competition_sharpness),
        ("parity of system subsequence convergence", system_parity),
        ("soundness over random draws", soundness_suite),
        ("sigmoid Beverton-Holt window", sigmoid_window),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
