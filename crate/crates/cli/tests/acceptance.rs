//! Acceptance suite. Each test prints one `PASS`/`FAIL` line to stdout
//! (bypassing the harness capture) and then asserts the same condition.

use std::io::Write;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use auglag_core::complexity::{certify_run, fit_growth, sweep, GrowthModel, Regime};
use auglag_core::inner::{cubic_model, cubic_step, InnerMethod};
use auglag_core::lagrangian::{
    branch_form, eval_p, grad_p, lagrangian_grad, lagrangian_value, lipschitz_bound_linear,
    shifted_form,
};
use auglag_core::outer::{OuterState, RunReport, Termination};
use auglag_core::problem::{corpus, ProblemSpec};
use auglag_core::{solve, MonitorMode, SolverConfig};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LEMMA_SLACK: f64 = 1e-9;
const EPS_LEVELS: [f64; 3] = [1e-2, 1e-3, 1e-4];

fn report_line(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "[acceptance {id:>2}] {verdict} {name}: {detail}").unwrap();
    out.flush().unwrap();
}

fn conclude(id: u32, name: &str, failures: &[String], detail: &str) {
    let pass = failures.is_empty();
    let detail = if pass {
        detail.to_string()
    } else {
        format!("{detail}; first failures: {}", failures.iter().take(3).cloned().collect::<Vec<_>>().join(" | "))
    };
    report_line(id, name, pass, &detail);
    assert!(pass, "acceptance check {id} ({name}) failed: {failures:#?}");
}

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + LEMMA_SLACK * rhs.abs().max(1.0)
}

fn vec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Random `(x, λ, σ)` near `x0` with `λ_I ≥ 0`.
fn random_tuple(p: &ProblemSpec, rng: &mut ChaCha8Rng) -> (DVector<f64>, DVector<f64>, f64) {
    let x = DVector::from_fn(p.n(), |i, _| p.x0[i] + rng.gen_range(-1.5..1.5));
    let lambda = DVector::from_fn(p.m(), |i, _| {
        if i < p.m_e() { rng.gen_range(-5.0..5.0) } else { rng.gen_range(0.0..5.0) }
    });
    let sigma = 10f64.powf(rng.gen_range(-1.0..3.0));
    (x, lambda, sigma)
}

fn corpus_runs() -> &'static [(f64, RunReport)] {
    static RUNS: OnceLock<Vec<(f64, RunReport)>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let mut runs = Vec::new();
        for p in corpus::corpus() {
            for eps in EPS_LEVELS {
                let config = SolverConfig { eps, monitor: MonitorMode::Record, ..SolverConfig::default() };
                let report = solve(&p, &config).unwrap_or_else(|e| panic!("{} at ε={eps}: {e}", p.name));
                runs.push((eps, report));
            }
        }
        runs
    })
}

fn problem_of(report: &RunReport) -> ProblemSpec {
    corpus::by_name(&report.problem).expect("corpus problem")
}

#[test]
fn form_agreement() {
    let start = Instant::now();
    let problems = [corpus::simplex_cos(8).unwrap(), corpus::dup_eq(8).unwrap()];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let tuples = 10_000;
    for t in 0..tuples {
        let p = &problems[t % problems.len()];
        let (x, lambda, sigma) = random_tuple(p, &mut rng);
        let f = p.objective.value(&x);
        let c = p.constraints.values(&x);
        let a = branch_form(f, &c, &lambda, sigma, p.m_e());
        let b = shifted_form(f, &c, &lambda, sigma, p.m_e());
        let rel = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        if rel > 1e-10 {
            failures.push(format!("{}: {a} vs {b}", p.name));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(5) {
        failures.push(format!("runtime {elapsed:?}"));
    }
    conclude(1, "form agreement", &failures, &format!("{tuples} tuples, worst relative gap {worst:.2e}, {elapsed:.2?}"));
}

/// Central differences of `g` along every coordinate.
fn central_diff(x: &DVector<f64>, g: impl Fn(&DVector<f64>) -> f64) -> DVector<f64> {
    DVector::from_fn(x.len(), |j, _| {
        let h = 1e-6 * x[j].abs().max(1.0);
        let mut up = x.clone();
        let mut down = x.clone();
        up[j] += h;
        down[j] -= h;
        (g(&up) - g(&down)) / (2.0 * h)
    })
}

fn rel_gap(exact: &DVector<f64>, approx: &DVector<f64>) -> f64 {
    (exact - approx).amax() / exact.amax().max(1.0)
}

#[test]
fn derivative_correctness() {
    let start = Instant::now();
    let problems = corpus::corpus();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_p, mut worst_l) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    let points = 1000;
    let mut accepted = 0;
    while accepted < points {
        let p = &problems[accepted % problems.len()];
        let (x, lambda, sigma) = random_tuple(p, &mut rng);
        let c = p.constraints.values(&x);
        let seam = (p.m_e()..p.m()).any(|i| (c[i] - lambda[i] / sigma).abs() < 1e-3);
        if seam {
            continue;
        }
        accepted += 1;
        let gp = grad_p(p, &x, &lambda, sigma).unwrap();
        let fp = central_diff(&x, |y| eval_p(p, y, &lambda, sigma).unwrap());
        let gl = lagrangian_grad(p, &x, &lambda);
        let fl = central_diff(&x, |y| lagrangian_value(p, y, &lambda));
        let (ep, el) = (rel_gap(&gp, &fp), rel_gap(&gl, &fl));
        worst_p = worst_p.max(ep);
        worst_l = worst_l.max(el);
        if ep > 1e-6 || el > 1e-6 {
            failures.push(format!("{}: grad_P {ep:.2e}, grad_L {el:.2e}", p.name));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(10) {
        failures.push(format!("runtime {elapsed:?}"));
    }
    conclude(
        2,
        "derivative correctness",
        &failures,
        &format!("{points} points, worst grad_P {worst_p:.2e}, worst grad_L {worst_l:.2e}, {elapsed:.2?}"),
    );
}

/// Recomputes the per-iteration inequalities of one run from its trace.
fn lemma_violations(eps: f64, report: &RunReport, counts: &mut [usize; 6]) -> Vec<String> {
    let p = problem_of(report);
    let x0 = &p.x0;
    let f0 = p.objective.value(x0);
    let gap = f0 - p.objective.f_low;
    let mu0_sq = report.mu0_norm_sq;
    let mut bad = Vec::new();
    let mut check = |slot: usize, name: &str, k: usize, lhs: f64, rhs: f64| {
        counts[slot] += 1;
        if !holds(lhs, rhs) {
            bad.push(format!("{} ε={eps} k={k} {name}: {lhs:e} > {rhs:e}", report.problem));
        }
    };
    for pair in report.trace.windows(2) {
        let (prev, next): (&OuterState, &OuterState) = (&pair[0], &pair[1]);
        let k = prev.k;
        let lambda = vec(&prev.lambda);
        let sigma = prev.sigma;
        let x_prev = vec(&prev.x);
        let x_next = vec(&next.x);

        let p_x0 = eval_p(&p, x0, &lambda, sigma).unwrap();
        check(0, "P(x0) <= f(x0)", k, p_x0, f0);
        let p_next = eval_p(&p, &x_next, &lambda, sigma).unwrap();
        let lower = p.objective.value(&x_next) - 0.5 * lambda.norm_squared() / sigma;
        check(1, "lower bound", k, lower, p_next);
        let p_prev = eval_p(&p, &x_prev, &lambda, sigma).unwrap();
        check(2, "descent", k, p_next, p_prev.min(p_x0));

        let lambda_next = vec(&next.lambda);
        let mu_sq = lambda_next.norm_squared() / next.sigma;
        check(3, "mu growth", next.k, mu_sq, mu0_sq + 2.0 * gap * next.k as f64);

        if k >= 1 {
            let c = p.constraints.values(&x_next);
            let eq = (0..p.m_e()).map(|i| (c[i] - lambda[i] / sigma).abs()).fold(0.0, f64::max);
            let ineq = (p.m_e()..p.m()).map(|i| (-c[i]).max(0.0)).fold(0.0, f64::max);
            let mult = lambda.amax() / sigma;
            let rhs = k as f64 * (mu0_sq + 4.0 * gap);
            check(4, "feasibility decay", k, sigma * eq.max(ineq).powi(2), rhs);
            let theta = mult.max(eq).max(ineq);
            check(5, "theta decay", k, sigma * theta * theta, rhs);
        }
    }
    bad
}

#[test]
fn lemma_suite() {
    let mut counts = [0usize; 6];
    let mut failures = Vec::new();
    let names = ["upper-bound-at-x0", "lower-bound", "warm-start-descent", "mu-growth", "feasibility-decay", "theta-decay"];
    for (eps, report) in corpus_runs() {
        failures.extend(lemma_violations(*eps, report, &mut counts));
        for r in report.monitor_log.iter().filter(|r| names.contains(&r.check) && !r.pass) {
            failures.push(format!("{} ε={eps} monitor {} at {}", report.problem, r.check, r.iteration));
        }
    }
    if counts.contains(&0) {
        failures.push(format!("some inequality was never exercised: {counts:?}"));
    }
    let total: usize = counts.iter().sum();
    conclude(3, "lemma suite", &failures, &format!("{} runs, {total} inequality checks", corpus_runs().len()));
}

#[test]
fn dual_residual() {
    let mut failures = Vec::new();
    let mut worst_identity: f64 = 0.0;
    let mut checked = 0;
    for (eps, report) in corpus_runs() {
        let p = problem_of(report);
        for pair in report.trace.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            let x = vec(&next.x);
            let dual = lagrangian_grad(&p, &x, &vec(&next.lambda));
            let gp = grad_p(&p, &x, &vec(&prev.lambda), prev.sigma).unwrap();
            let identity = (&dual - &gp).amax();
            worst_identity = worst_identity.max(identity);
            checked += 1;
            if dual.amax() > *eps {
                failures.push(format!("{} ε={eps} k={}: dual {:e}", report.problem, next.k, dual.amax()));
            }
            if identity > 1e-12 {
                failures.push(format!("{} ε={eps} k={}: identity gap {identity:e}", report.problem, next.k));
            }
        }
    }
    conclude(4, "dual-residual guarantee", &failures, &format!("{checked} iterates, worst identity gap {worst_identity:.2e}"));
}

#[test]
fn eq_qp_analytic() {
    let p = corpus::eq_qp(4).unwrap();
    let mut failures = Vec::new();
    let mut details = Vec::new();
    for method in [InnerMethod::FixedStepGd, InnerMethod::CubicNewton] {
        let start = Instant::now();
        let config = SolverConfig { eps: 1e-6, inner: Some(method), ..SolverConfig::default() };
        let report = solve(&p, &config).unwrap();
        let elapsed = start.elapsed();
        let last = report.final_state();
        let dx = last.x.iter().map(|v| (v - 0.25).abs()).fold(0.0, f64::max);
        let dl = (last.lambda[0] - 0.25).abs();
        details.push(format!("{method}: |x-x*| {dx:.1e}, |λ-1/4| {dl:.1e}, {elapsed:.2?}"));
        if report.terminated != Termination::EpsKKT || dx > 1e-5 || dl > 1e-5 || elapsed >= Duration::from_secs(5) {
            failures.push(format!("{method}: {:?} dx={dx:e} dl={dl:e} in {elapsed:?}", report.terminated));
        }
    }
    conclude(5, "eq-qp-analytic convergence", &failures, &details.join("; "));
}

#[test]
fn bounded_sigma_certificate() {
    let mut failures = Vec::new();
    let mut details = Vec::new();
    for p in [corpus::simplex_cos(8).unwrap(), corpus::eq_cos(8).unwrap()] {
        for eps in EPS_LEVELS {
            let report = solve(&p, &SolverConfig { eps, ..SolverConfig::default() }).unwrap();
            let cert = certify_run(&report).unwrap();
            let reached = cert.first_theta_hit.unwrap_or(report.t_outer);
            details.push(format!(
                "{} ε={eps:.0e}: reach {reached} <= {} (σ_max {})",
                p.name,
                cert.bound_bounded.ceil(),
                cert.inputs.sigma_max
            ));
            if !cert.bounded_holds {
                failures.push(format!("{} ε={eps}: {cert:?}", p.name));
            }
        }
    }
    conclude(6, "bounded-sigma outer bound", &failures, &details.join("; "));
}

#[test]
fn growing_sigma_certificate() {
    let p = corpus::dup_eq(8).unwrap();
    let mut failures = Vec::new();
    let mut details = Vec::new();
    for eps in [1e-2, 1e-3] {
        let config = SolverConfig { eps, gamma: 0.01, alpha: 3.0, ..SolverConfig::default() };
        let report = solve(&p, &config).unwrap();
        let cert = certify_run(&report).unwrap();
        details.push(format!("ε={eps:.0e}: {} exceedances < {:.1}", cert.exceedance_run, cert.bound_unbounded));
        if cert.regime != Regime::GrowingSigma || !cert.unbounded_holds {
            failures.push(format!("ε={eps}: {cert:?}"));
        }
    }
    conclude(7, "growing-sigma outer bound", &failures, &details.join("; "));
}

fn p_low(report: &RunReport, k: usize) -> f64 {
    let gap = report.f0 - report.f_low;
    report.f_low - 0.5 * report.mu0_norm_sq - gap * k as f64
}

#[test]
fn inner_budgets() {
    let mut failures = Vec::new();
    let mut gd_solves = 0;
    let mut worst_ratio: f64 = 0.0;
    for p in [corpus::simplex_cos(8).unwrap(), corpus::eq_cos(8).unwrap(), corpus::dup_eq(8).unwrap(), corpus::eq_qp(4).unwrap()] {
        for eps in EPS_LEVELS {
            let config = SolverConfig { eps, inner: Some(InnerMethod::FixedStepGd), ..SolverConfig::default() };
            let report = solve(&p, &config).unwrap();
            let l1 = p.objective.global_l1().unwrap();
            for pair in report.trace.windows(2) {
                let (prev, next) = (&pair[0], &pair[1]);
                let summary = next.inner.as_ref().unwrap();
                let l = lipschitz_bound_linear(l1, prev.sigma, &p.constraints).unwrap();
                let lambda = vec(&prev.lambda);
                let start_value = eval_p(&p, &p.x0, &lambda, prev.sigma)
                    .unwrap()
                    .min(eval_p(&p, &vec(&prev.x), &lambda, prev.sigma).unwrap());
                if (start_value - summary.value_start).abs() > 1e-12 * start_value.abs().max(1.0) {
                    failures.push(format!("{} k={}: start value {} vs {}", p.name, prev.k, summary.value_start, start_value));
                }
                let budget = 4.0 * l * (start_value - p_low(&report, prev.k)) / (eps * eps);
                gd_solves += 1;
                worst_ratio = worst_ratio.max(summary.iterations as f64 / budget);
                if summary.iterations as f64 > budget {
                    failures.push(format!("{} ε={eps} k={}: {} > {budget:e}", p.name, prev.k, summary.iterations));
                }
            }
        }
    }
    let p = corpus::eq_cos(8).unwrap();
    let l2 = p.objective.global_l2().unwrap();
    let mut cubic_solves = 0;
    for eps in EPS_LEVELS {
        let config = SolverConfig { eps, inner: Some(InnerMethod::CubicNewton), ..SolverConfig::default() };
        let report = solve(&p, &config).unwrap();
        for pair in report.trace.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            let summary = next.inner.as_ref().unwrap();
            let budget = 10.0 * l2.sqrt() * (summary.value_start - p_low(&report, prev.k)) * eps.powf(-1.5);
            cubic_solves += 1;
            worst_ratio = worst_ratio.max(summary.iterations as f64 / budget);
            if summary.iterations as f64 > budget {
                failures.push(format!("cubic ε={eps} k={}: {} > {budget:e}", prev.k, summary.iterations));
            }
        }
    }
    conclude(
        8,
        "inner-complexity budgets",
        &failures,
        &format!("{gd_solves} GD and {cubic_solves} cubic solves, worst used/budget {worst_ratio:.2e}"),
    );
}

#[test]
fn growth_law_fits() {
    let start = Instant::now();
    let grid: Vec<f64> = (0..6).map(|i| 1e-1 * (3e-3f64).powf(i as f64 / 5.0)).collect();
    let mut failures = Vec::new();
    let gd_problem = corpus::simplex_cos(8).unwrap();
    let gd_config = SolverConfig { inner: Some(InnerMethod::FixedStepGd), ..SolverConfig::default() };
    let gd = sweep(&gd_problem, &gd_config, &grid, 4).unwrap();
    let gd_fit = fit_growth(&gd, GrowthModel::PowerLaw).unwrap();
    if gd_fit.exponent_or_slope > 2.3 || gd_fit.r_squared < 0.9 || gd_fit.points != 6 {
        failures.push(format!("GD fit {gd_fit:?}"));
    }
    let cubic_problem = corpus::eq_cos(8).unwrap();
    let cubic_config = SolverConfig { inner: Some(InnerMethod::CubicNewton), ..SolverConfig::default() };
    let cubic = sweep(&cubic_problem, &cubic_config, &grid, 4).unwrap();
    let cubic_fit = fit_growth(&cubic, GrowthModel::PowerLaw).unwrap();
    if cubic_fit.exponent_or_slope > 1.8 || cubic_fit.points != 6 {
        failures.push(format!("cubic fit {cubic_fit:?}"));
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(300) {
        failures.push(format!("runtime {elapsed:?}"));
    }
    conclude(
        9,
        "growth-law fits",
        &failures,
        &format!(
            "GD exponent {:.3} (R² {:.3}), cubic exponent {:.3} (R² {:.3}), {elapsed:.2?}",
            gd_fit.exponent_or_slope, gd_fit.r_squared, cubic_fit.exponent_or_slope, cubic_fit.r_squared
        ),
    );
}

/// Compass search from `s` on the cubic model, down to step `1e-9`.
fn refine(g: &DVector<f64>, h: &DMatrix<f64>, m: f64, mut s: DVector<f64>) -> DVector<f64> {
    let mut value = cubic_model(g, h, m, &s);
    let mut step = 0.1;
    while step > 1e-9 {
        let mut improved = false;
        for j in 0..s.len() {
            for dir in [1.0, -1.0] {
                let mut t = s.clone();
                t[j] += dir * step;
                let v = cubic_model(g, h, m, &t);
                if v < value {
                    s = t;
                    value = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    s
}

/// Global minimizer by grid search on `[-2, 2]^n`, polished by compass search
/// from the best few grid points.
fn brute_force(g: &DVector<f64>, h: &DMatrix<f64>, m: f64) -> DVector<f64> {
    let n = g.len();
    let per_axis: usize = if n == 1 { 4001 } else { 41 };
    let coord = |i: usize| -2.0 + 4.0 * i as f64 / (per_axis - 1) as f64;
    let total = per_axis.pow(n as u32);
    let mut scored: Vec<(f64, DVector<f64>)> = (0..total)
        .map(|mut idx| {
            let s = DVector::from_fn(n, |_, _| {
                let c = coord(idx % per_axis);
                idx /= per_axis;
                c
            });
            (cubic_model(g, h, m, &s), s)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored
        .into_iter()
        .take(10)
        .map(|(_, s)| refine(g, h, m, s))
        .min_by(|a, b| cubic_model(g, h, m, a).total_cmp(&cubic_model(g, h, m, b)))
        .unwrap()
}

#[test]
fn cubic_subproblem_oracle() {
    // With |g_i| ≤ 1, |H_ij| ≤ ½ and M ≥ 3 the minimizer norm is below 1.7,
    // inside the searched box.
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for instance in 0..20 {
        let n = 1 + instance % 3;
        let g = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.5..0.5));
        let h = (&b + b.transpose()) * 0.5;
        let m = rng.gen_range(3.0..6.0);
        let exact = cubic_step(&g, &h, m).unwrap();
        let grid = brute_force(&g, &h, m);
        let dist = (&exact - &grid).norm();
        worst = worst.max(dist);
        if dist > 1e-3 {
            failures.push(format!("instance {instance} (n={n}): distance {dist:e}"));
        }
    }
    conclude(10, "cubic subproblem oracle", &failures, &format!("20 instances, worst distance {worst:.2e}"));
}

#[test]
fn lipschitz_bound() {
    let p = corpus::simplex_cos(8).unwrap();
    let l1 = p.objective.global_l1().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for setting in 0..10 {
        let sigma = 10f64.powf(-2.0 + 5.0 * setting as f64 / 9.0);
        let lambda = DVector::from_fn(p.m(), |i, _| {
            if i < p.m_e() { rng.gen_range(-3.0..3.0) } else { rng.gen_range(0.0..3.0) }
        });
        let bound = lipschitz_bound_linear(l1, sigma, &p.constraints).unwrap();
        for pair in 0..1000 {
            let x = DVector::from_fn(p.n(), |i, _| p.x0[i] + rng.gen_range(-2.0..2.0));
            // Alternate far pairs with close ones that resolve local curvature.
            let radius = if pair % 2 == 0 { 2.0 } else { 1e-3 };
            let y = DVector::from_fn(p.n(), |i, _| x[i] + rng.gen_range(-radius..radius));
            let gx = grad_p(&p, &x, &lambda, sigma).unwrap();
            let gy = grad_p(&p, &y, &lambda, sigma).unwrap();
            let quotient = (&gx - &gy).norm() / (&x - &y).norm();
            worst_ratio = worst_ratio.max(quotient / bound);
            if quotient > bound {
                failures.push(format!("σ={sigma:e}: quotient {quotient:e} > {bound:e}"));
            }
        }
    }
    conclude(11, "Lipschitz bound validity", &failures, &format!("10 settings x 1000 pairs, worst quotient/bound {worst_ratio:.3}"));
}

#[test]
fn determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let out = dir.path().join(tag).join("run.json");
        std::fs::create_dir_all(out.parent().unwrap()).unwrap();
        let status = Command::new(env!("CARGO_BIN_EXE_auglag"))
            .args(["solve", "--problem", "simplex-cos-8", "--eps", "1e-3", "--seed", "42", "--format", "both", "--out"])
            .arg(&out)
            .env("AUGLAG_LOG", "quiet")
            .output()
            .unwrap();
        assert!(status.status.success(), "solve failed: {}", String::from_utf8_lossy(&status.stderr));
        (std::fs::read(&out).unwrap(), std::fs::read(out.with_extension("csv")).unwrap())
    };
    let (json_a, csv_a) = run("a");
    let (json_b, csv_b) = run("b");
    let mut failures = Vec::new();
    if json_a != json_b {
        failures.push("JSON reports differ".to_string());
    }
    if csv_a != csv_b {
        failures.push("CSV traces differ".to_string());
    }
    conclude(12, "determinism", &failures, &format!("{} JSON bytes, {} CSV bytes identical across runs", json_a.len(), csv_a.len()));
}
