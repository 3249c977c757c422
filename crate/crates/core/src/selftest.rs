//! Quick self-tests for the inner solvers and the augmented Lagrangian oracle
//! of a given problem, used by `auglag check`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::inner::{self, cubic_step, InnerError, InnerMethod, InnerTask, SmoothFunction};
use crate::lagrangian::{branch_form, grad_p, shifted_form, FORM_AGREEMENT_TOL};
use crate::problem::{CheckOutcome, ProblemSpec, GRADIENT_REL_TOL};

const SAMPLES: usize = 50;
/// Gradient samples this close to an inequality branch seam are skipped.
const SEAM_MARGIN: f64 = 1e-3;

/// `½ Σ d_j x_j² − Σ c_j x_j`, minimized at `x_j = c_j / d_j`.
struct Quadratic {
    d: Vec<f64>,
    c: Vec<f64>,
}

impl Quadratic {
    fn minimizer(&self) -> DVector<f64> {
        DVector::from_iterator(self.d.len(), self.d.iter().zip(&self.c).map(|(d, c)| c / d))
    }
}

impl SmoothFunction for Quadratic {
    fn value(&self, x: &DVector<f64>) -> Result<f64, InnerError> {
        Ok(x.iter()
            .zip(self.d.iter().zip(&self.c))
            .map(|(x, (d, c))| 0.5 * d * x * x - c * x)
            .sum())
    }

    fn value_and_gradient(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>), InnerError> {
        let g = DVector::from_iterator(
            x.len(),
            x.iter().zip(self.d.iter().zip(&self.c)).map(|(x, (d, c))| d * x - c),
        );
        Ok((self.value(x)?, g))
    }

    fn hessian(&self, _x: &DVector<f64>) -> Result<Option<DMatrix<f64>>, InnerError> {
        Ok(Some(DMatrix::from_diagonal(&DVector::from_vec(self.d.clone()))))
    }
}

fn outcome(name: &str, passed: bool, worst_error: f64, detail: String) -> CheckOutcome {
    CheckOutcome { name: name.to_string(), passed, worst_error, detail }
}

fn solver_on_quadratic(method: InnerMethod) -> CheckOutcome {
    let q = Quadratic { d: vec![1.0, 2.0, 5.0, 10.0], c: vec![1.0, -1.0, 2.0, 0.5] };
    let eps = 1e-8;
    let task = InnerTask::new(&q, DVector::zeros(4), eps).with_lipschitz(Some(10.0));
    let name = format!("inner-{method}-quadratic");
    match inner::run(method, &task) {
        Ok(r) => {
            let err = (&r.x_final - q.minimizer()).amax();
            let passed = r.accepted && r.monotone && err <= 1e-7;
            outcome(&name, passed, err, format!("{} iterations, ‖∇g‖ = {:e}", r.iterations, r.grad_norm2))
        }
        Err(e) => outcome(&name, false, f64::INFINITY, e.to_string()),
    }
}

/// First-order optimality `g + Hs + (M/2)‖s‖s = 0` of random cubic steps.
fn cubic_step_residuals(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let n = rng.gen_range(1..=5);
        let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let b = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let h = (&b + b.transpose()) * 0.5;
        let m = rng.gen_range(0.1..10.0);
        match cubic_step(&g, &h, m) {
            Ok(s) => {
                let r = &g + &h * &s + &s * (0.5 * m * s.norm());
                worst = worst.max(r.norm() / g.norm().max(1.0));
            }
            Err(e) => return outcome("cubic-step-optimality", false, f64::INFINITY, e.to_string()),
        }
    }
    outcome("cubic-step-optimality", worst <= 1e-8, worst, format!("{SAMPLES} random instances"))
}

fn random_state(problem: &ProblemSpec, rng: &mut ChaCha8Rng) -> (DVector<f64>, DVector<f64>, f64) {
    let x = DVector::from_fn(problem.n(), |i, _| problem.x0[i] + rng.sample::<f64, _>(StandardNormal));
    let m_e = problem.m_e();
    let lambda = DVector::from_fn(problem.m(), |i, _| {
        let v: f64 = rng.sample(StandardNormal);
        if i < m_e { v } else { v.abs() }
    });
    let sigma = 10f64.powf(rng.gen_range(-1.0..3.0));
    (x, lambda, sigma)
}

fn form_agreement(problem: &ProblemSpec, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let (x, lambda, sigma) = random_state(problem, rng);
        let f = problem.objective.value(&x);
        let c = problem.constraints.values(&x);
        let a = branch_form(f, &c, &lambda, sigma, problem.m_e());
        let b = shifted_form(f, &c, &lambda, sigma, problem.m_e());
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
    }
    outcome("form-agreement", worst <= FORM_AGREEMENT_TOL, worst, format!("{SAMPLES} random (x, λ, σ)"))
}

fn augmented_gradient(problem: &ProblemSpec, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let (x, lambda, sigma) = random_state(problem, rng);
        let c = problem.constraints.values(&x);
        let near_seam = (problem.m_e()..problem.m()).any(|i| (c[i] - lambda[i] / sigma).abs() < SEAM_MARGIN);
        if near_seam {
            continue;
        }
        let p = |y: &DVector<f64>| {
            let f = problem.objective.value(y);
            shifted_form(f, &problem.constraints.values(y), &lambda, sigma, problem.m_e())
        };
        let g = match grad_p(problem, &x, &lambda, sigma) {
            Ok(g) => g,
            Err(e) => return outcome("augmented-gradient", false, f64::INFINITY, e.to_string()),
        };
        let mut fd = DVector::zeros(x.len());
        for j in 0..x.len() {
            let h = 1e-6 * x[j].abs().max(1.0);
            let mut up = x.clone();
            let mut down = x.clone();
            up[j] += h;
            down[j] -= h;
            fd[j] = (p(&up) - p(&down)) / (2.0 * h);
        }
        worst = worst.max((&g - &fd).amax() / g.amax().max(1.0));
    }
    outcome("augmented-gradient", worst <= GRADIENT_REL_TOL, worst, format!("{SAMPLES} random (x, λ, σ)"))
}

/// Runs every self-test; `seed` drives the random instances.
pub fn run_all(problem: &ProblemSpec, seed: u64) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<CheckOutcome> = InnerMethod::ALL.iter().map(|&m| solver_on_quadratic(m)).collect();
    out.push(cubic_step_residuals(&mut rng));
    out.push(form_agreement(problem, &mut rng));
    out.push(augmented_gradient(problem, &mut rng));
    out
}
