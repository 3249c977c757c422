use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{ConstraintKind, ProblemError, ProblemSpec, FEASIBILITY_TOL};

/// Relative tolerance of the finite-difference gradient check.
pub const GRADIENT_REL_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub worst_error: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub problem: String,
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn step(xj: f64) -> f64 {
    1e-6 * xj.abs().max(1.0)
}

/// Worst coordinate-wise relative error of `grad` against central differences
/// of `value`, returned as `(error, coordinate)`.
fn gradient_mismatch(
    value: impl Fn(&DVector<f64>) -> f64,
    grad: &DVector<f64>,
    x: &DVector<f64>,
) -> (f64, usize) {
    let mut worst = (0.0, 0);
    let mut probe = x.clone();
    for j in 0..x.len() {
        let h = step(x[j]);
        probe[j] = x[j] + h;
        let up = value(&probe);
        probe[j] = x[j] - h;
        let down = value(&probe);
        probe[j] = x[j];
        let fd = (up - down) / (2.0 * h);
        let err = (fd - grad[j]).abs() / grad[j].abs().max(1.0);
        if !(err <= worst.0) {
            worst = (err, j);
        }
    }
    worst
}

/// Uniform sample from the unit ball around `center`.
fn sample_ball(rng: &mut ChaCha8Rng, center: &DVector<f64>) -> DVector<f64> {
    let n = center.len();
    let dir = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = dir.norm();
    if norm == 0.0 {
        return center.clone();
    }
    let radius = rng.gen::<f64>().powf(1.0 / n as f64);
    center + dir * (radius / norm)
}

/// Checks the starting point, the objective gradient and the constraint
/// functions of `problem` at `samples` random points near `x0`.
pub fn validate(
    problem: &ProblemSpec,
    samples: usize,
    seed: u64,
) -> Result<ValidationReport, ProblemError> {
    if samples == 0 {
        return Err(ProblemError::InvalidParameter(
            "validation needs at least one sample".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<_> = (0..samples)
        .map(|_| sample_ball(&mut rng, &problem.x0))
        .collect();
    let mut checks = Vec::new();

    let (eq, ineq) = problem.violation(&problem.x0);
    let worst = eq.max(ineq);
    checks.push(CheckOutcome {
        name: "feasible-start".into(),
        passed: worst <= FEASIBILITY_TOL,
        worst_error: worst,
        detail: format!("‖c_E(x0)‖∞ = {eq:e}, ‖c_I⁻(x0)‖∞ = {ineq:e}"),
    });

    let mut worst = (0.0f64, 0usize, 0usize);
    for (s, x) in points.iter().enumerate() {
        let g = problem.objective.gradient(x);
        let (err, j) = gradient_mismatch(|y| problem.objective.value(y), &g, x);
        if !(err <= worst.0) {
            worst = (err, j, s);
        }
    }
    checks.push(CheckOutcome {
        name: "objective-gradient".into(),
        passed: worst.0 <= GRADIENT_REL_TOL,
        worst_error: worst.0,
        detail: format!("worst at coordinate {} of sample {}", worst.1, worst.2),
    });

    let mut worst_f_low = f64::NEG_INFINITY;
    for x in &points {
        worst_f_low = worst_f_low.max(problem.objective.f_low - problem.objective.value(x));
    }
    checks.push(CheckOutcome {
        name: "objective-lower-bound".into(),
        passed: worst_f_low <= 0.0,
        worst_error: worst_f_low.max(0.0),
        detail: format!("f_low = {}", problem.objective.f_low),
    });

    let m = problem.m();
    match problem.constraints.kind() {
        ConstraintKind::Linear { a, b, .. } => {
            let mut worst = 0.0f64;
            for x in &points {
                let c = problem.constraints.values(x);
                for i in 0..m {
                    let direct = a.row(i).iter().zip(x.iter()).map(|(u, v)| u * v).sum::<f64>() - b[i];
                    worst = worst.max((c[i] - direct).abs() / direct.abs().max(1.0));
                }
            }
            checks.push(CheckOutcome {
                name: "linear-constraints".into(),
                passed: worst <= 1e-12,
                worst_error: worst,
                detail: "c(x) against A·x − b".into(),
            });
        }
        ConstraintKind::General(_) => {
            let mut worst = (0.0f64, 0usize, 0usize);
            for x in &points {
                let jac = problem.constraints.jacobian(x);
                for i in 0..m {
                    let row = jac.row(i).transpose();
                    let (err, j) =
                        gradient_mismatch(|y| problem.constraints.values(y)[i], &row, x);
                    if !(err <= worst.0) {
                        worst = (err, i, j);
                    }
                }
            }
            checks.push(CheckOutcome {
                name: "constraint-jacobian".into(),
                passed: worst.0 <= GRADIENT_REL_TOL,
                worst_error: worst.0,
                detail: format!("worst at constraint {} coordinate {}", worst.1, worst.2),
            });
        }
    }

    Ok(ValidationReport {
        problem: problem.name.clone(),
        checks,
    })
}
