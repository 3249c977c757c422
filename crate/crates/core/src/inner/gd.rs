use super::{finite_pair, InnerError, InnerResult, InnerTask, SmoothFunction};

/// Armijo sufficient-decrease parameter.
pub const ARMIJO_C1: f64 = 1e-4;
/// Smallest step the backtracking line search will try.
pub const MIN_STEP: f64 = 1e-16;
pub const MAX_BACKTRACKING_ITERATIONS: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GdVariant {
    /// `x ← x − ∇g(x)/L`.
    FixedStep,
    /// Armijo backtracking by halving, restarting from twice the last accepted step.
    Backtracking,
}

fn fixed_step_cap(l: f64, decrease_bound: f64, eps: f64) -> u64 {
    let cap = (4.0 * l * decrease_bound.max(1.0) / (eps * eps)).ceil();
    // Saturating float-to-int conversion.
    (cap as u64).saturating_add(1000)
}

/// Gradient descent until `‖∇g‖₂ ≤ eps`.
pub fn gd_solve<F: SmoothFunction + ?Sized>(
    task: &InnerTask<'_, F>,
    variant: GdVariant,
) -> Result<InnerResult, InnerError> {
    task.check()?;
    let g = task.function;
    let mut x = task.start.clone();
    let (mut value, mut grad) = g.value_and_gradient(&x)?;
    finite_pair(value, &grad)?;
    let value_start = value;
    let mut oracle_calls = 1u64;
    let mut iterations = 0u64;
    let mut rejected_steps = 0u64;
    let mut monotone = true;

    let l = match variant {
        GdVariant::FixedStep => match task.known_l {
            Some(l) if l > 0.0 => Some(l),
            _ => return Err(InnerError::MissingLipschitz),
        },
        GdVariant::Backtracking => task.known_l.filter(|&l| l > 0.0),
    };
    let cap = task.max_iterations.unwrap_or_else(|| match variant {
        GdVariant::FixedStep => {
            let bound = task.g_low.map_or(1.0, |low| value_start - low);
            fixed_step_cap(l.unwrap_or(1.0), bound, task.eps)
        }
        GdVariant::Backtracking => MAX_BACKTRACKING_ITERATIONS,
    });
    let mut step = l.map_or(1.0, |l| 1.0 / l);

    loop {
        let grad_norm = grad.norm();
        if grad_norm <= task.eps {
            break;
        }
        if iterations >= cap {
            return Err(InnerError::IterationCapExceeded { cap, grad_norm });
        }
        let (next_x, next_value, next_grad) = match variant {
            GdVariant::FixedStep => {
                let next_x = &x - &grad * step;
                let (v, gr) = g.value_and_gradient(&next_x)?;
                oracle_calls += 1;
                finite_pair(v, &gr)?;
                (next_x, v, gr)
            }
            GdVariant::Backtracking => {
                let slope = grad_norm * grad_norm;
                let mut t = if iterations == 0 { step } else { 2.0 * step };
                loop {
                    if t < MIN_STEP {
                        return Err(InnerError::LineSearchFailure { grad_norm });
                    }
                    let trial = &x - &grad * t;
                    let (v, gr) = g.value_and_gradient(&trial)?;
                    oracle_calls += 1;
                    // Non-finite trial values fail the comparison and are halved away.
                    if v <= value - ARMIJO_C1 * t * slope && gr.iter().all(|c| c.is_finite()) {
                        step = t;
                        break (trial, v, gr);
                    }
                    rejected_steps += 1;
                    t *= 0.5;
                }
            }
        };
        if next_value > value {
            monotone = false;
        }
        x = next_x;
        value = next_value;
        grad = next_grad;
        iterations += 1;
    }

    let grad_norm2 = grad.norm();
    Ok(InnerResult {
        x_final: x,
        value_start,
        value_final: value,
        grad_norm2,
        iterations,
        rejected_steps,
        oracle_calls,
        decrease: value_start - value,
        accepted: grad_norm2 <= task.eps,
        monotone,
    })
}
