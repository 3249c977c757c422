//! Adaptive cubic regularization with an exact subproblem solver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{finite_pair, InnerError, InnerResult, InnerTask, SmoothFunction};

/// Floor on the regularization weight.
pub const M_MIN: f64 = 1e-8;
/// Cap on accepted plus rejected steps.
pub const MAX_CUBIC_ITERATIONS: u64 = 1_000_000;

const ACCEPT_RATIO: f64 = 0.25;
const SECULAR_TOL: f64 = 1e-12;
const MAX_SECULAR_ITERATIONS: usize = 500;

/// `⟨g,s⟩ + ½⟨Hs,s⟩ + (M/6)‖s‖³`.
pub fn cubic_model(g: &DVector<f64>, h: &DMatrix<f64>, m: f64, s: &DVector<f64>) -> f64 {
    g.dot(s) + 0.5 * (h * s).dot(s) + m / 6.0 * s.norm().powi(3)
}

/// Global minimizer of the cubic model.
///
/// The minimizer solves `(H + νI)s = −g` with `ν = M‖s‖/2` and
/// `H + νI ⪰ 0`. In the eigenbasis of `H` this reduces to the scalar
/// equation `‖s(ν)‖ = 2ν/M` on `ν ≥ max(0, −λ_min)`, solved by
/// safeguarded Newton steps inside a bisection bracket.
pub fn cubic_step(g: &DVector<f64>, h: &DMatrix<f64>, m: f64) -> Result<DVector<f64>, InnerError> {
    let n = g.len();
    if h.nrows() != n || h.ncols() != n {
        return Err(InnerError::InvalidTask(format!(
            "Hessian is {}×{}, expected {n}×{n}",
            h.nrows(),
            h.ncols()
        )));
    }
    if !(m.is_finite() && m > 0.0) {
        return Err(InnerError::InvalidTask(format!("regularization weight must be positive, got {m}")));
    }
    if !h.iter().all(|v| v.is_finite()) {
        return Err(InnerError::EigendecompositionFailure("Hessian has non-finite entries".into()));
    }
    if g.iter().all(|&v| v == 0.0) {
        // Stationary: s = 0 is optimal unless H has negative curvature.
        let eig = SymmetricEigen::new(h.clone());
        let (imin, lmin) = eig.eigenvalues.argmin();
        if lmin >= 0.0 {
            return Ok(DVector::zeros(n));
        }
        return Ok(eig.eigenvectors.column(imin) * (-2.0 * lmin / m));
    }
    let sym = (h + h.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 10_000)
        .ok_or_else(|| InnerError::EigendecompositionFailure("eigen solver did not converge".into()))?;
    let lambdas = &eig.eigenvalues;
    let q = &eig.eigenvectors;
    if !lambdas.iter().all(|v| v.is_finite()) {
        return Err(InnerError::EigendecompositionFailure("non-finite eigenvalues".into()));
    }
    let gh = q.tr_mul(g);
    let (imin, lmin) = lambdas.argmin();
    let nu_lo = (-lmin).max(0.0);
    let scale = lambdas.amax().max(1.0);
    let g_norm = g.norm();

    // Rows whose coefficients vanish on the bottom eigenspace.
    let bottom: Vec<bool> = lambdas
        .iter()
        .map(|&l| l - lmin <= 1e-12 * scale)
        .collect();
    let bottom_coeff_sq: f64 = gh
        .iter()
        .zip(&bottom)
        .filter(|(_, &b)| b)
        .map(|(c, _)| c * c)
        .sum();

    let step_norm = |nu: f64, skip_bottom: bool| -> f64 {
        gh.iter()
            .zip(lambdas.iter())
            .zip(&bottom)
            .filter(|(_, &b)| !(skip_bottom && b))
            .map(|((c, l), _)| {
                let d = l + nu;
                c * c / (d * d)
            })
            .sum::<f64>()
            .sqrt()
    };
    let assemble = |nu: f64, skip_bottom: bool| -> DVector<f64> {
        let coeffs = DVector::from_iterator(
            n,
            gh.iter().zip(lambdas.iter()).zip(&bottom).map(|((c, l), &b)| {
                if skip_bottom && b {
                    0.0
                } else {
                    -c / (l + nu)
                }
            }),
        );
        q * coeffs
    };

    // Hard case: g has (numerically) no component along the bottom
    // eigenvectors and the remaining step is shorter than 2ν_lo/M.
    if lmin < 0.0 && bottom_coeff_sq.sqrt() <= 1e-14 * g_norm {
        let partial = step_norm(nu_lo, true);
        let target = 2.0 * nu_lo / m;
        if partial <= target {
            let tau = (target * target - partial * partial).max(0.0).sqrt();
            let s = assemble(nu_lo, true) + q.column(imin) * tau;
            return Ok(s);
        }
    }

    let phi = |nu: f64| step_norm(nu, false) - 2.0 * nu / m;
    let dphi = |nu: f64| {
        let norm = step_norm(nu, false);
        let cubed: f64 = gh
            .iter()
            .zip(lambdas.iter())
            .map(|(c, l)| {
                let d = l + nu;
                c * c / (d * d * d)
            })
            .sum();
        -cubed / norm - 2.0 / m
    };

    // φ is convex and decreasing on (ν_lo, ∞) with φ(ν_lo+) > 0.
    let mut lo = nu_lo;
    let mut hi = nu_lo + (0.5 * m * g_norm).sqrt().max(1e-300);
    while phi(hi) > 0.0 {
        lo = hi;
        hi = nu_lo + 2.0 * (hi - nu_lo);
        if !hi.is_finite() {
            return Err(InnerError::EigendecompositionFailure("secular equation has no bracket".into()));
        }
    }
    let mut nu = 0.5 * (lo + hi);
    for _ in 0..MAX_SECULAR_ITERATIONS {
        let value = phi(nu);
        if value.abs() <= SECULAR_TOL * (2.0 * nu / m).max(1.0) {
            break;
        }
        if value > 0.0 {
            lo = nu;
        } else {
            hi = nu;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
        let newton = nu - value / dphi(nu);
        nu = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(assemble(nu, false))
}

/// Adaptive cubic regularization until `‖∇g‖₂ ≤ eps`.
///
/// Steps with actual decrease at least a quarter of the model decrease are
/// accepted and halve `M` (floored at [`M_MIN`]); rejected steps double it.
/// `iterations` counts accepted steps.
pub fn cubic_newton_solve<F: SmoothFunction + ?Sized>(
    task: &InnerTask<'_, F>,
) -> Result<InnerResult, InnerError> {
    task.check()?;
    let g = task.function;
    let cap = task.max_iterations.unwrap_or(MAX_CUBIC_ITERATIONS);
    let mut x = task.start.clone();
    let (mut value, mut grad) = g.value_and_gradient(&x)?;
    finite_pair(value, &grad)?;
    let mut hess = g.hessian(&x)?.ok_or(InnerError::MissingHessian)?;
    let value_start = value;
    let mut oracle_calls = 1u64;
    let mut iterations = 0u64;
    let mut rejected_steps = 0u64;
    let mut monotone = true;
    let mut weight = task.known_l.unwrap_or(1.0).max(M_MIN);

    loop {
        let grad_norm = grad.norm();
        if grad_norm <= task.eps {
            break;
        }
        if iterations + rejected_steps >= cap {
            return Err(InnerError::IterationCapExceeded { cap, grad_norm });
        }
        let s = cubic_step(&grad, &hess, weight)?;
        let predicted = -cubic_model(&grad, &hess, weight, &s);
        let trial = &x + &s;
        let (v, gr) = g.value_and_gradient(&trial)?;
        oracle_calls += 1;
        let ratio = (value - v) / predicted;
        if predicted > 0.0 && ratio >= ACCEPT_RATIO && gr.iter().all(|c| c.is_finite()) {
            if v > value {
                monotone = false;
            }
            hess = g.hessian(&trial)?.ok_or(InnerError::MissingHessian)?;
            x = trial;
            value = v;
            grad = gr;
            iterations += 1;
            weight = (0.5 * weight).max(M_MIN);
        } else {
            rejected_steps += 1;
            weight *= 2.0;
            if !weight.is_finite() {
                return Err(InnerError::NonFiniteValue("regularization weight"));
            }
        }
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
