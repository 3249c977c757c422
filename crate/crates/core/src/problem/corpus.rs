//! Built-in nonconvex test problems with analytic lower bounds and
//! Lipschitz constants.
//!
//! Names carry the dimension as a suffix: `simplex-cos-8`, `eq-cos-16`, ...
//! The equality-constrained quadratic with a known KKT pair is available as
//! `eq-qp-analytic` (n = 4) or `eq-qp-<n>`.

use nalgebra::{DMatrix, DVector};

use super::{ConstraintSet, ObjectiveKind, ObjectiveOracle, ProblemError, ProblemSpec};

pub const DEFAULT_DIMENSION: usize = 8;
pub const MAX_DIMENSION: usize = 64;
/// Frequency of the cosine perturbation.
pub const OMEGA: f64 = 4.0;

/// Families recognised by [`by_name`].
pub const FAMILIES: [&str; 5] = ["simplex-cos", "eq-cos", "eq-rosenbrock", "dup-eq", "eq-qp"];

fn check_dimension(n: usize) -> Result<(), ProblemError> {
    if (1..=MAX_DIMENSION).contains(&n) {
        Ok(())
    } else {
        Err(ProblemError::InvalidParameter(format!(
            "corpus dimension must lie in 1..={MAX_DIMENSION}, got {n}"
        )))
    }
}

// ½‖x‖² + Σ cos(ω x_j): f ≥ −n, ∇f is (1 + ω²)-Lipschitz and ∇²f is
// ω³-Lipschitz.
fn cos_objective_n(n: usize) -> Result<ObjectiveOracle, ProblemError> {
    let kind = ObjectiveKind::QuadraticCos {
        quadratic: 1.0,
        amplitude: 1.0,
        omega: OMEGA,
    };
    Ok(ObjectiveOracle::parametric(kind, -(n as f64))?
        .with_lipschitz(Some(1.0 + OMEGA * OMEGA), Some(OMEGA.powi(3))))
}

fn ones_row(n: usize) -> DMatrix<f64> {
    DMatrix::from_element(1, n, 1.0)
}

/// Stacks equality rows on top of the coordinate bounds `x ≥ 0`.
fn standard_form(eq: DMatrix<f64>, eq_rhs: DVector<f64>) -> Result<ConstraintSet, ProblemError> {
    let n = eq.ncols();
    let m_e = eq.nrows();
    let mut a = DMatrix::zeros(m_e + n, n);
    a.rows_mut(0, m_e).copy_from(&eq);
    a.rows_mut(m_e, n).fill_with_identity();
    let b = DVector::from_iterator(m_e + n, eq_rhs.iter().copied().chain(std::iter::repeat_n(0.0, n)));
    ConstraintSet::linear(a, b, m_e)
}

pub fn simplex_cos(n: usize) -> Result<ProblemSpec, ProblemError> {
    check_dimension(n)?;
    let constraints = standard_form(ones_row(n), DVector::from_element(1, 1.0))?;
    ProblemSpec::new(
        format!("simplex-cos-{n}"),
        cos_objective_n(n)?,
        constraints,
        DVector::from_element(n, 1.0 / n as f64),
    )
}

pub fn eq_cos(n: usize) -> Result<ProblemSpec, ProblemError> {
    check_dimension(n)?;
    let constraints = ConstraintSet::linear(ones_row(n), DVector::from_element(1, 1.0), 1)?;
    ProblemSpec::new(
        format!("eq-cos-{n}"),
        cos_objective_n(n)?,
        constraints,
        DVector::from_element(n, 1.0 / n as f64),
    )
}

/// Chained Rosenbrock on `Σ x_j = n`. Its gradient is only locally
/// Lipschitz, so no constants are declared.
pub fn eq_rosenbrock(n: usize) -> Result<ProblemSpec, ProblemError> {
    check_dimension(n)?;
    let objective =
        ObjectiveOracle::parametric(ObjectiveKind::Rosenbrock { a: 1.0, b: 100.0 }, 0.0)?;
    let constraints = ConstraintSet::linear(ones_row(n), DVector::from_element(1, n as f64), 1)?;
    // Alternating 1.5 / 0.5 pairs keep Σ x_j = n without starting at the minimizer.
    let x0 = DVector::from_fn(n, |j, _| {
        if n % 2 == 1 && j == n - 1 {
            1.0
        } else if j % 2 == 0 {
            1.5
        } else {
            0.5
        }
    });
    ProblemSpec::new(format!("eq-rosenbrock-{n}"), objective, constraints, x0)
}

/// `simplex-cos-n` with the equality row duplicated.
pub fn dup_eq(n: usize) -> Result<ProblemSpec, ProblemError> {
    check_dimension(n)?;
    let constraints = standard_form(
        DMatrix::from_element(2, n, 1.0),
        DVector::from_element(2, 1.0),
    )?;
    ProblemSpec::new(
        format!("dup-eq-{n}"),
        cos_objective_n(n)?,
        constraints,
        DVector::from_element(n, 1.0 / n as f64),
    )
}

/// `½‖x‖²` on `1ᵀx = 1`, whose KKT pair is `x = (1/n)·1`, `λ = 1/n`.
pub fn eq_qp(n: usize) -> Result<ProblemSpec, ProblemError> {
    check_dimension(n)?;
    let kind = ObjectiveKind::QuadraticCos {
        quadratic: 1.0,
        amplitude: 0.0,
        omega: 0.0,
    };
    let objective = ObjectiveOracle::parametric(kind, 0.0)?.with_lipschitz(Some(1.0), Some(0.0));
    let constraints = ConstraintSet::linear(ones_row(n), DVector::from_element(1, 1.0), 1)?;
    let name = if n == 4 {
        "eq-qp-analytic".to_string()
    } else {
        format!("eq-qp-{n}")
    };
    let mut x0 = DVector::zeros(n);
    x0[0] = 1.0;
    ProblemSpec::new(name, objective, constraints, x0)
}

/// The default corpus at `n = 8`, plus `eq-qp-analytic`.
pub fn corpus() -> Vec<ProblemSpec> {
    let n = DEFAULT_DIMENSION;
    [simplex_cos(n), eq_cos(n), eq_rosenbrock(n), dup_eq(n), eq_qp(4)]
        .into_iter()
        .map(|p| p.expect("built-in corpus problems are well formed"))
        .collect()
}

/// Resolves a corpus name such as `simplex-cos-16` or `eq-qp-analytic`.
pub fn by_name(name: &str) -> Result<ProblemSpec, ProblemError> {
    if name == "eq-qp-analytic" {
        return eq_qp(4);
    }
    let unknown = || ProblemError::UnknownProblem(name.to_string());
    let (family, dim) = name.rsplit_once('-').ok_or_else(unknown)?;
    if dim.is_empty() || !dim.bytes().all(|b| b.is_ascii_digit()) {
        return Err(unknown());
    }
    let n: usize = dim.parse().map_err(|_| unknown())?;
    match family {
        "simplex-cos" => simplex_cos(n),
        "eq-cos" => eq_cos(n),
        "eq-rosenbrock" => eq_rosenbrock(n),
        "dup-eq" => dup_eq(n),
        "eq-qp" => eq_qp(n),
        _ => Err(unknown()),
    }
}
