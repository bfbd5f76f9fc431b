//! Nelder-Mead simplex descent with the standard coefficient set.

use super::OptimizerError;

/// Reflection, expansion, contraction, and shrink coefficients.
const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

/// Offset added per coordinate to build the initial simplex around `x0`.
///
/// The numeric fitting path searches log-transformed positive coordinates,
/// where 0.5 means a factor `e^0.5 ~ 1.65` in the domain: large enough to
/// escape a flat start, small enough to stay in scale.
const INITIAL_STEP: f64 = 0.5;

/// Result of a simplex minimization.
#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    /// Best vertex found.
    pub x: Vec<f64>,
    /// Objective value at `x`.
    pub value: f64,
    /// Iterations performed.
    pub iterations: usize,
    /// Whether the simplex diameter fell below the tolerance before the
    /// iteration cap.
    pub converged: bool,
}

/// Minimizes `f` from `x0` by Nelder-Mead descent, stopping when the
/// simplex diameter drops below `tol` or after `max_iter` iterations
/// (flagged via [`SimplexOutcome::converged`], not fatal).
pub fn minimize_simplex(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<SimplexOutcome, OptimizerError> {
    if tol <= 0.0 {
        return Err(OptimizerError::NonPositiveTol(tol));
    }
    let eval = |x: &[f64]| -> Result<f64, OptimizerError> {
        let value = f(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(OptimizerError::NonFiniteObjective { value })
        }
    };
    let dim = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut vertex = x0.to_vec();
        vertex[i] += INITIAL_STEP;
        simplex.push(vertex);
    }
    let mut values = simplex
        .iter()
        .map(|v| eval(v))
        .collect::<Result<Vec<_>, _>>()?;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        sort_by_value(&mut simplex, &mut values);
        if diameter(&simplex) < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let worst = dim;
        let centroid = centroid_excluding_worst(&simplex);
        let reflected = blend(&centroid, &simplex[worst], 1.0 + ALPHA, -ALPHA);
        let f_reflected = eval(&reflected)?;

        if f_reflected < values[0] {
            let expanded = blend(&centroid, &reflected, 1.0 - GAMMA, GAMMA);
            let f_expanded = eval(&expanded)?;
            if f_expanded < f_reflected {
                replace(&mut simplex, &mut values, worst, expanded, f_expanded);
            } else {
                replace(&mut simplex, &mut values, worst, reflected, f_reflected);
            }
        } else if f_reflected < values[dim - 1] {
            replace(&mut simplex, &mut values, worst, reflected, f_reflected);
        } else {
            let (anchor, f_anchor) = if f_reflected < values[worst] {
                (reflected.clone(), f_reflected)
            } else {
                (simplex[worst].clone(), values[worst])
            };
            let contracted = blend(&centroid, &anchor, 1.0 - RHO, RHO);
            let f_contracted = eval(&contracted)?;
            if f_contracted < f_anchor {
                replace(&mut simplex, &mut values, worst, contracted, f_contracted);
            } else {
                for i in 1..=dim {
                    let shrunk = blend(&simplex[0], &simplex[i], 1.0 - SIGMA, SIGMA);
                    values[i] = eval(&shrunk)?;
                    simplex[i] = shrunk;
                }
            }
        }
    }
    sort_by_value(&mut simplex, &mut values);
    Ok(SimplexOutcome {
        x: simplex.swap_remove(0),
        value: values[0],
        iterations,
        converged,
    })
}

fn sort_by_value(simplex: &mut [Vec<f64>], values: &mut [f64]) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted_simplex: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    for (slot, vertex) in simplex.iter_mut().zip(sorted_simplex) {
        *slot = vertex;
    }
    values.copy_from_slice(&sorted_values);
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let mut widest: f64 = 0.0;
    for i in 0..simplex.len() {
        for j in (i + 1)..simplex.len() {
            let d: f64 = simplex[i]
                .iter()
                .zip(&simplex[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            widest = widest.max(d.sqrt());
        }
    }
    widest
}

fn centroid_excluding_worst(simplex: &[Vec<f64>]) -> Vec<f64> {
    let dim = simplex.len() - 1;
    let mut c = vec![0.0; dim];
    for vertex in &simplex[..dim] {
        for (slot, coord) in c.iter_mut().zip(vertex) {
            *slot += coord;
        }
    }
    for slot in &mut c {
        *slot /= dim as f64;
    }
    c
}

/// Componentwise `wa * a + wb * b`.
fn blend(a: &[f64], b: &[f64], wa: f64, wb: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect()
}

fn replace(simplex: &mut [Vec<f64>], values: &mut [f64], at: usize, x: Vec<f64>, fx: f64) {
    simplex[at] = x;
    values[at] = fx;
}
