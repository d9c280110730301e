//! Derivative-free minimizers for the angle search: COBYLA (Powell's
//! linear-approximation trust-region method, via the `cobyla` crate) and a
//! hand-rolled Nelder-Mead simplex. Both are deterministic for a fixed
//! starting point and count every distinct objective evaluation.

use std::cell::RefCell;
use std::collections::HashMap;

use argmin::core::{CostFunction, Executor, State};
use cobyla::CobylaSolver;

use crate::{Error, Result};

pub(crate) struct OptimizerOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Adapter with a memo table keyed on the exact bits of `x`.
///
/// The solver wrapper re-requests the cost of points it has already seen;
/// COBYLA itself never revisits a point, so the number of distinct points is
/// exactly its internal evaluation count.
struct MemoizedObjective<'a> {
    objective: &'a dyn Fn(&[f64]) -> f64,
    seen: RefCell<HashMap<Vec<u64>, f64>>,
}

impl MemoizedObjective<'_> {
    fn value_at(&self, x: &[f64]) -> f64 {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(&f) = self.seen.borrow().get(&key) {
            return f;
        }
        let f = (self.objective)(x);
        self.seen.borrow_mut().insert(key, f);
        f
    }

    fn evals(&self) -> usize {
        self.seen.borrow().len()
    }
}

impl CostFunction for &MemoizedObjective<'_> {
    type Param = Vec<f64>;
    type Output = Vec<f64>;

    fn cost(&self, x: &Self::Param) -> std::result::Result<Self::Output, argmin::core::Error> {
        Ok(vec![self.value_at(x)])
    }
}

/// COBYLA with initial trust radius `rho_beg`, stopping when the trust
/// region has shrunk to `tol` or the evaluation budget runs out. The search
/// is unconstrained.
pub(crate) fn minimize_cobyla(
    objective: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    max_evals: usize,
    rho_beg: f64,
    tol: f64,
) -> Result<OptimizerOutcome> {
    let memo = MemoizedObjective {
        objective,
        seen: RefCell::new(HashMap::new()),
    };
    let solver = CobylaSolver::new(x0.to_vec());
    let result = Executor::new(&memo, solver)
        .configure(|state| {
            let mut state = state
                .max_iters(2 * max_evals as u64)
                .maxfun(max_evals as u64)
                .iprint(0);
            state.rhobeg = rho_beg;
            state.rhoend = tol;
            state
        })
        .run()
        .map_err(|e| Error::OptimizerFailed(format!("COBYLA: {e}")))?;

    let state = result.state();
    let x = state
        .get_best_param()
        .ok_or_else(|| Error::OptimizerFailed("COBYLA produced no iterate".into()))?
        .clone();
    let value = memo.value_at(&x);
    Ok(OptimizerOutcome {
        x,
        value,
        evals: memo.evals(),
    })
}

/// Nelder-Mead with the standard coefficients (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2). Stops when both the function spread and the
/// simplex extent fall below `tol`, or at the evaluation budget.
pub(crate) fn minimize_nelder_mead(
    objective: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    max_evals: usize,
    step: f64,
    tol: f64,
) -> Result<OptimizerOutcome> {
    let dim = x0.len();
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        objective(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)));
    for i in 0..dim {
        if evals >= max_evals {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }

    while simplex.len() == dim + 1 && evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[dim].1 - simplex[0].1;
        let extent = simplex
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        if spread.abs() <= tol && extent <= tol {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|(x, _)| x[i]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let blend = |t: f64| -> Vec<f64> {
            (0..dim)
                .map(|i| centroid[i] + t * (centroid[i] - worst.0[i]))
                .collect()
        };

        let reflected = blend(1.0);
        let f_reflected = eval(&reflected, &mut evals);
        if f_reflected < simplex[0].1 {
            if evals < max_evals {
                let expanded = blend(2.0);
                let f_expanded = eval(&expanded, &mut evals);
                simplex[dim] = if f_expanded < f_reflected {
                    (expanded, f_expanded)
                } else {
                    (reflected, f_reflected)
                };
            } else {
                simplex[dim] = (reflected, f_reflected);
            }
            continue;
        }
        if f_reflected < simplex[dim - 1].1 {
            simplex[dim] = (reflected, f_reflected);
            continue;
        }
        if evals >= max_evals {
            break;
        }
        let contracted = blend(-0.5);
        let f_contracted = eval(&contracted, &mut evals);
        if f_contracted < worst.1 {
            simplex[dim] = (contracted, f_contracted);
            continue;
        }
        // Shrink toward the best vertex.
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            if evals >= max_evals {
                break;
            }
            for (xi, bi) in vertex.0.iter_mut().zip(&best) {
                *xi = bi + 0.5 * (*xi - bi);
            }
            vertex.1 = eval(&vertex.0, &mut evals);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Ok(OptimizerOutcome { x, value, evals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(x: &[f64]) -> f64 {
        (x[0] - 1.5).powi(2) + 2.0 * (x[1] + 0.5).powi(2) + 3.0
    }

    #[test]
    fn cobyla_finds_quadratic_minimum() {
        let out = minimize_cobyla(&quadratic, &[0.0, 0.0], 200, 0.5, 1e-6).unwrap();
        assert!((out.x[0] - 1.5).abs() < 1e-3);
        assert!((out.x[1] + 0.5).abs() < 1e-3);
        assert!((out.value - 3.0).abs() < 1e-5);
        assert!(out.evals <= 200);
    }

    #[test]
    fn cobyla_respects_budget() {
        let out = minimize_cobyla(&quadratic, &[4.0, 4.0], 5, 0.5, 1e-6).unwrap();
        assert_eq!(out.evals, 5);
    }

    #[test]
    fn cobyla_is_deterministic() {
        let a = minimize_cobyla(&quadratic, &[2.0, 2.0], 80, 0.5, 1e-4).unwrap();
        let b = minimize_cobyla(&quadratic, &[2.0, 2.0], 80, 0.5, 1e-4).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.evals, b.evals);
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let out = minimize_nelder_mead(&quadratic, &[0.0, 0.0], 400, 0.5, 1e-6).unwrap();
        assert!((out.x[0] - 1.5).abs() < 1e-3);
        assert!((out.x[1] + 0.5).abs() < 1e-3);
        assert!(out.evals <= 400);
    }

    #[test]
    fn nelder_mead_respects_budget() {
        for budget in [3, 5, 10] {
            let out = minimize_nelder_mead(&quadratic, &[4.0, 4.0], budget, 0.5, 1e-8).unwrap();
            assert!(out.evals <= budget, "evals {} > budget {budget}", out.evals);
        }
    }

    #[test]
    fn nelder_mead_is_deterministic() {
        let a = minimize_nelder_mead(&quadratic, &[2.0, -1.0], 150, 0.5, 1e-6).unwrap();
        let b = minimize_nelder_mead(&quadratic, &[2.0, -1.0], 150, 0.5, 1e-6).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.evals, b.evals);
    }
}
