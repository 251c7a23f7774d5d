//! Exact solver: lexicographic enumeration of all size-CS candidate subsets
//! with incremental objective evaluation.

use std::time::Instant;

use super::{finish_report, SolveReport, SolverError};
use crate::model::{
    linear_objective_coeffs, objective_components, Assignment, ProblemInstance, Weights,
};
use crate::scalar::Scalar;

/// Enumeration cap for [`solve_exact`]: refuse instances with more subsets.
pub const DEFAULT_ENUM_BUDGET: u128 = 50_000_000;

/// C(n, k) without overflow; `None` if it exceeds `u128`.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (n - i) is always divisible by i + 1 here.
        c = c.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(c)
}

/// [`solve_exact_with_budget`] at the default budget.
pub fn solve_exact<T: Scalar>(
    inst: &ProblemInstance<T>,
    w: &Weights<T>,
) -> Result<SolveReport<T>, SolverError> {
    solve_exact_with_budget(inst, w, DEFAULT_ENUM_BUDGET)
}

/// Enumerate every size-CS subset and return the objective minimizer.
///
/// Subsets are visited in lexicographic index order and the running best is
/// replaced only on strict improvement, so ties resolve to the
/// lexicographically smallest index set. Each enumeration step re-evaluates
/// only the suffix of the combination that changed, costing O(CS) for the
/// common last-position advance.
pub fn solve_exact_with_budget<T: Scalar>(
    inst: &ProblemInstance<T>,
    w: &Weights<T>,
    budget: u128,
) -> Result<SolveReport<T>, SolverError> {
    let started = Instant::now();
    w.validate()?;
    let e = inst.candidate_count();
    let cs = inst.cs_count();
    let combinations = binomial(e, cs).unwrap_or(u128::MAX);
    if combinations > budget {
        return Err(SolverError::BudgetExceeded {
            e,
            cs,
            combinations,
            budget,
        });
    }

    let a = linear_objective_coeffs(inst, w);
    // Dense pairwise coefficients: b[i*e + j] = -gamma3 * q[i][j].
    let mut b = vec![T::zero(); e * e];
    for i in 0..e {
        for j in 0..e {
            b[i * e + j] = -(w.gamma3 * inst.pair_dist().get(i, j));
        }
    }

    // prefix[t + 1] = objective of the first t + 1 chosen indices.
    let mut c: Vec<usize> = (0..cs).collect();
    let mut prefix = vec![T::zero(); cs + 1];

    fn refresh_suffix<T: Scalar>(
        a: &[T],
        b: &[T],
        e: usize,
        c: &[usize],
        prefix: &mut [T],
        from: usize,
    ) {
        for s in from..c.len() {
            let mut v = a[c[s]];
            for u in 0..s {
                v = v + b[c[u] * e + c[s]];
            }
            prefix[s + 1] = prefix[s] + v;
        }
    }

    refresh_suffix(&a, &b, e, &c, &mut prefix, 0);
    let mut best_total = prefix[cs];
    let mut best_c = c.clone();

    loop {
        // Rightmost position that can still advance.
        let mut t = cs;
        while t > 0 && c[t - 1] == e - cs + (t - 1) {
            t -= 1;
        }
        if t == 0 {
            break;
        }
        let t = t - 1;
        c[t] += 1;
        for s in (t + 1)..cs {
            c[s] = c[s - 1] + 1;
        }
        refresh_suffix(&a, &b, e, &c, &mut prefix, t);
        if prefix[cs] < best_total {
            best_total = prefix[cs];
            best_c = c.clone();
        }
    }

    let best = Assignment::from_selected(&best_c, e);
    // Report the canonical evaluation, not the incrementally accumulated one.
    let total = objective_components(inst, w, &best)?.total;
    Ok(finish_report(
        "exact",
        0,
        inst,
        w,
        best,
        total,
        vec![],
        started,
    )?)
}
