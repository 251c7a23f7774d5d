//! Baselines the annealers must beat: greedy forward selection and uniform
//! random sampling of feasible subsets.

use std::time::Instant;

use super::{finish_report, read_rng, SolveReport, SolverError};
use crate::model::{
    linear_objective_coeffs, objective_components, Assignment, ProblemInstance, Weights,
};
use crate::scalar::Scalar;

/// Forward greedy: `cs_count` rounds, each adding the candidate that
/// minimizes the objective of the enlarged selection, lowest index on ties.
pub fn solve_greedy<T: Scalar>(
    inst: &ProblemInstance<T>,
    w: &Weights<T>,
) -> Result<SolveReport<T>, SolverError> {
    let started = Instant::now();
    w.validate()?;
    let e = inst.candidate_count();
    let a = linear_objective_coeffs(inst, w);

    let mut selected: Vec<usize> = Vec::with_capacity(inst.cs_count());
    let mut in_sel = vec![false; e];
    for _ in 0..inst.cs_count() {
        let mut best_j = usize::MAX;
        let mut best_delta = T::infinity();
        for j in 0..e {
            if in_sel[j] {
                continue;
            }
            let mut delta = a[j];
            for &i in &selected {
                delta = delta - w.gamma3 * inst.pair_dist().get(i, j);
            }
            if delta < best_delta {
                best_delta = delta;
                best_j = j;
            }
        }
        selected.push(best_j);
        in_sel[best_j] = true;
    }
    selected.sort_unstable();

    let best = Assignment::from_selected(&selected, e);
    let total = objective_components(inst, w, &best)?.total;
    Ok(finish_report(
        "greedy",
        0,
        inst,
        w,
        best,
        total,
        vec![],
        started,
    )?)
}

/// Uniform random feasible subsets, best of `reads`; read `r` draws from the
/// stream `seed ^ r` like the annealers, so results are thread-independent.
pub fn solve_random<T: Scalar>(
    inst: &ProblemInstance<T>,
    w: &Weights<T>,
    reads: usize,
    seed: u64,
) -> Result<SolveReport<T>, SolverError> {
    let started = Instant::now();
    w.validate()?;
    if reads == 0 {
        return Err(SolverError::BadSchedule("reads must be >= 1".into()));
    }
    let e = inst.candidate_count();
    let cs = inst.cs_count();

    let mut read_energies = Vec::with_capacity(reads);
    let mut best: Option<(T, Assignment)> = None;
    for r in 0..reads {
        let mut rng = read_rng(seed, r);
        let mut sel = rand::seq::index::sample(&mut rng, e, cs).into_vec();
        sel.sort_unstable();
        let x = Assignment::from_selected(&sel, e);
        let z = objective_components(inst, w, &x)?.total;
        read_energies.push(z);
        if best.as_ref().is_none_or(|(bz, _)| z < *bz) {
            best = Some((z, x));
        }
    }
    let (best_energy, best) = best.expect("reads >= 1");
    Ok(finish_report(
        "random",
        seed,
        inst,
        w,
        best,
        best_energy,
        read_energies,
        started,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{random_instance, toy_instance, toy_weights};
    use crate::solvers::solve_exact;

    #[test]
    fn greedy_picks_candidate_zero_on_toy() {
        let r = solve_greedy(&toy_instance(), &toy_weights()).unwrap();
        assert_eq!(r.best.selected(), vec![0]);
        assert_eq!(r.best_objective.total, 1.0);
        assert!(r.feasible);
        assert_eq!(r.solver_name, "greedy");
    }

    #[test]
    fn greedy_never_beats_exact() {
        for seed in 0..40u64 {
            let e = 4 + (seed as usize % 7);
            let cs = 1 + (seed as usize % 4.min(e));
            let inst = random_instance(seed, 3, 2, e, cs);
            let w = Weights::auto_for(&inst);
            let g = solve_greedy(&inst, &w).unwrap();
            let x = solve_exact(&inst, &w).unwrap();
            assert!(
                g.best_objective.total >= x.best_objective.total - 1e-9,
                "seed {seed}"
            );
            assert!(g.feasible);
        }
    }

    #[test]
    fn greedy_equals_exact_for_single_station() {
        for seed in 50..70u64 {
            let inst = random_instance(seed, 4, 2, 8, 1);
            let w = Weights::auto_for(&inst);
            let g = solve_greedy(&inst, &w).unwrap();
            let x = solve_exact(&inst, &w).unwrap();
            assert_eq!(g.best.selected(), x.best.selected(), "seed {seed}");
        }
    }

    #[test]
    fn random_is_deterministic_and_feasible() {
        let inst = random_instance(8, 3, 2, 9, 3);
        let w = Weights::auto_for(&inst);
        let r1 = solve_random(&inst, &w, 32, 4).unwrap();
        let r2 = solve_random(&inst, &w, 32, 4).unwrap();
        assert_eq!(r1.best, r2.best);
        assert_eq!(r1.read_energies, r2.read_energies);
        assert!(r1.feasible);
        assert_eq!(r1.read_energies.len(), 32);
        let min = r1
            .read_energies
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(r1.best_energy, min);
        assert!(r1.best_energy >= solve_exact(&inst, &w).unwrap().best_energy - 1e-9);
    }

    #[test]
    fn random_rejects_zero_reads() {
        let inst = toy_instance();
        assert!(matches!(
            solve_random(&inst, &toy_weights(), 0, 1),
            Err(SolverError::BadSchedule(_))
        ));
    }
}
