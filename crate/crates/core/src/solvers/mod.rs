//! Placement solvers: exact enumeration, two simulated annealers, and the
//! greedy/random baselines, all reporting through one [`SolveReport`] shape.
//!
//! Every stochastic solver is deterministic for a fixed seed and thread
//! count independent: read `r` draws from its own RNG stream seeded with
//! `seed ^ r`, and results are folded in read order.

mod anneal;
mod baseline;
mod exact;

pub use anneal::{anneal_qubo, solve_sa_qubo, solve_sa_swap, AnnealOutcome};
pub use baseline::{solve_greedy, solve_random};
pub use exact::{binomial, solve_exact, solve_exact_with_budget, DEFAULT_ENUM_BUDGET};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::model::{
    objective_components, Assignment, ModelError, ObjectiveTerms, ProblemInstance, Weights,
};
use crate::qubo::Qubo;
use crate::scalar::Scalar;

/// Solver failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("enumeration budget exceeded: C({e}, {cs}) = {combinations} > {budget}")]
    BudgetExceeded {
        e: usize,
        cs: usize,
        combinations: u128,
        budget: u128,
    },
    #[error("invalid anneal schedule: {0}")]
    BadSchedule(String),
    #[error("cannot pick a best report from an empty list")]
    EmptyReportList,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Cooling law for the annealers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cooling {
    #[default]
    Geometric,
}

/// Annealing parameters: temperature range, sweeps per read, read count,
/// and the base RNG seed. Construct via [`AnnealSchedule::new`] or the
/// `default_for_*` helpers; fields stay consistent by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    t_initial: f64,
    t_final: f64,
    sweeps: usize,
    reads: usize,
    seed: u64,
    cooling: Cooling,
}

/// Default reads per solve; the pipeline takes the best of these.
pub const DEFAULT_READS: usize = 1000;
/// Default full sweeps per read.
pub const DEFAULT_SWEEPS: usize = 1000;

impl AnnealSchedule {
    pub fn new(
        t_initial: f64,
        t_final: f64,
        sweeps: usize,
        reads: usize,
        seed: u64,
    ) -> Result<Self, SolverError> {
        if !t_initial.is_finite() || t_initial <= 0.0 {
            return Err(SolverError::BadSchedule(format!(
                "t_initial = {t_initial} must be finite and > 0"
            )));
        }
        if !t_final.is_finite() || t_final <= 0.0 {
            return Err(SolverError::BadSchedule(format!(
                "t_final = {t_final} must be finite and > 0"
            )));
        }
        if t_final > t_initial {
            return Err(SolverError::BadSchedule(format!(
                "t_final = {t_final} exceeds t_initial = {t_initial}"
            )));
        }
        if sweeps == 0 {
            return Err(SolverError::BadSchedule("sweeps must be >= 1".into()));
        }
        if reads == 0 {
            return Err(SolverError::BadSchedule("reads must be >= 1".into()));
        }
        Ok(Self {
            t_initial,
            t_final,
            sweeps,
            reads,
            seed,
            cooling: Cooling::Geometric,
        })
    }

    /// Default schedule for a QUBO: start at the largest coefficient
    /// magnitude (so early sweeps accept almost anything), finish three
    /// decades colder.
    pub fn default_for_qubo<T: Scalar>(q: &Qubo<T>, seed: u64) -> Self {
        Self::from_scale(q.max_abs_coefficient().to_f64().unwrap_or(0.0), seed)
    }

    /// Default schedule for the swap annealer: the scale is the largest
    /// magnitude among the objective's linear and pairwise coefficients.
    pub fn default_for_instance<T: Scalar>(inst: &ProblemInstance<T>, w: &Weights<T>) -> Self {
        Self::default_for_instance_seeded(inst, w, 0)
    }

    pub fn default_for_instance_seeded<T: Scalar>(
        inst: &ProblemInstance<T>,
        w: &Weights<T>,
        seed: u64,
    ) -> Self {
        let mut m = T::zero();
        for a in crate::model::linear_objective_coeffs(inst, w) {
            m = m.max(a.abs());
        }
        let e = inst.candidate_count();
        for i in 0..e {
            for j in (i + 1)..e {
                m = m.max((w.gamma3 * inst.pair_dist().get(i, j)).abs());
            }
        }
        Self::from_scale(m.to_f64().unwrap_or(0.0), seed)
    }

    fn from_scale(scale: f64, seed: u64) -> Self {
        let t_initial = if scale > 0.0 { scale } else { 1.0 };
        Self::new(
            t_initial,
            1e-3 * t_initial,
            DEFAULT_SWEEPS,
            DEFAULT_READS,
            seed,
        )
        .expect("scale-derived schedule is valid")
    }

    pub fn with_reads(mut self, reads: usize) -> Result<Self, SolverError> {
        if reads == 0 {
            return Err(SolverError::BadSchedule("reads must be >= 1".into()));
        }
        self.reads = reads;
        Ok(self)
    }

    pub fn with_sweeps(mut self, sweeps: usize) -> Result<Self, SolverError> {
        if sweeps == 0 {
            return Err(SolverError::BadSchedule("sweeps must be >= 1".into()));
        }
        self.sweeps = sweeps;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn t_initial(&self) -> f64 {
        self.t_initial
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn reads(&self) -> usize {
        self.reads
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cooling(&self) -> Cooling {
        self.cooling
    }

    /// One temperature per sweep, geometric from `t_initial` down to
    /// `t_final` (a single sweep stays at `t_initial`).
    pub(crate) fn temperatures(&self) -> Vec<f64> {
        let n = self.sweeps;
        if n == 1 {
            return vec![self.t_initial];
        }
        let ln_i = self.t_initial.ln();
        let ln_f = self.t_final.ln();
        (0..n)
            .map(|k| {
                let frac = k as f64 / (n - 1) as f64;
                (ln_i + (ln_f - ln_i) * frac).exp()
            })
            .collect()
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T> {
    pub solver_name: String,
    pub seed: u64,
    /// Best assignment found (all candidates, one bit each).
    pub best: Assignment,
    /// Energy the solver minimized: QUBO energy for `sa-qubo`, objective
    /// total for the feasible-set solvers. Equals `min(read_energies)`
    /// whenever reads are present.
    pub best_energy: T,
    /// Objective breakdown of `best`, always in model units.
    pub best_objective: ObjectiveTerms<T>,
    /// Whether `best` selects exactly `cs_count` candidates.
    pub feasible: bool,
    /// Per-read best energies, in read order; empty for deterministic solvers.
    pub read_energies: Vec<T>,
    /// Seconds spent solving; excluded from serialized solution files.
    pub wall_time: f64,
}

/// Derived RNG stream for one read.
pub(crate) fn read_rng(seed: u64, read: usize) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ read as u64)
}

/// Assemble a report, evaluating the canonical objective of `best`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn finish_report<T: Scalar>(
    solver_name: &str,
    seed: u64,
    inst: &ProblemInstance<T>,
    w: &Weights<T>,
    best: Assignment,
    best_energy: T,
    read_energies: Vec<T>,
    started: Instant,
) -> Result<SolveReport<T>, ModelError> {
    let best_objective = objective_components(inst, w, &best)?;
    let feasible = best.count_selected() == inst.cs_count();
    Ok(SolveReport {
        solver_name: solver_name.to_string(),
        seed,
        best,
        best_energy,
        best_objective,
        feasible,
        read_energies,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// Pick the winner from several reports: the feasible one with the lowest
/// objective total, or, if none is feasible, the lowest `best_energy`.
/// Earliest report wins ties.
pub fn best_of<T: Scalar>(reports: &[SolveReport<T>]) -> Result<&SolveReport<T>, SolverError> {
    if reports.is_empty() {
        return Err(SolverError::EmptyReportList);
    }
    let mut winner: Option<&SolveReport<T>> = None;
    for r in reports.iter().filter(|r| r.feasible) {
        if winner.is_none_or(|w| r.best_objective.total < w.best_objective.total) {
            winner = Some(r);
        }
    }
    if winner.is_none() {
        for r in reports {
            if winner.is_none_or(|w| r.best_energy < w.best_energy) {
                winner = Some(r);
            }
        }
    }
    Ok(winner.expect("non-empty list yields a winner"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{toy_instance, toy_weights};

    #[test]
    fn schedule_rejects_bad_parameters() {
        assert!(AnnealSchedule::new(0.0, 0.1, 10, 10, 0).is_err());
        assert!(AnnealSchedule::new(1.0, 0.0, 10, 10, 0).is_err());
        assert!(AnnealSchedule::new(1.0, 2.0, 10, 10, 0).is_err());
        assert!(AnnealSchedule::new(1.0, 0.1, 0, 10, 0).is_err());
        assert!(AnnealSchedule::new(1.0, 0.1, 10, 0, 0).is_err());
        assert!(AnnealSchedule::new(1.0, 1.0, 1, 1, 0).is_ok());
    }

    #[test]
    fn temperatures_are_geometric_and_bounded() {
        let s = AnnealSchedule::new(8.0, 1.0, 4, 1, 0).unwrap();
        let t = s.temperatures();
        assert_eq!(t.len(), 4);
        assert!((t[0] - 8.0).abs() < 1e-12);
        assert!((t[3] - 1.0).abs() < 1e-12);
        // Constant ratio between consecutive temperatures.
        let r0 = t[1] / t[0];
        let r1 = t[2] / t[1];
        let r2 = t[3] / t[2];
        assert!((r0 - r1).abs() < 1e-12 && (r1 - r2).abs() < 1e-12);

        let single = AnnealSchedule::new(8.0, 1.0, 1, 1, 0).unwrap();
        assert_eq!(single.temperatures(), vec![8.0]);
    }

    #[test]
    fn default_schedule_tracks_qubo_scale() {
        let inst = toy_instance();
        let w = crate::model::Weights::new(1.0, 1.0, 1.0, 10.0).unwrap();
        let q = crate::qubo::build_qubo(&inst, &w).unwrap();
        let s = AnnealSchedule::default_for_qubo(&q, 7);
        assert_eq!(s.t_initial(), 14.0); // largest magnitude: the pair term
        assert_eq!(s.t_final(), 14.0e-3);
        assert_eq!(s.sweeps(), DEFAULT_SWEEPS);
        assert_eq!(s.reads(), DEFAULT_READS);
        assert_eq!(s.seed(), 7);
    }

    fn report(name: &str, total: f64, energy: f64, feasible: bool) -> SolveReport<f64> {
        let inst = toy_instance();
        let x = if feasible {
            Assignment::from_selected(&[0], 2)
        } else {
            Assignment::zeros(2)
        };
        let mut r = finish_report(
            name,
            0,
            &inst,
            &toy_weights(),
            x,
            energy,
            vec![],
            Instant::now(),
        )
        .unwrap();
        r.best_objective.total = total;
        r
    }

    #[test]
    fn best_of_prefers_feasible_low_objective() {
        let reports = [report("a", 3.0, 3.0, true), report("b", 1.0, 1.0, true)];
        let out = best_of(&reports).unwrap();
        assert_eq!(out.solver_name, "b");
    }

    #[test]
    fn best_of_feasibility_dominates_energy() {
        let reports = [
            report("a", -5.0, -5.0, false),
            report("b", 10.0, 10.0, true),
        ];
        let out = best_of(&reports).unwrap();
        assert_eq!(out.solver_name, "b");
    }

    #[test]
    fn best_of_single_and_empty() {
        let a = report("a", 2.0, 2.0, true);
        assert_eq!(best_of(std::slice::from_ref(&a)).unwrap().solver_name, "a");
        assert_eq!(
            best_of::<f64>(&[]).unwrap_err(),
            SolverError::EmptyReportList
        );
    }

    #[test]
    fn best_of_all_infeasible_takes_lowest_energy() {
        let reports = [
            report("a", 0.0, 4.0, false),
            report("b", 0.0, -2.0, false),
            report("c", 0.0, -2.0, false), // tie: earliest wins
        ];
        let out = best_of(&reports).unwrap();
        assert_eq!(out.solver_name, "b");
        assert!(!out.feasible);
    }
}
