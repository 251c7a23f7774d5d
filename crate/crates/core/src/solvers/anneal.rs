//! Metropolis simulated annealing, in two move sets: single-bit flips on a
//! QUBO, and cardinality-preserving swaps on the feasible subsets.
//!
//! Both run `reads` independent chains under geometric cooling. Chains keep
//! their energy incrementally via local fields (O(1) proposal cost, O(E)
//! update on acceptance) and re-evaluate their best state exactly at the
//! end, so reported energies carry no accumulated drift. Reads may execute
//! on any number of threads with identical results: read `r` owns the RNG
//! stream `seed ^ r` and results are folded in read order.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::{finish_report, read_rng, AnnealSchedule, SolveReport, SolverError};
use crate::model::{
    linear_objective_coeffs, objective_components, Assignment, ProblemInstance, Weights,
};
use crate::qubo::{build_qubo, Qubo};
use crate::scalar::Scalar;

/// Raw annealer output, before any objective bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealOutcome<T> {
    pub best: Assignment,
    /// Exact energy of `best`; equals `min(read_energies)`.
    pub best_energy: T,
    /// Exact best energy of each read, in read order.
    pub read_energies: Vec<T>,
}

/// Metropolis acceptance: downhill always, uphill with probability
/// `exp(-delta / t)`. Draws from the RNG only on uphill proposals.
fn accept<T: Scalar>(delta: T, t: f64, rng: &mut rand_chacha::ChaCha8Rng) -> bool {
    delta <= T::zero() || rng.gen::<f64>() < (-delta.to_f64().unwrap_or(f64::INFINITY) / t).exp()
}

fn fold_best<T: Scalar>(results: Vec<(T, Assignment)>) -> AnnealOutcome<T> {
    let mut best_idx = 0;
    for (r, (e, _)) in results.iter().enumerate() {
        if *e < results[best_idx].0 {
            best_idx = r;
        }
    }
    let read_energies: Vec<T> = results.iter().map(|(e, _)| *e).collect();
    let (best_energy, best) = results[best_idx].clone();
    AnnealOutcome {
        best,
        best_energy,
        read_energies,
    }
}

/// Anneal a QUBO with single-bit-flip moves.
///
/// Each read starts from the all-zeros state (the high initial temperature
/// randomizes it within the first sweeps) and performs one proposal per
/// variable per sweep, in index order.
pub fn anneal_qubo<T: Scalar>(q: &Qubo<T>, sched: &AnnealSchedule) -> AnnealOutcome<T> {
    let n = q.num_vars();
    let mut couplings = vec![T::zero(); n * n];
    for (&(i, j), &c) in q.quadratic() {
        couplings[i * n + j] = c;
        couplings[j * n + i] = c;
    }
    let temps = sched.temperatures();

    let results: Vec<(T, Assignment)> = (0..sched.reads())
        .into_par_iter()
        .map(|r| qubo_chain(q, &couplings, &temps, read_rng(sched.seed(), r)))
        .collect();
    fold_best(results)
}

fn qubo_chain<T: Scalar>(
    q: &Qubo<T>,
    couplings: &[T],
    temps: &[f64],
    mut rng: rand_chacha::ChaCha8Rng,
) -> (T, Assignment) {
    let n = q.num_vars();
    let mut x = vec![false; n];
    // field[j]: energy change of setting bit j, given the rest of x.
    let mut field: Vec<T> = q.linear().to_vec();
    let mut energy = q.offset();
    let mut best_bits = x.clone();
    let mut best_energy = energy;

    for &t in temps {
        for j in 0..n {
            let delta = if x[j] { -field[j] } else { field[j] };
            if accept(delta, t, &mut rng) {
                x[j] = !x[j];
                energy = energy + delta;
                let sign = if x[j] { T::one() } else { -T::one() };
                let row = &couplings[j * n..(j + 1) * n];
                for (i, f) in field.iter_mut().enumerate() {
                    if i != j {
                        *f = *f + sign * row[i];
                    }
                }
                if energy < best_energy {
                    best_energy = energy;
                    best_bits.copy_from_slice(&x);
                }
            }
        }
    }

    let best = Assignment::from_bits(best_bits);
    let exact = q.energy(&best).expect("chain state matches model size");
    (exact, best)
}

/// Compile the instance to a QUBO, anneal it, and report in objective terms.
///
/// `best_energy` and `read_energies` are QUBO energies (objective plus
/// cardinality penalty); `best_objective` is the penalty-free breakdown.
pub fn solve_sa_qubo<T: Scalar>(
    inst: &ProblemInstance<T>,
    w: &Weights<T>,
    sched: &AnnealSchedule,
) -> Result<SolveReport<T>, SolverError> {
    let started = Instant::now();
    let q = build_qubo(inst, w)?;
    let out = anneal_qubo(&q, sched);
    Ok(finish_report(
        "sa-qubo",
        sched.seed(),
        inst,
        w,
        out.best,
        out.best_energy,
        out.read_energies,
        started,
    )?)
}

/// Anneal over feasible subsets only: every move swaps one selected
/// candidate for one unselected, so `sum(x) = cs_count` always holds and
/// energies are plain objective totals. One sweep is `E` proposals.
pub fn solve_sa_swap<T: Scalar>(
    inst: &ProblemInstance<T>,
    w: &Weights<T>,
    sched: &AnnealSchedule,
) -> Result<SolveReport<T>, SolverError> {
    let started = Instant::now();
    w.validate()?;
    let e = inst.candidate_count();
    let cs = inst.cs_count();

    if cs == e {
        // One feasible state; nothing to search.
        let best = Assignment::from_bits(vec![true; e]);
        let z = objective_components(inst, w, &best)?.total;
        let read_energies = vec![z; sched.reads()];
        return Ok(finish_report(
            "sa-swap",
            sched.seed(),
            inst,
            w,
            best,
            z,
            read_energies,
            started,
        )?);
    }

    let a = linear_objective_coeffs(inst, w);
    let mut b = vec![T::zero(); e * e];
    for i in 0..e {
        for j in 0..e {
            b[i * e + j] = -(w.gamma3 * inst.pair_dist().get(i, j));
        }
    }
    let temps = sched.temperatures();

    let results: Vec<(T, Assignment)> = (0..sched.reads())
        .into_par_iter()
        .map(|r| {
            let sel = swap_chain(e, cs, &a, &b, &temps, read_rng(sched.seed(), r));
            let x = Assignment::from_selected(&sel, e);
            let z = objective_components(inst, w, &x)
                .expect("chain subset matches instance size")
                .total;
            (z, x)
        })
        .collect();
    let out = fold_best(results);

    Ok(finish_report(
        "sa-swap",
        sched.seed(),
        inst,
        w,
        out.best,
        out.best_energy,
        out.read_energies,
        started,
    )?)
}

fn swap_chain<T: Scalar>(
    e: usize,
    cs: usize,
    a: &[T],
    b: &[T],
    temps: &[f64],
    mut rng: rand_chacha::ChaCha8Rng,
) -> Vec<usize> {
    // Uniform random feasible start.
    let mut sel: Vec<usize> = rand::seq::index::sample(&mut rng, e, cs).into_vec();
    let mut is_sel = vec![false; e];
    for &j in &sel {
        is_sel[j] = true;
    }
    let mut unsel: Vec<usize> = (0..e).filter(|&j| !is_sel[j]).collect();

    // g[j] = sum over selected i of b[i][j].
    let mut g = vec![T::zero(); e];
    for (j, gj) in g.iter_mut().enumerate() {
        let mut s = T::zero();
        for &i in &sel {
            s = s + b[i * e + j];
        }
        *gj = s;
    }
    let mut z = T::zero();
    for (t, &i) in sel.iter().enumerate() {
        z = z + a[i];
        for &j in &sel[t + 1..] {
            z = z + b[i * e + j];
        }
    }

    let mut best_sel = sel.clone();
    let mut best_z = z;

    for &t in temps {
        for _ in 0..e {
            let ui = rng.gen_range(0..cs);
            let vi = rng.gen_range(0..e - cs);
            let u = sel[ui];
            let v = unsel[vi];
            // Replace u by v: b is zero-diagonal and symmetric, and u is
            // still counted inside g[v], hence the -b[u][v] correction.
            let delta = a[v] - a[u] + g[v] - g[u] - b[u * e + v];
            if accept(delta, t, &mut rng) {
                sel[ui] = v;
                unsel[vi] = u;
                for (j, gj) in g.iter_mut().enumerate() {
                    *gj = *gj + b[v * e + j] - b[u * e + j];
                }
                z = z + delta;
                if z < best_z {
                    best_z = z;
                    best_sel.copy_from_slice(&sel);
                }
            }
        }
    }

    best_sel.sort_unstable();
    best_sel
}
