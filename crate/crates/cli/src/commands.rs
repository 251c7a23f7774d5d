//! Command implementations and the error-to-exit-code mapping.

use std::fmt;

use evsite_core::distance::{
    build_matrices, cache_key, load_cache_if_match, save_cache, CacheError, DistanceBackend,
    DistanceError, Provenance,
};
use evsite_core::files::{
    read_instance, read_sites, read_solution, write_instance, write_solution, FormatError,
    SolutionFile,
};
use evsite_core::generator::{generate_grid_instance, GeneratorError, GridSpec, PLANAR_BACKEND};
use evsite_core::model::ModelError;
use evsite_core::report::{export_geojson, render_table, station_metrics, SolverInfo};
use evsite_core::{
    best_of, build_qubo, solve_exact, solve_greedy, solve_random, solve_sa_qubo, solve_sa_swap,
    AnnealSchedule, ProblemInstance, SiteKind, SolveReport, SolverError, Weights,
};

use crate::{BackendArg, DistArgs, ExportArgs, GenArgs, SolveArgs, SolverArg};

/// How a successfully completed command ended.
pub enum Outcome {
    Feasible,
    InfeasibleBest,
}

/// Failures grouped by exit code: validation problems (3) versus I/O and
/// network problems (5).
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 3,
            CliError::Io(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Io(msg) => f.write_str(msg),
        }
    }
}

impl From<GeneratorError> for CliError {
    fn from(err: GeneratorError) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(err: ModelError) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(err: SolverError) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<FormatError> for CliError {
    fn from(err: FormatError) -> Self {
        match err {
            FormatError::Io { .. } => CliError::Io(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<DistanceError> for CliError {
    fn from(err: DistanceError) -> Self {
        match err {
            DistanceError::NoCandidates | DistanceError::EmptyEndpoint => {
                CliError::Validation(err.to_string())
            }
            other => CliError::Io(other.to_string()),
        }
    }
}

impl From<CacheError> for CliError {
    fn from(err: CacheError) -> Self {
        match err {
            CacheError::Io { .. } => CliError::Io(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<Outcome, CliError> {
    let spec = GridSpec {
        width_km: args.width,
        height_km: args.height,
        n_pois: args.pois,
        n_existing: args.existing,
        n_candidates: args.candidates,
        cs_count: args.cs,
        seed: args.seed,
    };
    let inst = generate_grid_instance::<f64>(&spec)?;
    let provenance = Provenance {
        backend: PLANAR_BACKEND.to_string(),
        retrieved_unix: None,
    };
    write_instance(&args.out, &inst, &provenance)?;
    eprintln!(
        "wrote instance ({} POIs, {} existing, {} candidates, cs={}) to {}",
        inst.poi_count(),
        inst.existing_count(),
        inst.candidate_count(),
        inst.cs_count(),
        args.out.display()
    );
    Ok(Outcome::Feasible)
}

pub fn cmd_dist(args: &DistArgs) -> Result<Outcome, CliError> {
    let pois = match &args.pois {
        Some(path) => read_sites(path, SiteKind::Poi)?,
        None => Vec::new(),
    };
    let existing = match &args.existing {
        Some(path) => read_sites(path, SiteKind::ExistingCs)?,
        None => Vec::new(),
    };
    let candidates = read_sites(&args.candidates, SiteKind::Candidate)?;
    let backend = match args.backend {
        BackendArg::Haversine => DistanceBackend::Haversine,
        BackendArg::Osrm => DistanceBackend::osrm(&args.endpoint, &args.profile)?,
    };

    let key = cache_key(&pois, &existing, &candidates, &backend.descriptor());
    let set = match load_cache_if_match(&args.cache, &key)? {
        Some(set) => {
            eprintln!("cache hit: reusing {}", args.cache.display());
            set
        }
        None => {
            eprintln!("cache miss: computing distances ({})", backend.descriptor());
            let set = build_matrices(&pois, &existing, &candidates, &backend)?;
            save_cache(&args.cache, &key, &set)?;
            eprintln!("wrote cache {}", args.cache.display());
            set
        }
    };
    eprintln!(
        "matrices: d {}x{}, e {}x{}, q {}x{}",
        set.d.rows(),
        set.d.cols(),
        set.e.rows(),
        set.e.cols(),
        set.q.rows(),
        set.q.cols()
    );

    if let Some(out) = &args.instance_out {
        let cs = args.cs.expect("clap enforces --cs with --instance-out");
        let provenance = set.provenance.clone();
        let inst = ProblemInstance::new(pois, existing, candidates, cs, set.d, set.e, set.q)?;
        write_instance(out, &inst, &provenance)?;
        eprintln!("wrote instance {}", out.display());
    }
    Ok(Outcome::Feasible)
}

fn resolve_weights(
    inst: &ProblemInstance<f64>,
    args: &SolveArgs,
) -> Result<Weights<f64>, CliError> {
    let (rule1, rule2, rule3) = Weights::<f64>::gamma_rule(inst.candidate_count());
    let gamma1 = args.gamma1.unwrap_or(rule1);
    let gamma2 = args.gamma2.unwrap_or(rule2);
    let gamma3 = args.gamma3.unwrap_or(rule3);
    let w = match args.lambda {
        Some(lambda) => Weights::new(gamma1, gamma2, gamma3, lambda)?,
        None => {
            let w = Weights::auto_with_gammas(inst, gamma1, gamma2, gamma3);
            w.validate()?;
            w
        }
    };
    Ok(w)
}

fn schedule_for(
    inst: &ProblemInstance<f64>,
    w: &Weights<f64>,
    args: &SolveArgs,
    seed: u64,
    qubo_form: bool,
) -> Result<AnnealSchedule, CliError> {
    let base = if qubo_form {
        AnnealSchedule::default_for_qubo(&build_qubo(inst, w)?, seed)
    } else {
        AnnealSchedule::default_for_instance_seeded(inst, w, seed)
    };
    let sched = if args.t_initial.is_none() && args.t_final.is_none() {
        base
    } else {
        AnnealSchedule::new(
            args.t_initial.unwrap_or(base.t_initial()),
            args.t_final.unwrap_or(base.t_final()),
            args.sweeps,
            args.reads,
            seed,
        )?
    };
    Ok(sched.with_sweeps(args.sweeps)?.with_reads(args.reads)?)
}

pub fn cmd_solve(args: &SolveArgs) -> Result<Outcome, CliError> {
    if args.repeats == 0 {
        return Err(CliError::Validation("--repeats must be >= 1".into()));
    }
    let (inst, provenance) = read_instance(&args.instance)?;
    eprintln!(
        "instance: {} POIs, {} existing, {} candidates, cs={}, distances from {}",
        inst.poi_count(),
        inst.existing_count(),
        inst.candidate_count(),
        inst.cs_count(),
        provenance.backend
    );
    let w = resolve_weights(&inst, args)?;

    let mut reports: Vec<SolveReport<f64>> = Vec::with_capacity(args.repeats);
    for k in 0..args.repeats {
        let seed = args
            .seed
            .wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let report = match args.solver {
            SolverArg::Exact => solve_exact(&inst, &w)?,
            SolverArg::Greedy => solve_greedy(&inst, &w)?,
            SolverArg::Random => solve_random(&inst, &w, args.reads, seed)?,
            SolverArg::SaQubo => {
                let sched = schedule_for(&inst, &w, args, seed, true)?;
                solve_sa_qubo(&inst, &w, &sched)?
            }
            SolverArg::SaSwap => {
                let sched = schedule_for(&inst, &w, args, seed, false)?;
                solve_sa_swap(&inst, &w, &sched)?
            }
        };
        eprintln!(
            "run {}/{}: {} best energy {:.6} ({}feasible) in {:.3}s",
            k + 1,
            args.repeats,
            report.solver_name,
            report.best_energy,
            if report.feasible { "" } else { "in" },
            report.wall_time
        );
        reports.push(report);
    }
    let best = best_of(&reports)?;
    let solution = SolutionFile::from_report(&inst, &w, best);
    write_solution(&args.out, &solution)?;
    eprintln!("wrote solution {}", args.out.display());

    if best.best.count_selected() == 0 {
        println!("no stations selected; nothing to report");
    } else {
        let mut summary = station_metrics(&inst, &w, &best.best)?;
        summary.solver = Some(SolverInfo {
            solver_name: best.solver_name.clone(),
            seed: best.seed,
        });
        print!("{}", render_table(&summary));
    }
    if best.feasible {
        Ok(Outcome::Feasible)
    } else {
        Ok(Outcome::InfeasibleBest)
    }
}

pub fn cmd_export(args: &ExportArgs) -> Result<Outcome, CliError> {
    let (inst, _) = read_instance(&args.instance)?;
    let solution = read_solution(&args.solution)?;
    if solution.candidate_count != inst.candidate_count() {
        return Err(CliError::Validation(format!(
            "solution indexes {} candidates but the instance has {}",
            solution.candidate_count,
            inst.candidate_count()
        )));
    }
    for (&j, id) in solution.selected.iter().zip(&solution.selected_ids) {
        let inst_id = &inst.candidates()[j].id;
        if inst_id != id {
            return Err(CliError::Validation(format!(
                "candidate {j} is '{inst_id}' in the instance but '{id}' in the solution"
            )));
        }
    }
    let fc = export_geojson(&inst, &solution.assignment())?;
    let mut text = serde_json::to_string_pretty(&fc).expect("geojson serializes");
    text.push('\n');
    std::fs::write(&args.out, text)
        .map_err(|err| CliError::Io(format!("write {}: {err}", args.out.display())))?;
    eprintln!(
        "wrote {} features ({} selected) to {}",
        fc.features.len(),
        solution.selected.len(),
        args.out.display()
    );
    Ok(Outcome::Feasible)
}
