use std::collections::BTreeMap;

use quadcc_core::ccequations::family_masses;
use quadcc_core::classify::{
    self, check_factorization_identities, check_lemma_3_1, check_lemma_case_analysis, check_nu_positive, check_theorem,
    CheckReport, Convexity, Hypothesis, Inapplicable, OrderingMode, EQUALITY_TOLERANCE, SOLUTION_IDENTITY_TOLERANCE,
};
use quadcc_core::geometry;
use quadcc_core::identities::{self, Thresholds};
use quadcc_core::solver::{
    self, constrained_solve, continuation_sweep, oracle_trapezoid, solve_dziobek, solve_position, sweep_grid,
    CCSolution, OracleError, OracleOptions, SolveError, SolveOptions,
};
use quadcc_core::SquaredDistanceVector;

use crate::cli::{
    ClassifyArgs, ConstraintChoice, IdentityArgs, Method, OracleArgs, SolveArgs, SolverFlags, SweepArgs, TheoremArgs,
};
use crate::records::{
    check_map, to_toml, write_sweep_csv, CheckRecord, ClassRecord, ConfigurationRecord, CrossCheck, IdentityRecord,
    IdentityRow, OracleRecord, RunManifest, SolutionRecord, SweepRow, TheoremBundle, TheoremRecord,
};
use crate::{Exit, Output};

/// Agreement required between the two solvers, relative, on distance ratios.
pub const SOLVER_AGREEMENT: f64 = 1e-8;

/// Relative coordinate jitter applied to the oracle guess.
pub const GUESS_JITTER: f64 = 0.01;

/// Largest α decrement between consecutive constrained solves.
pub const WITNESS_PATH_STEP: f64 = 0.05;

/// Asymmetric factor applied to the concluded side pair before each
/// constrained solve, so symmetry is never inherited from the warm start.
pub const WITNESS_PERTURBATION: f64 = 0.02;

/// Full squared-distance residual required of a constrained solution.
pub const WITNESS_RESIDUAL: f64 = 1e-10;

pub fn error_kind(e: &SolveError) -> &'static str {
    match e {
        SolveError::InvalidArgument(_) => "invalid_argument",
        SolveError::InvalidInitial(_) => "invalid_initial",
        SolveError::NonConvergence { .. } => "non_convergence",
        SolveError::DampingExhausted { .. } => "damping_exhausted",
        SolveError::Collision => "collision",
        SolveError::SingularJacobian { .. } => "singular_jacobian",
        SolveError::NuNotPositive { .. } => "nu_not_positive",
        SolveError::TheoremWitnessFailure { .. } => "theorem_witness_failure",
        SolveError::NotConvex => "not_convex",
        SolveError::CrossCheck { .. } => "cross_check",
        SolveError::Geometry(_) => "geometry",
    }
}

pub fn error_exit(e: &SolveError) -> Exit {
    match e {
        SolveError::InvalidArgument(_) | SolveError::InvalidInitial(_) => Exit::InvalidInput,
        SolveError::NuNotPositive { .. } | SolveError::TheoremWitnessFailure { .. } => Exit::WitnessFailure,
        _ => Exit::Failure,
    }
}

fn valid_alpha(alpha: f64) -> bool {
    alpha > 0.0 && alpha <= 1.0
}

fn solve_options(flags: &SolverFlags, seed: u64) -> Result<SolveOptions, String> {
    if !(flags.tol > 0.0) || flags.max_iter == 0 {
        return Err("--tol must be positive and --max-iter at least 1".into());
    }
    Ok(SolveOptions { max_iterations: flags.max_iter, residual_tolerance: flags.tol, seed, ..Default::default() })
}

fn failed_names(reports: &[CheckReport]) -> Vec<&'static str> {
    reports.iter().filter(|r| !r.passed).map(|r| r.name).collect()
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Position => "position",
        Method::Dziobek => "dziobek",
        Method::Both => "both",
    }
}

pub fn solve(args: &SolveArgs) -> Output {
    let c = &args.common;
    let manifest = RunManifest::new("solve", c.seed, &c.timestamp)
        .param("alpha", args.alpha)
        .param("method", method_name(args.method))
        .param("guess", args.guess.as_ref().map_or("oracle".into(), |p| p.display().to_string()))
        .param("tol", args.solver.tol)
        .param("max-iter", args.solver.max_iter);
    let out = Output::to(c.out.clone());
    if !valid_alpha(args.alpha) {
        return out.fail(Exit::InvalidInput, format!("--alpha must lie in (0, 1], got {}", args.alpha));
    }
    let opts = match solve_options(&args.solver, c.seed) {
        Ok(o) => o,
        Err(msg) => return out.fail(Exit::InvalidInput, msg),
    };

    let initial = match &args.guess {
        Some(path) => match ConfigurationRecord::read(path) {
            Ok((_, cfg)) if classify::convexity(&cfg) == Convexity::ConvexInOrder => cfg,
            Ok(_) => return out.fail(Exit::InvalidInput, "guess is not convex in labelled order".into()),
            Err(e) => return out.fail(Exit::InvalidInput, e.to_string()),
        },
        None => match oracle_trapezoid(args.alpha, &OracleOptions::default()) {
            Ok(o) => solver::jitter(&o.configuration(), GUESS_JITTER, c.seed),
            Err(e) => return out.fail(Exit::Failure, format!("oracle guess failed: {e}")),
        },
    };
    let masses = family_masses(args.alpha);
    let sdv = match geometry::squared_distances(&initial) {
        Ok(s) => s,
        Err(e) => return out.fail(Exit::InvalidInput, format!("invalid guess: {e}")),
    };

    let run_position = || solve_position(masses, &initial, &opts);
    let run_dziobek = || solve_dziobek(args.alpha, &sdv, &opts);
    let (sol, cross) = match args.method {
        Method::Position => (run_position(), None),
        Method::Dziobek => (run_dziobek(), None),
        Method::Both => match (run_position(), run_dziobek()) {
            (Ok(p), Ok(d)) => {
                let diff = d.ratio_difference(&p);
                let check =
                    CrossCheck { ratio_difference: diff, tolerance: SOLVER_AGREEMENT, passed: diff < SOLVER_AGREEMENT };
                (Ok(d), Some(check))
            }
            (Err(e), _) => (Err(e), None),
            (_, Err(e)) => (Err(e), None),
        },
    };
    let sol = match sol {
        Ok(s) => s,
        Err(e) => return out.fail(error_exit(&e), format!("solve failed: {e}")),
    };

    let diagnostics = classify::diagnostics(&sol, args.alpha);
    let mut record = SolutionRecord::new(args.alpha, method_name(args.method), &sol, &diagnostics, manifest);
    record.cross_check = cross.clone();
    let mut out = out.body(to_toml(&record));
    let failed = failed_names(&diagnostics);
    if !failed.is_empty() {
        out.exit = Exit::WitnessFailure;
        out.messages.push(format!("converged solution fails checks: {}", failed.join(", ")));
    } else if cross.is_some_and(|x| !x.passed) {
        out.exit = Exit::Failure;
        out.messages.push("position and squared-distance solvers disagree".into());
    }
    out
}

pub fn sweep(args: &SweepArgs) -> Output {
    let c = &args.common;
    let manifest = RunManifest::new("sweep", c.seed, &c.timestamp)
        .param("alpha-start", args.alpha_start)
        .param("alpha-end", args.alpha_end)
        .param("steps", args.steps)
        .param("tol", args.solver.tol)
        .param("max-iter", args.solver.max_iter);
    let out = Output::to(c.out.clone());
    let opts = match solve_options(&args.solver, c.seed) {
        Ok(o) => o,
        Err(msg) => return out.fail(Exit::InvalidInput, msg),
    };
    let records = match continuation_sweep(args.alpha_start, args.alpha_end, args.steps, &opts) {
        Ok(r) => r,
        Err(e) => return out.fail(Exit::InvalidInput, e.to_string()),
    };

    let mut exit = Exit::Ok;
    let mut messages = Vec::new();
    let rows: Vec<SweepRow> = records
        .iter()
        .map(|r| match &r.solution {
            Ok(sol) => {
                let failed = failed_names(&r.diagnostics);
                if failed.is_empty() {
                    SweepRow::solved(r.alpha, sol, "ok")
                } else {
                    exit = exit.max(Exit::WitnessFailure);
                    messages.push(format!("alpha {}: failed {}", r.alpha, failed.join(", ")));
                    SweepRow::solved(r.alpha, sol, &format!("check_failed:{}", failed.join(";")))
                }
            }
            Err(e) => {
                exit = exit.max(error_exit(e).max(Exit::Failure));
                messages.push(format!("alpha {}: {e}", r.alpha));
                SweepRow::failed(r.alpha, error_kind(e))
            }
        })
        .collect();
    let mut out = out.body(write_sweep_csv(&rows));
    out.sidecar = Some(to_toml(&manifest));
    out.exit = exit;
    out.messages = messages;
    out
}

pub fn check_identities(args: &IdentityArgs) -> Output {
    let c = &args.common;
    let manifest = RunManifest::new("check-identities", c.seed, &c.timestamp).param("samples", args.samples);
    let out = Output::to(c.out.clone());
    if args.samples == 0 {
        return out.fail(Exit::InvalidInput, "--samples must be at least 1".into());
    }
    let report = identities::run(args.samples, c.seed);
    let thresholds = Thresholds::default();
    let rows: BTreeMap<String, IdentityRow> = report
        .rows(&thresholds)
        .iter()
        .map(|&(name, worst, threshold)| (name.to_owned(), IdentityRow { worst, threshold, passed: worst < threshold }))
        .collect();
    let passed = report.passed(&thresholds);
    let record = IdentityRecord { samples: report.samples, passed, identities: rows, manifest };
    let mut out = out.body(to_toml(&record));
    if !passed {
        out.exit = Exit::Failure;
        out.messages.push("identity thresholds exceeded".into());
    }
    out
}

pub fn classify_input(args: &ClassifyArgs) -> Output {
    let c = &args.common;
    let manifest =
        RunManifest::new("classify", c.seed, &c.timestamp).param("input", args.input.display()).param("tol", args.tol);
    let out = Output::to(c.out.clone());
    if !(args.tol > 0.0) {
        return out.fail(Exit::InvalidInput, "--tol must be positive".into());
    }
    let cfg = match ConfigurationRecord::read(&args.input) {
        Ok((_, cfg)) => cfg,
        Err(e) => return out.fail(Exit::InvalidInput, e.to_string()),
    };
    let inapplicable = Some("theorem predicates are inapplicable to non-convex configurations".to_owned());
    let record = match classify::convexity(&cfg) {
        Convexity::ConvexInOrder => match classify::classify_configuration(&cfg, args.tol) {
            Ok(class) => ClassRecord {
                label: class.label.as_str().into(),
                convexity: "convex".into(),
                note: None,
                margins: class.margins.iter().map(|&(n, m)| (n.to_owned(), m)).collect(),
                manifest,
            },
            Err(e) => return out.fail(Exit::InvalidInput, e.to_string()),
        },
        Convexity::Concave => ClassRecord {
            label: "Concave".into(),
            convexity: "concave".into(),
            note: inapplicable,
            margins: BTreeMap::new(),
            manifest,
        },
        Convexity::Collinear => ClassRecord {
            label: "Collinear".into(),
            convexity: "collinear".into(),
            note: inapplicable,
            margins: BTreeMap::new(),
            manifest,
        },
    };
    out.body(to_toml(&record))
}

pub fn oracle(args: &OracleArgs) -> Output {
    let c = &args.common;
    let manifest = RunManifest::new("oracle", c.seed, &c.timestamp).param("alpha", args.alpha).param("grid", args.grid);
    let out = Output::to(c.out.clone());
    let opts = OracleOptions { grid: args.grid, ..Default::default() };
    match oracle_trapezoid(args.alpha, &opts) {
        Ok(o) => {
            let cfg = o.configuration();
            let record = OracleRecord {
                label: format!("oracle alpha={}", args.alpha),
                masses: *cfg.masses(),
                positions: *cfg.positions(),
                alpha: args.alpha,
                s: o.s,
                h: o.h,
                sdv: o.sdv.to_array(),
                brackets: o.brackets,
                manifest,
            };
            let mut out = out.body(to_toml(&record));
            if o.brackets > 1 {
                out.messages.push(format!("{} sign changes found; the first was refined", o.brackets));
            }
            out
        }
        Err(e @ (OracleError::InvalidAlpha(_) | OracleError::InvalidGrid)) => {
            out.fail(Exit::InvalidInput, e.to_string())
        }
        Err(e) => out.fail(Exit::Failure, format!("oracle failed: {e}")),
    }
}

/// Scale the pair the theorem concludes equal in opposite directions.
pub fn perturb(sdv: &SquaredDistanceVector, which: Hypothesis) -> SquaredDistanceVector {
    let mut x = sdv.to_array();
    let (up, down) = match which {
        Hypothesis::EqualDiagonals => (2, 3),
        Hypothesis::EqualLaterals => (1, 4),
    };
    x[up] *= 1.0 + WITNESS_PERTURBATION;
    x[down] *= 1.0 - WITNESS_PERTURBATION;
    SquaredDistanceVector::from_array(x)
}

/// Constrained solves at each α, continued from the square in decreasing α
/// with every step restarted from a perturbed guess. Results keep input order.
pub fn witness_chain(alphas: &[f64], which: Hypothesis, opts: &SolveOptions) -> Vec<Result<CCSolution, SolveError>> {
    let mut order: Vec<usize> = (0..alphas.len()).collect();
    order.sort_by(|&i, &j| alphas[j].total_cmp(&alphas[i]));
    let mut results: Vec<Option<Result<CCSolution, SolveError>>> = vec![None; alphas.len()];
    let mut warm = SquaredDistanceVector::unit_square();
    let mut current = 1.0;
    for i in order {
        let target = alphas[i];
        let n = (((current - target) / WITNESS_PATH_STEP).ceil() as usize).max(1);
        let mut result = Err(SolveError::InvalidArgument("empty path"));
        for k in 1..=n {
            let alpha = if k == n { target } else { current + (target - current) * (k as f64 / n as f64) };
            result = constrained_solve(alpha, which, &perturb(&warm, which), opts);
            match &result {
                Ok(sol) => warm = sol.sdv,
                Err(_) => break,
            }
        }
        if result.is_ok() {
            current = target;
        }
        results[i] = Some(result);
    }
    results.into_iter().map(|r| r.expect("every index visited")).collect()
}

fn theorem_name(h: Hypothesis) -> &'static str {
    match h {
        Hypothesis::EqualDiagonals => "theorem_equal_diagonals",
        Hypothesis::EqualLaterals => "theorem_equal_laterals",
    }
}

/// The per-solution checks of the witness run.
pub fn witness_checks(sol: &CCSolution, alpha: f64, which: Hypothesis) -> Vec<CheckReport> {
    let theorem = check_theorem(sol, which, EQUALITY_TOLERANCE).unwrap_or_else(|why| {
        let margin = match why {
            Inapplicable::NotConverged { residual } => -residual,
            Inapplicable::NonPositiveNu { nu } => nu,
            Inapplicable::HypothesisNotMet { deviation } => EQUALITY_TOLERANCE - deviation,
        };
        CheckReport::from_margin(theorem_name(which), margin.min(-f64::MIN_POSITIVE))
    });
    vec![
        CheckReport::from_margin("full_residual", WITNESS_RESIDUAL - sol.residual_dziobek),
        theorem,
        check_lemma_3_1(&sol.areas, EQUALITY_TOLERANCE, OrderingMode::for_alpha(alpha)),
        check_lemma_case_analysis(sol, EQUALITY_TOLERANCE),
        check_factorization_identities(&sol.areas, SOLUTION_IDENTITY_TOLERANCE)
            .unwrap_or_else(|_| CheckReport::from_margin("factorization_identities", -1.0)),
        check_nu_positive(sol),
    ]
}

pub fn verify_theorems(args: &TheoremArgs) -> Output {
    let c = &args.common;
    let out = Output::to(c.out.clone());
    let alphas = match (&args.alpha_list, args.alpha_start, args.alpha_end, args.steps) {
        (Some(list), ..) => list.clone(),
        (None, Some(s), Some(e), Some(n)) => match sweep_grid(s, e, n) {
            Ok(g) => g,
            Err(err) => return out.fail(Exit::InvalidInput, err.to_string()),
        },
        _ => return out.fail(Exit::InvalidInput, "give --alpha-list or --alpha-start, --alpha-end and --steps".into()),
    };
    if alphas.is_empty() || !alphas.iter().all(|&a| valid_alpha(a)) {
        return out.fail(Exit::InvalidInput, "every alpha must lie in (0, 1]".into());
    }
    let opts = match solve_options(&args.solver, c.seed) {
        Ok(o) => o,
        Err(msg) => return out.fail(Exit::InvalidInput, msg),
    };
    let hypotheses: &[Hypothesis] = match args.constraint {
        ConstraintChoice::EqualDiagonals => &[Hypothesis::EqualDiagonals],
        ConstraintChoice::EqualLaterals => &[Hypothesis::EqualLaterals],
        ConstraintChoice::Both => &Hypothesis::ALL,
    };
    let list: Vec<String> = alphas.iter().map(f64::to_string).collect();
    let constraint = hypotheses.iter().map(|h| h.as_str()).collect::<Vec<_>>().join(",");
    let manifest = RunManifest::new("verify-theorems", c.seed, &c.timestamp)
        .param("alphas", list.join(","))
        .param("constraint", &constraint)
        .param("tol", args.solver.tol)
        .param("max-iter", args.solver.max_iter);

    let mut exit = Exit::Ok;
    let mut messages = Vec::new();
    let mut results = Vec::new();
    for &h in hypotheses {
        for (&alpha, res) in alphas.iter().zip(witness_chain(&alphas, h, &opts)) {
            let record = match res {
                Ok(sol) => {
                    let checks = witness_checks(&sol, alpha, h);
                    let failed = failed_names(&checks);
                    let status = if failed.is_empty() {
                        "ok".to_owned()
                    } else {
                        exit = exit.max(Exit::WitnessFailure);
                        for r in checks.iter().filter(|r| !r.passed) {
                            messages.push(format!("alpha {alpha} {}: {} margin {:e}", h.as_str(), r.name, r.margin));
                        }
                        format!("check_failed:{}", failed.join(";"))
                    };
                    let n = sol.sdv.normalized();
                    TheoremRecord {
                        alpha,
                        constraint: h.as_str().into(),
                        status,
                        class: Some(sol.geometry_class.label.as_str().into()),
                        full_residual: Some(sol.residual_dziobek),
                        diagonal_gap: Some((n.b - n.e).abs()),
                        lateral_gap: Some((n.c - n.d).abs()),
                        sdv: Some(sol.sdv.to_array()),
                        checks: check_map(&checks),
                    }
                }
                Err(e) => {
                    exit = exit.max(error_exit(&e).max(Exit::Failure));
                    messages.push(format!("alpha {alpha} {}: {e}", h.as_str()));
                    let mut checks = BTreeMap::new();
                    if let SolveError::TheoremWitnessFailure { residual } = e {
                        checks.insert(
                            "full_residual".to_owned(),
                            CheckRecord { passed: false, margin: WITNESS_RESIDUAL - residual },
                        );
                    }
                    TheoremRecord {
                        alpha,
                        constraint: h.as_str().into(),
                        status: error_kind(&e).into(),
                        class: None,
                        full_residual: None,
                        diagonal_gap: None,
                        lateral_gap: None,
                        sdv: None,
                        checks,
                    }
                }
            };
            results.push(record);
        }
    }
    let bundle = TheoremBundle { passed: exit == Exit::Ok, results, manifest };
    let mut out = out.body(to_toml(&bundle));
    out.exit = exit;
    out.messages = messages;
    out
}
