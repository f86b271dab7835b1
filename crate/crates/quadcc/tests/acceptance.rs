//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;

use clap::Parser;
use quadcc::commands::witness_chain;
use quadcc::{run, Cli, Exit};
use quadcc_core::ccequations::{family_masses, mass_scaling_check};
use quadcc_core::classify::{
    self, check_lemma_3_1, factorization_errors, sign_linkage, GeometryLabel, Hypothesis, OrderingMode,
    EQUALITY_TOLERANCE,
};
use quadcc_core::geometry::{self, OrientedAreaVector};
use quadcc_core::identities::{self, Thresholds};
use quadcc_core::solver::{
    self, continuation_sweep, oracle_trapezoid, solve_dziobek, solve_position, square_configuration,
    trapezoid_parameters, OracleOptions, SolveOptions,
};
use quadcc_core::SquaredDistanceVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;
const IDENTITY_SAMPLES: usize = 1000;
const ANCHOR_TOL: f64 = 1e-12;
const FIXED_POINT_MAX_ITERATIONS: usize = 25;
const FIXED_POINT_RESIDUAL: f64 = 1e-12;
const SQRT2_TOL: f64 = 1e-10;
const SWEEP_STEPS: usize = 19;
const SWEEP_SYMMETRY_TOL: f64 = 1e-10;
const WITNESS_ALPHAS: [f64; 3] = [0.2, 0.5, 0.8];
const WITNESS_RESIDUAL: f64 = 1e-10;
const WITNESS_EQUALITY: f64 = 1e-9;
const ORACLE_ALPHAS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
const ORACLE_AGREEMENT: f64 = 1e-8;
const QUADRUPLES: usize = 100_000;
const FACTORIZATION_TOL: f64 = 1e-12;
const SCALING_FACTORS: [f64; 3] = [0.5, 2.0, 8.0];
const SCALING_TOL: f64 = 1e-10;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn identity_suite() -> Outcome {
    let report = identities::run(IDENTITY_SAMPLES, SEED);
    let t = Thresholds::default();
    ensure(
        t.planarity <= 1e-10 && t.area_sum <= 1e-12 && t.dziobek <= 1e-8 && t.gradient_fd <= 1e-8 && t.albouy <= 1e-10,
        || format!("thresholds looser than required: {t:?}"),
    )?;
    for (name, worst, limit) in report.rows(&t) {
        ensure(worst < limit, || format!("{name}: worst {worst:e} >= {limit:e}"))?;
    }
    Ok(format!(
        "{} samples; planarity {:.1e}, area sum {:.1e}, gradient {:.1e}/{:.1e}, t-spread {:.1e}",
        report.samples, report.planarity, report.area_sum, report.dziobek, report.gradient_fd, report.albouy
    ))
}

fn anchors() -> Outcome {
    let ones = SquaredDistanceVector::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
    let s = geometry::cayley_menger(&ones);
    ensure((s - 4.0).abs() < ANCHOR_TOL, || format!("all-ones determinant {s}"))?;

    let square = square_configuration(1.0).unwrap();
    let sdv = geometry::squared_distances(&square).unwrap();
    let expected = [1.0, 2.0, 1.0, 1.0, 2.0, 1.0];
    ensure(sdv.to_array().iter().zip(expected).all(|(x, y)| (x - y).abs() < ANCHOR_TOL), || format!("sdv {sdv:?}"))?;
    let signed = [-0.5, 0.5, -0.5, 0.5];
    let from_positions = geometry::oriented_areas_from_positions(&square);
    let from_distances = geometry::oriented_areas_from_distances(&sdv).unwrap();
    for areas in [from_positions, from_distances] {
        ensure(areas.0.iter().zip(signed).all(|(x, y)| (x - y).abs() < ANCHOR_TOL), || format!("areas {areas:?}"))?;
    }
    let unsigned = geometry::unsigned_areas_from_distances(&sdv).unwrap();
    ensure(unsigned.iter().all(|x| (x - 0.5).abs() < ANCHOR_TOL), || format!("unsigned {unsigned:?}"))?;
    let planar = geometry::cayley_menger(&sdv);
    ensure(planar.abs() < ANCHOR_TOL, || format!("square determinant {planar}"))?;
    let grad = geometry::cayley_menger_gradient(&sdv);
    ensure((grad[0] - 8.0).abs() < ANCHOR_TOL && (grad[1] + 8.0).abs() < ANCHOR_TOL, || format!("gradient {grad:?}"))?;

    let u = geometry::potential(&square).unwrap();
    ensure((u - (4.0 + 2f64.sqrt())).abs() < ANCHOR_TOL, || format!("potential {u}"))?;
    let centered = square.centered();
    let i = centered.polar_moment();
    ensure((i - 2.0).abs() < ANCHOR_TOL, || format!("inertia {i}"))?;
    let lambda = quadcc_core::ccequations::lambda_from_config(&centered).unwrap();
    ensure((lambda + (4.0 + 2f64.sqrt()) / 2.0).abs() < ANCHOR_TOL, || format!("lambda {lambda}"))?;
    let res = quadcc_core::ccequations::position_residual(&centered, lambda).unwrap().norm;
    ensure(res < ANCHOR_TOL, || format!("square position residual {res:e}"))?;
    ensure(classify::convexity(&square) == classify::Convexity::ConvexInOrder, || "square not convex".into())?;
    Ok("all-ones determinant 4, unit-square distances, areas, gradient, U, I, λ".into())
}

fn equal_mass_fixed_point() -> Outcome {
    let start = solver::jitter(&square_configuration(1.0).unwrap(), 0.01, SEED);
    let opts = SolveOptions::default();
    let p = solve_position(family_masses(1.0), &start, &opts).map_err(|e| format!("position: {e}"))?;
    let d = solve_dziobek(1.0, &geometry::squared_distances(&start).unwrap(), &opts)
        .map_err(|e| format!("squared distances: {e}"))?;
    for (name, sol, res) in [("position", &p, p.residual_position), ("squared distances", &d, d.residual_dziobek)] {
        ensure(sol.iterations <= FIXED_POINT_MAX_ITERATIONS, || format!("{name}: {} iterations", sol.iterations))?;
        ensure(res < FIXED_POINT_RESIDUAL, || format!("{name}: residual {res:e}"))?;
        let ratio = (sol.sdv.b / sol.sdv.a).sqrt();
        ensure((ratio - 2f64.sqrt()).abs() < SQRT2_TOL, || format!("{name}: r13/r12 = {ratio}"))?;
        ensure(sol.geometry_class.label == GeometryLabel::Square, || format!("{name}: {}", sol.geometry_class.label))?;
    }
    Ok(format!(
        "iterations {} / {}, residuals {:.1e} / {:.1e}",
        p.iterations, d.iterations, p.residual_position, d.residual_dziobek
    ))
}

fn sweep_solutions() -> Result<Vec<(f64, quadcc_core::solver::CCSolution)>, String> {
    continuation_sweep(1.0, 0.1, SWEEP_STEPS, &SolveOptions::default())
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|r| r.solution.map(|s| (r.alpha, s)).map_err(|e| format!("alpha {}: {e}", r.alpha)))
        .collect()
}

fn theorem_sweep() -> Outcome {
    let recs = continuation_sweep(1.0, 0.1, SWEEP_STEPS, &SolveOptions::default()).map_err(|e| e.to_string())?;
    ensure(recs.len() == SWEEP_STEPS, || format!("{} steps", recs.len()))?;
    let mut worst_gap: f64 = 0.0;
    for r in &recs {
        let alpha = r.alpha;
        let sol = r.solution.as_ref().map_err(|e| format!("alpha {alpha}: {e}"))?;
        let failed: Vec<_> = r.diagnostics.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        ensure(failed.is_empty(), || format!("alpha {alpha}: failed {failed:?}"))?;
        ensure(sol.multipliers.nu > 0.0, || format!("alpha {alpha}: nu {}", sol.multipliers.nu))?;
        let ordering = check_lemma_3_1(&sol.areas, EQUALITY_TOLERANCE, OrderingMode::for_alpha(alpha));
        ensure(ordering.passed, || format!("alpha {alpha}: ordering margin {:e}", ordering.margin))?;
        if alpha <= 0.95 {
            ensure(OrderingMode::for_alpha(alpha) == OrderingMode::Strict, || "weak mode below 0.95".into())?;
        }
        let n = sol.sdv.normalized();
        let gap = (n.b - n.e).abs().max((n.c - n.d).abs());
        worst_gap = worst_gap.max(gap);
        ensure(gap < SWEEP_SYMMETRY_TOL, || format!("alpha {alpha}: side gap {gap:e}"))?;
        let label = sol.geometry_class.label;
        let expected = if alpha == 1.0 { GeometryLabel::Square } else { GeometryLabel::IsoscelesTrapezoid };
        ensure(label == expected, || format!("alpha {alpha}: class {label}"))?;
        if alpha < 1.0 {
            ensure(n.f < n.a, || format!("alpha {alpha}: f {} >= a {}", n.f, n.a))?;
        }
    }
    Ok(format!("{} steps converged, worst side gap {worst_gap:.1e}", recs.len()))
}

fn constrained_witness() -> Outcome {
    let opts = SolveOptions::default();
    let mut worst: f64 = 0.0;
    for h in Hypothesis::ALL {
        for (alpha, res) in WITNESS_ALPHAS.iter().zip(witness_chain(&WITNESS_ALPHAS, h, &opts)) {
            let sol = res.map_err(|e| format!("{} alpha {alpha}: {e}", h.as_str()))?;
            ensure(sol.residual_dziobek < WITNESS_RESIDUAL, || {
                format!("{} alpha {alpha}: full residual {:e}", h.as_str(), sol.residual_dziobek)
            })?;
            let n = sol.sdv.normalized();
            let (tied, concluded) = match h {
                Hypothesis::EqualDiagonals => ((n.b - n.e).abs(), (n.c - n.d).abs()),
                Hypothesis::EqualLaterals => ((n.c - n.d).abs(), (n.b - n.e).abs()),
            };
            ensure(tied == 0.0, || format!("{} alpha {alpha}: tied pair differs by {tied:e}", h.as_str()))?;
            ensure(concluded < WITNESS_EQUALITY, || {
                format!("{} alpha {alpha}: concluded gap {concluded:e}", h.as_str())
            })?;
            worst = worst.max(concluded);
        }
    }
    Ok(format!("both constraints at {WITNESS_ALPHAS:?}, worst concluded gap {worst:.1e}"))
}

fn oracle_equivalence() -> Outcome {
    let opts = SolveOptions::default();
    let mut worst: f64 = 0.0;
    for alpha in ORACLE_ALPHAS {
        let o = oracle_trapezoid(alpha, &OracleOptions::default()).map_err(|e| format!("oracle {alpha}: {e}"))?;
        // Both solvers start from the square, not from the oracle.
        let start = solver::jitter(&square_configuration(alpha).unwrap(), 0.01, SEED);
        let p = solve_position(family_masses(alpha), &start, &opts).map_err(|e| format!("position {alpha}: {e}"))?;
        let d = solve_dziobek(alpha, &SquaredDistanceVector::unit_square(), &opts)
            .map_err(|e| format!("squared distances {alpha}: {e}"))?;
        for (name, sol) in [("position", &p), ("squared distances", &d)] {
            let (s, h) = trapezoid_parameters(&sol.sdv, &sol.areas);
            let err = ((s - o.s).abs() / o.s).max((h - o.h).abs() / o.h);
            worst = worst.max(err);
            ensure(err < ORACLE_AGREEMENT, || {
                format!("{name} alpha {alpha}: (s, h) = ({s}, {h}) vs ({}, {})", o.s, o.h)
            })?;
        }
    }
    Ok(format!("alphas {ORACLE_ALPHAS:?}, worst relative difference {worst:.1e}"))
}

fn proof_step_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut ordered = 0;
    let mut linked = 0;
    for _ in 0..QUADRUPLES {
        let d1: f64 = rng.random_range(-1.0..1.0);
        let d2: f64 = rng.random_range(-1.0..1.0);
        let d3: f64 = rng.random_range(-1.0..1.0);
        let areas = OrientedAreaVector([d1, d2, d3, -(d1 + d2 + d3)]);
        let (e1, e2) = factorization_errors(&areas);
        ensure(e1 < FACTORIZATION_TOL && e2 < FACTORIZATION_TOL, || format!("{areas:?}: errors {e1:e}, {e2:e}"))?;

        let [d1, d2, d3, d4] = areas.0;
        if !(d3 < d1 && d1 < 0.0 && 0.0 < d2 && d2 < d4) {
            continue;
        }
        ordered += 1;
        ensure(d1 + d4 > 0.0, || format!("{areas:?}: Δ1 + Δ4 <= 0"))?;
        ensure(sign_linkage(&areas, FACTORIZATION_TOL) != Some(false), || format!("{areas:?}: sign linkage broken"))?;
        // Same statement evaluated directly from the products.
        let pivot = d3 + d4;
        if pivot.abs() > FACTORIZATION_TOL * areas.abs_sum() {
            linked += 1;
            let p = pivot.signum();
            ensure((d1 * d3 - d2 * d4).signum() == p && (d2 * d3 - d1 * d4).signum() == p, || {
                format!("{areas:?}: product signs disagree with Δ3 + Δ4")
            })?;
        }
    }
    ensure(ordered > 0, || "no quadruple matched the ordering".into())?;
    Ok(format!("{QUADRUPLES} quadruples, {ordered} ordered, {linked} linkage cases, 0 counterexamples"))
}

fn scaling_invariance() -> Outcome {
    let mut worst: f64 = 0.0;
    for (alpha, sol) in sweep_solutions()? {
        for zeta in SCALING_FACTORS {
            let r = mass_scaling_check(&sol.configuration, zeta).map_err(|e| e.to_string())?;
            worst = worst.max(r);
            ensure(r < SCALING_TOL, || format!("alpha {alpha}, zeta {zeta}: {r:e}"))?;
        }
    }
    Ok(format!("zeta {SCALING_FACTORS:?} on {SWEEP_STEPS} sweep solutions, worst {worst:.1e}"))
}

fn run_into(dir: &Path, args: &[&str], file: &str) -> Result<Vec<Vec<u8>>, String> {
    let out = dir.join(file);
    let mut argv = vec!["quadcc"];
    argv.extend_from_slice(args);
    let out_str = out.to_str().unwrap().to_owned();
    argv.extend_from_slice(&["--seed", "42", "--out", &out_str]);
    let cli = Cli::try_parse_from(argv).map_err(|e| e.to_string())?;
    let output = run(&cli.command);
    ensure(output.exit == Exit::Ok, || format!("{args:?} exited {:?}: {:?}", output.exit, output.messages))?;
    output.emit().map_err(|e| e.to_string())?;
    let mut files = vec![std::fs::read(&out).map_err(|e| e.to_string())?];
    if let Ok(side) = std::fs::read(quadcc::Output::sidecar_path(&out)) {
        files.push(side);
    }
    Ok(files)
}

fn determinism() -> Outcome {
    let runs = [
        (vec!["sweep", "--alpha-start", "1.0", "--alpha-end", "0.1", "--steps", "19"], "sweep.csv"),
        (vec!["check-identities", "--samples", "1000"], "identities.toml"),
        (vec!["verify-theorems", "--alpha-list", "0.2,0.5,0.8"], "theorems.toml"),
        (vec!["solve", "--alpha", "0.5"], "solve.toml"),
    ];
    let first = tempfile::tempdir().map_err(|e| e.to_string())?;
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bytes = 0;
    for (args, file) in &runs {
        let a = run_into(first.path(), args, file)?;
        let b = run_into(second.path(), args, file)?;
        ensure(a == b, || format!("{file} differs between runs"))?;
        bytes += a.iter().map(Vec::len).sum::<usize>();
    }
    Ok(format!("{} outputs byte-identical across two runs ({bytes} bytes)", runs.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("identity suite", identity_suite),
        ("exact anchors", anchors),
        ("equal-mass fixed point", equal_mass_fixed_point),
        ("theorem sweep", theorem_sweep),
        ("constrained witness", constrained_witness),
        ("oracle equivalence", oracle_equivalence),
        ("proof-step properties", proof_step_properties),
        ("scaling invariance", scaling_invariance),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", k + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {} {name}: FAIL ({why})", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
