use alloc::vec::Vec;

use super::{solve_dziobek, CCSolution, SolveError, SolveOptions};
use crate::classify::{self, CheckReport};
use crate::geometry::SquaredDistanceVector;

/// One step of a mass-ratio sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub alpha: f64,
    pub solution: Result<CCSolution, SolveError>,
    pub diagnostics: Vec<CheckReport>,
}

impl SweepRecord {
    pub fn passed(&self) -> bool {
        self.solution.is_ok() && self.diagnostics.iter().all(|c| c.passed)
    }
}

/// `steps` evenly spaced values from `start` to `end` inclusive.
pub fn sweep_grid(start: f64, end: f64, steps: usize) -> Result<Vec<f64>, SolveError> {
    if !(end > 0.0 && end <= start && start <= 1.0) {
        return Err(SolveError::InvalidArgument("sweep needs 0 < alpha_end <= alpha_start <= 1"));
    }
    if steps == 0 {
        return Err(SolveError::InvalidArgument("sweep needs at least one step"));
    }
    if steps == 1 {
        return Ok(alloc::vec![start]);
    }
    let n = (steps - 1) as f64;
    let mut grid: Vec<f64> = (0..steps).map(|k| start + (end - start) * (k as f64 / n)).collect();
    grid[steps - 1] = end;
    Ok(grid)
}

/// Solve at each `α` in order, warm-starting from the last successful
/// solution (the unit square before any success). Failed steps are kept.
pub fn sweep_alphas(alphas: &[f64], mut options: impl FnMut(usize, f64) -> SolveOptions) -> Vec<SweepRecord> {
    let mut warm = SquaredDistanceVector::unit_square();
    alphas
        .iter()
        .enumerate()
        .map(|(k, &alpha)| {
            let solution = solve_dziobek(alpha, &warm, &options(k, alpha));
            let diagnostics = match &solution {
                Ok(sol) => {
                    warm = sol.sdv;
                    classify::diagnostics(sol, alpha)
                }
                Err(_) => Vec::new(),
            };
            SweepRecord { alpha, solution, diagnostics }
        })
        .collect()
}

/// Continuation from `alpha_start` down to `alpha_end` in `steps` solves.
pub fn continuation_sweep(
    alpha_start: f64,
    alpha_end: f64,
    steps: usize,
    opts: &SolveOptions,
) -> Result<Vec<SweepRecord>, SolveError> {
    let grid = sweep_grid(alpha_start, alpha_end, steps)?;
    Ok(sweep_alphas(&grid, |_, _| *opts))
}
