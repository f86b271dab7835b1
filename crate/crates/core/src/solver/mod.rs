//! Central-configuration solvers for the mass family `(1, 1, α, α)`.
//!
//! * [`solve_position`]: damped Gauss–Newton on the position-space equations
//!   with translation, rotation and scale fixed by explicit constraints.
//! * [`solve_dziobek`]: damped Newton on the 7×7 squared-distance system with
//!   the gauge `a = 1` and the Cayley–Menger planarity equation.
//! * [`constrained_solve`]: the squared-distance system restricted to a
//!   side-pair equality, solved in the least-squares sense.
//! * [`oracle_trapezoid`]: symmetric brute-force reference by grid scan and
//!   bisection, independent of the Newton code.
//! * [`continuation_sweep`]: warm-started solves along decreasing `α`.

mod continuation;
mod dziobek;
mod oracle;
mod position;

pub use continuation::{continuation_sweep, sweep_alphas, sweep_grid, SweepRecord};
pub use dziobek::{constrained_solve, solve_dziobek};
pub use oracle::{oracle_trapezoid, trapezoid_parameters, OracleError, OracleOptions, OracleTrapezoid};
pub use position::solve_position;

use alloc::vec::Vec;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ccequations::{self, Multipliers};
use crate::classify::{self, GeometryClass};
use crate::error::Error as GeometryError;
use crate::geometry::{self, OrientedAreaVector, PlanarConfiguration, SquaredDistanceVector};
use crate::linalg;

/// How Jacobians are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    Analytic,
    /// Central differences; slower, kept as a validation oracle.
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Scaled residual max-norm required for convergence.
    pub residual_tolerance: f64,
    /// Relative step size required for convergence.
    pub step_tolerance: f64,
    /// Maximum step halvings per iteration.
    pub damping: u32,
    pub jacobian_mode: JacobianMode,
    /// Seed for randomized initial guesses.
    pub seed: u64,
    /// Moment of inertia fixed by the position-space gauge.
    pub inertia: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            residual_tolerance: 1e-12,
            step_tolerance: 1e-12,
            damping: 30,
            jacobian_mode: JacobianMode::Analytic,
            seed: 42,
            inertia: 1.0,
        }
    }
}

/// Secondary residuals (the one not driven to zero by the solver at hand)
/// must meet this bound.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-10;

/// Squared distances below this fraction of the squared scale count as a collision.
pub const COLLISION_FRACTION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    Collision,
    LostConvexity,
    NotRealizable,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("invalid initial guess: {0}")]
    InvalidInitial(GeometryError),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("step halving exhausted at iteration {iteration} (residual {residual:e}, last rejection {reason:?})")]
    DampingExhausted { iteration: usize, residual: f64, reason: Option<Rejection> },
    #[error("iterate drifted to a collision")]
    Collision,
    #[error("singular Jacobian (condition estimate {condition:e})")]
    SingularJacobian { condition: f64 },
    #[error("converged with nu = {nu:e} <= 0, violating positivity of the planarity multiplier")]
    NuNotPositive { nu: f64 },
    #[error("constrained least-squares point has full residual {residual:e}: symmetry witness failed")]
    TheoremWitnessFailure { residual: f64 },
    #[error("converged configuration is not convex in labelled order")]
    NotConvex,
    #[error("cross-check residual {residual:e} exceeds tolerance")]
    CrossCheck { residual: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A converged, gauge-fixed central configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CCSolution {
    /// Centred embedding; base 12 horizontal.
    pub configuration: PlanarConfiguration,
    pub sdv: SquaredDistanceVector,
    pub areas: OrientedAreaVector,
    pub multipliers: Multipliers,
    pub residual_position: f64,
    pub residual_dziobek: f64,
    pub iterations: usize,
    pub geometry_class: GeometryClass,
    /// Trial steps rejected for leaving the convex region.
    pub convexity_losses: usize,
}

impl CCSolution {
    pub fn lambda_cc(&self) -> f64 {
        self.multipliers.lambda_cc.unwrap_or(f64::NAN)
    }

    /// Largest relative difference of the five distance ratios `x / a`.
    pub fn ratio_difference(&self, other: &CCSolution) -> f64 {
        let p = self.sdv.normalized().to_array();
        let q = other.sdv.normalized().to_array();
        p.iter().zip(q).map(|(x, y)| (x - y).abs() / y.abs()).fold(0.0, f64::max)
    }
}

/// Result of the shared damped iteration.
struct Iterate {
    x: Vec<f64>,
    iterations: usize,
    residual: f64,
    convexity_losses: usize,
    /// Step was small but the residual stayed above tolerance.
    stagnated: bool,
}

/// A nonlinear system for the damped Newton / Gauss–Newton driver. Residuals
/// are returned already scaled.
trait System {
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>, Rejection>;
    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>, SolveError>;
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Consecutive negligible steps tolerated above the residual tolerance.
const STAGNATION_STEPS: usize = 3;

/// Newton (square Jacobian) or Gauss–Newton (tall Jacobian) with step
/// halving on residual increase or inadmissible trial points.
fn damped_newton(system: &impl System, x0: Vec<f64>, opts: &SolveOptions) -> Result<Iterate, SolveError> {
    if opts.max_iterations == 0 || !(opts.residual_tolerance > 0.0) {
        return Err(SolveError::InvalidArgument("max_iterations >= 1 and residual_tolerance > 0"));
    }
    let mut x = x0;
    let mut r = system.residual(&x).map_err(|e| match e {
        Rejection::Collision => SolveError::Collision,
        Rejection::LostConvexity | Rejection::NotRealizable => SolveError::NotConvex,
    })?;
    let mut losses = 0;
    let mut small_steps = 0;
    for iter in 0..opts.max_iterations {
        let jac = system.jacobian(&x)?;
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = if jac.nrows() == jac.ncols() {
            linalg::solve_square(&jac, &rhs)
        } else {
            linalg::least_squares(&jac, &rhs)
        }
        .ok_or_else(|| SolveError::SingularJacobian { condition: linalg::condition_number(&jac) })?;

        let res = max_norm(&r);
        let step_small = max_norm(&step) <= opts.step_tolerance * max_norm(&x).max(1.0);
        if step_small && res < opts.residual_tolerance {
            return Ok(Iterate { x, iterations: iter, residual: res, convexity_losses: losses, stagnated: false });
        }
        // Tiny steps that leave the residual above tolerance: a least-squares
        // point with nonzero residual.
        small_steps = if step_small { small_steps + 1 } else { 0 };
        if small_steps > STAGNATION_STEPS {
            return Ok(Iterate { x, iterations: iter, residual: res, convexity_losses: losses, stagnated: true });
        }

        let current = sum_sq(&r);
        let mut t = 1.0;
        let mut accepted = None;
        let mut reason = None;
        for _ in 0..=opts.damping {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + t * b).collect();
            match system.residual(&trial) {
                Ok(rt) if sum_sq(&rt) < current => {
                    accepted = Some((trial, rt));
                    break;
                }
                Ok(_) => reason = None,
                Err(e) => {
                    if e == Rejection::LostConvexity || e == Rejection::NotRealizable {
                        losses += 1;
                    }
                    reason = Some(e);
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((xn, rn)) => {
                x = xn;
                r = rn;
            }
            None if res < opts.residual_tolerance => {
                // Residual already at rounding level; no descent is possible.
                return Ok(Iterate { x, iterations: iter, residual: res, convexity_losses: losses, stagnated: false });
            }
            None if step_small => {
                return Ok(Iterate { x, iterations: iter, residual: res, convexity_losses: losses, stagnated: true });
            }
            None if reason == Some(Rejection::Collision) => return Err(SolveError::Collision),
            None => return Err(SolveError::DampingExhausted { iteration: iter, residual: res, reason }),
        }
    }
    Err(SolveError::NonConvergence { iterations: opts.max_iterations, residual: max_norm(&r) })
}

/// Assemble a solution from a converged squared-distance iterate.
fn finish_from_distances(
    sdv: SquaredDistanceVector,
    nu: f64,
    mu: f64,
    masses: [f64; 4],
    iterations: usize,
    convexity_losses: usize,
) -> Result<CCSolution, SolveError> {
    let areas = geometry::oriented_areas_from_distances(&sdv).map_err(|_| SolveError::NotConvex)?;
    if !areas.has_convex_pattern() {
        return Err(SolveError::NotConvex);
    }
    if !(nu > 0.0) {
        return Err(SolveError::NuNotPositive { nu });
    }
    let residual_dziobek = ccequations::general_dziobek_residual(&sdv, &areas, nu, mu, &masses)?.norm;
    let configuration = geometry::embed(&sdv, masses)?;
    let lambda = ccequations::lambda_from_config(&configuration)?;
    let residual_position = ccequations::position_residual(&configuration, lambda)?.norm;
    if !(residual_position < CROSS_CHECK_TOLERANCE) {
        return Err(SolveError::CrossCheck { residual: residual_position });
    }
    let geometry_class = classify::classify(&sdv, classify::EQUALITY_TOLERANCE)?;
    Ok(CCSolution {
        configuration,
        sdv,
        areas,
        multipliers: Multipliers { lambda_cc: Some(lambda), nu, mu },
        residual_position,
        residual_dziobek,
        iterations,
        geometry_class,
        convexity_losses,
    })
}

/// Assemble a solution from converged positions.
fn finish_from_positions(
    configuration: PlanarConfiguration,
    lambda: f64,
    iterations: usize,
    convexity_losses: usize,
) -> Result<CCSolution, SolveError> {
    if classify::convexity(&configuration) != classify::Convexity::ConvexInOrder {
        return Err(SolveError::NotConvex);
    }
    let sdv = geometry::squared_distances(&configuration)?;
    let areas = geometry::oriented_areas_from_positions(&configuration);
    let residual_position = ccequations::position_residual(&configuration, lambda)?.norm;
    let (mut multipliers, residual_dziobek) = ccequations::fit_multipliers(&sdv, &areas, configuration.masses(), None)?;
    multipliers.lambda_cc = Some(lambda);
    if !(multipliers.nu > 0.0) {
        return Err(SolveError::NuNotPositive { nu: multipliers.nu });
    }
    if !(residual_dziobek < CROSS_CHECK_TOLERANCE) {
        return Err(SolveError::CrossCheck { residual: residual_dziobek });
    }
    let geometry_class = classify::classify(&sdv, classify::EQUALITY_TOLERANCE)?;
    Ok(CCSolution {
        configuration,
        sdv,
        areas,
        multipliers,
        residual_position,
        residual_dziobek,
        iterations,
        geometry_class,
        convexity_losses,
    })
}

/// Displace every coordinate by a uniform draw in `±relative · diameter`.
pub fn jitter(config: &PlanarConfiguration, relative: f64, seed: u64) -> PlanarConfiguration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = config.diameter();
    let positions = config.positions().map(|q| {
        [q[0] + relative * d * rng.random_range(-1.0..1.0), q[1] + relative * d * rng.random_range(-1.0..1.0)]
    });
    // Finite inputs stay finite, masses are unchanged.
    config.with_positions(positions).expect("jitter preserves validity")
}

/// Unit square in labelled order with masses `(1, 1, α, α)`.
pub fn square_configuration(alpha: f64) -> Result<PlanarConfiguration, GeometryError> {
    PlanarConfiguration::new([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], ccequations::family_masses(alpha))
}

pub(crate) fn check_alpha(alpha: f64) -> Result<(), SolveError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(SolveError::InvalidArgument("alpha must lie in (0, 1]"))
    }
}
