use alloc::vec::Vec;
use libm::sqrt;
use nalgebra::DMatrix;

use super::{
    damped_newton, finish_from_positions, CCSolution, JacobianMode, Rejection, SolveError, SolveOptions, System,
    COLLISION_FRACTION,
};
use crate::ccequations;
use crate::classify::{self, Convexity};
use crate::geometry::{PlanarConfiguration, PAIRS};
use crate::linalg;

/// Unknowns `(x₁, y₁, …, x₄, y₄, λ_cc)`; equations: eight acceleration
/// components, two centring rows, the inertia row and `y₁ = y₂`.
struct PositionSystem {
    masses: [f64; 4],
    total: f64,
    inertia: f64,
    length: f64,
    mode: JacobianMode,
}

impl PositionSystem {
    fn config(&self, x: &[f64]) -> Option<PlanarConfiguration> {
        PlanarConfiguration::new([[x[0], x[1]], [x[2], x[3]], [x[4], x[5]], [x[6], x[7]]], self.masses).ok()
    }

    fn raw_residual(&self, x: &[f64]) -> Result<Vec<f64>, Rejection> {
        let cfg = self.config(x).ok_or(Rejection::Collision)?;
        let acc = ccequations::accelerations(&cfg).map_err(|_| Rejection::Collision)?;
        let lambda = x[8];
        let w = self.length * self.length / self.total;
        let mut out = Vec::with_capacity(12);
        for i in 0..4 {
            for k in 0..2 {
                out.push(w * (acc[i][k] - lambda * x[2 * i + k]));
            }
        }
        let mut com = [0.0; 2];
        let mut moment = 0.0;
        for i in 0..4 {
            let (qx, qy) = (x[2 * i], x[2 * i + 1]);
            com[0] += self.masses[i] * qx;
            com[1] += self.masses[i] * qy;
            moment += self.masses[i] * (qx * qx + qy * qy);
        }
        out.push(com[0] / (self.total * self.length));
        out.push(com[1] / (self.total * self.length));
        out.push((moment - self.inertia) / self.inertia);
        out.push((x[1] - x[3]) / self.length);
        Ok(out)
    }

    fn analytic_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(12, 9);
        let w = self.length * self.length / self.total;
        let lambda = x[8];
        for &(i, j) in &PAIRS {
            let dx = x[2 * j] - x[2 * i];
            let dy = x[2 * j + 1] - x[2 * i + 1];
            let r2 = dx * dx + dy * dy;
            let r = sqrt(r2);
            let inv3 = 1.0 / (r2 * r);
            let inv5 = inv3 / r2;
            // K = I/r³ − 3 d dᵀ/r⁵ is ∂[(qⱼ − qᵢ)/r³]/∂qⱼ.
            let k = [
                [inv3 - 3.0 * dx * dx * inv5, -3.0 * dx * dy * inv5],
                [-3.0 * dx * dy * inv5, inv3 - 3.0 * dy * dy * inv5],
            ];
            for a in 0..2 {
                for b in 0..2 {
                    // acc_i gains m_j (qⱼ − qᵢ)/r³; acc_j gains m_i (qᵢ − qⱼ)/r³.
                    jac[(2 * i + a, 2 * j + b)] += w * self.masses[j] * k[a][b];
                    jac[(2 * i + a, 2 * i + b)] -= w * self.masses[j] * k[a][b];
                    jac[(2 * j + a, 2 * i + b)] += w * self.masses[i] * k[a][b];
                    jac[(2 * j + a, 2 * j + b)] -= w * self.masses[i] * k[a][b];
                }
            }
        }
        for row in 0..8 {
            jac[(row, row)] -= w * lambda;
            jac[(row, 8)] = -w * x[row];
        }
        for i in 0..4 {
            let m = self.masses[i];
            jac[(8, 2 * i)] = m / (self.total * self.length);
            jac[(9, 2 * i + 1)] = m / (self.total * self.length);
            jac[(10, 2 * i)] = 2.0 * m * x[2 * i] / self.inertia;
            jac[(10, 2 * i + 1)] = 2.0 * m * x[2 * i + 1] / self.inertia;
        }
        jac[(11, 1)] = 1.0 / self.length;
        jac[(11, 3)] = -1.0 / self.length;
        jac
    }
}

impl System for PositionSystem {
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>, Rejection> {
        let cfg = self.config(x).ok_or(Rejection::Collision)?;
        let d = cfg.diameter();
        if cfg.closest_pair().0 < COLLISION_FRACTION * d * d {
            return Err(Rejection::Collision);
        }
        if classify::convexity(&cfg) != Convexity::ConvexInOrder {
            return Err(Rejection::LostConvexity);
        }
        self.raw_residual(x)
    }

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>, SolveError> {
        match self.mode {
            JacobianMode::Analytic => Ok(self.analytic_jacobian(x)),
            JacobianMode::FiniteDifference => {
                linalg::fd_jacobian(|y| self.raw_residual(y), x, 12, 1e-6).map_err(|_| SolveError::Collision)
            }
        }
    }
}

/// Centre, rotate so that body 2 lies on the positive x-direction from
/// body 1, and rescale to the requested inertia.
fn normalize_initial(config: &PlanarConfiguration, inertia: f64) -> Result<PlanarConfiguration, SolveError> {
    let c = config.centered();
    let q = c.positions();
    let (ux, uy) = (q[1][0] - q[0][0], q[1][1] - q[0][1]);
    let len = sqrt(ux * ux + uy * uy);
    if len == 0.0 {
        return Err(SolveError::Collision);
    }
    let (cs, sn) = (ux / len, uy / len);
    let rotated = q.map(|p| [cs * p[0] + sn * p[1], -sn * p[0] + cs * p[1]]);
    let r = c.with_positions(rotated)?;
    let k = sqrt(inertia / r.polar_moment());
    Ok(r.scaled(k))
}

/// Solve `M⁻¹∇U = λ_cc q` for the given masses from a convex initial guess.
pub fn solve_position(
    masses: [f64; 4],
    initial: &PlanarConfiguration,
    opts: &SolveOptions,
) -> Result<CCSolution, SolveError> {
    if !(opts.inertia > 0.0) {
        return Err(SolveError::InvalidArgument("inertia must be positive"));
    }
    let start = normalize_initial(&initial.with_masses(masses)?, opts.inertia)?;
    if classify::convexity(&start) != Convexity::ConvexInOrder {
        return Err(SolveError::NotConvex);
    }
    let lambda0 = ccequations::lambda_from_config(&start)?;
    let total: f64 = masses.iter().sum();
    let system = PositionSystem {
        masses,
        total,
        inertia: opts.inertia,
        length: sqrt(opts.inertia / total),
        mode: opts.jacobian_mode,
    };
    let mut x0: Vec<f64> = start.positions().iter().flatten().copied().collect();
    x0.push(lambda0);
    let it = damped_newton(&system, x0, opts)?;
    if it.stagnated {
        return Err(SolveError::NonConvergence { iterations: it.iterations, residual: it.residual });
    }
    // Exact re-centring removes the rounding-level offset left by the solve.
    let cfg = system.config(&it.x).ok_or(SolveError::Collision)?.centered();
    finish_from_positions(cfg, it.x[8], it.iterations, it.convexity_losses)
}
