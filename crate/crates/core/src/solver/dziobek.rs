use alloc::vec::Vec;
use nalgebra::DMatrix;

use super::{
    check_alpha, damped_newton, finish_from_distances, CCSolution, JacobianMode, Rejection, SolveError, SolveOptions,
    System, COLLISION_FRACTION,
};
use crate::ccequations::{self, family_masses, pair_coefficients, phi_double_prime, phi_prime};
use crate::classify::Hypothesis;
use crate::geometry::{self, SquaredDistanceVector, PAIRS};
use crate::linalg;

/// Which unknowns are free. The full system solves for `(b, c, d, e, f, ν, μ)`
/// with `a = 1`; the constrained variants tie one side pair together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reduction {
    Full,
    Tied(Hypothesis),
}

struct DziobekSystem {
    coeff: [f64; 6],
    reduction: Reduction,
    mode: JacobianMode,
}

impl DziobekSystem {
    /// Map the free unknowns onto `([a..f], ν, μ)`.
    fn expand(&self, x: &[f64]) -> ([f64; 6], f64, f64) {
        match self.reduction {
            Reduction::Full => ([1.0, x[0], x[1], x[2], x[3], x[4]], x[5], x[6]),
            // e := b
            Reduction::Tied(Hypothesis::EqualDiagonals) => ([1.0, x[0], x[1], x[2], x[0], x[3]], x[4], x[5]),
            // d := c
            Reduction::Tied(Hypothesis::EqualLaterals) => ([1.0, x[0], x[1], x[1], x[2], x[3]], x[4], x[5]),
        }
    }

    fn full_unknowns(&self, x: &[f64]) -> [f64; 7] {
        let (s, nu, mu) = self.expand(x);
        [s[1], s[2], s[3], s[4], s[5], nu, mu]
    }

    fn admissible(&self, s: &[f64; 6]) -> Result<SquaredDistanceVector, Rejection> {
        if s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Rejection::NotRealizable);
        }
        let sdv = SquaredDistanceVector::from_array(*s);
        if s.iter().copied().fold(f64::INFINITY, f64::min) < COLLISION_FRACTION * sdv.scale() {
            return Err(Rejection::Collision);
        }
        Ok(sdv)
    }

    /// Unscaled residuals `φ′(s) − ν c ΔᵢΔⱼ − μ` (six) and `S`, on full unknowns.
    fn raw_residual(&self, full: &[f64]) -> Result<Vec<f64>, Rejection> {
        let s = [1.0, full[0], full[1], full[2], full[3], full[4]];
        let (nu, mu) = (full[5], full[6]);
        let sdv = self.admissible(&s)?;
        let areas = geometry::convex_signed_areas(&sdv).map_err(|_| Rejection::NotRealizable)?;
        if areas.0.contains(&0.0) {
            return Err(Rejection::NotRealizable);
        }
        let mut out = Vec::with_capacity(7);
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            let p = phi_prime(s[k]).map_err(|_| Rejection::NotRealizable)?;
            out.push(p - nu * self.coeff[k] * areas.get(i) * areas.get(j) - mu);
        }
        out.push(geometry::cayley_menger(&sdv));
        Ok(out)
    }

    fn weights(s: &[f64; 6]) -> [f64; 7] {
        let scale = s.iter().copied().fold(0.0, f64::max);
        let w = 2.0 * scale * libm::sqrt(scale);
        [w, w, w, w, w, w, 1.0 / (scale * scale * scale)]
    }

    fn analytic_full_jacobian(&self, full: &[f64]) -> Result<DMatrix<f64>, SolveError> {
        let s = [1.0, full[0], full[1], full[2], full[3], full[4]];
        let nu = full[5];
        let sdv = SquaredDistanceVector::from_array(s);
        let areas = geometry::convex_signed_areas(&sdv)?;
        let da = geometry::area_jacobian(&sdv)?;
        let grad = geometry::cayley_menger_gradient(&sdv);
        let mut jac = DMatrix::zeros(7, 7);
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            let c = self.coeff[k];
            for l in 1..6 {
                let mut v = -nu * c * (da[i][l] * areas.get(j) + areas.get(i) * da[j][l]);
                if l == k {
                    v += phi_double_prime(s[k])?;
                }
                jac[(k, l - 1)] = v;
            }
            jac[(k, 5)] = -c * areas.get(i) * areas.get(j);
            jac[(k, 6)] = -1.0;
        }
        for l in 1..6 {
            jac[(6, l - 1)] = grad[l];
        }
        Ok(jac)
    }

    /// Fold the full 7-column Jacobian onto the free unknowns.
    fn reduce(&self, full: DMatrix<f64>) -> DMatrix<f64> {
        // Columns of the full system: b c d e f ν μ.
        let (keep, add): (&[usize], Option<(usize, usize)>) = match self.reduction {
            Reduction::Full => return full,
            Reduction::Tied(Hypothesis::EqualDiagonals) => (&[0, 1, 2, 4, 5, 6], Some((0, 3))),
            Reduction::Tied(Hypothesis::EqualLaterals) => (&[0, 1, 3, 4, 5, 6], Some((1, 2))),
        };
        let mut m = full;
        if let Some((into, from)) = add {
            for r in 0..m.nrows() {
                m[(r, into)] += m[(r, from)];
            }
        }
        DMatrix::from_fn(m.nrows(), keep.len(), |r, c| m[(r, keep[c])])
    }
}

impl System for DziobekSystem {
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>, Rejection> {
        let full = self.full_unknowns(x);
        let raw = self.raw_residual(&full)?;
        let (s, _, _) = self.expand(x);
        let w = Self::weights(&s);
        Ok(raw.iter().zip(w).map(|(r, w)| r * w).collect())
    }

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>, SolveError> {
        let full = self.full_unknowns(x);
        let mut jac = match self.mode {
            JacobianMode::Analytic => self.analytic_full_jacobian(&full)?,
            JacobianMode::FiniteDifference => {
                linalg::fd_jacobian(|y| self.raw_residual(y), &full, 7, 1e-7).map_err(|_| SolveError::NotConvex)?
            }
        };
        let (s, _, _) = self.expand(x);
        for (r, w) in Self::weights(&s).iter().enumerate() {
            for c in 0..7 {
                jac[(r, c)] *= w;
            }
        }
        Ok(self.reduce(jac))
    }
}

/// Normalize to `a = 1` and fit `(ν, μ)` to the starting geometry.
fn initial_unknowns(alpha: f64, initial: &SquaredDistanceVector) -> Result<([f64; 6], f64, f64), SolveError> {
    if !(initial.a > 0.0) {
        return Err(SolveError::InvalidInitial(crate::Error::Domain("a must be positive")));
    }
    let n = initial.normalized();
    let areas = geometry::convex_signed_areas(&n).map_err(SolveError::InvalidInitial)?;
    let (m, _) =
        ccequations::fit_multipliers(&n, &areas, &family_masses(alpha), None).map_err(SolveError::InvalidInitial)?;
    Ok((n.to_array(), m.nu, m.mu))
}

/// Newton on the six squared-distance equations plus `S = 0`, gauge `a = 1`.
pub fn solve_dziobek(
    alpha: f64,
    initial: &SquaredDistanceVector,
    opts: &SolveOptions,
) -> Result<CCSolution, SolveError> {
    check_alpha(alpha)?;
    let (s, nu, mu) = initial_unknowns(alpha, initial)?;
    let system =
        DziobekSystem { coeff: pair_coefficients(alpha), reduction: Reduction::Full, mode: opts.jacobian_mode };
    let x0 = alloc::vec![s[1], s[2], s[3], s[4], s[5], nu, mu];
    let it = damped_newton(&system, x0, opts)?;
    if it.stagnated {
        return Err(SolveError::NonConvergence { iterations: it.iterations, residual: it.residual });
    }
    let (s, nu, mu) = system.expand(&it.x);
    finish_from_distances(
        SquaredDistanceVector::from_array(s),
        nu,
        mu,
        family_masses(alpha),
        it.iterations,
        it.convexity_losses,
    )
}

/// Solve with one side-pair equality imposed (`e := b` or `d := c`). The
/// seven equations are then overdetermined in six unknowns; convergence with
/// a vanishing full residual shows the constrained manifold holds a genuine
/// central configuration.
pub fn constrained_solve(
    alpha: f64,
    constraint: Hypothesis,
    initial: &SquaredDistanceVector,
    opts: &SolveOptions,
) -> Result<CCSolution, SolveError> {
    check_alpha(alpha)?;
    let mut start = *initial;
    match constraint {
        Hypothesis::EqualDiagonals => {
            let m = 0.5 * (start.b + start.e);
            start.b = m;
            start.e = m;
        }
        Hypothesis::EqualLaterals => {
            let m = 0.5 * (start.c + start.d);
            start.c = m;
            start.d = m;
        }
    }
    let (s, nu, mu) = initial_unknowns(alpha, &start)?;
    let x0 = match constraint {
        Hypothesis::EqualDiagonals => alloc::vec![s[1], s[2], s[3], s[5], nu, mu],
        Hypothesis::EqualLaterals => alloc::vec![s[1], s[2], s[4], s[5], nu, mu],
    };
    let system = DziobekSystem {
        coeff: pair_coefficients(alpha),
        reduction: Reduction::Tied(constraint),
        mode: opts.jacobian_mode,
    };
    let it = damped_newton(&system, x0, opts)?;
    if it.stagnated || !(it.residual < opts.residual_tolerance) {
        return Err(SolveError::TheoremWitnessFailure { residual: it.residual });
    }
    let (s, nu, mu) = system.expand(&it.x);
    finish_from_distances(
        SquaredDistanceVector::from_array(s),
        nu,
        mu,
        family_masses(alpha),
        it.iterations,
        it.convexity_losses,
    )
}
