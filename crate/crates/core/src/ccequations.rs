//! Central-configuration equations: the position-space condition
//! `M⁻¹∇U = λ_cc q` and the squared-distance form
//! `mᵢmⱼ φ′(r²ᵢⱼ) = ν ΔᵢΔⱼ + μ mᵢmⱼ` with `φ(s) = s^{-1/2}`.
//!
//! Two different multipliers appear. `lambda_cc` is the scalar of the
//! position-space condition (negative for gravity). `nu` is 32 times the
//! Lagrange multiplier of the planarity constraint in the distance form.

use alloc::vec::Vec;
use libm::{pow, sqrt};

use crate::error::{Error, Result};
use crate::geometry::{self, OrientedAreaVector, PlanarConfiguration, Point, SquaredDistanceVector, PAIRS};

/// Relative centre-of-mass offset tolerated by operations that require a
/// centred configuration.
pub const CENTERING_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multipliers {
    /// Position-space multiplier, when a position embedding is known.
    pub lambda_cc: Option<f64>,
    pub nu: f64,
    pub mu: f64,
}

/// Residual entries in a fixed equation order, with the per-equation scale
/// used to form the max-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualVector {
    pub entries: Vec<f64>,
    pub scales: Vec<f64>,
    pub norm: f64,
}

impl ResidualVector {
    pub fn new(entries: Vec<f64>, scales: Vec<f64>) -> Self {
        let norm = entries.iter().zip(&scales).map(|(r, s)| (r * s).abs()).fold(0.0, f64::max);
        Self { entries, scales, norm }
    }

    pub fn scaled(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().zip(&self.scales).map(|(r, s)| r * s)
    }
}

/// `φ′(s) = −½ s^{-3/2}`, negative and strictly increasing on `s > 0`.
pub fn phi_prime(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain("phi_prime requires s > 0"));
    }
    Ok(-0.5 / (s * sqrt(s)))
}

/// `φ″(s) = ¾ s^{-5/2}`.
pub fn phi_double_prime(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain("phi_double_prime requires s > 0"));
    }
    Ok(0.75 / (s * s * sqrt(s)))
}

/// Accelerations `M⁻¹ ∂U/∂qᵢ = Σⱼ mⱼ (qⱼ − qᵢ) / rᵢⱼ³`.
pub fn accelerations(config: &PlanarConfiguration) -> Result<[Point; 4]> {
    let sdv = geometry::squared_distances(config)?;
    let q = config.positions();
    let m = config.masses();
    let mut acc = [[0.0; 2]; 4];
    for (&(i, j), r2) in PAIRS.iter().zip(sdv.to_array()) {
        let inv_r3 = 1.0 / (r2 * sqrt(r2));
        let dx = q[j][0] - q[i][0];
        let dy = q[j][1] - q[i][1];
        acc[i][0] += m[j] * dx * inv_r3;
        acc[i][1] += m[j] * dy * inv_r3;
        acc[j][0] -= m[i] * dx * inv_r3;
        acc[j][1] -= m[i] * dy * inv_r3;
    }
    Ok(acc)
}

fn require_centered(config: &PlanarConfiguration) -> Result<()> {
    let offset = config.center_of_mass_offset();
    if offset > CENTERING_TOLERANCE {
        return Err(Error::NotCentered { offset });
    }
    Ok(())
}

/// Characteristic acceleration `Σm / diameter²`, used to make position
/// residuals dimensionless.
pub fn acceleration_scale(config: &PlanarConfiguration) -> f64 {
    let d = config.diameter();
    config.total_mass() / (d * d)
}

/// The eight components `M⁻¹∂U/∂qᵢ − λ_cc qᵢ`, ordered `(x₁, y₁, …, x₄, y₄)`.
pub fn position_residual(config: &PlanarConfiguration, lambda_cc: f64) -> Result<ResidualVector> {
    require_centered(config)?;
    let acc = accelerations(config)?;
    let q = config.positions();
    let mut entries = Vec::with_capacity(8);
    for i in 0..4 {
        for k in 0..2 {
            entries.push(acc[i][k] - lambda_cc * q[i][k]);
        }
    }
    let w = 1.0 / acceleration_scale(config);
    Ok(ResidualVector::new(entries, alloc::vec![w; 8]))
}

/// `λ_cc = −U / Σmᵢ‖qᵢ‖²`, from the degree −1 homogeneity of `U`.
pub fn lambda_from_config(config: &PlanarConfiguration) -> Result<f64> {
    require_centered(config)?;
    let u = geometry::potential(config)?;
    Ok(-u / config.polar_moment())
}

/// `Σᵢ qᵢ·∂U/∂qᵢ + U`, which vanishes identically (Euler's theorem for a
/// degree −1 homogeneous potential). Returned relative to `U`.
pub fn virial_defect(config: &PlanarConfiguration) -> Result<f64> {
    let acc = accelerations(config)?;
    let u = geometry::potential(config)?;
    let q = config.positions();
    let m = config.masses();
    let dot: f64 = (0..4).map(|i| m[i] * (q[i][0] * acc[i][0] + q[i][1] * acc[i][1])).sum();
    Ok((dot + u).abs() / u)
}

fn distance_weight(sdv: &SquaredDistanceVector) -> Result<f64> {
    Ok(1.0 / phi_prime(sdv.scale())?.abs())
}

/// Eq.-(11) residuals `mᵢmⱼφ′(r²ᵢⱼ) − νΔᵢΔⱼ − μmᵢmⱼ` in pair order
/// `(12, 13, 14, 23, 24, 34)`. The norm divides each entry by `mᵢmⱼ` and by
/// `|φ′|` at the configuration scale.
pub fn general_dziobek_residual(
    sdv: &SquaredDistanceVector,
    areas: &OrientedAreaVector,
    nu: f64,
    mu: f64,
    masses: &[f64; 4],
) -> Result<ResidualVector> {
    let w = distance_weight(sdv)?;
    let mut entries = Vec::with_capacity(6);
    let mut scales = Vec::with_capacity(6);
    for (&(i, j), s) in PAIRS.iter().zip(sdv.to_array()) {
        let mm = masses[i] * masses[j];
        entries.push(mm * phi_prime(s)? - nu * areas.get(i) * areas.get(j) - mu * mm);
        scales.push(w / mm);
    }
    Ok(ResidualVector::new(entries, scales))
}

/// Coefficient `1/(mᵢmⱼ)` multiplying `νΔᵢΔⱼ` for masses `(1, 1, α, α)`.
pub fn pair_coefficients(alpha: f64) -> [f64; 6] {
    PAIRS.map(|(i, j)| {
        let mi = if i < 2 { 1.0 } else { alpha };
        let mj = if j < 2 { 1.0 } else { alpha };
        1.0 / (mi * mj)
    })
}

pub fn family_masses(alpha: f64) -> [f64; 4] {
    [1.0, 1.0, alpha, alpha]
}

/// The six equations for masses `(1, 1, α, α)`:
/// `φ′(s) − (ν/mᵢmⱼ)ΔᵢΔⱼ − μ` in pair order `(a, b, c, d, e, f)`.
pub fn dziobek_residual(
    sdv: &SquaredDistanceVector,
    areas: &OrientedAreaVector,
    nu: f64,
    mu: f64,
    alpha: f64,
) -> Result<ResidualVector> {
    if !(alpha > 0.0) {
        return Err(Error::Domain("alpha must be positive"));
    }
    let w = distance_weight(sdv)?;
    let coeff = pair_coefficients(alpha);
    let mut entries = Vec::with_capacity(6);
    for (k, (&(i, j), s)) in PAIRS.iter().zip(sdv.to_array()).enumerate() {
        entries.push(phi_prime(s)? - nu * coeff[k] * areas.get(i) * areas.get(j) - mu);
    }
    Ok(ResidualVector::new(entries, alloc::vec![w; 6]))
}

/// Least-squares fit of `(ν, μ)` to the six linear equations
/// `φ′(r²ᵢⱼ) = ν ΔᵢΔⱼ/(mᵢmⱼ) + μ`. Returns the multipliers and the scaled
/// max-norm of the post-fit residual. When `embedding` is given, `lambda_cc`
/// is filled from it.
pub fn fit_multipliers(
    sdv: &SquaredDistanceVector,
    areas: &OrientedAreaVector,
    masses: &[f64; 4],
    embedding: Option<&PlanarConfiguration>,
) -> Result<(Multipliers, f64)> {
    let mut x = [0.0; 6];
    let mut y = [0.0; 6];
    for (k, (&(i, j), s)) in PAIRS.iter().zip(sdv.to_array()).enumerate() {
        x[k] = areas.get(i) * areas.get(j) / (masses[i] * masses[j]);
        y[k] = phi_prime(s)?;
    }
    let xm = x.iter().sum::<f64>() / 6.0;
    let ym = y.iter().sum::<f64>() / 6.0;
    let sxx: f64 = x.iter().map(|v| (v - xm) * (v - xm)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(u, v)| (u - xm) * (v - ym)).sum();
    let xs = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(sxx > 1e-24 * xs * xs) {
        return Err(Error::DegenerateFit);
    }
    let nu = sxy / sxx;
    let mu = ym - nu * xm;
    let lambda_cc = embedding.map(lambda_from_config).transpose()?;
    let residual = general_dziobek_residual(sdv, areas, nu, mu, masses)?;
    Ok((Multipliers { lambda_cc, nu, mu }, residual.norm))
}

/// Rescale masses by `1/ζ` and positions by `ζ^{-1/3}`, then evaluate the
/// position residual with the original `λ_cc`. Small for a true central
/// configuration.
pub fn mass_scaling_check(config: &PlanarConfiguration, zeta: f64) -> Result<f64> {
    if !(zeta > 0.0) {
        return Err(Error::Domain("zeta must be positive"));
    }
    let lambda = lambda_from_config(config)?;
    let masses = config.masses().map(|m| m / zeta);
    let scaled = config.with_masses(masses)?.scaled(pow(zeta, -1.0 / 3.0));
    Ok(position_residual(&scaled, lambda)?.norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{oriented_areas_from_positions, squared_distances};
    use proptest::prelude::*;

    fn centered_square(masses: [f64; 4]) -> PlanarConfiguration {
        PlanarConfiguration::new([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]], masses).unwrap()
    }

    fn generic() -> PlanarConfiguration {
        PlanarConfiguration::new([[0.0, 0.0], [1.4, 0.2], [1.1, 1.3], [-0.1, 0.8]], [1.0, 2.0, 3.0, 4.0])
            .unwrap()
            .centered()
    }

    #[test]
    fn phi_prime_values() {
        assert_eq!(phi_prime(1.0).unwrap(), -0.5);
        assert_eq!(phi_prime(4.0).unwrap(), -1.0 / 16.0);
        assert!(phi_prime(0.0).is_err());
        assert!(phi_prime(-1.0).is_err());
    }

    #[test]
    fn square_is_central() {
        let cfg = centered_square([1.0; 4]);
        let lambda = lambda_from_config(&cfg).unwrap();
        assert!((lambda + (4.0 + sqrt(2.0)) / 2.0).abs() < 1e-14);
        assert!(position_residual(&cfg, lambda).unwrap().norm < 1e-12);
        assert!(position_residual(&cfg, 0.0).unwrap().norm > 0.1);
    }

    #[test]
    fn uncentred_configuration_is_rejected() {
        let cfg = centered_square([1.0; 4]).scaled(1.0);
        let shifted = cfg.with_positions(cfg.positions().map(|q| [q[0] + 0.1, q[1]])).unwrap();
        assert!(matches!(position_residual(&shifted, -1.0), Err(Error::NotCentered { .. })));
    }

    #[test]
    fn virial_identity_holds() {
        assert!(virial_defect(&generic()).unwrap() < 1e-14);
    }

    #[test]
    fn lambda_scaling_laws() {
        let cfg = generic();
        let l = lambda_from_config(&cfg).unwrap();
        let k = 1.7;
        let lk = lambda_from_config(&cfg.scaled(k)).unwrap();
        assert!((lk - l / (k * k * k)).abs() < 1e-13 * l.abs());
        let doubled = cfg.with_masses(cfg.masses().map(|m| 2.0 * m)).unwrap();
        let l2 = lambda_from_config(&doubled).unwrap();
        assert!((l2 - 2.0 * l).abs() < 1e-13 * l.abs());
    }

    #[test]
    fn generic_config_is_not_central() {
        let cfg = generic();
        let l = lambda_from_config(&cfg).unwrap();
        assert!(position_residual(&cfg, l).unwrap().norm > 1e-3);
    }

    #[test]
    fn square_dziobek_fit() {
        let cfg = centered_square([1.0; 4]);
        let sdv = squared_distances(&cfg).unwrap();
        let areas = oriented_areas_from_positions(&cfg);
        let (mult, res) = fit_multipliers(&sdv, &areas, &[1.0; 4], Some(&cfg)).unwrap();
        assert!(mult.nu > 0.0);
        assert!(res < 1e-12);
        assert!(mult.lambda_cc.unwrap() < 0.0);
        let r = dziobek_residual(&sdv, &areas, mult.nu, mult.mu, 1.0).unwrap();
        assert!(r.norm < 1e-12);
    }

    #[test]
    fn zero_nu_residual_vanishes_only_for_equal_distances() {
        let areas = OrientedAreaVector([-0.5, 0.5, -0.5, 0.5]);
        let eq = SquaredDistanceVector::from_array([1.0; 6]);
        let mu = phi_prime(1.0).unwrap();
        assert_eq!(dziobek_residual(&eq, &areas, 0.0, mu, 0.5).unwrap().norm, 0.0);
        let sq = SquaredDistanceVector::unit_square();
        assert!(dziobek_residual(&sq, &areas, 0.0, mu, 0.5).unwrap().norm > 0.1);
    }

    #[test]
    fn degenerate_fit() {
        // Every coefficient ΔᵢΔⱼ equal: all areas zero.
        let areas = OrientedAreaVector([0.0; 4]);
        let sdv = SquaredDistanceVector::new(1.0, 4.0, 9.0, 1.0, 4.0, 1.0);
        assert_eq!(fit_multipliers(&sdv, &areas, &[1.0; 4], None), Err(Error::DegenerateFit));
    }

    #[test]
    fn non_central_general_residual_stays_positive() {
        let cfg = generic();
        let sdv = squared_distances(&cfg).unwrap();
        let areas = oriented_areas_from_positions(&cfg);
        let (_, res) = fit_multipliers(&sdv, &areas, cfg.masses(), None).unwrap();
        assert!(res > 1e-3);
    }

    #[test]
    fn square_mass_scaling() {
        let cfg = centered_square([1.0; 4]);
        assert!(mass_scaling_check(&cfg, 8.0).unwrap() < 1e-10);
    }

    #[test]
    fn non_central_mass_scaling_keeps_residual() {
        let cfg = generic();
        let l = lambda_from_config(&cfg).unwrap();
        let base = position_residual(&cfg, l).unwrap().norm;
        for zeta in [0.5, 2.0, 8.0] {
            let r = mass_scaling_check(&cfg, zeta).unwrap();
            assert!((r - base).abs() < 1e-10 * base, "zeta={zeta}");
        }
    }

    #[test]
    fn affine_in_multipliers() {
        let cfg = generic();
        let sdv = squared_distances(&cfg).unwrap();
        let areas = oriented_areas_from_positions(&cfg);
        let at = |nu, mu| dziobek_residual(&sdv, &areas, nu, mu, 0.3).unwrap().entries;
        let (p0, p1, p2) = (at(0.2, -0.1), at(0.7, 0.3), at(1.2, 0.7));
        for k in 0..6 {
            assert!((p0[k] + p2[k] - 2.0 * p1[k]).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn phi_prime_is_increasing(s1 in 1e-3f64..1e3, ds in 1e-6f64..1e3) {
            prop_assert!(phi_prime(s1).unwrap() < phi_prime(s1 + ds).unwrap());
        }

        #[test]
        fn family_residual_is_specialized_general_residual(
            alpha in 0.05f64..1.0, nu in -2.0f64..2.0, mu in -2.0f64..2.0,
            dx in -0.2f64..0.2, dy in -0.2f64..0.2,
        ) {
            let cfg = PlanarConfiguration::new(
                [[0.0, 0.0], [1.0, 0.0], [1.1 + dx, 1.0 + dy], [-0.1, 0.9]],
                family_masses(alpha),
            ).unwrap();
            let sdv = squared_distances(&cfg).unwrap();
            let areas = oriented_areas_from_positions(&cfg);
            let gen = general_dziobek_residual(&sdv, &areas, nu, mu, cfg.masses()).unwrap();
            let fam = dziobek_residual(&sdv, &areas, nu, mu, alpha).unwrap();
            for (k, &(i, j)) in PAIRS.iter().enumerate() {
                let mm = cfg.masses()[i] * cfg.masses()[j];
                prop_assert!((gen.entries[k] / mm - fam.entries[k]).abs() <= 1e-15 * (1.0 + fam.entries[k].abs()) * 4.0);
            }
            prop_assert!((gen.norm - fam.norm).abs() <= 1e-12 * (1.0 + fam.norm));
        }
    }
}
