//! Randomized checks of the geometric identities over convex configurations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{self, PlanarConfiguration, SquaredDistanceVector, PAIRS};

/// Minimum pairwise separation of sampled vertices, as a fraction of the box side.
pub const MIN_SEPARATION: f64 = 0.05;

/// Finite-difference step for the gradient check, relative to the squared scale.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub planarity: f64,
    pub area_sum: f64,
    pub dziobek: f64,
    pub gradient_fd: f64,
    pub albouy: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { planarity: 1e-10, area_sum: 1e-12, dziobek: 1e-8, gradient_fd: 1e-8, albouy: 1e-10 }
    }
}

/// Worst-case relative errors over a sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IdentityReport {
    pub samples: usize,
    /// `|S| / diameter⁶`
    pub planarity: f64,
    /// `|ΣΔ| / Σ|Δ|`
    pub area_sum: f64,
    /// `|∂S/∂r²ᵢⱼ + 32ΔᵢΔⱼ| / (diameter⁴ + |∂S/∂r²ᵢⱼ|)`
    pub dziobek: f64,
    /// analytic gradient against central differences, same normalization
    pub gradient_fd: f64,
    /// spread of the `t_l`, relative to `Σ|Δ| · max r²`
    pub albouy: f64,
}

impl IdentityReport {
    /// `(name, worst, threshold)` rows in report order.
    pub fn rows(&self, t: &Thresholds) -> [(&'static str, f64, f64); 5] {
        [
            ("cayley_menger_planarity", self.planarity, t.planarity),
            ("area_sum", self.area_sum, t.area_sum),
            ("dziobek_gradient_vs_areas", self.dziobek, t.dziobek),
            ("dziobek_gradient_vs_finite_differences", self.gradient_fd, t.gradient_fd),
            ("albouy_relations", self.albouy, t.albouy),
        ]
    }

    pub fn passed(&self, t: &Thresholds) -> bool {
        self.rows(t).iter().all(|(_, worst, limit)| worst < limit)
    }
}

/// Uniform vertices in the unit box, rejection-sampled until they are convex
/// in labelled order and pairwise separated by [`MIN_SEPARATION`].
pub fn sample_convex_configuration(rng: &mut impl Rng) -> PlanarConfiguration {
    loop {
        let positions = core::array::from_fn(|_| [rng.random::<f64>(), rng.random::<f64>()]);
        let masses = core::array::from_fn(|_| rng.random_range(0.1..1.0));
        let cfg = PlanarConfiguration::new(positions, masses).expect("sampled values are valid");
        if cfg.closest_pair().0 < MIN_SEPARATION * MIN_SEPARATION {
            continue;
        }
        if geometry::oriented_areas_from_positions(&cfg).has_convex_pattern() {
            return cfg;
        }
    }
}

/// Central-difference gradient of the Cayley–Menger determinant.
pub fn cayley_menger_fd_gradient(sdv: &SquaredDistanceVector, step: f64) -> [f64; 6] {
    let base = sdv.to_array();
    core::array::from_fn(|k| {
        let mut p = base;
        let mut m = base;
        p[k] += step;
        m[k] -= step;
        (geometry::cayley_menger(&SquaredDistanceVector::from_array(p))
            - geometry::cayley_menger(&SquaredDistanceVector::from_array(m)))
            / (2.0 * step)
    })
}

/// Evaluate every identity on one configuration and fold into `report`.
pub fn accumulate(report: &mut IdentityReport, cfg: &PlanarConfiguration) {
    let sdv = geometry::squared_distances(cfg).expect("sampled configurations are separated");
    let areas = geometry::oriented_areas_from_positions(cfg);
    let diam2 = sdv.scale();
    let grad = geometry::cayley_menger_gradient(&sdv);
    let fd = cayley_menger_fd_gradient(&sdv, FD_STEP * diam2);

    report.samples += 1;
    report.planarity = report.planarity.max(geometry::cayley_menger(&sdv).abs() / (diam2 * diam2 * diam2));
    report.area_sum = report.area_sum.max(areas.relative_sum_defect());
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        let denom = diam2 * diam2 + grad[k].abs();
        let identity = (grad[k] + 32.0 * areas.get(i) * areas.get(j)).abs() / denom;
        report.dziobek = report.dziobek.max(identity);
        report.gradient_fd = report.gradient_fd.max((grad[k] - fd[k]).abs() / denom);
    }
    report.albouy = report.albouy.max(geometry::albouy_spread(&sdv, &areas));
}

/// Run the identity suite over `samples` seeded random configurations.
pub fn run(samples: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = IdentityReport::default();
    for _ in 0..samples {
        let cfg = sample_convex_configuration(&mut rng);
        accumulate(&mut report, &cfg);
    }
    report
}
