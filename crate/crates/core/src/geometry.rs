//! Distances, oriented areas and the Cayley–Menger determinant of a planar
//! four-body configuration.
//!
//! Bodies are indexed `0..4` in code and labelled 1..4 in prose. The labelled
//! cyclic order is counter-clockwise: body 1 bottom-left, 2 bottom-right,
//! 3 top-right, 4 top-left. Every sign convention below assumes that order.

use libm::sqrt;
use nalgebra::{Matrix4, Matrix5};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Body pairs in squared-distance order: `a=r12², b=r13², c=r14², d=r23², e=r24², f=r34²`.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Short names of the six squared distances, in [`PAIRS`] order.
pub const PAIR_NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

/// For each body, the three bodies of its opposite triangle (ascending).
pub const OPPOSITE: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// Sign applied to the magnitude of each opposite-triangle area.
pub const CONVEX_SIGNS: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];

/// Heron discriminants within this band (relative to the squared scale) clamp to zero.
pub const HERON_CLAMP: f64 = 1e-14;

/// Relative zero-sum defect beyond which distance-derived areas are rejected.
pub const AREA_SUM_TOLERANCE: f64 = 1e-8;

/// Index into the six squared distances for bodies `i != j`.
pub fn pair_index(i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    match (i, j) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => panic!("no pair ({i}, {j}) among four bodies"),
    }
}

/// Four positioned point masses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarConfiguration {
    positions: [Point; 4],
    masses: [f64; 4],
}

impl PlanarConfiguration {
    /// Masses must be positive and finite; coordinates finite. Coincident
    /// points are allowed here and rejected by the operations that need
    /// distinct bodies.
    pub fn new(positions: [Point; 4], masses: [f64; 4]) -> Result<Self> {
        for (index, &value) in masses.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidMass { index, value });
            }
        }
        if positions.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { positions, masses })
    }

    pub fn positions(&self) -> &[Point; 4] {
        &self.positions
    }

    pub fn masses(&self) -> &[f64; 4] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn center_of_mass(&self) -> Point {
        let m = self.total_mass();
        let mut c = [0.0; 2];
        for (q, &mi) in self.positions.iter().zip(&self.masses) {
            c[0] += mi * q[0];
            c[1] += mi * q[1];
        }
        [c[0] / m, c[1] / m]
    }

    /// Largest mutual distance.
    pub fn diameter(&self) -> f64 {
        PAIRS.iter().map(|&(i, j)| dist2(&self.positions[i], &self.positions[j])).fold(0.0, f64::max).sqrt_nonneg()
    }

    /// `‖Σ mᵢqᵢ‖ / (Σ mᵢ · diameter)`.
    pub fn center_of_mass_offset(&self) -> f64 {
        let c = self.center_of_mass();
        let d = self.diameter();
        if d == 0.0 {
            return 0.0;
        }
        sqrt(c[0] * c[0] + c[1] * c[1]) / d
    }

    /// Same configuration translated so the centre of mass is the origin.
    pub fn centered(&self) -> Self {
        let c = self.center_of_mass();
        let mut positions = self.positions;
        for q in &mut positions {
            q[0] -= c[0];
            q[1] -= c[1];
        }
        Self { positions, masses: self.masses }
    }

    pub fn with_positions(&self, positions: [Point; 4]) -> Result<Self> {
        Self::new(positions, self.masses)
    }

    pub fn with_masses(&self, masses: [f64; 4]) -> Result<Self> {
        Self::new(self.positions, masses)
    }

    /// Positions multiplied by `k` about the origin.
    pub fn scaled(&self, k: f64) -> Self {
        let mut positions = self.positions;
        for q in &mut positions {
            q[0] *= k;
            q[1] *= k;
        }
        Self { positions, masses: self.masses }
    }

    /// `Σ mᵢ‖qᵢ‖²` about the origin.
    pub fn polar_moment(&self) -> f64 {
        self.positions.iter().zip(&self.masses).map(|(q, m)| m * (q[0] * q[0] + q[1] * q[1])).sum()
    }

    /// Smallest squared mutual distance together with its pair.
    pub fn closest_pair(&self) -> (f64, usize, usize) {
        let mut best = (f64::INFINITY, 0, 0);
        for &(i, j) in &PAIRS {
            let r2 = dist2(&self.positions[i], &self.positions[j]);
            if r2 < best.0 {
                best = (r2, i, j);
            }
        }
        best
    }
}

trait SqrtNonneg {
    fn sqrt_nonneg(self) -> f64;
}

impl SqrtNonneg for f64 {
    fn sqrt_nonneg(self) -> f64 {
        sqrt(self.max(0.0))
    }
}

fn dist2(p: &Point, q: &Point) -> f64 {
    let dx = p[0] - q[0];
    let dy = p[1] - q[1];
    dx * dx + dy * dy
}

/// The six squared mutual distances `(a, b, c, d, e, f)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquaredDistanceVector {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl SquaredDistanceVector {
    pub const fn new(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Self {
        Self { a, b, c, d, e, f }
    }

    pub const fn from_array(v: [f64; 6]) -> Self {
        Self::new(v[0], v[1], v[2], v[3], v[4], v[5])
    }

    pub const fn to_array(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.d, self.e, self.f]
    }

    /// Squared distance between bodies `i` and `j` (zero on the diagonal).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.to_array()[pair_index(i, j)]
        }
    }

    /// Largest entry; the reference scale for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.to_array().into_iter().fold(0.0, f64::max)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::from_array(self.to_array().map(|x| x * k))
    }

    /// Rescaled so that `a = 1`.
    pub fn normalized(&self) -> Self {
        self.scaled(1.0 / self.a)
    }

    /// The unit square in labelled order, `(1, 2, 1, 1, 2, 1)`.
    pub const fn unit_square() -> Self {
        Self::new(1.0, 2.0, 1.0, 1.0, 2.0, 1.0)
    }
}

/// Signed sub-triangle areas `Δ₁..Δ₄`; entry `i` belongs to the triangle
/// that omits body `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedAreaVector(pub [f64; 4]);

impl OrientedAreaVector {
    pub fn get(&self, body: usize) -> f64 {
        self.0[body]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    /// `|ΣΔᵢ| / Σ|Δᵢ|`, zero for the all-zero vector.
    pub fn relative_sum_defect(&self) -> f64 {
        let s = self.abs_sum();
        if s == 0.0 {
            0.0
        } else {
            self.sum().abs() / s
        }
    }

    /// True when the signs follow `(−, +, −, +)` strictly.
    pub fn has_convex_pattern(&self) -> bool {
        self.0.iter().zip(CONVEX_SIGNS).all(|(&x, s)| x * s > 0.0)
    }
}

pub fn squared_distances(config: &PlanarConfiguration) -> Result<SquaredDistanceVector> {
    let q = config.positions();
    let mut out = [0.0; 6];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        let r2 = dist2(&q[i], &q[j]);
        if r2 == 0.0 {
            return Err(Error::Collision { i, j });
        }
        out[k] = r2;
    }
    Ok(SquaredDistanceVector::from_array(out))
}

fn cross(p: &Point, q: &Point, r: &Point) -> f64 {
    (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
}

/// Shoelace areas with the alternating sign `Δᵢ = (−1)^i · A(others in ascending order)`,
/// so a counter-clockwise convex quadrilateral yields `(−, +, −, +)`.
pub fn oriented_areas_from_positions(config: &PlanarConfiguration) -> OrientedAreaVector {
    let q = config.positions();
    let mut out = [0.0; 4];
    for (body, tri) in OPPOSITE.iter().enumerate() {
        let area = 0.5 * cross(&q[tri[0]], &q[tri[1]], &q[tri[2]]);
        out[body] = CONVEX_SIGNS[body] * area;
    }
    OrientedAreaVector(out)
}

/// The three squared side lengths of the triangle opposite `body`.
fn opposite_sides(sdv: &SquaredDistanceVector, body: usize) -> [f64; 3] {
    let [p, q, r] = OPPOSITE[body];
    [sdv.get(p, q), sdv.get(p, r), sdv.get(q, r)]
}

/// `16·area²` from squared side lengths.
fn heron_discriminant([x, y, z]: [f64; 3]) -> f64 {
    2.0 * (x * y + y * z + z * x) - (x * x + y * y + z * z)
}

/// Unsigned sub-triangle areas `|Δᵢ|` by Heron's formula.
pub fn unsigned_areas_from_distances(sdv: &SquaredDistanceVector) -> Result<[f64; 4]> {
    let scale = sdv.scale();
    let band = HERON_CLAMP * scale * scale;
    let mut out = [0.0; 4];
    for (body, slot) in out.iter_mut().enumerate() {
        let disc = heron_discriminant(opposite_sides(sdv, body));
        if disc < -band || disc.is_nan() {
            return Err(Error::NotRealizable { body, discriminant: disc });
        }
        *slot = 0.25 * disc.sqrt_nonneg();
    }
    Ok(out)
}

/// Heron magnitudes with the convex sign pattern applied, without checking
/// the zero-sum identity. Off the planarity manifold the sum does not vanish,
/// so iterative solvers use this form.
pub fn convex_signed_areas(sdv: &SquaredDistanceVector) -> Result<OrientedAreaVector> {
    let m = unsigned_areas_from_distances(sdv)?;
    Ok(OrientedAreaVector(core::array::from_fn(|i| CONVEX_SIGNS[i] * m[i])))
}

/// Signed areas from distances, assuming a convex quadrilateral in labelled
/// order. Concave or mis-ordered inputs break the zero-sum identity and are
/// rejected.
pub fn oriented_areas_from_distances(sdv: &SquaredDistanceVector) -> Result<OrientedAreaVector> {
    let areas = convex_signed_areas(sdv)?;
    let defect = areas.relative_sum_defect();
    if defect > AREA_SUM_TOLERANCE {
        return Err(Error::InconsistentConvexity { defect });
    }
    Ok(areas)
}

/// Partial derivatives of the convex-signed areas with respect to the six
/// squared distances: `out[i][k] = ∂Δᵢ/∂s_k`. Uses
/// `∂|Δ|/∂x = (y + z − x) / (16|Δ|)` for each side `x` of the triangle.
pub fn area_jacobian(sdv: &SquaredDistanceVector) -> Result<[[f64; 6]; 4]> {
    let mags = unsigned_areas_from_distances(sdv)?;
    let mut out = [[0.0; 6]; 4];
    for (body, tri) in OPPOSITE.iter().enumerate() {
        let area = mags[body];
        if area == 0.0 {
            return Err(Error::Domain("degenerate sub-triangle has no area derivative"));
        }
        let sides = [(tri[0], tri[1]), (tri[0], tri[2]), (tri[1], tri[2])];
        let vals = sides.map(|(p, q)| sdv.get(p, q));
        for (k, &(p, q)) in sides.iter().enumerate() {
            let x = vals[k];
            let rest = vals[0] + vals[1] + vals[2] - x;
            out[body][pair_index(p, q)] = CONVEX_SIGNS[body] * (rest - x) / (16.0 * area);
        }
    }
    Ok(out)
}

/// The bordered 5×5 Cayley–Menger matrix, border first, then bodies 1..4.
pub fn cayley_menger_matrix(sdv: &SquaredDistanceVector) -> Matrix5<f64> {
    Matrix5::from_fn(|r, c| match (r, c) {
        (0, 0) => 0.0,
        (0, _) | (_, 0) => 1.0,
        (r, c) => sdv.get(r - 1, c - 1),
    })
}

/// Determinant of the Cayley–Menger matrix; zero for any planar realization.
pub fn cayley_menger(sdv: &SquaredDistanceVector) -> f64 {
    cayley_menger_matrix(sdv).lu().determinant()
}

fn cofactor(m: &Matrix5<f64>, row: usize, col: usize) -> f64 {
    let minor = Matrix4::from_fn(|r, c| {
        let rr = if r < row { r } else { r + 1 };
        let cc = if c < col { c } else { c + 1 };
        m[(rr, cc)]
    });
    let sign = if (row + col).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * minor.determinant()
}

/// `∂S/∂(a..f)`. Each squared distance sits in two symmetric entries, so the
/// partial is twice the corresponding cofactor.
pub fn cayley_menger_gradient(sdv: &SquaredDistanceVector) -> [f64; 6] {
    let m = cayley_menger_matrix(sdv);
    PAIRS.map(|(i, j)| 2.0 * cofactor(&m, i + 1, j + 1))
}

/// Newtonian potential `U = Σ mᵢmⱼ / rᵢⱼ`.
pub fn potential(config: &PlanarConfiguration) -> Result<f64> {
    let sdv = squared_distances(config)?;
    let m = config.masses();
    Ok(PAIRS.iter().zip(sdv.to_array()).map(|(&(i, j), r2)| m[i] * m[j] / sqrt(r2)).sum())
}

/// Moment of inertia from mutual distances, `(1/Σm) Σ mᵢmⱼ rᵢⱼ²`.
pub fn moment_of_inertia(config: &PlanarConfiguration) -> Result<f64> {
    let sdv = squared_distances(config)?;
    let m = config.masses();
    let pair_sum: f64 = PAIRS.iter().zip(sdv.to_array()).map(|(&(i, j), r2)| m[i] * m[j] * r2).sum();
    Ok(pair_sum / config.total_mass())
}

/// `t_l = Σᵢ Δᵢ r²ᵢₗ`; all four agree for planar configurations.
pub fn albouy_t(sdv: &SquaredDistanceVector, areas: &OrientedAreaVector) -> [f64; 4] {
    core::array::from_fn(|l| (0..4).map(|i| areas.get(i) * sdv.get(i, l)).sum())
}

/// Spread of the `t_l` about their mean, relative to `Σ|Δ| · max r²`.
pub fn albouy_spread(sdv: &SquaredDistanceVector, areas: &OrientedAreaVector) -> f64 {
    let t = albouy_t(sdv, areas);
    let mean = t.iter().sum::<f64>() / 4.0;
    let spread = t.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
    let denom = areas.abs_sum() * sdv.scale();
    if denom == 0.0 {
        spread
    } else {
        spread / denom
    }
}

/// Realize squared distances as a convex quadrilateral in labelled order:
/// body 1 at the origin, body 2 on the positive x-axis, bodies 3 and 4 above.
/// Masses are attached and the result is translated to its centre of mass.
pub fn embed(sdv: &SquaredDistanceVector, masses: [f64; 4]) -> Result<PlanarConfiguration> {
    if sdv.to_array().iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("squared distances must be positive"));
    }
    let base = sqrt(sdv.a);
    let place = |r1sq: f64, r2sq: f64| -> Result<Point> {
        let x = (r1sq - r2sq + sdv.a) / (2.0 * base);
        let y2 = r1sq - x * x;
        if y2 < -HERON_CLAMP * sdv.scale() {
            return Err(Error::NotRealizable { body: 0, discriminant: y2 });
        }
        Ok([x, y2.sqrt_nonneg()])
    };
    let q3 = place(sdv.b, sdv.d)?;
    let q4 = place(sdv.c, sdv.e)?;
    let cfg = PlanarConfiguration::new([[0.0, 0.0], [base, 0.0], q3, q4], masses)?;
    Ok(cfg.centered())
}
