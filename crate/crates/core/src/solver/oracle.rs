//! Brute-force reference for the symmetric solutions.
//!
//! Bodies sit at `(−1, 0)`, `(1, 0)`, `(s, h)`, `(−s, h)` with masses
//! `(1, 1, α, α)`, so the mirror symmetry is built in. With `λ` eliminated
//! through the x-equation of body 1, two scalar conditions remain:
//!
//! * `F₁(s, h) = a₃ₓ + s·a₁ₓ` (x-equation of body 3),
//! * `F₂(s, h) = a₁ᵧ − a₁ₓ·y_c` (y-equation of body 1, `y_c = αh/(1+α)`).
//!
//! The y-equation of body 3 follows from momentum balance. For each `s` on a
//! grid the root `h(s)` of `F₂` is bracketed on an `h` grid and bisected;
//! `G(s) = F₁(s, h(s))` is then bracketed on the `s` grid and bisected.
//! The accelerations are written out in closed form here rather than taken
//! from the equation module.

use libm::sqrt;
use thiserror::Error;

use crate::ccequations::family_masses;
use crate::geometry::{OrientedAreaVector, PlanarConfiguration, SquaredDistanceVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Grid points per axis.
    pub grid: usize,
    pub s_max: f64,
    pub h_max: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { grid: 400, s_max: 3.0, h_max: 3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum OracleError {
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("grid must have at least two points per axis")]
    InvalidGrid,
    #[error("no sign change of the reduced equation on the grid")]
    NoBracket,
    #[error("bisection left the domain where the height equation has a root")]
    LostBranch,
}

/// Symmetric solution `(s, h)` in the gauge with base `[−1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleTrapezoid {
    pub alpha: f64,
    pub s: f64,
    pub h: f64,
    /// Squared distances in the same gauge (`a = 4`).
    pub sdv: SquaredDistanceVector,
    /// Number of sign changes found on the `s` grid; the first is refined.
    pub brackets: usize,
}

impl OracleTrapezoid {
    /// The trapezoid positions, translated to the centre of mass.
    pub fn configuration(&self) -> PlanarConfiguration {
        PlanarConfiguration::new(
            [[-1.0, 0.0], [1.0, 0.0], [self.s, self.h], [-self.s, self.h]],
            family_masses(self.alpha),
        )
        .expect("oracle positions are finite")
        .centered()
    }
}

/// Accelerations of bodies 1 and 3 for the symmetric trapezoid.
fn accelerations(alpha: f64, s: f64, h: f64) -> ([f64; 2], [f64; 2]) {
    let r13 = sqrt((s + 1.0) * (s + 1.0) + h * h);
    let r14 = sqrt((1.0 - s) * (1.0 - s) + h * h);
    let (c13, c14) = (1.0 / (r13 * r13 * r13), 1.0 / (r14 * r14 * r14));
    // body 1: pulled by body 2 at distance 2, bodies 3 and 4 with mass α.
    let a1 = [0.25 + alpha * ((s + 1.0) * c13 + (1.0 - s) * c14), alpha * h * (c13 + c14)];
    // body 3: pulled by body 1 (r13), body 2 (r23 = r14), body 4 at distance 2s.
    let a3 = [-(1.0 + s) * c13 + (1.0 - s) * c14 - alpha / (4.0 * s * s), -h * (c13 + c14)];
    (a1, a3)
}

fn f1(alpha: f64, s: f64, h: f64) -> f64 {
    let (a1, a3) = accelerations(alpha, s, h);
    a3[0] + s * a1[0]
}

fn f2(alpha: f64, s: f64, h: f64) -> f64 {
    let (a1, _) = accelerations(alpha, s, h);
    a1[1] - a1[0] * alpha * h / (1.0 + alpha)
}

/// Bisect `f` on `[lo, hi]` (with `f(lo)·f(hi) ≤ 0`) down to adjacent floats.
fn bisect(mut f: impl FnMut(f64) -> Option<f64>, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut flo = f(lo)?;
    if flo == 0.0 {
        return Some(lo);
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi.abs() {
            return Some(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Some(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

/// First root in `h` of `F₂(s, ·)` on the grid, refined by bisection.
fn height_root(alpha: f64, s: f64, opts: &OracleOptions) -> Option<f64> {
    let dh = opts.h_max / opts.grid as f64;
    let mut prev_h = dh;
    let mut prev = f2(alpha, s, prev_h);
    for k in 2..=opts.grid {
        let h = k as f64 * dh;
        let v = f2(alpha, s, h);
        if prev == 0.0 {
            return Some(prev_h);
        }
        if (v <= 0.0) != (prev <= 0.0) || v == 0.0 {
            return bisect(|x| Some(f2(alpha, s, x)), prev_h, h);
        }
        prev = v;
        prev_h = h;
    }
    None
}

/// Grid scan plus nested bisection for the symmetric central configuration.
pub fn oracle_trapezoid(alpha: f64, opts: &OracleOptions) -> Result<OracleTrapezoid, OracleError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(OracleError::InvalidAlpha(alpha));
    }
    if opts.grid < 2 || !(opts.s_max > 0.0 && opts.h_max > 0.0) {
        return Err(OracleError::InvalidGrid);
    }
    let reduced = |s: f64| height_root(alpha, s, opts).map(|h| f1(alpha, s, h));
    let ds = opts.s_max / opts.grid as f64;
    let mut first = None;
    let mut brackets = 0;
    let mut prev: Option<(f64, f64)> = None;
    for k in 1..=opts.grid {
        let s = k as f64 * ds;
        let cur = reduced(s).map(|g| (s, g));
        if let (Some((s0, g0)), Some((s1, g1))) = (prev, cur) {
            if (g0 <= 0.0) != (g1 <= 0.0) {
                brackets += 1;
                first.get_or_insert((s0, s1));
            }
        }
        prev = cur;
    }
    let (lo, hi) = first.ok_or(OracleError::NoBracket)?;
    let s = bisect(reduced, lo, hi).ok_or(OracleError::LostBranch)?;
    let h = height_root(alpha, s, opts).ok_or(OracleError::LostBranch)?;
    let sdv = SquaredDistanceVector::new(
        4.0,
        (s + 1.0) * (s + 1.0) + h * h,
        (1.0 - s) * (1.0 - s) + h * h,
        (1.0 - s) * (1.0 - s) + h * h,
        (s + 1.0) * (s + 1.0) + h * h,
        4.0 * s * s,
    );
    Ok(OracleTrapezoid { alpha, s, h, sdv, brackets })
}

/// Express a symmetric solution in the oracle gauge (base `[−1, 1]`):
/// `s = √(f/a)` and `h = |Δ₃|·4/a`, since `Δ₃` is the area of triangle 124
/// whose base is side 12.
pub fn trapezoid_parameters(sdv: &SquaredDistanceVector, areas: &OrientedAreaVector) -> (f64, f64) {
    (sqrt(sdv.f / sdv.a), areas.get(2).abs() * 4.0 / sdv.a)
}
