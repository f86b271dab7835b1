//! Shape labels for quadrilaterals in labelled order, and the checks that
//! evaluate the adjacent-equal-mass symmetry statements on computed
//! solutions. Every check reports a signed margin: non-negative means pass.

use alloc::vec::Vec;

use crate::ccequations;
use crate::error::{Error, Result};
use crate::geometry::{self, OrientedAreaVector, PlanarConfiguration, SquaredDistanceVector};
use crate::solver::CCSolution;

/// Default equality tolerance, relative to `a`.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;

/// Areas below this fraction of `diameter²` count as zero.
pub const COLLINEAR_TOLERANCE: f64 = 1e-12;

/// Post-fit residual a solution must meet before the theorem checks apply.
pub const APPLICABILITY_RESIDUAL: f64 = 1e-8;

/// Above this mass ratio the outer inequalities of the area ordering are
/// only checked weakly.
pub const STRICT_ORDERING_MAX_ALPHA: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convexity {
    ConvexInOrder,
    Concave,
    Collinear,
}

/// `ConvexInOrder` iff the position areas follow `(−, +, −, +)`. Anything
/// else that is not collinear (a genuinely concave quadrilateral, a
/// clockwise or self-intersecting labelling) is reported as `Concave`.
pub fn convexity(config: &PlanarConfiguration) -> Convexity {
    let areas = geometry::oriented_areas_from_positions(config);
    let d = config.diameter();
    let eps = COLLINEAR_TOLERANCE * d * d;
    if areas.0.iter().all(|x| x.abs() <= eps) {
        Convexity::Collinear
    } else if areas.0.iter().zip(geometry::CONVEX_SIGNS).all(|(&x, s)| x * s > eps) {
        Convexity::ConvexInOrder
    } else {
        Convexity::Concave
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GeometryLabel {
    Square,
    Rhombus,
    Kite,
    IsoscelesTrapezoid,
    GenericConvex,
    Concave,
    Collinear,
}

impl GeometryLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Square => "Square",
            Self::Rhombus => "Rhombus",
            Self::Kite => "Kite",
            Self::IsoscelesTrapezoid => "IsoscelesTrapezoid",
            Self::GenericConvex => "GenericConvex",
            Self::Concave => "Concave",
            Self::Collinear => "Collinear",
        }
    }

    /// Square satisfies the isosceles-trapezoid equalities too.
    pub fn is_isosceles_trapezoid(self) -> bool {
        matches!(self, Self::Square | Self::IsoscelesTrapezoid)
    }
}

impl core::fmt::Display for GeometryLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryClass {
    pub label: GeometryLabel,
    /// `(candidate, tol − worst deviation)`; non-negative when the class's
    /// equalities hold.
    pub margins: Vec<(&'static str, f64)>,
}

impl GeometryClass {
    pub fn margin(&self, name: &str) -> Option<f64> {
        self.margins.iter().find(|(n, _)| *n == name).map(|&(_, m)| m)
    }
}

/// Label a convex quadrilateral from its squared distances (scaled by `a`).
///
/// * isosceles trapezoid (axis through the midpoints of 12 and 34): `b = e`, `c = d`
/// * kite across diagonal 13: `a = c`, `d = f`
/// * kite across diagonal 24: `a = d`, `c = f`
/// * rhombus: `a = c = d = f`
/// * square: rhombus with `b = e = 2a`
///
/// Precedence is Square, Rhombus, IsoscelesTrapezoid, Kite, GenericConvex.
pub fn classify(sdv: &SquaredDistanceVector, tol: f64) -> Result<GeometryClass> {
    geometry::oriented_areas_from_distances(sdv).map_err(|_| Error::NotConvex)?;
    let n = sdv.normalized();
    let dev = |x: f64, y: f64| (x - y).abs();
    let be = dev(n.b, n.e);
    let cd = dev(n.c, n.d);
    let ac = dev(n.a, n.c);
    let df = dev(n.d, n.f);
    let ad = dev(n.a, n.d);
    let cf = dev(n.c, n.f);
    let b2a = dev(n.b, 2.0 * n.a);
    let worst = |xs: &[f64]| tol - xs.iter().copied().fold(0.0, f64::max);

    let trapezoid = worst(&[be, cd]);
    let kite13 = worst(&[ac, df]);
    let kite24 = worst(&[ad, cf]);
    let rhombus = worst(&[ac, ad, dev(n.a, n.f), df, cf]);
    let square = worst(&[ac, ad, df, cf, be, b2a]);

    let label = if square >= 0.0 {
        GeometryLabel::Square
    } else if rhombus >= 0.0 {
        GeometryLabel::Rhombus
    } else if trapezoid >= 0.0 {
        GeometryLabel::IsoscelesTrapezoid
    } else if kite13 >= 0.0 || kite24 >= 0.0 {
        GeometryLabel::Kite
    } else {
        GeometryLabel::GenericConvex
    };
    Ok(GeometryClass {
        label,
        margins: alloc::vec![
            ("square", square),
            ("rhombus", rhombus),
            ("isosceles_trapezoid", trapezoid),
            ("kite_13", kite13),
            ("kite_24", kite24),
        ],
    })
}

/// Labels a full configuration, including the non-convex cases.
pub fn classify_configuration(config: &PlanarConfiguration, tol: f64) -> Result<GeometryClass> {
    match convexity(config) {
        Convexity::ConvexInOrder => classify(&geometry::squared_distances(config)?, tol),
        Convexity::Concave => Ok(GeometryClass { label: GeometryLabel::Concave, margins: Vec::new() }),
        Convexity::Collinear => Ok(GeometryClass { label: GeometryLabel::Collinear, margins: Vec::new() }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub margin: f64,
}

impl CheckReport {
    pub fn from_margin(name: &'static str, margin: f64) -> Self {
        Self { name, passed: margin >= 0.0, margin }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingMode {
    /// Every inequality must hold by more than the tolerance.
    Strict,
    /// Inequalities may degenerate to equalities within the tolerance.
    Weak,
}

impl OrderingMode {
    pub fn for_alpha(alpha: f64) -> Self {
        if alpha <= STRICT_ORDERING_MAX_ALPHA {
            Self::Strict
        } else {
            Self::Weak
        }
    }
}

/// Area ordering `Δ₃ < Δ₁ < 0 < Δ₂ < Δ₄`, gaps measured relative to `Σ|Δ|`.
///
/// The sign gaps (`Δ₁ < 0 < Δ₂`) are always strict; `mode` governs the outer
/// gaps, which close up when the two mass pairs are equal.
pub fn check_lemma_3_1(areas: &OrientedAreaVector, tol: f64, mode: OrderingMode) -> CheckReport {
    let [d1, d2, d3, d4] = areas.0;
    let scale = areas.abs_sum();
    let signs = (-d1).min(d2) / scale;
    let outer = (d1 - d3).min(d4 - d2) / scale;
    let outer_margin = match mode {
        OrderingMode::Strict => outer - tol,
        OrderingMode::Weak => outer + tol,
    };
    let sign_margin = signs - tol;
    CheckReport::from_margin("lemma_3_1_area_ordering", outer_margin.min(sign_margin))
}

fn ordering_holds(areas: &OrientedAreaVector) -> bool {
    let [d1, d2, d3, d4] = areas.0;
    d3 < d1 && d1 < 0.0 && 0.0 < d2 && d2 < d4
}

/// Relative errors of the two factorizations
/// `Δ₁Δ₃ − Δ₂Δ₄ = (Δ₁+Δ₄)(Δ₃+Δ₄)` and `Δ₂Δ₃ − Δ₁Δ₄ = (Δ₂+Δ₄)(Δ₃+Δ₄)`,
/// both valid whenever `ΣΔ = 0`.
pub fn factorization_errors(areas: &OrientedAreaVector) -> (f64, f64) {
    let [d1, d2, d3, d4] = areas.0;
    let s = areas.abs_sum();
    let s2 = s * s;
    let e1 = ((d1 * d3 - d2 * d4) - (d1 + d4) * (d3 + d4)).abs() / s2;
    let e2 = ((d2 * d3 - d1 * d4) - (d2 + d4) * (d3 + d4)).abs() / s2;
    (e1, e2)
}

/// Both factorization identities, plus the positivity `Δ₁ + Δ₄ > 0` that the
/// proof derives from the zero sum and the ordering (checked only when the
/// ordering holds).
pub fn check_factorization_identities(areas: &OrientedAreaVector, tol: f64) -> Result<CheckReport> {
    if areas.relative_sum_defect() > tol {
        return Err(Error::Domain("factorization identities need areas summing to zero"));
    }
    let (e1, e2) = factorization_errors(areas);
    let mut margin = (tol - e1).min(tol - e2);
    if ordering_holds(areas) {
        let [d1, d2, _, d4] = areas.0;
        let s = areas.abs_sum();
        let pos = ((d1 + d4) / s).min((d2 + d4) / s);
        if pos <= 0.0 {
            margin = margin.min(pos.min(-f64::MIN_POSITIVE));
        }
    }
    Ok(CheckReport::from_margin("factorization_identities", margin))
}

/// Sign linkage from the case analysis:
/// `sign(Δ₁Δ₃ − Δ₂Δ₄) = sign(Δ₂Δ₃ − Δ₁Δ₄) = sign(Δ₃ + Δ₄)`.
/// `None` when the ordering does not hold or `|Δ₃ + Δ₄| ≤ tol·Σ|Δ|`.
pub fn sign_linkage(areas: &OrientedAreaVector, tol: f64) -> Option<bool> {
    let [d1, d2, d3, d4] = areas.0;
    let pivot = d3 + d4;
    if !ordering_holds(areas) || pivot.abs() <= tol * areas.abs_sum() {
        return None;
    }
    let p = pivot > 0.0;
    Some(((d1 * d3 - d2 * d4) > 0.0) == p && ((d2 * d3 - d1 * d4) > 0.0) == p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// `r₁₃ = r₂₄`
    EqualDiagonals,
    /// `r₁₄ = r₂₃`
    EqualLaterals,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 2] = [Hypothesis::EqualDiagonals, Hypothesis::EqualLaterals];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::EqualDiagonals => "equal_diagonals",
            Self::EqualLaterals => "equal_laterals",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inapplicable {
    /// Multipliers and distances do not solve the equations.
    NotConverged {
        residual: f64,
    },
    NonPositiveNu {
        nu: f64,
    },
    HypothesisNotMet {
        deviation: f64,
    },
}

fn applicability(solution: &CCSolution) -> core::result::Result<(), Inapplicable> {
    let m = &solution.multipliers;
    let residual = ccequations::general_dziobek_residual(
        &solution.sdv,
        &solution.areas,
        m.nu,
        m.mu,
        solution.configuration.masses(),
    )
    .map(|r| r.norm)
    .unwrap_or(f64::INFINITY);
    if !(residual < APPLICABILITY_RESIDUAL) {
        return Err(Inapplicable::NotConverged { residual });
    }
    if !(m.nu > 0.0) {
        return Err(Inapplicable::NonPositiveNu { nu: m.nu });
    }
    Ok(())
}

/// On a converged solution whose hypothesis equality holds, assert the
/// conclusions: `Δ₄ = −Δ₃`, `Δ₂ = −Δ₁`, the other side-pair equality, and an
/// isosceles-trapezoid label (Square included).
pub fn check_theorem(
    solution: &CCSolution,
    which: Hypothesis,
    tol: f64,
) -> core::result::Result<CheckReport, Inapplicable> {
    applicability(solution)?;
    let n = solution.sdv.normalized();
    let (hyp, other) = match which {
        Hypothesis::EqualDiagonals => ((n.b - n.e).abs(), (n.c - n.d).abs()),
        Hypothesis::EqualLaterals => ((n.c - n.d).abs(), (n.b - n.e).abs()),
    };
    if hyp > tol {
        return Err(Inapplicable::HypothesisNotMet { deviation: hyp });
    }
    let [d1, d2, d3, d4] = solution.areas.0;
    let s = solution.areas.abs_sum();
    let mut margin = tol - ((d3 + d4).abs() / s).max((d1 + d2).abs() / s).max(other);
    let label = classify(&solution.sdv, tol).map(|c| c.label);
    if !matches!(label, Ok(l) if l.is_isosceles_trapezoid()) {
        margin = margin.min(-1.0);
    }
    let name = match which {
        Hypothesis::EqualDiagonals => "theorem_equal_diagonals",
        Hypothesis::EqualLaterals => "theorem_equal_laterals",
    };
    Ok(CheckReport::from_margin(name, margin))
}

/// Contrapositive witness of the case analysis: `|Δ₃+Δ₄|`, `|b−e|` and
/// `|c−d|` vanish together, and the sign linkage holds when applicable.
pub fn check_lemma_case_analysis(solution: &CCSolution, tol: f64) -> CheckReport {
    let n = solution.sdv.normalized();
    let z = [
        (solution.areas.get(2) + solution.areas.get(3)).abs() / solution.areas.abs_sum(),
        (n.b - n.e).abs(),
        (n.c - n.d).abs(),
    ];
    let zmax = z.iter().copied().fold(0.0, f64::max);
    let zmin = z.iter().copied().fold(f64::INFINITY, f64::min);
    // Either all below tol (margin tol − max) or all above (margin min − tol).
    let mut margin = (tol - zmax).max(zmin - tol);
    if sign_linkage(&solution.areas, tol) == Some(false) {
        margin = margin.min(-1.0);
    }
    CheckReport::from_margin("lemma_case_analysis", margin)
}

/// `ν > 0` on a solution.
pub fn check_nu_positive(solution: &CCSolution) -> CheckReport {
    CheckReport::from_margin("lemma_2_1_nu_positive", solution.multipliers.nu)
}

/// For `α < 1`, the side joining the lighter pair is the shorter: `f < a`.
pub fn check_side_length_corollary(solution: &CCSolution, alpha: f64) -> Option<CheckReport> {
    (alpha < 1.0).then(|| {
        let n = solution.sdv.normalized();
        CheckReport::from_margin("lighter_side_shorter", n.a - n.f)
    })
}

/// Relative zero-sum defect tolerated before the factorization check runs on
/// a solution's areas.
pub const SOLUTION_IDENTITY_TOLERANCE: f64 = 1e-10;

/// Mass-rescaling residual bound for a central configuration.
pub const MASS_SCALING_TOLERANCE: f64 = 1e-10;

/// Every per-solution check, in a fixed order.
pub fn diagnostics(solution: &CCSolution, alpha: f64) -> Vec<CheckReport> {
    let mut out = alloc::vec![
        check_nu_positive(solution),
        CheckReport::from_margin("lambda_cc_negative", -solution.lambda_cc()),
        check_lemma_3_1(&solution.areas, EQUALITY_TOLERANCE, OrderingMode::for_alpha(alpha)),
        check_factorization_identities(&solution.areas, SOLUTION_IDENTITY_TOLERANCE)
            .unwrap_or_else(|_| CheckReport::from_margin("factorization_identities", -1.0)),
    ];
    for h in Hypothesis::ALL {
        out.push(check_theorem(solution, h, EQUALITY_TOLERANCE).unwrap_or_else(|why| {
            let name = match h {
                Hypothesis::EqualDiagonals => "theorem_equal_diagonals",
                Hypothesis::EqualLaterals => "theorem_equal_laterals",
            };
            let margin = match why {
                Inapplicable::NotConverged { residual } => -residual,
                Inapplicable::NonPositiveNu { nu } => nu.min(-f64::MIN_POSITIVE),
                Inapplicable::HypothesisNotMet { deviation } => EQUALITY_TOLERANCE - deviation,
            };
            CheckReport::from_margin(name, margin.min(-f64::MIN_POSITIVE))
        }));
    }
    out.push(check_lemma_case_analysis(solution, EQUALITY_TOLERANCE));
    out.extend(check_side_length_corollary(solution, alpha));
    let scaling = ccequations::mass_scaling_check(&solution.configuration, 2.0).unwrap_or(f64::INFINITY);
    out.push(CheckReport::from_margin("mass_scaling_invariance", MASS_SCALING_TOLERANCE - scaling));
    out
}
