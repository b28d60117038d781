use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::{Point, Vector};

/// One of the two subdomains separated by the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subdomain {
    One,
    Two,
}

impl Subdomain {
    pub const BOTH: [Subdomain; 2] = [Subdomain::One, Subdomain::Two];

    pub fn index(self) -> usize {
        match self {
            Subdomain::One => 0,
            Subdomain::Two => 1,
        }
    }

    pub fn other(self) -> Subdomain {
        match self {
            Subdomain::One => Subdomain::Two,
            Subdomain::Two => Subdomain::One,
        }
    }
}

impl fmt::Display for Subdomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subdomain::One => f.write_str("1"),
            Subdomain::Two => f.write_str("2"),
        }
    }
}

type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(Point) -> Vector + Send + Sync>;

/// User-supplied analytic level set with its hand-coded gradient.
#[derive(Clone)]
pub struct AnalyticLevelSet {
    pub value: ScalarFn,
    pub gradient: VectorFn,
    /// Whether the zero set is a union of straight segments.
    pub piecewise_linear: bool,
}

#[derive(Clone)]
pub enum LevelSetKind {
    /// `φ = |x - center| - radius`.
    Circle {
        center: Point,
        radius: f64,
    },
    /// `φ = y - offset`.
    HorizontalLine {
        offset: f64,
    },
    /// Product of the four facet lines of the diamond with corners
    /// `(1, a0)`, `(2 - a0, 1)`, `(1, 2 - a0)`, `(a0, 1)`, positive inside.
    ///
    /// Outside the bounding box `[a0, 2 - a0]²` the product picks up spurious
    /// zeros along the extended facet lines, so there the value continues as
    /// `φ(clamp(x)) - |x - clamp(x)|`, which is strictly negative.
    PolygonProduct {
        a0: f64,
    },
    Analytic(AnalyticLevelSet),
}

impl fmt::Debug for LevelSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelSetKind::Circle { center, radius } => f
                .debug_struct("Circle")
                .field("center", &(center.x, center.y))
                .field("radius", radius)
                .finish(),
            LevelSetKind::HorizontalLine { offset } => f
                .debug_struct("HorizontalLine")
                .field("offset", offset)
                .finish(),
            LevelSetKind::PolygonProduct { a0 } => {
                f.debug_struct("PolygonProduct").field("a0", a0).finish()
            }
            LevelSetKind::Analytic(a) => f
                .debug_struct("Analytic")
                .field("piecewise_linear", &a.piecewise_linear)
                .finish_non_exhaustive(),
        }
    }
}

/// Interface description: the zero set of `φ`, plus which sign is `Ω₁`.
#[derive(Clone, Debug)]
pub struct LevelSet {
    kind: LevelSetKind,
    positive_side: Subdomain,
}

impl LevelSet {
    pub fn new(kind: LevelSetKind, positive_side: Subdomain) -> Self {
        Self {
            kind,
            positive_side,
        }
    }

    pub fn circle(center: Point, radius: f64, positive_side: Subdomain) -> Self {
        Self::new(LevelSetKind::Circle { center, radius }, positive_side)
    }

    pub fn horizontal_line(offset: f64, positive_side: Subdomain) -> Self {
        Self::new(LevelSetKind::HorizontalLine { offset }, positive_side)
    }

    pub fn polygon_product(a0: f64, positive_side: Subdomain) -> Self {
        Self::new(LevelSetKind::PolygonProduct { a0 }, positive_side)
    }

    /// A level set without zero set: the whole plane belongs to `side`.
    pub fn everywhere(side: Subdomain) -> Self {
        Self::new(
            LevelSetKind::Analytic(AnalyticLevelSet {
                value: Arc::new(|_| 1.0),
                gradient: Arc::new(|_| Vector::zeros()),
                piecewise_linear: true,
            }),
            side,
        )
    }

    pub fn kind(&self) -> &LevelSetKind {
        &self.kind
    }

    /// Subdomain occupying `{φ > 0}`.
    pub fn positive_side(&self) -> Subdomain {
        self.positive_side
    }

    pub fn value(&self, p: Point) -> f64 {
        match &self.kind {
            LevelSetKind::Circle { center, radius } => (p - center).norm() - radius,
            LevelSetKind::HorizontalLine { offset } => p.y - offset,
            LevelSetKind::PolygonProduct { a0 } => {
                let c = clamp_to_box(p, *a0);
                let dist = (p - c).norm();
                diamond_product(c, *a0) - dist
            }
            LevelSetKind::Analytic(a) => (a.value)(p),
        }
    }

    pub fn gradient(&self, p: Point) -> Vector {
        match &self.kind {
            LevelSetKind::Circle { center, .. } => {
                let d = p - center;
                let r = d.norm();
                if r == 0.0 {
                    Vector::zeros()
                } else {
                    d / r
                }
            }
            LevelSetKind::HorizontalLine { .. } => Vector::new(0.0, 1.0),
            LevelSetKind::PolygonProduct { a0 } => {
                let c = clamp_to_box(p, *a0);
                let inner = diamond_gradient(c, *a0);
                let d = p - c;
                let dist = d.norm();
                let mut g = Vector::zeros();
                for i in 0..2 {
                    g[i] = if d[i] != 0.0 { -d[i] / dist } else { inner[i] };
                }
                g
            }
            LevelSetKind::Analytic(a) => (a.gradient)(p),
        }
    }

    /// Subdomain containing `p`; points on the zero set count as `{φ > 0}`.
    pub fn side(&self, p: Point) -> Subdomain {
        self.side_of_value(self.value(p))
    }

    pub fn side_of_value(&self, phi: f64) -> Subdomain {
        if phi >= 0.0 {
            self.positive_side
        } else {
            self.positive_side.other()
        }
    }

    /// Whether the zero set consists of straight pieces only.
    pub fn is_piecewise_linear(&self) -> bool {
        match &self.kind {
            LevelSetKind::Circle { .. } => false,
            LevelSetKind::HorizontalLine { .. } | LevelSetKind::PolygonProduct { .. } => true,
            LevelSetKind::Analytic(a) => a.piecewise_linear,
        }
    }

    /// Corner points of a piecewise-linear interface.
    pub fn kinks(&self) -> Vec<Point> {
        match &self.kind {
            LevelSetKind::PolygonProduct { a0 } => vec![
                Point::new(1.0, *a0),
                Point::new(2.0 - a0, 1.0),
                Point::new(1.0, 2.0 - a0),
                Point::new(*a0, 1.0),
            ],
            _ => Vec::new(),
        }
    }
}

/// Unit normal of the interface at `x`, pointing from `Ω₁` into `Ω₂`.
pub fn interface_normal(levelset: &LevelSet, x: Point) -> Result<Vector> {
    let g = levelset.gradient(x);
    let norm = g.norm();
    if !(norm > 1e-12) {
        return Err(Error::DegenerateGradient { x: x.x, y: x.y });
    }
    let n = g / norm;
    Ok(match levelset.positive_side() {
        Subdomain::One => -n,
        Subdomain::Two => n,
    })
}

fn clamp_to_box(p: Point, a0: f64) -> Point {
    Point::new(p.x.clamp(a0, 2.0 - a0), p.y.clamp(a0, 2.0 - a0))
}

fn diamond_factors(p: Point, a0: f64) -> [f64; 4] {
    let (x, y) = (p.x, p.y);
    [
        y - (-x + 1.0 + a0),
        y - (x - 1.0 + a0),
        y - (-x - a0 + 3.0),
        y - (x + 1.0 - a0),
    ]
}

fn diamond_product(p: Point, a0: f64) -> f64 {
    diamond_factors(p, a0).iter().product()
}

fn diamond_gradient(p: Point, a0: f64) -> Vector {
    let f = diamond_factors(p, a0);
    // d f_i / dx alternates +1, -1; d f_i / dy = 1
    let dx = [1.0, -1.0, 1.0, -1.0];
    let mut g = Vector::zeros();
    for i in 0..4 {
        let rest: f64 = (0..4).filter(|&j| j != i).map(|j| f[j]).product();
        g.x += dx[i] * rest;
        g.y += rest;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    const A0: f64 = 0.4330127018922193; // sqrt(3) / 4

    #[test]
    fn circle_normal_points_inward_when_inside_is_omega2() {
        let r0 = 3f64.sqrt() / 8.0;
        let ls = LevelSet::circle(Point::new(0.5, 0.5), r0, Subdomain::One);
        let n = interface_normal(&ls, Point::new(0.5 + r0, 0.5)).unwrap();
        assert!((n - Vector::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn line_normal_points_down_into_omega2() {
        let ls = LevelSet::horizontal_line(0.2031, Subdomain::One);
        let n = interface_normal(&ls, Point::new(0.3, 0.2031)).unwrap();
        assert_eq!(n, Vector::new(0.0, -1.0));
    }

    #[test]
    fn polygon_facet_normal_from_hand_gradient() {
        let ls = LevelSet::polygon_product(A0, Subdomain::Two);
        // midpoint of the facet y = x - 1 + a0 between (1, a0) and (2 - a0, 1)
        let mid = Point::new(0.5 * (1.0 + 2.0 - A0), 0.5 * (A0 + 1.0));
        assert!(ls.value(mid).abs() < 1e-15);
        // hand derivative: only the vanishing factor f2 survives,
        // grad = f1 f3 f4 * (-1, 1)
        let f1 = mid.y - (-mid.x + 1.0 + A0);
        let f3 = mid.y - (-mid.x - A0 + 3.0);
        let f4 = mid.y - (mid.x + 1.0 - A0);
        let g = ls.gradient(mid);
        assert!((g - f1 * f3 * f4 * Vector::new(-1.0, 1.0)).norm() < 1e-14);
        let n = interface_normal(&ls, mid).unwrap();
        // inside is Omega2, so the normal points towards the center (1, 1)
        let expected = Vector::new(-1.0, 1.0) / 2f64.sqrt();
        assert!((n - expected).norm() < 1e-14);
    }

    #[test]
    fn polygon_vanishes_on_facets_only() {
        let ls = LevelSet::polygon_product(A0, Subdomain::Two);
        assert!(ls.value(Point::new(1.0, A0)).abs() < 1e-15);
        assert!(ls.value(Point::new(1.0, 1.0)) > 0.0);
        // extended facet lines outside the diamond are not interface
        for p in [
            Point::new(0.0, 1.0 + A0),
            Point::new(1.0, 0.2),
            Point::new(0.1, 0.1),
            Point::new(1.9, 1.9),
        ] {
            assert!(ls.value(p) < 0.0, "{p:?}");
        }
    }

    #[test]
    fn polygon_gradient_matches_finite_differences() {
        let ls = LevelSet::polygon_product(A0, Subdomain::Two);
        let eps = 1e-6;
        for p in [
            Point::new(0.8, 0.9),
            Point::new(1.3, 0.6),
            Point::new(0.2, 0.9),
            Point::new(1.1, 1.8),
        ] {
            let g = ls.gradient(p);
            let fx = (ls.value(p + Vector::new(eps, 0.0)) - ls.value(p - Vector::new(eps, 0.0)))
                / (2.0 * eps);
            let fy = (ls.value(p + Vector::new(0.0, eps)) - ls.value(p - Vector::new(0.0, eps)))
                / (2.0 * eps);
            assert!((g - Vector::new(fx, fy)).norm() < 1e-7, "{p:?}");
        }
    }

    #[test]
    fn degenerate_gradient_is_reported() {
        let ls = LevelSet::polygon_product(A0, Subdomain::Two);
        assert!(matches!(
            interface_normal(&ls, Point::new(1.0, A0)),
            Err(Error::DegenerateGradient { .. })
        ));
    }
}
