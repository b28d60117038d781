//! Benchmark problems with exact solutions and the data derived from them.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{
    interface_normal, AnalyticLevelSet, LevelSet, LevelSetKind, Rectangle, Subdomain,
};
use crate::{Point, Vector};

type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(Point) -> Vector + Send + Sync>;
type FluxJumpFn = Arc<dyn Fn(Point, Vector) -> f64 + Send + Sync>;

/// Named problem configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    CircleHomog,
    CircleJump,
    Segment,
    Polygon,
    ManufacturedUncut,
}

impl CaseId {
    pub const ALL: [CaseId; 5] = [
        CaseId::CircleHomog,
        CaseId::CircleJump,
        CaseId::Segment,
        CaseId::Polygon,
        CaseId::ManufacturedUncut,
    ];

    /// Coefficients `(α₁, α₂)` used when none are given.
    pub fn default_alphas(self) -> (f64, f64) {
        match self {
            CaseId::CircleHomog => (10.0, 1.0),
            CaseId::CircleJump | CaseId::Segment | CaseId::Polygon => (1000.0, 1.0),
            CaseId::ManufacturedUncut => (1.0, 1.0),
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseId::CircleHomog => "circle-homog",
            CaseId::CircleJump => "circle-jump",
            CaseId::Segment => "segment",
            CaseId::Polygon => "polygon",
            CaseId::ManufacturedUncut => "manufactured-uncut",
        })
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown case '{s}'")))
    }
}

/// Interface problem `-∇·(α∇u) = f` with exact solution known on both sides.
///
/// `q = α∇u`, jumps are `⟦w⟧ = w|Ω₁ - w|Ω₂` and `n` points into `Ω₂`.
#[derive(Clone)]
pub struct ProblemCase {
    pub name: String,
    pub domain: Rectangle,
    pub levelset: LevelSet,
    pub alpha: [f64; 2],
    u: [ScalarFn; 2],
    grad: [VectorFn; 2],
    f: [ScalarFn; 2],
    g_d: Option<ScalarFn>,
    g_n: Option<FluxJumpFn>,
}

impl fmt::Debug for ProblemCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemCase")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("levelset", &self.levelset)
            .field("alpha", &self.alpha)
            .finish_non_exhaustive()
    }
}

fn check_alphas(a1: f64, a2: f64) -> Result<()> {
    if a1 > 0.0 && a2 > 0.0 && a1.is_finite() && a2.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "coefficients must be positive, got {a1}, {a2}"
        )))
    }
}

fn scalar(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

fn vector(f: impl Fn(Point) -> Vector + Send + Sync + 'static) -> VectorFn {
    Arc::new(f)
}

impl ProblemCase {
    pub fn alpha(&self, side: Subdomain) -> f64 {
        self.alpha[side.index()]
    }

    pub fn u(&self, side: Subdomain, p: Point) -> f64 {
        (self.u[side.index()])(p)
    }

    pub fn grad_u(&self, side: Subdomain, p: Point) -> Vector {
        (self.grad[side.index()])(p)
    }

    /// Exact flux `q = α∇u`.
    pub fn q(&self, side: Subdomain, p: Point) -> Vector {
        self.alpha(side) * self.grad_u(side, p)
    }

    pub fn f(&self, side: Subdomain, p: Point) -> f64 {
        (self.f[side.index()])(p)
    }

    /// Exact solution on the side given by the level-set sign at `p`.
    pub fn u_at(&self, p: Point) -> f64 {
        self.u(self.levelset.side(p), p)
    }

    /// Boundary data `g`.
    pub fn g(&self, p: Point) -> f64 {
        self.u_at(p)
    }

    /// Potential jump `g_D = u₁ - u₂`.
    pub fn g_d(&self, p: Point) -> f64 {
        match &self.g_d {
            Some(g) => g(p),
            None => self.u(Subdomain::One, p) - self.u(Subdomain::Two, p),
        }
    }

    /// Flux jump `g_N = (q₁ - q₂)·n` for the normal `n` into `Ω₂`.
    pub fn g_n(&self, p: Point, n: Vector) -> f64 {
        match &self.g_n {
            Some(g) => g(p, n),
            None => (self.q(Subdomain::One, p) - self.q(Subdomain::Two, p)).dot(&n),
        }
    }

    /// `g_N` with the normal taken from the level-set gradient.
    pub fn g_n_at(&self, p: Point) -> Result<f64> {
        Ok(self.g_n(p, interface_normal(&self.levelset, p)?))
    }

    /// Whether the modified (reduced trace degree) scheme applies.
    pub fn straight_interface(&self) -> bool {
        self.levelset.is_piecewise_linear()
    }

    pub fn from_id(id: CaseId, alpha1: f64, alpha2: f64) -> Result<Self> {
        match id {
            CaseId::CircleHomog => example_circle_homogeneous(alpha1, alpha2),
            CaseId::CircleJump => example_circle_nonhomogeneous_with(alpha1, alpha2),
            CaseId::Segment => example_segment(alpha1, alpha2),
            CaseId::Polygon => example_polygon_with(alpha1, alpha2),
            CaseId::ManufacturedUncut => manufactured_uncut(alpha1),
        }
    }
}

/// Radius of the circular interfaces.
pub fn circle_radius() -> f64 {
    3f64.sqrt() / 8.0
}

/// Height of the straight interface.
pub const SEGMENT_B0: f64 = 0.2031;

/// Circular interface, `u = r⁵/α₂` inside and continuous flux: `g_D = g_N = 0`.
/// `Ω₂` is the disk.
pub fn example_circle_homogeneous(alpha1: f64, alpha2: f64) -> Result<ProblemCase> {
    check_alphas(alpha1, alpha2)?;
    let c = Point::new(0.5, 0.5);
    let r0 = circle_radius();
    let shift = r0.powi(5) * (1.0 / alpha2 - 1.0 / alpha1);
    let radial_grad = move |p: Point, a: f64| {
        let d = p - c;
        5.0 * d.norm().powi(3) * d / a
    };
    let f = scalar(move |p: Point| -25.0 * (p - c).norm().powi(3));
    Ok(ProblemCase {
        name: CaseId::CircleHomog.to_string(),
        domain: Rectangle::unit_square(),
        levelset: LevelSet::circle(c, r0, Subdomain::One),
        alpha: [alpha1, alpha2],
        u: [
            scalar(move |p: Point| (p - c).norm().powi(5) / alpha1 + shift),
            scalar(move |p: Point| (p - c).norm().powi(5) / alpha2),
        ],
        grad: [
            vector(move |p| radial_grad(p, alpha1)),
            vector(move |p| radial_grad(p, alpha2)),
        ],
        f: [f.clone(), f],
        g_d: Some(scalar(|_| 0.0)),
        g_n: Some(Arc::new(|_, _| 0.0)),
    })
}

/// Circular interface, `eˣcos y` inside (`Ω₂`, α₂ = 1) and `sin πx sin πy`
/// outside (`Ω₁`, α₁ = 1000).
pub fn example_circle_nonhomogeneous() -> Result<ProblemCase> {
    example_circle_nonhomogeneous_with(1000.0, 1.0)
}

pub fn example_circle_nonhomogeneous_with(alpha1: f64, alpha2: f64) -> Result<ProblemCase> {
    check_alphas(alpha1, alpha2)?;
    let c = Point::new(0.5, 0.5);
    Ok(ProblemCase {
        name: CaseId::CircleJump.to_string(),
        domain: Rectangle::unit_square(),
        levelset: LevelSet::circle(c, circle_radius(), Subdomain::One),
        alpha: [alpha1, alpha2],
        u: [
            scalar(|p: Point| (PI * p.x).sin() * (PI * p.y).sin()),
            scalar(|p: Point| p.x.exp() * p.y.cos()),
        ],
        grad: [
            vector(|p: Point| {
                PI * Vector::new(
                    (PI * p.x).cos() * (PI * p.y).sin(),
                    (PI * p.x).sin() * (PI * p.y).cos(),
                )
            }),
            vector(|p: Point| p.x.exp() * Vector::new(p.y.cos(), -p.y.sin())),
        ],
        f: [
            scalar(move |p: Point| 2.0 * PI * PI * alpha1 * (PI * p.x).sin() * (PI * p.y).sin()),
            scalar(|_| 0.0),
        ],
        g_d: None,
        g_n: None,
    })
}

/// Straight interface `y = 0.2031`, `Ω₁` above.
pub fn example_segment(alpha1: f64, alpha2: f64) -> Result<ProblemCase> {
    example_segment_at(SEGMENT_B0, alpha1, alpha2)
}

/// `u = 5y⁴ + 1` above `y = b0` (`Ω₁`) and `y⁴ + 4b0⁴` below, so `g_D = 1`.
pub fn example_segment_at(b0: f64, alpha1: f64, alpha2: f64) -> Result<ProblemCase> {
    check_alphas(alpha1, alpha2)?;
    let g_n = -(20.0 * alpha1 - 4.0 * alpha2) * b0.powi(3);
    Ok(ProblemCase {
        name: CaseId::Segment.to_string(),
        domain: Rectangle::unit_square(),
        levelset: LevelSet::horizontal_line(b0, Subdomain::One),
        alpha: [alpha1, alpha2],
        u: [
            scalar(|p: Point| 5.0 * p.y.powi(4) + 1.0),
            scalar(move |p: Point| p.y.powi(4) + 4.0 * b0.powi(4)),
        ],
        grad: [
            vector(|p: Point| Vector::new(0.0, 20.0 * p.y.powi(3))),
            vector(|p: Point| Vector::new(0.0, 4.0 * p.y.powi(3))),
        ],
        f: [
            scalar(move |p: Point| -60.0 * alpha1 * p.y * p.y),
            scalar(move |p: Point| -12.0 * alpha2 * p.y * p.y),
        ],
        g_d: Some(scalar(|_| 1.0)),
        // n = (0, -1) on y = b0
        g_n: Some(Arc::new(move |_, n: Vector| -g_n * n.y)),
    })
}

/// Half-diagonal offset of the diamond interface.
pub fn polygon_a0() -> f64 {
    3f64.sqrt() / 4.0
}

/// Diamond interface on `[0,2]²`: `e^{x+y}` inside (`Ω₂`), `sin(x+y) + x²y²`
/// outside (`Ω₁`), α₁ = 1000, α₂ = 1.
pub fn example_polygon() -> Result<ProblemCase> {
    example_polygon_with(1000.0, 1.0)
}

pub fn example_polygon_with(alpha1: f64, alpha2: f64) -> Result<ProblemCase> {
    check_alphas(alpha1, alpha2)?;
    Ok(ProblemCase {
        name: CaseId::Polygon.to_string(),
        domain: Rectangle::square(2.0)?,
        levelset: LevelSet::polygon_product(polygon_a0(), Subdomain::Two),
        alpha: [alpha1, alpha2],
        u: [
            scalar(|p: Point| (p.x + p.y).sin() + p.x * p.x * p.y * p.y),
            scalar(|p: Point| (p.x + p.y).exp()),
        ],
        grad: [
            vector(|p: Point| {
                let c = (p.x + p.y).cos();
                Vector::new(c + 2.0 * p.x * p.y * p.y, c + 2.0 * p.x * p.x * p.y)
            }),
            vector(|p: Point| {
                let e = (p.x + p.y).exp();
                Vector::new(e, e)
            }),
        ],
        f: [
            scalar(move |p: Point| {
                alpha1 * (2.0 * (p.x + p.y).sin() - 2.0 * p.x * p.x - 2.0 * p.y * p.y)
            }),
            scalar(move |p: Point| -2.0 * alpha2 * (p.x + p.y).exp()),
        ],
        g_d: None,
        g_n: None,
    })
}

/// Single-domain problem on the unit square: `u = eˣ sin πy`.
pub fn manufactured_uncut(alpha: f64) -> Result<ProblemCase> {
    check_alphas(alpha, alpha)?;
    let u = scalar(|p: Point| p.x.exp() * (PI * p.y).sin());
    let grad = vector(|p: Point| p.x.exp() * Vector::new((PI * p.y).sin(), PI * (PI * p.y).cos()));
    let f = scalar(move |p: Point| -alpha * (1.0 - PI * PI) * p.x.exp() * (PI * p.y).sin());
    Ok(ProblemCase {
        name: CaseId::ManufacturedUncut.to_string(),
        domain: Rectangle::unit_square(),
        levelset: LevelSet::everywhere(Subdomain::One),
        alpha: [alpha, alpha],
        u: [u.clone(), u],
        grad: [grad.clone(), grad],
        f: [f.clone(), f],
        g_d: Some(scalar(|_| 0.0)),
        g_n: Some(Arc::new(|_, _| 0.0)),
    })
}

/// Polynomial of total degree `k` with fixed coefficients, and its derivatives.
#[derive(Debug, Clone)]
pub struct Polynomial {
    /// `(p, q, c)` for the term `c xᵖ y^q`.
    terms: Vec<(i32, i32, f64)>,
}

impl Polynomial {
    /// A dense polynomial of degree `k` with all coefficients nonzero.
    pub fn dense(k: usize) -> Self {
        let mut terms = Vec::new();
        let mut c = 0.7;
        for d in 0..=k as i32 {
            for q in 0..=d {
                terms.push((d - q, q, c));
                c = -0.6 * c + 0.35;
            }
        }
        Self { terms }
    }

    /// Terms `(p, q, c)` for `c xᵖ y^q`.
    pub fn from_terms(terms: Vec<(i32, i32, f64)>) -> Self {
        Self { terms }
    }

    pub fn value(&self, p: Point) -> f64 {
        self.terms
            .iter()
            .map(|&(a, b, c)| c * p.x.powi(a) * p.y.powi(b))
            .sum()
    }

    pub fn gradient(&self, p: Point) -> Vector {
        self.terms
            .iter()
            .map(|&(a, b, c)| {
                let gx = if a > 0 {
                    c * a as f64 * p.x.powi(a - 1) * p.y.powi(b)
                } else {
                    0.0
                };
                let gy = if b > 0 {
                    c * b as f64 * p.x.powi(a) * p.y.powi(b - 1)
                } else {
                    0.0
                };
                Vector::new(gx, gy)
            })
            .sum()
    }

    pub fn laplacian(&self, p: Point) -> f64 {
        self.terms
            .iter()
            .map(|&(a, b, c)| {
                let xx = if a > 1 {
                    (a * (a - 1)) as f64 * p.x.powi(a - 2) * p.y.powi(b)
                } else {
                    0.0
                };
                let yy = if b > 1 {
                    (b * (b - 1)) as f64 * p.x.powi(a) * p.y.powi(b - 2)
                } else {
                    0.0
                };
                c * (xx + yy)
            })
            .sum()
    }
}

/// Globally `P_k` solution with `α₁ = α₂ = alpha`, cut by the tilted line
/// `y = 0.37 + 0.21x` (`Ω₁` above). Both jumps vanish.
pub fn patch_case(k: usize, alpha: f64) -> Result<ProblemCase> {
    check_alphas(alpha, alpha)?;
    let poly = Arc::new(Polynomial::dense(k));
    let levelset = LevelSet::new(
        LevelSetKind::Analytic(AnalyticLevelSet {
            value: Arc::new(|p: Point| p.y - 0.37 - 0.21 * p.x),
            gradient: Arc::new(|_| Vector::new(-0.21, 1.0)),
            piecewise_linear: true,
        }),
        Subdomain::One,
    );
    let (p1, p2, p3) = (poly.clone(), poly.clone(), poly);
    let u = scalar(move |p| p1.value(p));
    let grad = vector(move |p| p2.gradient(p));
    let f = scalar(move |p| -alpha * p3.laplacian(p));
    Ok(ProblemCase {
        name: format!("patch-p{k}"),
        domain: Rectangle::unit_square(),
        levelset,
        alpha: [alpha, alpha],
        u: [u.clone(), u],
        grad: [grad.clone(), grad],
        f: [f.clone(), f],
        g_d: None,
        g_n: None,
    })
}

/// Exact solution polynomial on each side of an arbitrary interface; the
/// jump data follow from the two branches.
pub fn piecewise_polynomial_case(
    domain: Rectangle,
    levelset: LevelSet,
    alpha: [f64; 2],
    branches: [Polynomial; 2],
) -> Result<ProblemCase> {
    check_alphas(alpha[0], alpha[1])?;
    let [p1, p2] = branches.map(Arc::new);
    let u = |p: Arc<Polynomial>| scalar(move |x| p.value(x));
    let grad = |p: Arc<Polynomial>| vector(move |x| p.gradient(x));
    let f = |p: Arc<Polynomial>, a: f64| scalar(move |x| -a * p.laplacian(x));
    Ok(ProblemCase {
        name: "piecewise-polynomial".into(),
        domain,
        levelset,
        alpha,
        u: [u(p1.clone()), u(p2.clone())],
        grad: [grad(p1.clone()), grad(p2.clone())],
        f: [f(p1, alpha[0]), f(p2, alpha[1])],
        g_d: None,
        g_n: None,
    })
}
