use crate::error::{Error, Result};
use crate::geometry::mesh::cross;
use crate::geometry::{
    interface_normal, CutElement, CutTopology, EdgeClass, EdgePortion, ElementClass, LevelSet,
    StructuredMesh, Subdomain,
};
use crate::{Point, Vector};

use super::reference::{gauss_legendre, map_segment, map_triangle, segment_rule, triangle_rule};
use super::QuadRule;

/// Default geometric tolerance for curved cuts, relative to `h_K`.
pub const DEFAULT_GEO_TOL: f64 = 1e-10;

const MAX_SUBARCS: usize = 256;

/// Point on a curved interface piece with its parametric data.
#[derive(Debug, Clone, Copy)]
pub struct ArcSample {
    pub point: Point,
    /// `dγ/ds` for the chord parameter `s ∈ [0, 1]`.
    pub tangent: Vector,
    /// Gauss weight in `s`.
    pub weight: f64,
    /// Signed offset from the chord along its left normal.
    pub offset: f64,
}

/// Graph parametrization of `Γ` over the chord `[a, b]`:
/// `γ(s) = a + s (b - a) + d(s) n_c` with `φ(γ(s)) = 0`.
struct ChordGraph<'a> {
    levelset: &'a LevelSet,
    a: Point,
    chord: Vector,
    normal: Vector,
    scale: f64,
}

impl<'a> ChordGraph<'a> {
    fn new(levelset: &'a LevelSet, a: Point, b: Point) -> Self {
        let chord = b - a;
        let len = chord.norm();
        Self {
            levelset,
            a,
            chord,
            normal: Vector::new(-chord.y, chord.x) / len,
            scale: len,
        }
    }

    fn eval(&self, s: f64, guess: f64) -> Result<(Point, Vector, f64)> {
        let base = self.a + s * self.chord;
        let mut d = guess;
        for _ in 0..60 {
            let x = base + d * self.normal;
            let phi = self.levelset.value(x);
            let g = self.levelset.gradient(x);
            let gn = g.dot(&self.normal);
            if !(gn.abs() > 1e-3 * g.norm()) {
                return Err(Error::ProjectionDivergence(format!(
                    "interface is tangent to the chord normal near ({}, {})",
                    x.x, x.y
                )));
            }
            let step = phi / gn;
            d -= step;
            if step.abs() <= 1e-12 * self.scale || phi == 0.0 {
                // one more correction once in the quadratic regime
                let x = base + d * self.normal;
                d -= self.levelset.value(x) / self.levelset.gradient(x).dot(&self.normal);
                let x = base + d * self.normal;
                let g = self.levelset.gradient(x);
                let dprime = -g.dot(&self.chord) / g.dot(&self.normal);
                return Ok((x, self.chord + dprime * self.normal, d));
            }
            if d.abs() > self.scale {
                break;
            }
        }
        Err(Error::ProjectionDivergence(format!(
            "Newton projection onto the interface failed at s = {s} on chord ({}, {}) - ({}, {})",
            self.a.x,
            self.a.y,
            (self.a + self.chord).x,
            (self.a + self.chord).y
        )))
    }

    fn samples(&self, subarcs: usize, nodes: &[f64], weights: &[f64]) -> Result<Vec<ArcSample>> {
        let mut out = Vec::with_capacity(subarcs * nodes.len());
        let ds = 1.0 / subarcs as f64;
        let mut guess = 0.0;
        for j in 0..subarcs {
            for (&t, &w) in nodes.iter().zip(weights) {
                let s = (j as f64 + t) * ds;
                let (point, tangent, offset) = self.eval(s, guess)?;
                guess = offset;
                out.push(ArcSample {
                    point,
                    tangent,
                    weight: w * ds,
                    offset,
                });
            }
        }
        Ok(out)
    }
}

/// Samples of the interface arc between two of its points, refined until the
/// arc length and the chord-to-arc area change by less than `geo_tol·h` and
/// `geo_tol·h²` on doubling the number of sub-arcs.
pub fn arc_samples(
    levelset: &LevelSet,
    a: Point,
    b: Point,
    degree: usize,
    geo_tol: f64,
    h: f64,
) -> Result<Vec<ArcSample>> {
    let graph = ChordGraph::new(levelset, a, b);
    let (nodes, weights) = gauss_legendre(degree / 2 + 3);
    let measures = |samples: &[ArcSample]| {
        let len: f64 = samples.iter().map(|q| q.weight * q.tangent.norm()).sum();
        let area: f64 = samples.iter().map(|q| q.weight * q.offset).sum::<f64>() * graph.scale;
        (len, area)
    };
    let mut m = 1;
    let (mut len, mut area) = measures(&graph.samples(m, &nodes, &weights)?);
    loop {
        let fine = graph.samples(2 * m, &nodes, &weights)?;
        let (len2, area2) = measures(&fine);
        let converged =
            (len2 - len).abs() <= geo_tol * h && (area2 - area).abs() <= geo_tol * h * h;
        m *= 2;
        if converged || m >= MAX_SUBARCS {
            if !converged {
                return Err(Error::NoConvergence(format!(
                    "curved cut did not resolve to geo_tol {geo_tol:e} with {m} sub-arcs"
                )));
            }
            return Ok(fine);
        }
        len = len2;
        area = area2;
    }
}

/// Rule over the boundary `F ∩ Ω̄_i` portion of a mesh edge.
pub fn cut_edge_rule(portion: &EdgePortion, edge_length: f64, degree: usize) -> Result<QuadRule> {
    if portion.length() < 1e-14 * edge_length {
        return Err(Error::DegenerateCut(format!(
            "edge {} portion in subdomain {} has length {:e}",
            portion.edge,
            portion.side,
            portion.length()
        )));
    }
    Ok(map_segment(
        &segment_rule(degree)?,
        portion.start,
        portion.end,
    ))
}

/// Rule over an edge that lies on the interface, with normals into `Ω₂`.
pub fn interface_edge_rule(
    mesh: &StructuredMesh,
    topology: &CutTopology,
    edge: usize,
    degree: usize,
) -> Result<QuadRule> {
    let e = mesh.edges()[edge];
    let [p0, p1] = mesh.edge_points(edge);
    let local = mesh
        .triangle_edges(e.left)
        .iter()
        .position(|&x| x == edge)
        .expect("edge belongs to its left triangle");
    let outward = mesh.outward_normal(e.left, local);
    let n = match topology.element_class(e.left) {
        ElementClass::Pure(Subdomain::One) => outward,
        _ => -outward,
    };
    let rule = map_segment(&segment_rule(degree)?, p0, p1);
    let normals = vec![n; rule.len()];
    Ok(rule.with_normals(normals))
}

/// Rule over `Γ_K` with unit normals pointing from `Ω₁` into `Ω₂`.
///
/// Straight pieces use Gauss rules on the path segments; curved pieces use
/// points on `Γ` obtained by Newton projection along the chord normal,
/// weighted by the arc-length metric.
pub fn interface_rule(
    mesh: &StructuredMesh,
    cut: &CutElement,
    levelset: &LevelSet,
    degree: usize,
    geo_tol: f64,
) -> Result<QuadRule> {
    let mut rule = QuadRule::empty(degree).with_normals(Vec::new());
    if cut.curved {
        let h = mesh.diameter(cut.element);
        for w in cut.path.windows(2) {
            let samples = arc_samples(levelset, w[0], w[1], degree, geo_tol, h)?;
            let mut normals = Vec::with_capacity(samples.len());
            for q in &samples {
                normals.push(interface_normal(levelset, q.point)?);
            }
            let points = samples.iter().map(|q| q.point).collect();
            let weights = samples
                .iter()
                .map(|q| q.weight * q.tangent.norm())
                .collect();
            rule.extend(QuadRule::new(points, weights, degree).with_normals(normals));
        }
    } else {
        let reference = segment_rule(degree)?;
        for w in cut.path.windows(2) {
            let t = (w[1] - w[0]).normalize();
            let seg = map_segment(&reference, w[0], w[1]);
            let normals = vec![Vector::new(t.y, -t.x); seg.len()];
            rule.extend(seg.with_normals(normals));
        }
    }
    Ok(rule)
}

/// Rule over `K ∩ Ω_side` for any element.
///
/// Pure elements get the mapped triangle rule (empty if `side` is absent).
/// Straight cuts triangulate the exact sub-polygon; curved cuts combine the
/// straight part with a fan mapped onto the interface arc.
pub fn element_rule(
    mesh: &StructuredMesh,
    topology: &CutTopology,
    levelset: &LevelSet,
    t: usize,
    side: Subdomain,
    degree: usize,
    geo_tol: f64,
) -> Result<QuadRule> {
    match topology.element_class(t) {
        ElementClass::Pure(s) if s == side => Ok(map_triangle(
            &triangle_rule(degree)?,
            mesh.triangle_points(t),
        )),
        ElementClass::Pure(_) => Ok(QuadRule::empty(degree)),
        ElementClass::Cut => {
            let cut = topology.cut_element(t).expect("cut element geometry");
            let rule = if cut.curved {
                curved_piece_rule(mesh, cut, levelset, side, degree, geo_tol)?
            } else {
                straight_piece_rule(&cut.polygon(side), degree)?
            };
            let area = mesh.area(t);
            if rule.measure() < 1e-14 * area {
                return Err(Error::DegenerateCut(format!(
                    "element {t}: piece in subdomain {side} has area {:e}",
                    rule.measure()
                )));
            }
            Ok(rule)
        }
    }
}

fn straight_piece_rule(polygon: &[Point], degree: usize) -> Result<QuadRule> {
    let reference = triangle_rule(degree)?;
    let mut rule = QuadRule::empty(degree);
    for tri in ear_clip(polygon) {
        rule.extend(map_triangle(&reference, tri));
    }
    Ok(rule)
}

/// Triangulates a simple counter-clockwise polygon.
fn ear_clip(polygon: &[Point]) -> Vec<[Point; 3]> {
    let mut idx: Vec<usize> = (0..polygon.len()).collect();
    // drop repeated points
    idx.dedup_by(|a, b| (polygon[*a] - polygon[*b]).norm() == 0.0);
    let mut out = Vec::with_capacity(polygon.len().saturating_sub(2));
    while idx.len() > 3 {
        let n = idx.len();
        let mut clipped = false;
        for i in 0..n {
            let (a, b, c) = (
                polygon[idx[(i + n - 1) % n]],
                polygon[idx[i]],
                polygon[idx[(i + 1) % n]],
            );
            if cross(b - a, c - b) <= 0.0 {
                continue;
            }
            let inside = idx.iter().any(|&j| {
                let p = polygon[j];
                p != a
                    && p != b
                    && p != c
                    && cross(b - a, p - a) > 0.0
                    && cross(c - b, p - b) > 0.0
                    && cross(a - c, p - c) > 0.0
            });
            if !inside {
                out.push([a, b, c]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            // numerically degenerate: fall back to a fan
            let p0 = polygon[idx[0]];
            for w in idx[1..].windows(2) {
                out.push([p0, polygon[w[0]], polygon[w[1]]]);
            }
            return out;
        }
    }
    if idx.len() == 3 {
        out.push([polygon[idx[0]], polygon[idx[1]], polygon[idx[2]]]);
    }
    out
}

fn curved_piece_rule(
    mesh: &StructuredMesh,
    cut: &CutElement,
    levelset: &LevelSet,
    side: Subdomain,
    degree: usize,
    geo_tol: f64,
) -> Result<QuadRule> {
    let h = mesh.diameter(cut.element);
    let mut arcs = Vec::with_capacity(cut.path.len() - 1);
    for w in cut.path.windows(2) {
        arcs.push((
            w[0],
            w[1],
            arc_samples(levelset, w[0], w[1], degree, geo_tol, h)?,
        ));
    }
    let boundary = &cut.boundary[side.index()];
    let polygon = cut.polygon(side);
    let centroid = polygon.iter().sum::<Point>() / polygon.len() as f64;
    let candidates =
        std::iter::once(centroid).chain(boundary[1..boundary.len() - 1].iter().copied());
    for anchor in candidates {
        if let Some(rule) = anchored_fan(boundary, &arcs, anchor, side, degree, h)? {
            return Ok(rule);
        }
    }
    chord_and_cap(&polygon, &arcs, side, degree)
}

/// Fan from `anchor` over the straight boundary and the arcs, if every
/// sub-region has the orientation of the piece.
fn anchored_fan(
    boundary: &[Point],
    arcs: &[(Point, Point, Vec<ArcSample>)],
    anchor: Point,
    side: Subdomain,
    degree: usize,
    h: f64,
) -> Result<Option<QuadRule>> {
    let reference = triangle_rule(degree)?;
    let mut rule = QuadRule::empty(degree);
    for w in boundary.windows(2) {
        let area = 0.5 * cross(w[0] - anchor, w[1] - anchor);
        if area.abs() <= 1e-15 * h * h {
            continue;
        }
        if area < 0.0 {
            return Ok(None);
        }
        rule.extend(map_triangle(&reference, [anchor, w[0], w[1]]));
    }
    // the piece boundary runs along the path for Ω₁ and against it for Ω₂
    let orientation = match side {
        Subdomain::One => 1.0,
        Subdomain::Two => -1.0,
    };
    // x = O + t (γ(s) - O), dx = t · det(γ - O, γ') dt ds
    let (tn, tw) = gauss_legendre((degree + 2).div_ceil(2));
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (_, _, samples) in arcs {
        for q in samples {
            let jac = orientation * cross(q.point - anchor, q.tangent);
            if jac <= 0.0 {
                return Ok(None);
            }
            for (&t, &wt) in tn.iter().zip(&tw) {
                points.push(anchor + t * (q.point - anchor));
                weights.push(q.weight * wt * t * jac);
            }
        }
    }
    rule.extend(QuadRule::new(points, weights, degree));
    Ok(Some(rule))
}

/// Straight polygon plus the signed region between each chord and its arc.
///
/// Weights in the cap are negative where the arc bulges into the polygon.
fn chord_and_cap(
    polygon: &[Point],
    arcs: &[(Point, Point, Vec<ArcSample>)],
    side: Subdomain,
    degree: usize,
) -> Result<QuadRule> {
    let mut rule = straight_piece_rule(polygon, degree)?;
    let orientation = match side {
        Subdomain::One => -1.0,
        Subdomain::Two => 1.0,
    };
    let (tn, tw) = gauss_legendre(degree / 2 + 1);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (a, b, samples) in arcs {
        let chord = b - a;
        let len = chord.norm();
        let normal = Vector::new(-chord.y, chord.x) / len;
        for (q, s) in samples.iter().map(|q| {
            (
                q,
                (q.point - a - q.offset * normal).dot(&chord) / (len * len),
            )
        }) {
            for (&t, &wt) in tn.iter().zip(&tw) {
                points.push(a + s * chord + t * q.offset * normal);
                weights.push(orientation * q.weight * wt * q.offset * len);
            }
        }
    }
    rule.extend(QuadRule::new(points, weights, degree));
    Ok(rule)
}

/// Rule over the part of edge `e` bounding subdomain `side`, if any.
pub fn edge_side_rule(
    mesh: &StructuredMesh,
    topology: &CutTopology,
    edge: usize,
    side: Subdomain,
    degree: usize,
) -> Result<Option<QuadRule>> {
    let e = mesh.edges()[edge];
    let [p0, p1] = mesh.edge_points(edge);
    let len = (p1 - p0).norm();
    match topology.edge_class(edge) {
        EdgeClass::Uncut(s) if s == side => Ok(Some(map_segment(&segment_rule(degree)?, p0, p1))),
        EdgeClass::Uncut(_) | EdgeClass::OnInterface => Ok(None),
        EdgeClass::CutAtPoint(x) => {
            let s0 = topology
                .vertex_state(e.vertices[0])
                .strict()
                .expect("cut edge has strict endpoints");
            let (start, end) = if s0 == side { (p0, x) } else { (x, p1) };
            let portion = EdgePortion {
                edge,
                side,
                start,
                end,
            };
            cut_edge_rule(&portion, len, degree).map(Some)
        }
    }
}
