use rayon::prelude::*;

use super::levelset::{interface_normal, LevelSet, Subdomain};
use super::mesh::{cross, polygon_area, StructuredMesh};
use crate::error::{Error, Result};
use crate::Point;

/// Default relative snapping tolerance for vertices that sit on the interface.
pub const DEFAULT_SNAP_TOL: f64 = 1e-12;

/// Absolute tolerance on `|φ|` accepted at an edge intersection point.
pub const INTERSECTION_TOL: f64 = 1e-12;

/// Interior samples per edge used to detect multiple crossings.
const CROSSING_SAMPLES: usize = 8;

/// Sign state of a mesh vertex after snapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexState {
    Strict(Subdomain),
    /// `|φ| / |∇φ|` below the snapping tolerance: the vertex lies on `Γ`.
    OnInterface,
}

impl VertexState {
    pub fn strict(self) -> Option<Subdomain> {
        match self {
            VertexState::Strict(s) => Some(s),
            VertexState::OnInterface => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementClass {
    Pure(Subdomain),
    Cut,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeClass {
    /// The whole edge lies in the closure of one subdomain.
    Uncut(Subdomain),
    /// `Γ` crosses the edge at a single interior point.
    CutAtPoint(Point),
    /// The edge is part of `Γ`, separating a pure `Ω₁` element from a pure `Ω₂` one.
    OnInterface,
}

/// Part of a mesh edge in the closure of one subdomain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePortion {
    pub edge: usize,
    pub side: Subdomain,
    pub start: Point,
    pub end: Point,
}

impl EdgePortion {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }
}

/// Geometry of an element crossed by the interface.
#[derive(Debug, Clone)]
pub struct CutElement {
    pub element: usize,
    /// `Γ_K` as a path from the point where the counter-clockwise boundary walk
    /// leaves `Ω₁` to the point where it re-enters `Ω₁`, so that `Ω₁` lies to
    /// the left. Interior points are interface corners inside the element.
    pub path: Vec<Point>,
    /// `Γ_K` is not a union of straight segments.
    pub curved: bool,
    /// Counter-clockwise boundary points of `K ∩ Ω_i` along `∂K`, starting
    /// and ending at the two interface points. The loop is closed by `Γ_K`.
    pub boundary: [Vec<Point>; 2],
}

impl CutElement {
    pub fn start(&self) -> Point {
        self.path[0]
    }

    pub fn end(&self) -> Point {
        *self.path.last().expect("non-empty interface path")
    }

    /// Straight polygon approximating `K ∩ Ω_i` (exact for straight cuts).
    pub fn polygon(&self, side: Subdomain) -> Vec<Point> {
        let mut poly = self.boundary[side.index()].clone();
        let inner = &self.path[1..self.path.len() - 1];
        match side {
            Subdomain::One => poly.extend(inner.iter().copied()),
            Subdomain::Two => poly.extend(inner.iter().rev().copied()),
        }
        poly
    }

    /// Length of the chord `Γ_{K,h}` (or of the straight path for kinked cuts).
    pub fn chord_length(&self) -> f64 {
        self.path.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

/// Per-element classification of a mesh against a level set.
#[derive(Debug, Clone)]
pub struct CutTopology {
    vertex_state: Vec<VertexState>,
    element_class: Vec<ElementClass>,
    edge_class: Vec<EdgeClass>,
    cut_elements: Vec<CutElement>,
    cut_index: Vec<Option<usize>>,
}

impl CutTopology {
    pub fn vertex_state(&self, v: usize) -> VertexState {
        self.vertex_state[v]
    }

    pub fn element_class(&self, t: usize) -> ElementClass {
        self.element_class[t]
    }

    pub fn element_classes(&self) -> &[ElementClass] {
        &self.element_class
    }

    pub fn edge_class(&self, e: usize) -> EdgeClass {
        self.edge_class[e]
    }

    pub fn cut_elements(&self) -> &[CutElement] {
        &self.cut_elements
    }

    pub fn cut_element(&self, t: usize) -> Option<&CutElement> {
        self.cut_index[t].map(|i| &self.cut_elements[i])
    }

    pub fn num_cut(&self) -> usize {
        self.cut_elements.len()
    }

    /// Edges lying on the interface.
    pub fn interface_edges(&self) -> Vec<usize> {
        (0..self.edge_class.len())
            .filter(|&e| self.edge_class[e] == EdgeClass::OnInterface)
            .collect()
    }

    /// Subdomains present in element `t`.
    pub fn sides(&self, t: usize) -> Vec<Subdomain> {
        match self.element_class[t] {
            ElementClass::Pure(s) => vec![s],
            ElementClass::Cut => Subdomain::BOTH.to_vec(),
        }
    }

    /// Portions of the three edges of `t` that bound `K ∩ Ω_side`.
    ///
    /// Edges lying on the interface are excluded: they belong to `Γ`.
    pub fn edge_portions(
        &self,
        mesh: &StructuredMesh,
        t: usize,
        side: Subdomain,
    ) -> Vec<EdgePortion> {
        let tri = mesh.triangles()[t];
        let edges = mesh.triangle_edges(t);
        let mut out = Vec::with_capacity(3);
        for j in 0..3 {
            let (v0, v1) = (tri[j], tri[(j + 1) % 3]);
            let (p0, p1) = (mesh.vertices()[v0], mesh.vertices()[v1]);
            let e = edges[j];
            match self.edge_class[e] {
                EdgeClass::Uncut(s) if s == side => out.push(EdgePortion {
                    edge: e,
                    side,
                    start: p0,
                    end: p1,
                }),
                EdgeClass::Uncut(_) | EdgeClass::OnInterface => {}
                EdgeClass::CutAtPoint(x) => {
                    let s0 = self.vertex_state[v0]
                        .strict()
                        .expect("cut edge has strict endpoints");
                    if s0 == side {
                        out.push(EdgePortion {
                            edge: e,
                            side,
                            start: p0,
                            end: x,
                        });
                    } else {
                        out.push(EdgePortion {
                            edge: e,
                            side,
                            start: x,
                            end: p1,
                        });
                    }
                }
            }
        }
        out
    }

    /// Largest `|n(x) - n(y)| / h_K` over the endpoints of curved cuts.
    pub fn normal_variation(&self, mesh: &StructuredMesh, levelset: &LevelSet) -> Result<f64> {
        let mut gamma: f64 = 0.0;
        for cut in self.cut_elements.iter().filter(|c| c.curved) {
            let n0 = interface_normal(levelset, cut.start())?;
            let n1 = interface_normal(levelset, cut.end())?;
            gamma = gamma.max((n0 - n1).norm() / mesh.diameter(cut.element));
        }
        Ok(gamma)
    }
}

/// Locates the crossing of `Γ` on the segment `[p0, p1]`.
///
/// Safeguarded Newton iteration on the restriction of `φ` to the segment,
/// falling back to bisection whenever a step leaves the bracket or stalls.
pub fn edge_intersection(levelset: &LevelSet, p0: Point, p1: Point, tol: f64) -> Result<Point> {
    let dir = p1 - p0;
    let f = |t: f64| levelset.value(p0 + t * dir);
    let df = |t: f64| levelset.gradient(p0 + t * dir).dot(&dir);
    let (f0, f1) = (f(0.0), f(1.0));
    if f0 == 0.0 {
        return Ok(p0);
    }
    if f1 == 0.0 {
        return Ok(p1);
    }
    if f0 * f1 > 0.0 {
        return Err(Error::InvalidInput(format!(
            "segment ({}, {}) - ({}, {}) does not bracket the interface",
            p0.x, p0.y, p1.x, p1.y
        )));
    }
    // orient so that f(lo) < 0 < f(hi)
    let (mut lo, mut hi) = if f0 < 0.0 { (0.0, 1.0) } else { (1.0, 0.0) };
    let mut t = 0.5;
    let mut step_old = 1.0f64;
    let mut step = step_old;
    let mut ft = f(t);
    let mut dft = df(t);
    for _ in 0..200 {
        let newton_out = ((t - hi) * dft - ft) * ((t - lo) * dft - ft) > 0.0;
        let slow = (2.0 * ft).abs() > (step_old * dft).abs();
        if newton_out || slow || !dft.is_finite() || dft == 0.0 {
            step_old = step;
            step = 0.5 * (hi - lo);
            t = lo + step;
        } else {
            step_old = step;
            step = ft / dft;
            t -= step;
        }
        ft = f(t);
        if step.abs() < 1e-16 || ft == 0.0 || (hi - lo).abs() < 1e-16 {
            break;
        }
        dft = df(t);
        if ft < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
    }
    if ft.abs() < tol && (0.0..=1.0).contains(&t) {
        Ok(p0 + t * dir)
    } else {
        Err(Error::NoConvergence(format!(
            "edge intersection on ({}, {}) - ({}, {}): |phi| = {:e}",
            p0.x,
            p0.y,
            p1.x,
            p1.y,
            ft.abs()
        )))
    }
}

/// Classifies every element of `mesh` as pure or cut and builds the cut geometry.
///
/// Vertices with `|φ| / |∇φ| < snap_tol · h_K` are treated as lying on `Γ`;
/// an element with only one strict sign among its vertices is pure.
pub fn classify_elements(
    mesh: &StructuredMesh,
    levelset: &LevelSet,
    snap_tol: f64,
) -> Result<CutTopology> {
    let h = mesh.h();
    let vertex_state: Vec<VertexState> = mesh
        .vertices()
        .par_iter()
        .map(|&p| {
            let phi = levelset.value(p);
            let g = levelset.gradient(p).norm();
            let dist = if g > 0.0 { phi.abs() / g } else { phi.abs() };
            if dist < snap_tol * h || phi == 0.0 {
                VertexState::OnInterface
            } else {
                VertexState::Strict(levelset.side_of_value(phi))
            }
        })
        .collect();

    let element_class: Vec<ElementClass> = mesh
        .triangles()
        .iter()
        .map(|tri| {
            let mut seen = [false; 2];
            for &v in tri {
                if let VertexState::Strict(s) = vertex_state[v] {
                    seen[s.index()] = true;
                }
            }
            match seen {
                [true, true] => ElementClass::Cut,
                [false, true] => ElementClass::Pure(Subdomain::Two),
                // all vertices on Γ cannot happen for a non-degenerate cut;
                // fall back to the side of the centroid
                [false, false] => ElementClass::Pure(levelset.side(centroid(tri, mesh))),
                [true, false] => ElementClass::Pure(Subdomain::One),
            }
        })
        .collect();

    let edge_class: Vec<EdgeClass> = (0..mesh.num_edges())
        .into_par_iter()
        .map(|e| classify_edge(mesh, levelset, &vertex_state, &element_class, e))
        .collect::<Result<_>>()?;

    let kinks = levelset.kinks();
    let cut_elements: Vec<CutElement> = (0..mesh.num_triangles())
        .into_par_iter()
        .filter(|&t| element_class[t] == ElementClass::Cut)
        .map(|t| build_cut_element(mesh, levelset, &vertex_state, &edge_class, &kinks, t))
        .collect::<Result<_>>()?;

    let mut cut_index = vec![None; mesh.num_triangles()];
    for (i, c) in cut_elements.iter().enumerate() {
        cut_index[c.element] = Some(i);
    }

    Ok(CutTopology {
        vertex_state,
        element_class,
        edge_class,
        cut_elements,
        cut_index,
    })
}

fn centroid(tri: &[usize; 3], mesh: &StructuredMesh) -> Point {
    let v = mesh.vertices();
    (v[tri[0]] + v[tri[1]] + v[tri[2]]) / 3.0
}

fn classify_edge(
    mesh: &StructuredMesh,
    levelset: &LevelSet,
    vertex_state: &[VertexState],
    element_class: &[ElementClass],
    e: usize,
) -> Result<EdgeClass> {
    let edge = mesh.edges()[e];
    let [p0, p1] = mesh.edge_points(e);
    let [s0, s1] = edge.vertices.map(|v| vertex_state[v]);

    // sign changes along the edge, ignoring snapped endpoints
    let mut values = Vec::with_capacity(CROSSING_SAMPLES + 2);
    if s0.strict().is_some() {
        values.push(levelset.value(p0));
    }
    for i in 1..=CROSSING_SAMPLES {
        let t = i as f64 / (CROSSING_SAMPLES + 1) as f64;
        values.push(levelset.value(p0 + t * (p1 - p0)));
    }
    if s1.strict().is_some() {
        values.push(levelset.value(p1));
    }
    let nonzero: Vec<f64> = values.into_iter().filter(|v| *v != 0.0).collect();
    let changes = nonzero.windows(2).filter(|w| w[0] * w[1] < 0.0).count();

    let violation = |what: &str| {
        Error::AssumptionViolation(format!(
            "edge {e} ({}, {}) - ({}, {}) {what}",
            p0.x, p0.y, p1.x, p1.y
        ))
    };

    match (s0, s1) {
        (VertexState::Strict(a), VertexState::Strict(b)) if a != b => {
            if changes > 1 {
                return Err(violation("crosses the interface more than once"));
            }
            let x = edge_intersection(levelset, p0, p1, INTERSECTION_TOL)?;
            Ok(EdgeClass::CutAtPoint(x))
        }
        (VertexState::Strict(a), VertexState::Strict(_)) => {
            if changes > 0 {
                return Err(violation("crosses the interface twice"));
            }
            Ok(EdgeClass::Uncut(a))
        }
        (VertexState::Strict(a), VertexState::OnInterface)
        | (VertexState::OnInterface, VertexState::Strict(a)) => {
            if changes > 0 {
                return Err(violation(
                    "touches the interface at an endpoint and crosses it again",
                ));
            }
            Ok(EdgeClass::Uncut(a))
        }
        (VertexState::OnInterface, VertexState::OnInterface) => {
            let left = element_class[edge.left];
            let right = edge.right.map(|r| element_class[r]);
            match (left, right) {
                (ElementClass::Pure(a), Some(ElementClass::Pure(b))) if a != b => {
                    Ok(EdgeClass::OnInterface)
                }
                (ElementClass::Pure(a), _) => Ok(EdgeClass::Uncut(a)),
                (_, Some(ElementClass::Pure(b))) => Ok(EdgeClass::Uncut(b)),
                _ => Err(violation(
                    "has both endpoints on the interface next to a cut element",
                )),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Crossing {
    /// Boundary walk leaves `Ω₁`.
    Leave,
    /// Boundary walk enters `Ω₁`.
    Enter,
}

#[derive(Debug, Clone, Copy)]
enum WalkItem {
    Vertex(Point),
    Crossing(Point, Crossing),
}

fn build_cut_element(
    mesh: &StructuredMesh,
    levelset: &LevelSet,
    vertex_state: &[VertexState],
    edge_class: &[EdgeClass],
    kinks: &[Point],
    t: usize,
) -> Result<CutElement> {
    let tri = mesh.triangles()[t];
    let edges = mesh.triangle_edges(t);
    let states = tri.map(|v| vertex_state[v]);
    let pts = mesh.triangle_points(t);

    let mut walk: Vec<WalkItem> = Vec::with_capacity(6);
    for j in 0..3 {
        match states[j] {
            VertexState::Strict(_) => walk.push(WalkItem::Vertex(pts[j])),
            VertexState::OnInterface => {
                let prev = states[(j + 2) % 3].strict();
                let next = states[(j + 1) % 3].strict();
                match (prev, next) {
                    (Some(Subdomain::One), Some(Subdomain::Two)) => {
                        walk.push(WalkItem::Crossing(pts[j], Crossing::Leave))
                    }
                    (Some(Subdomain::Two), Some(Subdomain::One)) => {
                        walk.push(WalkItem::Crossing(pts[j], Crossing::Enter))
                    }
                    _ => {}
                }
            }
        }
        if let EdgeClass::CutAtPoint(x) = edge_class[edges[j]] {
            let kind = if states[j].strict() == Some(Subdomain::One) {
                Crossing::Leave
            } else {
                Crossing::Enter
            };
            walk.push(WalkItem::Crossing(x, kind));
        }
    }

    let leave: Vec<usize> = (0..walk.len())
        .filter(|&i| matches!(walk[i], WalkItem::Crossing(_, Crossing::Leave)))
        .collect();
    let enter: Vec<usize> = (0..walk.len())
        .filter(|&i| matches!(walk[i], WalkItem::Crossing(_, Crossing::Enter)))
        .collect();
    if leave.len() != 1 || enter.len() != 1 {
        return Err(Error::AssumptionViolation(format!(
            "element {t} has {} interface crossings on its boundary, expected 2",
            leave.len() + enter.len()
        )));
    }

    let collect = |from: usize, to: usize| -> Vec<Point> {
        let n = walk.len();
        let mut out = Vec::new();
        let mut i = from;
        loop {
            match walk[i] {
                WalkItem::Vertex(p) | WalkItem::Crossing(p, _) => out.push(p),
            }
            if i == to {
                break;
            }
            i = (i + 1) % n;
        }
        out
    };
    let boundary_one = collect(enter[0], leave[0]);
    let boundary_two = collect(leave[0], enter[0]);
    let start = *boundary_one.last().unwrap();
    let end = boundary_one[0];

    // interface corners strictly inside the element, ordered along the path
    let area = mesh.area(t);
    let mut inner: Vec<Point> = kinks
        .iter()
        .copied()
        .filter(|&k| {
            let margin = 1e-10;
            (0..3).all(|j| cross(pts[(j + 1) % 3] - pts[j], k - pts[j]) / (2.0 * area) > margin)
        })
        .collect();
    let dir = end - start;
    inner.sort_by(|a, b| (a - start).dot(&dir).total_cmp(&(b - start).dot(&dir)));

    let mut path = Vec::with_capacity(inner.len() + 2);
    path.push(start);
    path.extend(inner);
    path.push(end);

    let cut = CutElement {
        element: t,
        path,
        curved: !levelset.is_piecewise_linear(),
        boundary: [boundary_one, boundary_two],
    };
    for side in Subdomain::BOTH {
        let a = polygon_area(&cut.polygon(side));
        if a < 1e-14 * area {
            return Err(Error::DegenerateCut(format!(
                "element {t}: piece in subdomain {side} has area {a:e}"
            )));
        }
    }
    Ok(cut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh::{build_uniform_mesh, Rectangle};

    fn r0() -> f64 {
        3f64.sqrt() / 8.0
    }

    #[test]
    fn triangles_around_circle_center_are_interior() {
        let mesh = build_uniform_mesh(Rectangle::unit_square(), 8).unwrap();
        let ls = LevelSet::circle(Point::new(0.5, 0.5), r0(), Subdomain::One);
        let topo = classify_elements(&mesh, &ls, DEFAULT_SNAP_TOL).unwrap();
        let center = Point::new(0.5, 0.5);
        let touching: Vec<usize> = (0..mesh.num_triangles())
            .filter(|&t| {
                mesh.triangle_points(t)
                    .iter()
                    .any(|p| (p - center).norm() < 1e-14)
            })
            .collect();
        // a single diagonal per cell: six triangles meet at an interior vertex
        assert_eq!(touching.len(), 6);
        for t in touching {
            for p in mesh.triangle_points(t) {
                assert!((p - center).norm() < r0());
            }
            assert_eq!(topo.element_class(t), ElementClass::Pure(Subdomain::Two));
        }
    }

    #[test]
    fn line_on_mesh_line_gives_interface_edges() {
        let mesh = build_uniform_mesh(Rectangle::unit_square(), 8).unwrap();
        let ls = LevelSet::horizontal_line(0.25, Subdomain::One);
        let topo = classify_elements(&mesh, &ls, DEFAULT_SNAP_TOL).unwrap();
        assert_eq!(topo.num_cut(), 0);
        let on = topo.interface_edges();
        assert_eq!(on.len(), 8);
        for e in on {
            let [p0, p1] = mesh.edge_points(e);
            assert_eq!(p0.y, 0.25);
            assert_eq!(p1.y, 0.25);
        }
    }

    #[test]
    fn no_zero_set_means_no_cuts() {
        let mesh = build_uniform_mesh(Rectangle::unit_square(), 4).unwrap();
        let ls = LevelSet::everywhere(Subdomain::One);
        let topo = classify_elements(&mesh, &ls, DEFAULT_SNAP_TOL).unwrap();
        assert_eq!(topo.num_cut(), 0);
        assert!(topo
            .element_classes()
            .iter()
            .all(|c| *c == ElementClass::Pure(Subdomain::One)));
    }

    #[test]
    fn line_intersection_is_exact() {
        let ls = LevelSet::horizontal_line(0.2031, Subdomain::One);
        let x = edge_intersection(
            &ls,
            Point::new(0.375, 0.125),
            Point::new(0.375, 0.25),
            1e-14,
        )
        .unwrap();
        assert!((x - Point::new(0.375, 0.2031)).norm() < 1e-15);
    }

    #[test]
    fn circle_intersection_through_center() {
        let ls = LevelSet::circle(Point::new(0.5, 0.5), r0(), Subdomain::One);
        let x = edge_intersection(&ls, Point::new(0.5, 0.5), Point::new(1.0, 0.5), 1e-14).unwrap();
        assert!((x.x - (0.5 + r0())).abs() < 1e-15);
        let x = edge_intersection(&ls, Point::new(0.0, 0.5), Point::new(0.5, 0.5), 1e-14).unwrap();
        assert!((x.x - (0.5 - r0())).abs() < 1e-15);
    }

    #[test]
    fn circle_intersection_matches_quadratic_root() {
        let ls = LevelSet::circle(Point::new(0.5, 0.5), r0(), Subdomain::One);
        let h = 1.0 / 16.0;
        // diagonal edge of a 1/16 mesh that straddles the circle
        let p0 = Point::new(10.0 * h, 10.0 * h);
        let p1 = Point::new(11.0 * h, 11.0 * h);
        let x = edge_intersection(&ls, p0, p1, 1e-14).unwrap();
        // |p0 + t d - c|^2 = r0^2
        let d = p1 - p0;
        let m = p0 - Point::new(0.5, 0.5);
        let (a, b, c) = (d.dot(&d), 2.0 * m.dot(&d), m.dot(&m) - r0() * r0());
        let t = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
        assert!((x - (p0 + t * d)).norm() < 1e-13);
        // generic horizontal edge
        let p0 = Point::new(10.0 * h, 6.0 * h);
        let p1 = Point::new(11.0 * h, 6.0 * h);
        let x = edge_intersection(&ls, p0, p1, 1e-14).unwrap();
        let dy = 6.0 * h - 0.5;
        let expected = 0.5 + (r0() * r0() - dy * dy).sqrt();
        assert!((x.x - expected).abs() < 1e-13);
    }

    #[test]
    fn cut_pieces_partition_the_element() {
        let mesh = build_uniform_mesh(Rectangle::unit_square(), 8).unwrap();
        for b0 in [0.2031, 0.3, 0.41, 0.5 + 1e-7] {
            let ls = LevelSet::horizontal_line(b0, Subdomain::One);
            let topo = classify_elements(&mesh, &ls, DEFAULT_SNAP_TOL).unwrap();
            assert!(topo.num_cut() > 0);
            for cut in topo.cut_elements() {
                let a1 = polygon_area(&cut.polygon(Subdomain::One));
                let a2 = polygon_area(&cut.polygon(Subdomain::Two));
                let a = mesh.area(cut.element);
                assert!(((a1 + a2) - a).abs() < 1e-12 * a);
                // Omega1 = {y > b0} lies to the left of the oriented path
                let d = cut.end() - cut.start();
                assert!(d.x > 0.0);
            }
        }
    }

    #[test]
    fn polygon_corners_sit_on_mesh_lines() {
        let a0 = 3f64.sqrt() / 4.0;
        let mesh = build_uniform_mesh(Rectangle::square(2.0).unwrap(), 8).unwrap();
        let ls = LevelSet::polygon_product(a0, Subdomain::Two);
        let topo = classify_elements(&mesh, &ls, DEFAULT_SNAP_TOL).unwrap();
        assert!(topo.num_cut() > 0);
        for cut in topo.cut_elements() {
            assert_eq!(cut.path.len(), 2, "no corner strictly inside an element");
            for p in &cut.path {
                assert!(ls.value(*p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn double_crossing_is_rejected() {
        let mesh = build_uniform_mesh(Rectangle::unit_square(), 2).unwrap();
        // small circle that slips through an edge between two vertices
        let ls = LevelSet::circle(Point::new(0.25, 0.02), 0.1, Subdomain::Two);
        let err = classify_elements(&mesh, &ls, DEFAULT_SNAP_TOL).unwrap_err();
        assert_eq!(err.class(), "AssumptionViolation");
    }
}
