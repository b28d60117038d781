use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::{Point, Vector};

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    min: Point,
    max: Point,
}

impl Rectangle {
    pub fn new(min: Point, max: Point) -> Result<Self> {
        if !(max.x > min.x && max.y > min.y) || !min.iter().chain(max.iter()).all(|v| v.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "rectangle needs positive side lengths, got [{}, {}] x [{}, {}]",
                min.x, max.x, min.y, max.y
            )));
        }
        Ok(Self { min, max })
    }

    pub fn unit_square() -> Self {
        Self {
            min: Point::new(0.0, 0.0),
            max: Point::new(1.0, 1.0),
        }
    }

    /// `[0, side]²`.
    pub fn square(side: f64) -> Result<Self> {
        Self::new(Point::new(0.0, 0.0), Point::new(side, side))
    }

    pub fn min(&self) -> Point {
        self.min
    }

    pub fn max(&self) -> Point {
        self.max
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        p.x >= self.min.x - tol
            && p.x <= self.max.x + tol
            && p.y >= self.min.y - tol
            && p.y <= self.max.y + tol
    }
}

/// A mesh edge with its adjacent triangles.
///
/// `left` is the first triangle that referenced the edge during construction,
/// `right` the second one (absent on the domain boundary).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }

    /// The other triangle sharing this edge, if any.
    pub fn neighbor_of(&self, triangle: usize) -> Option<usize> {
        if self.left == triangle {
            self.right
        } else if self.right == Some(triangle) {
            Some(self.left)
        } else {
            None
        }
    }
}

/// Uniform `n × n` triangulation of a rectangle.
///
/// Every square cell is split along its lower-left to upper-right diagonal.
/// Triangles are stored counter-clockwise; local edge `j` of a triangle joins
/// its local vertices `j` and `(j + 1) % 3`.
#[derive(Debug, Clone)]
pub struct StructuredMesh {
    domain: Rectangle,
    n: usize,
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    triangle_edges: Vec<[usize; 3]>,
    diameters: Vec<f64>,
    areas: Vec<f64>,
}

/// Builds the uniform `n × n` triangulation of `domain`.
pub fn build_uniform_mesh(domain: Rectangle, n: usize) -> Result<StructuredMesh> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "mesh needs at least one subdivision per side".into(),
        ));
    }
    let hx = domain.width() / n as f64;
    let hy = domain.height() / n as f64;
    let stride = n + 1;

    let mut vertices = Vec::with_capacity(stride * stride);
    for j in 0..=n {
        for i in 0..=n {
            // Pin the last row/column to the exact rectangle bounds.
            let x = if i == n {
                domain.max.x
            } else {
                domain.min.x + i as f64 * hx
            };
            let y = if j == n {
                domain.max.y
            } else {
                domain.min.y + j as f64 * hy
            };
            vertices.push(Point::new(x, y));
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let a = j * stride + i;
            let b = a + 1;
            let c = a + stride + 1;
            let d = a + stride;
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }

    let mut edges: Vec<Edge> = Vec::with_capacity(3 * n * n + 2 * n);
    let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * n * n + 2 * n);
    let mut triangle_edges = Vec::with_capacity(triangles.len());
    for (t, tri) in triangles.iter().enumerate() {
        let mut local = [0usize; 3];
        for (j, slot) in local.iter_mut().enumerate() {
            let (v0, v1) = (tri[j], tri[(j + 1) % 3]);
            let key = (v0.min(v1), v0.max(v1));
            *slot = match lookup.get(&key) {
                Some(&e) => {
                    edges[e].right = Some(t);
                    e
                }
                None => {
                    let e = edges.len();
                    edges.push(Edge {
                        vertices: [v0, v1],
                        left: t,
                        right: None,
                    });
                    lookup.insert(key, e);
                    e
                }
            };
        }
        triangle_edges.push(local);
    }

    let mut diameters = Vec::with_capacity(triangles.len());
    let mut areas = Vec::with_capacity(triangles.len());
    for tri in &triangles {
        let [p0, p1, p2] = tri.map(|v| vertices[v]);
        let diam = (p1 - p0).norm().max((p2 - p1).norm()).max((p0 - p2).norm());
        diameters.push(diam);
        areas.push(0.5 * cross(p1 - p0, p2 - p0));
    }

    Ok(StructuredMesh {
        domain,
        n,
        vertices,
        triangles,
        edges,
        triangle_edges,
        diameters,
        areas,
    })
}

impl StructuredMesh {
    pub fn domain(&self) -> &Rectangle {
        &self.domain
    }

    pub fn subdivisions(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Global edge ids of the three local edges of triangle `t`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        self.edges[e].vertices.map(|v| self.vertices[v])
    }

    pub fn diameter(&self, t: usize) -> f64 {
        self.diameters[t]
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    /// Largest element diameter.
    pub fn h(&self) -> f64 {
        self.diameters.iter().copied().fold(0.0, f64::max)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(t);
        (a + b + c) / 3.0
    }

    /// Unit normal of local edge `j` of triangle `t`, pointing out of `t`.
    pub fn outward_normal(&self, t: usize, j: usize) -> Vector {
        let tri = self.triangles[t];
        let p0 = self.vertices[tri[j]];
        let p1 = self.vertices[tri[(j + 1) % 3]];
        let d = (p1 - p0).normalize();
        // counter-clockwise storage: the interior lies to the left of p0 -> p1
        Vector::new(d.y, -d.x)
    }

    /// Index of the triangle containing `p` (closed triangles; ties resolved
    /// towards the lower index), or `None` outside the domain.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let tol = 1e-12 * self.domain.width().max(self.domain.height());
        if !self.domain.contains(p, tol) {
            return None;
        }
        let hx = self.domain.width() / self.n as f64;
        let hy = self.domain.height() / self.n as f64;
        let i = (((p.x - self.domain.min.x) / hx).floor() as isize).clamp(0, self.n as isize - 1)
            as usize;
        let j = (((p.y - self.domain.min.y) / hy).floor() as isize).clamp(0, self.n as isize - 1)
            as usize;
        let lx = (p.x - self.domain.min.x) / hx - i as f64;
        let ly = (p.y - self.domain.min.y) / hy - j as f64;
        let cell = j * self.n + i;
        Some(if ly <= lx { 2 * cell } else { 2 * cell + 1 })
    }
}

/// z-component of the 2D cross product.
pub fn cross(a: Vector, b: Vector) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Signed area of a closed polygon (positive for counter-clockwise loops).
pub fn polygon_area(points: &[Point]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| cross(points[i], points[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_mesh_counts() {
        let mesh = build_uniform_mesh(Rectangle::unit_square(), 1).unwrap();
        assert_eq!(mesh.num_triangles(), 2);
        assert_eq!(mesh.vertices().len(), 4);
        assert_eq!(mesh.num_edges(), 5);
    }

    #[test]
    fn counting_formula() {
        let mesh = build_uniform_mesh(Rectangle::unit_square(), 8).unwrap();
        assert_eq!(mesh.num_triangles(), 128);
        assert_eq!(mesh.vertices().len(), 81);
        // Euler: E = V + F - 1 for a triangulated disk
        assert_eq!(mesh.num_edges(), 81 + 128 - 1);
    }

    #[test]
    fn diameters_on_scaled_square() {
        let mesh = build_uniform_mesh(Rectangle::square(2.0).unwrap(), 16).unwrap();
        let expected = 2f64.sqrt() * (2.0 / 16.0);
        for t in 0..mesh.num_triangles() {
            let [a, b, c] = mesh.triangle_points(t);
            let diag = (a - b).norm().max((b - c).norm()).max((c - a).norm());
            assert!((mesh.diameter(t) - expected).abs() < 1e-14);
            assert!((diag - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn adjacency_and_orientation() {
        let mesh = build_uniform_mesh(Rectangle::unit_square(), 5).unwrap();
        let area = mesh.area(0);
        for t in 0..mesh.num_triangles() {
            assert!(mesh.area(t) > 0.0);
            assert!((mesh.area(t) - area).abs() < 1e-15);
        }
        let mut boundary = 0;
        for (e, edge) in mesh.edges().iter().enumerate() {
            let [p0, p1] = mesh.edge_points(e);
            let mid = 0.5 * (p0 + p1);
            let on_boundary = mid.x.abs() < 1e-14
                || (mid.x - 1.0).abs() < 1e-14
                || mid.y.abs() < 1e-14
                || (mid.y - 1.0).abs() < 1e-14;
            assert_eq!(edge.is_boundary(), on_boundary);
            if on_boundary {
                boundary += 1;
            }
        }
        assert_eq!(boundary, 4 * 5);
    }

    #[test]
    fn outward_normals_leave_the_triangle() {
        let mesh = build_uniform_mesh(Rectangle::unit_square(), 3).unwrap();
        for t in 0..mesh.num_triangles() {
            let c = mesh.centroid(t);
            for j in 0..3 {
                let e = mesh.triangle_edges(t)[j];
                let [p0, p1] = mesh.edge_points(e);
                let mid = 0.5 * (p0 + p1);
                assert!(mesh.outward_normal(t, j).dot(&(mid - c)) > 0.0);
            }
        }
    }

    #[test]
    fn locate_finds_containing_triangle() {
        let mesh = build_uniform_mesh(Rectangle::unit_square(), 4).unwrap();
        for t in 0..mesh.num_triangles() {
            assert_eq!(mesh.locate(mesh.centroid(t)), Some(t));
        }
        assert_eq!(mesh.locate(Point::new(1.5, 0.5)), None);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Rectangle::new(Point::new(0.0, 0.0), Point::new(0.0, 1.0)).is_err());
        assert!(build_uniform_mesh(Rectangle::unit_square(), 0).is_err());
    }
}
