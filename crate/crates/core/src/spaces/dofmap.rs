use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{CutTopology, EdgeClass, ElementClass, LevelSet, StructuredMesh, Subdomain};
use crate::quadrature::{edge_side_rule, interface_edge_rule, interface_rule, QuadRule};
use crate::{Point, Vector};

use super::basis::{dim_p, FaceBasis, InterfaceTraceBasis, SegmentBasis, TRACE_DROP_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Traces of degree `k` everywhere.
    Standard,
    /// Traces of degree `k - 1`, with the projected stabilization.
    Modified,
}

impl Scheme {
    pub fn trace_degree(self, k: usize) -> usize {
        match self {
            Scheme::Standard => k,
            Scheme::Modified => k - 1,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Standard => "standard",
            Scheme::Modified => "modified",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Scheme::Standard),
            "modified" => Ok(Scheme::Modified),
            other => Err(Error::InvalidInput(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    /// Mesh edge, or the part of it in the closure of `side`.
    Edge { edge: usize, side: Subdomain },
    /// Interface segment `Γ_K` of a cut element.
    CutInterface { element: usize },
    /// Mesh edge lying on the interface.
    EdgeInterface { edge: usize },
}

/// A face carrying trace unknowns.
#[derive(Debug, Clone)]
pub struct Face {
    pub kind: FaceKind,
    pub basis: FaceBasis,
    /// Face quadrature; interface faces carry normals pointing into `Ω₂`.
    pub rule: QuadRule,
    pub dirichlet: bool,
    /// First global unknown of the face (none for Dirichlet faces). On
    /// interface faces these are the `Ω₂` traces; the `Ω₁` copy is slaved.
    pub offset: Option<usize>,
}

impl Face {
    pub fn is_interface(&self) -> bool {
        !matches!(self.kind, FaceKind::Edge { .. })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

/// An element piece `K ∩ Ω_i` carrying interior unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub element: usize,
    pub side: Subdomain,
    pub interior_offset: usize,
}

/// A face as seen from one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellFace {
    pub face: usize,
    /// Constant outward normal for edge faces; for interface faces the
    /// outward normal is `sign` times the face-rule normal.
    pub normal: Option<Vector>,
    pub sign: f64,
}

/// Layout of interior and trace unknowns.
#[derive(Debug, Clone)]
pub struct DofMap {
    scheme: Scheme,
    k: usize,
    faces: Vec<Face>,
    cells: Vec<Cell>,
    edge_faces: Vec<[Option<usize>; 2]>,
    cut_interface_face: Vec<Option<usize>>,
    edge_interface_face: Vec<Option<usize>>,
    element_cells: Vec<[Option<usize>; 2]>,
    num_free: usize,
    num_interior: usize,
}

impl DofMap {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn trace_degree(&self) -> usize {
        self.scheme.trace_degree(self.k)
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Global trace unknowns after Dirichlet and jump elimination.
    pub fn num_free(&self) -> usize {
        self.num_free
    }

    pub fn num_interior(&self) -> usize {
        self.num_interior
    }

    /// Flux unknowns per cell: `2 · dim P_{k-1}`.
    pub fn flux_dim(&self) -> usize {
        2 * dim_p(self.k - 1)
    }

    /// Potential unknowns per cell: `dim P_k`.
    pub fn potential_dim(&self) -> usize {
        dim_p(self.k)
    }

    pub fn edge_face(&self, edge: usize, side: Subdomain) -> Option<usize> {
        self.edge_faces[edge][side.index()]
    }

    pub fn cut_interface_face(&self, element: usize) -> Option<usize> {
        self.cut_interface_face[element]
    }

    pub fn edge_interface_face(&self, edge: usize) -> Option<usize> {
        self.edge_interface_face[edge]
    }

    pub fn cell_of(&self, element: usize, side: Subdomain) -> Option<usize> {
        self.element_cells[element][side.index()]
    }

    /// Number of cells (pieces) of `element`.
    pub fn cells_of(&self, element: usize) -> usize {
        self.element_cells[element]
            .iter()
            .filter(|c| c.is_some())
            .count()
    }

    /// Indices of interface faces.
    pub fn interface_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&f| self.faces[f].is_interface())
    }

    /// Faces of `cell` in local order.
    pub fn cell_faces(&self, mesh: &StructuredMesh, cell: usize) -> Vec<CellFace> {
        let Cell { element, side, .. } = self.cells[cell];
        let mut out = Vec::with_capacity(4);
        for (j, &e) in mesh.triangle_edges(element).iter().enumerate() {
            if let Some(f) = self.edge_interface_face[e] {
                out.push(CellFace {
                    face: f,
                    normal: None,
                    sign: interface_sign(side),
                });
            } else if let Some(f) = self.edge_faces[e][side.index()] {
                out.push(CellFace {
                    face: f,
                    normal: Some(mesh.outward_normal(element, j)),
                    sign: 1.0,
                });
            }
        }
        if let Some(f) = self.cut_interface_face[element] {
            out.push(CellFace {
                face: f,
                normal: None,
                sign: interface_sign(side),
            });
        }
        out
    }
}

/// Outward normal of the `side` piece relative to the `Ω₁ → Ω₂` normal.
fn interface_sign(side: Subdomain) -> f64 {
    match side {
        Subdomain::One => 1.0,
        Subdomain::Two => -1.0,
    }
}

/// Lays out the unknowns of either scheme on a classified mesh.
///
/// Face quadrature is of degree `2k + 2`; boundary faces are Dirichlet.
pub fn build_dofmap(
    mesh: &StructuredMesh,
    topology: &CutTopology,
    levelset: &LevelSet,
    k: usize,
    scheme: Scheme,
    geo_tol: f64,
) -> Result<DofMap> {
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidInput(format!(
            "polynomial degree k = {k} outside 1..=4"
        )));
    }
    if scheme == Scheme::Modified && !levelset.is_piecewise_linear() {
        return Err(Error::InvalidInput(
            "the modified scheme requires a piecewise straight interface".into(),
        ));
    }
    let kt = scheme.trace_degree(k);
    let degree = 2 * k + 2;

    // edge faces, one per (edge, side) present
    let edge_faces: Vec<Vec<Face>> = (0..mesh.num_edges())
        .into_par_iter()
        .map(|e| -> Result<Vec<Face>> {
            let edge = mesh.edges()[e];
            let mut out = Vec::new();
            if topology.edge_class(e) == EdgeClass::OnInterface {
                let [p0, p1] = mesh.edge_points(e);
                out.push(Face {
                    kind: FaceKind::EdgeInterface { edge: e },
                    basis: FaceBasis::Segment(SegmentBasis::new(p0, p1, kt)),
                    rule: interface_edge_rule(mesh, topology, e, degree)?,
                    dirichlet: false,
                    offset: None,
                });
                return Ok(out);
            }
            for side in Subdomain::BOTH {
                if let Some(rule) = edge_side_rule(mesh, topology, e, side, degree)? {
                    let (a, b) = segment_ends(&rule, mesh.edge_points(e));
                    out.push(Face {
                        kind: FaceKind::Edge { edge: e, side },
                        basis: FaceBasis::Segment(SegmentBasis::new(a, b, kt)),
                        rule,
                        dirichlet: edge.is_boundary(),
                        offset: None,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let cut_faces: Vec<Face> = topology
        .cut_elements()
        .par_iter()
        .map(|cut| -> Result<Face> {
            let rule = interface_rule(mesh, cut, levelset, degree, geo_tol)?;
            let basis =
                InterfaceTraceBasis::new(cut.start(), cut.end(), &rule, kt, TRACE_DROP_TOL)?;
            Ok(Face {
                kind: FaceKind::CutInterface {
                    element: cut.element,
                },
                basis: FaceBasis::Interface(basis),
                rule,
                dirichlet: false,
                offset: None,
            })
        })
        .collect::<Result<_>>()?;

    let mut faces = Vec::new();
    let mut edge_face_index = vec![[None; 2]; mesh.num_edges()];
    let mut edge_interface_face = vec![None; mesh.num_edges()];
    let mut cut_interface_face = vec![None; mesh.num_triangles()];
    for list in edge_faces {
        for face in list {
            let idx = faces.len();
            match face.kind {
                FaceKind::Edge { edge, side } => edge_face_index[edge][side.index()] = Some(idx),
                FaceKind::EdgeInterface { edge } => edge_interface_face[edge] = Some(idx),
                FaceKind::CutInterface { .. } => unreachable!(),
            }
            faces.push(face);
        }
    }
    for face in cut_faces {
        if let FaceKind::CutInterface { element } = face.kind {
            cut_interface_face[element] = Some(faces.len());
        }
        faces.push(face);
    }
    let mut num_free = 0;
    for face in &mut faces {
        if !face.dirichlet {
            face.offset = Some(num_free);
            num_free += face.dim();
        }
    }

    let per_cell = 2 * dim_p(k - 1) + dim_p(k);
    let mut cells = Vec::new();
    let mut element_cells = vec![[None; 2]; mesh.num_triangles()];
    for t in 0..mesh.num_triangles() {
        let sides: &[Subdomain] = match topology.element_class(t) {
            ElementClass::Pure(Subdomain::One) => &[Subdomain::One],
            ElementClass::Pure(Subdomain::Two) => &[Subdomain::Two],
            ElementClass::Cut => &Subdomain::BOTH,
        };
        for &side in sides {
            element_cells[t][side.index()] = Some(cells.len());
            cells.push(Cell {
                element: t,
                side,
                interior_offset: cells.len() * per_cell,
            });
        }
    }
    let num_interior = cells.len() * per_cell;

    Ok(DofMap {
        scheme,
        k,
        faces,
        cells,
        edge_faces: edge_face_index,
        cut_interface_face,
        edge_interface_face,
        element_cells,
        num_free,
        num_interior,
    })
}

/// Endpoints of the sub-segment covered by `rule`, in the edge's own orientation.
fn segment_ends(rule: &QuadRule, [p0, p1]: [Point; 2]) -> (Point, Point) {
    let d = p1 - p0;
    let len2 = d.norm_squared();
    let len = rule.measure();
    // Gauss nodes are symmetric about the midpoint
    let mid = rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(p, w)| *w * p)
        .sum::<Vector>()
        / len;
    let t_mid = (mid - p0).dot(&d) / len2;
    let half = 0.5 * len / len2.sqrt();
    (p0 + (t_mid - half) * d, p0 + (t_mid + half) * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_uniform_mesh, classify_elements, Rectangle, DEFAULT_SNAP_TOL};
    use crate::quadrature::DEFAULT_GEO_TOL;

    fn setup(n: usize, ls: &LevelSet) -> (StructuredMesh, CutTopology) {
        let mesh = build_uniform_mesh(Rectangle::unit_square(), n).unwrap();
        let topo = classify_elements(&mesh, ls, DEFAULT_SNAP_TOL).unwrap();
        (mesh, topo)
    }

    #[test]
    fn two_triangle_uncut_counts() {
        let ls = LevelSet::everywhere(Subdomain::One);
        let (mesh, topo) = setup(1, &ls);
        let std = build_dofmap(&mesh, &topo, &ls, 1, Scheme::Standard, DEFAULT_GEO_TOL).unwrap();
        assert_eq!(std.flux_dim() + std.potential_dim(), 5);
        assert_eq!(std.num_interior(), 10);
        // only the diagonal is interior
        assert_eq!(std.num_free(), 2);
        let modified =
            build_dofmap(&mesh, &topo, &ls, 1, Scheme::Modified, DEFAULT_GEO_TOL).unwrap();
        assert_eq!(modified.num_free(), 1);
        assert!(modified.faces().iter().all(|f| f.dim() == 1));
    }

    #[test]
    fn cut_element_dimension_audit() {
        let ls = LevelSet::circle(Point::new(0.5, 0.5), 3f64.sqrt() / 8.0, Subdomain::One);
        let (mesh, topo) = setup(8, &ls);
        let map = build_dofmap(&mesh, &topo, &ls, 1, Scheme::Standard, DEFAULT_GEO_TOL).unwrap();
        let mut expected_free = 0;
        for face in map.faces() {
            if !face.dirichlet {
                expected_free += face.basis.dim();
            }
            if let FaceKind::CutInterface { element } = face.kind {
                let cut = topo.cut_element(element).unwrap();
                let b =
                    InterfaceTraceBasis::new(cut.start(), cut.end(), &face.rule, 1, TRACE_DROP_TOL)
                        .unwrap();
                assert_eq!(face.dim(), b.rank());
                assert_eq!(map.cells_of(element), 2);
            }
        }
        assert_eq!(map.num_free(), expected_free);
        let interior: usize = (0..mesh.num_triangles()).map(|t| map.cells_of(t) * 5).sum();
        assert_eq!(map.num_interior(), interior);
        for cut in topo.cut_elements() {
            for side in Subdomain::BOTH {
                assert!(map.cell_of(cut.element, side).is_some());
            }
        }
    }

    #[test]
    fn every_free_dof_has_one_owner() {
        let ls = LevelSet::horizontal_line(0.2031, Subdomain::One);
        let (mesh, topo) = setup(8, &ls);
        let map = build_dofmap(&mesh, &topo, &ls, 2, Scheme::Standard, DEFAULT_GEO_TOL).unwrap();
        let mut owner = vec![0usize; map.num_free()];
        for face in map.faces() {
            if let Some(o) = face.offset {
                for i in 0..face.dim() {
                    owner[o + i] += 1;
                }
            }
        }
        assert!(owner.iter().all(|&c| c == 1));
    }

    #[test]
    fn cut_edges_carry_two_trace_copies() {
        let ls = LevelSet::horizontal_line(0.2031, Subdomain::One);
        let (mesh, topo) = setup(8, &ls);
        let map = build_dofmap(&mesh, &topo, &ls, 1, Scheme::Standard, DEFAULT_GEO_TOL).unwrap();
        for e in 0..mesh.num_edges() {
            let both = map.edge_face(e, Subdomain::One).is_some()
                && map.edge_face(e, Subdomain::Two).is_some();
            assert_eq!(both, matches!(topo.edge_class(e), EdgeClass::CutAtPoint(_)));
        }
    }

    #[test]
    fn sub_edge_basis_uses_edge_orientation() {
        let ls = LevelSet::horizontal_line(0.2031, Subdomain::One);
        let (mesh, topo) = setup(8, &ls);
        let map = build_dofmap(&mesh, &topo, &ls, 1, Scheme::Standard, DEFAULT_GEO_TOL).unwrap();
        for face in map.faces() {
            if let (FaceKind::Edge { edge, .. }, FaceBasis::Segment(b)) = (face.kind, &face.basis) {
                let [p0, p1] = mesh.edge_points(edge);
                let [a, c] = b.endpoints();
                assert!((c - a).normalize().dot(&(p1 - p0).normalize()) > 1.0 - 1e-12);
                assert!((c - a).norm() - face.rule.measure() < 1e-14);
            }
        }
    }

    #[test]
    fn on_interface_edges_become_interface_faces() {
        let ls = LevelSet::horizontal_line(0.25, Subdomain::One);
        let (mesh, topo) = setup(8, &ls);
        let map = build_dofmap(&mesh, &topo, &ls, 1, Scheme::Standard, DEFAULT_GEO_TOL).unwrap();
        assert_eq!(map.interface_faces().count(), 8);
        for f in map.interface_faces() {
            let normals = map.faces()[f].rule.normals.as_ref().unwrap();
            assert!(normals
                .iter()
                .all(|n| (n - Vector::new(0.0, -1.0)).norm() < 1e-15));
        }
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("standard".parse::<Scheme>().unwrap(), Scheme::Standard);
        assert_eq!("modified".parse::<Scheme>().unwrap(), Scheme::Modified);
        assert_eq!(
            "other".parse::<Scheme>().unwrap_err().class(),
            "InvalidInput"
        );
        assert_eq!(Scheme::Modified.trace_degree(2), 1);
    }
}
