//! Meshes, level sets and cut-cell classification.

pub mod cut;
pub mod levelset;
pub mod mesh;

pub use cut::{
    classify_elements, edge_intersection, CutElement, CutTopology, EdgeClass, EdgePortion,
    ElementClass, VertexState, DEFAULT_SNAP_TOL,
};
pub use levelset::{interface_normal, AnalyticLevelSet, LevelSet, LevelSetKind, Subdomain};
pub use mesh::{build_uniform_mesh, polygon_area, Edge, Rectangle, StructuredMesh};
