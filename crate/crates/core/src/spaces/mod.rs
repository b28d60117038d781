//! Polynomial bases, projections and the layout of unknowns.

mod basis;
mod dofmap;

pub use basis::{
    dim_p, jump_lift, l2_project_cell, l2_project_edge, FaceBasis, InterfaceTraceBasis, PieceBasis,
    SegmentBasis, TRACE_DROP_TOL,
};
pub use dofmap::{build_dofmap, Cell, CellFace, DofMap, Face, FaceKind, Scheme};
