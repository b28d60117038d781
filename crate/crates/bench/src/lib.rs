//! Shared setup for the benchmarks.

use xhdg::cases::ProblemCase;
use xhdg::geometry::{
    build_uniform_mesh, classify_elements, CutTopology, StructuredMesh, DEFAULT_SNAP_TOL,
};
use xhdg::quadrature::DEFAULT_GEO_TOL;
use xhdg::spaces::{build_dofmap, DofMap, Scheme};
use xhdg::Result;

/// Mesh, cut topology and dof map ready for assembly.
pub struct Prepared {
    pub mesh: StructuredMesh,
    pub topology: CutTopology,
    pub dofmap: DofMap,
}

pub fn prepare(case: &ProblemCase, n: usize, k: usize, scheme: Scheme) -> Result<Prepared> {
    let mesh = build_uniform_mesh(case.domain, n)?;
    let topology = classify_elements(&mesh, &case.levelset, DEFAULT_SNAP_TOL)?;
    let dofmap = build_dofmap(&mesh, &topology, &case.levelset, k, scheme, DEFAULT_GEO_TOL)?;
    Ok(Prepared {
        mesh,
        topology,
        dofmap,
    })
}
