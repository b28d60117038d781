//! Local X-HDG systems, static condensation and the global trace system.
//!
//! Per cell (an element piece `K ∩ Ω_i`) the unknowns are the flux `q ∈
//! P_{k-1}²`, the potential `u ∈ P_k` and the traces `λ` on the faces of the
//! piece. With `φ` the piece basis and `ψ` the face bases,
//!
//! ```text
//! A q + D u - C λ = 0          A = (α⁻¹ φ_a, φ_b),   D = (φ_j, ∂_d φ_a)
//! -Dᵀq + S u - E λ = F         C = ⟨ψ_m, φ_a n_d⟩,   E = τ⟨ψ_m, φ_j⟩
//! Cᵀq - Eᵀu + G λ = ⟨g_N, μ⟩   G = τ⟨ψ_m, ψ_l⟩,     F = (f, φ_j)
//! ```
//!
//! where `S = τ⟨φ, φ⟩` for the standard scheme and `S = E G⁻¹ Eᵀ` (the
//! projected stabilization) for the modified one. Eliminating `q` and `u`
//! leaves the symmetric positive definite trace operator
//! `CᵀA⁻¹C + G - Wᵀ H⁻¹ W` with `H = DᵀA⁻¹D + S` and `W = E + DᵀA⁻¹C`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::cases::ProblemCase;
use crate::error::{Error, Result};
use crate::geometry::{CutTopology, StructuredMesh, Subdomain};
use crate::quadrature::{element_rule, QuadRule};
use crate::solver::SparseSymmetric;
use crate::spaces::{dim_p, jump_lift, DofMap, FaceBasis, FaceKind, PieceBasis, Scheme};
use crate::Vector;

/// `τ = η = α_i / h_K`.
pub fn stabilization_value(h_k: f64, alpha: f64) -> f64 {
    alpha / h_k
}

/// Couplings of one cell with one of its faces.
#[derive(Debug, Clone)]
pub struct FaceCoupling {
    pub face: usize,
    /// `⟨ψ_m, φ_a n_d⟩`, flux rows by trace columns.
    pub c: DMatrix<f64>,
    /// `τ⟨ψ_m, φ_j⟩`, potential rows by trace columns.
    pub e: DMatrix<f64>,
    /// `τ⟨ψ_m, ψ_l⟩`.
    pub g: DMatrix<f64>,
}

/// Blocks of the local problem on one cell.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub cell: usize,
    pub element: usize,
    pub side: Subdomain,
    pub alpha: f64,
    pub tau: f64,
    pub basis: PieceBasis,
    /// Flux mass weighted by `α⁻¹`.
    pub a: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub faces: Vec<FaceCoupling>,
    pub load: DVector<f64>,
}

impl LocalSystem {
    /// Local trace unknowns, faces concatenated in order.
    pub fn trace_dim(&self) -> usize {
        self.faces.iter().map(|f| f.g.nrows()).sum()
    }

    fn stacked(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let n = self.trace_dim();
        let mut c = DMatrix::zeros(self.a.nrows(), n);
        let mut e = DMatrix::zeros(self.d.ncols(), n);
        let mut g = DMatrix::zeros(n, n);
        let mut off = 0;
        for f in &self.faces {
            let m = f.g.nrows();
            c.columns_mut(off, m).copy_from(&f.c);
            e.columns_mut(off, m).copy_from(&f.e);
            g.view_mut((off, off), (m, m)).copy_from(&f.g);
            off += m;
        }
        (c, e, g)
    }
}

/// Builds the local blocks of `cell`.
pub fn local_system(
    mesh: &StructuredMesh,
    topology: &CutTopology,
    dofmap: &DofMap,
    case: &ProblemCase,
    cell: usize,
    geo_tol: f64,
) -> Result<LocalSystem> {
    let info = dofmap.cells()[cell];
    let (element, side) = (info.element, info.side);
    let k = dofmap.k();
    let degree = 2 * k + 2;
    let rule = element_rule(
        mesh,
        topology,
        &case.levelset,
        element,
        side,
        degree,
        geo_tol,
    )?;
    let basis = PieceBasis::new(&rule, k)
        .map_err(|e| e.context(format!("element {element}, side {side}")))?;
    let alpha = case.alpha(side);
    let tau = stabilization_value(mesh.diameter(element), alpha);

    let np = basis.dim();
    let n1 = dim_p(k - 1);
    let nf = 2 * n1;
    let mut vals = vec![0.0; np];
    let mut grads = vec![Vector::zeros(); np];

    let mut a = DMatrix::zeros(nf, nf);
    let mut d = DMatrix::zeros(nf, np);
    let mut load = DVector::zeros(np);
    for (p, &w) in rule.points.iter().zip(&rule.weights) {
        basis.eval_with_grad(*p, &mut vals, &mut grads);
        let fw = w * case.f(side, *p);
        for j in 0..np {
            load[j] += fw * vals[j];
        }
        for dir in 0..2 {
            for i in 0..n1 {
                let row = dir * n1 + i;
                for j in 0..n1 {
                    a[(row, dir * n1 + j)] += w * vals[i] * vals[j] / alpha;
                }
                for j in 0..np {
                    d[(row, j)] += w * vals[j] * grads[i][dir];
                }
            }
        }
    }

    let mut s = DMatrix::zeros(np, np);
    let mut faces = Vec::new();
    for cf in dofmap.cell_faces(mesh, cell) {
        let face = &dofmap.faces()[cf.face];
        let m = face.dim();
        let mut c = DMatrix::zeros(nf, m);
        let mut e = DMatrix::zeros(np, m);
        let mut g = DMatrix::zeros(m, m);
        let mut psi = vec![0.0; m];
        for (q, (p, &w)) in face.rule.points.iter().zip(&face.rule.weights).enumerate() {
            let n = match cf.normal {
                Some(n) => n,
                None => cf.sign * face.rule.normals.as_ref().expect("interface normals")[q],
            };
            basis.eval(*p, &mut vals);
            face.basis.eval(*p, &mut psi);
            for mi in 0..m {
                let wp = w * psi[mi];
                for i in 0..n1 {
                    c[(i, mi)] += wp * vals[i] * n.x;
                    c[(n1 + i, mi)] += wp * vals[i] * n.y;
                }
                for j in 0..np {
                    e[(j, mi)] += tau * wp * vals[j];
                }
                for l in 0..m {
                    g[(mi, l)] += tau * wp * psi[l];
                }
            }
            if dofmap.scheme() == Scheme::Standard {
                for i in 0..np {
                    for j in 0..np {
                        s[(i, j)] += tau * w * vals[i] * vals[j];
                    }
                }
            }
        }
        if dofmap.scheme() == Scheme::Modified && m > 0 {
            let chol = Cholesky::new(g.clone()).ok_or_else(|| {
                Error::SingularMass(format!("trace Gram matrix of face {}", cf.face))
            })?;
            s += &e * chol.solve(&e.transpose());
        }
        faces.push(FaceCoupling {
            face: cf.face,
            c,
            e,
            g,
        });
    }

    Ok(LocalSystem {
        cell,
        element,
        side,
        alpha,
        tau,
        basis,
        a,
        d,
        s,
        faces,
        load,
    })
}

/// Trace-space Schur complement of a cell together with the factors needed to
/// recover its interior unknowns.
#[derive(Debug, Clone)]
pub struct CondensedBlock {
    pub local: LocalSystem,
    /// `CᵀA⁻¹C + G - WᵀH⁻¹W`.
    pub stiffness: DMatrix<f64>,
    /// `WᵀH⁻¹F`.
    pub load: DVector<f64>,
    a_chol: Cholesky<f64, Dyn>,
    h_chol: Cholesky<f64, Dyn>,
    c: DMatrix<f64>,
    e: DMatrix<f64>,
    w: DMatrix<f64>,
}

fn smallest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

/// Eliminates the interior unknowns of a local system.
pub fn condense(local: LocalSystem) -> Result<CondensedBlock> {
    let singular = |m: &DMatrix<f64>| Error::SingularInterior {
        element: local.element,
        pivot: smallest_eigenvalue(m),
    };
    let a_chol = Cholesky::new(local.a.clone()).ok_or_else(|| singular(&local.a))?;
    let (c, e, g) = local.stacked();
    let ainv_d = a_chol.solve(&local.d);
    let ainv_c = a_chol.solve(&c);
    let h = local.d.transpose() * &ainv_d + &local.s;
    let h = 0.5 * (&h + h.transpose());
    let h_chol = Cholesky::new(h.clone()).ok_or_else(|| singular(&h))?;
    let w = &e + local.d.transpose() * &ainv_c;
    let hinv_w = h_chol.solve(&w);
    let stiffness = c.transpose() * &ainv_c + &g - w.transpose() * &hinv_w;
    let stiffness = 0.5 * (&stiffness + stiffness.transpose());
    let load = hinv_w.transpose() * &local.load;
    Ok(CondensedBlock {
        local,
        stiffness,
        load,
        a_chol,
        h_chol,
        c,
        e,
        w,
    })
}

impl CondensedBlock {
    pub fn trace_dim(&self) -> usize {
        self.stiffness.nrows()
    }

    /// Interior unknowns `(q, u)` from the local traces.
    pub fn recover(&self, traces: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let u = self.h_chol.solve(&(&self.local.load + &self.w * traces));
        let q = self.a_chol.solve(&(&self.c * traces - &self.local.d * &u));
        (q, u)
    }

    /// Largest relative residual of the two interior equations.
    pub fn interior_residual(
        &self,
        q: &DVector<f64>,
        u: &DVector<f64>,
        traces: &DVector<f64>,
    ) -> f64 {
        let l = &self.local;
        let (aq, du, cl) = (&l.a * q, &l.d * u, &self.c * traces);
        let r1 =
            (&aq + &du - &cl).norm() / (aq.norm() + du.norm() + cl.norm()).max(f64::MIN_POSITIVE);
        let (dq, su, el) = (l.d.transpose() * q, &l.s * u, &self.e * traces);
        let r2 = (-&dq + &su - &el - &l.load).norm()
            / (dq.norm() + su.norm() + el.norm() + l.load.norm()).max(f64::MIN_POSITIVE);
        r1.max(r2)
    }

    /// Trace-equation contribution `Cᵀq - Eᵀu + Gλ` of this cell.
    pub fn trace_residual(
        &self,
        q: &DVector<f64>,
        u: &DVector<f64>,
        traces: &DVector<f64>,
    ) -> DVector<f64> {
        let (_, _, g) = self.local.stacked();
        self.c.transpose() * q - self.e.transpose() * u + g * traces
    }
}

/// Where each local trace unknown of a cell lives globally.
///
/// The local value is `x[global] + shift` for free unknowns and `shift` for
/// Dirichlet ones.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMap {
    pub global: Vec<Option<usize>>,
    pub shift: DVector<f64>,
}

impl LocalMap {
    pub fn local_traces(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.global.len(), |i, _| {
            self.shift[i] + self.global[i].map_or(0.0, |g| x[g])
        })
    }
}

/// The condensed global trace system and the data needed to go back.
#[derive(Debug, Clone)]
pub struct CondensedSystem {
    pub matrix: SparseSymmetric,
    pub blocks: Vec<CondensedBlock>,
    pub maps: Vec<LocalMap>,
    /// Fixed coefficients of Dirichlet faces.
    pub dirichlet: Vec<Option<DVector<f64>>>,
    /// Jump lifts of interface faces (`ũ₁ = ũ₂ + ℓ`).
    pub lifts: Vec<Option<DVector<f64>>>,
}

/// Builds and condenses every local system (element-parallel).
pub fn condense_all(
    mesh: &StructuredMesh,
    topology: &CutTopology,
    dofmap: &DofMap,
    case: &ProblemCase,
    geo_tol: f64,
) -> Result<Vec<CondensedBlock>> {
    (0..dofmap.cells().len())
        .into_par_iter()
        .map(|c| condense(local_system(mesh, topology, dofmap, case, c, geo_tol)?))
        .collect()
}

/// Full pipeline from a layout to the condensed system.
pub fn assemble(
    mesh: &StructuredMesh,
    topology: &CutTopology,
    dofmap: &DofMap,
    case: &ProblemCase,
    geo_tol: f64,
) -> Result<CondensedSystem> {
    let blocks = condense_all(mesh, topology, dofmap, case, geo_tol)?;
    assemble_global(blocks, dofmap, case)
}

/// Assembles the trace system with Dirichlet and jump constraints eliminated.
///
/// Accumulation runs serially in cell order, so the result is reproducible.
pub fn assemble_global(
    blocks: Vec<CondensedBlock>,
    dofmap: &DofMap,
    case: &ProblemCase,
) -> Result<CondensedSystem> {
    let faces = dofmap.faces();
    let (dirichlet, lifts): (Vec<_>, Vec<_>) = faces
        .par_iter()
        .map(|face| {
            let fixed = face.dirichlet.then(|| match face.kind {
                FaceKind::Edge { side, .. } => {
                    dirichlet_values(&face.basis, &face.rule, |p| case.u(side, p))
                }
                _ => dirichlet_values(&face.basis, &face.rule, |p| case.g(p)),
            });
            let lift = face
                .is_interface()
                .then(|| jump_lift(|p| case.g_d(p), &face.basis, &face.rule));
            (fixed, lift)
        })
        .unzip();

    let n = dofmap.num_free();
    let mut rhs = DVector::zeros(n);
    let mut triplets = Vec::new();
    let mut maps = Vec::with_capacity(blocks.len());
    for block in &blocks {
        let mut global = Vec::with_capacity(block.trace_dim());
        let mut shift = Vec::with_capacity(block.trace_dim());
        for fc in &block.local.faces {
            let face = &faces[fc.face];
            for m in 0..face.dim() {
                match (&dirichlet[fc.face], face.offset) {
                    (Some(z), _) => {
                        global.push(None);
                        shift.push(z[m]);
                    }
                    (None, Some(off)) => {
                        global.push(Some(off + m));
                        let l = match (&lifts[fc.face], block.local.side) {
                            (Some(l), Subdomain::One) => l[m],
                            _ => 0.0,
                        };
                        shift.push(l);
                    }
                    (None, None) => unreachable!("free face without offset"),
                }
            }
        }
        let shift = DVector::from_vec(shift);
        let r = &block.load - &block.stiffness * &shift;
        for (i, gi) in global.iter().enumerate() {
            let Some(gi) = *gi else { continue };
            rhs[gi] += r[i];
            for (j, gj) in global.iter().enumerate() {
                if let Some(gj) = *gj {
                    if gi >= gj {
                        triplets.push((gi, gj, block.stiffness[(i, j)]));
                    }
                }
            }
        }
        maps.push(LocalMap { global, shift });
    }

    // flux-jump load, once per interface face on the free copy
    for (f, face) in faces.iter().enumerate() {
        if !face.is_interface() {
            continue;
        }
        let off = face.offset.expect("interface faces are free");
        let normals = face.rule.normals.as_ref().expect("interface normals");
        let mut psi = vec![0.0; face.dim()];
        for (q, (p, &w)) in face.rule.points.iter().zip(&face.rule.weights).enumerate() {
            face.basis.eval(*p, &mut psi);
            let gn = w * case.g_n(*p, normals[q]);
            for (m, v) in psi.iter().enumerate() {
                rhs[off + m] += gn * v;
            }
        }
        debug_assert!(lifts[f].is_some());
    }

    let matrix = SparseSymmetric::from_triplets(n, triplets, rhs)?;
    Ok(CondensedSystem {
        matrix,
        blocks,
        maps,
        dirichlet,
        lifts,
    })
}

/// `Q^b g` in a face basis, solved with the computed Gram matrix.
fn dirichlet_values(
    basis: &FaceBasis,
    rule: &QuadRule,
    g: impl Fn(crate::Point) -> f64,
) -> DVector<f64> {
    jump_lift(g, basis, rule)
}

/// Interior fields and local traces of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSolution {
    pub q: DVector<f64>,
    pub u: DVector<f64>,
    pub traces: DVector<f64>,
}

/// Back-substitutes the local eliminations for all cells.
pub fn recover_interior(system: &CondensedSystem, x: &DVector<f64>) -> Vec<CellSolution> {
    system
        .blocks
        .par_iter()
        .zip(&system.maps)
        .map(|(block, map)| {
            let traces = map.local_traces(x);
            let (q, u) = block.recover(&traces);
            CellSolution { q, u, traces }
        })
        .collect()
}

/// Largest relative residual of the interior equations over all cells.
pub fn max_interior_residual(system: &CondensedSystem, cells: &[CellSolution]) -> f64 {
    system
        .blocks
        .iter()
        .zip(cells)
        .map(|(b, c)| b.interior_residual(&c.q, &c.u, &c.traces))
        .fold(0.0, f64::max)
}

/// Global trace equations `Σ (Cᵀq - Eᵀu + Gλ) - ⟨g_N, μ⟩` tested with every
/// free trace function, evaluated from the recovered fields.
pub fn trace_equation_residual(
    system: &CondensedSystem,
    dofmap: &DofMap,
    case: &ProblemCase,
    cells: &[CellSolution],
) -> DVector<f64> {
    let mut r = DVector::zeros(dofmap.num_free());
    for ((block, map), cell) in system.blocks.iter().zip(&system.maps).zip(cells) {
        let local = block.trace_residual(&cell.q, &cell.u, &cell.traces);
        for (i, g) in map.global.iter().enumerate() {
            if let Some(g) = *g {
                r[g] += local[i];
            }
        }
    }
    for face in dofmap.faces().iter().filter(|f| f.is_interface()) {
        let off = face.offset.expect("interface faces are free");
        let normals = face.rule.normals.as_ref().expect("interface normals");
        for (q, (p, &w)) in face.rule.points.iter().zip(&face.rule.weights).enumerate() {
            let psi = face.basis.values(*p);
            let gn = w * case.g_n(*p, normals[q]);
            for m in 0..face.dim() {
                r[off + m] -= gn * psi[m];
            }
        }
    }
    r
}

/// Largest `|⟨⟦ũ_h⟧ - g_D, b⟩_F|` over interface faces and face basis functions `b`.
pub fn jump_constraint_residual(
    system: &CondensedSystem,
    dofmap: &DofMap,
    case: &ProblemCase,
    cells: &[CellSolution],
) -> f64 {
    let mut worst = 0.0f64;
    for (f, face) in dofmap.faces().iter().enumerate() {
        if !face.is_interface() {
            continue;
        }
        // trace coefficients seen from each side
        let mut side_traces: [Option<DVector<f64>>; 2] = [None, None];
        for (block, cell) in system.blocks.iter().zip(cells) {
            let mut off = 0;
            for fc in &block.local.faces {
                let m = fc.g.nrows();
                if fc.face == f {
                    side_traces[block.local.side.index()] =
                        Some(cell.traces.rows(off, m).into_owned());
                }
                off += m;
            }
        }
        let [Some(t1), Some(t2)] = side_traces else {
            continue;
        };
        let jump = t1 - t2;
        let gram = face.basis.gram(&face.rule);
        let mut moments = DVector::zeros(face.dim());
        for (p, &w) in face.rule.points.iter().zip(&face.rule.weights) {
            moments += w * case.g_d(*p) * face.basis.values(*p);
        }
        let r = gram * jump - moments;
        worst = worst.max(r.amax());
    }
    worst
}
