//! Mesh sweeps, convergence tables and solution dumps.

use std::fmt::Write as _;
use std::io::Write;

use crate::assembly::{
    assemble, jump_constraint_residual, max_interior_residual, recover_interior,
};
use crate::cases::{CaseId, ProblemCase};
use crate::error::{Error, Result};
use crate::geometry::{
    build_uniform_mesh, classify_elements, CutTopology, LevelSet, StructuredMesh, DEFAULT_SNAP_TOL,
};
use crate::postproc::{broken_errors, convergence_orders, DiscreteSolution, FieldErrors};
use crate::quadrature::DEFAULT_GEO_TOL;
use crate::solver::{solve_spd, SolveStats, SolverMethod, DEFAULT_TOL};
use crate::spaces::{build_dofmap, DofMap, Scheme};
use crate::Point;

/// Extra degree of the error rules over `2k`.
pub const ERROR_RULE_EXTRA: usize = 4;

/// Discretization and solver settings shared by every mesh of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub k: usize,
    pub scheme: Scheme,
    pub solver: SolverMethod,
    pub tol: f64,
    pub geo_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            k: 1,
            scheme: Scheme::Standard,
            solver: SolverMethod::Direct,
            tol: DEFAULT_TOL,
            geo_tol: DEFAULT_GEO_TOL,
        }
    }
}

/// A full study: case, coefficients, sweep and output options.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: CaseId,
    pub alpha1: f64,
    pub alpha2: f64,
    pub meshes: Vec<usize>,
    pub options: SolveOptions,
    /// Samples per element edge for solution dumps, if requested.
    pub dump_resolution: Option<usize>,
}

impl RunConfig {
    pub fn new(case: CaseId) -> Self {
        let (alpha1, alpha2) = case.default_alphas();
        Self {
            case,
            alpha1,
            alpha2,
            meshes: vec![8, 16, 32, 64, 128],
            options: SolveOptions::default(),
            dump_resolution: None,
        }
    }

    pub fn problem(&self) -> Result<ProblemCase> {
        ProblemCase::from_id(self.case, self.alpha1, self.alpha2)
    }

    pub fn validate(&self) -> Result<()> {
        let o = &self.options;
        if !(1..=4).contains(&o.k) {
            return Err(Error::InvalidInput(format!("k = {} outside 1..=4", o.k)));
        }
        if self.meshes.is_empty() || self.meshes.contains(&0) {
            return Err(Error::InvalidInput("mesh sizes must be positive".into()));
        }
        if !(o.tol > 0.0 && o.geo_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if self.dump_resolution.is_some_and(|r| r < 2) {
            return Err(Error::InvalidInput(
                "dump resolution must be at least 2".into(),
            ));
        }
        if o.scheme == Scheme::Modified && !self.problem()?.straight_interface() {
            return Err(Error::InvalidInput(format!(
                "the modified scheme requires a piecewise straight interface; case {} is curved",
                self.case
            )));
        }
        Ok(())
    }
}

/// Everything computed on one mesh.
#[derive(Debug, Clone)]
pub struct MeshSolve {
    pub mesh: StructuredMesh,
    pub topology: CutTopology,
    pub dofmap: DofMap,
    pub solution: DiscreteSolution,
    pub stats: SolveStats,
    pub errors: FieldErrors,
    /// Largest interface jump-constraint residual.
    pub jump_residual: f64,
    /// Largest relative residual of the local equations.
    pub local_residual: f64,
}

/// Build, classify, assemble, solve, recover and measure on an `n × n` mesh.
pub fn solve_on_mesh(case: &ProblemCase, n: usize, options: &SolveOptions) -> Result<MeshSolve> {
    let run = || -> Result<MeshSolve> {
        let mesh = build_uniform_mesh(case.domain, n)?;
        let topology = classify_elements(&mesh, &case.levelset, DEFAULT_SNAP_TOL)?;
        let dofmap = build_dofmap(
            &mesh,
            &topology,
            &case.levelset,
            options.k,
            options.scheme,
            options.geo_tol,
        )?;
        let system = assemble(&mesh, &topology, &dofmap, case, options.geo_tol)?;
        let (x, stats) = solve_spd(&system.matrix, options.solver, options.tol)?;
        let cells = recover_interior(&system, &x);
        let jump_residual = jump_constraint_residual(&system, &dofmap, case, &cells);
        let local_residual = max_interior_residual(&system, &cells);
        let solution =
            DiscreteSolution::from_recovery(options.k, mesh.num_triangles(), &system, &cells)?;
        let errors = broken_errors(
            &mesh,
            &topology,
            case,
            &solution,
            ERROR_RULE_EXTRA,
            options.geo_tol,
        )?;
        Ok(MeshSolve {
            mesh,
            topology,
            dofmap,
            solution,
            stats,
            errors,
            jump_residual,
            local_residual,
        })
    };
    run().map_err(|e| e.context(format!("mesh {n}x{n}")))
}

/// One table row.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub h: f64,
    /// Global trace unknowns.
    pub n_dof: usize,
    /// Condensed interior unknowns.
    pub n_interior: usize,
    pub errors: FieldErrors,
    /// Orders against the previous row, `(u, q, ∇u)`.
    pub orders: Option<[f64; 3]>,
    pub stats: SolveStats,
    pub jump_residual: f64,
}

/// Errors and orders over a mesh sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub case: String,
    pub k: usize,
    pub scheme: Scheme,
    pub alpha: [f64; 2],
    pub rows: Vec<ReportRow>,
}

fn sci(v: f64) -> String {
    // two-digit exponent, as in 5.90E-04
    let s = format!("{v:.2E}");
    match s.split_once('E') {
        Some((m, e)) => {
            let (sign, digits) = match e.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', e),
            };
            format!("{m}E{sign}{digits:0>2}")
        }
        None => s,
    }
}

impl ConvergenceReport {
    pub fn final_orders(&self) -> Option<[f64; 3]> {
        self.rows.last().and_then(|r| r.orders)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("mesh,n_dof,err_u,ord_u,err_q,ord_q,err_gradu,ord_gradu\n");
        for r in &self.rows {
            let o = |i: usize| r.orders.map_or(String::new(), |o| format!("{:.4}", o[i]));
            let e = &r.errors;
            writeln!(
                out,
                "{},{},{:.6e},{},{:.6e},{},{:.6e},{}",
                r.n,
                r.n_dof,
                e.u,
                o(0),
                e.q,
                o(1),
                e.grad_u,
                o(2)
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let header = [
            "mesh",
            "n_dof",
            "err_u",
            "ord_u",
            "err_q",
            "ord_q",
            "err_gradu",
            "ord_gradu",
        ];
        let body: Vec<[String; 8]> = self
            .rows
            .iter()
            .map(|r| {
                let o = |i: usize| r.orders.map_or("-".to_string(), |o| format!("{:.2}", o[i]));
                [
                    format!("{0}x{0}", r.n),
                    r.n_dof.to_string(),
                    sci(r.errors.u),
                    o(0),
                    sci(r.errors.q),
                    o(1),
                    sci(r.errors.grad_u),
                    o(2),
                ]
            })
            .collect();
        let widths: Vec<usize> = (0..8)
            .map(|c| {
                body.iter()
                    .map(|r| r[c].len())
                    .chain([header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &mut dyn Iterator<Item = String>| {
            let parts: Vec<String> = cells
                .zip(&widths)
                .map(|(c, w)| format!(" {c:>w$} "))
                .collect();
            format!("|{}|\n", parts.join("|"))
        };
        let mut out = format!(
            "{} k={} scheme={} alpha=({}, {})\n\n",
            self.case, self.k, self.scheme, self.alpha[0], self.alpha[1]
        );
        out += &line(&mut header.iter().map(|s| s.to_string()));
        out += &line(&mut widths.iter().map(|w| format!("{}:", "-".repeat(w - 1))));
        for r in body {
            out += &line(&mut r.into_iter());
        }
        out
    }
}

/// Runs `case` over the mesh sizes and tabulates errors and orders.
pub fn run_study(
    case: &ProblemCase,
    meshes: &[usize],
    options: &SolveOptions,
) -> Result<(ConvergenceReport, Vec<MeshSolve>)> {
    let solves = meshes
        .iter()
        .map(|&n| solve_on_mesh(case, n, options))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ReportRow> = solves
        .iter()
        .zip(meshes)
        .map(|(s, &n)| ReportRow {
            n,
            h: s.mesh.h(),
            n_dof: s.dofmap.num_free(),
            n_interior: s.dofmap.num_interior(),
            errors: s.errors,
            orders: None,
            stats: s.stats,
            jump_residual: s.jump_residual,
        })
        .collect();
    if rows.len() >= 2 {
        let field = |f: fn(&FieldErrors) -> f64| {
            convergence_orders(&rows.iter().map(|r| (r.h, f(&r.errors))).collect::<Vec<_>>())
        };
        let ou = field(|e| e.u)?;
        let oq = field(|e| e.q)?;
        let og = field(|e| e.grad_u)?;
        for (i, r) in rows.iter_mut().enumerate().skip(1) {
            r.orders = Some([ou[i - 1], oq[i - 1], og[i - 1]]);
        }
    }
    let report = ConvergenceReport {
        case: case.name.clone(),
        k: options.k,
        scheme: options.scheme,
        alpha: case.alpha,
        rows,
    };
    Ok((report, solves))
}

/// Runs the study described by `config`.
pub fn run_convergence_study(config: &RunConfig) -> Result<(ConvergenceReport, Vec<MeshSolve>)> {
    config.validate()?;
    let case = config.problem()?;
    run_study(&case, &config.meshes, &config.options)
}

/// Writes `x,y,u_h` on a barycentric lattice with `resolution` points per
/// element edge. On cut elements each sample uses the piece on its side of
/// the interface.
pub fn dump_solution(
    mut w: impl Write,
    mesh: &StructuredMesh,
    levelset: &LevelSet,
    solution: &DiscreteSolution,
    resolution: usize,
) -> Result<()> {
    if resolution < 2 {
        return Err(Error::InvalidInput(
            "dump resolution must be at least 2".into(),
        ));
    }
    let r = (resolution - 1) as f64;
    let mut buf = String::from("x,y,u_h\n");
    for t in 0..mesh.num_triangles() {
        let [a, b, c] = mesh.triangle_points(t);
        for i in 0..resolution {
            for j in 0..resolution - i {
                let (l1, l2) = (i as f64 / r, j as f64 / r);
                let p: Point = a + l1 * (b - a) + l2 * (c - a);
                let v = solution
                    .cell(t, levelset.side(p))
                    .map_or(0.0, |cell| cell.u(p));
                writeln!(buf, "{:.12e},{:.12e},{:.12e}", p.x, p.y, v).expect("writing to a String");
            }
        }
    }
    w.write_all(buf.as_bytes())?;
    Ok(())
}

/// Number of dump rows per element.
pub fn samples_per_element(resolution: usize) -> usize {
    resolution * (resolution + 1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::manufactured_uncut;

    #[test]
    fn scientific_format_has_two_digit_exponent() {
        assert_eq!(sci(5.9e-4), "5.90E-04");
        assert_eq!(sci(1.31e-5), "1.31E-05");
        assert_eq!(sci(12.0), "1.20E+01");
        assert_eq!(sci(3.2e-123), "3.20E-123");
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new(CaseId::CircleHomog);
        assert!(c.validate().is_ok());
        c.options.scheme = Scheme::Modified;
        assert!(matches!(c.validate(), Err(Error::InvalidInput(_))));
        c.case = CaseId::Segment;
        assert!(c.validate().is_ok());
        c.options.k = 5;
        assert!(c.validate().is_err());
        c.options.k = 2;
        c.meshes = vec![];
        assert!(c.validate().is_err());
    }

    #[test]
    fn dump_on_one_element_matches_basis_evaluation() {
        let case = manufactured_uncut(1.0).unwrap();
        let s = solve_on_mesh(&case, 1, &SolveOptions::default()).unwrap();
        let mut out = Vec::new();
        dump_solution(&mut out, &s.mesh, &case.levelset, &s.solution, 2).unwrap();
        let text = String::from_utf8(out).unwrap();
        let rows: Vec<Vec<f64>> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 2 * samples_per_element(2));
        let cell = &s.solution.cells[s
            .solution
            .cells
            .iter()
            .position(|c| c.element == 0)
            .unwrap()];
        let [a, b, c] = s.mesh.triangle_points(0);
        // lattice order: (0,0), (0,1), (1,0) in barycentric steps toward b and c
        for (row, p) in rows.iter().take(3).zip([a, c, b]) {
            assert_eq!((row[0], row[1]), (p.x, p.y));
            let direct = cell.basis.values(p).dot(&cell.u);
            assert!((row[2] - direct).abs() < 1e-11 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn zero_solution_dumps_zeros() {
        let case = manufactured_uncut(1.0).unwrap();
        let s = solve_on_mesh(&case, 2, &SolveOptions::default()).unwrap();
        let mut out = Vec::new();
        dump_solution(
            &mut out,
            &s.mesh,
            &case.levelset,
            &s.solution.zero_like(),
            3,
        )
        .unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.lines().skip(1).all(|l| l
            .rsplit(',')
            .next()
            .unwrap()
            .parse::<f64>()
            .unwrap()
            == 0.0));
    }

    #[test]
    fn csv_and_markdown_layout() {
        let case = manufactured_uncut(1.0).unwrap();
        let (report, _) = run_study(&case, &[2, 4], &SolveOptions::default()).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "mesh,n_dof,err_u,ord_u,err_q,ord_q,err_gradu,ord_gradu"
        );
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split(',').nth(3), Some(""));
        assert_eq!(lines[2].split(',').count(), 8);
        let md = report.to_markdown();
        assert!(md.contains("| 2x2 |") || md.contains(" 2x2 "));
        assert_eq!(md.lines().filter(|l| l.starts_with('|')).count(), 4);
        // deterministic output
        let (again, _) = run_study(&case, &[2, 4], &SolveOptions::default()).unwrap();
        assert_eq!(again.to_csv(), csv);
    }

    #[test]
    fn errors_carry_mesh_context() {
        let case = manufactured_uncut(1.0).unwrap();
        let opts = SolveOptions {
            k: 7,
            ..Default::default()
        };
        let err = solve_on_mesh(&case, 3, &opts).unwrap_err();
        assert!(err.to_string().starts_with("mesh 3x3"));
        assert_eq!(err.class(), "InvalidInput");
    }
}
