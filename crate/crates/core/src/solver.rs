//! Symmetric positive definite solves of the condensed trace system.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Entries below this fraction of the largest magnitude are dropped.
pub const DROP_TOL: f64 = 1e-15;

/// Default relative residual for the iterative solver.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Symmetric sparse matrix in lower-triangle coordinate storage, with its right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    n: usize,
    /// Merged `(row, col, value)` with `row >= col`, sorted by column then row.
    entries: Vec<(usize, usize, f64)>,
    pub rhs: DVector<f64>,
}

impl SparseSymmetric {
    /// Builds the matrix from possibly repeated triplets of either triangle.
    ///
    /// Upper-triangle triplets are mirrored; duplicates are summed.
    pub fn from_triplets(
        n: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
        rhs: DVector<f64>,
    ) -> Result<Self> {
        if rhs.len() != n {
            return Err(Error::InvalidInput(format!(
                "right-hand side has length {}, expected {n}",
                rhs.len()
            )));
        }
        let mut raw: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidInput(format!(
                    "entry ({i}, {j}) outside a {n}x{n} matrix"
                )));
            }
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            raw.push((r, c, v));
        }
        raw.sort_by_key(|&(r, c, _)| (c, r));
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(raw.len());
        for (r, c, v) in raw {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => entries.push((r, c, v)),
            }
        }
        let max = entries.iter().fold(0.0f64, |m, e| m.max(e.2.abs()));
        entries.retain(|e| e.2.abs() > DROP_TOL * max || (e.0 == e.1 && e.2 != 0.0));
        Ok(Self { n, entries, rhs })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored lower-triangle entries.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz_lower(&self) -> usize {
        self.entries.len()
    }

    pub fn diagonal(&self) -> DVector<f64> {
        let mut d = DVector::zeros(self.n);
        for &(r, c, v) in &self.entries {
            if r == c {
                d[r] = v;
            }
        }
        d
    }

    /// `A x`.
    pub fn mul(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(r, c, v) in &self.entries {
            a[(r, c)] = v;
            a[(c, r)] = v;
        }
        a
    }

    /// `‖A x - b‖ / ‖b‖` (absolute when `b = 0`).
    pub fn relative_residual(&self, x: &DVector<f64>) -> f64 {
        let r = (self.mul(x) - &self.rhs).norm();
        let b = self.rhs.norm();
        if b > 0.0 {
            r / b
        } else {
            r
        }
    }

    /// Writes the matrix in MatrixMarket `coordinate real symmetric` format.
    pub fn write_matrix_market(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
        writeln!(w, "{} {} {}", self.n, self.n, self.entries.len())?;
        for &(r, c, v) in &self.entries {
            writeln!(w, "{} {} {:.17e}", r + 1, c + 1, v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMethod {
    /// Sparse Cholesky with a fill-reducing ordering.
    #[default]
    Direct,
    /// Jacobi-preconditioned conjugate gradients.
    Iterative,
}

impl fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverMethod::Direct => "direct",
            SolverMethod::Iterative => "iterative",
        })
    }
}

impl FromStr for SolverMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SolverMethod::Direct),
            "iterative" | "cg" => Ok(SolverMethod::Iterative),
            other => Err(Error::InvalidInput(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub method: SolverMethod,
    /// CG iterations (zero for the direct solver).
    pub iterations: usize,
    /// Final `‖A x - b‖ / ‖b‖`.
    pub residual: f64,
}

/// Solves `A x = b`; `tol` is the relative residual target of the iterative method.
pub fn solve_spd(
    system: &SparseSymmetric,
    method: SolverMethod,
    tol: f64,
) -> Result<(DVector<f64>, SolveStats)> {
    let n = system.dim();
    if n == 0 {
        let stats = SolveStats {
            method,
            iterations: 0,
            residual: 0.0,
        };
        return Ok((DVector::zeros(0), stats));
    }
    let (x, iterations) = match method {
        SolverMethod::Direct => (cholesky_solve(system)?, 0),
        SolverMethod::Iterative => conjugate_gradient(system, tol, 20 * n + 1000)?,
    };
    let residual = system.relative_residual(&x);
    Ok((
        x,
        SolveStats {
            method,
            iterations,
            residual,
        },
    ))
}

fn cholesky_solve(system: &SparseSymmetric) -> Result<DVector<f64>> {
    let n = system.dim();
    let triplets: Vec<Triplet<usize, usize, f64>> = system
        .entries
        .iter()
        .map(|&(r, c, v)| Triplet::new(r, c, v))
        .collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::InvalidInput(format!("sparse matrix construction failed: {e:?}")))?;
    let llt = a
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::NotPositiveDefinite(format!("sparse Cholesky failed: {e:?}")))?;
    let mut x = Mat::from_fn(n, 1, |i, _| system.rhs[i]);
    llt.solve_in_place(x.as_mut());
    let out = DVector::from_fn(n, |i, _| x[(i, 0)]);
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::NotPositiveDefinite(
            "Cholesky solve produced non-finite values".into(),
        ))
    }
}

fn conjugate_gradient(
    system: &SparseSymmetric,
    tol: f64,
    max_iter: usize,
) -> Result<(DVector<f64>, usize)> {
    let b = &system.rhs;
    let bnorm = b.norm();
    let mut x = DVector::zeros(system.dim());
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let diag = system.diagonal();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::NotPositiveDefinite(format!(
            "diagonal entry {i} is {}",
            diag[i]
        )));
    }
    let inv = diag.map(|d| 1.0 / d);
    let mut r = b.clone();
    let mut z = r.component_mul(&inv);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    for it in 1..=max_iter {
        let ap = system.mul(&p);
        let pap = p.dot(&ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite(format!(
                "CG curvature {pap:e} at iteration {it}"
            )));
        }
        let a = rz / pap;
        x.axpy(a, &p, 1.0);
        r.axpy(-a, &ap, 1.0);
        if r.norm() <= tol * bnorm {
            // guard against drift of the recursive residual
            if system.relative_residual(&x) <= 10.0 * tol {
                return Ok((x, it));
            }
            r = b - system.mul(&x);
        }
        z = r.component_mul(&inv);
        let rz_new = r.dot(&z);
        p = &z + (rz_new / rz) * &p;
        rz = rz_new;
    }
    Err(Error::NoConvergence(format!(
        "CG reached {max_iter} iterations with relative residual {:e}",
        system.relative_residual(&x)
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SparseSymmetric {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i + 1, i, -1.0));
            }
        }
        SparseSymmetric::from_triplets(n, t, DVector::from_element(n, 1.0)).unwrap()
    }

    #[test]
    fn identity_returns_rhs() {
        let b = DVector::from_vec(vec![1.0, -2.0, 3.5]);
        let a = SparseSymmetric::from_triplets(3, (0..3).map(|i| (i, i, 1.0)), b.clone()).unwrap();
        for m in [SolverMethod::Direct, SolverMethod::Iterative] {
            let (x, stats) = solve_spd(&a, m, 1e-12).unwrap();
            assert!((x - &b).amax() < 1e-14);
            assert!(stats.residual < 1e-14);
        }
    }

    #[test]
    fn two_by_two_hand_solve() {
        let a = SparseSymmetric::from_triplets(
            2,
            vec![(0, 0, 2.0), (1, 0, 1.0), (1, 1, 2.0)],
            DVector::from_vec(vec![3.0, 3.0]),
        )
        .unwrap();
        for m in [SolverMethod::Direct, SolverMethod::Iterative] {
            let (x, _) = solve_spd(&a, m, 1e-14).unwrap();
            assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn duplicates_are_summed_and_upper_entries_mirrored() {
        let a = SparseSymmetric::from_triplets(
            2,
            vec![
                (0, 0, 1.0),
                (0, 0, 1.0),
                (0, 1, 0.5),
                (1, 0, 0.5),
                (1, 1, 2.0),
            ],
            DVector::zeros(2),
        )
        .unwrap();
        assert_eq!(a.entries(), &[(0, 0, 2.0), (1, 0, 1.0), (1, 1, 2.0)]);
        assert_eq!(a.to_dense(), a.to_dense().transpose());
    }

    #[test]
    fn tiny_entries_are_dropped() {
        let a = SparseSymmetric::from_triplets(
            2,
            vec![(0, 0, 1.0), (1, 0, 1e-17), (1, 1, 1.0)],
            DVector::zeros(2),
        )
        .unwrap();
        assert_eq!(a.nnz_lower(), 2);
    }

    #[test]
    fn direct_and_iterative_agree() {
        let a = laplacian_1d(200);
        let (x1, _) = solve_spd(&a, SolverMethod::Direct, 1e-12).unwrap();
        let (x2, s) = solve_spd(&a, SolverMethod::Iterative, 1e-13).unwrap();
        assert!((&x1 - &x2).norm() / x1.norm() < 1e-10);
        assert!(s.iterations > 0);
        assert!(a.relative_residual(&x1) < 1e-12);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = SparseSymmetric::from_triplets(
            2,
            vec![(0, 0, 1.0), (1, 0, 2.0), (1, 1, 1.0)],
            DVector::from_vec(vec![1.0, 0.0]),
        )
        .unwrap();
        let err = solve_spd(&a, SolverMethod::Direct, 1e-12).unwrap_err();
        assert_eq!(err.class(), "NotPositiveDefinite");
        let err = solve_spd(&a, SolverMethod::Iterative, 1e-12).unwrap_err();
        assert_eq!(err.class(), "NotPositiveDefinite");
    }

    #[test]
    fn cg_iteration_cap() {
        let a = laplacian_1d(400);
        let err = conjugate_gradient(&a, 1e-14, 5).unwrap_err();
        assert_eq!(err.class(), "NoConvergence");
    }

    #[test]
    fn matrix_market_export() {
        let a = SparseSymmetric::from_triplets(
            2,
            vec![(0, 0, 2.0), (1, 0, -1.0), (1, 1, 0.5)],
            DVector::zeros(2),
        )
        .unwrap();
        let mut buf = Vec::new();
        a.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "%%MatrixMarket matrix coordinate real symmetric");
        assert_eq!(lines[1], "2 2 3");
        assert_eq!(lines[2], "1 1 2.00000000000000000e0");
        assert_eq!(lines[3], "2 1 -1.00000000000000000e0");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn method_parsing() {
        assert_eq!(
            "direct".parse::<SolverMethod>().unwrap(),
            SolverMethod::Direct
        );
        assert_eq!(
            "iterative".parse::<SolverMethod>().unwrap(),
            SolverMethod::Iterative
        );
        assert!("lu".parse::<SolverMethod>().is_err());
    }
}
