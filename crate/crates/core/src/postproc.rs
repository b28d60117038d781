//! Discrete fields, broken error norms and convergence orders.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::assembly::{CellSolution, CondensedSystem};
use crate::cases::ProblemCase;
use crate::error::{Error, Result};
use crate::geometry::{CutTopology, StructuredMesh, Subdomain};
use crate::quadrature::element_rule;
use crate::spaces::{dim_p, PieceBasis};
use crate::{Point, Vector};

/// `(q_h, u_h)` on one element piece.
#[derive(Debug, Clone)]
pub struct CellField {
    pub element: usize,
    pub side: Subdomain,
    pub basis: PieceBasis,
    /// Flux coefficients, `x` components first.
    pub q: DVector<f64>,
    pub u: DVector<f64>,
}

impl CellField {
    pub fn u(&self, p: Point) -> f64 {
        self.basis.combine(self.u.as_slice(), p)
    }

    pub fn grad_u(&self, p: Point) -> Vector {
        self.basis.combine_grad(self.u.as_slice(), p)
    }

    pub fn q(&self, p: Point) -> Vector {
        let n1 = self.q.len() / 2;
        let q = self.q.as_slice();
        Vector::new(
            self.basis.combine(&q[..n1], p),
            self.basis.combine(&q[n1..], p),
        )
    }
}

/// Piecewise polynomial solution over all element pieces.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub k: usize,
    pub cells: Vec<CellField>,
    element_cells: Vec<[Option<usize>; 2]>,
}

impl DiscreteSolution {
    pub fn new(k: usize, num_elements: usize, cells: Vec<CellField>) -> Result<Self> {
        let mut element_cells = vec![[None; 2]; num_elements];
        for (i, c) in cells.iter().enumerate() {
            let slot = element_cells.get_mut(c.element).ok_or_else(|| {
                Error::InvalidInput(format!("element {} out of range", c.element))
            })?;
            slot[c.side.index()] = Some(i);
        }
        Ok(Self {
            k,
            cells,
            element_cells,
        })
    }

    /// Collects the recovered fields of a solved system.
    pub fn from_recovery(
        k: usize,
        num_elements: usize,
        system: &CondensedSystem,
        cells: &[CellSolution],
    ) -> Result<Self> {
        let fields = system
            .blocks
            .iter()
            .zip(cells)
            .map(|(b, c)| CellField {
                element: b.local.element,
                side: b.local.side,
                basis: b.local.basis.clone(),
                q: c.q.clone(),
                u: c.u.clone(),
            })
            .collect();
        Self::new(k, num_elements, fields)
    }

    /// The zero solution on the given pieces.
    pub fn zero_like(&self) -> Self {
        let nq = 2 * dim_p(self.k - 1);
        let np = dim_p(self.k);
        let cells = self
            .cells
            .iter()
            .map(|c| CellField {
                q: DVector::zeros(nq),
                u: DVector::zeros(np),
                ..c.clone()
            })
            .collect();
        Self {
            cells,
            ..self.clone()
        }
    }

    /// Piece of `element` on `side`, or its only piece if `side` is absent.
    pub fn cell(&self, element: usize, side: Subdomain) -> Option<&CellField> {
        let [a, b] = self.element_cells[element];
        let idx = match side {
            Subdomain::One => a.or(b),
            Subdomain::Two => b.or(a),
        };
        idx.map(|i| &self.cells[i])
    }
}

/// Relative broken `L²` errors in `u`, `q` and `∇u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldErrors {
    pub u: f64,
    pub q: f64,
    pub grad_u: f64,
}

/// Relative errors `‖u−u_h‖/‖u‖`, `‖q−q_h‖/‖q‖` and `‖∇u−∇_h u_h‖/‖∇u‖`
/// summed over all pieces with cut rules of degree `2k + extra`.
///
/// The exact fields are taken on the side given by the level-set sign at
/// each quadrature point, except on pieces integrated with a signed rule,
/// where the piece's own side is used.
pub fn broken_errors(
    mesh: &StructuredMesh,
    topology: &CutTopology,
    case: &ProblemCase,
    solution: &DiscreteSolution,
    extra: usize,
    geo_tol: f64,
) -> Result<FieldErrors> {
    let degree = 2 * solution.k + extra;
    let sums = solution
        .cells
        .par_iter()
        .map(|cell| {
            let rule = element_rule(
                mesh,
                topology,
                &case.levelset,
                cell.element,
                cell.side,
                degree,
                geo_tol,
            )?;
            // signed rules sample outside the piece; keep one smooth branch there
            let signed = rule.weights.iter().any(|&w| w < 0.0);
            let mut s = [0.0; 6];
            for (p, &w) in rule.points.iter().zip(&rule.weights) {
                let side = if signed {
                    cell.side
                } else {
                    case.levelset.side(*p)
                };
                let (u, g, q) = (case.u(side, *p), case.grad_u(side, *p), case.q(side, *p));
                s[0] += w * (u - cell.u(*p)).powi(2);
                s[1] += w * u * u;
                s[2] += w * (q - cell.q(*p)).norm_squared();
                s[3] += w * q.norm_squared();
                s[4] += w * (g - cell.grad_u(*p)).norm_squared();
                s[5] += w * g.norm_squared();
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = [0.0; 6];
    for s in &sums {
        for (a, b) in t.iter_mut().zip(s) {
            *a += b;
        }
    }
    let ratio = |e: f64, n: f64, what: &str| {
        if n > 0.0 {
            Ok((e / n).sqrt())
        } else {
            Err(Error::InvalidInput(format!("exact {what} has zero norm")))
        }
    };
    Ok(FieldErrors {
        u: ratio(t[0], t[1], "potential")?,
        q: ratio(t[2], t[3], "flux")?,
        grad_u: ratio(t[4], t[5], "gradient")?,
    })
}

/// `log(e_{j-1}/e_j) / log(h_{j-1}/h_j)` for consecutive rows.
pub fn convergence_orders(rows: &[(f64, f64)]) -> Result<Vec<f64>> {
    if rows.len() < 2 {
        return Err(Error::DegenerateSequence(format!(
            "need at least two rows, got {}",
            rows.len()
        )));
    }
    if let Some(i) = rows.iter().position(|&(h, e)| !(e > 0.0) || !(h > 0.0)) {
        return Err(Error::DegenerateSequence(format!(
            "row {i} has a nonpositive error or mesh size"
        )));
    }
    rows.windows(2)
        .map(|w| {
            let (h0, e0) = w[0];
            let (h1, e1) = w[1];
            if h0 == h1 {
                Err(Error::DegenerateSequence("repeated mesh size".into()))
            } else {
                Ok((e0 / e1).ln() / (h0 / h1).ln())
            }
        })
        .collect()
}
