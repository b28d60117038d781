use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::quadrature::{legendre, QuadRule};
use crate::{Point, Vector};

/// Dimension of `P_k` in two variables.
pub fn dim_p(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Exponents `(p, q)` of `x^p y^q`, ordered by total degree.
fn exponents(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim_p(k));
    for d in 0..=k {
        for q in 0..=d {
            out.push((d - q, q));
        }
    }
    out
}

fn powers(x: f64, k: usize, out: &mut [f64]) {
    out[0] = 1.0;
    for i in 1..=k {
        out[i] = out[i - 1] * x;
    }
}

/// Monomial values and reference gradients at `(xi, eta)`.
fn monomials(
    exps: &[(usize, usize)],
    k: usize,
    xi: f64,
    eta: f64,
    vals: &mut [f64],
    grads: Option<&mut [[f64; 2]]>,
) {
    let mut px = [0.0; 16];
    let mut py = [0.0; 16];
    powers(xi, k, &mut px);
    powers(eta, k, &mut py);
    for (j, &(p, q)) in exps.iter().enumerate() {
        vals[j] = px[p] * py[q];
    }
    if let Some(grads) = grads {
        for (j, &(p, q)) in exps.iter().enumerate() {
            let gx = if p > 0 {
                p as f64 * px[p - 1] * py[q]
            } else {
                0.0
            };
            let gy = if q > 0 {
                q as f64 * px[p] * py[q - 1]
            } else {
                0.0
            };
            grads[j] = [gx, gy];
        }
    }
}

/// Orthonormal basis of `P_k` restricted to an element piece.
///
/// Monomials live in an affine frame centred at the piece centroid and scaled
/// by the inverse square root of its second-moment matrix, so thin slivers
/// stay well conditioned. The first `dim P_r` functions span `P_r` for every
/// `r ≤ k`.
#[derive(Debug, Clone)]
pub struct PieceBasis {
    degree: usize,
    center: Point,
    frame: Matrix2<f64>,
    coeffs: DMatrix<f64>,
    exps: Vec<(usize, usize)>,
}

impl PieceBasis {
    /// Builds the basis orthonormal with respect to `rule`.
    pub fn new(rule: &QuadRule, degree: usize) -> Result<Self> {
        if degree > 12 {
            return Err(Error::UnsupportedDegree(degree));
        }
        let measure = rule.measure();
        if !(measure > 0.0) {
            return Err(Error::SingularMass("piece has no quadrature weight".into()));
        }
        let center = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| *w * p)
            .sum::<Vector>()
            / measure;
        let mut cov = Matrix2::zeros();
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let d = p - center;
            cov += *w * d * d.transpose();
        }
        cov /= measure;
        let eig = cov.symmetric_eigen();
        let lmax = eig.eigenvalues.max();
        let frame = if eig.eigenvalues.min() > 1e-24 * lmax.max(f64::MIN_POSITIVE) {
            let inv = Matrix2::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
            eig.eigenvectors * inv * eig.eigenvectors.transpose()
        } else if lmax > 0.0 {
            Matrix2::identity() / lmax.sqrt()
        } else {
            Matrix2::identity()
        };
        let exps = exponents(degree);
        let n = exps.len();
        let mut basis = Self {
            degree,
            center,
            frame,
            coeffs: DMatrix::identity(n, n),
            exps,
        };
        for pass in 0..4 {
            let gram = basis.gram(rule);
            let err = (&gram - DMatrix::identity(n, n)).amax();
            if err <= 1e-12 {
                return Ok(basis);
            }
            if pass == 3 {
                break;
            }
            let chol = gram.cholesky().ok_or_else(|| {
                Error::SingularMass(format!(
                    "Gram matrix of a degree-{degree} piece basis is not positive definite"
                ))
            })?;
            let linv = chol
                .l()
                .solve_lower_triangular(&DMatrix::identity(n, n))
                .ok_or_else(|| Error::SingularMass("singular Cholesky factor".into()))?;
            basis.coeffs = linv * &basis.coeffs;
        }
        let err = (&basis.gram(rule) - DMatrix::identity(n, n)).amax();
        if err <= 1e-10 {
            Ok(basis)
        } else {
            Err(Error::SingularMass(format!(
                "piece basis not orthonormal after re-orthonormalization (deviation {err:e})"
            )))
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    fn local(&self, x: Point) -> Vector {
        self.frame * (x - self.center)
    }

    /// Basis values at `x`.
    pub fn eval(&self, x: Point, out: &mut [f64]) {
        let n = self.dim();
        let mut m = [0.0; 128];
        let xi = self.local(x);
        monomials(&self.exps, self.degree, xi.x, xi.y, &mut m[..n], None);
        for i in 0..n {
            out[i] = (0..=i).map(|j| self.coeffs[(i, j)] * m[j]).sum();
        }
    }

    /// Basis values and gradients at `x`.
    pub fn eval_with_grad(&self, x: Point, vals: &mut [f64], grads: &mut [Vector]) {
        let n = self.dim();
        let mut m = [0.0; 128];
        let mut g = [[0.0; 2]; 128];
        let xi = self.local(x);
        monomials(
            &self.exps,
            self.degree,
            xi.x,
            xi.y,
            &mut m[..n],
            Some(&mut g[..n]),
        );
        let ft = self.frame.transpose();
        for i in 0..n {
            let mut v = 0.0;
            let mut gr = Vector::zeros();
            for j in 0..=i {
                let c = self.coeffs[(i, j)];
                v += c * m[j];
                gr += c * Vector::new(g[j][0], g[j][1]);
            }
            vals[i] = v;
            grads[i] = ft * gr;
        }
    }

    pub fn values(&self, x: Point) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        self.eval(x, out.as_mut_slice());
        out
    }

    /// Evaluates `Σ c_i φ_i(x)`.
    pub fn combine(&self, coeffs: &[f64], x: Point) -> f64 {
        let mut v = [0.0; 128];
        self.eval(x, &mut v[..self.dim()]);
        coeffs
            .iter()
            .zip(&v[..coeffs.len()])
            .map(|(c, v)| c * v)
            .sum()
    }

    /// Evaluates `Σ c_i ∇φ_i(x)`.
    pub fn combine_grad(&self, coeffs: &[f64], x: Point) -> Vector {
        let n = self.dim();
        let mut v = [0.0; 128];
        let mut g = [Vector::zeros(); 128];
        self.eval_with_grad(x, &mut v[..n], &mut g[..n]);
        coeffs
            .iter()
            .zip(&g[..coeffs.len()])
            .map(|(c, g)| *c * g)
            .sum()
    }

    /// Mass matrix of the basis under `rule`.
    pub fn gram(&self, rule: &QuadRule) -> DMatrix<f64> {
        let n = self.dim();
        let mut gram = DMatrix::zeros(n, n);
        let mut v = vec![0.0; n];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            self.eval(*p, &mut v);
            for i in 0..n {
                for j in 0..=i {
                    gram[(i, j)] += w * v[i] * v[j];
                }
            }
        }
        gram.fill_upper_triangle_with_lower_triangle();
        gram
    }
}

/// Orthonormal Legendre basis of `P_k` on a straight segment `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentBasis {
    a: Point,
    b: Point,
    degree: usize,
}

impl SegmentBasis {
    pub fn new(a: Point, b: Point, degree: usize) -> Self {
        Self { a, b, degree }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn endpoints(&self) -> [Point; 2] {
        [self.a, self.b]
    }

    pub fn eval(&self, x: Point, out: &mut [f64]) {
        let d = self.b - self.a;
        let len2 = d.norm_squared();
        let len = len2.sqrt();
        let t = (x - self.a).dot(&d) / len2;
        let s = 2.0 * t - 1.0;
        for (m, o) in out.iter_mut().enumerate().take(self.dim()) {
            *o = ((2 * m + 1) as f64 / len).sqrt() * legendre(m, s);
        }
    }
}

/// Orthonormal basis of `P_k(K)|_F` on an interface segment.
///
/// Monomials in a chord-aligned frame (normal coordinate scaled by the
/// sagitta), restricted to `F` and orthonormalized by Gram–Schmidt in monomial
/// order. The target rank is the number of eigenvalues of the unit-diagonal
/// monomial Gram matrix above the drop tolerance; a monomial is skipped when
/// its remainder is below the square root of that tolerance relative to its
/// own norm.
#[derive(Debug, Clone)]
pub struct InterfaceTraceBasis {
    degree: usize,
    center: Point,
    tangent: Vector,
    normal: Vector,
    scale: f64,
    exps: Vec<(usize, usize)>,
    coeffs: DMatrix<f64>,
}

/// Relative drop tolerance for dependent restricted monomials.
pub const TRACE_DROP_TOL: f64 = 1e-8;

impl InterfaceTraceBasis {
    /// Builds the basis on the segment with chord `[a, b]` and quadrature `rule`.
    pub fn new(a: Point, b: Point, rule: &QuadRule, degree: usize, drop_tol: f64) -> Result<Self> {
        let chord = b - a;
        let scale = chord.norm();
        if !(scale > 0.0) {
            return Err(Error::DegenerateCut(
                "interface segment of zero length".into(),
            ));
        }
        let tangent = chord / scale;
        let mut basis = Self {
            degree,
            center: 0.5 * (a + b),
            tangent,
            normal: Vector::new(-tangent.y, tangent.x),
            scale,
            exps: exponents(degree),
            coeffs: DMatrix::zeros(0, 0),
        };
        // stretch the normal coordinate to the arc's sagitta so that curvature
        // terms are not swamped by the chord-direction monomials
        let sagitta = rule
            .points
            .iter()
            .map(|p| ((p - basis.center) / scale).dot(&basis.normal).abs())
            .fold(0.0, f64::max);
        // on straight segments the normal coordinate is pure round-off
        if sagitta > 1e-8 {
            basis.normal /= sagitta;
        } else {
            basis.normal = Vector::zeros();
        }
        let nmon = basis.exps.len();
        let nq = rule.len();
        // sampled monomials, weighted so that dot products are L2(F) products
        let mut samples = DMatrix::zeros(nmon, nq);
        let mut m = vec![0.0; nmon];
        for (q, (p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            basis.monomials_at(*p, &mut m);
            for j in 0..nmon {
                samples[(j, q)] = w.sqrt() * m[j];
            }
        }
        let target = numerical_rank(&samples, drop_tol);
        let mut kept: Vec<DVector<f64>> = Vec::new();
        let mut rows: Vec<DVector<f64>> = Vec::new();
        for j in 0..nmon {
            if kept.len() == target {
                break;
            }
            let mut v: DVector<f64> = samples.row(j).transpose();
            let norm0 = v.norm();
            let mut coef = DVector::zeros(nmon);
            coef[j] = 1.0;
            for _ in 0..2 {
                for (e, r) in kept.iter().zip(&rows) {
                    let c = e.dot(&v);
                    v -= c * e;
                    coef -= c * r;
                }
            }
            let norm = v.norm();
            if norm0 > 0.0 && norm > drop_tol.sqrt() * norm0 {
                kept.push(v / norm);
                rows.push(coef / norm);
            }
        }
        let rank = rows.len();
        let mut coeffs = DMatrix::zeros(rank, nmon);
        for (i, r) in rows.iter().enumerate() {
            coeffs.row_mut(i).copy_from(&r.transpose());
        }
        // the tracked coefficients drift from the sampled vectors when a
        // nearly dependent monomial is kept; re-orthonormalize against the data
        for _ in 0..2 {
            let values = &coeffs * &samples;
            let gram = &values * values.transpose();
            let Some(chol) = gram.cholesky() else { break };
            coeffs = chol.l().solve_lower_triangular(&coeffs).unwrap_or(coeffs);
        }
        basis.coeffs = coeffs;
        Ok(basis)
    }

    fn monomials_at(&self, x: Point, out: &mut [f64]) {
        let d = (x - self.center) / self.scale;
        monomials(
            &self.exps,
            self.degree,
            d.dot(&self.tangent),
            d.dot(&self.normal),
            out,
            None,
        );
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of functions kept after rank filtering.
    pub fn rank(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rank()
    }

    /// Rank below that of `P_k` on a straight segment.
    pub fn rank_deficient(&self) -> bool {
        self.rank() < self.degree + 1
    }

    pub fn eval(&self, x: Point, out: &mut [f64]) {
        let mut m = [0.0; 128];
        let nmon = self.exps.len();
        self.monomials_at(x, &mut m[..nmon]);
        for i in 0..self.rank() {
            out[i] = (0..nmon).map(|j| self.coeffs[(i, j)] * m[j]).sum();
        }
    }

    /// Gram matrix of the restricted monomials (chord frame) under `rule`.
    pub fn monomial_gram(&self, rule: &QuadRule) -> DMatrix<f64> {
        let nmon = self.exps.len();
        let mut gram = DMatrix::zeros(nmon, nmon);
        let mut m = vec![0.0; nmon];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            self.monomials_at(*p, &mut m);
            for i in 0..nmon {
                for j in 0..nmon {
                    gram[(i, j)] += w * m[i] * m[j];
                }
            }
        }
        gram
    }
}

/// Eigenvalues of the unit-diagonal Gram matrix of the sampled rows above `tol`.
fn numerical_rank(samples: &DMatrix<f64>, tol: f64) -> usize {
    let norms: Vec<f64> = samples.row_iter().map(|r| r.norm()).collect();
    let top = norms.iter().cloned().fold(0.0, f64::max);
    let live: Vec<usize> = (0..norms.len())
        .filter(|&j| norms[j] > 1e-14 * top)
        .collect();
    if live.is_empty() {
        return 0;
    }
    let mut gram = DMatrix::zeros(live.len(), live.len());
    for (a, &i) in live.iter().enumerate() {
        for (b, &j) in live.iter().enumerate() {
            gram[(a, b)] = samples.row(i).dot(&samples.row(j)) / (norms[i] * norms[j]);
        }
    }
    let eig = gram.symmetric_eigen().eigenvalues;
    let max = eig.iter().cloned().fold(0.0, f64::max);
    eig.iter().filter(|&&l| l > tol * max).count()
}

/// Trace basis on a face: a mesh (sub-)edge or an interface segment.
#[derive(Debug, Clone)]
pub enum FaceBasis {
    Segment(SegmentBasis),
    Interface(InterfaceTraceBasis),
}

impl FaceBasis {
    pub fn dim(&self) -> usize {
        match self {
            FaceBasis::Segment(b) => b.dim(),
            FaceBasis::Interface(b) => b.dim(),
        }
    }

    pub fn eval(&self, x: Point, out: &mut [f64]) {
        match self {
            FaceBasis::Segment(b) => b.eval(x, out),
            FaceBasis::Interface(b) => b.eval(x, out),
        }
    }

    pub fn values(&self, x: Point) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        self.eval(x, out.as_mut_slice());
        out
    }

    pub fn combine(&self, coeffs: &[f64], x: Point) -> f64 {
        self.values(x).iter().zip(coeffs).map(|(v, c)| v * c).sum()
    }

    pub fn gram(&self, rule: &QuadRule) -> DMatrix<f64> {
        let n = self.dim();
        let mut gram = DMatrix::zeros(n, n);
        let mut v = vec![0.0; n];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            self.eval(*p, &mut v);
            for i in 0..n {
                for j in 0..n {
                    gram[(i, j)] += w * v[i] * v[j];
                }
            }
        }
        gram
    }
}

/// `L²` projection onto the first `dim P_r` functions of `basis` (`Q_r`).
pub fn l2_project_cell(
    f: impl Fn(Point) -> f64,
    basis: &PieceBasis,
    rule: &QuadRule,
    r: usize,
) -> Result<DVector<f64>> {
    if r > basis.degree() {
        return Err(Error::InvalidInput(format!(
            "projection degree {r} exceeds basis degree {}",
            basis.degree()
        )));
    }
    let n = dim_p(r);
    let mut out = DVector::zeros(n);
    let mut v = vec![0.0; basis.dim()];
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        basis.eval(*p, &mut v);
        let fw = w * f(*p);
        for i in 0..n {
            out[i] += fw * v[i];
        }
    }
    Ok(out)
}

/// `L²` projection onto a face basis (`Q_r^b`).
pub fn l2_project_edge(
    g: impl Fn(Point) -> f64,
    basis: &FaceBasis,
    rule: &QuadRule,
) -> DVector<f64> {
    let n = basis.dim();
    let mut out = DVector::zeros(n);
    let mut v = vec![0.0; n];
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        basis.eval(*p, &mut v);
        let gw = w * g(*p);
        for i in 0..n {
            out[i] += gw * v[i];
        }
    }
    out
}

/// Lift `ℓ` of the interface jump: `⟨ℓ - g_D, b⟩_F = 0` for all basis functions `b`.
///
/// Solves with the computed face Gram matrix so the constraint holds to
/// round-off even where the basis is orthonormal only to a tolerance.
pub fn jump_lift(g_d: impl Fn(Point) -> f64, basis: &FaceBasis, rule: &QuadRule) -> DVector<f64> {
    let moments = l2_project_edge(g_d, basis, rule);
    match basis.gram(rule).cholesky() {
        Some(chol) => chol.solve(&moments),
        None => moments,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        build_uniform_mesh, classify_elements, LevelSet, Rectangle, Subdomain, DEFAULT_SNAP_TOL,
    };
    use crate::quadrature::{
        element_rule, interface_rule, map_segment, map_triangle, segment_rule, triangle_rule,
    };

    fn reference_rule(degree: usize) -> QuadRule {
        map_triangle(
            &triangle_rule(degree).unwrap(),
            [
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
        )
    }

    #[test]
    fn dimensions() {
        assert_eq!(dim_p(0), 1);
        assert_eq!(dim_p(1), 3);
        assert_eq!(dim_p(2), 6);
        let rule = reference_rule(8);
        for k in 0..=4 {
            assert_eq!(PieceBasis::new(&rule, k).unwrap().dim(), dim_p(k));
        }
    }

    #[test]
    fn constant_basis_has_zero_gradient() {
        let rule = reference_rule(2);
        let b = PieceBasis::new(&rule, 0).unwrap();
        let mut v = [0.0];
        let mut g = [Vector::zeros()];
        b.eval_with_grad(Point::new(0.2, 0.3), &mut v, &mut g);
        assert!((v[0] - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(g[0], Vector::zeros());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let rule = map_triangle(
            &triangle_rule(8).unwrap(),
            [
                Point::new(0.3, 0.1),
                Point::new(0.4, 0.15),
                Point::new(0.31, 0.2),
            ],
        );
        let b = PieceBasis::new(&rule, 3).unwrap();
        let n = b.dim();
        let eps = 1e-6;
        for p in [
            Point::new(0.33, 0.14),
            Point::new(0.36, 0.16),
            Point::new(0.32, 0.18),
        ] {
            let mut v = vec![0.0; n];
            let mut g = vec![Vector::zeros(); n];
            b.eval_with_grad(p, &mut v, &mut g);
            for i in 0..n {
                let fd = |d: Vector| (b.values(p + d)[i] - b.values(p - d)[i]) / (2.0 * eps);
                let fdg = Vector::new(fd(Vector::new(eps, 0.0)), fd(Vector::new(0.0, eps)));
                assert!(
                    (g[i] - fdg).norm() <= 1e-6 * g[i].norm().max(1.0),
                    "{i}: {:?} {:?}",
                    g[i],
                    fdg
                );
            }
        }
    }

    #[test]
    fn nested_basis_spans_lower_degrees() {
        // an affine function is a combination of the first three functions
        let rule = reference_rule(8);
        let b = PieceBasis::new(&rule, 3).unwrap();
        let f = |p: Point| 1.0 + 2.0 * p.x - p.y;
        let c = l2_project_cell(f, &b, &rule, 1).unwrap();
        for p in [Point::new(0.1, 0.2), Point::new(0.7, 0.1)] {
            assert!((b.combine(c.as_slice(), p) - f(p)).abs() < 1e-13);
        }
    }

    #[test]
    fn projection_of_x_onto_constants_is_the_mean() {
        let rule = reference_rule(4);
        let b = PieceBasis::new(&rule, 2).unwrap();
        let c = l2_project_cell(|p| p.x, &b, &rule, 0).unwrap();
        let value = b.combine(c.as_slice(), Point::new(0.5, 0.5));
        assert!((value - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn projection_is_idempotent_on_polynomials() {
        let rule = reference_rule(8);
        let b = PieceBasis::new(&rule, 2).unwrap();
        let f = |p: Point| 3.0 - p.x * p.y + 0.5 * p.y * p.y;
        let c = l2_project_cell(f, &b, &rule, 2).unwrap();
        let g = |p: Point| b.combine(c.as_slice(), p);
        let c2 = l2_project_cell(g, &b, &rule, 2).unwrap();
        assert!((c - c2).amax() < 1e-13);
        let c0 = l2_project_cell(|_| 7.0, &b, &rule, 2).unwrap();
        assert!((b.combine(c0.as_slice(), Point::new(0.2, 0.2)) - 7.0).abs() < 1e-13);
    }

    #[test]
    fn projection_residual_is_orthogonal() {
        let rule = reference_rule(10);
        let b = PieceBasis::new(&rule, 2).unwrap();
        let f = |p: Point| (p.x + 2.0 * p.y).sin();
        let c = l2_project_cell(f, &b, &rule, 2).unwrap();
        let res = l2_project_cell(|p| f(p) - b.combine(c.as_slice(), p), &b, &rule, 2).unwrap();
        assert!(res.amax() < 1e-12);
    }

    #[test]
    fn sliver_pieces_are_orthonormal() {
        let mesh = build_uniform_mesh(Rectangle::unit_square(), 8).unwrap();
        let h = 0.125;
        for frac in [1e-1f64, 1e-3, 1e-6] {
            let b0 = 2.0 * h + frac.sqrt() * h;
            let ls = LevelSet::horizontal_line(b0, Subdomain::One);
            let topo = classify_elements(&mesh, &ls, DEFAULT_SNAP_TOL).unwrap();
            for cut in topo.cut_elements() {
                for side in Subdomain::BOTH {
                    let rule =
                        element_rule(&mesh, &topo, &ls, cut.element, side, 6, 1e-10).unwrap();
                    for k in 1..=3 {
                        let b = PieceBasis::new(&rule, k).unwrap();
                        let g = b.gram(&rule);
                        assert!((g - DMatrix::identity(b.dim(), b.dim())).amax() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn segment_basis_is_orthonormal() {
        let (a, b) = (Point::new(0.2, 0.1), Point::new(0.5, 0.3));
        let rule = map_segment(&segment_rule(10).unwrap(), a, b);
        for k in 0..=4 {
            let basis = FaceBasis::Segment(SegmentBasis::new(a, b, k));
            let g = basis.gram(&rule);
            assert!((g - DMatrix::identity(k + 1, k + 1)).amax() < 1e-13);
        }
    }

    #[test]
    fn edge_projection_examples() {
        let (a, b) = (Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        let rule = map_segment(&segment_rule(8).unwrap(), a, b);
        let basis = FaceBasis::Segment(SegmentBasis::new(a, b, 0));
        let c = l2_project_edge(|p| p.x, &basis, &rule);
        assert!((basis.combine(c.as_slice(), Point::new(0.3, 0.0)) - 0.5).abs() < 1e-15);
        let c = l2_project_edge(|_| 2.5, &basis, &rule);
        assert!((basis.combine(c.as_slice(), Point::new(0.9, 0.0)) - 2.5).abs() < 1e-15);

        let basis = FaceBasis::Segment(SegmentBasis::new(a, b, 2));
        let g = |p: Point| (3.0 * p.x).exp();
        let c = l2_project_edge(g, &basis, &rule);
        let residual = l2_project_edge(|p| g(p) - basis.combine(c.as_slice(), p), &basis, &rule);
        assert!(residual.amax() < 1e-12);
    }

    #[test]
    fn straight_interface_ranks() {
        let horizontal = (Point::new(0.1, 0.2031), Point::new(0.2, 0.2031));
        let tilted = (Point::new(0.3, 0.43), Point::new(0.3625, 0.4925));
        for (a, b) in [horizontal, tilted] {
            let rule = map_segment(&segment_rule(8).unwrap(), a, b);
            for (k, rank) in [(0, 1), (1, 2), (2, 3), (3, 4)] {
                let basis = InterfaceTraceBasis::new(a, b, &rule, k, TRACE_DROP_TOL).unwrap();
                assert_eq!(basis.rank(), rank);
                assert!(!basis.rank_deficient());
                let basis = FaceBasis::Interface(basis);
                let g = basis.gram(&rule);
                assert!((g - DMatrix::identity(rank, rank)).amax() < 1e-10);
                // the span is all of P_k along the segment
                let lin = if k == 0 { 0.0 } else { 1.0 };
                let poly = |p: Point| (p.x - 0.2 * p.y).powi(k as i32) + lin * p.y;
                let c = l2_project_edge(poly, &basis, &rule);
                let misfit = rule.integrate(|p| (poly(p) - basis.combine(c.as_slice(), p)).powi(2));
                assert!(misfit.sqrt() < 1e-12, "k {k} misfit {misfit:e}");
            }
        }
    }

    #[test]
    fn circular_arc_rank_matches_singular_values() {
        let r0 = 3f64.sqrt() / 8.0;
        for n in [8, 32, 128] {
            let mesh = build_uniform_mesh(Rectangle::unit_square(), n).unwrap();
            let ls = LevelSet::circle(Point::new(0.5, 0.5), r0, Subdomain::One);
            let topo = classify_elements(&mesh, &ls, DEFAULT_SNAP_TOL).unwrap();
            for cut in topo.cut_elements().iter().step_by(7) {
                let rule = interface_rule(&mesh, cut, &ls, 8, 1e-12).unwrap();
                for k in [1, 2] {
                    let basis =
                        InterfaceTraceBasis::new(cut.start(), cut.end(), &rule, k, TRACE_DROP_TOL)
                            .unwrap();
                    // oracle: singular values of the column-normalized monomial Gram matrix
                    let gram = basis.monomial_gram(&rule);
                    let d = gram.diagonal().map(|x| 1.0 / x.sqrt());
                    let scaled = DMatrix::from_diagonal(&d) * gram * DMatrix::from_diagonal(&d);
                    let sv = scaled.singular_values();
                    let count = sv
                        .iter()
                        .filter(|&&s| s > TRACE_DROP_TOL * sv.max())
                        .count();
                    assert_eq!(basis.rank(), count, "n {n} k {k}");
                    assert!(
                        basis.rank() >= 3 && basis.rank() <= 2 * k + 1,
                        "n {n} k {k}"
                    );
                    if k == 1 {
                        assert_eq!(basis.rank(), 3);
                    }
                    let g = FaceBasis::Interface(basis.clone()).gram(&rule);
                    let dev = (g - DMatrix::identity(basis.rank(), basis.rank())).amax();
                    assert!(dev < 1e-10, "n {n} k {k} rank {} dev {dev:e}", basis.rank());
                }
            }
        }
    }

    #[test]
    fn jump_lift_examples() {
        let (a, b) = (Point::new(0.1, 0.2031), Point::new(0.2, 0.2031));
        let rule = map_segment(&segment_rule(8).unwrap(), a, b);
        let basis =
            FaceBasis::Interface(InterfaceTraceBasis::new(a, b, &rule, 1, TRACE_DROP_TOL).unwrap());
        assert_eq!(jump_lift(|_| 0.0, &basis, &rule).amax(), 0.0);
        // g_D = 1: coefficient vector of the constant, (sqrt(L), 0)
        let l = jump_lift(|_| 1.0, &basis, &rule);
        let len = (b - a).norm();
        assert!((l[0].abs() - len.sqrt()).abs() < 1e-14);
        assert!(l[1].abs() < 1e-14);
        assert!((basis.combine(l.as_slice(), Point::new(0.17, 0.2031)) - 1.0).abs() < 1e-13);
    }
}
