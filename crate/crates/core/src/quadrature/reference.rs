use crate::error::{Error, Result};
use crate::Point;

use super::QuadRule;

/// Highest polynomial degree served by the reference rules.
pub const MAX_DEGREE: usize = 30;

/// One-dimensional rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// `n`-point Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d.is_finite() { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] to [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for m in 2..=n {
        let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Legendre polynomial `P_n(x)` on `[-1, 1]`.
pub fn legendre(n: usize, x: f64) -> f64 {
    legendre_with_derivative(n, x).0
}

/// Gauss–Legendre rule on `[0, 1]` exact for polynomials of degree `degree`.
pub fn segment_rule(degree: usize) -> Result<SegmentRule> {
    if degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(degree));
    }
    let (nodes, weights) = gauss_legendre(degree / 2 + 1);
    Ok(SegmentRule {
        nodes,
        weights,
        degree,
    })
}

/// Rule on the reference triangle `(0,0), (1,0), (0,1)`.
///
/// Centroid rule up to degree one, collapsed Gauss product rule above.
pub fn triangle_rule(degree: usize) -> Result<QuadRule> {
    if degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(degree));
    }
    if degree <= 1 {
        return Ok(QuadRule::new(
            vec![Point::new(1.0 / 3.0, 1.0 / 3.0)],
            vec![0.5],
            degree,
        ));
    }
    // x = u, y = v (1 - u), dx dy = (1 - u) du dv
    let (nu, wu) = gauss_legendre((degree + 2).div_ceil(2));
    let (nv, wv) = gauss_legendre((degree + 1).div_ceil(2));
    let mut points = Vec::with_capacity(nu.len() * nv.len());
    let mut weights = Vec::with_capacity(nu.len() * nv.len());
    for (&u, &a) in nu.iter().zip(&wu) {
        for (&v, &b) in nv.iter().zip(&wv) {
            points.push(Point::new(u, v * (1.0 - u)));
            weights.push(a * b * (1.0 - u));
        }
    }
    Ok(QuadRule::new(points, weights, degree))
}

/// Maps the reference rule onto the triangle `[a, b, c]`.
pub fn map_triangle(reference: &QuadRule, [a, b, c]: [Point; 3]) -> QuadRule {
    let (e1, e2) = (b - a, c - a);
    let jac = (e1.x * e2.y - e1.y * e2.x).abs();
    let points = reference
        .points
        .iter()
        .map(|p| a + p.x * e1 + p.y * e2)
        .collect();
    let weights = reference.weights.iter().map(|w| w * jac).collect();
    QuadRule::new(points, weights, reference.degree)
}

/// Gauss rule on the straight segment `[a, b]`.
pub fn map_segment(reference: &SegmentRule, a: Point, b: Point) -> QuadRule {
    let len = (b - a).norm();
    let points = reference.nodes.iter().map(|&t| a + t * (b - a)).collect();
    let weights = reference.weights.iter().map(|w| w * len).collect();
    QuadRule::new(points, weights, reference.degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_nodes_are_symmetric_and_sum_to_one() {
        for n in 1..=16 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for i in 0..n {
                assert!((x[i] + x[n - 1 - i] - 1.0).abs() < 1e-14);
                assert!(w[i] > 0.0);
            }
        }
    }

    #[test]
    fn segment_degree_one_is_midpoint() {
        let r = segment_rule(1).unwrap();
        assert_eq!(r.nodes.len(), 1);
        assert!((r.nodes[0] - 0.5).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn segment_degree_three_integrates_cubic() {
        let r = segment_rule(3).unwrap();
        assert_eq!(r.nodes.len(), 2);
        let s: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.powi(3))
            .sum();
        assert!((s - 0.25).abs() < 1e-15);
    }

    #[test]
    fn segment_degree_nine_integrates_cosine() {
        let r = segment_rule(9).unwrap();
        let s: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.cos())
            .sum();
        assert!((s - 1f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn segment_exactness_all_degrees() {
        for deg in 0..=MAX_DEGREE {
            let r = segment_rule(deg).unwrap();
            for p in 0..=deg {
                let s: f64 = r
                    .nodes
                    .iter()
                    .zip(&r.weights)
                    .map(|(x, w)| w * x.powi(p as i32))
                    .sum();
                let exact = 1.0 / (p + 1) as f64;
                assert!(
                    (s - exact).abs() < 1e-13 * exact.max(1e-3),
                    "deg {deg} p {p}"
                );
            }
        }
    }

    #[test]
    fn triangle_degree_one_is_centroid() {
        let r = triangle_rule(1).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.weights[0], 0.5);
        assert!((r.points[0] - Point::new(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-16);
    }

    #[test]
    fn triangle_degree_five_integrates_x2y3() {
        // int_0^1 int_0^{1-x} x^2 y^3 dy dx = B(3, 5) / 4 = 1/420
        let r = triangle_rule(5).unwrap();
        let s = r.integrate(|p| p.x * p.x * p.y.powi(3));
        assert!((s - 1.0 / 420.0).abs() < 1e-15);
        assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }

    #[test]
    fn triangle_exactness_all_monomials() {
        // int x^a y^b over the reference triangle = a! b! / (a + b + 2)!
        for deg in 0..=24 {
            let r = triangle_rule(deg).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for a in 0..=deg {
                for b in 0..=deg - a {
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    let s = r.integrate(|p| p.x.powi(a as i32) * p.y.powi(b as i32));
                    assert!((s - exact).abs() < 1e-12 * exact, "deg {deg} x^{a} y^{b}");
                }
            }
        }
    }

    #[test]
    fn unsupported_degree() {
        assert!(matches!(
            triangle_rule(MAX_DEGREE + 1),
            Err(Error::UnsupportedDegree(_))
        ));
        assert!(matches!(
            segment_rule(MAX_DEGREE + 1),
            Err(Error::UnsupportedDegree(_))
        ));
    }
}
