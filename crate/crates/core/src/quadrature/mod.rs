//! Reference quadrature and physical rules on elements, cut pieces, edges and interface segments.

mod cut;
mod reference;

pub use cut::{
    arc_samples, cut_edge_rule, edge_side_rule, element_rule, interface_edge_rule, interface_rule,
    ArcSample, DEFAULT_GEO_TOL,
};
pub use reference::{
    gauss_legendre, legendre, map_segment, map_triangle, segment_rule, triangle_rule, SegmentRule,
    MAX_DEGREE,
};

use crate::{Point, Vector};

/// Quadrature rule in physical coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly on straight-sided domains.
    pub degree: usize,
    /// Unit normals per point, for interface rules.
    pub normals: Option<Vec<Vector>>,
}

impl QuadRule {
    pub fn new(points: Vec<Point>, weights: Vec<f64>, degree: usize) -> Self {
        debug_assert_eq!(points.len(), weights.len());
        Self {
            points,
            weights,
            degree,
            normals: None,
        }
    }

    pub fn with_normals(mut self, normals: Vec<Vector>) -> Self {
        debug_assert_eq!(normals.len(), self.points.len());
        self.normals = Some(normals);
        self
    }

    pub fn empty(degree: usize) -> Self {
        Self::new(Vec::new(), Vec::new(), degree)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sum of the weights.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }

    /// Appends the points of `other`.
    pub fn extend(&mut self, other: QuadRule) {
        if self.points.is_empty() && self.normals.is_none() {
            self.normals = other.normals.as_ref().map(|_| Vec::new());
        }
        self.points.extend(other.points);
        self.weights.extend(other.weights);
        match (&mut self.normals, other.normals) {
            (Some(a), Some(b)) => a.extend(b),
            (None, None) => {}
            _ => panic!("cannot merge rules with and without normals"),
        }
    }
}
