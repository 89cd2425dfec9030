use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Uniform 1-D grid on an open interval with the singular kernel
/// `|x - y|^{-1-ps}` pre-integrated against its piecewise-constant cells.
///
/// Interior node `i` sits at `left + (i + 1) h` with `h = (right - left) / (n_nodes + 1)`.
/// The boundary nodes `left` and `right` carry the value zero. Each interior
/// node owns the cell between the midpoints to its neighbours; the first and
/// last cells extend to the boundary, so the cells tile the domain exactly
/// and a nodal vector is a genuine step function that vanishes off the domain.
/// Step functions have finite fractional energy because `ps < 1`.
#[derive(Debug, Clone)]
pub struct GridDomain {
    left: f64,
    right: f64,
    n_nodes: usize,
    h: f64,
    s: f64,
    p: f64,
    edges: Vec<f64>,
    /// `W[i][j] = ∫_{c_i}∫_{c_j} |x-y|^{-1-ps}`, zero on the diagonal.
    pair: Vec<f64>,
    /// `T[i] = ∫_{c_i}∫_{R \ Ω} |x-y|^{-1-ps}`.
    tail: Vec<f64>,
}

impl GridDomain {
    pub fn new(left: f64, right: f64, n_nodes: usize, s: f64, p: f64) -> Result<Self> {
        if !(left.is_finite() && right.is_finite()) || left >= right {
            return Err(Error::BadBounds { left, right });
        }
        if n_nodes == 0 {
            return Err(Error::InvalidGrid("n_nodes must be at least 1".into()));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidGrid(format!("s = {s} must lie in (0, 1)")));
        }
        if !(p >= 2.0) || !p.is_finite() {
            return Err(Error::InvalidGrid(format!("p = {p} must be >= 2")));
        }
        let ps = p * s;
        if !(ps < 1.0 && 2.0 * ps > 1.0) {
            return Err(Error::OrderWindow { ps });
        }

        let h = (right - left) / (n_nodes as f64 + 1.0);
        let mut edges = Vec::with_capacity(n_nodes + 1);
        edges.push(left);
        for i in 1..n_nodes {
            edges.push(left + (i as f64 + 0.5) * h);
        }
        edges.push(right);

        let alpha = ps;
        let beta = 1.0 - alpha;
        let norm = 1.0 / (alpha * beta);
        let g = |z: f64| if z > 0.0 { z.powf(beta) } else { 0.0 };

        let mut pair = vec![0.0; n_nodes * n_nodes];
        for i in 0..n_nodes {
            let (a, b) = (edges[i], edges[i + 1]);
            for j in (i + 1)..n_nodes {
                let (c, d) = (edges[j], edges[j + 1]);
                let w = norm * ((g(c - a) - g(c - b)) - (g(d - a) - g(d - b)));
                pair[i * n_nodes + j] = w;
                pair[j * n_nodes + i] = w;
            }
        }

        let tail = (0..n_nodes)
            .map(|i| {
                let (a, b) = (edges[i], edges[i + 1]);
                norm * ((g(b - left) - g(a - left)) + (g(right - a) - g(right - b)))
            })
            .collect();

        Ok(Self {
            left,
            right,
            n_nodes,
            h,
            s,
            p,
            edges,
            pair,
            tail,
        })
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Measure of the domain.
    pub fn length(&self) -> f64 {
        self.right - self.left
    }

    /// Fractional Sobolev critical exponent `p/(1 - ps)` in one dimension.
    pub fn critical_exponent(&self) -> f64 {
        self.p / (1.0 - self.p * self.s)
    }

    pub fn node(&self, i: usize) -> f64 {
        self.left + (i as f64 + 1.0) * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes).map(|i| self.node(i))
    }

    /// Cell boundaries, `n_nodes + 1` values from `left` to `right`.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn cell_width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn cell_widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn pair_weight(&self, i: usize, j: usize) -> f64 {
        self.pair[i * self.n_nodes + j]
    }

    pub(crate) fn pair_row(&self, i: usize) -> &[f64] {
        &self.pair[i * self.n_nodes..(i + 1) * self.n_nodes]
    }

    pub fn tail_weight(&self, i: usize) -> f64 {
        self.tail[i]
    }

    pub(crate) fn tails(&self) -> &[f64] {
        &self.tail
    }
}

/// Nodal values of a function on a [`GridDomain`], extended by zero outside
/// the domain.
#[derive(Debug, Clone)]
pub struct DiscreteFunction {
    grid: Arc<GridDomain>,
    values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(grid: Arc<GridDomain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::GridMismatch {
                expected: grid.n_nodes(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("nodal values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<GridDomain>) -> Self {
        let values = vec![0.0; grid.n_nodes()];
        Self { grid, values }
    }

    pub fn from_fn(grid: Arc<GridDomain>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<GridDomain> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Same grid, new values. Panics if the length differs.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.with_values(self.values.iter().map(|v| c * v).collect())
    }

    pub fn abs(&self) -> Self {
        self.with_values(self.values.iter().map(|v| v.abs()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(x, u(x))` pairs including the two boundary zeros.
    pub fn profile(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.values.len() + 2);
        out.push((self.grid.left(), 0.0));
        out.extend(self.grid.nodes().zip(self.values.iter().copied()));
        out.push((self.grid.right(), 0.0));
        out
    }
}

impl Serialize for DiscreteFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.values.serialize(serializer)
    }
}
