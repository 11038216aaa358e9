//! Exact k-th-nearest-neighbor distances.
//!
//! Brute force is the reference path. [`KdTree`] is an exact spatial index that
//! returns the same k-th distance values (it evaluates the same distance
//! function on every candidate it keeps), used for large, low-dimensional sets.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::points::{euclidean, PointSet};
use crate::error::{Error, Result};

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborBackend {
    BruteForce,
    KdTree,
    /// k-d tree for sets with more than 256 points in at most 16 dimensions,
    /// brute force otherwise.
    #[default]
    Auto,
}

impl NeighborBackend {
    fn use_tree(self, n: usize, d: usize) -> bool {
        match self {
            NeighborBackend::BruteForce => false,
            NeighborBackend::KdTree => true,
            NeighborBackend::Auto => n > 256 && d <= 16,
        }
    }
}

fn check_k(k: usize, available: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::param("k must be >= 1"));
    }
    if available < k {
        return Err(Error::InsufficientSamples { needed: k, available });
    }
    Ok(())
}

/// k smallest values seen so far, ascending.
struct KBest {
    k: usize,
    values: Vec<f64>,
}

impl KBest {
    fn new(k: usize) -> Self {
        Self { k, values: Vec::with_capacity(k + 1) }
    }

    fn bound(&self) -> f64 {
        if self.values.len() < self.k {
            f64::INFINITY
        } else {
            self.values[self.k - 1]
        }
    }

    fn offer(&mut self, v: f64) {
        if self.values.len() == self.k && v >= self.values[self.k - 1] {
            return;
        }
        let pos = self.values.partition_point(|&x| x <= v);
        self.values.insert(pos, v);
        self.values.truncate(self.k);
    }

    fn kth(&self) -> f64 {
        self.values[self.k - 1]
    }
}

fn brute_kth(query: ArrayView1<'_, f64>, within: &PointSet, k: usize, skip: Option<usize>) -> f64 {
    let mut dists: Vec<f64> = (0..within.n())
        .filter(|&j| Some(j) != skip)
        .map(|j| euclidean(query, within.row(j)))
        .collect();
    let (_, kth, _) = dists.select_nth_unstable_by(k - 1, f64::total_cmp);
    *kth
}

/// k-th smallest distance from row `query_index` of `within` to the rows of
/// `within`, skipping the query's own row when `exclude_self` is set.
pub fn kth_nn_distance(query_index: usize, within: &PointSet, k: usize, exclude_self: bool) -> Result<f64> {
    if query_index >= within.n() {
        return Err(Error::param(format!(
            "query index {query_index} out of range for {} points",
            within.n()
        )));
    }
    let available = within.n() - usize::from(exclude_self);
    check_k(k, available)?;
    let skip = exclude_self.then_some(query_index);
    Ok(brute_kth(within.row(query_index), within, k, skip))
}

/// k-th smallest distance from an arbitrary query point to the rows of `within`.
pub fn kth_nn_distance_to(query: ArrayView1<'_, f64>, within: &PointSet, k: usize) -> Result<f64> {
    if query.len() != within.d() {
        return Err(Error::DimensionMismatch { expected: within.d(), found: query.len() });
    }
    check_k(k, within.n())?;
    Ok(brute_kth(query, within, k, None))
}

/// For every point, the k-th nearest-neighbor distance within its own set,
/// excluding itself.
pub fn kth_distances_within(set: &PointSet, k: usize, backend: NeighborBackend) -> Result<Vec<f64>> {
    check_k(k, set.n() - 1)?;
    if backend.use_tree(set.n(), set.d()) {
        let tree = KdTree::build(set);
        Ok((0..set.n()).map(|i| tree.kth_distance(set.row(i), k, Some(i))).collect())
    } else {
        Ok((0..set.n()).map(|i| brute_kth(set.row(i), set, k, Some(i))).collect())
    }
}

/// For every row of `queries`, the k-th nearest-neighbor distance among the
/// rows of `reference`.
pub fn kth_distances_across(
    queries: &PointSet,
    reference: &PointSet,
    k: usize,
    backend: NeighborBackend,
) -> Result<Vec<f64>> {
    if queries.d() != reference.d() {
        return Err(Error::DimensionMismatch { expected: reference.d(), found: queries.d() });
    }
    check_k(k, reference.n())?;
    if backend.use_tree(reference.n(), reference.d()) {
        let tree = KdTree::build(reference);
        Ok((0..queries.n()).map(|i| tree.kth_distance(queries.row(i), k, None)).collect())
    } else {
        Ok((0..queries.n()).map(|i| brute_kth(queries.row(i), reference, k, None)).collect())
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { dim: usize, value: f64, left: usize, right: usize },
}

/// Exact k-d tree over a point set; splits on the widest dimension at the median.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Array2<f64>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn build(set: &PointSet) -> Self {
        let mut tree = Self {
            points: set.view().to_owned(),
            order: (0..set.n()).collect(),
            nodes: Vec::new(),
        };
        tree.build_node(0, set.n());
        tree
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let d = self.points.ncols();
        let mut best_dim = 0;
        let mut best_spread = f64::NEG_INFINITY;
        for dim in 0..d {
            let (lo, hi) = self.order[start..end].iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), &i| {
                    let v = self.points[[i, dim]];
                    (lo.min(v), hi.max(v))
                },
            );
            if hi - lo > best_spread {
                best_spread = hi - lo;
                best_dim = dim;
            }
        }
        if best_spread <= 0.0 {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[[a, best_dim]].total_cmp(&points[[b, best_dim]])
        });
        let value = self.points[[self.order[mid], best_dim]];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split { dim: best_dim, value, left, right };
        id
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    /// k-th smallest distance from `query` to the indexed points, skipping the
    /// point with original row index `skip`. Caller guarantees enough points.
    pub fn kth_distance(&self, query: ArrayView1<'_, f64>, k: usize, skip: Option<usize>) -> f64 {
        let mut best = KBest::new(k);
        self.visit(0, query, skip, &mut best);
        best.kth()
    }

    fn visit(&self, node: usize, query: ArrayView1<'_, f64>, skip: Option<usize>, best: &mut KBest) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if Some(i) != skip {
                        best.offer(euclidean(query, self.points.row(i)));
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let diff = query[dim] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.visit(near, query, skip, best);
                if diff.abs() <= best.bound() {
                    self.visit(far, query, skip, best);
                }
            }
        }
    }
}
