//! Antichain of minimal configurations with dominance queries.
//!
//! An [`Antichain`] stores pairwise incomparable configurations representing
//! an upward-closed set by its minimal elements, and answers the query
//! "does some stored u satisfy u ≤ c". Two backends give identical answers:
//! a linear scan over the stored elements, and a balanced k-d tree over the
//! count vectors with subtree-minimum pruning. Every invoked configuration
//! comparison is counted, so the cost of either backend can be read off a
//! run; only correctness is contractual, the polylog query bound of the
//! hierarchical structure is observed rather than asserted.

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::model::Configuration;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("elements do not form an antichain: element {a} is ≤ element {b}")]
    NotAnAntichain { a: usize, b: usize },
}

/// Which query structure backs an [`Antichain`].
///
/// The linear scan is the reference implementation and the sensible default
/// below a few dozen elements; the tree pays off on large antichains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexBackend {
    Naive,
    Tree,
}

/// Count of full-configuration comparisons performed by an index instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryStats {
    pub comparisons: u64,
}

/// Set of pairwise ≤-incomparable configurations of one dimension.
#[derive(Debug)]
pub struct Antichain {
    dim: usize,
    elements: Vec<Configuration>,
    backend: IndexBackend,
    tree: KdTree,
    comparisons: AtomicU64,
}

impl Antichain {
    /// Empty antichain with the naive backend.
    pub fn new(dim: usize) -> Self {
        Self::with_backend(dim, IndexBackend::Naive)
    }

    pub fn with_backend(dim: usize, backend: IndexBackend) -> Self {
        Self {
            dim,
            elements: Vec::new(),
            backend,
            tree: KdTree::new(dim),
            comparisons: AtomicU64::new(0),
        }
    }

    /// Builds an index over `elements`, validating that they are pairwise
    /// incomparable.
    pub fn from_elements(
        dim: usize,
        elements: Vec<Configuration>,
        backend: IndexBackend,
    ) -> Result<Self, IndexError> {
        for e in &elements {
            if e.dim() != dim {
                return Err(IndexError::DimensionMismatch { expected: dim, got: e.dim() });
            }
        }
        for (i, a) in elements.iter().enumerate() {
            for (j, b) in elements.iter().enumerate() {
                if i != j && a.le(b) {
                    return Err(IndexError::NotAnAntichain { a: i, b: j });
                }
            }
        }
        let mut index = Self::with_backend(dim, backend);
        index.elements = elements;
        if backend == IndexBackend::Tree {
            index.tree.bulk_build(&index.elements, &index.comparisons);
        }
        Ok(index)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn backend(&self) -> IndexBackend {
        self.backend
    }

    /// Stored elements in insertion order.
    pub fn elements(&self) -> &[Configuration] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<Configuration> {
        self.elements
    }

    pub fn stats(&self) -> QueryStats {
        QueryStats { comparisons: self.comparisons.load(Ordering::Relaxed) }
    }

    fn check_dim(&self, c: &Configuration) -> Result<(), IndexError> {
        if c.dim() != self.dim {
            return Err(IndexError::DimensionMismatch { expected: self.dim, got: c.dim() });
        }
        Ok(())
    }

    /// True iff some stored element u satisfies u ≤ c (equality counts).
    ///
    /// Read-only; may be called concurrently from several threads.
    pub fn dominates(&self, c: &Configuration) -> Result<bool, IndexError> {
        self.check_dim(c)?;
        match self.backend {
            IndexBackend::Naive => Ok(self.dominates_naive(c)),
            IndexBackend::Tree => Ok(self.tree.exists_le(c, &self.comparisons)),
        }
    }

    fn dominates_naive(&self, c: &Configuration) -> bool {
        for u in &self.elements {
            self.comparisons.fetch_add(1, Ordering::Relaxed);
            if u.le(c) {
                return true;
            }
        }
        false
    }

    /// Inserts a configuration the caller has already established to be
    /// minimal. The antichain invariant is the caller's obligation here and
    /// is verified in debug builds only: `c` must neither be dominated by nor
    /// dominate any stored element.
    pub fn insert(&mut self, c: Configuration) -> Result<(), IndexError> {
        self.check_dim(&c)?;
        #[cfg(debug_assertions)]
        {
            for (i, u) in self.elements.iter().enumerate() {
                debug_assert!(
                    !u.le(&c),
                    "insert precondition violated: stored element #{i} {:?} ≤ inserted {:?}",
                    u.counts(),
                    c.counts()
                );
                debug_assert!(
                    !c.le(u),
                    "insert precondition violated: inserted {:?} ≤ stored element #{i} {:?}",
                    c.counts(),
                    u.counts()
                );
            }
        }
        if self.backend == IndexBackend::Tree {
            self.tree.insert(c.clone(), &self.elements, &self.comparisons);
        }
        self.elements.push(c);
        Ok(())
    }

    /// Elements sorted by size, then lexicographically on the count vector in
    /// species order. Deterministic for a fixed element set.
    pub fn canonical_list(&self) -> Vec<Configuration> {
        let mut out = self.elements.clone();
        out.sort_unstable_by(|a, b| a.canonical_cmp(b));
        out
    }
}

/// The ≤-minimal elements of an arbitrary configuration set, as an antichain
/// with the naive backend.
pub fn prune_to_antichain<I>(dim: usize, configs: I) -> Result<Antichain, IndexError>
where
    I: IntoIterator<Item = Configuration>,
{
    let mut sorted: Vec<Configuration> = Vec::new();
    for c in configs {
        if c.dim() != dim {
            return Err(IndexError::DimensionMismatch { expected: dim, got: c.dim() });
        }
        sorted.push(c);
    }
    // Size-ascending processing means any dominator of a later candidate is
    // already stored; equal-size distinct vectors are incomparable.
    sorted.sort_unstable_by(|a, b| a.canonical_cmp(b));
    sorted.dedup();
    let mut out = Antichain::new(dim);
    for c in sorted {
        if !out.dominates(&c)? {
            out.insert(c)?;
        }
    }
    Ok(out)
}

/// Balanced k-d tree over count vectors answering "exists point ≤ query".
///
/// Each internal node carries the componentwise minimum of its subtree, which
/// prunes whole branches: a subtree can only contain a dominating point if its
/// minimum is ≤ the query. Inserts descend by the node's split axis and the
/// tree is rebuilt from scratch whenever it doubles, keeping depth logarithmic
/// without per-insert rebalancing.
#[derive(Debug)]
struct KdTree {
    dim: usize,
    nodes: Vec<KdNode>,
    root: Option<usize>,
    built_len: usize,
}

#[derive(Debug)]
struct KdNode {
    point: Configuration,
    subtree_min: Configuration,
    axis: usize,
    lo: Option<usize>,
    hi: Option<usize>,
}

impl KdTree {
    fn new(dim: usize) -> Self {
        Self { dim, nodes: Vec::new(), root: None, built_len: 0 }
    }

    fn bulk_build(&mut self, points: &[Configuration], counter: &AtomicU64) {
        self.nodes.clear();
        self.root = None;
        self.nodes.reserve(points.len());
        let mut work: Vec<Configuration> = points.to_vec();
        self.root = self.build_rec(&mut work, counter);
        self.built_len = self.nodes.len();
    }

    /// Splits on the axis of maximum spread, at the median point under the
    /// total order (axis value, full count vector).
    fn build_rec(&mut self, points: &mut [Configuration], counter: &AtomicU64) -> Option<usize> {
        if points.is_empty() {
            return None;
        }
        let axis = max_spread_axis(points, self.dim);
        let compares = std::cell::Cell::new(0u64);
        points.sort_unstable_by(|a, b| {
            compares.set(compares.get() + 1);
            a.count(axis).cmp(&b.count(axis)).then_with(|| a.counts().cmp(b.counts()))
        });
        counter.fetch_add(compares.get(), Ordering::Relaxed);
        let mid = points.len() / 2;
        let point = points[mid].clone();
        let subtree_min = componentwise_min(points);
        let idx = self.nodes.len();
        self.nodes.push(KdNode { point, subtree_min, axis, lo: None, hi: None });
        // Split copies keep the recursion simple; antichains are small.
        let mut lo_part: Vec<Configuration> = points[..mid].to_vec();
        let mut hi_part: Vec<Configuration> = points[mid + 1..].to_vec();
        let lo = self.build_rec(&mut lo_part, counter);
        let hi = self.build_rec(&mut hi_part, counter);
        self.nodes[idx].lo = lo;
        self.nodes[idx].hi = hi;
        Some(idx)
    }

    fn insert(&mut self, point: Configuration, existing: &[Configuration], counter: &AtomicU64) {
        // Rebuild from scratch once the tree has doubled since the last
        // build; between rebuilds depth stays within a constant of optimal.
        if self.nodes.len() >= 4 && self.nodes.len() + 1 >= self.built_len * 2 {
            let mut all: Vec<Configuration> = existing.to_vec();
            all.push(point);
            self.bulk_build(&all, counter);
            return;
        }
        let new_idx = self.nodes.len();
        self.nodes.push(KdNode {
            subtree_min: point.clone(),
            axis: 0,
            lo: None,
            hi: None,
            point,
        });
        let Some(mut cur) = self.root else {
            self.root = Some(new_idx);
            self.built_len = 1;
            return;
        };
        loop {
            counter.fetch_add(1, Ordering::Relaxed);
            if let Some(lowered) =
                lowered_min(self.nodes[cur].subtree_min.counts(), self.nodes[new_idx].point.counts())
            {
                self.nodes[cur].subtree_min = lowered;
            }
            let axis = self.nodes[cur].axis;
            let goes_lo = match self.nodes[new_idx]
                .point
                .count(axis)
                .cmp(&self.nodes[cur].point.count(axis))
            {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => {
                    self.nodes[new_idx].point.counts() < self.nodes[cur].point.counts()
                }
            };
            let next = if goes_lo { self.nodes[cur].lo } else { self.nodes[cur].hi };
            match next {
                Some(child) => cur = child,
                None => {
                    self.nodes[new_idx].axis = (axis + 1) % self.dim.max(1);
                    if goes_lo {
                        self.nodes[cur].lo = Some(new_idx);
                    } else {
                        self.nodes[cur].hi = Some(new_idx);
                    }
                    break;
                }
            }
        }
    }

    fn exists_le(&self, q: &Configuration, counter: &AtomicU64) -> bool {
        match self.root {
            Some(root) => self.exists_le_rec(root, q, counter),
            None => false,
        }
    }

    fn exists_le_rec(&self, idx: usize, q: &Configuration, counter: &AtomicU64) -> bool {
        let node = &self.nodes[idx];
        let is_leaf = node.lo.is_none() && node.hi.is_none();
        if !is_leaf {
            counter.fetch_add(1, Ordering::Relaxed);
            if !node.subtree_min.le(q) {
                return false;
            }
        }
        counter.fetch_add(1, Ordering::Relaxed);
        if node.point.le(q) {
            return true;
        }
        if let Some(lo) = node.lo {
            if self.exists_le_rec(lo, q, counter) {
                return true;
            }
        }
        if let Some(hi) = node.hi {
            // Everything in the hi subtree has axis count ≥ this node's.
            if node.point.count(node.axis) <= q.count(node.axis)
                && self.exists_le_rec(hi, q, counter)
            {
                return true;
            }
        }
        false
    }
}

fn componentwise_min(points: &[Configuration]) -> Configuration {
    let mut counts = points[0].counts().to_vec();
    for p in &points[1..] {
        for (m, &v) in counts.iter_mut().zip(p.counts()) {
            *m = (*m).min(v);
        }
    }
    Configuration::new(counts).expect("min cannot overflow")
}

/// Componentwise min of `cur` and `point`, or `None` when `cur` is already low
/// enough everywhere.
fn lowered_min(cur: &[u64], point: &[u64]) -> Option<Configuration> {
    if cur.iter().zip(point).all(|(a, b)| a <= b) {
        return None;
    }
    let counts = cur.iter().zip(point).map(|(a, b)| (*a).min(*b)).collect();
    Some(Configuration::new(counts).expect("min cannot overflow"))
}

fn max_spread_axis(points: &[Configuration], dim: usize) -> usize {
    let mut best_axis = 0;
    let mut best_spread = 0;
    for axis in 0..dim {
        let mut min = u64::MAX;
        let mut max = 0;
        for p in points {
            min = min.min(p.count(axis));
            max = max.max(p.count(axis));
        }
        let spread = max.saturating_sub(min);
        if spread > best_spread {
            best_spread = spread;
            best_axis = axis;
        }
    }
    best_axis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(counts: &[u64]) -> Configuration {
        Configuration::new(counts.to_vec()).unwrap()
    }

    // Species order (A, B, Y): AB = (1,1,0), YB = (0,1,1).
    fn ab_yb() -> Antichain {
        Antichain::from_elements(3, vec![cfg(&[1, 1, 0]), cfg(&[0, 1, 1])], IndexBackend::Naive)
            .unwrap()
    }

    #[test]
    fn dominates_componentwise() {
        let index = ab_yb();
        assert!(index.dominates(&cfg(&[2, 3, 1])).unwrap());
        assert!(!index.dominates(&cfg(&[5, 0, 0])).unwrap());
        // equality counts
        assert!(index.dominates(&cfg(&[1, 1, 0])).unwrap());
    }

    #[test]
    fn dominates_dimension_mismatch() {
        let index = ab_yb();
        assert!(matches!(
            index.dominates(&cfg(&[1, 1])),
            Err(IndexError::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn insert_extends_antichain() {
        let mut index = Antichain::new(3);
        index.insert(cfg(&[1, 1, 0])).unwrap();
        index.insert(cfg(&[0, 1, 1])).unwrap();
        assert_eq!(index.len(), 2);
    }

    #[test]
    #[cfg(debug_assertions)]
    #[should_panic(expected = "insert precondition violated")]
    fn insert_rejects_duplicate_in_debug() {
        let mut index = Antichain::new(3);
        index.insert(cfg(&[1, 1, 0])).unwrap();
        let _ = index.insert(cfg(&[1, 1, 0]));
    }

    #[test]
    #[cfg(debug_assertions)]
    #[should_panic(expected = "insert precondition violated")]
    fn insert_rejects_dominated_in_debug() {
        let mut index = Antichain::new(3);
        index.insert(cfg(&[1, 1, 0])).unwrap();
        let _ = index.insert(cfg(&[2, 1, 0]));
    }

    #[test]
    fn prune_keeps_minimal_elements() {
        let pruned = prune_to_antichain(
            3,
            vec![cfg(&[1, 1, 0]), cfg(&[2, 1, 0]), cfg(&[0, 1, 1])],
        )
        .unwrap();
        assert_eq!(pruned.canonical_list(), vec![cfg(&[0, 1, 1]), cfg(&[1, 1, 0])]);
    }

    #[test]
    fn prune_empty_and_duplicates() {
        let empty = prune_to_antichain(3, Vec::new()).unwrap();
        assert!(empty.is_empty());
        let dup = prune_to_antichain(3, vec![cfg(&[1, 1, 0]), cfg(&[1, 1, 0])]).unwrap();
        assert_eq!(dup.len(), 1);
    }

    #[test]
    fn prune_is_idempotent() {
        let first = prune_to_antichain(
            3,
            vec![cfg(&[1, 1, 0]), cfg(&[2, 1, 0]), cfg(&[0, 1, 1]), cfg(&[0, 2, 2])],
        )
        .unwrap();
        let again = prune_to_antichain(3, first.canonical_list()).unwrap();
        assert_eq!(first.canonical_list(), again.canonical_list());
    }

    #[test]
    fn canonical_list_order() {
        // ascending tuple order puts (0,1,1) before (1,1,0)
        let index = ab_yb();
        assert_eq!(index.canonical_list(), vec![cfg(&[0, 1, 1]), cfg(&[1, 1, 0])]);
    }

    #[test]
    fn from_elements_rejects_comparable() {
        let err = Antichain::from_elements(
            3,
            vec![cfg(&[1, 1, 0]), cfg(&[1, 2, 0])],
            IndexBackend::Naive,
        )
        .unwrap_err();
        assert!(matches!(err, IndexError::NotAnAntichain { .. }));
    }

    #[test]
    fn tree_matches_naive_on_small_cases() {
        let elems = vec![cfg(&[1, 1, 0]), cfg(&[0, 1, 1]), cfg(&[3, 0, 0]), cfg(&[0, 0, 2])];
        let naive = Antichain::from_elements(3, elems.clone(), IndexBackend::Naive).unwrap();
        let tree = Antichain::from_elements(3, elems, IndexBackend::Tree).unwrap();
        for a in 0..4u64 {
            for b in 0..4u64 {
                for y in 0..4u64 {
                    let q = cfg(&[a, b, y]);
                    assert_eq!(
                        naive.dominates(&q).unwrap(),
                        tree.dominates(&q).unwrap(),
                        "mismatch at {:?}",
                        q.counts()
                    );
                }
            }
        }
    }

    #[test]
    fn tree_incremental_inserts_match_naive() {
        let mut naive = Antichain::with_backend(2, IndexBackend::Naive);
        let mut tree = Antichain::with_backend(2, IndexBackend::Tree);
        // staircase antichain: (i, 9−i)
        for i in 0..10u64 {
            naive.insert(cfg(&[i, 9 - i])).unwrap();
            tree.insert(cfg(&[i, 9 - i])).unwrap();
        }
        for a in 0..12u64 {
            for b in 0..12u64 {
                let q = cfg(&[a, b]);
                assert_eq!(naive.dominates(&q).unwrap(), tree.dominates(&q).unwrap());
            }
        }
    }

    #[test]
    fn upward_closure_of_domination() {
        let index = ab_yb();
        let base = cfg(&[1, 1, 0]);
        assert!(index.dominates(&base).unwrap());
        for extra in [cfg(&[1, 0, 0]), cfg(&[0, 3, 2]), cfg(&[2, 2, 2])] {
            let bigger = base.checked_add(&extra).unwrap();
            assert!(index.dominates(&bigger).unwrap());
        }
    }

    #[test]
    fn concurrent_reads_are_allowed() {
        fn assert_sync<T: Sync>(_: &T) {}
        let index = ab_yb();
        assert_sync(&index);
        std::thread::scope(|s| {
            for _ in 0..4 {
                s.spawn(|| {
                    for a in 0..4u64 {
                        assert!(index.dominates(&cfg(&[1 + a, 1, 0])).unwrap());
                    }
                });
            }
        });
        assert!(index.stats().comparisons > 0);
    }

    #[test]
    fn naive_comparisons_bounded_by_len() {
        let index = ab_yb();
        let before = index.stats().comparisons;
        index.dominates(&cfg(&[0, 0, 5])).unwrap();
        let after = index.stats().comparisons;
        assert!(after - before <= index.len() as u64);
    }
}
