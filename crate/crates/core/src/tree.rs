//! Finite windows into `T_d`.
//!
//! Vertices are numbered level by level. Within a level, the children of
//! consecutive parents are consecutive, so the descendants of any vertex at a
//! fixed relative depth occupy a contiguous index range.

use std::ops::{Add, Range};

use crate::error::{invalid, Error, Result};

/// Largest tree [`TruncatedTree::new`] will build.
pub const VERTEX_BUDGET: u128 = 100_000_000;

/// The ball of radius `depth` around the root of `T_d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedTree {
    degree: usize,
    depth: usize,
    /// `offsets[l]` is the index of the first vertex at level `l`;
    /// `offsets[depth + 1]` is the vertex count.
    offsets: Vec<usize>,
}

impl TruncatedTree {
    pub fn new(degree: usize, depth: usize) -> Result<Self> {
        if degree < 2 {
            return Err(invalid(format!("degree must be at least 2, got {degree}")));
        }
        let mut offsets = Vec::with_capacity(depth + 2);
        let mut total: u128 = 0;
        let mut level_size: u128 = 1;
        let too_large = |count| Error::TreeTooLarge { count, budget: VERTEX_BUDGET };
        for level in 0..=depth {
            offsets.push(total as usize);
            total += level_size;
            if total > VERTEX_BUDGET {
                // finish the count for the error message
                let mut count = total;
                let mut size = level_size;
                for _ in level + 1..=depth {
                    size = size.saturating_mul(degree as u128 - 1);
                    count = count.saturating_add(size);
                }
                return Err(too_large(count));
            }
            level_size *= if level == 0 { degree as u128 } else { degree as u128 - 1 };
        }
        offsets.push(total as usize);
        Ok(Self { degree, depth, offsets })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.offsets[self.depth + 1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Vertex indices on the sphere of radius `n` around the root.
    pub fn level_range(&self, n: usize) -> Range<usize> {
        assert!(n <= self.depth, "level {n} beyond depth {}", self.depth);
        self.offsets[n]..self.offsets[n + 1]
    }

    /// Indices of all vertices within distance `r` of the root.
    pub fn ball_range(&self, r: usize) -> Range<usize> {
        0..self.offsets[r.min(self.depth) + 1]
    }

    /// Distance from the root.
    pub fn level(&self, v: usize) -> usize {
        assert!(v < self.len(), "vertex {v} out of range");
        self.offsets.partition_point(|&o| o <= v) - 1
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        let level = self.level(v);
        match level {
            0 => None,
            1 => Some(0),
            _ => {
                let pos = v - self.offsets[level];
                Some(self.offsets[level - 1] + pos / (self.degree - 1))
            }
        }
    }

    /// Children of `v` inside the window (empty on the last level).
    pub fn children(&self, v: usize) -> Range<usize> {
        self.descendants(v, 1)
    }

    /// Descendants of `v` exactly `j` levels further from the root.
    pub fn descendants(&self, v: usize, j: usize) -> Range<usize> {
        let level = self.level(v);
        if level + j > self.depth {
            return 0..0;
        }
        if j == 0 {
            return v..v + 1;
        }
        let pos = v - self.offsets[level];
        let (start, count) = if level == 0 {
            (0, self.degree * (self.degree - 1).pow(j as u32 - 1))
        } else {
            let c = (self.degree - 1).pow(j as u32);
            (pos * c, c)
        };
        let base = self.offsets[level + j];
        base + start..base + start + count
    }

    /// Graph distance between two vertices of the window, via their lowest
    /// common ancestor.
    pub fn distance(&self, u: usize, v: usize) -> usize {
        let (mut a, mut b) = (u, v);
        let (mut la, mut lb) = (self.level(a), self.level(b));
        let mut dist = 0;
        while la > lb {
            a = self.parent(a).unwrap();
            la -= 1;
            dist += 1;
        }
        while lb > la {
            b = self.parent(b).unwrap();
            lb -= 1;
            dist += 1;
        }
        while a != b {
            a = self.parent(a).unwrap();
            b = self.parent(b).unwrap();
            dist += 2;
        }
        dist
    }

    /// All vertices within distance `r` of `v` that lie inside the window,
    /// paired with their distance to `v`.
    pub fn ball(&self, v: usize, r: usize) -> Vec<(usize, usize)> {
        let mut out = vec![(v, 0)];
        // (vertex, came_from) frontier of a non-backtracking search
        let mut frontier = vec![(v, usize::MAX)];
        for dist in 1..=r {
            let mut next = Vec::new();
            for &(x, from) in &frontier {
                if let Some(p) = self.parent(x) {
                    if p != from {
                        next.push((p, x));
                    }
                }
                for c in self.children(x) {
                    if c != from {
                        next.push((c, x));
                    }
                }
            }
            out.extend(next.iter().map(|&(x, _)| (x, dist)));
            frontier = next;
        }
        out
    }

    /// `(A f)(v)` for every `v` with `level(v) < valid_radius`; other entries
    /// are left at `T::default()`.
    pub(crate) fn adjacency_step<T>(&self, values: &[T], valid_radius: usize) -> Vec<T>
    where
        T: Copy + Default + Add<Output = T>,
    {
        assert_eq!(values.len(), self.len());
        let mut out = vec![T::default(); values.len()];
        for level in 0..valid_radius.min(self.depth + 1) {
            for v in self.level_range(level) {
                let mut acc = T::default();
                if let Some(p) = self.parent(v) {
                    acc = acc + values[p];
                }
                if level < self.depth {
                    for c in self.children(v) {
                        acc = acc + values[c];
                    }
                }
                out[v] = acc;
            }
        }
        out
    }
}

/// A real field on the vertices of a [`TruncatedTree`].
///
/// Only values at levels `<= valid_radius` are meaningful; the rest were
/// affected by the truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub values: Vec<f64>,
    pub valid_radius: usize,
}

impl FieldSample {
    pub fn new(values: Vec<f64>, valid_radius: usize) -> Self {
        Self { values, valid_radius }
    }

    /// Indicator of the root, valid on the whole tree.
    pub fn root_indicator(tree: &TruncatedTree) -> Self {
        let mut values = vec![0.0; tree.len()];
        values[0] = 1.0;
        Self { values, valid_radius: tree.depth() }
    }

    pub fn constant(tree: &TruncatedTree, c: f64) -> Self {
        Self { values: vec![c; tree.len()], valid_radius: tree.depth() }
    }

    pub fn root(&self) -> f64 {
        self.values[0]
    }
}

/// Applies the adjacency operator: sums of neighbour values.
///
/// The valid radius shrinks by one. Values beyond it are zero.
pub fn apply_adjacency(tree: &TruncatedTree, field: &FieldSample) -> Result<FieldSample> {
    if field.values.len() != tree.len() {
        return Err(invalid("field does not match the tree"));
    }
    if field.valid_radius == 0 {
        return Err(invalid("cannot apply adjacency to a field with valid radius 0"));
    }
    let valid = field.valid_radius.min(tree.depth()) - 1;
    let values = tree.adjacency_step(&field.values, valid + 1);
    Ok(FieldSample { values, valid_radius: valid })
}
