//! Unrooted phylogenetic trees with real (possibly negative) branch
//! lengths, path-length queries and Robinson-Foulds comparison.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Unrooted tree. Nodes `0..leaf_count` are leaves carrying labels;
/// internal nodes are appended afterwards.
#[derive(Debug, Clone)]
pub struct PhyloTree {
    leaf_labels: Vec<String>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl PhyloTree {
    pub fn new(leaf_labels: Vec<String>) -> PhyloTree {
        let n = leaf_labels.len();
        PhyloTree {
            leaf_labels,
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_labels.len()
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn leaf_labels(&self) -> &[String] {
        &self.leaf_labels
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node < self.leaf_labels.len()
    }

    pub fn add_internal(&mut self) -> usize {
        self.adjacency.push(Vec::new());
        self.adjacency.len() - 1
    }

    pub fn add_edge(&mut self, a: usize, b: usize, length: f64) {
        self.adjacency[a].push((b, length));
        self.adjacency[b].push((a, length));
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (a, nbrs) in self.adjacency.iter().enumerate() {
            for &(b, w) in nbrs {
                if a < b {
                    out.push((a, b, w));
                }
            }
        }
        out
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.adjacency[a].retain(|&(nbr, _)| nbr != b);
        self.adjacency[b].retain(|&(nbr, _)| nbr != a);
    }

    pub fn set_edge_length(&mut self, a: usize, b: usize, length: f64) {
        for (nbr, w) in &mut self.adjacency[a] {
            if *nbr == b {
                *w = length;
            }
        }
        for (nbr, w) in &mut self.adjacency[b] {
            if *nbr == a {
                *w = length;
            }
        }
    }

    /// Connectivity, acyclicity and leaf-degree checks.
    pub fn validate(&self) -> Result<()> {
        let n = self.node_count();
        if n == 0 {
            return Ok(());
        }
        let edge_count = self.adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        if edge_count != n - 1 {
            return Err(Error::invariant(format!(
                "{} edges for {} nodes; tree expected",
                edge_count, n
            )));
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invariant("tree is not connected"));
        }
        if n > 1 {
            for leaf in 0..self.leaf_count() {
                if self.degree(leaf) != 1 {
                    return Err(Error::invariant(format!(
                        "leaf {} has degree {}",
                        self.leaf_labels[leaf],
                        self.degree(leaf)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sum of branch lengths on the unique path between two leaves.
    pub fn path_distance(&self, a: &str, b: &str) -> Result<f64> {
        let ia = self
            .leaf_labels
            .iter()
            .position(|l| l == a)
            .ok_or_else(|| Error::domain(format!("unknown leaf {}", a)))?;
        let ib = self
            .leaf_labels
            .iter()
            .position(|l| l == b)
            .ok_or_else(|| Error::domain(format!("unknown leaf {}", b)))?;
        Ok(self.path_distance_by_index(ia, ib))
    }

    pub fn path_distance_by_index(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        let mut dist = vec![f64::NAN; self.node_count()];
        let mut stack = vec![a];
        dist[a] = 0.0;
        while let Some(v) = stack.pop() {
            if v == b {
                break;
            }
            for &(w, len) in &self.adjacency[v] {
                if dist[w].is_nan() {
                    dist[w] = dist[v] + len;
                    stack.push(w);
                }
            }
        }
        dist[b]
    }

    /// All pairwise leaf path distances, row-major over leaf indices.
    pub fn path_distance_matrix(&self) -> Vec<f64> {
        let n = self.leaf_count();
        let total = self.node_count();
        let mut out = vec![0.0; n * n];
        for a in 0..n {
            let mut dist = vec![f64::NAN; total];
            let mut stack = vec![a];
            dist[a] = 0.0;
            while let Some(v) = stack.pop() {
                for &(w, len) in &self.adjacency[v] {
                    if dist[w].is_nan() {
                        dist[w] = dist[v] + len;
                        stack.push(w);
                    }
                }
            }
            for b in 0..n {
                out[a * n + b] = dist[b];
            }
        }
        out
    }

    /// Non-trivial bipartitions induced by internal edges, each written
    /// as the sorted label set on the side not containing the smallest
    /// label (a canonical orientation).
    pub fn splits(&self) -> BTreeSet<Vec<String>> {
        let smallest = match self.leaf_labels.iter().min() {
            Some(s) => s.clone(),
            None => return BTreeSet::new(),
        };
        let mut out = BTreeSet::new();
        for (a, b, _) in self.edges() {
            let side = self.leaves_beyond(a, b);
            if side.len() < 2 || side.len() > self.leaf_count() - 2 {
                continue;
            }
            let mut labels: Vec<String> = side
                .iter()
                .map(|&i| self.leaf_labels[i].clone())
                .collect();
            labels.sort();
            if labels.iter().any(|l| *l == smallest) {
                let side_set: BTreeSet<usize> = side.into_iter().collect();
                let mut other: Vec<String> = (0..self.leaf_count())
                    .filter(|i| !side_set.contains(i))
                    .map(|i| self.leaf_labels[i].clone())
                    .collect();
                other.sort();
                out.insert(other);
            } else {
                out.insert(labels);
            }
        }
        out
    }

    /// Leaves on the `b` side of edge (a, b).
    fn leaves_beyond(&self, a: usize, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut seen = vec![false; self.node_count()];
        seen[a] = true;
        seen[b] = true;
        let mut stack = vec![b];
        if self.is_leaf(b) {
            out.push(b);
        }
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    if self.is_leaf(w) {
                        out.push(w);
                    }
                    stack.push(w);
                }
            }
        }
        out
    }
}

/// Robinson-Foulds distance: size of the symmetric difference of the
/// two trees' non-trivial split sets.
pub fn robinson_foulds(a: &PhyloTree, b: &PhyloTree) -> usize {
    let sa = a.splits();
    let sb = b.splits();
    sa.symmetric_difference(&sb).count()
}
