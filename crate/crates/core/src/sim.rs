//! Seeded generators for test instances: random binary trees, the
//! additive matrices they induce, ultrametric matrices and unstructured
//! symmetric matrices.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dendrogram::{Dendrogram, Merge};
use crate::matrix::{DistanceMatrix, MatrixKind};
use crate::phylo::PhyloTree;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("T{}", i)).collect()
}

/// Random unrooted binary tree with positive branch lengths, built by
/// attaching each new leaf to a uniformly chosen existing edge.
pub fn random_binary_tree(n: usize, rng: &mut impl Rng) -> PhyloTree {
    assert!(n >= 3, "binary tree shape needs at least 3 leaves");
    let mut t = PhyloTree::new(default_labels(n));
    let c = t.add_internal();
    for leaf in 0..3 {
        let l = rng.gen_range(0.5..2.0);
        t.add_edge(leaf, c, l);
    }
    for leaf in 3..n {
        let edges = t.edges();
        let (a, b, w) = edges[rng.gen_range(0..edges.len())];
        let m = t.add_internal();
        let split = rng.gen_range(0.25..0.75);
        t.remove_edge(a, b);
        t.add_edge(a, m, w * split);
        t.add_edge(b, m, w * (1.0 - split));
        let l = rng.gen_range(0.5..2.0);
        t.add_edge(leaf, m, l);
    }
    t
}

/// Additive matrix of pairwise path distances in a tree.
pub fn additive_matrix(t: &PhyloTree) -> DistanceMatrix {
    let n = t.leaf_count();
    let d = t.path_distance_matrix();
    DistanceMatrix::new(t.leaf_labels().to_vec(), d[..n * n].to_vec(), MatrixKind::Generic)
        .expect("path distances form a valid matrix")
}

/// Random ultrametric matrix: cophenetic distances of a random
/// dendrogram with strictly increasing merge heights.
pub fn random_ultrametric_matrix(n: usize, rng: &mut impl Rng) -> DistanceMatrix {
    assert!(n >= 2);
    let mut clusters: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);
    let mut height = 0.0;
    let mut next = n;
    while clusters.len() > 1 {
        height += rng.gen_range(0.5..2.0);
        let i = rng.gen_range(0..clusters.len());
        let left = clusters.swap_remove(i);
        let j = rng.gen_range(0..clusters.len());
        let right = clusters.swap_remove(j);
        merges.push(Merge {
            left,
            right,
            height,
        });
        clusters.push(next);
        next += 1;
    }
    let dend = Dendrogram::new(default_labels(n), merges).expect("generated merges are valid");
    let coph = dend.cophenetic_matrix();
    DistanceMatrix::new(default_labels(n), coph, MatrixKind::Generic)
        .expect("cophenetic distances form a valid matrix")
}

/// Unstructured symmetric matrix with entries in (lo, hi).
pub fn random_matrix(n: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> DistanceMatrix {
    assert!(n >= 1 && lo > 0.0 && hi > lo);
    let mut e = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.gen_range(lo..hi);
            e[i * n + j] = v;
            e[j * n + i] = v;
        }
    }
    DistanceMatrix::new(default_labels(n), e, MatrixKind::Generic).expect("valid by construction")
}

/// Random integer-valued matrix, e.g. allelic differences.
pub fn random_integer_matrix(n: usize, max: u64, rng: &mut impl Rng) -> DistanceMatrix {
    assert!(n >= 1 && max >= 1);
    let mut e = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.gen_range(1..=max) as f64;
            e[i * n + j] = v;
            e[j * n + i] = v;
        }
    }
    DistanceMatrix::new(default_labels(n), e, MatrixKind::RawHamming).expect("valid by construction")
}
