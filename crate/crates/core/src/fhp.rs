//! Steiner-tree heuristic over character sequences: grow the tree by the
//! shortest link between unconnected components and coalesce shared
//! changes around high-degree vertices into inferred intermediate
//! sequences.

use crate::error::{Error, Result};
use crate::mst::Dsu;
use crate::profile::CharacterSequenceSet;

#[derive(Debug, Clone)]
pub struct SteinerTree {
    /// Original sequences first, inferred ones after.
    nodes: Vec<SteinerNode>,
    original: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct SteinerNode {
    pub label: String,
    pub sequence: Vec<char>,
}

impl SteinerTree {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn original_count(&self) -> usize {
        self.original
    }

    pub fn is_steiner(&self, v: usize) -> bool {
        v >= self.original
    }

    pub fn node(&self, v: usize) -> &SteinerNode {
        &self.nodes[v]
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> usize {
        hamming(&self.nodes[u].sequence, &self.nodes[v].sequence)
    }

    /// Edges with weights and the differing positions that label them.
    pub fn labeled_edges(&self) -> Vec<(usize, usize, usize, Vec<usize>)> {
        self.edges
            .iter()
            .map(|&(u, v)| {
                let positions: Vec<usize> = self.nodes[u]
                    .sequence
                    .iter()
                    .zip(&self.nodes[v].sequence)
                    .enumerate()
                    .filter(|(_, (a, b))| a != b)
                    .map(|(p, _)| p)
                    .collect();
                (u, v, positions.len(), positions)
            })
            .collect()
    }

    pub fn total_weight(&self) -> usize {
        self.edges
            .iter()
            .map(|&(u, v)| self.edge_weight(u, v))
            .sum()
    }
}

fn hamming(a: &[char], b: &[char]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Positions where both x and y differ from v in the same way.
fn common_changes(v: &[char], x: &[char], y: &[char]) -> Vec<usize> {
    (0..v.len())
        .filter(|&p| x[p] == y[p] && x[p] != v[p])
        .collect()
}

struct Builder {
    nodes: Vec<SteinerNode>,
    adj: Vec<Vec<usize>>,
    dsu: Dsu,
    steiner_count: usize,
}

impl Builder {
    fn connect(&mut self, u: usize, v: usize) {
        self.adj[u].push(v);
        self.adj[v].push(u);
        self.dsu.union(u, v);
    }

    fn disconnect(&mut self, u: usize, v: usize) {
        self.adj[u].retain(|&x| x != v);
        self.adj[v].retain(|&x| x != u);
    }

    /// One coalescing pass: at the vertex with a best pair of incident
    /// links sharing changes, splice in a Steiner node carrying those
    /// changes. Returns whether anything happened.
    fn coalesce_once(&mut self) -> bool {
        // best = (most common changes, then smallest (v, x, y))
        let mut best: Option<(usize, (usize, usize, usize), Vec<usize>)> = None;
        for v in 0..self.nodes.len() {
            if self.adj[v].len() < 2 {
                continue;
            }
            let nbrs = self.adj[v].clone();
            for a in 0..nbrs.len() {
                for b in (a + 1)..nbrs.len() {
                    let (x, y) = (nbrs[a].min(nbrs[b]), nbrs[a].max(nbrs[b]));
                    let shared = common_changes(
                        &self.nodes[v].sequence,
                        &self.nodes[x].sequence,
                        &self.nodes[y].sequence,
                    );
                    if shared.is_empty() {
                        continue;
                    }
                    let key = (usize::MAX - shared.len(), (v, x, y));
                    if best
                        .as_ref()
                        .map(|(c, k, _)| key < (usize::MAX - c, *k))
                        .unwrap_or(true)
                    {
                        best = Some((shared.len(), (v, x, y), shared));
                    }
                }
            }
        }
        let Some((_, (v, x, y), shared)) = best else {
            return false;
        };
        let mut seq = self.nodes[v].sequence.clone();
        for &p in &shared {
            seq[p] = self.nodes[x].sequence[p];
        }
        self.steiner_count += 1;
        let s = self.nodes.len();
        self.nodes.push(SteinerNode {
            label: format!("steiner{}", self.steiner_count),
            sequence: seq,
        });
        self.adj.push(Vec::new());
        self.dsu = refreshed_dsu(&self.adj);
        self.disconnect(v, x);
        self.disconnect(v, y);
        self.connect(s, x);
        self.connect(s, y);
        self.connect(s, v);
        true
    }
}

fn refreshed_dsu(adj: &[Vec<usize>]) -> Dsu {
    let mut dsu = Dsu::new(adj.len());
    for (v, nbrs) in adj.iter().enumerate() {
        for &w in nbrs {
            dsu.union(v, w);
        }
    }
    dsu
}

/// Builds the heuristic Steiner tree: repeatedly add the shortest link
/// between two components (ties to the smallest node pair), coalescing
/// common changes after every addition.
pub fn run_fhp(s: &CharacterSequenceSet) -> Result<SteinerTree> {
    let n = s.len();
    if n < 2 {
        return Err(Error::domain("Steiner tree inference needs at least 2 sequences"));
    }
    let mut b = Builder {
        nodes: (0..n)
            .map(|i| SteinerNode {
                label: s.label(i).to_string(),
                sequence: s.sequence(i).to_vec(),
            })
            .collect(),
        adj: vec![Vec::new(); n],
        dsu: Dsu::new(n),
        steiner_count: 0,
    };
    loop {
        // all originals connected?
        let root = b.dsu.find(0);
        if (1..n).all(|v| b.dsu.find(v) == root) {
            break;
        }
        let mut best: Option<(usize, usize, usize)> = None;
        for u in 0..b.nodes.len() {
            for v in (u + 1)..b.nodes.len() {
                if b.dsu.find(u) == b.dsu.find(v) {
                    continue;
                }
                let w = hamming(&b.nodes[u].sequence, &b.nodes[v].sequence);
                if best.map(|(bw, bu, bv)| (w, u, v) < (bw, bu, bv)).unwrap_or(true) {
                    best = Some((w, u, v));
                }
            }
        }
        let (_, u, v) = best.expect("disconnected components imply a candidate link");
        b.connect(u, v);
        while b.coalesce_once() {}
    }
    let mut edges = Vec::new();
    for (v, nbrs) in b.adj.iter().enumerate() {
        for &w in nbrs {
            if v < w {
                edges.push((v, w));
            }
        }
    }
    edges.sort_unstable();
    Ok(SteinerTree {
        nodes: b.nodes,
        original: n,
        edges,
    })
}
