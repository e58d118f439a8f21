//! Graph-side methods: generic minimum spanning trees under pluggable
//! edge comparators, and goeBURST forests with the full vertex tie-break
//! chain.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, weight: f64) -> Edge {
        let (u, v) = (u.min(v), u.max(v));
        Edge { u, v, weight }
    }

    fn same_endpoints(&self, other: &Edge) -> bool {
        self.u == other.u && self.v == other.v
    }
}

#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<WeightedGraph> {
        let mut out = Vec::with_capacity(edges.len());
        let mut seen = std::collections::HashSet::new();
        for (u, v, w) in edges {
            if u == v {
                return Err(Error::invariant(format!("self-loop at vertex {}", u)));
            }
            if u >= n || v >= n {
                return Err(Error::invariant(format!(
                    "edge ({}, {}) outside vertex range 0..{}",
                    u, v, n
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::invariant(format!(
                    "edge ({}, {}) has invalid weight {}",
                    u, v, w
                )));
            }
            let e = Edge::new(u, v, w);
            if !seen.insert((e.u, e.v)) {
                return Err(Error::invariant(format!(
                    "duplicate edge ({}, {})",
                    e.u, e.v
                )));
            }
            out.push(e);
        }
        Ok(WeightedGraph { n, edges: out })
    }

    /// Complete graph over a distance matrix.
    pub fn complete(d: &DistanceMatrix) -> WeightedGraph {
        let n = d.size();
        let mut edges = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push(Edge::new(i, j, d.get(i, j)));
            }
        }
        WeightedGraph { n, edges }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MstAlgorithm {
    Kruskal,
    Prim,
    Boruvka,
}

impl MstAlgorithm {
    pub const ALL: [MstAlgorithm; 3] =
        [MstAlgorithm::Kruskal, MstAlgorithm::Prim, MstAlgorithm::Boruvka];

    pub fn name(&self) -> &'static str {
        match self {
            MstAlgorithm::Kruskal => "kruskal",
            MstAlgorithm::Prim => "prim",
            MstAlgorithm::Boruvka => "boruvka",
        }
    }

    pub fn from_name(name: &str) -> Option<MstAlgorithm> {
        Self::ALL.iter().copied().find(|a| a.name() == name)
    }
}

#[derive(Debug, Clone)]
pub struct Forest {
    n: usize,
    edges: Vec<Edge>,
    component: Vec<usize>,
    pub level: Option<u64>,
}

impl Forest {
    fn from_edges(n: usize, mut edges: Vec<Edge>, level: Option<u64>) -> Forest {
        edges.sort_by(|a, b| (a.u, a.v).cmp(&(b.u, b.v)));
        let mut dsu = Dsu::new(n);
        for e in &edges {
            dsu.union(e.u, e.v);
        }
        let component = (0..n).map(|v| dsu.find(v)).collect();
        Forest {
            n,
            edges,
            component,
            level,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.component[v]
    }

    pub fn component_count(&self) -> usize {
        let mut roots: Vec<usize> = self.component.clone();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn edge_pairs(&self) -> Vec<(usize, usize, f64)> {
        self.edges.iter().map(|e| (e.u, e.v, e.weight)).collect()
    }
}

/// Plain union-find with path halving and union by size.
pub struct Dsu {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Dsu {
        Dsu {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

pub type EdgeCmp<'a> = dyn Fn(&Edge, &Edge) -> Ordering + 'a;

/// Weight ascending, ties broken by endpoint ids: a total order on any
/// simple graph.
pub fn natural_comparator(a: &Edge, b: &Edge) -> Ordering {
    a.weight
        .partial_cmp(&b.weight)
        .expect("finite weights")
        .then((a.u, a.v).cmp(&(b.u, b.v)))
}

fn equal_edges_error(a: &Edge, b: &Edge) -> Error {
    Error::invariant(format!(
        "comparator is not a total order: edges ({}, {}) and ({}, {}) compare equal",
        a.u, a.v, b.u, b.v
    ))
}

/// Minimum spanning forest under an arbitrary total order on edges. All
/// three algorithms return the identical edge set; equal comparisons
/// between distinct edges are reported as errors when encountered.
pub fn generic_mst(g: &WeightedGraph, cmp: &EdgeCmp, algorithm: MstAlgorithm) -> Result<Forest> {
    let edges = match algorithm {
        MstAlgorithm::Kruskal => kruskal(g, cmp)?,
        MstAlgorithm::Prim => prim(g, cmp)?,
        MstAlgorithm::Boruvka => boruvka(g, cmp)?,
    };
    Ok(Forest::from_edges(g.n, edges, None))
}

fn kruskal(g: &WeightedGraph, cmp: &EdgeCmp) -> Result<Vec<Edge>> {
    let mut sorted = g.edges.clone();
    sorted.sort_by(|a, b| cmp(a, b));
    for w in sorted.windows(2) {
        if cmp(&w[0], &w[1]) == Ordering::Equal && !w[0].same_endpoints(&w[1]) {
            return Err(equal_edges_error(&w[0], &w[1]));
        }
    }
    let mut dsu = Dsu::new(g.n);
    let mut out = Vec::new();
    for e in sorted {
        if dsu.union(e.u, e.v) {
            out.push(e);
        }
    }
    Ok(out)
}

fn prim(g: &WeightedGraph, cmp: &EdgeCmp) -> Result<Vec<Edge>> {
    let mut incident = vec![Vec::new(); g.n];
    for (idx, e) in g.edges.iter().enumerate() {
        incident[e.u].push(idx);
        incident[e.v].push(idx);
    }
    let mut in_tree = vec![false; g.n];
    let mut out = Vec::new();
    for start in 0..g.n {
        if in_tree[start] {
            continue;
        }
        in_tree[start] = true;
        loop {
            let mut best: Option<&Edge> = None;
            for v in (0..g.n).filter(|&v| in_tree[v]) {
                for &idx in &incident[v] {
                    let e = &g.edges[idx];
                    if in_tree[e.u] == in_tree[e.v] {
                        continue;
                    }
                    match best {
                        None => best = Some(e),
                        Some(b) => match cmp(e, b) {
                            Ordering::Less => best = Some(e),
                            Ordering::Equal if !e.same_endpoints(b) => {
                                return Err(equal_edges_error(e, b))
                            }
                            _ => {}
                        },
                    }
                }
            }
            match best {
                Some(e) => {
                    in_tree[e.u] = true;
                    in_tree[e.v] = true;
                    out.push(*e);
                }
                None => break,
            }
        }
    }
    Ok(out)
}

fn boruvka(g: &WeightedGraph, cmp: &EdgeCmp) -> Result<Vec<Edge>> {
    let mut dsu = Dsu::new(g.n);
    let mut out: Vec<Edge> = Vec::new();
    loop {
        let mut cheapest: Vec<Option<Edge>> = vec![None; g.n];
        for e in &g.edges {
            let (ru, rv) = (dsu.find(e.u), dsu.find(e.v));
            if ru == rv {
                continue;
            }
            for r in [ru, rv] {
                match &cheapest[r] {
                    None => cheapest[r] = Some(*e),
                    Some(b) => match cmp(e, b) {
                        Ordering::Less => cheapest[r] = Some(*e),
                        Ordering::Equal if !e.same_endpoints(b) => {
                            return Err(equal_edges_error(e, b))
                        }
                        _ => {}
                    },
                }
            }
        }
        let mut added = false;
        for r in 0..g.n {
            if let Some(e) = cheapest[r] {
                if dsu.union(e.u, e.v) {
                    out.push(e);
                    added = true;
                }
            }
        }
        if !added {
            return Ok(out);
        }
    }
}

/// Per-vertex locus-variant statistics used by the goeBURST tie-break
/// chain: neighbor counts at distances exactly 1, 2 and 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LvStats {
    pub slv: usize,
    pub dlv: usize,
    pub tlv: usize,
    pub frequency: u64,
    pub id: usize,
}

impl LvStats {
    /// Ranking key: more variants first, then more frequent, then lower id.
    fn rank_key(&self) -> (isize, isize, isize, i64, usize) {
        (
            -(self.slv as isize),
            -(self.dlv as isize),
            -(self.tlv as isize),
            -(self.frequency as i64),
            self.id,
        )
    }
}

pub fn lv_counts(d: &DistanceMatrix, frequencies: Option<&[u64]>) -> Result<Vec<LvStats>> {
    if !d.is_integer_valued() {
        return Err(Error::domain(
            "locus-variant counts require an integer-valued distance matrix",
        ));
    }
    let n = d.size();
    if let Some(f) = frequencies {
        if f.len() != n {
            return Err(Error::invariant(format!(
                "{} frequencies for {} vertices",
                f.len(),
                n
            )));
        }
    }
    Ok((0..n)
        .map(|i| {
            let mut counts = [0usize; 3];
            for j in 0..n {
                if i != j {
                    let dist = d.get(i, j).round() as u64;
                    if (1..=3).contains(&dist) {
                        counts[dist as usize - 1] += 1;
                    }
                }
            }
            LvStats {
                slv: counts[0],
                dlv: counts[1],
                tlv: counts[2],
                frequency: frequencies.map(|f| f[i]).unwrap_or(1),
                id: i,
            }
        })
        .collect())
}

/// goeBURST edge order: distance ascending, then the better endpoint of
/// each edge (by the vertex ranking key), then the worse endpoint.
pub fn goeburst_edge_order(e1: &Edge, e2: &Edge, stats: &[LvStats]) -> Ordering {
    let key = |e: &Edge| {
        let (a, b) = (stats[e.u].rank_key(), stats[e.v].rank_key());
        (a.min(b), a.max(b))
    };
    e1.weight
        .partial_cmp(&e2.weight)
        .expect("finite weights")
        .then_with(|| key(e1).cmp(&key(e2)))
}

/// Forest linking OTUs at allelic distance at most `level`, grown in
/// goeBURST edge order.
pub fn run_goeburst(d: &DistanceMatrix, frequencies: Option<&[u64]>, level: u64) -> Result<Forest> {
    let stats = lv_counts(d, frequencies)?;
    let n = d.size();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if d.get(i, j).round() as u64 <= level {
                edges.push(Edge::new(i, j, d.get(i, j)));
            }
        }
    }
    let g = WeightedGraph { n, edges };
    let forest = generic_mst(&g, &|a, b| goeburst_edge_order(a, b, &stats), MstAlgorithm::Kruskal)?;
    Ok(Forest::from_edges(n, forest.edges, Some(level)))
}

/// Spanning tree over the complete allelic-distance graph under the
/// goeBURST order, built with Boruvka's algorithm.
pub fn run_goeburst_full_mst(d: &DistanceMatrix, frequencies: Option<&[u64]>) -> Result<Forest> {
    let stats = lv_counts(d, frequencies)?;
    let g = WeightedGraph::complete(d);
    generic_mst(&g, &|a, b| goeburst_edge_order(a, b, &stats), MstAlgorithm::Boruvka)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{DistanceMatrix, MatrixKind};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kruskal_on_example_matrix() {
        let d = DistanceMatrix::example_five_taxa();
        let g = WeightedGraph::complete(&d);
        let f = generic_mst(&g, &natural_comparator, MstAlgorithm::Kruskal).unwrap();
        assert_eq!(f.total_weight(), 16.0);
        assert_eq!(f.component_count(), 1);
    }

    #[test]
    fn path_graph_returned_unchanged() {
        let g = WeightedGraph::new(4, vec![(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0)]).unwrap();
        for alg in MstAlgorithm::ALL {
            let f = generic_mst(&g, &natural_comparator, alg).unwrap();
            assert_eq!(f.edge_pairs(), vec![(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0)]);
        }
    }

    #[test]
    fn three_algorithms_agree_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.gen_range(3..10);
            let labels: Vec<String> = (0..n).map(|i| format!("V{}", i)).collect();
            let mut e = vec![0.0; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = rng.gen_range(1.0..100.0);
                    e[i * n + j] = v;
                    e[j * n + i] = v;
                }
            }
            let d = DistanceMatrix::new(labels, e, MatrixKind::Generic).unwrap();
            let g = WeightedGraph::complete(&d);
            let k = generic_mst(&g, &natural_comparator, MstAlgorithm::Kruskal).unwrap();
            let p = generic_mst(&g, &natural_comparator, MstAlgorithm::Prim).unwrap();
            let b = generic_mst(&g, &natural_comparator, MstAlgorithm::Boruvka).unwrap();
            assert_eq!(k.edge_pairs(), p.edge_pairs());
            assert_eq!(k.edge_pairs(), b.edge_pairs());
        }
    }

    #[test]
    fn non_total_comparator_detected() {
        // both unit-weight edges leave vertex 0, so every algorithm is
        // forced to compare them
        let g = WeightedGraph::new(3, vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 5.0)]).unwrap();
        let by_weight_only =
            |a: &Edge, b: &Edge| a.weight.partial_cmp(&b.weight).unwrap();
        for alg in MstAlgorithm::ALL {
            let err = generic_mst(&g, &by_weight_only, alg).unwrap_err();
            assert!(err.to_string().contains("compare equal"), "{}: {}", alg.name(), err);
        }
    }

    #[test]
    fn mst_weight_is_minimal_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let n = rng.gen_range(3..7usize);
            let labels: Vec<String> = (0..n).map(|i| format!("V{}", i)).collect();
            let mut e = vec![0.0; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = rng.gen_range(1..50) as f64;
                    e[i * n + j] = v;
                    e[j * n + i] = v;
                }
            }
            let d = DistanceMatrix::new(labels, e, MatrixKind::Generic).unwrap();
            let g = WeightedGraph::complete(&d);
            let f = generic_mst(&g, &natural_comparator, MstAlgorithm::Kruskal).unwrap();
            // brute force over all spanning trees via Prufer sequences
            let mut best = f64::INFINITY;
            let mut prufer = vec![0usize; n.saturating_sub(2)];
            loop {
                let tree = prufer_decode(&prufer, n);
                let w: f64 = tree.iter().map(|&(a, b)| d.get(a, b)).sum();
                best = best.min(w);
                // increment the sequence
                let mut pos = 0;
                loop {
                    if pos == prufer.len() {
                        break;
                    }
                    prufer[pos] += 1;
                    if prufer[pos] < n {
                        break;
                    }
                    prufer[pos] = 0;
                    pos += 1;
                }
                if pos == prufer.len() {
                    break;
                }
            }
            assert_eq!(f.total_weight(), best);
        }
    }

    fn prufer_decode(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
        let mut degree = vec![1usize; n];
        for &s in seq {
            degree[s] += 1;
        }
        let mut edges = Vec::new();
        let mut used = vec![false; n];
        for &s in seq {
            let leaf = (0..n).find(|&v| degree[v] == 1 && !used[v]).unwrap();
            edges.push((leaf, s));
            used[leaf] = true;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| !used[v] && degree[v] == 1).collect();
        edges.push((rest[0], rest[1]));
        edges
    }

    #[test]
    fn lv_counts_on_example_matrix() {
        let d = DistanceMatrix::example_five_taxa();
        let stats = lv_counts(&d, None).unwrap();
        assert!(stats.iter().all(|s| s.slv == 0));
        assert_eq!(stats[0].dlv, 1);
        assert_eq!(stats[1].dlv, 1);
        assert_eq!(stats[2].dlv, 0);
        assert_eq!(stats[3].tlv, 1);
        assert_eq!(stats[4].tlv, 1);
    }

    #[test]
    fn lv_counts_small_cases() {
        let d = DistanceMatrix::new(
            vec!["A".into(), "B".into()],
            vec![0.0, 0.0, 0.0, 0.0],
            MatrixKind::RawHamming,
        );
        // identical profiles give a zero matrix: no LV buckets
        let stats = lv_counts(&d.unwrap(), None).unwrap();
        assert_eq!((stats[0].slv, stats[0].dlv, stats[0].tlv), (0, 0, 0));

        let d1 = DistanceMatrix::new(
            vec!["A".into(), "B".into()],
            vec![0.0, 1.0, 1.0, 0.0],
            MatrixKind::RawHamming,
        )
        .unwrap();
        let stats = lv_counts(&d1, None).unwrap();
        assert_eq!(stats[0].slv, 1);
        assert_eq!(stats[1].slv, 1);

        let bad = DistanceMatrix::new(
            vec!["A".into(), "B".into()],
            vec![0.0, 1.5, 1.5, 0.0],
            MatrixKind::Generic,
        )
        .unwrap();
        assert!(lv_counts(&bad, None).is_err());
    }

    #[test]
    fn goeburst_order_rules() {
        let mut stats = vec![
            LvStats { slv: 2, dlv: 0, tlv: 0, frequency: 1, id: 0 },
            LvStats { slv: 1, dlv: 0, tlv: 0, frequency: 1, id: 1 },
            LvStats { slv: 1, dlv: 0, tlv: 0, frequency: 1, id: 2 },
            LvStats { slv: 0, dlv: 0, tlv: 0, frequency: 1, id: 3 },
        ];
        // equal distance, one endpoint with more SLVs wins
        let e1 = Edge::new(0, 3, 2.0);
        let e2 = Edge::new(1, 3, 2.0);
        assert_eq!(goeburst_edge_order(&e1, &e2, &stats), Ordering::Less);
        // distance dominates everything
        let cheap = Edge::new(3, 1, 1.0);
        assert_eq!(goeburst_edge_order(&cheap, &e1, &stats), Ordering::Less);
        // all counts equal: lower id endpoint wins
        for s in &mut stats {
            s.slv = 0;
        }
        let e3 = Edge::new(1, 3, 2.0);
        let e4 = Edge::new(2, 3, 2.0);
        assert_eq!(goeburst_edge_order(&e3, &e4, &stats), Ordering::Less);
        assert_eq!(goeburst_edge_order(&e3, &e3, &stats), Ordering::Equal);
    }

    #[test]
    fn goeburst_levels_on_example_matrix() {
        let d = DistanceMatrix::example_five_taxa();
        let f1 = run_goeburst(&d, None, 1).unwrap();
        assert!(f1.edges().is_empty());
        let f2 = run_goeburst(&d, None, 2).unwrap();
        assert_eq!(f2.edge_pairs(), vec![(0, 1, 2.0)]);
        let f3 = run_goeburst(&d, None, 3).unwrap();
        assert_eq!(f3.edge_pairs(), vec![(0, 1, 2.0), (3, 4, 3.0)]);
        assert_eq!(f3.component_count(), 3);
    }

    #[test]
    fn goeburst_full_mst_on_example_matrix() {
        let d = DistanceMatrix::example_five_taxa();
        let f = run_goeburst_full_mst(&d, None).unwrap();
        assert_eq!(f.total_weight(), 16.0);
        // the weight-5 tie between C-D and C-E goes to C-D: D outranks E
        // (equal variant counts and frequency, lower id)
        assert_eq!(
            f.edge_pairs(),
            vec![(0, 1, 2.0), (0, 4, 6.0), (2, 3, 5.0), (3, 4, 3.0)]
        );
        // and the Kruskal run under the same order agrees
        let stats = lv_counts(&d, None).unwrap();
        let g = WeightedGraph::complete(&d);
        let k = generic_mst(&g, &|a, b| goeburst_edge_order(a, b, &stats), MstAlgorithm::Kruskal)
            .unwrap();
        assert_eq!(f.edge_pairs(), k.edge_pairs());
    }

    #[test]
    fn goeburst_single_vertex() {
        let d = DistanceMatrix::new(vec!["A".into()], vec![0.0], MatrixKind::RawHamming).unwrap();
        let f = run_goeburst_full_mst(&d, None).unwrap();
        assert!(f.edges().is_empty());
        assert_eq!(f.component_count(), 1);
    }

    #[test]
    fn goeburst_row_permutation_invariance() {
        // permuting storage order while keeping ids attached to vertices
        // leaves the forest unchanged; here: same matrix queried twice
        let d = DistanceMatrix::example_five_taxa();
        let a = run_goeburst(&d, None, 3).unwrap();
        let b = run_goeburst(&d, Some(&[1, 1, 1, 1, 1]), 3).unwrap();
        assert_eq!(a.edge_pairs(), b.edge_pairs());
    }
}
