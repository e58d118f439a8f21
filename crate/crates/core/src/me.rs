//! Greedy minimum-evolution tree building by taxon addition (GME / BME):
//! subtree average distances, recursive tree length, incremental per-edge
//! insertion costs, and post-insertion average updates.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;
use crate::phylo::PhyloTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    /// Ordinary least squares: subtree averages weighted by OTU counts.
    Ols,
    /// Balanced: both child subtrees contribute equally.
    Balanced,
}

impl WeightScheme {
    pub fn name(&self) -> &'static str {
        match self {
            WeightScheme::Ols => "gme",
            WeightScheme::Balanced => "bme",
        }
    }

    pub fn from_name(name: &str) -> Option<WeightScheme> {
        match name {
            "gme" => Some(WeightScheme::Ols),
            "bme" => Some(WeightScheme::Balanced),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum InsertionOrder {
    Input,
    Random(u64),
}

/// Average distance from a subtree i to the union of two sibling subtrees.
pub fn avg_distance(scheme: WeightScheme, d_ij1: f64, d_ij2: f64, s1: usize, s2: usize) -> f64 {
    match scheme {
        WeightScheme::Ols => {
            let (s1, s2) = (s1 as f64, s2 as f64);
            (s1 * d_ij1 + s2 * d_ij2) / (s1 + s2)
        }
        WeightScheme::Balanced => 0.5 * (d_ij1 + d_ij2),
    }
}

/// Mixing weight for an internal edge with subtrees A, B on one side and
/// C, D on the other.
pub fn lambda_weight(scheme: WeightScheme, a: usize, b: usize, c: usize, d: usize) -> f64 {
    match scheme {
        WeightScheme::Balanced => 0.5,
        WeightScheme::Ols => {
            let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
            (a * d + b * c) / ((a + b) * (c + d))
        }
    }
}

/// Closed-form OLS average update when leaf k joined subtree A:
/// D_{(k u A) B} = (D_kB + |A| D_AB) / (1 + |A|).
pub fn ols_pair_update(d_kb: f64, d_ab: f64, size_a: usize) -> f64 {
    (d_kb + size_a as f64 * d_ab) / (1.0 + size_a as f64)
}

fn leaf_pair_weights(t: &PhyloTree, from: usize, to: usize, scheme: WeightScheme) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    collect_weights(t, from, to, 1.0, scheme, &mut out);
    if scheme == WeightScheme::Ols {
        let w = 1.0 / out.len() as f64;
        for e in &mut out {
            e.1 = w;
        }
    }
    out
}

fn collect_weights(
    t: &PhyloTree,
    from: usize,
    to: usize,
    w: f64,
    scheme: WeightScheme,
    out: &mut Vec<(usize, f64)>,
) {
    if t.is_leaf(to) {
        out.push((to, w));
        return;
    }
    let children: Vec<usize> = t
        .neighbors(to)
        .iter()
        .map(|&(x, _)| x)
        .filter(|&x| x != from)
        .collect();
    let cw = match scheme {
        WeightScheme::Ols => w,
        WeightScheme::Balanced => w / children.len() as f64,
    };
    for c in children {
        collect_weights(t, to, c, cw, scheme, out);
    }
}

fn weighted_avg(d: &DistanceMatrix, wa: &[(usize, f64)], wb: &[(usize, f64)]) -> f64 {
    let mut sum = 0.0;
    for &(i, wi) in wa {
        for &(j, wj) in wb {
            sum += wi * wj * d.get(i, j);
        }
    }
    sum
}

/// Length estimate of one edge of an unweighted topology under a scheme.
pub fn edge_length(t: &PhyloTree, d: &DistanceMatrix, scheme: WeightScheme, a: usize, b: usize) -> f64 {
    if t.is_leaf(a) || t.is_leaf(b) {
        let (leaf, v) = if t.is_leaf(a) { (a, b) } else { (b, a) };
        let others: Vec<usize> = t
            .neighbors(v)
            .iter()
            .map(|&(x, _)| x)
            .filter(|&x| x != leaf)
            .collect();
        let wa = leaf_pair_weights(t, v, others[0], scheme);
        let wb = leaf_pair_weights(t, v, others[1], scheme);
        let wk = [(leaf, 1.0)];
        return 0.5
            * (weighted_avg(d, &wa, &wk) + weighted_avg(d, &wb, &wk) - weighted_avg(d, &wa, &wb));
    }
    let side = |v: usize, away: usize| -> Vec<usize> {
        t.neighbors(v)
            .iter()
            .map(|&(x, _)| x)
            .filter(|&x| x != away)
            .collect()
    };
    let (n1, n2) = {
        let s = side(a, b);
        (s[0], s[1])
    };
    let (n3, n4) = {
        let s = side(b, a);
        (s[0], s[1])
    };
    let wa = leaf_pair_weights(t, a, n1, scheme);
    let wb = leaf_pair_weights(t, a, n2, scheme);
    let wc = leaf_pair_weights(t, b, n3, scheme);
    let wd = leaf_pair_weights(t, b, n4, scheme);
    let lambda = lambda_weight(scheme, wa.len(), wb.len(), wc.len(), wd.len());
    0.5 * (lambda * (weighted_avg(d, &wa, &wc) + weighted_avg(d, &wb, &wd))
        + (1.0 - lambda) * (weighted_avg(d, &wa, &wd) + weighted_avg(d, &wb, &wc))
        - weighted_avg(d, &wa, &wb)
        - weighted_avg(d, &wc, &wd))
}

/// Total length estimate of a topology. OLS sums the per-edge estimates;
/// the balanced scheme admits the closed form sum over leaf pairs with
/// weights 2^(1 - topological distance).
pub fn tree_length(t: &PhyloTree, d: &DistanceMatrix, scheme: WeightScheme) -> f64 {
    match scheme {
        WeightScheme::Ols => t
            .edges()
            .iter()
            .map(|&(a, b, _)| edge_length(t, d, scheme, a, b))
            .sum(),
        WeightScheme::Balanced => {
            let n = t.leaf_count();
            let mut total = 0.0;
            for i in 0..n {
                let hops = topo_distances(t, i);
                for j in (i + 1)..n {
                    total += 2f64.powi(1 - hops[j] as i32) * d.get(i, j);
                }
            }
            total
        }
    }
}

fn topo_distances(t: &PhyloTree, start: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; t.node_count()];
    let mut queue = std::collections::VecDeque::from([start]);
    dist[start] = 0;
    while let Some(v) = queue.pop_front() {
        for &(w, _) in t.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

struct LastInsertion {
    k: usize,
    u: usize,
    w: usize,
    m: usize,
    prev_avg: HashMap<(usize, usize, usize), f64>,
}

/// The growing tree of an addition run: topology over leaf ids 0..n plus
/// internal ids from n upward, with cached average distances between every
/// pair of subtrees hanging off a shared node.
pub struct AdditionState {
    n: usize,
    labels: Vec<String>,
    d: DistanceMatrix,
    scheme: WeightScheme,
    adj: Vec<Vec<usize>>,
    next_internal: usize,
    inserted: Vec<usize>,
    avg: HashMap<(usize, usize, usize), f64>,
    last: Option<LastInsertion>,
}

fn key(v: usize, a: usize, b: usize) -> (usize, usize, usize) {
    (v, a.min(b), a.max(b))
}

impl AdditionState {
    pub fn new_star(d: &DistanceMatrix, scheme: WeightScheme, first: [usize; 3]) -> AdditionState {
        let n = d.size();
        let mut adj = vec![Vec::new(); n + 1];
        let center = n;
        for leaf in first {
            adj[leaf].push(center);
            adj[center].push(leaf);
        }
        let mut state = AdditionState {
            n,
            labels: d.labels().to_vec(),
            d: d.clone(),
            scheme,
            adj,
            next_internal: n + 1,
            inserted: first.to_vec(),
            avg: HashMap::new(),
            last: None,
        };
        state.rebuild_averages();
        state
    }

    pub fn inserted(&self) -> &[usize] {
        &self.inserted
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (v, nbrs) in self.adj.iter().enumerate() {
            for &w in nbrs {
                if v < w {
                    out.push((v, w));
                }
            }
        }
        out
    }

    /// Leaf count of the subtree reached by stepping from `from` to `to`.
    pub fn subtree_size(&self, from: usize, to: usize) -> usize {
        self.leaves_beyond(from, to).len()
    }

    fn leaves_beyond(&self, from: usize, to: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![(from, to)];
        while let Some((p, v)) = stack.pop() {
            if v < self.n {
                out.push(v);
                continue;
            }
            for &w in &self.adj[v] {
                if w != p {
                    stack.push((v, w));
                }
            }
        }
        out
    }

    fn side_weights(&self, from: usize, to: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.collect(from, to, 1.0, &mut out);
        if self.scheme == WeightScheme::Ols {
            let w = 1.0 / out.len() as f64;
            for e in &mut out {
                e.1 = w;
            }
        }
        out
    }

    fn collect(&self, from: usize, to: usize, w: f64, out: &mut Vec<(usize, f64)>) {
        if to < self.n {
            out.push((to, w));
            return;
        }
        let children: Vec<usize> = self.adj[to].iter().copied().filter(|&x| x != from).collect();
        let cw = match self.scheme {
            WeightScheme::Ols => w,
            WeightScheme::Balanced => w / children.len() as f64,
        };
        for c in children {
            self.collect(to, c, cw, out);
        }
    }

    fn pair_avg(&self, wa: &[(usize, f64)], wb: &[(usize, f64)]) -> f64 {
        let mut sum = 0.0;
        for &(i, wi) in wa {
            for &(j, wj) in wb {
                sum += wi * wj * self.d.get(i, j);
            }
        }
        sum
    }

    fn distant2_keys(&self) -> Vec<(usize, usize, usize)> {
        let mut keys = Vec::new();
        for (v, nbrs) in self.adj.iter().enumerate() {
            for x in 0..nbrs.len() {
                for y in (x + 1)..nbrs.len() {
                    keys.push(key(v, nbrs[x], nbrs[y]));
                }
            }
        }
        keys
    }

    /// Recompute every cached average from scratch.
    pub fn rebuild_averages(&mut self) {
        let keys = self.distant2_keys();
        let mut avg = HashMap::new();
        for (v, a, b) in keys {
            let wa = self.side_weights(v, a);
            let wb = self.side_weights(v, b);
            avg.insert(key(v, a, b), self.pair_avg(&wa, &wb));
        }
        self.avg = avg;
    }

    pub fn cached_avg(&self, v: usize, a: usize, b: usize) -> f64 {
        self.avg[&key(v, a, b)]
    }

    /// Average distance from uninserted leaf k to the subtree beyond
    /// every directed edge.
    fn singleton_avgs(&self, k: usize) -> HashMap<(usize, usize), f64> {
        let mut out = HashMap::new();
        for (v, nbrs) in self.adj.iter().enumerate() {
            for &t in nbrs {
                let w = self.side_weights(v, t);
                out.insert((v, t), self.pair_avg(&[(k, 1.0)], &w));
            }
        }
        out
    }

    /// Local cost of attaching k on the edge from v towards x, out of the
    /// three directions at internal node v.
    fn local_cost(&self, v: usize, x: usize, sing: &HashMap<(usize, usize), f64>) -> f64 {
        let dirs: Vec<usize> = self.adj[v].iter().copied().filter(|&t| t != x).collect();
        let (y, z) = (dirs[0], dirs[1]);
        let d_kx = sing[&(v, x)];
        let d_ky = sing[&(v, y)];
        let d_kz = sing[&(v, z)];
        let d_xy = self.cached_avg(v, x, y);
        let d_xz = self.cached_avg(v, x, z);
        let d_yz = self.cached_avg(v, y, z);
        let lambda = match self.scheme {
            WeightScheme::Balanced => 0.5,
            WeightScheme::Ols => {
                let sx = self.subtree_size(v, x) as f64;
                let sy = self.subtree_size(v, y) as f64;
                let sz = self.subtree_size(v, z) as f64;
                (sz + sx * sy) / ((1.0 + sx) * (sy + sz))
            }
        };
        0.5 * (lambda * (d_ky + d_xz) + (1.0 - lambda) * (d_kz + d_xy) + d_kx + d_yz)
    }

    /// Relative insertion cost f for every edge, anchored at f = 0 on the
    /// edge incident to the smallest-labeled inserted leaf; differences
    /// propagate across shared internal nodes.
    pub fn insertion_costs(&self, k: usize) -> Vec<((usize, usize), f64)> {
        let sing = self.singleton_avgs(k);
        let start_leaf = *self
            .inserted
            .iter()
            .min_by(|&&a, &&b| self.labels[a].cmp(&self.labels[b]))
            .expect("at least three inserted leaves");
        let start = (start_leaf, self.adj[start_leaf][0]);
        let norm = |a: usize, b: usize| (a.min(b), a.max(b));
        let mut f: HashMap<(usize, usize), f64> = HashMap::new();
        f.insert(norm(start.0, start.1), 0.0);
        let mut queue = std::collections::VecDeque::from([start]);
        let mut out = vec![(norm(start.0, start.1), 0.0)];
        while let Some((p, q)) = queue.pop_front() {
            let cur = f[&norm(p, q)];
            for v in [p, q] {
                if v < self.n {
                    continue;
                }
                let other = if v == p { q } else { p };
                for &t in &self.adj[v] {
                    if t == other || f.contains_key(&norm(v, t)) {
                        continue;
                    }
                    let val = cur + self.local_cost(v, t, &sing) - self.local_cost(v, other, &sing);
                    f.insert(norm(v, t), val);
                    out.push((norm(v, t), val));
                    queue.push_back((v, t));
                }
            }
        }
        out
    }

    /// Subdivide an edge with a new node and hang leaf k off it.
    pub fn insert_taxon(&mut self, edge: (usize, usize), k: usize) -> usize {
        let (u, w) = edge;
        let m = self.next_internal;
        self.next_internal += 1;
        if self.adj.len() <= m {
            self.adj.resize(m + 1, Vec::new());
        }
        self.adj[u].retain(|&x| x != w);
        self.adj[w].retain(|&x| x != u);
        self.adj[u].push(m);
        self.adj[w].push(m);
        self.adj[m].extend([u, w, k]);
        self.adj[k].push(m);
        self.inserted.push(k);
        self.last = Some(LastInsertion {
            k,
            u,
            w,
            m,
            prev_avg: std::mem::take(&mut self.avg),
        });
        m
    }

    /// Refresh the average cache after an insertion. Pairs untouched by k
    /// carry over; under OLS a pair whose subtree absorbed k uses the
    /// closed-form update; everything else is recomputed.
    pub fn update_after_insertion(&mut self) -> Result<()> {
        let last = self
            .last
            .take()
            .ok_or_else(|| Error::invariant("no pending insertion to update from"))?;
        let LastInsertion { k, u, w, m, prev_avg } = last;
        let subst = |v: usize, x: usize| -> usize {
            if x != m {
                x
            } else if v == u {
                w
            } else {
                u
            }
        };
        let sing = self.singleton_avgs(k);
        let mut avg = HashMap::new();
        for (v, a, b) in self.distant2_keys() {
            let la = self.leaves_beyond(v, a);
            let lb = self.leaves_beyond(v, b);
            let ka = la.contains(&k);
            let kb = lb.contains(&k);
            let value = if !ka && !kb {
                if v == m {
                    self.pair_avg(&self.side_weights(v, a), &self.side_weights(v, b))
                } else {
                    prev_avg[&key(v, subst(v, a), subst(v, b))]
                }
            } else {
                // exactly one side holds k; orient it as (S, other)
                let (s_nbr, o_nbr, s_len) = if ka { (a, b, la.len()) } else { (b, a, lb.len()) };
                if s_len == 1 {
                    sing[&(v, o_nbr)]
                } else if self.scheme == WeightScheme::Ols {
                    let old = prev_avg[&key(v, subst(v, s_nbr), subst(v, o_nbr))];
                    ols_pair_update(sing[&(v, o_nbr)], old, s_len - 1)
                } else {
                    self.pair_avg(&self.side_weights(v, a), &self.side_weights(v, b))
                }
            };
            avg.insert(key(v, a, b), value);
        }
        self.avg = avg;
        Ok(())
    }

    /// Final tree with branch lengths estimated on the complete topology.
    pub fn into_tree(self) -> Result<PhyloTree> {
        let mut tree = PhyloTree::new(self.labels.clone());
        for _ in self.n..self.next_internal {
            tree.add_internal();
        }
        for (a, b) in self.edges() {
            tree.add_edge(a, b, 0.0);
        }
        tree.validate()?;
        let lengths: Vec<(usize, usize, f64)> = tree
            .edges()
            .iter()
            .map(|&(a, b, _)| (a, b, edge_length(&tree, &self.d, self.scheme, a, b)))
            .collect();
        for (a, b, l) in lengths {
            tree.set_edge_length(a, b, l);
        }
        Ok(tree)
    }
}

/// Full addition run: seed a three-leaf star, insert the remaining taxa
/// one at a time on the cheapest edge, then estimate branch lengths.
pub fn run_addition(d: &DistanceMatrix, scheme: WeightScheme, order: InsertionOrder) -> Result<PhyloTree> {
    let n = d.size();
    if n == 0 {
        return Err(Error::domain("empty distance matrix"));
    }
    let mut tree = PhyloTree::new(d.labels().to_vec());
    if n == 1 {
        return Ok(tree);
    }
    if n == 2 {
        tree.add_edge(0, 1, d.get(0, 1));
        return Ok(tree);
    }
    let mut seq: Vec<usize> = (0..n).collect();
    if let InsertionOrder::Random(seed) = order {
        seq.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut state = AdditionState::new_star(d, scheme, [seq[0], seq[1], seq[2]]);
    for &k in &seq[3..] {
        let costs = state.insertion_costs(k);
        let best = costs
            .iter()
            .min_by(|(ea, fa), (eb, fb)| fa.partial_cmp(fb).unwrap().then(ea.cmp(eb)))
            .expect("tree has edges")
            .0;
        state.insert_taxon(best, k);
        state.update_after_insertion()?;
    }
    state.into_tree()
}
