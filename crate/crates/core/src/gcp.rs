//! Globally-closest-pair agglomerative engine with pluggable reduction
//! formulas, plus the nearest-neighbor-chain acceleration for the
//! convex and commutative kinds.

use crate::dendrogram::{Dendrogram, Merge};
use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;

/// Reduction formula selecting the GCP variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionKind {
    Upgma,
    Wpgma,
    Single,
    Complete,
    Upgmc,
    Wpgmc,
}

impl ReductionKind {
    pub const ALL: [ReductionKind; 6] = [
        ReductionKind::Upgma,
        ReductionKind::Wpgma,
        ReductionKind::Single,
        ReductionKind::Complete,
        ReductionKind::Upgmc,
        ReductionKind::Wpgmc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ReductionKind::Upgma => "upgma",
            ReductionKind::Wpgma => "wpgma",
            ReductionKind::Single => "single",
            ReductionKind::Complete => "complete",
            ReductionKind::Upgmc => "upgmc",
            ReductionKind::Wpgmc => "wpgmc",
        }
    }

    pub fn from_name(name: &str) -> Option<ReductionKind> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }

    /// Centroid formulas can leave the [min, max] interval and are not
    /// safe under the chain acceleration.
    pub fn is_centroid(&self) -> bool {
        matches!(self, ReductionKind::Upgmc | ReductionKind::Wpgmc)
    }
}

/// Dissimilarity from the merged cluster (i u j) to a third cluster k.
/// Centroid kinds may return negative values on degenerate inputs;
/// callers decide whether to clamp.
pub fn reduce(
    kind: ReductionKind,
    size_i: usize,
    size_j: usize,
    d_ik: f64,
    d_jk: f64,
    d_ij: f64,
) -> f64 {
    let (si, sj) = (size_i as f64, size_j as f64);
    match kind {
        ReductionKind::Upgma => (si * d_ik + sj * d_jk) / (si + sj),
        ReductionKind::Wpgma => 0.5 * (d_ik + d_jk),
        ReductionKind::Single => d_ik.min(d_jk),
        ReductionKind::Complete => d_ik.max(d_jk),
        ReductionKind::Upgmc => {
            (si * d_ik + sj * d_jk) / (si + sj) - si * sj * d_ij / ((si + sj) * (si + sj))
        }
        ReductionKind::Wpgmc => 0.5 * d_ik + 0.5 * d_jk - 0.25 * d_ij,
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GcpOptions {
    /// Clamp negative centroid reductions to zero instead of keeping them.
    pub clamp_negative: bool,
}

/// A clustering run plus its degeneracy diagnostics.
#[derive(Debug)]
pub struct GcpRun {
    pub dendrogram: Dendrogram,
    /// Centroid reductions that came out negative (clamped or not).
    pub negative_reductions: usize,
}

struct Workspace {
    /// Row stride of `d`; starts at n and shrinks on repacks.
    stride: usize,
    d: Vec<f64>,
    /// Slots 0..live are in use; merges compact the matrix so the
    /// working set shrinks as clusters disappear, and the storage is
    /// repacked to the live size whenever it halves so late merges run
    /// inside the cache hierarchy.
    live: usize,
    size: Vec<usize>,
    /// Current cluster id held by each slot (leaves 0..n, then n+step).
    id: Vec<usize>,
    clamp: bool,
    negative_reductions: usize,
}

impl Workspace {
    fn new(m: &DistanceMatrix, opts: &GcpOptions) -> Workspace {
        let n = m.size();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = m.get(i, j);
            }
        }
        Workspace {
            stride: n,
            d,
            live: n,
            size: vec![1; n],
            id: (0..n).collect(),
            clamp: opts.clamp_negative,
            negative_reductions: 0,
        }
    }

    fn dist(&self, a: usize, b: usize) -> f64 {
        self.d[a * self.stride + b]
    }

    /// Merges slot `j` into slot `i`; `i` now holds cluster `new_id`.
    /// The last live slot is moved into `j` to keep the live region
    /// contiguous; returns that relocation as (old slot, new slot).
    fn merge(
        &mut self,
        kind: ReductionKind,
        i: usize,
        j: usize,
        new_id: usize,
    ) -> Option<(usize, usize)> {
        let d_ij = self.dist(i, j);
        for k in 0..self.live {
            if k == i || k == j {
                continue;
            }
            let mut v = reduce(
                kind,
                self.size[i],
                self.size[j],
                self.dist(i, k),
                self.dist(j, k),
                d_ij,
            );
            if v < 0.0 {
                self.negative_reductions += 1;
                if self.clamp {
                    v = 0.0;
                }
            }
            self.d[i * self.stride + k] = v;
            self.d[k * self.stride + i] = v;
        }
        self.size[i] += self.size[j];
        self.id[i] = new_id;
        let last = self.live - 1;
        self.live = last;
        let moved = if j == last {
            None
        } else {
            for k in 0..self.live {
                self.d[j * self.stride + k] = self.d[last * self.stride + k];
                self.d[k * self.stride + j] = self.d[k * self.stride + last];
            }
            self.d[j * self.stride + j] = 0.0;
            self.size[j] = self.size[last];
            self.id[j] = self.id[last];
            Some((last, j))
        };
        if self.live > 0 && self.live * 2 <= self.stride {
            self.repack();
        }
        moved
    }

    /// Copies the live block into a freshly strided matrix so the
    /// touched footprint matches the remaining problem size.
    fn repack(&mut self) {
        let m = self.live;
        let mut packed = vec![0.0; m * m];
        for r in 0..m {
            packed[r * m..(r + 1) * m]
                .copy_from_slice(&self.d[r * self.stride..r * self.stride + m]);
        }
        self.d = packed;
        self.stride = m;
    }
}

/// Canonical tie rule: among equal-criterion pairs take the one whose
/// (min id, max id) pair is lexicographically smallest.
fn pair_key(id_a: usize, id_b: usize) -> (usize, usize) {
    (id_a.min(id_b), id_a.max(id_b))
}

/// Exhaustive globally-closest-pair clustering: scan every active pair,
/// merge the closest; merge heights are D_ij / 2.
pub fn run_gcp(m: &DistanceMatrix, kind: ReductionKind, opts: &GcpOptions) -> Result<GcpRun> {
    let n = m.size();
    let mut ws = Workspace::new(m, opts);
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for a in 0..ws.live {
            for b in (a + 1)..ws.live {
                let d = ws.dist(a, b);
                let key = pair_key(ws.id[a], ws.id[b]);
                if best
                    .map(|(bd, bk, _, _)| d < bd || (d == bd && key < bk))
                    .unwrap_or(true)
                {
                    best = Some((d, key, a, b));
                }
            }
        }
        let (d, key, a, b) = best.ok_or_else(|| Error::invariant("no pair to merge"))?;
        merges.push(Merge {
            left: key.0,
            right: key.1,
            height: d / 2.0,
        });
        ws.merge(kind, a, b, n + step);
    }
    Ok(GcpRun {
        dendrogram: Dendrogram::new(m.labels().to_vec(), merges)?,
        negative_reductions: ws.negative_reductions,
    })
}

/// Nearest-neighbor-chain clustering, O(n^2). Only valid for reductions
/// that are convex and commutative, so the centroid kinds are refused.
pub fn run_nn_chain(m: &DistanceMatrix, kind: ReductionKind, opts: &GcpOptions) -> Result<GcpRun> {
    if kind.is_centroid() {
        return Err(Error::domain(format!(
            "{} reduction is not convex; the chain acceleration is unsupported",
            kind.name()
        )));
    }
    let n = m.size();
    let mut ws = Workspace::new(m, opts);
    // Raw merges in discovery order; canonicalized by height afterwards.
    let mut raw: Vec<(usize, usize, f64)> = Vec::with_capacity(n.saturating_sub(1));
    let mut chain: Vec<usize> = Vec::new();
    let mut remaining = n;
    let mut next_id = n;
    while remaining > 1 {
        if chain.is_empty() {
            let start = (0..ws.live).min_by_key(|&s| ws.id[s]).unwrap();
            chain.push(start);
        }
        let a = *chain.last().unwrap();
        let prev = chain.len().checked_sub(2).map(|p| chain[p]);
        // Nearest active neighbor of `a`; on ties prefer the previous
        // chain element (closes the reciprocal pair), then smallest id.
        let mut nn: Option<(f64, usize)> = None;
        for b in 0..ws.live {
            if b == a {
                continue;
            }
            let d = ws.dist(a, b);
            let better = match nn {
                None => true,
                Some((bd, bb)) => {
                    d < bd
                        || (d == bd
                            && (Some(b) == prev
                                || (Some(bb) != prev && ws.id[b] < ws.id[bb])))
                }
            };
            if better {
                nn = Some((d, b));
            }
        }
        let (d, b) = nn.ok_or_else(|| Error::invariant("chain found no neighbor"))?;
        if Some(b) == prev {
            chain.pop();
            chain.pop();
            raw.push((ws.id[a], ws.id[b], d / 2.0));
            if let Some((from, to)) = ws.merge(kind, a, b, next_id) {
                for slot in chain.iter_mut() {
                    if *slot == from {
                        *slot = to;
                    }
                }
            }
            next_id += 1;
            remaining -= 1;
        } else {
            chain.push(b);
        }
    }

    Ok(GcpRun {
        dendrogram: canonicalize(m.labels().to_vec(), raw, n)?,
        negative_reductions: ws.negative_reductions,
    })
}

/// Sorts merges by height (stable, so a cluster is always formed before
/// it is consumed) and relabels cluster ids into the 0..n, n+step scheme.
fn canonicalize(
    labels: Vec<String>,
    raw: Vec<(usize, usize, f64)>,
    n: usize,
) -> Result<Dendrogram> {
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&x, &y| raw[x].2.partial_cmp(&raw[y].2).unwrap().then(x.cmp(&y)));
    let mut relabel: Vec<usize> = (0..n + raw.len()).collect();
    let mut merges = Vec::with_capacity(raw.len());
    for (step, &idx) in order.iter().enumerate() {
        let (a, b, h) = raw[idx];
        let (left, right) = (relabel[a].min(relabel[b]), relabel[a].max(relabel[b]));
        merges.push(Merge {
            left,
            right,
            height: h,
        });
        relabel[n + idx] = n + step;
    }
    Dendrogram::new(labels, merges)
}
