//! The neighbor-joining family: Saitou-Nei and Studier-Kepler NJ, UNJ,
//! BIONJ and FNJ, all sharing the selection / branch-length / reduction
//! decomposition.

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;
use crate::phylo::PhyloTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NjVariant {
    SaitouNei,
    StudierKepler,
    Unj,
    Bionj,
    Fnj,
}

impl NjVariant {
    pub const ALL: [NjVariant; 5] = [
        NjVariant::SaitouNei,
        NjVariant::StudierKepler,
        NjVariant::Unj,
        NjVariant::Bionj,
        NjVariant::Fnj,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            NjVariant::SaitouNei => "nj-sn",
            NjVariant::StudierKepler => "nj-sk",
            NjVariant::Unj => "unj",
            NjVariant::Bionj => "bionj",
            NjVariant::Fnj => "fnj",
        }
    }

    pub fn from_name(name: &str) -> Option<NjVariant> {
        Self::ALL.iter().copied().find(|v| v.name() == name)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NjOptions {
    /// Alternate BIONJ pair selection: pick the smallest entry of the
    /// variance matrix instead of the Q criterion.
    pub bionj_select_over_v: bool,
    /// Clamp negative output branch lengths to zero (display aid only).
    pub clamp_negative_lengths: bool,
}

/// Studier-Kepler criterion: Q_ij = (r-2) D_ij - R_i - R_j with full
/// row sums R.
pub fn q_matrix_sk(d: &[f64], r: usize) -> Vec<f64> {
    let row_sums: Vec<f64> = (0..r).map(|i| d[i * r..(i + 1) * r].iter().sum()).collect();
    let mut q = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            if i != j {
                q[i * r + j] = (r as f64 - 2.0) * d[i * r + j] - row_sums[i] - row_sums[j];
            }
        }
    }
    q
}

/// Saitou-Nei least-squares criterion, evaluated literally (inner double
/// sum over unordered pairs excluding i and j).
pub fn q_matrix_sn(d: &[f64], r: usize) -> Vec<f64> {
    let mut q = vec![0.0; r * r];
    if r < 3 {
        return q;
    }
    let rm2 = r as f64 - 2.0;
    for i in 0..r {
        for j in 0..r {
            if i == j {
                continue;
            }
            let mut cross = 0.0;
            for k in 0..r {
                if k != i && k != j {
                    cross += d[i * r + k] + d[j * r + k];
                }
            }
            let mut rest = 0.0;
            for k in 0..r {
                for l in (k + 1)..r {
                    if k != i && k != j && l != i && l != j {
                        rest += d[k * r + l];
                    }
                }
            }
            q[i * r + j] = 0.5 * d[i * r + j] + cross / (2.0 * rm2) + rest / rm2;
        }
    }
    q
}

/// Argmin over a criterion matrix. `order` carries each node's creation
/// rank; ties prefer the pair avoiding the newest node, then the
/// lexicographically smaller (order, order) pair.
pub fn select_pair(q: &[f64], r: usize, order: &[usize]) -> (usize, usize) {
    let mut best: Option<(f64, (usize, usize), (usize, usize))> = None;
    for i in 0..r {
        for j in (i + 1)..r {
            let v = q[i * r + j];
            let key = (order[i].max(order[j]), order[i].min(order[j]));
            if best
                .map(|(bv, bk, _)| v < bv || (v == bv && key < bk))
                .unwrap_or(true)
            {
                best = Some((v, key, (i, j)));
            }
        }
    }
    best.expect("selection requires at least two nodes").2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchScheme {
    Nj,
    Unj,
}

/// Branch lengths of the two joined nodes towards their new parent.
/// Always satisfies d_iu + d_ju = d_ij exactly.
pub fn branch_lengths(
    d: &[f64],
    r: usize,
    i: usize,
    j: usize,
    scheme: BranchScheme,
    sizes: &[usize],
) -> (f64, f64) {
    let d_ij = d[i * r + j];
    let mut weighted = 0.0;
    let mut weight_total = 0.0;
    for k in 0..r {
        if k == i || k == j {
            continue;
        }
        let w = match scheme {
            BranchScheme::Nj => 1.0,
            BranchScheme::Unj => sizes[k] as f64,
        };
        weighted += w * (d[i * r + k] - d[j * r + k]);
        weight_total += w;
    }
    let d_iu = 0.5 * d_ij + weighted / (2.0 * weight_total);
    (d_iu, d_ij - d_iu)
}

/// General reduction D_uk = lambda (D_ik - D_iu) + (1-lambda) (D_jk - D_ju),
/// producing the matrix with rows i, j replaced by the merged node.
/// The merged node takes slot i; slot j is removed by swapping in the
/// last row, mirroring the bookkeeping of the run loop.
pub fn reduce_matrix(
    d: &[f64],
    r: usize,
    i: usize,
    j: usize,
    d_iu: f64,
    d_ju: f64,
    lambda: f64,
) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!("lambda {} outside [0, 1]", lambda)));
    }
    let mut merged = vec![0.0; r];
    for k in 0..r {
        if k != i && k != j {
            merged[k] = lambda * (d[i * r + k] - d_iu) + (1.0 - lambda) * (d[j * r + k] - d_ju);
        }
    }
    let keep: Vec<usize> = (0..r).filter(|&k| k != i && k != j).collect();
    let nr = r - 1;
    let mut out = vec![0.0; nr * nr];
    // new index 0 = merged node u, then surviving nodes in original order
    for (a, &ka) in keep.iter().enumerate() {
        out[(a + 1) * nr] = merged[ka];
        out[a + 1] = merged[ka];
        for (b, &kb) in keep.iter().enumerate() {
            out[(a + 1) * nr + (b + 1)] = d[ka * r + kb];
        }
    }
    Ok(out)
}

/// BIONJ branch weight from the variance matrix, clamped to [0, 1].
pub fn bionj_lambda(v: &[f64], r: usize, i: usize, j: usize) -> f64 {
    let v_ij = v[i * r + j];
    if v_ij == 0.0 {
        return 0.5;
    }
    let mut sum = 0.0;
    for k in 0..r {
        if k != i && k != j {
            sum += v[j * r + k] - v[i * r + k];
        }
    }
    (0.5 + sum / (2.0 * (r as f64 - 2.0) * v_ij)).clamp(0.0, 1.0)
}

/// Three remaining nodes close into a star: the edge towards x has
/// length (D_xy + D_xz - D_yz) / 2.
pub fn resolve_final_three(d: &[f64; 9]) -> [f64; 3] {
    let (d01, d02, d12) = (d[1], d[2], d[5]);
    [
        (d01 + d02 - d12) / 2.0,
        (d01 + d12 - d02) / 2.0,
        (d02 + d12 - d01) / 2.0,
    ]
}

struct NjState {
    d: Vec<f64>,
    v: Vec<f64>,
    r: usize,
    node: Vec<usize>,
    order: Vec<usize>,
    size: Vec<usize>,
    /// FNJ visible partner of each active node.
    visible: Vec<usize>,
}

impl NjState {
    fn remove_pair(&mut self, i: usize, j: usize, merged_d: Vec<f64>, merged_v: Vec<f64>) {
        let keep: Vec<usize> = (0..self.r).filter(|&k| k != i && k != j).collect();
        self.node = std::iter::once(self.node[i])
            .chain(keep.iter().map(|&k| self.node[k]))
            .collect();
        self.order = std::iter::once(self.order[i])
            .chain(keep.iter().map(|&k| self.order[k]))
            .collect();
        self.size = std::iter::once(self.size[i])
            .chain(keep.iter().map(|&k| self.size[k]))
            .collect();
        if !self.visible.is_empty() {
            // remap old indices to new: u at 0, survivors shifted
            let mut remap = vec![usize::MAX; self.r];
            for (new, &old) in keep.iter().enumerate() {
                remap[old] = new + 1;
            }
            let mut vis = vec![0usize; keep.len() + 1];
            for (new, &old) in keep.iter().enumerate() {
                let p = self.visible[old];
                vis[new + 1] = if p == i || p == j { 0 } else { remap[p] };
            }
            self.visible = vis;
        }
        self.d = merged_d;
        self.v = merged_v;
        self.r -= 1;
    }
}

/// Runs the selected NJ variant over a distance matrix, producing an
/// unrooted tree (binary for n >= 3, a single edge for n = 2).
pub fn run_nj(m: &DistanceMatrix, variant: NjVariant, opts: &NjOptions) -> Result<PhyloTree> {
    let n = m.size();
    if n == 0 {
        return Err(Error::domain("empty distance matrix"));
    }
    let mut tree = PhyloTree::new(m.labels().to_vec());
    if n == 1 {
        return Ok(tree);
    }
    if n == 2 {
        tree.add_edge(0, 1, m.get(0, 1));
        return Ok(tree);
    }

    let mut state = NjState {
        d: {
            let mut d = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    d[i * n + j] = m.get(i, j);
                }
            }
            d
        },
        v: Vec::new(),
        r: n,
        node: (0..n).collect(),
        order: (0..n).collect(),
        size: vec![1; n],
        visible: Vec::new(),
    };
    if variant == NjVariant::Bionj {
        state.v = state.d.clone();
    }
    if variant == NjVariant::Fnj {
        let q = q_matrix_sk(&state.d, n);
        state.visible = (0..n)
            .map(|i| row_argmin(&q, n, i, &state.order))
            .collect();
    }
    let mut next_order = n;

    while state.r > 3 {
        let r = state.r;
        let (i, j) = match variant {
            NjVariant::SaitouNei => {
                let q = q_matrix_sn(&state.d, r);
                select_pair(&q, r, &state.order)
            }
            NjVariant::StudierKepler | NjVariant::Unj => {
                let q = q_matrix_sk(&state.d, r);
                select_pair(&q, r, &state.order)
            }
            NjVariant::Bionj => {
                if opts.bionj_select_over_v {
                    select_pair(&state.v, r, &state.order)
                } else {
                    let q = q_matrix_sk(&state.d, r);
                    select_pair(&q, r, &state.order)
                }
            }
            NjVariant::Fnj => {
                let q = q_matrix_sk(&state.d, r);
                select_visible(&q, r, &state.visible, &state.order)
            }
        };

        let scheme = if variant == NjVariant::Unj {
            BranchScheme::Unj
        } else {
            BranchScheme::Nj
        };
        let (d_iu, d_ju) = branch_lengths(&state.d, r, i, j, scheme, &state.size);

        let lambda = match variant {
            NjVariant::Unj => {
                state.size[i] as f64 / (state.size[i] as f64 + state.size[j] as f64)
            }
            NjVariant::Bionj => bionj_lambda(&state.v, r, i, j),
            _ => 0.5,
        };

        // Saitou and Nei reduce without subtracting the new branches.
        let (red_iu, red_ju) = if variant == NjVariant::SaitouNei {
            (0.0, 0.0)
        } else {
            (d_iu, d_ju)
        };
        let merged_d = reduce_matrix(&state.d, r, i, j, red_iu, red_ju, lambda)?;
        let merged_v = if variant == NjVariant::Bionj {
            let v_split = lambda * (1.0 - lambda) * state.v[i * r + j];
            reduce_matrix(&state.v, r, i, j, v_split, v_split, lambda)?
        } else {
            Vec::new()
        };

        let u = tree.add_internal();
        tree.add_edge(state.node[i], u, d_iu);
        tree.add_edge(state.node[j], u, d_ju);

        let new_size = state.size[i] + state.size[j];
        state.remove_pair(i, j, merged_d, merged_v);
        state.node[0] = u;
        state.order[0] = next_order;
        state.size[0] = new_size;
        next_order += 1;

        if variant == NjVariant::Fnj {
            let q = q_matrix_sk(&state.d, state.r);
            state.visible[0] = row_argmin(&q, state.r, 0, &state.order);
        }
    }

    let mut d3 = [0.0; 9];
    d3.copy_from_slice(&state.d);
    let lengths = resolve_final_three(&d3);
    let center = tree.add_internal();
    for (slot, len) in lengths.iter().enumerate() {
        tree.add_edge(state.node[slot], center, *len);
    }
    if opts.clamp_negative_lengths {
        for (a, b, w) in tree.edges() {
            if w < 0.0 {
                tree.set_edge_length(a, b, 0.0);
            }
        }
    }
    tree.validate()?;
    Ok(tree)
}

fn row_argmin(q: &[f64], r: usize, i: usize, order: &[usize]) -> usize {
    (0..r)
        .filter(|&x| x != i)
        .min_by(|&a, &b| {
            q[i * r + a]
                .partial_cmp(&q[i * r + b])
                .unwrap()
                .then(order[a].cmp(&order[b]))
        })
        .expect("row argmin over at least two nodes")
}

fn select_visible(q: &[f64], r: usize, visible: &[usize], order: &[usize]) -> (usize, usize) {
    let mut best: Option<(f64, (usize, usize), (usize, usize))> = None;
    for (i, &p) in visible.iter().enumerate().take(r) {
        let (a, b) = (i.min(p), i.max(p));
        let v = q[a * r + b];
        let key = (order[a].max(order[b]), order[a].min(order[b]));
        if best
            .map(|(bv, bk, _)| v < bv || (v == bv && key < bk))
            .unwrap_or(true)
        {
            best = Some((v, key, (a, b)));
        }
    }
    best.expect("visible set is never empty").2
}
