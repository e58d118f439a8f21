use crate::error::{Error, Result};

/// One agglomeration step: clusters `left` and `right` join at `height`,
/// forming cluster `n + step` (leaves are clusters `0..n`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

/// Rooted merge hierarchy produced by agglomerative clustering.
#[derive(Debug, Clone)]
pub struct Dendrogram {
    labels: Vec<String>,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn new(labels: Vec<String>, merges: Vec<Merge>) -> Result<Self> {
        let n = labels.len();
        if n > 0 && merges.len() != n - 1 {
            return Err(Error::invariant(format!(
                "{} merges for {} leaves",
                merges.len(),
                n
            )));
        }
        let mut used = vec![false; n + merges.len()];
        for (step, m) in merges.iter().enumerate() {
            let new_id = n + step;
            if m.left >= new_id || m.right >= new_id || m.left == m.right {
                return Err(Error::invariant(format!(
                    "merge {} references invalid children {} and {}",
                    step, m.left, m.right
                )));
            }
            for child in [m.left, m.right] {
                if used[child] {
                    return Err(Error::invariant(format!(
                        "cluster {} used as a child twice",
                        child
                    )));
                }
                used[child] = true;
            }
            if m.height < 0.0 {
                return Err(Error::invariant(format!(
                    "negative merge height {}",
                    m.height
                )));
            }
        }
        Ok(Dendrogram { labels, merges })
    }

    pub fn leaf_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Height at which cluster `id` was formed; 0 for leaves.
    pub fn height_of(&self, id: usize) -> f64 {
        let n = self.leaf_count();
        if id < n {
            0.0
        } else {
            self.merges[id - n].height
        }
    }

    /// True when merge heights never decrease over the run.
    pub fn heights_monotone(&self) -> bool {
        self.merges
            .windows(2)
            .all(|w| w[1].height >= w[0].height - 1e-12)
    }

    /// Pairwise cophenetic distances: twice the height of the lowest
    /// cluster containing both leaves.
    pub fn cophenetic_matrix(&self) -> Vec<f64> {
        let n = self.leaf_count();
        let mut member: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let mut out = vec![0.0; n * n];
        for m in &self.merges {
            let left = std::mem::take(&mut member[m.left]);
            let right = std::mem::take(&mut member[m.right]);
            for &i in &left {
                for &j in &right {
                    out[i * n + j] = 2.0 * m.height;
                    out[j * n + i] = 2.0 * m.height;
                }
            }
            let mut merged = left;
            merged.extend(right);
            member.push(merged);
        }
        out
    }
}
