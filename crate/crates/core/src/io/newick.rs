//! Deterministic Newick serialization for dendrograms and unrooted trees.

use crate::dendrogram::Dendrogram;
use crate::phylo::PhyloTree;

/// Branch length with fixed precision, trailing zeros trimmed.
fn fmt_len(v: f64, precision: usize) -> String {
    let s = format!("{:.*}", precision, v);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rooted serialization of a dendrogram; each branch carries the height
/// difference between the merge and its child.
pub fn dendrogram_to_newick(d: &Dendrogram, precision: usize) -> String {
    let n = d.labels().len();
    if n == 1 {
        return format!("{};\n", d.labels()[0]);
    }
    let root = n + d.merges().len() - 1;
    let (text, _) = render_dend(d, root, precision);
    format!("{};\n", text)
}

/// Returns the rendered node and its smallest descendant label.
fn render_dend(d: &Dendrogram, node: usize, precision: usize) -> (String, String) {
    let n = d.labels().len();
    if node < n {
        let label = d.labels()[node].clone();
        return (label.clone(), label);
    }
    let merge = &d.merges()[node - n];
    let h = merge.height;
    let mut children = Vec::new();
    for child in [merge.left, merge.right] {
        let (text, min_label) = render_dend(d, child, precision);
        let child_h = d.height_of(child);
        children.push((min_label, format!("{}:{}", text, fmt_len(h - child_h, precision))));
    }
    children.sort();
    let min_label = children[0].0.clone();
    let inner: Vec<String> = children.into_iter().map(|(_, t)| t).collect();
    (format!("({})", inner.join(",")), min_label)
}

/// Serialization of an unrooted tree, rooted for output at the internal
/// node adjacent to the smallest leaf label.
pub fn phylo_to_newick(t: &PhyloTree, precision: usize) -> String {
    let n = t.leaf_count();
    if n == 0 {
        return ";\n".to_string();
    }
    if n == 1 {
        return format!("{};\n", t.leaf_labels()[0]);
    }
    let smallest = (0..n)
        .min_by(|&a, &b| t.leaf_labels()[a].cmp(&t.leaf_labels()[b]))
        .unwrap();
    if n == 2 {
        let other = 1 - smallest;
        let w = t.neighbors(smallest)[0].1;
        return format!(
            "({}:{}){};\n",
            t.leaf_labels()[other],
            fmt_len(w, precision),
            t.leaf_labels()[smallest]
        );
    }
    let root = t.neighbors(smallest)[0].0;
    let (text, _) = render_phylo(t, usize::MAX, root, precision);
    format!("{};\n", text)
}

fn render_phylo(t: &PhyloTree, parent: usize, node: usize, precision: usize) -> (String, String) {
    if t.is_leaf(node) {
        let label = t.leaf_labels()[node].clone();
        return (label.clone(), label);
    }
    let mut children = Vec::new();
    for &(child, w) in t.neighbors(node) {
        if child == parent {
            continue;
        }
        let (text, min_label) = render_phylo(t, node, child, precision);
        children.push((min_label, format!("{}:{}", text, fmt_len(w, precision))));
    }
    children.sort();
    let min_label = children[0].0.clone();
    let inner: Vec<String> = children.into_iter().map(|(_, t)| t).collect();
    (format!("({})", inner.join(",")), min_label)
}
