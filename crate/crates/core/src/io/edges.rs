//! Edge-list output for forests and Steiner trees: plain TSV or DOT.

use crate::fhp::SteinerTree;
use crate::mst::Forest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeFormat {
    Tsv,
    Dot,
}

impl EdgeFormat {
    pub fn from_name(name: &str) -> Option<EdgeFormat> {
        match name {
            "tsv" => Some(EdgeFormat::Tsv),
            "dot" => Some(EdgeFormat::Dot),
            _ => None,
        }
    }
}

fn render(rows: Vec<(String, String, String)>, format: EdgeFormat) -> String {
    let mut rows = rows;
    rows.sort();
    match format {
        EdgeFormat::Tsv => {
            let mut out = String::new();
            for (u, v, w) in rows {
                out.push_str(&format!("{}\t{}\t{}\n", u, v, w));
            }
            out
        }
        EdgeFormat::Dot => {
            let mut out = String::from("graph phylogeny {\n");
            for (u, v, w) in rows {
                out.push_str(&format!("  \"{}\" -- \"{}\" [label=\"{}\"];\n", u, v, w));
            }
            out.push_str("}\n");
            out
        }
    }
}

fn fmt_weight(w: f64) -> String {
    // integral weights print without a decimal point
    if w.fract() == 0.0 && w.abs() < 1e15 {
        format!("{}", w as i64)
    } else {
        format!("{}", w)
    }
}

pub fn write_forest_edges(f: &Forest, labels: &[String], format: EdgeFormat) -> String {
    let rows = f
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = (labels[e.u].clone(), labels[e.v].clone());
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            (a, b, fmt_weight(e.weight))
        })
        .collect();
    render(rows, format)
}

pub fn write_steiner_edges(t: &SteinerTree, format: EdgeFormat) -> String {
    let rows = t
        .labeled_edges()
        .into_iter()
        .map(|(u, v, w, _)| {
            let (a, b) = (t.node(u).label.clone(), t.node(v).label.clone());
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            (a, b, w.to_string())
        })
        .collect();
    render(rows, format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DistanceMatrix;
    use crate::mst::run_goeburst_full_mst;

    #[test]
    fn full_mst_tsv() {
        let d = DistanceMatrix::example_five_taxa();
        let f = run_goeburst_full_mst(&d, None).unwrap();
        let text = write_forest_edges(&f, &d.labels().to_vec(), EdgeFormat::Tsv);
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0], "A\tB\t2");
        let weights: Vec<&str> = rows.iter().map(|r| r.split('\t').nth(2).unwrap()).collect();
        let mut sorted = weights.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec!["2", "3", "5", "6"]);
    }

    #[test]
    fn empty_forest_tsv() {
        let d = DistanceMatrix::example_five_taxa();
        let f = crate::mst::run_goeburst(&d, None, 1).unwrap();
        assert_eq!(
            write_forest_edges(&f, &d.labels().to_vec(), EdgeFormat::Tsv),
            ""
        );
    }

    #[test]
    fn dot_output_shape() {
        let d = DistanceMatrix::example_five_taxa();
        let f = crate::mst::run_goeburst(&d, None, 2).unwrap();
        let dot = write_forest_edges(&f, &d.labels().to_vec(), EdgeFormat::Dot);
        assert!(dot.starts_with("graph phylogeny {"));
        assert!(dot.contains("\"A\" -- \"B\" [label=\"2\"];"));
        assert!(dot.trim_end().ends_with('}'));
    }
}
