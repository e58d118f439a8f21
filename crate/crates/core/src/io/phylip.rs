//! PHYLIP-style distance matrices, square or lower-triangular, with
//! whitespace-delimited labels of arbitrary length.

use crate::error::{Error, Result};
use crate::matrix::{DistanceMatrix, MatrixKind};

/// Parses a matrix. Layout is detected from the token count: a square
/// file holds n labels plus n^2 values, a lower-triangular one n labels
/// plus n(n-1)/2 values; the two counts never coincide.
pub fn read_phylip_matrix(text: &str) -> Result<DistanceMatrix> {
    let mut tokens = text.split_whitespace();
    let n: usize = tokens
        .next()
        .ok_or_else(|| Error::parse("line 1", "empty input, expected taxon count"))?
        .parse()
        .map_err(|_| Error::parse("line 1", "first token must be the taxon count"))?;
    if n == 0 {
        return Err(Error::parse("line 1", "taxon count must be at least 1"));
    }
    let rest: Vec<&str> = tokens.collect();
    let square = n * (n + 1);
    let lower = n + n * (n - 1) / 2;
    let mut labels = Vec::with_capacity(n);
    let mut entries = vec![0.0; n * n];
    let parse_value = |tok: &str, row: usize, col: usize| -> Result<f64> {
        let v: f64 = tok.parse().map_err(|_| {
            Error::parse(
                format!("row {}, value {}", row + 1, col + 1),
                format!("{:?} is not a number", tok),
            )
        })?;
        if !v.is_finite() || v < 0.0 {
            return Err(Error::parse(
                format!("row {}, value {}", row + 1, col + 1),
                format!("distance {} must be finite and non-negative", v),
            ));
        }
        Ok(v)
    };
    if rest.len() == square {
        let mut it = rest.iter();
        for i in 0..n {
            labels.push(it.next().unwrap().to_string());
            for j in 0..n {
                entries[i * n + j] = parse_value(it.next().unwrap(), i, j)?;
            }
        }
    } else if rest.len() == lower {
        let mut it = rest.iter();
        for i in 0..n {
            labels.push(it.next().unwrap().to_string());
            for j in 0..i {
                let v = parse_value(it.next().unwrap(), i, j)?;
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
    } else {
        return Err(Error::parse(
            "input",
            format!(
                "{} tokens after the count; a square matrix needs {}, a lower-triangular one {}",
                rest.len(),
                square,
                lower
            ),
        ));
    }
    DistanceMatrix::new(labels, entries, MatrixKind::Generic)
}

/// Serializes in square layout with 10 decimal places; the output
/// re-parses to exactly the printed values.
pub fn write_phylip_matrix(m: &DistanceMatrix) -> String {
    let n = m.size();
    let mut out = format!("{}\n", n);
    for i in 0..n {
        out.push_str(m.labels()[i].as_str());
        for j in 0..n {
            out.push_str(&format!(" {:.10}", m.get(i, j)));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_example_matrix() {
        let text = "5\n\
            A 0 2 7 7 6\n\
            B 2 0 7 7 6\n\
            C 7 7 0 5 5\n\
            D 7 7 5 0 3\n\
            E 6 6 5 3 0\n";
        let m = read_phylip_matrix(text).unwrap();
        assert_eq!(m.labels(), ["A", "B", "C", "D", "E"]);
        assert_eq!(m.get(0, 2), 7.0);
        assert_eq!(m.get(3, 4), 3.0);
    }

    #[test]
    fn lower_triangular_layout() {
        let text = "3\nA\nB 2\nC 7 7\n";
        let m = read_phylip_matrix(text).unwrap();
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.get(2, 0), 7.0);
        assert_eq!(m.get(1, 2), 7.0);
    }

    #[test]
    fn singleton_matrix() {
        let m = read_phylip_matrix("1\nA\n0").unwrap();
        assert_eq!(m.size(), 1);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn asymmetry_rejected() {
        let text = "2\nA 0 2\nB 3 0\n";
        assert!(read_phylip_matrix(text).is_err());
    }

    #[test]
    fn wrong_token_count_rejected() {
        assert!(read_phylip_matrix("3\nA\nB 1\n").is_err());
        assert!(read_phylip_matrix("").is_err());
    }

    #[test]
    fn round_trip_is_identity() {
        let m = crate::matrix::DistanceMatrix::example_five_taxa();
        let text = write_phylip_matrix(&m);
        let re = read_phylip_matrix(&text).unwrap();
        assert_eq!(write_phylip_matrix(&re), text);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(m.get(i, j), re.get(i, j));
            }
        }
    }

    #[test]
    fn third_rounds_to_ten_decimals() {
        let m = DistanceMatrix::new(
            vec!["A".into(), "B".into()],
            vec![0.0, 1.0 / 3.0, 1.0 / 3.0, 0.0],
            MatrixKind::Generic,
        )
        .unwrap();
        let text = write_phylip_matrix(&m);
        assert!(text.contains("0.3333333333"), "{}", text);
        let re = read_phylip_matrix(&text).unwrap();
        assert!((re.get(0, 1) - 1.0 / 3.0).abs() < 1e-9);
    }
}
