use crate::error::{Error, Result};

/// What the entries of a distance matrix represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    RawHamming,
    NormalizedHamming,
    JcCorrected,
    Generic,
}

/// Symmetric dissimilarity matrix with labelled rows.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    entries: Vec<f64>, // row-major n*n
    kind: MatrixKind,
}

impl DistanceMatrix {
    /// Builds a matrix from row-major entries, validating symmetry,
    /// a zero diagonal, finiteness and non-negativity.
    pub fn new(labels: Vec<String>, entries: Vec<f64>, kind: MatrixKind) -> Result<Self> {
        let n = labels.len();
        if entries.len() != n * n {
            return Err(Error::invariant(format!(
                "matrix size {} does not match {} labels",
                entries.len(),
                n
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::domain(format!(
                    "nonzero diagonal at {}",
                    labels[i]
                )));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() {
                    return Err(Error::domain(format!(
                        "non-finite entry at ({}, {})",
                        labels[i], labels[j]
                    )));
                }
                if v < 0.0 {
                    return Err(Error::domain(format!(
                        "negative entry {} at ({}, {})",
                        v, labels[i], labels[j]
                    )));
                }
                if (v - entries[j * n + i]).abs() > 1e-9 {
                    return Err(Error::domain(format!(
                        "asymmetry at ({}, {}): {} vs {}",
                        labels[i],
                        labels[j],
                        v,
                        entries[j * n + i]
                    )));
                }
            }
        }
        Ok(DistanceMatrix {
            labels,
            entries,
            kind,
        })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size() + j]
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// True when every entry is (numerically) a non-negative integer.
    pub fn is_integer_valued(&self) -> bool {
        self.entries.iter().all(|v| v.fract() == 0.0)
    }

    /// The artificial five-taxon example matrix used throughout the tests.
    pub fn example_five_taxa() -> DistanceMatrix {
        let labels = ["A", "B", "C", "D", "E"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        #[rustfmt::skip]
        let entries = vec![
            0.0, 2.0, 7.0, 7.0, 6.0,
            2.0, 0.0, 7.0, 7.0, 6.0,
            7.0, 7.0, 0.0, 5.0, 5.0,
            7.0, 7.0, 5.0, 0.0, 3.0,
            6.0, 6.0, 5.0, 3.0, 0.0,
        ];
        DistanceMatrix::new(labels, entries, MatrixKind::RawHamming).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_matrix_is_valid() {
        let m = DistanceMatrix::example_five_taxa();
        assert_eq!(m.size(), 5);
        assert_eq!(m.get(0, 2), 7.0);
        assert!(m.is_integer_valued());
    }

    #[test]
    fn asymmetry_rejected() {
        let entries = vec![0.0, 2.0, 3.0, 0.0];
        let err = DistanceMatrix::new(
            vec!["A".into(), "B".into()],
            entries,
            MatrixKind::Generic,
        )
        .unwrap_err();
        assert!(err.to_string().contains("asymmetry"));
    }

    #[test]
    fn negative_rejected() {
        let entries = vec![0.0, -1.0, -1.0, 0.0];
        assert!(DistanceMatrix::new(
            vec!["A".into(), "B".into()],
            entries,
            MatrixKind::Generic
        )
        .is_err());
    }
}
