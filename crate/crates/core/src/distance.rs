//! Pairwise dissimilarities over allele vectors: Hamming counts with
//! missing-data policies and the Jukes-Cantor correction.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{DistanceMatrix, MatrixKind};
use crate::profile::{Allele, ProfileSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingMode {
    /// Any missing value is an error.
    Strict,
    /// Compare only loci where both alleles are present.
    PairwiseDeletion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingScale {
    None,
    /// Report raw counts rescaled to the full locus count, diff * L / shared.
    RescaleToL,
}

#[derive(Debug, Clone, Copy)]
pub struct MissingPolicy {
    pub mode: MissingMode,
    pub scale: MissingScale,
}

impl Default for MissingPolicy {
    fn default() -> Self {
        MissingPolicy {
            mode: MissingMode::Strict,
            scale: MissingScale::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Raw,
    Normalized,
    Jc,
}

/// Counts differing and shared loci between two allele vectors.
///
/// `shared` is the number of loci where both alleles are present and
/// `diff` the number of those where they disagree.
pub fn hamming_raw(a: &[Allele], b: &[Allele], policy: &MissingPolicy) -> Result<(u64, u64)> {
    if a.len() != b.len() {
        return Err(Error::domain(format!(
            "allele vector length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut diff = 0u64;
    let mut shared = 0u64;
    for (x, y) in a.iter().zip(b) {
        match (x, y) {
            (Some(x), Some(y)) => {
                shared += 1;
                if x != y {
                    diff += 1;
                }
            }
            _ => {
                if policy.mode == MissingMode::Strict {
                    return Err(Error::domain(
                        "missing value under strict missing-data policy",
                    ));
                }
            }
        }
    }
    if policy.mode == MissingMode::PairwiseDeletion && shared == 0 {
        return Err(Error::domain(
            "pairwise deletion left no shared loci for the pair",
        ));
    }
    Ok((diff, shared))
}

/// Proportion of differing loci, in [0, 1].
pub fn normalized_hamming(a: &[Allele], b: &[Allele], policy: &MissingPolicy) -> Result<f64> {
    let (diff, shared) = hamming_raw(a, b, policy)?;
    let denom = match policy.mode {
        MissingMode::Strict => a.len() as f64,
        MissingMode::PairwiseDeletion => shared as f64,
    };
    Ok(diff as f64 / denom)
}

/// Raw count under the policy's scale rule: diff, or diff * L / shared
/// when rescaling pairwise-deleted counts to the full locus count.
pub fn scaled_raw(a: &[Allele], b: &[Allele], policy: &MissingPolicy) -> Result<f64> {
    let (diff, shared) = hamming_raw(a, b, policy)?;
    match (policy.mode, policy.scale) {
        (MissingMode::PairwiseDeletion, MissingScale::RescaleToL) => {
            Ok(diff as f64 * a.len() as f64 / shared as f64)
        }
        _ => Ok(diff as f64),
    }
}

/// Jukes-Cantor correction of a normalized Hamming fraction,
/// -(3/4) ln(1 - (4/3) h).
pub fn jc_correct(h: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::domain(format!(
            "normalized distance {} outside [0, 1]",
            h
        )));
    }
    if h >= 0.75 {
        return Err(Error::domain(format!(
            "Jukes-Cantor saturation: fraction {} >= 0.75",
            h
        )));
    }
    Ok(-0.75 * (1.0 - h * 4.0 / 3.0).ln())
}

/// Saturation-tolerant variant: fractions at or above 0.75 map to `ceiling`.
pub fn jc_correct_clamped(h: f64, ceiling: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::domain(format!(
            "normalized distance {} outside [0, 1]",
            h
        )));
    }
    if h >= 0.75 {
        return Ok(ceiling);
    }
    jc_correct(h).map(|v| v.min(ceiling))
}

/// Options for matrix construction from a profile set.
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub metric: Metric,
    pub policy: MissingPolicy,
    /// Jukes-Cantor: clamp saturated pairs to this ceiling instead of erroring.
    pub jc_clamp: Option<f64>,
}

/// Builds the full pairwise matrix. Pair computations are independent,
/// so rows are filled in parallel; output is schedule-independent.
pub fn build_distance_matrix(set: &ProfileSet, opts: &BuildOptions) -> Result<DistanceMatrix> {
    let n = set.len();
    let pair = |i: usize, j: usize| -> Result<f64> {
        let a = &set.get(i).alleles;
        let b = &set.get(j).alleles;
        let value = match opts.metric {
            Metric::Raw => scaled_raw(a, b, &opts.policy),
            Metric::Normalized => normalized_hamming(a, b, &opts.policy),
            Metric::Jc => {
                let h = normalized_hamming(a, b, &opts.policy)?;
                match opts.jc_clamp {
                    Some(ceiling) => jc_correct_clamped(h, ceiling),
                    None => jc_correct(h),
                }
            }
        };
        value.map_err(|e| {
            Error::domain(format!(
                "pair ({}, {}): {}",
                set.get(i).otu_label,
                set.get(j).otu_label,
                e
            ))
        })
    };

    let rows: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n];
            for j in 0..n {
                if j != i {
                    row[j] = pair(i.min(j), i.max(j))?;
                }
            }
            Ok(row)
        })
        .collect();

    let mut entries = Vec::with_capacity(n * n);
    for row in rows {
        entries.extend(row?);
    }

    let rescaled = opts.policy.mode == MissingMode::PairwiseDeletion
        && opts.policy.scale == MissingScale::RescaleToL;
    let kind = match opts.metric {
        // Rescaled counts are generally fractional, so they lose the raw tag.
        Metric::Raw if rescaled => MatrixKind::Generic,
        Metric::Raw => MatrixKind::RawHamming,
        Metric::Normalized => MatrixKind::NormalizedHamming,
        Metric::Jc => MatrixKind::JcCorrected,
    };
    let labels = set.profiles().iter().map(|p| p.otu_label.clone()).collect();
    DistanceMatrix::new(labels, entries, kind)
}
