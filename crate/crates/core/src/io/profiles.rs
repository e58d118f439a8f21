//! Tab-separated typing profiles: label column, allele columns, optional
//! header with locus names and an optional trailing "freq" column.

use crate::error::{Error, Result};
use crate::profile::{Allele, ProfileSet, TypingProfile};

pub const DEFAULT_MISSING_MARKERS: [&str; 3] = ["0", "-", ""];

fn parse_allele(token: &str, missing: &[&str]) -> Option<Allele> {
    if missing.contains(&token) {
        return Some(None);
    }
    token.parse::<u64>().ok().map(Some)
}

/// Reads a profile table. A first row whose allele columns are not all
/// integers or missing markers is treated as a header; a header whose
/// last column is named "freq" (case-insensitive) marks per-row counts.
pub fn read_profiles(text: &str, missing_markers: &[&str]) -> Result<ProfileSet> {
    let rows: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i, l.split('\t').collect()))
        .collect();
    if rows.is_empty() {
        return Err(Error::parse("input", "no profile rows"));
    }
    let width = rows[0].1.len();
    if width < 2 {
        return Err(Error::parse(
            format!("line {}", rows[0].0),
            "expected a label column and at least one allele column",
        ));
    }
    for (line, row) in &rows {
        if row.len() != width {
            return Err(Error::parse(
                format!("line {}", line),
                format!("ragged row: {} columns, expected {}", row.len(), width),
            ));
        }
    }
    let first_is_header = rows[0].1[1..]
        .iter()
        .any(|tok| parse_allele(tok, missing_markers).is_none());
    let (header, data) = if first_is_header {
        (Some(&rows[0].1), &rows[1..])
    } else {
        (None, &rows[..])
    };
    if data.is_empty() {
        return Err(Error::parse("input", "header but no profile rows"));
    }
    let has_freq = header
        .map(|h| h.last().map(|c| c.eq_ignore_ascii_case("freq")).unwrap_or(false))
        .unwrap_or(false);
    let allele_cols = if has_freq { width - 2 } else { width - 1 };
    if allele_cols == 0 {
        return Err(Error::parse("input", "no allele columns"));
    }
    let locus_names = header.map(|h| {
        h[1..1 + allele_cols]
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<String>>()
    });
    let mut profiles = Vec::with_capacity(data.len());
    for (id, (line, row)) in data.iter().enumerate() {
        let label = row[0].to_string();
        let mut alleles = Vec::with_capacity(allele_cols);
        for (col, tok) in row[1..1 + allele_cols].iter().enumerate() {
            match parse_allele(tok, missing_markers) {
                Some(a) => alleles.push(a),
                None => {
                    return Err(Error::parse(
                        format!("row {} (line {}), column {}", label, line, col + 2),
                        format!("allele token {:?} is neither an integer nor a missing marker", tok),
                    ))
                }
            }
        }
        let frequency = if has_freq {
            row[width - 1].parse::<u64>().map_err(|_| {
                Error::parse(
                    format!("row {} (line {})", label, line),
                    format!("frequency {:?} is not a positive integer", row[width - 1]),
                )
            })?
        } else {
            1
        };
        profiles.push(TypingProfile {
            otu_label: label,
            numeric_id: id,
            alleles,
            frequency,
        });
    }
    ProfileSet::new(profiles, locus_names)
}
