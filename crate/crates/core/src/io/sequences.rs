//! Character sequences for Steiner-tree inference: either TSV lines
//! "label<TAB>sequence" or FASTA-like ">label" blocks.

use crate::error::{Error, Result};
use crate::profile::CharacterSequenceSet;

pub fn read_sequences(text: &str) -> Result<CharacterSequenceSet> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
        .collect();
    if lines.is_empty() {
        return Err(Error::parse("input", "no sequences"));
    }
    let mut labels = Vec::new();
    let mut sequences: Vec<Vec<char>> = Vec::new();
    if lines[0].starts_with('>') {
        for line in lines {
            if let Some(label) = line.strip_prefix('>') {
                labels.push(label.trim().to_string());
                sequences.push(Vec::new());
            } else {
                let current = sequences
                    .last_mut()
                    .ok_or_else(|| Error::parse("line 1", "sequence data before any '>' header"))?;
                current.extend(line.trim().chars());
            }
        }
    } else {
        for (i, line) in lines.iter().enumerate() {
            let (label, seq) = line.split_once('\t').ok_or_else(|| {
                Error::parse(
                    format!("line {}", i + 1),
                    "expected label<TAB>sequence",
                )
            })?;
            labels.push(label.to_string());
            sequences.push(seq.trim().chars().collect());
        }
    }
    CharacterSequenceSet::new(labels, sequences)
}
