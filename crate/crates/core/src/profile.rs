use crate::error::{Error, Result};

/// Allele code at one locus; `None` marks a missing value.
pub type Allele = Option<u64>;

/// One typing profile: a label, its allele vector and an occurrence count.
#[derive(Debug, Clone)]
pub struct TypingProfile {
    pub otu_label: String,
    pub numeric_id: usize,
    pub alleles: Vec<Allele>,
    pub frequency: u64,
}

/// Ordered collection of typing profiles sharing one locus layout.
#[derive(Debug, Clone)]
pub struct ProfileSet {
    profiles: Vec<TypingProfile>,
    pub locus_names: Option<Vec<String>>,
}

impl ProfileSet {
    pub fn new(profiles: Vec<TypingProfile>, locus_names: Option<Vec<String>>) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::domain("profile set must contain at least one profile"));
        }
        let len = profiles[0].alleles.len();
        if len == 0 {
            return Err(Error::domain("profiles must have at least one locus"));
        }
        for (i, p) in profiles.iter().enumerate() {
            if p.alleles.len() != len {
                return Err(Error::parse(
                    format!("profile {}", p.otu_label),
                    format!("expected {} loci, found {}", len, p.alleles.len()),
                ));
            }
            if p.numeric_id != i {
                return Err(Error::invariant("numeric ids must be dense and in input order"));
            }
            if p.frequency < 1 {
                return Err(Error::domain(format!(
                    "frequency of {} must be at least 1",
                    p.otu_label
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for p in &profiles {
            if !seen.insert(p.otu_label.as_str()) {
                return Err(Error::parse(
                    format!("profile {}", p.otu_label),
                    "duplicate label",
                ));
            }
        }
        if let Some(names) = &locus_names {
            if names.len() != len {
                return Err(Error::parse(
                    "header",
                    format!("{} locus names for {} loci", names.len(), len),
                ));
            }
        }
        Ok(ProfileSet {
            profiles,
            locus_names,
        })
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn locus_count(&self) -> usize {
        self.profiles[0].alleles.len()
    }

    pub fn profiles(&self) -> &[TypingProfile] {
        &self.profiles
    }

    pub fn get(&self, i: usize) -> &TypingProfile {
        &self.profiles[i]
    }
}

/// Equal-length character sequences over an arbitrary alphabet.
#[derive(Debug, Clone)]
pub struct CharacterSequenceSet {
    labels: Vec<String>,
    sequences: Vec<Vec<char>>,
}

impl CharacterSequenceSet {
    pub fn new(labels: Vec<String>, sequences: Vec<Vec<char>>) -> Result<Self> {
        if labels.len() != sequences.len() || labels.is_empty() {
            return Err(Error::domain("need at least one labelled sequence"));
        }
        let len = sequences[0].len();
        for (label, seq) in labels.iter().zip(&sequences) {
            if seq.len() != len {
                return Err(Error::parse(
                    format!("sequence {}", label),
                    format!("length {} differs from {}", seq.len(), len),
                ));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::parse(format!("sequence {}", label), "duplicate label"));
            }
        }
        Ok(CharacterSequenceSet { labels, sequences })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sequence_length(&self) -> usize {
        self.sequences[0].len()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn sequence(&self, i: usize) -> &[char] {
        &self.sequences[i]
    }
}
