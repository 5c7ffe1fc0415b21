//! Word co-occurrence networks from plain-text documents.
//!
//! Tokens are lowercase alphabetic runs; an apostrophe between two letters
//! stays inside the token, so contractions such as `don't` are single
//! words. The vocabulary is the `m` most frequent words of the combined
//! corpus with ties broken alphabetically. Two tokens co-occur when the
//! second follows the first within `span` positions; pairs of the same word
//! are ignored.

use std::collections::HashMap;
use std::path::PathBuf;

use log::warn;
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laplacian::{AdjacencyMatrix, GraphLaplacian};
use crate::sample::NetworkSample;

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_alphabetic() {
            current.extend(c.to_lowercase());
        } else if is_apostrophe(c) && !current.is_empty() && chars.peek().is_some_and(|n| n.is_alphabetic()) {
            current.push('\'');
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// The `m` most frequent words over all streams.
    pub fn build<S: AsRef<[String]>>(streams: &[S], m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "vocabulary size must be at least 2, got {m}"
            )));
        }
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for stream in streams {
            for token in stream.as_ref() {
                *counts.entry(token.as_str()).or_insert(0) += 1;
            }
        }
        if counts.len() < m {
            return Err(Error::InvalidParameter(format!(
                "corpus has {} distinct words, fewer than the requested {m}",
                counts.len()
            )));
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        ranked.truncate(m);
        let words: Vec<String> = ranked.iter().map(|(w, _)| w.to_string()).collect();
        let counts = ranked.iter().map(|(_, c)| *c).collect();
        Ok(Self::assemble(words, counts))
    }

    /// A vocabulary with a given word order (counts unknown, set to zero).
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        let vocab = Self::assemble(words.clone(), vec![0; words.len()]);
        if vocab.index.len() != words.len() {
            return Err(Error::InvalidParameter("vocabulary contains duplicate words".into()));
        }
        Ok(vocab)
    }

    fn assemble(words: Vec<String>, counts: Vec<u64>) -> Self {
        let index = words.iter().enumerate().map(|(k, w)| (w.clone(), k)).collect();
        Self { words, counts, index }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }
}

/// Forward-window co-occurrence counts between vocabulary words.
pub fn cooccurrence<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary, span: usize) -> Result<AdjacencyMatrix> {
    if span == 0 {
        return Err(Error::InvalidParameter("span must be at least 1".into()));
    }
    let ids: Vec<Option<usize>> = tokens.iter().map(|t| vocab.index_of(t.as_ref())).collect();
    let m = vocab.len();
    let mut w = DMatrix::zeros(m, m);
    for (p, a) in ids.iter().enumerate() {
        let Some(a) = *a else { continue };
        for b in ids.iter().skip(p + 1).take(span).flatten() {
            if a != *b {
                w[(a, *b)] += 1.0;
                w[(*b, a)] += 1.0;
            }
        }
    }
    AdjacencyMatrix::new(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusDocument {
    pub path: PathBuf,
    pub label: String,
    pub group: String,
    pub covariates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusManifest {
    pub documents: Vec<CorpusDocument>,
    pub covariate_names: Vec<String>,
    /// Vocabulary size.
    pub m: usize,
    pub span: usize,
}

impl CorpusManifest {
    pub fn validate(&self) -> Result<()> {
        if self.documents.is_empty() {
            return Err(Error::EmptySample);
        }
        if self.m < 2 || self.span < 1 {
            return Err(Error::InvalidParameter(format!(
                "need m >= 2 and span >= 1, got m = {} and span = {}",
                self.m, self.span
            )));
        }
        for doc in &self.documents {
            if !doc.path.is_file() {
                return Err(Error::InvalidParameter(format!(
                    "document {} not found at {}",
                    doc.label,
                    doc.path.display()
                )));
            }
            if doc.covariates.len() != self.covariate_names.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.covariate_names.len(),
                    found: doc.covariates.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub vocabulary: Vocabulary,
    /// Trace-normalised Laplacians with node labels set to the vocabulary.
    pub sample: NetworkSample,
    /// Labels of documents excluded for having no co-occurrences.
    pub excluded: Vec<String>,
}

/// Reads every document and builds one trace-normalised Laplacian each.
pub fn build_sample(manifest: &CorpusManifest) -> Result<Corpus> {
    manifest.validate()?;
    let texts: Vec<String> = manifest
        .documents
        .par_iter()
        .map(|d| std::fs::read_to_string(&d.path).map_err(|e| Error::io(&d.path, e)))
        .collect::<Result<_>>()?;
    build_sample_from_texts(manifest, &texts)
}

/// As [`build_sample`], with document texts supplied in manifest order.
pub fn build_sample_from_texts(manifest: &CorpusManifest, texts: &[String]) -> Result<Corpus> {
    if texts.len() != manifest.documents.len() {
        return Err(Error::DimensionMismatch {
            expected: manifest.documents.len(),
            found: texts.len(),
        });
    }
    let streams: Vec<Vec<String>> = texts.par_iter().map(|t| tokenize(t)).collect();
    let vocabulary = Vocabulary::build(&streams, manifest.m)?;
    let laplacians: Vec<Result<GraphLaplacian>> = streams
        .par_iter()
        .map(|tokens| {
            let a = cooccurrence(tokens, &vocabulary, manifest.span)?;
            GraphLaplacian::from_adjacency(&a).trace_normalize()
        })
        .collect();

    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for (doc, l) in manifest.documents.iter().zip(laplacians) {
        match l {
            Ok(l) => kept.push((doc, l.with_labels(vocabulary.words().to_vec())?)),
            Err(Error::Degenerate(_)) => {
                warn!(
                    "document {} has no co-occurrences among the vocabulary; excluded",
                    doc.label
                );
                excluded.push(doc.label.clone());
            }
            Err(e) => return Err(e),
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptySample);
    }
    let ids = kept.iter().map(|(d, _)| d.label.clone()).collect();
    let groups = kept.iter().map(|(d, _)| d.group.clone()).collect();
    let covariates = kept.iter().map(|(d, _)| d.covariates.clone()).collect();
    let sample = NetworkSample::new(kept.into_iter().map(|(_, l)| l).collect())?
        .with_ids(ids)?
        .with_groups(groups)?
        .with_covariates(manifest.covariate_names.clone(), covariates)?;
    Ok(Corpus {
        vocabulary,
        sample,
        excluded,
    })
}
