use std::collections::HashMap;

use super::{QuantumError, Result};

/// Enumerated configuration space: distinct opaque labels with a bijection to
/// `0..dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl ConfigSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(QuantumError::EmptySpace);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(QuantumError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels, index })
    }

    /// Labels `"1"`, `"2"`, ... `"dim"`.
    pub fn numbered(dim: usize) -> Result<Self> {
        Self::new((1..=dim).map(|i| i.to_string()))
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }
}
