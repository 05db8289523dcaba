//! Name-keyed registries of interchangeable strategies.

use std::sync::Arc;

use crate::{Error, Result};

/// Ordered map from a stable name to a shared strategy object.
///
/// Registration order is preserved so listings (CLI help, error messages)
/// are deterministic.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<(String, Arc<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Adds or replaces the strategy registered under `name`.
    pub fn register(&mut self, name: impl Into<String>, strategy: Arc<T>) -> &mut Self {
        let name = name.into();
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = strategy,
            None => self.entries.push((name, strategy)),
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| Arc::clone(s))
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Arc<T>)> {
        self.entries.iter().map(|(n, s)| (n.as_str(), s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
