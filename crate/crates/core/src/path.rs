//! Finite paths through an ontic space.

use alloc::vec::Vec;
use core::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("a path must visit at least one ontic state")]
pub struct EmptyPath;

/// An ordered, non-empty sequence of ontic-state visits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
#[serde(bound(
    serialize = "T: Clone + Serialize",
    deserialize = "T: Deserialize<'de>"
))]
pub struct Path<T> {
    visits: Vec<T>,
}

impl<T> Path<T> {
    pub fn new(visits: Vec<T>) -> Result<Self, EmptyPath> {
        if visits.is_empty() {
            Err(EmptyPath)
        } else {
            Ok(Self { visits })
        }
    }

    /// The one-element path `[λ]`.
    pub fn singleton(state: T) -> Self {
        Self {
            visits: alloc::vec![state],
        }
    }

    pub fn visits(&self) -> &[T] {
        &self.visits
    }

    pub fn into_visits(self) -> Vec<T> {
        self.visits
    }

    pub fn is_singleton(&self) -> bool {
        self.visits.len() == 1
    }
}

impl<T: PartialEq> Path<T> {
    pub fn visits_state(&self, state: &T) -> bool {
        self.visits.contains(state)
    }
}

impl<T> Deref for Path<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.visits
    }
}

impl<T> TryFrom<Vec<T>> for Path<T> {
    type Error = EmptyPath;

    fn try_from(visits: Vec<T>) -> Result<Self, EmptyPath> {
        Path::new(visits)
    }
}

impl<T> From<Path<T>> for Vec<T> {
    fn from(path: Path<T>) -> Vec<T> {
        path.visits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_paths_are_rejected() {
        assert_eq!(Path::<u8>::new(Vec::new()), Err(EmptyPath));
        let p = Path::new(alloc::vec![1u8, 2, 1]).unwrap();
        assert_eq!(p.len(), 3);
        assert!(p.visits_state(&2));
        assert!(!p.is_singleton());
        assert!(Path::singleton(7u8).is_singleton());
    }
}
