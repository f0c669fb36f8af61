//! Events environments, shared by the concrete and the abstract semantics.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

/// State of an event binding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Mark {
    /// The event has occurred.
    E,
    /// The event has occurred and has been asserted.
    EA,
    /// The event has only been asserted.
    A,
}

impl Mark {
    pub fn occurred(self) -> bool {
        matches!(self, Mark::E | Mark::EA)
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mark::E => "E",
            Mark::EA => "EA",
            Mark::A => "A",
        })
    }
}

/// Finite map from predicate names to a denotable value and a mark.
///
/// The empty environment doubles as the distinguished error environment ι.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EventEnv<D> {
    bindings: BTreeMap<String, (D, Mark)>,
}

impl<D> Default for EventEnv<D> {
    fn default() -> Self {
        EventEnv {
            bindings: BTreeMap::new(),
        }
    }
}

impl<D: Clone> EventEnv<D> {
    pub fn empty() -> Self {
        Self::default()
    }

    /// ι, returned alongside every error result.
    pub fn iota() -> Self {
        Self::default()
    }

    pub fn get(&self, pred: &str) -> Option<&(D, Mark)> {
        self.bindings.get(pred)
    }

    pub fn contains(&self, pred: &str) -> bool {
        self.bindings.contains_key(pred)
    }

    /// `φ[q ↦ (d, m)]`
    pub fn bind(&self, pred: &str, d: D, mark: Mark) -> Self {
        let mut next = self.clone();
        next.insert(pred, d, mark);
        next
    }

    pub fn insert(&mut self, pred: &str, d: D, mark: Mark) {
        self.bindings.insert(pred.to_string(), (d, mark));
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &(D, Mark))> {
        self.bindings.iter()
    }

    pub fn preds(&self) -> impl Iterator<Item = &String> {
        self.bindings.keys()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn map_values<E: Clone>(&self, mut f: impl FnMut(&D) -> E) -> EventEnv<E> {
        EventEnv {
            bindings: self
                .bindings
                .iter()
                .map(|(k, (d, m))| (k.clone(), (f(d), *m)))
                .collect(),
        }
    }
}

impl<D: Clone> FromIterator<(String, (D, Mark))> for EventEnv<D> {
    fn from_iter<I: IntoIterator<Item = (String, (D, Mark))>>(iter: I) -> Self {
        EventEnv {
            bindings: iter.into_iter().collect(),
        }
    }
}

/// Renders as `{q -> (3, EA), ...}` in predicate order.
impl<D: fmt::Display> fmt::Display for EventEnv<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (q, (d, m))) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{q} -> ({d}, {m})")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bind_overwrites_and_renders_sorted() {
        let phi = EventEnv::<i64>::empty()
            .bind("q", 3, Mark::E)
            .bind("p", 1, Mark::EA)
            .bind("q", 4, Mark::E);
        assert_eq!(phi.to_string(), "{p -> (1, EA), q -> (4, E)}");
        assert_eq!(phi.len(), 2);
    }

    #[test]
    fn bind_is_functional() {
        let phi = EventEnv::<i64>::empty();
        let _ = phi.bind("p", 1, Mark::E);
        assert!(phi.is_empty());
    }
}
