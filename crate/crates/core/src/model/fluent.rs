use std::fmt;

use serde::{Deserialize, Serialize};

/// A ground fact: a predicate applied to object symbols, e.g. `at tomato1 cutStation`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fluent {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Fluent {
    pub fn new<P, I, S>(predicate: P, args: I) -> Self
    where
        P: Into<String>,
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Fluent {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    /// Parses the space-separated form produced by `Display`.
    pub fn parse(text: &str) -> Option<Self> {
        let mut parts = text.split_whitespace();
        let predicate = parts.next()?;
        Some(Fluent::new(predicate, parts))
    }

    pub fn mentions(&self, object: &str) -> bool {
        self.args.iter().any(|a| a == object)
    }
}

impl fmt::Display for Fluent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        for arg in &self.args {
            write!(f, " {arg}")?;
        }
        Ok(())
    }
}

/// Index of a fluent in a domain vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FluentId(pub u16);

impl FluentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub const MAX_FLUENTS: usize = 256;
const WORDS: usize = MAX_FLUENTS / 64;

/// Fixed-capacity bitset over a domain's fluent vocabulary.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FluentSet {
    words: [u64; WORDS],
}

impl FluentSet {
    pub fn new() -> Self {
        FluentSet::default()
    }

    pub fn contains(&self, id: FluentId) -> bool {
        let i = id.index();
        self.words[i / 64] & (1u64 << (i % 64)) != 0
    }

    pub fn insert(&mut self, id: FluentId) {
        let i = id.index();
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    pub fn remove(&mut self, id: FluentId) {
        let i = id.index();
        self.words[i / 64] &= !(1u64 << (i % 64));
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn union_with(&mut self, other: &FluentSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn difference_with(&mut self, other: &FluentSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn contains_all(&self, ids: &[FluentId]) -> bool {
        ids.iter().all(|id| self.contains(*id))
    }

    pub fn iter(&self) -> impl Iterator<Item = FluentId> + '_ {
        self.words.iter().enumerate().flat_map(|(w, bits)| {
            let mut bits = *bits;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(FluentId((w * 64 + tz) as u16))
            })
        })
    }
}

impl FromIterator<FluentId> for FluentSet {
    fn from_iter<T: IntoIterator<Item = FluentId>>(iter: T) -> Self {
        let mut set = FluentSet::new();
        for id in iter {
            set.insert(id);
        }
        set
    }
}

impl fmt::Debug for FluentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|id| id.0)).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse_round_trip() {
        let fl = Fluent::new("at", ["tomato1", "cutStation"]);
        assert_eq!(fl.to_string(), "at tomato1 cutStation");
        assert_eq!(Fluent::parse(&fl.to_string()), Some(fl));
        assert_eq!(Fluent::parse("   "), None);
    }

    #[test]
    fn bitset_basics() {
        let mut set = FluentSet::new();
        assert!(set.is_empty());
        set.insert(FluentId(3));
        set.insert(FluentId(200));
        assert!(set.contains(FluentId(200)));
        assert_eq!(set.len(), 2);
        assert_eq!(set.iter().collect::<Vec<_>>(), vec![FluentId(3), FluentId(200)]);
        set.remove(FluentId(3));
        assert!(!set.contains(FluentId(3)));
    }
}
