use std::collections::btree_set;
use std::collections::BTreeSet;
use std::sync::Arc;

use super::term::{Term, Triple};

/// A set of triples, ordered by subject, predicate, object.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    triples: BTreeSet<Triple>,
}

fn min_term() -> Term {
    Term::Iri(Arc::from(""))
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `true` when the triple was not already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        self.triples.remove(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> btree_set::Iter<'_, Triple> {
        self.triples.iter()
    }

    pub fn extend(&mut self, other: impl IntoIterator<Item = Triple>) {
        self.triples.extend(other);
    }

    /// All triples with the given subject.
    pub fn with_subject(&self, subject: &Term) -> impl Iterator<Item = &Triple> + '_ {
        let subject = subject.clone();
        let lower = Triple::new_unchecked(subject.clone(), min_term(), min_term());
        self.triples
            .range(lower..)
            .take_while(move |t| t.subject == subject)
    }

    /// All triples with the given subject and predicate.
    pub fn with_subject_predicate(
        &self,
        subject: &Term,
        predicate: &Term,
    ) -> impl Iterator<Item = &Triple> + '_ {
        let (subject, predicate) = (subject.clone(), predicate.clone());
        let lower = Triple::new_unchecked(subject.clone(), predicate.clone(), min_term());
        self.triples
            .range(lower..)
            .take_while(move |t| t.subject == subject && t.predicate == predicate)
    }

    /// Triples matching the fixed positions; `None` is a wildcard.
    pub fn matching<'a>(
        &'a self,
        subject: Option<&'a Term>,
        predicate: Option<&'a Term>,
        object: Option<&'a Term>,
    ) -> Box<dyn Iterator<Item = &'a Triple> + 'a> {
        let object_ok = move |t: &&Triple| object.is_none_or(|o| &t.object == o);
        // a literal subject or non-IRI predicate can match nothing
        if subject.is_some_and(Term::is_literal) || predicate.is_some_and(|p| !p.is_iri()) {
            return Box::new(std::iter::empty());
        }
        match (subject, predicate) {
            (Some(s), Some(p)) => Box::new(self.with_subject_predicate(s, p).filter(object_ok)),
            (Some(s), None) => Box::new(self.with_subject(s).filter(object_ok)),
            (None, _) => Box::new(
                self.triples
                    .iter()
                    .filter(move |t| predicate.is_none_or(|p| &t.predicate == p))
                    .filter(object_ok),
            ),
        }
    }

    /// First object of `(subject, predicate, ?)`.
    pub fn object_of(&self, subject: &Term, predicate: &Term) -> Option<&Term> {
        if subject.is_literal() || !predicate.is_iri() {
            return None;
        }
        self.with_subject_predicate(subject, predicate)
            .next()
            .map(|t| &t.object)
    }

    pub fn subjects(&self) -> impl Iterator<Item = &Term> {
        let mut last: Option<&Term> = None;
        self.triples.iter().filter_map(move |t| {
            if last == Some(&t.subject) {
                None
            } else {
                last = Some(&t.subject);
                last
            }
        })
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph {
            triples: iter.into_iter().collect(),
        }
    }
}

impl IntoIterator for Graph {
    type Item = Triple;
    type IntoIter = btree_set::IntoIter<Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.into_iter()
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = btree_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}
