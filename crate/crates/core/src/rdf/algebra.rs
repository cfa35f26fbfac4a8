//! Solution mappings and the set algebra over them (join, union,
//! difference, left outer join).

use std::collections::btree_map;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::term::{Term, Variable};

/// A partial function from variables to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mapping {
    bindings: BTreeMap<Variable, Term>,
}

impl Mapping {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &Variable) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn contains(&self, var: &Variable) -> bool {
        self.bindings.contains_key(var)
    }

    /// Binds `var`; returns `false` (and leaves the mapping unchanged) when
    /// it is already bound to a different term.
    pub fn bind(&mut self, var: Variable, term: Term) -> bool {
        match self.bindings.entry(var) {
            btree_map::Entry::Occupied(e) => e.get() == &term,
            btree_map::Entry::Vacant(e) => {
                e.insert(term);
                true
            }
        }
    }

    pub fn with(mut self, var: Variable, term: Term) -> Self {
        self.bindings.insert(var, term);
        self
    }

    pub fn remove(&mut self, var: &Variable) -> Option<Term> {
        self.bindings.remove(var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, Variable, Term> {
        self.bindings.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Variable> {
        self.bindings.keys()
    }

    /// Two mappings are compatible when they agree on every shared variable.
    pub fn compatible(&self, other: &Mapping) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .bindings
            .iter()
            .all(|(v, t)| large.bindings.get(v).is_none_or(|u| u == t))
    }

    /// Union of two compatible mappings.
    pub fn merge(&self, other: &Mapping) -> Option<Mapping> {
        if !self.compatible(other) {
            return None;
        }
        let mut out = self.clone();
        for (v, t) in &other.bindings {
            out.bindings.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Some(out)
    }

    /// Restriction to the given variables.
    pub fn project<'a>(&self, vars: impl IntoIterator<Item = &'a Variable>) -> Mapping {
        let mut out = Mapping::new();
        for v in vars {
            if let Some(t) = self.bindings.get(v) {
                out.bindings.insert(v.clone(), t.clone());
            }
        }
        out
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&Variable) -> bool) {
        self.bindings.retain(|v, _| keep(v));
    }
}

impl FromIterator<(Variable, Term)> for Mapping {
    fn from_iter<I: IntoIterator<Item = (Variable, Term)>>(iter: I) -> Self {
        Mapping {
            bindings: iter.into_iter().collect(),
        }
    }
}

/// A set of mappings (no duplicates), iterated in a deterministic order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MappingSet {
    mappings: BTreeSet<Mapping>,
}

impl MappingSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The set holding only the empty mapping, the identity for join.
    pub fn unit() -> Self {
        Self::single(Mapping::new())
    }

    pub fn single(m: Mapping) -> Self {
        let mut s = Self::new();
        s.insert(m);
        s
    }

    pub fn insert(&mut self, m: Mapping) -> bool {
        self.mappings.insert(m)
    }

    pub fn len(&self) -> usize {
        self.mappings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mappings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Mapping> {
        self.mappings.iter()
    }

    pub fn contains(&self, m: &Mapping) -> bool {
        self.mappings.contains(m)
    }

    pub fn retain(&mut self, keep: impl FnMut(&Mapping) -> bool) {
        self.mappings.retain(keep);
    }

    /// Applies `f` to every mapping, collapsing duplicates.
    pub fn map(self, f: impl FnMut(Mapping) -> Mapping) -> MappingSet {
        self.mappings.into_iter().map(f).collect()
    }

    /// Variables bound in every mapping of the set.
    fn certain_vars(&self) -> BTreeSet<Variable> {
        let mut iter = self.mappings.iter();
        let Some(first) = iter.next() else {
            return BTreeSet::new();
        };
        let mut vars: BTreeSet<Variable> = first.domain().cloned().collect();
        for m in iter {
            vars.retain(|v| m.contains(v));
            if vars.is_empty() {
                break;
            }
        }
        vars
    }
}

impl FromIterator<Mapping> for MappingSet {
    fn from_iter<I: IntoIterator<Item = Mapping>>(iter: I) -> Self {
        MappingSet {
            mappings: iter.into_iter().collect(),
        }
    }
}

impl IntoIterator for MappingSet {
    type Item = Mapping;
    type IntoIter = std::collections::btree_set::IntoIter<Mapping>;

    fn into_iter(self) -> Self::IntoIter {
        self.mappings.into_iter()
    }
}

impl<'a> IntoIterator for &'a MappingSet {
    type Item = &'a Mapping;
    type IntoIter = std::collections::btree_set::Iter<'a, Mapping>;

    fn into_iter(self) -> Self::IntoIter {
        self.mappings.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    Join,
    Union,
    Diff,
    LeftJoin,
}

pub fn algebra_combine(mode: CombineMode, a: &MappingSet, b: &MappingSet) -> MappingSet {
    match mode {
        CombineMode::Join => join(a, b),
        CombineMode::Union => union(a, b),
        CombineMode::Diff => diff(a, b),
        CombineMode::LeftJoin => left_join(a, b),
    }
}

/// `{ m1 ∪ m2 | m1 ∈ a, m2 ∈ b, compatible }`.
pub fn join(a: &MappingSet, b: &MappingSet) -> MappingSet {
    if a.is_empty() || b.is_empty() {
        return MappingSet::new();
    }
    let shared: Vec<Variable> = a
        .certain_vars()
        .intersection(&b.certain_vars())
        .cloned()
        .collect();
    let mut out = MappingSet::new();
    if shared.is_empty() {
        for m1 in a {
            for m2 in b {
                if let Some(m) = m1.merge(m2) {
                    out.insert(m);
                }
            }
        }
        return out;
    }
    let (build, probe) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let key = |m: &Mapping| -> Vec<Term> { shared.iter().map(|v| m.get(v).unwrap().clone()).collect() };
    let mut buckets: HashMap<Vec<Term>, Vec<&Mapping>> = HashMap::new();
    for m in build {
        buckets.entry(key(m)).or_default().push(m);
    }
    for m2 in probe {
        if let Some(candidates) = buckets.get(&key(m2)) {
            for m1 in candidates {
                if let Some(m) = m1.merge(m2) {
                    out.insert(m);
                }
            }
        }
    }
    out
}

pub fn union(a: &MappingSet, b: &MappingSet) -> MappingSet {
    a.iter().chain(b.iter()).cloned().collect()
}

/// Mappings of `a` compatible with no mapping of `b`.
pub fn diff(a: &MappingSet, b: &MappingSet) -> MappingSet {
    a.iter()
        .filter(|m1| !b.iter().any(|m2| m1.compatible(m2)))
        .cloned()
        .collect()
}

/// `join(a, b) ∪ diff(a, b)`.
pub fn left_join(a: &MappingSet, b: &MappingSet) -> MappingSet {
    let mut out = join(a, b);
    for m in diff(a, b) {
        out.insert(m);
    }
    out
}
