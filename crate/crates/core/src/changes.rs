//! Change detection between versions and application of change sets.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::mint;
use crate::model::reify::{attribute_triples, reify, ReifiedVersion};
use crate::rdf::{Graph, Term, Triple};
use crate::vocab::{diachron, rdf, rdfs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChangeKind {
    AddAttribute,
    DeleteAttribute,
    LabelModification,
}

impl ChangeKind {
    pub fn iri(self) -> &'static str {
        match self {
            ChangeKind::AddAttribute => diachron::ADD_ATTRIBUTE,
            ChangeKind::DeleteAttribute => diachron::DELETE_ATTRIBUTE,
            ChangeKind::LabelModification => diachron::LABEL_MODIFICATION,
        }
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        [
            ChangeKind::AddAttribute,
            ChangeKind::DeleteAttribute,
            ChangeKind::LabelModification,
        ]
        .into_iter()
        .find(|k| k.iri() == iri)
    }
}

/// A record attribute referenced by a change.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeRef {
    pub iri: Term,
    pub triple: Triple,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Change {
    pub iri: Term,
    pub kind: ChangeKind,
    /// (role, value) pairs as serialized.
    pub parameters: Vec<(Term, Term)>,
    pub deleted: Vec<AttributeRef>,
    pub added: Vec<AttributeRef>,
}

impl Change {
    fn low_level(old: &Term, new: &Term, kind: ChangeKind, attr: AttributeRef) -> Self {
        let t = &attr.triple;
        let values = vec![t.subject.clone(), t.predicate.clone(), t.object.clone()];
        let iri = mint::change_iri(old, new, &Term::iri_unchecked(kind.iri()), &values);
        let parameters = [diachron::SUBJECT, diachron::PREDICATE, diachron::OBJECT]
            .iter()
            .map(|r| Term::iri_unchecked(*r))
            .zip(values)
            .collect();
        let (deleted, added) = match kind {
            ChangeKind::DeleteAttribute => (vec![attr], vec![]),
            _ => (vec![], vec![attr]),
        };
        Change {
            iri,
            kind,
            parameters,
            deleted,
            added,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeSet {
    pub iri: Term,
    pub old_version: Term,
    pub new_version: Term,
    pub changes: Vec<Change>,
    pub metadata: Graph,
}

impl ChangeSet {
    /// Triples removed and added when applying forward.
    pub fn delta(&self) -> (BTreeSet<Triple>, BTreeSet<Triple>) {
        let mut del = BTreeSet::new();
        let mut add = BTreeSet::new();
        for c in &self.changes {
            del.extend(c.deleted.iter().map(|a| a.triple.clone()));
            add.extend(c.added.iter().map(|a| a.triple.clone()));
        }
        (del, add)
    }

    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Low-level changes between two reified versions, compared on their
/// de-reified triples (records and schema alike). Deletes come first.
pub fn diff_record_sets(old: &ReifiedVersion, new: &ReifiedVersion) -> Result<Vec<Change>> {
    let before = attributes_of(old)?;
    let after = attributes_of(new)?;
    let mut out = Vec::new();
    for (t, a) in &before {
        if !after.contains_key(t) {
            out.push(Change::low_level(
                &old.version,
                &new.version,
                ChangeKind::DeleteAttribute,
                AttributeRef {
                    iri: a.clone(),
                    triple: t.clone(),
                },
            ));
        }
    }
    for (t, a) in &after {
        if !before.contains_key(t) {
            out.push(Change::low_level(
                &old.version,
                &new.version,
                ChangeKind::AddAttribute,
                AttributeRef {
                    iri: a.clone(),
                    triple: t.clone(),
                },
            ));
        }
    }
    Ok(out)
}

fn attributes_of(v: &ReifiedVersion) -> Result<BTreeMap<Triple, Term>> {
    let mut m = attribute_triples(&v.record_set)?;
    m.extend(attribute_triples(&v.schema_set)?);
    Ok(m)
}

/// Promotion rules: a delete and an add on the same subject with this
/// predicate collapse into one change of this kind.
const PROMOTIONS: &[(&str, ChangeKind)] = &[(rdfs::LABEL, ChangeKind::LabelModification)];

/// Collapses delete/add pairs into high-level changes; other changes pass
/// through unchanged.
pub fn detect_high_level(old: &Term, new: &Term, lows: Vec<Change>) -> Vec<Change> {
    type Key = (Term, Term);
    let mut dels: BTreeMap<Key, Vec<usize>> = BTreeMap::new();
    let mut adds: BTreeMap<Key, Vec<usize>> = BTreeMap::new();
    for (i, c) in lows.iter().enumerate() {
        let (side, attr) = match c.kind {
            ChangeKind::DeleteAttribute => (&mut dels, &c.deleted[0]),
            ChangeKind::AddAttribute => (&mut adds, &c.added[0]),
            ChangeKind::LabelModification => continue,
        };
        let promotable = attr
            .triple
            .predicate
            .as_iri()
            .is_some_and(|p| PROMOTIONS.iter().any(|(pp, _)| *pp == p));
        if promotable {
            side.entry((attr.triple.subject.clone(), attr.triple.predicate.clone()))
                .or_default()
                .push(i);
        }
    }
    let mut consumed = vec![false; lows.len()];
    let mut promoted = Vec::new();
    for (key, del_idx) in &dels {
        let Some(add_idx) = adds.get(key) else {
            continue;
        };
        let kind = PROMOTIONS
            .iter()
            .find(|(p, _)| key.1.as_iri() == Some(*p))
            .map(|(_, k)| *k)
            .expect("promotable predicate");
        for (&d, &a) in del_idx.iter().zip(add_idx) {
            consumed[d] = true;
            consumed[a] = true;
            let old_attr = lows[d].deleted[0].clone();
            let new_attr = lows[a].added[0].clone();
            let values = vec![old_attr.iri.clone(), new_attr.iri.clone()];
            promoted.push(Change {
                iri: mint::change_iri(old, new, &Term::iri_unchecked(kind.iri()), &values),
                kind,
                parameters: vec![
                    (Term::iri_unchecked(diachron::PARAMETER1), values[0].clone()),
                    (Term::iri_unchecked(diachron::PARAMETER2), values[1].clone()),
                ],
                deleted: vec![old_attr],
                added: vec![new_attr],
            });
        }
    }
    let mut out: Vec<Change> = lows
        .into_iter()
        .zip(consumed)
        .filter(|(_, used)| !used)
        .map(|(c, _)| c)
        .collect();
    out.extend(promoted);
    out.sort();
    out
}

/// The change set turning `old` into `new`.
pub fn build_change_set(old: &ReifiedVersion, new: &ReifiedVersion) -> Result<ChangeSet> {
    if old.version == new.version {
        return Err(Error::Archive(format!(
            "change set endpoints are the same version {}",
            old.version
        )));
    }
    let lows = diff_record_sets(old, new)?;
    Ok(ChangeSet {
        iri: mint::change_set_iri(&old.version, &new.version),
        old_version: old.version.clone(),
        new_version: new.version.clone(),
        changes: detect_high_level(&old.version, &new.version, lows),
        metadata: Graph::new(),
    })
}

/// Applies the triple-level delta to a de-reified graph.
pub fn apply_delta(base: &mut Graph, cs: &ChangeSet, direction: Direction) -> Result<()> {
    let (del, add) = cs.delta();
    let (del, add) = match direction {
        Direction::Forward => (del, add),
        Direction::Backward => (add, del),
    };
    for t in &del {
        if !base.remove(t) {
            return Err(Error::Integrity(format!(
                "change set {} deletes absent triple {t}",
                cs.iri
            )));
        }
    }
    base.extend(add);
    Ok(())
}

/// Applies a change set to a reified version, yielding the reified form of
/// the other endpoint.
pub fn apply_change_set(base: &ReifiedVersion, cs: &ChangeSet, direction: Direction) -> Result<ReifiedVersion> {
    let (expected, target) = match direction {
        Direction::Forward => (&cs.old_version, &cs.new_version),
        Direction::Backward => (&cs.new_version, &cs.old_version),
    };
    if &base.version != expected {
        return Err(Error::Integrity(format!(
            "change set {} does not start at {}",
            cs.iri, base.version
        )));
    }
    let mut g = base.dereify()?;
    apply_delta(&mut g, cs, direction)?;
    Ok(reify(&g, target))
}

fn iri(s: &str) -> Term {
    Term::iri_unchecked(s)
}

/// The named-graph content of a change set. Attributes referenced by
/// high-level changes are described inline so the graph is self-contained.
pub fn change_set_graph(cs: &ChangeSet) -> Graph {
    let mut g = Graph::new();
    let has_change = iri(diachron::HAS_CHANGE);
    let rdf_type = iri(rdf::TYPE);
    for c in &cs.changes {
        g.insert(Triple::new_unchecked(cs.iri.clone(), has_change.clone(), c.iri.clone()));
        g.insert(Triple::new_unchecked(c.iri.clone(), rdf_type.clone(), iri(c.kind.iri())));
        for (role, value) in &c.parameters {
            g.insert(Triple::new_unchecked(c.iri.clone(), role.clone(), value.clone()));
        }
        if c.kind == ChangeKind::LabelModification {
            for a in c.deleted.iter().chain(&c.added) {
                for (p, o) in [
                    (diachron::SUBJECT, &a.triple.subject),
                    (diachron::PREDICATE, &a.triple.predicate),
                    (diachron::OBJECT, &a.triple.object),
                ] {
                    g.insert(Triple::new_unchecked(a.iri.clone(), iri(p), o.clone()));
                }
            }
        }
    }
    g
}

/// Reads a change set back from its named graph.
pub fn change_set_from_graph(iri_cs: &Term, old: &Term, new: &Term, g: &Graph) -> Result<ChangeSet> {
    let rdf_type = iri(rdf::TYPE);
    let role = |node: &Term, p: &str| -> Result<Term> {
        g.object_of(node, &iri(p))
            .cloned()
            .ok_or_else(|| Error::structure(node, format!("change without {p}")))
    };
    let attr = |a: &Term| -> Result<AttributeRef> {
        let triple = Triple::new(
            role(a, diachron::SUBJECT)?,
            role(a, diachron::PREDICATE)?,
            role(a, diachron::OBJECT)?,
        )
        .map_err(|e| Error::structure(a, e.to_string()))?;
        Ok(AttributeRef {
            iri: a.clone(),
            triple,
        })
    };
    let mut changes = Vec::new();
    for t in g.with_subject_predicate(iri_cs, &iri(diachron::HAS_CHANGE)) {
        let c = &t.object;
        let kind = g
            .object_of(c, &rdf_type)
            .and_then(Term::as_iri)
            .and_then(ChangeKind::from_iri)
            .ok_or_else(|| Error::structure(c, "change without a known type"))?;
        let change = match kind {
            ChangeKind::AddAttribute | ChangeKind::DeleteAttribute => {
                let s = role(c, diachron::SUBJECT)?;
                let p = role(c, diachron::PREDICATE)?;
                let o = role(c, diachron::OBJECT)?;
                let version = if kind == ChangeKind::AddAttribute { new } else { old };
                let a = AttributeRef {
                    iri: mint::attribute_iri(version, &s, &p, &o),
                    triple: Triple::new(s, p, o).map_err(|e| Error::structure(c, e.to_string()))?,
                };
                let mut ch = Change::low_level(old, new, kind, a);
                ch.iri = c.clone();
                ch
            }
            ChangeKind::LabelModification => {
                let a1 = role(c, diachron::PARAMETER1)?;
                let a2 = role(c, diachron::PARAMETER2)?;
                Change {
                    iri: c.clone(),
                    kind,
                    parameters: vec![
                        (iri(diachron::PARAMETER1), a1.clone()),
                        (iri(diachron::PARAMETER2), a2.clone()),
                    ],
                    deleted: vec![attr(&a1)?],
                    added: vec![attr(&a2)?],
                }
            }
        };
        changes.push(change);
    }
    changes.sort();
    Ok(ChangeSet {
        iri: iri_cs.clone(),
        old_version: old.clone(),
        new_version: new.clone(),
        changes,
        metadata: Graph::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_ntriples;
    use proptest::prelude::*;

    const LIVER: &str = "<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> \"liver\" .\n";
    const LIVER_UC: &str = "<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> \"LIVER\" .\n";

    fn version(n: &str, text: &str) -> ReifiedVersion {
        reify(&parse_ntriples(text).unwrap(), &Term::iri(format!("http://example.org/EFO/{n}")).unwrap())
    }

    #[test]
    fn fixture_diff_and_promotion() {
        let old = version("v2.35", LIVER);
        let new = version("v2.36", LIVER_UC);
        let lows = diff_record_sets(&old, &new).unwrap();
        assert_eq!(lows.len(), 2);
        assert_eq!(lows[0].kind, ChangeKind::DeleteAttribute);
        assert_eq!(lows[0].deleted[0].triple.object, Term::string("liver"));
        assert_eq!(lows[1].kind, ChangeKind::AddAttribute);
        let high = detect_high_level(&old.version, &new.version, lows);
        assert_eq!(high.len(), 1);
        assert_eq!(high[0].kind, ChangeKind::LabelModification);
        let old_attr = attribute_triples(&old.record_set).unwrap().into_values().next().unwrap();
        let new_attr = attribute_triples(&new.record_set).unwrap().into_values().next().unwrap();
        assert_eq!(high[0].parameters[0].1, old_attr);
        assert_eq!(high[0].parameters[1].1, new_attr);
    }

    #[test]
    fn identical_versions_have_no_changes() {
        let a = version("a", LIVER);
        let b = version("b", LIVER);
        assert!(build_change_set(&a, &b).unwrap().is_empty());
    }

    #[test]
    fn additions_from_empty() {
        let text: String = (0..4).map(|i| format!("<http://s> <http://p> \"{i}\" .\n")).collect();
        let lows = diff_record_sets(&version("a", ""), &version("b", &text)).unwrap();
        assert_eq!(lows.len(), 4);
        assert!(lows.iter().all(|c| c.kind == ChangeKind::AddAttribute));
        let unchanged = detect_high_level(&Term::string("x"), &Term::string("y"), lows.clone());
        let mut expected = lows;
        expected.sort();
        assert_eq!(unchanged, expected);
    }

    #[test]
    fn two_subjects_two_label_modifications() {
        let old = version("a", "<http://s1> <http://www.w3.org/2000/01/rdf-schema#label> \"a\" .\n<http://s2> <http://www.w3.org/2000/01/rdf-schema#label> \"b\" .\n");
        let new = version("b", "<http://s1> <http://www.w3.org/2000/01/rdf-schema#label> \"A\" .\n<http://s2> <http://www.w3.org/2000/01/rdf-schema#label> \"B\" .\n");
        let cs = build_change_set(&old, &new).unwrap();
        assert_eq!(cs.changes.len(), 2);
        assert!(cs.changes.iter().all(|c| c.kind == ChangeKind::LabelModification));
    }

    #[test]
    fn apply_forward_reproduces_target() {
        let old = version("v2.35", LIVER);
        let new = version("v2.36", LIVER_UC);
        let cs = build_change_set(&old, &new).unwrap();
        assert_eq!(apply_change_set(&old, &cs, Direction::Forward).unwrap(), new);
        assert_eq!(apply_change_set(&new, &cs, Direction::Backward).unwrap(), old);
    }

    #[test]
    fn deleting_absent_triple_is_integrity_error() {
        let old = version("a", LIVER);
        let new = version("b", LIVER_UC);
        let cs = build_change_set(&old, &new).unwrap();
        let wrong = ReifiedVersion { version: old.version.clone(), ..version("a", "") };
        assert!(matches!(apply_change_set(&wrong, &cs, Direction::Forward), Err(Error::Integrity(_))));
    }

    #[test]
    fn graph_round_trip() {
        let old = version("a", LIVER);
        let new = version("b", &format!("{LIVER_UC}<http://t> <http://p> <http://o> .\n"));
        let cs = build_change_set(&old, &new).unwrap();
        let g = change_set_graph(&cs);
        let back = change_set_from_graph(&cs.iri, &cs.old_version, &cs.new_version, &g).unwrap();
        assert_eq!(back, cs);
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        prop::collection::vec((0..4u8, prop::sample::select(vec!["http://p", rdfs::LABEL]), 0..4u8), 0..12).prop_map(|ts| {
            ts.into_iter()
                .map(|(s, p, o)| Triple::new(Term::iri(format!("http://s/{s}")).unwrap(), Term::iri(p).unwrap(), Term::string(format!("{o}"))).unwrap())
                .collect()
        })
    }

    proptest! {
        #[test]
        fn diff_is_sound_and_invertible(a in arb_graph(), b in arb_graph()) {
            let old = reify(&a, &Term::iri("http://v/1").unwrap());
            let new = reify(&b, &Term::iri("http://v/2").unwrap());
            let cs = build_change_set(&old, &new).unwrap();
            let (del, add) = cs.delta();
            let expected: Graph = a.iter().filter(|t| !del.contains(t)).cloned().chain(add.iter().cloned()).collect();
            prop_assert_eq!(&expected, &b);
            let fwd = apply_change_set(&old, &cs, Direction::Forward).unwrap();
            prop_assert_eq!(&fwd, &new);
            prop_assert_eq!(apply_change_set(&fwd, &cs, Direction::Backward).unwrap(), old);
            let back = change_set_from_graph(&cs.iri, &cs.old_version, &cs.new_version, &change_set_graph(&cs)).unwrap();
            prop_assert_eq!(back, cs);
        }
    }
}
