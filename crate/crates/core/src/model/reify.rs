//! Reification of a version graph into records and record attributes, and
//! the inverse mapping.

use std::collections::{BTreeMap, HashMap};

use super::mint;
use crate::error::{Error, Result};
use crate::rdf::{Graph, Term, Triple};
use crate::vocab::{diachron, owl, rdf, rdfs};

/// The reified form of one dataset version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReifiedVersion {
    pub version: Term,
    pub record_set: Graph,
    pub schema_set: Graph,
}

impl ReifiedVersion {
    pub fn empty(version: Term) -> Self {
        Self {
            version,
            record_set: Graph::new(),
            schema_set: Graph::new(),
        }
    }

    pub fn dereify(&self) -> Result<Graph> {
        dereify(&self.record_set, &self.schema_set)
    }
}

fn iri(s: &str) -> Term {
    Term::iri_unchecked(s)
}

const SCHEMA_TYPES: &[&str] = &[
    rdfs::CLASS,
    owl::CLASS,
    rdf::PROPERTY,
    owl::OBJECT_PROPERTY,
    owl::DATATYPE_PROPERTY,
];

const SCHEMA_PREDICATES: &[&str] = &[
    rdfs::SUB_CLASS_OF,
    rdfs::SUB_PROPERTY_OF,
    rdfs::DOMAIN,
    rdfs::RANGE,
];

/// Whether a triple belongs to the schema set rather than the record set.
pub fn is_schema_triple(t: &Triple) -> bool {
    let Some(p) = t.predicate.as_iri() else {
        return false;
    };
    if p == rdf::TYPE {
        return t.object.as_iri().is_some_and(|o| SCHEMA_TYPES.contains(&o));
    }
    SCHEMA_PREDICATES.contains(&p)
}

/// Splits a graph into (data, schema).
pub fn partition(g: &Graph) -> (Graph, Graph) {
    let mut data = Graph::new();
    let mut schema = Graph::new();
    for t in g {
        if is_schema_triple(t) {
            schema.insert(t.clone());
        } else {
            data.insert(t.clone());
        }
    }
    (data, schema)
}

/// Replaces blank nodes with IRIs derived from the version and the label.
pub fn skolemize(g: &Graph, version: &Term) -> Graph {
    let fix = |t: &Term| match t {
        Term::Blank(label) => mint::skolem_iri(version, label),
        other => other.clone(),
    };
    g.iter()
        .map(|t| Triple::new_unchecked(fix(&t.subject), t.predicate.clone(), fix(&t.object)))
        .collect()
}

/// Reifies `g` as version `version`. Blank nodes are skolemized first.
pub fn reify(g: &Graph, version: &Term) -> ReifiedVersion {
    let g = if g.iter().any(|t| t.subject.is_blank() || t.object.is_blank()) {
        skolemize(g, version)
    } else {
        g.clone()
    };
    let (data, schema) = partition(&g);
    ReifiedVersion {
        version: version.clone(),
        record_set: reify_part(
            &data,
            version,
            mint::record_set_iri(version),
            diachron::RECORD_SET,
            diachron::HAS_RECORD,
            diachron::RECORD,
            mint::record_iri,
        ),
        schema_set: reify_part(
            &schema,
            version,
            mint::schema_set_iri(version),
            diachron::SCHEMA_SET,
            diachron::HAS_SCHEMA_OBJECT,
            diachron::SCHEMA_OBJECT,
            mint::schema_object_iri,
        ),
    }
}

fn reify_part(
    g: &Graph,
    version: &Term,
    set: Term,
    set_type: &str,
    has_member: &str,
    member_type: &str,
    member_iri: fn(&Term, &Term) -> Term,
) -> Graph {
    let mut out = Graph::new();
    if g.is_empty() {
        return out;
    }
    let (rdf_type, has_member, subject_p, has_attr, pred_p, obj_p) = (
        iri(rdf::TYPE),
        iri(has_member),
        iri(diachron::SUBJECT),
        iri(diachron::HAS_RECORD_ATTRIBUTE),
        iri(diachron::PREDICATE),
        iri(diachron::OBJECT),
    );
    let member_type = iri(member_type);
    out.insert(Triple::new_unchecked(set.clone(), rdf_type.clone(), iri(set_type)));
    let mut current: Option<(Term, Term)> = None;
    for t in g {
        let record = match &current {
            Some((s, r)) if *s == t.subject => r.clone(),
            _ => {
                let r = member_iri(version, &t.subject);
                out.insert(Triple::new_unchecked(set.clone(), has_member.clone(), r.clone()));
                out.insert(Triple::new_unchecked(r.clone(), rdf_type.clone(), member_type.clone()));
                out.insert(Triple::new_unchecked(r.clone(), subject_p.clone(), t.subject.clone()));
                current = Some((t.subject.clone(), r.clone()));
                r
            }
        };
        let a = mint::attribute_iri(version, &t.subject, &t.predicate, &t.object);
        out.insert(Triple::new_unchecked(record, has_attr.clone(), a.clone()));
        out.insert(Triple::new_unchecked(a.clone(), pred_p.clone(), t.predicate.clone()));
        out.insert(Triple::new_unchecked(a, obj_p.clone(), t.object.clone()));
    }
    out
}

#[derive(Default)]
struct NodeInfo {
    is_member: bool,
    subject: Option<Term>,
    attributes: Vec<Term>,
    predicate: Option<Term>,
    object: Option<Term>,
}

/// Every (attribute IRI, original triple) pair described by a reified graph.
pub fn attribute_triples(reified: &Graph) -> Result<BTreeMap<Triple, Term>> {
    let (rdf_type, subject_p, has_attr, pred_p, obj_p) = (
        iri(rdf::TYPE),
        iri(diachron::SUBJECT),
        iri(diachron::HAS_RECORD_ATTRIBUTE),
        iri(diachron::PREDICATE),
        iri(diachron::OBJECT),
    );
    let member_types = [iri(diachron::RECORD), iri(diachron::SCHEMA_OBJECT)];
    let mut nodes: HashMap<&Term, NodeInfo> = HashMap::new();
    for t in reified {
        let p = &t.predicate;
        if *p == rdf_type {
            if member_types.contains(&t.object) {
                nodes.entry(&t.subject).or_default().is_member = true;
            }
        } else if *p == subject_p {
            nodes.entry(&t.subject).or_default().subject = Some(t.object.clone());
        } else if *p == has_attr {
            let info = nodes.entry(&t.subject).or_default();
            info.is_member = true;
            info.attributes.push(t.object.clone());
        } else if *p == pred_p {
            nodes.entry(&t.subject).or_default().predicate = Some(t.object.clone());
        } else if *p == obj_p {
            nodes.entry(&t.subject).or_default().object = Some(t.object.clone());
        }
    }
    let mut out = BTreeMap::new();
    for (node, info) in &nodes {
        if !info.is_member {
            continue;
        }
        let subject = info
            .subject
            .as_ref()
            .ok_or_else(|| Error::structure(node, "record without subject"))?;
        for a in &info.attributes {
            let attr = nodes
                .get(a)
                .ok_or_else(|| Error::structure(a, "attribute without predicate"))?;
            let p = attr
                .predicate
                .as_ref()
                .ok_or_else(|| Error::structure(a, "attribute without predicate"))?;
            let o = attr
                .object
                .as_ref()
                .ok_or_else(|| Error::structure(a, "attribute without object"))?;
            let triple = Triple::new(subject.clone(), p.clone(), o.clone())
                .map_err(|e| Error::structure(a, e.to_string()))?;
            out.insert(triple, a.clone());
        }
    }
    Ok(out)
}

/// The original graph described by a record set and a schema set.
pub fn dereify(record_set: &Graph, schema_set: &Graph) -> Result<Graph> {
    let mut out: Graph = attribute_triples(record_set)?.into_keys().collect();
    out.extend(attribute_triples(schema_set)?.into_keys());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_ntriples;
    use proptest::prelude::*;

    fn v() -> Term {
        Term::iri("http://example.org/EFO/v2.35").unwrap()
    }

    #[test]
    fn one_triple_one_record_one_attribute() {
        let g = parse_ntriples(
            "<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> \"liver\" .\n",
        )
        .unwrap();
        let r = reify(&g, &v());
        assert!(r.schema_set.is_empty());
        let records = r
            .record_set
            .matching(None, Some(&iri(rdf::TYPE)), Some(&iri(diachron::RECORD)))
            .count();
        let attrs = r
            .record_set
            .matching(None, Some(&iri(diachron::HAS_RECORD_ATTRIBUTE)), None)
            .count();
        assert_eq!((records, attrs), (1, 1));
        // set type + hasRecord + record type + subject + hasAttr + predicate + object
        assert_eq!(r.record_set.len(), 7);
        assert_eq!(r.dereify().unwrap(), g);
    }

    #[test]
    fn empty_graph_reifies_to_empty_graphs() {
        let r = reify(&Graph::new(), &v());
        assert!(r.record_set.is_empty() && r.schema_set.is_empty());
        assert!(r.dereify().unwrap().is_empty());
    }

    #[test]
    fn grouping_by_subject() {
        let mut text = String::new();
        for s in 0..2 {
            for p in 0..3 {
                text.push_str(&format!("<http://s/{s}> <http://p/{p}> \"x\" .\n"));
            }
        }
        let r = reify(&parse_ntriples(&text).unwrap(), &v());
        let count = |p: &str| r.record_set.matching(None, Some(&iri(p)), None).count();
        assert_eq!(count(diachron::HAS_RECORD), 2);
        assert_eq!(count(diachron::HAS_RECORD_ATTRIBUTE), 6);
        assert!(r.schema_set.is_empty());
    }

    #[test]
    fn schema_triples_go_to_schema_set() {
        let g = parse_ntriples(
            "<http://x/C> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#Class> .\n\
             <http://x/i> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/C> .\n",
        )
        .unwrap();
        let r = reify(&g, &v());
        assert_eq!(dereify(&Graph::new(), &r.schema_set).unwrap().len(), 1);
        assert_eq!(dereify(&r.record_set, &Graph::new()).unwrap().len(), 1);
        assert_eq!(r.dereify().unwrap(), g);
    }

    #[test]
    fn missing_subject_names_the_record() {
        let mut r = reify(
            &parse_ntriples("<http://s> <http://p> \"o\" .\n").unwrap(),
            &v(),
        );
        let subj = r
            .record_set
            .matching(None, Some(&iri(diachron::SUBJECT)), None)
            .next()
            .unwrap()
            .clone();
        r.record_set.remove(&subj);
        match r.dereify() {
            Err(Error::Structure { iri, .. }) => assert_eq!(iri, subj.subject.to_string()),
            other => panic!("expected structure error, got {other:?}"),
        }
    }

    #[test]
    fn blank_nodes_are_skolemized_consistently() {
        let g = parse_ntriples("_:b1 <http://p> _:b2 .\n_:b2 <http://p> \"x\" .\n").unwrap();
        let back = reify(&g, &v()).dereify().unwrap();
        assert_eq!(back, skolemize(&g, &v()));
        assert!(back.iter().all(|t| !t.subject.is_blank() && !t.object.is_blank()));
    }

    proptest! {
        #[test]
        fn round_trip(triples in prop::collection::vec((0..6u8, 0..4u8, 0..8u8, any::<bool>()), 0..50)) {
            let g: Graph = triples
                .into_iter()
                .map(|(s, p, o, lit)| {
                    let obj = if lit { Term::string(format!("o{o}")) } else { Term::iri(format!("http://n/{o}")).unwrap() };
                    Triple::new(Term::iri(format!("http://n/{s}")).unwrap(), Term::iri(format!("http://p/{p}")).unwrap(), obj).unwrap()
                })
                .collect();
            prop_assert_eq!(reify(&g, &v()).dereify().unwrap(), g);
        }
    }
}
