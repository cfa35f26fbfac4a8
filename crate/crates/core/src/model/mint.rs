//! Deterministic IRIs for archive entities, derived from content hashes so
//! that reification is reproducible across runs and storage policies.

use sha2::{Digest, Sha256};

use crate::rdf::Term;

fn digest(parts: &[&Term]) -> String {
    let mut hasher = Sha256::new();
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            hasher.update(b"\n");
        }
        hasher.update(part.to_string().as_bytes());
    }
    let out = hasher.finalize();
    hex::encode(&out[..16])
}

fn mint(kind: &str, parts: &[&Term]) -> Term {
    Term::iri_unchecked(format!("urn:diachron:{kind}:{}", digest(parts)))
}

pub fn record_set_iri(version: &Term) -> Term {
    mint("recordset", &[version])
}

pub fn schema_set_iri(version: &Term) -> Term {
    mint("schemaset", &[version])
}

pub fn record_iri(version: &Term, subject: &Term) -> Term {
    mint("record", &[version, subject])
}

pub fn schema_object_iri(version: &Term, subject: &Term) -> Term {
    mint("schema", &[version, subject])
}

pub fn attribute_iri(version: &Term, subject: &Term, predicate: &Term, object: &Term) -> Term {
    mint("attribute", &[version, subject, predicate, object])
}

pub fn change_set_iri(old: &Term, new: &Term) -> Term {
    mint("changeset", &[old, new])
}

pub fn change_iri(old: &Term, new: &Term, kind: &Term, params: &[Term]) -> Term {
    let mut parts: Vec<&Term> = vec![old, new, kind];
    parts.extend(params.iter());
    mint("change", &parts)
}

pub fn skolem_iri(version: &Term, label: &str) -> Term {
    let label = Term::blank(label);
    Term::iri_unchecked(format!("urn:skolem:{}", digest(&[version, &label])))
}

/// Version IRI used when the caller does not supply one.
pub fn default_version_iri(dataset: &Term, ordinal: u64) -> Term {
    let base = dataset.as_iri().unwrap_or("urn:diachron:dataset");
    Term::iri_unchecked(format!("{}/version/{ordinal}", base.trim_end_matches('/')))
}
