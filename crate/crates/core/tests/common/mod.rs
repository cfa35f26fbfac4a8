#![allow(dead_code)]

use chrono::NaiveDate;
use diachron::model::{Archive, IngestOptions, StoragePolicy};
use diachron::rdf::{parse_ntriples, Graph, Term};

pub const V235: &str = include_str!("../../fixtures/efo_v2.35.nt");
pub const V236: &str = include_str!("../../fixtures/efo_v2.36.nt");

pub fn iri(s: &str) -> Term {
    Term::iri(s).unwrap()
}

pub fn graph(text: &str) -> Graph {
    parse_ntriples(text).unwrap()
}

pub fn efo() -> Term {
    iri("http://example.org/EFO")
}

pub fn efo_archive(second: StoragePolicy) -> Archive {
    let mut a = Archive::new();
    let d = efo();
    a.ingest_version(
        &d,
        &graph(V235),
        IngestOptions {
            version: Some(iri("http://example.org/EFO/v2.35")),
            date: NaiveDate::from_ymd_opt(2015, 1, 2),
            policy: StoragePolicy::Full,
        },
    )
    .unwrap();
    a.ingest_version(
        &d,
        &graph(V236),
        IngestOptions {
            version: Some(iri("http://example.org/EFO/v2.36")),
            date: NaiveDate::from_ymd_opt(2015, 2, 2),
            policy: second,
        },
    )
    .unwrap();
    a
}
pub mod oracle;
