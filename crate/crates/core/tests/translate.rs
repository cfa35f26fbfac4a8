mod common;

use common::*;
use diachron::eval::eval_text;
use diachron::model::{Archive, StoragePolicy};
use diachron::translate::{evaluate_translated, translate_text};

const QUERIES: &[&str] = &[
    "SELECT ?version ?p ?o WHERE { DATASET <EFO> AT VERSION ?version { efo:EFO_0000887 ?p ?o } }",
    "SELECT ?rec ?s WHERE { DATASET <EFO> AT VERSION ?v { RECORD ?rec { ?s ?p ?o } } }",
    "SELECT ?ra ?o WHERE { DATASET <EFO> { RECORD ?r { ?s RECATT ?ra { ?p ?o } } } }",
    "SELECT ?s ?o FROM DATASET <EFO> AT VERSION <EFO/v2.36> WHERE { ?s ?p ?o }",
    "SELECT ?c ?t FROM CHANGES <EFO> BETWEEN VERSIONS <EFO/v2.35> <EFO/v2.36> WHERE { CHANGE ?c { a ?t } }",
    "SELECT ?c ?a ?b WHERE { CHANGES <EFO> BETWEEN VERSIONS ?a ?b { CHANGE ?c { ?p ?o } } }",
    "SELECT ?c WHERE { CHANGES <EFO> AFTER VERSION <EFO/v2.35> { CHANGE ?c { ?p ?o } } }",
    "SELECT ?o WHERE { DATASET <EFO> BEFORE VERSION <EFO/v2.36> { ?s ?p ?o } }",
    "SELECT ?o WHERE { DATASET <EFO> BETWEEN VERSIONS <EFO/v2.35> <EFO/v2.36> { ?s ?p ?o } }",
    "SELECT ?o WHERE { ?s ?p ?o FILTER (regex(?o, \"^l\")) }",
    "SELECT ?v (COUNT(?r) AS ?n) WHERE { DATASET <EFO> AT VERSION ?v { RECORD ?r { ?s ?p ?o } } } GROUP BY ?v ORDER BY DESC(?v)",
    "SELECT * WHERE { ?s ?p ?o OPTIONAL { ?s <http://example.org/x> ?z } }",
    "SELECT ?c WHERE { CHANGE ?c { ?p ?o } }",
    "SELECT ?s ?g WHERE { GRAPH ?g { ?s a diachron:Record } }",
];

#[test]
fn translated_queries_agree_with_native() {
    for policy in [StoragePolicy::Full, StoragePolicy::Delta] {
        let a = efo_archive(policy);
        for q in QUERIES {
            let native = eval_text(q, &a).unwrap();
            let st = translate_text(q, &a).unwrap();
            let translated = evaluate_translated(&st, &a).unwrap_or_else(|e| panic!("{q}\n{}\n{e}", st.query));
            assert_eq!(native.header, translated.header, "{q}");
            assert_eq!(native.row_set(), translated.row_set(), "{q}\n{}", st.query);
        }
    }
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[test]
fn plain_triple_becomes_anonymous_record() {
    let st = translate_text("SELECT ?s WHERE { ?s ?p ?o }", &efo_archive(StoragePolicy::Full)).unwrap();
    assert!(squash(&st.query).contains(
        "[ a diachron:Record ; diachron:subject ?s ; diachron:hasRecordAttribute [ diachron:predicate ?p ; diachron:object ?o ] ]"
    ));
}

#[test]
fn record_block_binds_record() {
    let st = translate_text("SELECT ?r WHERE { RECORD ?r { ?s ?p ?o } }", &efo_archive(StoragePolicy::Full)).unwrap();
    assert!(squash(&st.query).contains(
        "?r a diachron:Record ; diachron:subject ?s ; diachron:hasRecordAttribute [ diachron:predicate ?p ; diachron:object ?o ]"
    ));
}

#[test]
fn dataset_scope_uses_dictionary_lookup() {
    let st = translate_text(
        "SELECT ?r WHERE { DATASET <EFO> AT VERSION ?v { RECORD ?r { ?s RECATT ?ra { ?p ?o } } } }",
        &efo_archive(StoragePolicy::Full),
    )
    .unwrap();
    assert_eq!(
        squash(&st.query),
        squash(
            "PREFIX diachron: <http://diachron.org/model#>
             SELECT ?r
             WHERE { {
               GRAPH <urn:diachron:dictionary> {
                 <http://example.org/EFO> diachron:hasInstantiation ?v . ?v diachron:hasRecordSet ?_d_1 .
               }
               GRAPH ?_d_1 {
                 ?r a diachron:Record ; diachron:subject ?s ; diachron:hasRecordAttribute ?ra .
                 ?ra diachron:predicate ?p ; diachron:object ?o .
               }
             } }"
        )
    );
}

#[test]
fn delta_versions_are_listed_for_materialization() {
    let a = efo_archive(StoragePolicy::Delta);
    let st = translate_text("SELECT ?o WHERE { DATASET <EFO> AT VERSION ?v { ?s ?p ?o } }", &a).unwrap();
    assert_eq!(st.materializations, vec![iri("http://example.org/EFO/v2.36")]);
    let st = translate_text("SELECT ?o FROM DATASET <EFO> AT VERSION <EFO/v2.35> WHERE { ?s ?p ?o }", &a).unwrap();
    assert!(st.materializations.is_empty());
}

#[test]
fn translation_is_deterministic() {
    let a = efo_archive(StoragePolicy::Full);
    for q in QUERIES {
        assert_eq!(translate_text(q, &a).unwrap(), translate_text(q, &a).unwrap());
    }
}

#[test]
fn empty_archive_both_paths() {
    let a = Archive::new();
    let q = "SELECT ?s WHERE { ?s ?p ?o }";
    assert!(eval_text(q, &a).unwrap().is_empty());
    assert!(evaluate_translated(&translate_text(q, &a).unwrap(), &a).unwrap().is_empty());
}
