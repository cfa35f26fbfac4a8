//! Rewrite archive queries into plain SPARQL over the named-graph layout,
//! then run the rewritten text and compare with direct evaluation.

use chrono::NaiveDate;
use diachron::eval::eval;
use diachron::model::{Archive, IngestOptions, StoragePolicy};
use diachron::ql::parse;
use diachron::rdf::{parse_ntriples, Term};
use diachron::translate::{evaluate_translated, translate};

fn main() -> diachron::Result<()> {
    let mut archive = Archive::new();
    let efo = Term::iri("http://example.org/EFO")?;
    for (i, label) in ["liver", "LIVER"].iter().enumerate() {
        let text = format!("<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> \"{label}\" .\n");
        archive.ingest_version(
            &efo,
            &parse_ntriples(&text)?,
            IngestOptions {
                version: Some(Term::iri(format!("http://example.org/EFO/v{i}"))?),
                date: NaiveDate::from_ymd_opt(2015, 1 + i as u32, 1),
                policy: if i == 0 { StoragePolicy::Full } else { StoragePolicy::Delta },
            },
        )?;
    }

    for text in [
        "SELECT ?s ?o WHERE { ?s rdfs:label ?o }",
        "SELECT ?v ?r WHERE { DATASET <EFO> AT VERSION ?v { RECORD ?r { ?s RECATT ?ra { ?p ?o } } } }",
        "SELECT ?c ?t WHERE { CHANGES <EFO> AFTER VERSION <EFO/v0> { CHANGE ?c { a ?t } } }",
    ] {
        let query = parse(text)?;
        let sparql = translate(&query, &archive)?;
        println!("{text}\n=>\n{}", sparql.query);
        if !sparql.materializations.is_empty() {
            let names: Vec<String> = sparql.materializations.iter().map(|t| t.to_string()).collect();
            println!("materialize first: {}", names.join(" "));
        }
        let direct = eval(&query, &archive)?;
        let rewritten = evaluate_translated(&sparql, &archive)?;
        assert_eq!(direct.row_set(), rewritten.row_set());
        println!("{} rows either way\n", direct.len());
    }
    Ok(())
}
