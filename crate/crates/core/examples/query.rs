//! Run version-aware queries against a small archive and print the
//! results as TSV and JSON.

use chrono::NaiveDate;
use diachron::eval::eval_text;
use diachron::model::{Archive, IngestOptions, StoragePolicy};
use diachron::rdf::{parse_ntriples, Term};

fn main() -> diachron::Result<()> {
    let mut archive = Archive::new();
    let efo = Term::iri("http://example.org/EFO")?;
    for (i, label) in ["liver", "LIVER", "Liver"].iter().enumerate() {
        let text = format!(
            "<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> \"{label}\" .\n\
             <http://www.ebi.ac.uk/efo/EFO_0000888> <http://www.w3.org/2000/01/rdf-schema#label> \"heart\" .\n"
        );
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

    let queries = [
        "SELECT ?v ?o WHERE { DATASET <EFO> AT VERSION ?v { efo:EFO_0000887 rdfs:label ?o } } ORDER BY ?v",
        "SELECT ?r ?p ?o FROM DATASET <EFO> AT VERSION <EFO/v2> WHERE { RECORD ?r { efo:EFO_0000887 ?p ?o } }",
        "SELECT ?v1 ?v2 ?c WHERE { CHANGES <EFO> BETWEEN VERSIONS ?v1, ?v2 { CHANGE ?c { a diachron:LabelModificationChange } } }",
        "SELECT ?v (COUNT(?s) AS ?n) WHERE { DATASET <EFO> AT VERSION ?v { ?s rdfs:label ?o FILTER (regex(str(?o), \"^[a-z]\")) } } GROUP BY ?v ORDER BY ?v",
    ];
    for q in queries {
        println!("{q}");
        print!("{}", eval_text(q, &archive)?.to_tsv());
        println!();
    }

    let table = eval_text(queries[0], &archive)?;
    println!("{}", serde_json::to_string_pretty(&table.to_json()).expect("json"));
    Ok(())
}
