//! Define a diachronic resource by its description query and materialize
//! it against the archive.

use chrono::NaiveDate;
use diachron::eval::materialize_resource;
use diachron::model::{Archive, IngestOptions, StoragePolicy};
use diachron::rdf::{parse_ntriples, Term};

fn main() -> diachron::Result<()> {
    let mut archive = Archive::new();
    let efo = Term::iri("http://example.org/EFO")?;
    for (i, label) in ["liver", "LIVER", "liver tissue"].iter().enumerate() {
        let text = format!("<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> \"{label}\" .\n");
        archive.ingest_version(
            &efo,
            &parse_ntriples(&text)?,
            IngestOptions {
                version: Some(Term::iri(format!("http://example.org/EFO/v{i}"))?),
                date: NaiveDate::from_ymd_opt(2015, 1 + i as u32, 1),
                policy: StoragePolicy::Full,
            },
        )?;
    }

    let liver = Term::iri("http://example.org/resource/liver")?;
    archive.define_resource(
        &liver,
        "SELECT ?v ?label WHERE { DATASET <EFO> AT VERSION ?v { efo:EFO_0000887 rdfs:label ?label } } ORDER BY ?v",
    )?;
    println!("{}", archive.resource(&liver)?.query);
    print!("{}", materialize_resource(&archive, &liver)?.to_tsv());
    Ok(())
}
