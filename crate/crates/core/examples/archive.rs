//! Ingest three versions of a dataset under mixed storage policies, list
//! them and export each one back to N-Triples.

use chrono::NaiveDate;
use diachron::model::{Archive, IngestOptions, StoragePolicy};
use diachron::rdf::{parse_ntriples, serialize_ntriples, Term};

fn version_text(label: &str, extra: bool) -> String {
    let mut s = format!("<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> \"{label}\" .\n");
    if extra {
        s.push_str("<http://www.ebi.ac.uk/efo/EFO_0000887> <http://purl.org/dc/terms/creator> \"EBI\" .\n");
    }
    s
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut archive = Archive::new();
    let dataset = Term::iri("http://example.org/EFO")?;
    let inputs = [
        ("v1", version_text("liver", false), StoragePolicy::Full),
        ("v2", version_text("LIVER", false), StoragePolicy::Delta),
        ("v3", version_text("LIVER", true), StoragePolicy::Delta),
    ];
    for (i, (name, text, policy)) in inputs.iter().enumerate() {
        archive.ingest_version(
            &dataset,
            &parse_ntriples(text)?,
            IngestOptions {
                version: Some(Term::iri(format!("http://example.org/EFO/{name}"))?),
                date: NaiveDate::from_ymd_opt(2015, 1 + i as u32, 1),
                policy: *policy,
            },
        )?;
    }

    for info in archive.list_versions(&dataset)? {
        println!(
            "{} ordinal={} policy={} records={} attributes={}",
            info.iri, info.ordinal, info.policy, info.record_count, info.attribute_count
        );
        print!("{}", serialize_ntriples(&archive.version_graph(&info.iri)?));
    }

    let dir = std::env::temp_dir().join("diachron-archive-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("archive.nq");
    archive.save(&path)?;
    let reopened = Archive::open(&path)?;
    println!("saved {} quads to {}", reopened.store().len(), path.display());
    Ok(())
}
