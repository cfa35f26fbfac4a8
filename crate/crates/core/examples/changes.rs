//! Compute the change set between two versions, show its high-level
//! changes and apply it in both directions.

use diachron::changes::{apply_change_set, build_change_set, change_set_graph, Direction};
use diachron::model::reify;
use diachron::rdf::{parse_ntriples, serialize_ntriples, Term};

fn main() -> diachron::Result<()> {
    let old = parse_ntriples(
        "<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> \"liver\" .\n\
         <http://www.ebi.ac.uk/efo/EFO_0000887> <http://purl.org/dc/terms/creator> \"EBI\" .\n",
    )?;
    let new = parse_ntriples(
        "<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> \"LIVER\" .\n\
         <http://www.ebi.ac.uk/efo/EFO_0000888> <http://www.w3.org/2000/01/rdf-schema#label> \"heart\" .\n",
    )?;
    let old = reify(&old, &Term::iri("http://example.org/EFO/v1")?);
    let new = reify(&new, &Term::iri("http://example.org/EFO/v2")?);

    let cs = build_change_set(&old, &new)?;
    for change in &cs.changes {
        println!("{:?}: -{} +{}", change.kind, change.deleted.len(), change.added.len());
    }
    println!();
    print!("{}", serialize_ntriples(&change_set_graph(&cs)));

    let forward = apply_change_set(&old, &cs, Direction::Forward)?;
    assert_eq!(forward, new);
    let back = apply_change_set(&forward, &cs, Direction::Backward)?;
    assert_eq!(back, old);
    println!("\nforward and backward application round-trip");
    Ok(())
}
