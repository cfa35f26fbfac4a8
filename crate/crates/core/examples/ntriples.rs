//! Parse N-Triples, reify the graph into records and attributes, and
//! serialize both forms canonically.

use diachron::model::reify;
use diachron::rdf::{parse_ntriples, serialize_ntriples, Term};

const INPUT: &str = r#"<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> "liver" .
<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#Class> .
<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://www.ebi.ac.uk/efo/EFO_0000786> .
"#;

fn main() -> diachron::Result<()> {
    let graph = parse_ntriples(INPUT)?;
    println!("# canonical input ({} triples)", graph.len());
    print!("{}", serialize_ntriples(&graph));

    let version = Term::iri("http://example.org/EFO/v1")?;
    let reified = reify(&graph, &version);
    println!("\n# record set");
    print!("{}", serialize_ntriples(&reified.record_set));
    println!("\n# schema set");
    print!("{}", serialize_ntriples(&reified.schema_set));

    assert_eq!(reified.dereify()?, graph);
    println!("\nde-reified graph equals the input");
    Ok(())
}
