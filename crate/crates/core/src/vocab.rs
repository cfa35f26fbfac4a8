//! IRI constants for the vocabularies the archive reads and writes.

pub mod rdf {
    pub const NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const PROPERTY: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Property";
    pub const LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
}

pub mod rdfs {
    pub const NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
    pub const LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
    pub const CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";
    pub const SUB_CLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    pub const SUB_PROPERTY_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
    pub const DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
}

pub mod owl {
    pub const NS: &str = "http://www.w3.org/2002/07/owl#";
    pub const CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
    pub const DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
}

pub mod xsd {
    pub const NS: &str = "http://www.w3.org/2001/XMLSchema#";
    pub const STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
    pub const DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
    pub const BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
    pub const DATE: &str = "http://www.w3.org/2001/XMLSchema#date";

    const NUMERIC_LOCAL_NAMES: &[&str] = &[
        "integer",
        "decimal",
        "double",
        "float",
        "int",
        "long",
        "short",
        "byte",
        "nonNegativeInteger",
        "nonPositiveInteger",
        "negativeInteger",
        "positiveInteger",
        "unsignedInt",
        "unsignedLong",
        "unsignedShort",
        "unsignedByte",
    ];

    pub fn is_numeric(datatype: &str) -> bool {
        datatype
            .strip_prefix(NS)
            .is_some_and(|local| NUMERIC_LOCAL_NAMES.contains(&local))
    }
}

pub mod dcterms {
    pub const NS: &str = "http://purl.org/dc/terms/";
    pub const DATE: &str = "http://purl.org/dc/terms/date";
}

/// The archive's own vocabulary. One namespace is used everywhere, including
/// translated SPARQL.
pub mod diachron {
    pub const NS: &str = "http://diachron.org/model#";

    pub const DIACHRONIC_DATASET: &str = "http://diachron.org/model#DiachronicDataset";
    pub const DATASET: &str = "http://diachron.org/model#Dataset";
    pub const RECORD_SET: &str = "http://diachron.org/model#RecordSet";
    pub const SCHEMA_SET: &str = "http://diachron.org/model#SchemaSet";
    pub const RECORD: &str = "http://diachron.org/model#Record";
    pub const SCHEMA_OBJECT: &str = "http://diachron.org/model#SchemaObject";
    pub const CHANGE_SET: &str = "http://diachron.org/model#ChangeSet";
    pub const DIACHRONIC_RESOURCE: &str = "http://diachron.org/model#DiachronicResource";

    pub const ADD_ATTRIBUTE: &str = "http://diachron.org/model#AddAttribute";
    pub const DELETE_ATTRIBUTE: &str = "http://diachron.org/model#DeleteAttribute";
    pub const LABEL_MODIFICATION: &str = "http://diachron.org/model#LabelModificationChange";

    pub const HAS_INSTANTIATION: &str = "http://diachron.org/model#hasInstantiation";
    pub const HAS_RECORD_SET: &str = "http://diachron.org/model#hasRecordSet";
    pub const HAS_SCHEMA_SET: &str = "http://diachron.org/model#hasSchemaSet";
    pub const HAS_RECORD: &str = "http://diachron.org/model#hasRecord";
    pub const HAS_SCHEMA_OBJECT: &str = "http://diachron.org/model#hasSchemaObject";
    pub const SUBJECT: &str = "http://diachron.org/model#subject";
    pub const HAS_RECORD_ATTRIBUTE: &str = "http://diachron.org/model#hasRecordAttribute";
    pub const PREDICATE: &str = "http://diachron.org/model#predicate";
    pub const OBJECT: &str = "http://diachron.org/model#object";

    pub const HAS_CHANGE_SET: &str = "http://diachron.org/model#hasChangeSet";
    pub const OLD_VERSION: &str = "http://diachron.org/model#oldVersion";
    pub const NEW_VERSION: &str = "http://diachron.org/model#newVersion";
    pub const HAS_CHANGE: &str = "http://diachron.org/model#hasChange";
    pub const PARAMETER1: &str = "http://diachron.org/model#parameter1";
    pub const PARAMETER2: &str = "http://diachron.org/model#parameter2";

    pub const ORDINAL: &str = "http://diachron.org/model#ordinal";
    pub const STORAGE_POLICY: &str = "http://diachron.org/model#storagePolicy";
    pub const FULL: &str = "http://diachron.org/model#Full";
    pub const DELTA: &str = "http://diachron.org/model#Delta";
    pub const CACHED: &str = "http://diachron.org/model#cached";
    pub const RECORD_COUNT: &str = "http://diachron.org/model#recordCount";
    pub const ATTRIBUTE_COUNT: &str = "http://diachron.org/model#attributeCount";
    pub const DESCRIPTION_QUERY: &str = "http://diachron.org/model#descriptionQuery";
}

/// Named graph holding the archive catalog.
pub const DICTIONARY_GRAPH: &str = "urn:diachron:dictionary";

/// Base IRI used to resolve relative references such as `<EFO>`.
pub const DEFAULT_BASE: &str = "http://example.org/";

/// Prefixes known to the query parser and CLI without declaration.
pub const BUILTIN_PREFIXES: &[(&str, &str)] = &[
    ("rdf", rdf::NS),
    ("rdfs", rdfs::NS),
    ("owl", owl::NS),
    ("xsd", xsd::NS),
    ("dcterms", dcterms::NS),
    ("diachron", diachron::NS),
    ("efo", "http://www.ebi.ac.uk/efo/"),
    ("co", "http://diachron.org/changes#"),
    ("ex", DEFAULT_BASE),
];
