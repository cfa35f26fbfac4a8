//! The archive: a quad store plus a catalog derived from its dictionary
//! graph. Ingests versions, materializes them, and manages change sets and
//! diachronic resources.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;

use super::mint;
use super::reify::{reify, ReifiedVersion};
use crate::changes::{apply_delta, build_change_set, change_set_from_graph, change_set_graph, ChangeSet, Direction};
use crate::error::{Error, Result};
use crate::rdf::{Graph, Literal, Term, Triple};
use crate::store::{dictionary_graph, Quad, QuadStore};
use crate::vocab::{dcterms, diachron, rdf, xsd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StoragePolicy {
    Full,
    Delta,
}

impl StoragePolicy {
    fn iri(self) -> &'static str {
        match self {
            StoragePolicy::Full => diachron::FULL,
            StoragePolicy::Delta => diachron::DELTA,
        }
    }
}

impl fmt::Display for StoragePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StoragePolicy::Full => "FULL",
            StoragePolicy::Delta => "DELTA",
        })
    }
}

impl FromStr for StoragePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(StoragePolicy::Full),
            "delta" => Ok(StoragePolicy::Delta),
            _ => Err(Error::Archive(format!("unknown storage policy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersionInfo {
    pub iri: Term,
    pub dataset: Term,
    pub ordinal: u64,
    pub date: Option<NaiveDate>,
    pub policy: StoragePolicy,
    /// A DELTA version whose reified graphs have been stored anyway.
    pub cached: bool,
    pub record_set: Term,
    pub schema_set: Term,
    pub record_count: u64,
    pub attribute_count: u64,
}

impl VersionInfo {
    /// Whether the reified graphs are present in the store.
    pub fn is_materialized(&self) -> bool {
        self.policy == StoragePolicy::Full || self.cached
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetInfo {
    pub iri: Term,
    /// Sorted by ordinal.
    pub versions: Vec<Term>,
    pub change_sets: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeSetInfo {
    pub iri: Term,
    pub dataset: Term,
    pub old_version: Term,
    pub new_version: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceInfo {
    pub iri: Term,
    pub query: String,
}

/// In-memory index of the dictionary graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalog {
    pub datasets: BTreeMap<Term, DatasetInfo>,
    pub versions: HashMap<Term, VersionInfo>,
    pub change_sets: BTreeMap<Term, ChangeSetInfo>,
    pub resources: BTreeMap<Term, ResourceInfo>,
}

fn iri(s: &str) -> Term {
    Term::iri_unchecked(s)
}

fn int_lit(n: u64) -> Term {
    Term::Literal(Literal::typed(n.to_string(), xsd::INTEGER))
}

impl Catalog {
    pub fn from_dictionary(dict: &Graph) -> Result<Self> {
        let mut cat = Catalog::default();
        let rdf_type = iri(rdf::TYPE);
        let need = |s: &Term, p: &str| -> Result<Term> {
            dict.object_of(s, &iri(p))
                .cloned()
                .ok_or_else(|| Error::structure(s, format!("dictionary entry without {p}")))
        };
        let int_of = |s: &Term, p: &str| -> Result<u64> {
            let t = need(s, p)?;
            t.as_literal()
                .and_then(|l| l.lexical().parse().ok())
                .ok_or_else(|| Error::structure(s, format!("{p} is not an integer")))
        };
        for t in dict.matching(None, Some(&rdf_type), Some(&iri(diachron::DIACHRONIC_DATASET))) {
            let d = t.subject.clone();
            let mut versions = Vec::new();
            for h in dict.with_subject_predicate(&d, &iri(diachron::HAS_INSTANTIATION)) {
                let v = h.object.clone();
                let date = match dict.object_of(&v, &iri(dcterms::DATE)) {
                    Some(lit) => Some(
                        lit.as_literal()
                            .and_then(|l| NaiveDate::parse_from_str(l.lexical(), "%Y-%m-%d").ok())
                            .ok_or_else(|| Error::structure(&v, "malformed date"))?,
                    ),
                    None => None,
                };
                let policy = match need(&v, diachron::STORAGE_POLICY)?.as_iri() {
                    Some(diachron::DELTA) => StoragePolicy::Delta,
                    _ => StoragePolicy::Full,
                };
                let cached = dict
                    .object_of(&v, &iri(diachron::CACHED))
                    .and_then(Term::as_literal)
                    .is_some_and(|l| l.lexical() == "true");
                let info = VersionInfo {
                    iri: v.clone(),
                    dataset: d.clone(),
                    ordinal: int_of(&v, diachron::ORDINAL)?,
                    date,
                    policy,
                    cached,
                    record_set: need(&v, diachron::HAS_RECORD_SET)?,
                    schema_set: need(&v, diachron::HAS_SCHEMA_SET)?,
                    record_count: int_of(&v, diachron::RECORD_COUNT)?,
                    attribute_count: int_of(&v, diachron::ATTRIBUTE_COUNT)?,
                };
                versions.push((info.ordinal, v.clone()));
                cat.versions.insert(v, info);
            }
            versions.sort();
            let mut change_sets = Vec::new();
            for h in dict.with_subject_predicate(&d, &iri(diachron::HAS_CHANGE_SET)) {
                let cs = h.object.clone();
                cat.change_sets.insert(
                    cs.clone(),
                    ChangeSetInfo {
                        iri: cs.clone(),
                        dataset: d.clone(),
                        old_version: need(&cs, diachron::OLD_VERSION)?,
                        new_version: need(&cs, diachron::NEW_VERSION)?,
                    },
                );
                change_sets.push(cs);
            }
            cat.datasets.insert(
                d.clone(),
                DatasetInfo {
                    iri: d,
                    versions: versions.into_iter().map(|(_, v)| v).collect(),
                    change_sets,
                },
            );
        }
        for t in dict.matching(None, Some(&rdf_type), Some(&iri(diachron::DIACHRONIC_RESOURCE))) {
            let r = t.subject.clone();
            let query = need(&r, diachron::DESCRIPTION_QUERY)?
                .as_literal()
                .map(|l| l.lexical().to_owned())
                .ok_or_else(|| Error::structure(&r, "description query is not a literal"))?;
            cat.resources.insert(r.clone(), ResourceInfo { iri: r, query });
        }
        Ok(cat)
    }

    pub fn version(&self, v: &Term) -> Result<&VersionInfo> {
        self.versions.get(v).ok_or_else(|| Error::UnknownVersion(v.to_string()))
    }

    pub fn dataset(&self, d: &Term) -> Result<&DatasetInfo> {
        self.datasets.get(d).ok_or_else(|| Error::UnknownDataset(d.to_string()))
    }

    /// The change set linking two consecutive versions, if stored.
    pub fn change_set_between(&self, old: &Term, new: &Term) -> Option<&ChangeSetInfo> {
        self.change_sets
            .values()
            .find(|c| &c.old_version == old && &c.new_version == new)
    }
}

/// Options for [`Archive::ingest_version`].
#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub version: Option<Term>,
    pub date: Option<NaiveDate>,
    pub policy: StoragePolicy,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            version: None,
            date: None,
            policy: StoragePolicy::Full,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Archive {
    store: QuadStore,
    catalog: Catalog,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_store(store: QuadStore) -> Result<Self> {
        let catalog = Catalog::from_dictionary(store.dictionary())?;
        Ok(Self { store, catalog })
    }

    pub fn open(path: &Path) -> Result<Self> {
        Self::from_store(QuadStore::load(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.store.persist(path)
    }

    pub fn store(&self) -> &QuadStore {
        &self.store
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    /// Adds quads and re-indexes the dictionary. Callers build every quad
    /// first so a failed ingest leaves the archive untouched.
    fn commit(&mut self, quads: Vec<Quad>) -> Result<()> {
        self.store.add_quads(quads);
        self.catalog = Catalog::from_dictionary(self.store.dictionary())?;
        Ok(())
    }

    /// Registers a new version of `dataset` built from `graph`.
    pub fn ingest_version(&mut self, dataset: &Term, graph: &Graph, opts: IngestOptions) -> Result<VersionInfo> {
        if !dataset.is_iri() {
            return Err(Error::InvalidTerm(format!("dataset {dataset} is not an IRI")));
        }
        let predecessor = self
            .catalog
            .datasets
            .get(dataset)
            .and_then(|d| d.versions.last())
            .map(|v| self.catalog.versions[v].clone());
        let ordinal = predecessor.as_ref().map_or(0, |p| p.ordinal + 1);
        let version = opts
            .version
            .clone()
            .unwrap_or_else(|| mint::default_version_iri(dataset, ordinal));
        if !version.is_iri() {
            return Err(Error::InvalidTerm(format!("version {version} is not an IRI")));
        }
        if self.catalog.versions.contains_key(&version) || self.catalog.datasets.contains_key(&version) {
            return Err(Error::Archive(format!("version {version} already exists")));
        }
        if opts.policy == StoragePolicy::Delta && predecessor.is_none() {
            return Err(Error::Archive(format!(
                "the first version of {dataset} cannot use the DELTA policy"
            )));
        }

        let reified = reify(graph, &version);
        let data = reified.dereify()?;
        let record_count = data.subjects().count() as u64;
        let attribute_count = data.len() as u64;

        let dict = dictionary_graph();
        let mut quads = Vec::new();
        let mut add = |g: &Term, s: &Term, p: &str, o: Term| {
            quads.push(Quad {
                graph: g.clone(),
                triple: Triple::new_unchecked(s.clone(), iri(p), o),
            });
        };
        add(&dict, dataset, rdf::TYPE, iri(diachron::DIACHRONIC_DATASET));
        add(&dict, dataset, diachron::HAS_INSTANTIATION, version.clone());
        add(&dict, &version, rdf::TYPE, iri(diachron::DATASET));
        add(&dict, &version, diachron::HAS_RECORD_SET, reified.record_set_iri());
        add(&dict, &version, diachron::HAS_SCHEMA_SET, reified.schema_set_iri());
        add(&dict, &version, diachron::ORDINAL, int_lit(ordinal));
        add(&dict, &version, diachron::STORAGE_POLICY, iri(opts.policy.iri()));
        add(&dict, &version, diachron::RECORD_COUNT, int_lit(record_count));
        add(&dict, &version, diachron::ATTRIBUTE_COUNT, int_lit(attribute_count));
        if let Some(date) = opts.date {
            add(
                &dict,
                &version,
                dcterms::DATE,
                Term::Literal(Literal::typed(date.format("%Y-%m-%d").to_string(), xsd::DATE)),
            );
        }

        if let Some(prev) = &predecessor {
            let old = self.materialize_version(&prev.iri)?;
            let cs = build_change_set(&old, &reified)?;
            add(&dict, dataset, diachron::HAS_CHANGE_SET, cs.iri.clone());
            add(&dict, &cs.iri, rdf::TYPE, iri(diachron::CHANGE_SET));
            add(&dict, &cs.iri, diachron::OLD_VERSION, prev.iri.clone());
            add(&dict, &cs.iri, diachron::NEW_VERSION, version.clone());
            for t in change_set_graph(&cs) {
                quads.push(Quad {
                    graph: cs.iri.clone(),
                    triple: t,
                });
            }
        }
        if opts.policy == StoragePolicy::Full {
            quads.extend(graph_quads(&reified));
        }
        self.commit(quads)?;
        Ok(self.catalog.versions[&version].clone())
    }

    pub fn list_datasets(&self) -> Vec<&DatasetInfo> {
        self.catalog.datasets.values().collect()
    }

    pub fn list_versions(&self, dataset: &Term) -> Result<Vec<&VersionInfo>> {
        let d = self.catalog.dataset(dataset)?;
        Ok(d.versions.iter().map(|v| &self.catalog.versions[v]).collect())
    }

    pub fn version(&self, v: &Term) -> Result<&VersionInfo> {
        self.catalog.version(v)
    }

    /// Reads a stored change set.
    pub fn change_set(&self, cs: &Term) -> Result<ChangeSet> {
        let info = self
            .catalog
            .change_sets
            .get(cs)
            .ok_or_else(|| Error::Archive(format!("unknown change set {cs}")))?;
        change_set_from_graph(
            cs,
            &info.old_version,
            &info.new_version,
            &self.store.get_graph(cs),
        )
    }

    /// The change set between two versions of one dataset, computing it
    /// when the pair is not stored.
    pub fn change_set_between(&self, old: &Term, new: &Term) -> Result<ChangeSet> {
        let a = self.catalog.version(old)?;
        let b = self.catalog.version(new)?;
        if a.dataset != b.dataset {
            return Err(Error::Archive(format!(
                "{old} and {new} belong to different datasets"
            )));
        }
        if let Some(info) = self.catalog.change_set_between(old, new) {
            return self.change_set(&info.iri.clone());
        }
        build_change_set(&self.materialize_version(old)?, &self.materialize_version(new)?)
    }

    /// Computes and stores the change set between two versions.
    pub fn build_change_set(&mut self, old: &Term, new: &Term) -> Result<ChangeSet> {
        let cs = self.change_set_between(old, new)?;
        if !self.catalog.change_sets.contains_key(&cs.iri) {
            let dataset = self.catalog.version(old)?.dataset.clone();
            let dict = dictionary_graph();
            let mut quads: Vec<Quad> = [
                (dataset.clone(), diachron::HAS_CHANGE_SET, cs.iri.clone()),
                (cs.iri.clone(), rdf::TYPE, iri(diachron::CHANGE_SET)),
                (cs.iri.clone(), diachron::OLD_VERSION, old.clone()),
                (cs.iri.clone(), diachron::NEW_VERSION, new.clone()),
            ]
            .into_iter()
            .map(|(s, p, o)| Quad {
                graph: dict.clone(),
                triple: Triple::new_unchecked(s, iri(p), o),
            })
            .collect();
            quads.extend(change_set_graph(&cs).into_iter().map(|t| Quad {
                graph: cs.iri.clone(),
                triple: t,
            }));
            self.commit(quads)?;
        }
        Ok(cs)
    }

    /// The reified graphs of a version. Stored graphs are returned as is;
    /// DELTA versions are rebuilt from the nearest earlier materialized
    /// version by applying change sets forward. Nothing is persisted.
    pub fn materialize_version(&self, v: &Term) -> Result<ReifiedVersion> {
        let info = self.catalog.version(v)?;
        if info.is_materialized() {
            return Ok(ReifiedVersion {
                version: v.clone(),
                record_set: self.store.get_graph(&info.record_set),
                schema_set: self.store.get_graph(&info.schema_set),
            });
        }
        Ok(reify(&self.version_graph(v)?, v))
    }

    /// The de-reified content of a version.
    pub fn version_graph(&self, v: &Term) -> Result<Graph> {
        let info = self.catalog.version(v)?;
        if info.is_materialized() {
            return crate::model::reify::dereify(
                &self.store.get_graph(&info.record_set),
                &self.store.get_graph(&info.schema_set),
            );
        }
        let dataset = &self.catalog.datasets[&info.dataset];
        let pos = dataset.versions.iter().position(|x| x == v).expect("version listed");
        let base = dataset.versions[..pos]
            .iter()
            .rposition(|x| self.catalog.versions[x].is_materialized())
            .ok_or_else(|| Error::Integrity(format!("no materialized ancestor for {v}")))?;
        let mut g = self.version_graph(&dataset.versions[base])?;
        for w in dataset.versions[base..=pos].windows(2) {
            let cs_info = self.catalog.change_set_between(&w[0], &w[1]).ok_or_else(|| {
                Error::Integrity(format!("missing change set between {} and {}", w[0], w[1]))
            })?;
            let cs = self.change_set(&cs_info.iri.clone())?;
            apply_delta(&mut g, &cs, Direction::Forward)?;
        }
        Ok(g)
    }

    /// Stores the reified graphs of a DELTA version and flags it as cached.
    pub fn cache_version(&mut self, v: &Term) -> Result<()> {
        let info = self.catalog.version(v)?;
        if info.is_materialized() {
            return Ok(());
        }
        let reified = self.materialize_version(v)?;
        let mut quads = graph_quads(&reified);
        quads.push(Quad {
            graph: dictionary_graph(),
            triple: Triple::new_unchecked(
                v.clone(),
                iri(diachron::CACHED),
                Term::Literal(Literal::typed("true", xsd::BOOLEAN)),
            ),
        });
        self.commit(quads)
    }

    /// Adds a metadata triple about an archive entity to the dictionary.
    pub fn annotate(&mut self, subject: &Term, predicate: &Term, object: Term) -> Result<()> {
        let triple = Triple::new(subject.clone(), predicate.clone(), object)?;
        if let Some(p) = predicate.as_iri() {
            if p.starts_with(diachron::NS) || p == rdf::TYPE {
                return Err(Error::Archive(format!("{predicate} is reserved for the archive")));
            }
        }
        self.commit(vec![Quad {
            graph: dictionary_graph(),
            triple,
        }])
    }

    /// Stores a diachronic resource with its description query.
    pub fn define_resource(&mut self, resource: &Term, query: &str) -> Result<()> {
        crate::ql::parse(query)?;
        let dict = dictionary_graph();
        let mut store = self.store.clone();
        for q in store.quads_matching(Some(&dict), Some(resource), Some(&iri(diachron::DESCRIPTION_QUERY)), None) {
            store.remove(&q);
        }
        store.add_quads([
            Quad {
                graph: dict.clone(),
                triple: Triple::new(resource.clone(), iri(rdf::TYPE), iri(diachron::DIACHRONIC_RESOURCE))?,
            },
            Quad {
                graph: dict,
                triple: Triple::new(resource.clone(), iri(diachron::DESCRIPTION_QUERY), Term::string(query))?,
            },
        ]);
        self.catalog = Catalog::from_dictionary(store.dictionary())?;
        self.store = store;
        Ok(())
    }

    pub fn resource(&self, resource: &Term) -> Result<&ResourceInfo> {
        self.catalog
            .resources
            .get(resource)
            .ok_or_else(|| Error::UnknownResource(resource.to_string()))
    }
}

impl ReifiedVersion {
    pub fn record_set_iri(&self) -> Term {
        mint::record_set_iri(&self.version)
    }

    pub fn schema_set_iri(&self) -> Term {
        mint::schema_set_iri(&self.version)
    }
}

fn graph_quads(r: &ReifiedVersion) -> Vec<Quad> {
    let rs = r.record_set_iri();
    let ss = r.schema_set_iri();
    r.record_set
        .iter()
        .map(|t| Quad {
            graph: rs.clone(),
            triple: t.clone(),
        })
        .chain(r.schema_set.iter().map(|t| Quad {
            graph: ss.clone(),
            triple: t.clone(),
        }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_ntriples;

    fn t(s: &str) -> Term {
        Term::iri(s).unwrap()
    }

    fn g(text: &str) -> Graph {
        parse_ntriples(text).unwrap()
    }

    const V235: &str = "<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> \"liver\" .\n";
    const V236: &str = "<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> \"LIVER\" .\n";

    fn fixture(policy: StoragePolicy) -> Archive {
        let mut a = Archive::new();
        let efo = t("http://example.org/EFO");
        a.ingest_version(
            &efo,
            &g(V235),
            IngestOptions {
                version: Some(t("http://example.org/EFO/v2.35")),
                date: NaiveDate::from_ymd_opt(2015, 1, 2),
                policy: StoragePolicy::Full,
            },
        )
        .unwrap();
        a.ingest_version(
            &efo,
            &g(V236),
            IngestOptions {
                version: Some(t("http://example.org/EFO/v2.36")),
                date: NaiveDate::from_ymd_opt(2015, 2, 2),
                policy,
            },
        )
        .unwrap();
        a
    }

    #[test]
    fn fixture_dictionary() {
        let a = fixture(StoragePolicy::Full);
        let inst = a.store().quads_matching(
            Some(&dictionary_graph()),
            None,
            Some(&t(diachron::HAS_INSTANTIATION)),
            None,
        );
        assert_eq!(inst.len(), 2);
        let versions = a.list_versions(&t("http://example.org/EFO")).unwrap();
        assert_eq!(versions.len(), 2);
        assert_eq!(versions[0].date, NaiveDate::from_ymd_opt(2015, 1, 2));
        assert_eq!(versions[1].ordinal, 1);
        // dictionary, two record sets and one change set
        assert_eq!(a.store().list_graphs().len(), 4);
    }

    #[test]
    fn delta_materializes_like_full() {
        let full = fixture(StoragePolicy::Full);
        let delta = fixture(StoragePolicy::Delta);
        let v = t("http://example.org/EFO/v2.36");
        assert_eq!(full.materialize_version(&v).unwrap(), delta.materialize_version(&v).unwrap());
        assert_eq!(delta.version_graph(&v).unwrap(), g(V236));
    }

    #[test]
    fn delta_chain() {
        let mut a = Archive::new();
        let d = t("http://x/D");
        let sources = [V235, V236, "<http://s> <http://p> \"z\" .\n"];
        for (i, src) in sources.iter().enumerate() {
            let policy = if i == 0 { StoragePolicy::Full } else { StoragePolicy::Delta };
            a.ingest_version(&d, &g(src), IngestOptions { policy, ..Default::default() }).unwrap();
        }
        let third = t("http://x/D/version/2");
        assert_eq!(a.materialize_version(&third).unwrap(), reify(&g(sources[2]), &third));
        a.cache_version(&third).unwrap();
        assert!(a.version(&third).unwrap().cached);
        assert_eq!(a.materialize_version(&third).unwrap(), reify(&g(sources[2]), &third));
    }

    #[test]
    fn ingest_errors() {
        let mut a = Archive::new();
        let d = t("http://x/D");
        let delta = IngestOptions { policy: StoragePolicy::Delta, ..Default::default() };
        assert!(a.ingest_version(&d, &g(V235), delta).is_err());
        let v = IngestOptions { version: Some(t("http://x/v")), ..Default::default() };
        a.ingest_version(&d, &g(V235), v.clone()).unwrap();
        assert!(a.ingest_version(&d, &g(V236), v).is_err());
        assert_eq!(a.list_versions(&d).unwrap().len(), 1);
    }

    #[test]
    fn identical_versions_have_empty_change_set() {
        let mut a = Archive::new();
        let d = t("http://x/D");
        a.ingest_version(&d, &g(V235), IngestOptions::default()).unwrap();
        a.ingest_version(&d, &g(V235), IngestOptions { policy: StoragePolicy::Delta, ..Default::default() })
            .unwrap();
        let cs = a.change_set_between(&t("http://x/D/version/0"), &t("http://x/D/version/1")).unwrap();
        assert!(cs.is_empty());
    }

    #[test]
    fn persistence_round_trip() {
        let a = fixture(StoragePolicy::Delta);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("efo.nq");
        a.save(&path).unwrap();
        assert_eq!(Archive::open(&path).unwrap(), a);
    }

    #[test]
    fn empty_archive_lists_nothing() {
        let a = Archive::new();
        assert!(a.list_datasets().is_empty());
        assert!(a.list_versions(&t("http://x/none")).is_err());
    }
}
