//! In-memory named-graph quad store with canonical N-Quads persistence.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::rdf::ntriples::{parse_nquads, serialize_nquads};
use crate::rdf::{Graph, Term, Triple};
use crate::vocab::DICTIONARY_GRAPH;

const MANIFEST_HEADER: &str = "diachron-archive 1";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quad {
    pub graph: Term,
    pub triple: Triple,
}

impl Quad {
    pub fn new(graph: Term, triple: Triple) -> Result<Self> {
        if !graph.is_iri() {
            return Err(Error::InvalidTerm(format!("graph name {graph} is not an IRI")));
        }
        Ok(Self { graph, triple })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadStore {
    graphs: BTreeMap<Term, Graph>,
}

impl Default for QuadStore {
    fn default() -> Self {
        Self::new()
    }
}

pub fn dictionary_graph() -> Term {
    Term::iri_unchecked(DICTIONARY_GRAPH)
}

impl QuadStore {
    pub fn new() -> Self {
        let mut graphs = BTreeMap::new();
        graphs.insert(dictionary_graph(), Graph::new());
        Self { graphs }
    }

    /// Adds every quad; duplicates are ignored. Returns the number of new quads.
    pub fn add_quads(&mut self, quads: impl IntoIterator<Item = Quad>) -> usize {
        let mut added = 0;
        for q in quads {
            if self.graphs.entry(q.graph).or_default().insert(q.triple) {
                added += 1;
            }
        }
        added
    }

    pub fn insert(&mut self, graph: &Term, triple: Triple) -> bool {
        match self.graphs.get_mut(graph) {
            Some(g) => g.insert(triple),
            None => self.graphs.entry(graph.clone()).or_default().insert(triple),
        }
    }

    pub fn remove(&mut self, quad: &Quad) -> bool {
        self.graphs
            .get_mut(&quad.graph)
            .is_some_and(|g| g.remove(&quad.triple))
    }

    /// Replaces the whole content of a named graph.
    pub fn put_graph(&mut self, name: Term, graph: Graph) {
        self.graphs.insert(name, graph);
    }

    pub fn remove_graph(&mut self, name: &Term) -> Option<Graph> {
        if name == &dictionary_graph() {
            return self.graphs.insert(name.clone(), Graph::new());
        }
        self.graphs.remove(name)
    }

    /// Borrowed view of a named graph, if it holds anything.
    pub fn graph(&self, name: &Term) -> Option<&Graph> {
        self.graphs.get(name).filter(|g| !g.is_empty())
    }

    /// The triples of a named graph; unknown graphs are empty.
    pub fn get_graph(&self, name: &Term) -> Graph {
        self.graphs.get(name).cloned().unwrap_or_default()
    }

    pub fn dictionary(&self) -> &Graph {
        self.graphs
            .get(&dictionary_graph())
            .expect("dictionary graph always present")
    }

    /// Non-empty graph names plus the dictionary, sorted.
    pub fn list_graphs(&self) -> Vec<Term> {
        let dict = dictionary_graph();
        self.graphs
            .iter()
            .filter(|(name, g)| !g.is_empty() || **name == dict)
            .map(|(name, _)| name.clone())
            .collect()
    }

    pub fn contains_graph(&self, name: &Term) -> bool {
        self.graph(name).is_some()
    }

    pub fn len(&self) -> usize {
        self.graphs.values().map(Graph::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Triple)> {
        self.graphs
            .iter()
            .flat_map(|(name, g)| g.iter().map(move |t| (name, t)))
    }

    /// All quads matching the pattern; `None` is a wildcard.
    pub fn quads_matching(
        &self,
        graph: Option<&Term>,
        subject: Option<&Term>,
        predicate: Option<&Term>,
        object: Option<&Term>,
    ) -> Vec<Quad> {
        let mut out = Vec::new();
        let mut scan = |name: &Term, g: &Graph| {
            for t in g.matching(subject, predicate, object) {
                out.push(Quad {
                    graph: name.clone(),
                    triple: t.clone(),
                });
            }
        };
        match graph {
            Some(name) => {
                if let Some(g) = self.graphs.get(name) {
                    scan(name, g);
                }
            }
            None => {
                for (name, g) in &self.graphs {
                    scan(name, g);
                }
            }
        }
        out
    }

    pub fn to_nquads(&self) -> String {
        serialize_nquads(self.iter())
    }

    pub fn from_nquads(text: &str) -> Result<Self> {
        let mut store = Self::new();
        for (g, t) in parse_nquads(text)? {
            store.insert(&g, t);
        }
        Ok(store)
    }

    /// Writes `<path>` (canonical N-Quads) and its `.manifest` sibling.
    pub fn persist(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_nquads())?;
        let manifest = format!("{MANIFEST_HEADER}\ndictionary <{DICTIONARY_GRAPH}>\n");
        write_atomic(&manifest_path(path), &manifest)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mpath = manifest_path(path);
        if mpath.exists() {
            let manifest = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
            if manifest.lines().next().map(str::trim) != Some(MANIFEST_HEADER) {
                return Err(Error::Archive(format!(
                    "{} is not a supported archive manifest",
                    mpath.display()
                )));
            }
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_nquads(&text)
    }
}

pub fn manifest_path(path: &Path) -> PathBuf {
    path.with_extension("manifest")
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
