//! Scope resolution: which versions or change sets each part of a query
//! ranges over.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Catalog, DatasetInfo};
use crate::model::Archive;
use crate::ql::{Element, GroupPattern, Query, RecordMember, SourceKind, VersionSelector};
use crate::rdf::{Mapping, Term, TermPattern};

/// Path of an element in the query tree: child indices from the root
/// group. Union branches add the branch index before the element index.
pub type Path = Vec<u32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScopeKind {
    Archive,
    Dataset,
    Version,
    ChangeSet,
    Record,
    Recatt,
}

/// One thing a scope body is evaluated against, plus the variable bindings
/// that choosing it implies (dataset and version variables).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// A version IRI for data scopes, a change-set IRI for change scopes.
    pub target: Term,
    pub bindings: Mapping,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scope {
    pub kind: ScopeKind,
    /// True when candidates are change sets.
    pub changes: bool,
    pub candidates: Vec<Candidate>,
    /// Named graphs read by the scope: record and schema sets, or change sets.
    pub graphs: Vec<Term>,
    /// Candidate versions with no stored graphs, rebuilt on demand.
    pub materialize: Vec<Term>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScopePlan {
    pub scopes: BTreeMap<Path, Scope>,
    /// Lowest wrapping scope of every element, and the entity type it matches.
    pub assignments: BTreeMap<Path, (Path, ScopeKind)>,
}

impl ScopePlan {
    pub fn root(&self) -> Option<&Scope> {
        self.scopes.get(&Vec::new())
    }

    pub fn scope(&self, path: &[u32]) -> Option<&Scope> {
        self.scopes.get(path)
    }

    /// Every version that must be rebuilt from deltas, once.
    pub fn materializations(&self) -> Vec<Term> {
        let mut out: Vec<Term> = self.scopes.values().flat_map(|s| s.materialize.iter().cloned()).collect();
        out.sort();
        out.dedup();
        out
    }
}

pub fn resolve_scopes(query: &Query, archive: &Archive) -> Result<ScopePlan> {
    let catalog = archive.catalog();
    let from_data = query.source(SourceKind::Dataset);
    let from_changes = query.source(SourceKind::Changes);
    let root = if let Some(fc) = from_changes {
        let dataset = fc.dataset.as_ref().or(from_data.and_then(|d| d.dataset.as_ref()));
        if let Some(TermPattern::Term(d)) = dataset {
            catalog.dataset(d)?;
        }
        check_from_versions(catalog, &fc.versions)?;
        let candidates = change_candidates(catalog, dataset, &fc.versions)?;
        scope(archive, ScopeKind::ChangeSet, true, candidates)
    } else if let Some(fd) = from_data {
        if let Some(TermPattern::Term(d)) = &fd.dataset {
            catalog.dataset(d)?;
        }
        check_from_versions(catalog, &fd.versions)?;
        let candidates = data_candidates(catalog, fd.dataset.as_ref(), &fd.versions)?;
        if let (VersionSelector::At(TermPattern::Term(v)), true) = (&fd.versions, candidates.is_empty()) {
            return Err(Error::UnknownVersion(format!("{v} is not a version of the FROM DATASET dataset")));
        }
        let kind = match fd.versions {
            VersionSelector::At(_) => ScopeKind::Version,
            _ => ScopeKind::Dataset,
        };
        scope(archive, kind, false, candidates)
    } else {
        scope(archive, ScopeKind::Archive, false, data_candidates(catalog, None, &VersionSelector::Any)?)
    };
    let mut plan = ScopePlan::default();
    let root_changes = root.changes;
    let root_kind = root.kind;
    plan.scopes.insert(Vec::new(), root);
    walk(archive, &query.pattern, &mut Vec::new(), &Vec::new(), root_kind, root_changes, &mut plan)?;
    Ok(plan)
}

fn check_from_versions(catalog: &Catalog, sel: &VersionSelector) -> Result<()> {
    for t in sel.terms() {
        match t {
            TermPattern::Term(v) => {
                catalog.version(v)?;
            }
            TermPattern::Var(v) => {
                return Err(Error::Query(format!("variable {v} is not allowed in a FROM clause")));
            }
        }
    }
    Ok(())
}

fn walk(
    archive: &Archive,
    g: &GroupPattern,
    path: &mut Path,
    scope_path: &Path,
    scope_kind: ScopeKind,
    in_changes: bool,
    plan: &mut ScopePlan,
) -> Result<()> {
    let catalog = archive.catalog();
    for (i, e) in g.elements.iter().enumerate() {
        path.push(i as u32);
        let here = path.clone();
        match e {
            Element::Triples(_) | Element::Filter(_) => {
                plan.assignments.insert(here, (scope_path.clone(), scope_kind));
            }
            Element::Record(r) => {
                let kind = if r.members.iter().any(|m| matches!(m, RecordMember::Recatt { .. })) {
                    ScopeKind::Recatt
                } else {
                    ScopeKind::Record
                };
                plan.assignments.insert(here, (scope_path.clone(), kind));
            }
            Element::Change(_) => {
                if in_changes {
                    plan.assignments.insert(here, (scope_path.clone(), ScopeKind::ChangeSet));
                } else {
                    // a CHANGE outside any change scope ranges over every change set
                    let candidates = change_candidates(catalog, None, &VersionSelector::Any)?;
                    plan.scopes.insert(here.clone(), scope(archive, ScopeKind::ChangeSet, true, candidates));
                    plan.assignments.insert(here.clone(), (here, ScopeKind::ChangeSet));
                }
            }
            Element::Group(inner) | Element::Optional(inner) => {
                plan.assignments.insert(here, (scope_path.clone(), scope_kind));
                walk(archive, inner, path, scope_path, scope_kind, in_changes, plan)?;
            }
            Element::Union(branches) => {
                plan.assignments.insert(here, (scope_path.clone(), scope_kind));
                for (b, inner) in branches.iter().enumerate() {
                    path.push(b as u32);
                    walk(archive, inner, path, scope_path, scope_kind, in_changes, plan)?;
                    path.pop();
                }
            }
            Element::Graph { pattern, .. } => {
                plan.assignments.insert(here, (scope_path.clone(), ScopeKind::Archive));
                walk(archive, pattern, path, scope_path, ScopeKind::Archive, false, plan)?;
            }
            Element::Dataset(block) => {
                let candidates = data_candidates(catalog, block.dataset.as_ref(), &block.versions)?;
                let kind = match block.versions {
                    VersionSelector::Any => ScopeKind::Dataset,
                    _ => ScopeKind::Version,
                };
                plan.scopes.insert(here.clone(), scope(archive, kind, false, candidates));
                plan.assignments.insert(here.clone(), (here.clone(), kind));
                walk(archive, &block.pattern, path, &here, kind, false, plan)?;
            }
            Element::Changes(block) => {
                let candidates = change_candidates(catalog, block.dataset.as_ref(), &block.versions)?;
                plan.scopes.insert(here.clone(), scope(archive, ScopeKind::ChangeSet, true, candidates));
                plan.assignments.insert(here.clone(), (here.clone(), ScopeKind::ChangeSet));
                walk(archive, &block.pattern, path, &here, ScopeKind::ChangeSet, true, plan)?;
            }
        }
        path.pop();
    }
    Ok(())
}

fn scope(archive: &Archive, kind: ScopeKind, changes: bool, candidates: Vec<Candidate>) -> Scope {
    let catalog = archive.catalog();
    let mut graphs = Vec::new();
    let mut materialize = Vec::new();
    for c in &candidates {
        if changes {
            graphs.push(c.target.clone());
            continue;
        }
        let info = &catalog.versions[&c.target];
        if info.is_materialized() {
            graphs.push(info.record_set.clone());
            graphs.push(info.schema_set.clone());
        } else {
            materialize.push(c.target.clone());
        }
    }
    graphs.sort();
    graphs.dedup();
    materialize.sort();
    materialize.dedup();
    Scope {
        kind,
        changes,
        candidates,
        graphs,
        materialize,
    }
}

/// Datasets a pattern position ranges over, with the binding each implies.
fn datasets<'c>(catalog: &'c Catalog, dataset: Option<&TermPattern>) -> Vec<(&'c DatasetInfo, Mapping)> {
    match dataset {
        None => catalog.datasets.values().map(|d| (d, Mapping::new())).collect(),
        Some(TermPattern::Term(t)) => catalog.datasets.get(t).map(|d| (d, Mapping::new())).into_iter().collect(),
        Some(TermPattern::Var(v)) => catalog
            .datasets
            .values()
            .map(|d| (d, Mapping::new().with(v.clone(), d.iri.clone())))
            .collect(),
    }
}

/// Possible values of a version anchor within one dataset: the ordinal and
/// the binding implied.
fn anchors(catalog: &Catalog, d: &DatasetInfo, anchor: &TermPattern, base: &Mapping) -> Vec<(u64, Mapping)> {
    match anchor {
        TermPattern::Term(t) => {
            if d.versions.contains(t) {
                vec![(catalog.versions[t].ordinal, base.clone())]
            } else {
                vec![]
            }
        }
        TermPattern::Var(v) => d
            .versions
            .iter()
            .filter_map(|w| {
                let mut m = base.clone();
                m.bind(v.clone(), w.clone()).then(|| (catalog.versions[w].ordinal, m))
            })
            .collect(),
    }
}

fn between_pair(catalog: &Catalog, ts: &[TermPattern]) -> Result<(TermPattern, TermPattern)> {
    let [a, b] = ts else {
        return Err(Error::Query(format!(
            "BETWEEN VERSIONS takes exactly 2 versions, got {}",
            ts.len()
        )));
    };
    if let (TermPattern::Term(x), TermPattern::Term(y)) = (a, b) {
        if let (Ok(vx), Ok(vy)) = (catalog.version(x), catalog.version(y)) {
            if vx.dataset == vy.dataset && vx.ordinal > vy.ordinal {
                return Err(Error::Query(format!(
                    "BETWEEN VERSIONS endpoints in wrong order: {x} comes after {y}"
                )));
            }
        }
    }
    Ok((a.clone(), b.clone()))
}

/// Versions a data scope ranges over.
pub fn data_candidates(
    catalog: &Catalog,
    dataset: Option<&TermPattern>,
    sel: &VersionSelector,
) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    let between = match sel {
        VersionSelector::Between(ts) => Some(between_pair(catalog, ts)?),
        _ => None,
    };
    for (d, base) in datasets(catalog, dataset) {
        let ord = |w: &Term| catalog.versions[w].ordinal;
        let mut push = |w: &Term, m: Mapping| {
            out.push(Candidate {
                target: w.clone(),
                bindings: m,
            })
        };
        match sel {
            VersionSelector::Any => d.versions.iter().for_each(|w| push(w, base.clone())),
            VersionSelector::At(TermPattern::Term(t)) => {
                if d.versions.contains(t) {
                    push(t, base.clone());
                }
            }
            VersionSelector::At(TermPattern::Var(v)) => {
                for w in &d.versions {
                    let mut m = base.clone();
                    if m.bind(v.clone(), w.clone()) {
                        push(w, m);
                    }
                }
            }
            VersionSelector::Before(a) | VersionSelector::After(a) => {
                let before = matches!(sel, VersionSelector::Before(_));
                for (k, m) in anchors(catalog, d, a, &base) {
                    for w in &d.versions {
                        if (before && ord(w) < k) || (!before && ord(w) > k) {
                            push(w, m.clone());
                        }
                    }
                }
            }
            VersionSelector::Between(_) => {
                let (a, b) = between.as_ref().expect("checked above");
                for (lo, ma) in anchors(catalog, d, a, &base) {
                    for (hi, mb) in anchors(catalog, d, b, &ma) {
                        for w in &d.versions {
                            if lo <= ord(w) && ord(w) <= hi {
                                push(w, mb.clone());
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Change sets a change scope ranges over.
pub fn change_candidates(
    catalog: &Catalog,
    dataset: Option<&TermPattern>,
    sel: &VersionSelector,
) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    let between = match sel {
        VersionSelector::At(_) => {
            return Err(Error::Query("AT VERSION does not apply to change sets".into()));
        }
        VersionSelector::Between(ts) => Some(between_pair(catalog, ts)?),
        _ => None,
    };
    for (d, base) in datasets(catalog, dataset) {
        for cs in &d.change_sets {
            let info = &catalog.change_sets[cs];
            let old = catalog.versions[&info.old_version].ordinal;
            let new = catalog.versions[&info.new_version].ordinal;
            let mut push = |m: Mapping| {
                out.push(Candidate {
                    target: cs.clone(),
                    bindings: m,
                })
            };
            match sel {
                VersionSelector::Any => push(base.clone()),
                VersionSelector::At(_) => unreachable!(),
                VersionSelector::Before(a) => {
                    for (k, m) in anchors(catalog, d, a, &base) {
                        if new <= k {
                            push(m);
                        }
                    }
                }
                VersionSelector::After(a) => {
                    for (k, m) in anchors(catalog, d, a, &base) {
                        if old >= k {
                            push(m);
                        }
                    }
                }
                VersionSelector::Between(_) => {
                    let (a, b) = between.as_ref().expect("checked above");
                    let mut m = base.clone();
                    let lower = match a {
                        TermPattern::Var(v) => m.bind(v.clone(), info.old_version.clone()),
                        TermPattern::Term(t) => d.versions.contains(t) && old >= catalog.versions[t].ordinal,
                    };
                    let upper = match b {
                        TermPattern::Var(v) => m.bind(v.clone(), info.new_version.clone()),
                        TermPattern::Term(t) => d.versions.contains(t) && new <= catalog.versions[t].ordinal,
                    };
                    if lower && upper {
                        push(m);
                    }
                }
            }
        }
    }
    Ok(out)
}
