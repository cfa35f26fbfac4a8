//! Pattern evaluation over the archive.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ops::Deref;
use std::rc::Rc;
use std::sync::LazyLock;

use super::results::{apply_modifiers, ResultTable};
use super::scope::{resolve_scopes, Candidate, Path, ScopePlan};
use crate::error::{Error, Result};
use crate::model::reify::attribute_triples;
use crate::model::{partition, Archive};
use crate::ql::{self, ChangeBlock, Element, GroupPattern, Query, RecordBlock, RecordMember};
use crate::rdf::algebra::{join, left_join, union};
use crate::rdf::{eval_filter, match_bgp, Graph, Mapping, MappingSet, Term, TermPattern, TriplePattern, Variable};
use crate::vocab::{diachron, rdf};

static EMPTY: LazyLock<Graph> = LazyLock::new(Graph::new);

/// Hidden variables of expanded RECORD blocks; dropped right after matching.
const HIDDEN: &str = "_d_h";

#[derive(Clone)]
enum GraphRef<'a> {
    Borrowed(&'a Graph),
    Shared(Rc<Graph>),
}

impl Deref for GraphRef<'_> {
    type Target = Graph;

    fn deref(&self) -> &Graph {
        match self {
            GraphRef::Borrowed(g) => g,
            GraphRef::Shared(g) => g,
        }
    }
}

/// What plain triple patterns match at a point of the query.
#[derive(Clone)]
enum Active<'a> {
    /// A named graph as is (inside GRAPH, or any plain SPARQL query).
    Raw(GraphRef<'a>),
    /// The de-reified data of one version.
    Data(Term),
    /// One change-set graph.
    Change(Term),
}

/// Evaluates queries against one archive snapshot. Versions rebuilt from
/// deltas are cached for the lifetime of the evaluator.
pub struct Evaluator<'a> {
    archive: &'a Archive,
    plan: ScopePlan,
    /// Extra named graphs visible to GRAPH patterns.
    overlay: &'a HashMap<Term, Graph>,
    data: RefCell<HashMap<Term, GraphRef<'a>>>,
    reified: RefCell<HashMap<Term, GraphRef<'a>>>,
}

static NO_OVERLAY: LazyLock<HashMap<Term, Graph>> = LazyLock::new(HashMap::new);

impl<'a> Evaluator<'a> {
    pub fn new(archive: &'a Archive, plan: ScopePlan) -> Self {
        Self::with_overlay(archive, plan, &NO_OVERLAY)
    }

    pub fn with_overlay(archive: &'a Archive, plan: ScopePlan, overlay: &'a HashMap<Term, Graph>) -> Self {
        Self {
            archive,
            plan,
            overlay,
            data: RefCell::default(),
            reified: RefCell::default(),
        }
    }

    pub fn plan(&self) -> &ScopePlan {
        &self.plan
    }

    /// Evaluates the whole WHERE clause: once per root candidate, unioned.
    pub fn eval_root(&self, query: &Query) -> Result<MappingSet> {
        let root = self
            .plan
            .root()
            .ok_or_else(|| Error::Query("scope plan has no root".into()))?;
        self.eval_scope(&query.pattern, &[], &root.candidates.clone(), root.changes)
    }

    /// Evaluates a plain SPARQL query: patterns outside GRAPH match an empty
    /// default graph.
    pub fn eval_raw(&self, query: &Query) -> Result<MappingSet> {
        self.eval_group(&query.pattern, &[], &Active::Raw(GraphRef::Borrowed(&EMPTY)))
    }

    fn data_graph(&self, v: &Term) -> Result<GraphRef<'a>> {
        if let Some(g) = self.data.borrow().get(v) {
            return Ok(g.clone());
        }
        let info = self.archive.catalog().version(v)?;
        let g = if info.is_materialized() {
            let rs = self.archive.store().graph(&info.record_set).unwrap_or(&EMPTY);
            attribute_triples(rs)?.into_keys().collect()
        } else {
            partition(&self.archive.version_graph(v)?).0
        };
        let g = GraphRef::Shared(Rc::new(g));
        self.data.borrow_mut().insert(v.clone(), g.clone());
        Ok(g)
    }

    fn record_graph(&self, v: &Term) -> Result<GraphRef<'a>> {
        if let Some(g) = self.reified.borrow().get(v) {
            return Ok(g.clone());
        }
        let info = self.archive.catalog().version(v)?;
        let g = if info.is_materialized() {
            GraphRef::Borrowed(self.archive.store().graph(&info.record_set).unwrap_or(&EMPTY))
        } else {
            GraphRef::Shared(Rc::new(self.archive.materialize_version(v)?.record_set))
        };
        self.reified.borrow_mut().insert(v.clone(), g.clone());
        Ok(g)
    }

    fn change_graph(&self, cs: &Term) -> GraphRef<'a> {
        GraphRef::Borrowed(self.archive.store().graph(cs).unwrap_or(&EMPTY))
    }

    fn named_graph(&self, name: &Term) -> GraphRef<'a> {
        match self.overlay.get(name) {
            Some(g) => GraphRef::Borrowed(g),
            None => GraphRef::Borrowed(self.archive.store().graph(name).unwrap_or(&EMPTY)),
        }
    }

    /// Union over candidates of the body evaluated against each, joined
    /// with the candidate's bindings.
    fn eval_scope(&self, body: &GroupPattern, path: &[u32], candidates: &[Candidate], changes: bool) -> Result<MappingSet> {
        if candidates.is_empty() {
            return Ok(MappingSet::new());
        }
        let mut per_target: HashMap<&Term, MappingSet> = HashMap::new();
        let shared = if depends_on_scope(body, changes) {
            None
        } else {
            let any = &candidates[0].target;
            Some(self.eval_group(body, path, &self.active_for(any, changes))?)
        };
        let mut out = MappingSet::new();
        for c in candidates {
            if !per_target.contains_key(&c.target) {
                let r = match &shared {
                    Some(r) => r.clone(),
                    None => self.eval_group(body, path, &self.active_for(&c.target, changes))?,
                };
                per_target.insert(&c.target, r);
            }
            let r = &per_target[&c.target];
            for m in r {
                if let Some(merged) = m.merge(&c.bindings) {
                    out.insert(merged);
                }
            }
        }
        Ok(out)
    }

    fn active_for(&self, target: &Term, changes: bool) -> Active<'a> {
        if changes {
            Active::Change(target.clone())
        } else {
            Active::Data(target.clone())
        }
    }

    fn eval_group(&self, g: &GroupPattern, path: &[u32], active: &Active<'a>) -> Result<MappingSet> {
        let mut acc = MappingSet::unit();
        let mut filters = Vec::new();
        let mut child: Path = path.to_vec();
        for (i, e) in g.elements.iter().enumerate() {
            if acc.is_empty() {
                break;
            }
            child.push(i as u32);
            match e {
                Element::Filter(f) => filters.push(f),
                Element::Optional(inner) => {
                    let r = self.eval_group(inner, &child, active)?;
                    acc = left_join(&acc, &r);
                }
                _ => {
                    acc = self.eval_element(e, &child, active, acc)?;
                }
            }
            child.pop();
        }
        if !filters.is_empty() {
            acc.retain(|m| filters.iter().all(|f| eval_filter(f, m)));
        }
        Ok(acc)
    }

    /// Evaluates `e` and joins it into `acc`.
    fn eval_element(&self, e: &Element, path: &[u32], active: &Active<'a>, acc: MappingSet) -> Result<MappingSet> {
        let (graph, patterns, hidden) = match e {
            Element::Triples(ts) => {
                let g = match active {
                    Active::Raw(g) => g.clone(),
                    Active::Data(v) => self.data_graph(v)?,
                    Active::Change(cs) => self.change_graph(cs),
                };
                (g, ts.clone(), false)
            }
            Element::Record(r) => {
                let g = match active {
                    Active::Raw(g) => g.clone(),
                    Active::Data(v) => self.record_graph(v)?,
                    Active::Change(_) => return Err(Error::Query("RECORD inside a change scope".into())),
                };
                (g, record_patterns(r), true)
            }
            Element::Change(c) => match active {
                Active::Change(cs) => (self.change_graph(cs), change_patterns(c, &TermPattern::Term(cs.clone())), false),
                _ => {
                    let scope = self
                        .plan
                        .scope(path)
                        .ok_or_else(|| Error::Query("CHANGE block without a resolved scope".into()))?;
                    let mut r = MappingSet::new();
                    for cand in &scope.candidates {
                        let pats = change_patterns(c, &TermPattern::Term(cand.target.clone()));
                        for m in match_bgp(&self.change_graph(&cand.target), &pats, &cand.bindings) {
                            r.insert(m);
                        }
                    }
                    return Ok(join(&acc, &r));
                }
            },
            Element::Group(inner) => return Ok(join(&acc, &self.eval_group(inner, path, active)?)),
            Element::Union(branches) => {
                let mut r = MappingSet::new();
                let mut p = path.to_vec();
                for (b, inner) in branches.iter().enumerate() {
                    p.push(b as u32);
                    r = union(&r, &self.eval_group(inner, &p, active)?);
                    p.pop();
                }
                return Ok(join(&acc, &r));
            }
            Element::Graph { name, pattern } => {
                let names: Vec<Term> = match name {
                    TermPattern::Term(t) => vec![t.clone()],
                    // names already fixed by the accumulator are the only ones
                    // that can survive the join
                    TermPattern::Var(v) if !acc.is_empty() && acc.iter().all(|m| m.contains(v)) => {
                        let mut names: Vec<Term> = acc.iter().filter_map(|m| m.get(v).cloned()).collect();
                        names.sort();
                        names.dedup();
                        names
                    }
                    TermPattern::Var(_) => {
                        let mut all = self.archive.store().list_graphs();
                        all.extend(self.overlay.keys().cloned());
                        all.sort();
                        all.dedup();
                        all
                    }
                };
                let mut r = MappingSet::new();
                for n in names {
                    let inner = self.eval_group(pattern, path, &Active::Raw(self.named_graph(&n)))?;
                    for m in inner {
                        match name {
                            TermPattern::Var(v) => {
                                let mut m = m;
                                if m.bind(v.clone(), n.clone()) {
                                    r.insert(m);
                                }
                            }
                            TermPattern::Term(_) => {
                                r.insert(m);
                            }
                        }
                    }
                }
                return Ok(join(&acc, &r));
            }
            Element::Dataset(block) | Element::Changes(block) => {
                let scope = self
                    .plan
                    .scope(path)
                    .ok_or_else(|| Error::Query("scope block without a resolved scope".into()))?;
                let r = self.eval_scope(&block.pattern, path, &scope.candidates, scope.changes)?;
                return Ok(join(&acc, &r));
            }
            Element::Filter(_) | Element::Optional(_) => unreachable!("handled by eval_group"),
        };
        let mut r = if acc.len() <= 16 {
            // seeding a BGP with each mapping is the same as joining with it
            let mut out = MappingSet::new();
            for seed in &acc {
                for m in match_bgp(&graph, &patterns, seed) {
                    out.insert(m);
                }
            }
            out
        } else {
            join(&acc, &match_bgp(&graph, &patterns, &Mapping::new()))
        };
        if hidden {
            r = r.map(|mut m| {
                m.retain(|v| !v.name().starts_with(HIDDEN));
                m
            });
        }
        Ok(r)
    }
}

/// Whether a scope body reads anything that depends on the scope's
/// candidate, as opposed to only nested independent scopes.
pub(crate) fn depends_on_scope(g: &GroupPattern, changes: bool) -> bool {
    g.elements.iter().any(|e| match e {
        Element::Triples(_) | Element::Record(_) => true,
        Element::Change(_) => changes,
        Element::Group(inner) | Element::Optional(inner) => depends_on_scope(inner, changes),
        Element::Union(branches) => branches.iter().any(|b| depends_on_scope(b, changes)),
        Element::Filter(_) | Element::Graph { .. } | Element::Dataset(_) | Element::Changes(_) => false,
    })
}

fn iri(s: &str) -> TermPattern {
    TermPattern::Term(Term::iri_unchecked(s))
}

fn tp(s: TermPattern, p: TermPattern, o: TermPattern) -> TriplePattern {
    TriplePattern {
        subject: s,
        predicate: p,
        object: o,
    }
}

/// The reified shape a RECORD block stands for.
pub fn record_patterns(r: &RecordBlock) -> Vec<TriplePattern> {
    let rec = r.record.clone();
    let mut out = vec![
        tp(rec.clone(), iri(rdf::TYPE), iri(diachron::RECORD)),
        tp(rec.clone(), iri(diachron::SUBJECT), r.subject.clone()),
    ];
    for (i, m) in r.members.iter().enumerate() {
        let (attr, p, o) = match m {
            RecordMember::Attribute { predicate, object } => (
                TermPattern::Var(Variable::internal(format!("{HIDDEN}{i}"))),
                predicate,
                object,
            ),
            RecordMember::Recatt {
                attribute,
                predicate,
                object,
            } => (attribute.clone(), predicate, object),
        };
        out.push(tp(rec.clone(), iri(diachron::HAS_RECORD_ATTRIBUTE), attr.clone()));
        out.push(tp(attr.clone(), iri(diachron::PREDICATE), p.clone()));
        out.push(tp(attr, iri(diachron::OBJECT), o.clone()));
    }
    out
}

/// `cs hasChange ?c . ?c p o ...` for one change set.
pub fn change_patterns(c: &ChangeBlock, cs: &TermPattern) -> Vec<TriplePattern> {
    let mut out = vec![tp(cs.clone(), iri(diachron::HAS_CHANGE), c.change.clone())];
    for (p, o) in &c.parameters {
        out.push(tp(c.change.clone(), p.clone(), o.clone()));
    }
    out
}

fn check_valid(query: &Query, archive: &Archive) -> Result<()> {
    let errors: Vec<_> = ql::validate(query, Some(archive))
        .into_iter()
        .filter(|d| d.is_error())
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidQuery(errors))
    }
}

fn mentions_graph(g: &GroupPattern) -> bool {
    g.elements.iter().any(|e| match e {
        Element::Graph { .. } => true,
        Element::Group(inner) | Element::Optional(inner) => mentions_graph(inner),
        Element::Union(branches) => branches.iter().any(mentions_graph),
        Element::Dataset(b) | Element::Changes(b) => mentions_graph(&b.pattern),
        _ => false,
    })
}

/// Record sets of DELTA versions in the plan, rebuilt so that GRAPH patterns
/// see them while the query runs.
pub fn temporary_graphs(query: &Query, archive: &Archive, plan: &ScopePlan) -> Result<HashMap<Term, Graph>> {
    let mut out = HashMap::new();
    if !mentions_graph(&query.pattern) {
        return Ok(out);
    }
    for v in plan.materializations() {
        let rs = archive.catalog().version(&v)?.record_set.clone();
        out.insert(rs, archive.materialize_version(&v)?.record_set);
    }
    Ok(out)
}

/// Solutions of the WHERE clause, before solution modifiers.
pub fn eval_pattern(query: &Query, archive: &Archive, seed: &Mapping) -> Result<MappingSet> {
    check_valid(query, archive)?;
    let plan = resolve_scopes(query, archive)?;
    let overlay = temporary_graphs(query, archive, &plan)?;
    let ms = Evaluator::with_overlay(archive, plan, &overlay).eval_root(query)?;
    Ok(join(&MappingSet::single(seed.clone()), &ms))
}

/// Validates, resolves scopes, evaluates and applies solution modifiers.
pub fn eval(query: &Query, archive: &Archive) -> Result<ResultTable> {
    check_valid(query, archive)?;
    let plan = resolve_scopes(query, archive)?;
    let overlay = temporary_graphs(query, archive, &plan)?;
    let ms = Evaluator::with_overlay(archive, plan, &overlay).eval_root(query)?;
    apply_modifiers(ms, query)
}

/// Parses and evaluates query text.
pub fn eval_text(text: &str, archive: &Archive) -> Result<ResultTable> {
    eval(&ql::parse(text)?, archive)
}

/// Runs the description query of a stored diachronic resource.
pub fn materialize_resource(archive: &Archive, resource: &Term) -> Result<ResultTable> {
    let info = archive.resource(resource)?;
    eval_text(&info.query, archive)
}
