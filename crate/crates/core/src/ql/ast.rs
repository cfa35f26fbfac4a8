//! Typed syntax tree for queries.

use crate::rdf::{FilterExpr, TermPattern, TriplePattern, Variable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub distinct: bool,
    pub projection: Projection,
    pub sources: Vec<SourceClause>,
    pub pattern: GroupPattern,
    pub group_by: Vec<Variable>,
    pub order_by: Vec<OrderKey>,
    pub limit: Option<u64>,
    pub offset: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    Items(Vec<SelectItem>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectItem {
    Var(Variable),
    /// `(COUNT([DISTINCT] ?x | *) AS ?alias)`; `arg: None` counts rows.
    Count {
        distinct: bool,
        arg: Option<Variable>,
        alias: Variable,
    },
}

impl SelectItem {
    pub fn output_var(&self) -> &Variable {
        match self {
            SelectItem::Var(v) => v,
            SelectItem::Count { alias, .. } => alias,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Dataset,
    Changes,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceClause {
    pub kind: SourceKind,
    pub dataset: Option<TermPattern>,
    pub versions: VersionSelector,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum VersionSelector {
    #[default]
    Any,
    At(TermPattern),
    Before(TermPattern),
    After(TermPattern),
    /// Kept as a list so that a wrong number of terms survives parsing and
    /// is reported by the validator.
    Between(Vec<TermPattern>),
}

impl VersionSelector {
    pub fn terms(&self) -> Vec<&TermPattern> {
        match self {
            VersionSelector::Any => vec![],
            VersionSelector::At(t) | VersionSelector::Before(t) | VersionSelector::After(t) => vec![t],
            VersionSelector::Between(ts) => ts.iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderKey {
    pub var: Variable,
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupPattern {
    pub elements: Vec<Element>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    Triples(Vec<TriplePattern>),
    Filter(FilterExpr),
    Group(GroupPattern),
    Union(Vec<GroupPattern>),
    Optional(GroupPattern),
    Graph { name: TermPattern, pattern: GroupPattern },
    Record(RecordBlock),
    Change(ChangeBlock),
    Dataset(ScopeBlock),
    Changes(ScopeBlock),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordBlock {
    pub record: TermPattern,
    pub subject: TermPattern,
    pub members: Vec<RecordMember>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordMember {
    Attribute {
        predicate: TermPattern,
        object: TermPattern,
    },
    Recatt {
        attribute: TermPattern,
        predicate: TermPattern,
        object: TermPattern,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeBlock {
    pub change: TermPattern,
    pub parameters: Vec<(TermPattern, TermPattern)>,
}

/// Body of a `DATASET` or `CHANGES` block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeBlock {
    pub dataset: Option<TermPattern>,
    pub versions: VersionSelector,
    pub pattern: GroupPattern,
}

impl Query {
    pub fn source(&self, kind: SourceKind) -> Option<&SourceClause> {
        self.sources.iter().find(|s| s.kind == kind)
    }

    pub fn has_aggregates(&self) -> bool {
        matches!(&self.projection, Projection::Items(items) if items.iter().any(|i| matches!(i, SelectItem::Count { .. })))
            || !self.group_by.is_empty()
    }

    /// Variables `SELECT *` stands for: every non-reserved variable of the
    /// pattern and the source clauses, in order of first appearance.
    pub fn star_vars(&self) -> Vec<Variable> {
        let mut out = Vec::new();
        for s in &self.sources {
            push_source_vars(s.dataset.as_ref(), &s.versions, &mut out);
        }
        self.pattern.collect_vars(&mut out);
        out.retain(|v| !v.is_reserved());
        out
    }

    /// Output column names.
    pub fn output_vars(&self) -> Vec<Variable> {
        match &self.projection {
            Projection::All => self.star_vars(),
            Projection::Items(items) => items.iter().map(|i| i.output_var().clone()).collect(),
        }
    }
}

fn push(out: &mut Vec<Variable>, p: &TermPattern) {
    if let Some(v) = p.var() {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
}

fn push_source_vars(dataset: Option<&TermPattern>, versions: &VersionSelector, out: &mut Vec<Variable>) {
    if let Some(d) = dataset {
        push(out, d);
    }
    for t in versions.terms() {
        push(out, t);
    }
}

impl GroupPattern {
    /// Variables that can be bound by the pattern, filters excluded.
    pub fn collect_vars(&self, out: &mut Vec<Variable>) {
        for e in &self.elements {
            match e {
                Element::Triples(ts) => {
                    for t in ts {
                        for p in [&t.subject, &t.predicate, &t.object] {
                            push(out, p);
                        }
                    }
                }
                Element::Filter(_) => {}
                Element::Group(g) | Element::Optional(g) => g.collect_vars(out),
                Element::Union(gs) => gs.iter().for_each(|g| g.collect_vars(out)),
                Element::Graph { name, pattern } => {
                    push(out, name);
                    pattern.collect_vars(out);
                }
                Element::Record(r) => {
                    push(out, &r.record);
                    push(out, &r.subject);
                    for m in &r.members {
                        match m {
                            RecordMember::Attribute { predicate, object } => {
                                push(out, predicate);
                                push(out, object);
                            }
                            RecordMember::Recatt {
                                attribute,
                                predicate,
                                object,
                            } => {
                                push(out, attribute);
                                push(out, predicate);
                                push(out, object);
                            }
                        }
                    }
                }
                Element::Change(c) => {
                    push(out, &c.change);
                    for (p, o) in &c.parameters {
                        push(out, p);
                        push(out, o);
                    }
                }
                Element::Dataset(s) | Element::Changes(s) => {
                    push_source_vars(s.dataset.as_ref(), &s.versions, out);
                    s.pattern.collect_vars(out);
                }
            }
        }
    }

    pub fn vars(&self) -> Vec<Variable> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }
}
