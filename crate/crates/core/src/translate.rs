//! Rewriting of archive queries into plain SPARQL over the reified
//! named-graph layout.

use std::collections::HashMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::eval::engine::depends_on_scope;
use crate::eval::{apply_modifiers, resolve_scopes, Evaluator, ResultTable};
use crate::model::Archive;
use crate::ql::{
    self, ChangeBlock, Dialect, Element, GroupPattern, ParseOptions, Projection, Query, RecordBlock, RecordMember,
    SelectItem, SourceKind, VersionSelector,
};
use crate::rdf::{Graph, Term, TermPattern, Variable};
use crate::vocab::{diachron, DICTIONARY_GRAPH};

/// A translated query and what it needs from the archive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparqlText {
    pub query: String,
    /// Named graphs the query can read, dictionary included.
    pub graphs: Vec<Term>,
    /// DELTA versions whose record sets must be materialized before running.
    pub materializations: Vec<Term>,
}

/// How plain triples are rewritten at a point of the query.
#[derive(Clone)]
enum Mode {
    /// Inside a record-set graph: triples become record patterns.
    Data,
    /// Inside a change-set graph named by the variable.
    Change(String),
    /// Inside GRAPH: triples stay as they are.
    Raw,
}

struct Writer {
    out: String,
    next: usize,
}

const DIACHRON_PREFIX: &str = "diachron:";

fn d(local: &str) -> String {
    format!("{DIACHRON_PREFIX}{local}")
}

fn var(v: &Variable) -> String {
    // blank-node stand-ins get their own reserved range so they cannot clash
    // with the ones the parser mints for `[ ]`
    match v.name().strip_prefix("_b_") {
        Some(rest) => format!("?_d_b{rest}"),
        None => v.to_string(),
    }
}

fn term(t: &TermPattern) -> String {
    match t {
        TermPattern::Var(v) => var(v),
        TermPattern::Term(t) => t.to_string(),
    }
}

fn pred(t: &TermPattern) -> String {
    match t {
        TermPattern::Term(Term::Iri(i)) if &**i == crate::vocab::rdf::TYPE => "a".to_owned(),
        _ => term(t),
    }
}

impl Writer {
    fn fresh(&mut self) -> String {
        self.next += 1;
        format!("?_d_{}", self.next)
    }

    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn group(&mut self, g: &GroupPattern, mode: &Mode, depth: usize) -> Result<()> {
        self.line(depth, "{");
        self.elements(g, mode, depth + 1)?;
        self.line(depth, "}");
        Ok(())
    }

    fn elements(&mut self, g: &GroupPattern, mode: &Mode, depth: usize) -> Result<()> {
        for e in &g.elements {
            self.element(e, mode, depth)?;
        }
        Ok(())
    }

    fn element(&mut self, e: &Element, mode: &Mode, depth: usize) -> Result<()> {
        match e {
            Element::Triples(ts) => {
                for t in ts {
                    let (s, o) = (term(&t.subject), term(&t.object));
                    let text = match mode {
                        Mode::Data => format!(
                            "[ a {} ; {} {s} ; {} [ {} {} ; {} {o} ] ] .",
                            d("Record"),
                            d("subject"),
                            d("hasRecordAttribute"),
                            d("predicate"),
                            term(&t.predicate),
                            d("object")
                        ),
                        Mode::Change(_) | Mode::Raw => format!("{s} {} {o} .", pred(&t.predicate)),
                    };
                    self.line(depth, &text);
                }
            }
            Element::Filter(f) => self.line(depth, &format!("FILTER ({f})")),
            Element::Group(inner) => self.group(inner, mode, depth)?,
            Element::Optional(inner) => {
                self.line(depth, "OPTIONAL");
                self.group(inner, mode, depth)?;
            }
            Element::Union(branches) => {
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        self.line(depth, "UNION");
                    }
                    self.group(b, mode, depth)?;
                }
            }
            Element::Graph { name, pattern } => {
                self.line(depth, &format!("GRAPH {}", term(name)));
                self.group(pattern, &Mode::Raw, depth)?;
            }
            Element::Record(r) => match mode {
                Mode::Change(_) => return Err(Error::Query("RECORD cannot be translated inside a change scope".into())),
                Mode::Data | Mode::Raw => self.record(r, depth),
            },
            Element::Change(c) => match mode {
                Mode::Change(cs) => {
                    let cs = cs.clone();
                    self.change(c, &cs, depth);
                }
                Mode::Data | Mode::Raw => {
                    let cs = self.fresh();
                    self.line(depth, "{");
                    self.line(
                        depth + 1,
                        &format!("GRAPH <{DICTIONARY_GRAPH}> {{ {cs} a {} }}", d("ChangeSet")),
                    );
                    self.line(depth + 1, &format!("GRAPH {cs} {{"));
                    self.change(c, &cs, depth + 2);
                    self.line(depth + 1, "}");
                    self.line(depth, "}");
                }
            },
            Element::Dataset(block) => {
                self.data_scope(block.dataset.as_ref(), &block.versions, &block.pattern, depth)?;
            }
            Element::Changes(block) => {
                self.change_scope(block.dataset.as_ref(), &block.versions, &block.pattern, depth)?;
            }
        }
        Ok(())
    }

    fn record(&mut self, r: &RecordBlock, depth: usize) {
        let rec = term(&r.record);
        let mut parts = vec![format!("{rec} a {}", d("Record")), format!("{} {}", d("subject"), term(&r.subject))];
        let mut named = Vec::new();
        for m in &r.members {
            match m {
                RecordMember::Attribute { predicate, object } => parts.push(format!(
                    "{} [ {} {} ; {} {} ]",
                    d("hasRecordAttribute"),
                    d("predicate"),
                    term(predicate),
                    d("object"),
                    term(object)
                )),
                RecordMember::Recatt {
                    attribute,
                    predicate,
                    object,
                } => {
                    let a = term(attribute);
                    parts.push(format!("{} {a}", d("hasRecordAttribute")));
                    named.push(format!(
                        "{a} {} {} ; {} {} .",
                        d("predicate"),
                        term(predicate),
                        d("object"),
                        term(object)
                    ));
                }
            }
        }
        self.line(depth, &format!("{} .", parts.join(" ; ")));
        for n in named {
            self.line(depth, &n);
        }
    }

    fn change(&mut self, c: &ChangeBlock, cs: &str, depth: usize) {
        let ch = term(&c.change);
        self.line(depth, &format!("{cs} {} {ch} .", d("hasChange")));
        for (p, o) in &c.parameters {
            self.line(depth, &format!("{ch} {} {} .", pred(p), term(o)));
        }
    }

    /// `?a ordinal ?x . ?b ordinal ?y . FILTER (?x op ?y)` inside the dictionary.
    fn ordinal_filter(&mut self, lookup: &mut Vec<String>, left: &str, op: &str, right: &str) {
        let (x, y) = (self.fresh(), self.fresh());
        lookup.push(format!("{left} {} {x} .", d("ordinal")));
        lookup.push(format!("{right} {} {y} .", d("ordinal")));
        lookup.push(format!("FILTER ({x} {op} {y})"));
    }

    fn anchor(&mut self, lookup: &mut Vec<String>, dataset: &str, a: &TermPattern) -> String {
        let a = term(a);
        lookup.push(format!("{dataset} {} {a} .", d("hasInstantiation")));
        a
    }

    fn dataset_term(&mut self, dataset: Option<&TermPattern>) -> String {
        match dataset {
            Some(t) => term(t),
            None => self.fresh(),
        }
    }

    fn data_scope(
        &mut self,
        dataset: Option<&TermPattern>,
        sel: &VersionSelector,
        body: &GroupPattern,
        depth: usize,
    ) -> Result<()> {
        let ds = self.dataset_term(dataset);
        let version = match sel {
            VersionSelector::At(t) => term(t),
            _ => self.fresh(),
        };
        let rs = self.fresh();
        let mut lookup = vec![
            format!("{ds} {} {version} .", d("hasInstantiation")),
            format!("{version} {} {rs} .", d("hasRecordSet")),
        ];
        match sel {
            VersionSelector::Any | VersionSelector::At(_) => {}
            VersionSelector::Before(a) => {
                let a = self.anchor(&mut lookup, &ds, a);
                self.ordinal_filter(&mut lookup, &version, "<", &a);
            }
            VersionSelector::After(a) => {
                let a = self.anchor(&mut lookup, &ds, a);
                self.ordinal_filter(&mut lookup, &version, ">", &a);
            }
            VersionSelector::Between(ts) => {
                let [lo, hi] = ts.as_slice() else {
                    return Err(Error::Query("BETWEEN VERSIONS takes exactly 2 versions".into()));
                };
                let lo = self.anchor(&mut lookup, &ds, lo);
                let hi = self.anchor(&mut lookup, &ds, hi);
                self.ordinal_filter(&mut lookup, &lo, "<=", &version);
                self.ordinal_filter(&mut lookup, &version, "<=", &hi);
            }
        }
        self.scope(&lookup, &rs, body, &Mode::Data, depth)
    }

    fn change_scope(
        &mut self,
        dataset: Option<&TermPattern>,
        sel: &VersionSelector,
        body: &GroupPattern,
        depth: usize,
    ) -> Result<()> {
        let ds = self.dataset_term(dataset);
        let cs = self.fresh();
        let mut old = self.fresh();
        let mut new = self.fresh();
        let mut lookup = Vec::new();
        match sel {
            VersionSelector::Any => {}
            VersionSelector::At(_) => return Err(Error::Query("AT VERSION does not apply to change sets".into())),
            VersionSelector::Before(a) => {
                let a = self.anchor(&mut lookup, &ds, a);
                self.ordinal_filter(&mut lookup, &new, "<=", &a);
            }
            VersionSelector::After(a) => {
                let a = self.anchor(&mut lookup, &ds, a);
                self.ordinal_filter(&mut lookup, &old, ">=", &a);
            }
            VersionSelector::Between(ts) => {
                let [lo, hi] = ts.as_slice() else {
                    return Err(Error::Query("BETWEEN VERSIONS takes exactly 2 versions".into()));
                };
                match lo {
                    TermPattern::Var(v) => old = var(v),
                    TermPattern::Term(_) => {
                        let lo = self.anchor(&mut lookup, &ds, lo);
                        self.ordinal_filter(&mut lookup, &old, ">=", &lo);
                    }
                }
                match hi {
                    TermPattern::Var(v) => new = var(v),
                    TermPattern::Term(_) => {
                        let hi = self.anchor(&mut lookup, &ds, hi);
                        self.ordinal_filter(&mut lookup, &new, "<=", &hi);
                    }
                }
            }
        }
        lookup.insert(
            0,
            format!(
                "{ds} {} {cs} . {cs} a {} ; {} {old} ; {} {new} .",
                d("hasChangeSet"),
                d("ChangeSet"),
                d("oldVersion"),
                d("newVersion")
            ),
        );
        self.scope(&lookup, &cs.clone(), body, &Mode::Change(cs), depth)
    }

    fn scope(&mut self, lookup: &[String], graph: &str, body: &GroupPattern, mode: &Mode, depth: usize) -> Result<()> {
        self.line(depth, "{");
        self.line(depth + 1, &format!("GRAPH <{DICTIONARY_GRAPH}> {{"));
        for l in lookup {
            self.line(depth + 2, l);
        }
        self.line(depth + 1, "}");
        self.line(depth + 1, &format!("GRAPH {graph} {{"));
        self.elements(body, mode, depth + 2)?;
        self.line(depth + 1, "}");
        self.line(depth, "}");
        Ok(())
    }
}

fn header(query: &Query) -> String {
    let mut out = String::from("SELECT ");
    if query.distinct {
        out.push_str("DISTINCT ");
    }
    let items: Vec<String> = match &query.projection {
        Projection::All => query.star_vars().iter().map(var).collect(),
        Projection::Items(items) => items
            .iter()
            .map(|i| match i {
                SelectItem::Var(v) => var(v),
                SelectItem::Count { distinct, arg, alias } => format!(
                    "(COUNT({}{}) AS {})",
                    if *distinct { "DISTINCT " } else { "" },
                    arg.as_ref().map_or("*".to_owned(), var),
                    var(alias)
                ),
            })
            .collect(),
    };
    if items.is_empty() {
        out.push('*');
    } else {
        out.push_str(&items.join(" "));
    }
    out
}

fn trailer(query: &Query) -> String {
    let mut out = String::new();
    if !query.group_by.is_empty() {
        let vs: Vec<String> = query.group_by.iter().map(var).collect();
        let _ = writeln!(out, "GROUP BY {}", vs.join(" "));
    }
    if !query.order_by.is_empty() {
        let ks: Vec<String> = query
            .order_by
            .iter()
            .map(|k| format!("{}({})", if k.descending { "DESC" } else { "ASC" }, var(&k.var)))
            .collect();
        let _ = writeln!(out, "ORDER BY {}", ks.join(" "));
    }
    if let Some(n) = query.limit {
        let _ = writeln!(out, "LIMIT {n}");
    }
    if let Some(n) = query.offset {
        let _ = writeln!(out, "OFFSET {n}");
    }
    out
}

/// Translates a query into SPARQL text. Each scope becomes a dictionary
/// lookup followed by a GRAPH pattern over the selected record or change
/// sets.
pub fn translate(query: &Query, archive: &Archive) -> Result<SparqlText> {
    let errors: Vec<_> = ql::validate(query, Some(archive))
        .into_iter()
        .filter(|d| d.is_error())
        .collect();
    if !errors.is_empty() {
        return Err(Error::InvalidQuery(errors));
    }
    let plan = resolve_scopes(query, archive)?;

    let mut w = Writer {
        out: String::new(),
        next: 0,
    };
    w.line(0, &format!("PREFIX diachron: <{}>", diachron::NS));
    w.line(0, &header(query));
    w.line(0, "WHERE {");
    let from_data = query.source(SourceKind::Dataset);
    let root = plan.root().expect("resolved plans have a root");
    if !root.candidates.is_empty() && !depends_on_scope(&query.pattern, root.changes) {
        // nothing reads the root scope; it only has to be non-empty
        w.elements(&query.pattern, &Mode::Raw, 1)?;
    } else if let Some(fc) = query.source(SourceKind::Changes) {
        let dataset = fc.dataset.as_ref().or(from_data.and_then(|s| s.dataset.as_ref()));
        w.change_scope(dataset, &fc.versions, &query.pattern, 1)?;
    } else if let Some(fd) = from_data {
        w.data_scope(fd.dataset.as_ref(), &fd.versions, &query.pattern, 1)?;
    } else {
        w.data_scope(None, &VersionSelector::Any, &query.pattern, 1)?;
    }
    w.line(0, "}");
    w.out.push_str(&trailer(query));

    let mut graphs = vec![Term::iri_unchecked(DICTIONARY_GRAPH)];
    for s in plan.scopes.values() {
        graphs.extend(s.graphs.iter().cloned());
    }
    graphs.sort();
    graphs.dedup();
    Ok(SparqlText {
        query: w.out,
        graphs,
        materializations: plan.materializations(),
    })
}

pub fn translate_text(text: &str, archive: &Archive) -> Result<SparqlText> {
    translate(&ql::parse(text)?, archive)
}

/// Runs translated text with the internal SPARQL evaluator. Required
/// materializations are performed into a private overlay first.
pub fn evaluate_translated(st: &SparqlText, archive: &Archive) -> Result<ResultTable> {
    let options = ParseOptions {
        dialect: Dialect::Sparql,
        ..ParseOptions::default()
    };
    let query = ql::parse_with(&st.query, &options)?;
    let mut overlay: HashMap<Term, Graph> = HashMap::new();
    for v in &st.materializations {
        let info = archive.catalog().version(v)?;
        let rs = info.record_set.clone();
        overlay.insert(rs, archive.materialize_version(v)?.record_set);
    }
    let ev = Evaluator::with_overlay(archive, Default::default(), &overlay);
    apply_modifiers(ev.eval_raw(&query)?, &query)
}
