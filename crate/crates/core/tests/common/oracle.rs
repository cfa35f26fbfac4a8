//! Random archives and random queries, with a brute-force evaluator that
//! works from the input graphs instead of the archive.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use diachron::changes::{build_change_set, change_set_graph};
use diachron::model::{mint, reify, Archive, IngestOptions, StoragePolicy};
use diachron::rdf::{Graph, Literal, Term, Triple};
use diachron::vocab::{diachron as dia, rdf, rdfs};
use rand::seq::SliceRandom;
use rand::Rng;

const EX: &str = "http://example.org/";

fn ex(local: &str) -> Term {
    Term::iri_unchecked(format!("{EX}{local}"))
}

pub struct DatasetTruth {
    pub iri: Term,
    pub versions: Vec<(Term, Graph)>,
}

/// What was loaded, version by version.
pub struct Truth {
    pub datasets: Vec<DatasetTruth>,
}

fn random_triple(rng: &mut impl Rng) -> Triple {
    let s = ex(&format!("s{}", rng.gen_range(0..6)));
    let (p, o) = match rng.gen_range(0..4) {
        0 => (ex("p0"), ex(&format!("s{}", rng.gen_range(0..6)))),
        1 => {
            let o = if rng.gen_bool(0.7) {
                Term::literal(Literal::integer(rng.gen_range(1..5)))
            } else {
                Term::string("x1")
            };
            (ex("p1"), o)
        }
        2 => (Term::iri_unchecked(rdfs::LABEL), Term::string(*["a", "A", "b"].choose(rng).unwrap())),
        _ => (Term::iri_unchecked(rdf::TYPE), ex(&format!("C{}", rng.gen_range(0..2)))),
    };
    Triple::new(s, p, o).unwrap()
}

pub fn random_graph(rng: &mut impl Rng, max: usize) -> Graph {
    let n = rng.gen_range(0..=max);
    (0..n).map(|_| random_triple(rng)).collect()
}

/// The next version: some triples dropped, some added, labels recased.
pub fn evolve(rng: &mut impl Rng, g: &Graph, max: usize) -> Graph {
    let mut out = Graph::new();
    for t in g {
        if rng.gen_bool(0.2) {
            continue;
        }
        if t.predicate.as_iri() == Some(rdfs::LABEL) && rng.gen_bool(0.3) {
            let lex = t.object.as_literal().unwrap().lexical();
            let flipped = if lex == "a" { "A" } else if lex == "A" { "a" } else { "B" };
            out.insert(Triple::new(t.subject.clone(), t.predicate.clone(), Term::string(flipped)).unwrap());
            continue;
        }
        out.insert(t.clone());
    }
    for _ in 0..rng.gen_range(0..8) {
        if out.len() >= max {
            break;
        }
        out.insert(random_triple(rng));
    }
    out
}

pub fn random_truth(rng: &mut impl Rng, max_datasets: usize, max_versions: usize, max_triples: usize) -> Truth {
    let n = rng.gen_range(1..=max_datasets);
    let datasets = (0..n)
        .map(|d| {
            let iri = ex(&format!("d{d}"));
            let mut versions = Vec::new();
            let mut g = random_graph(rng, max_triples);
            for i in 0..rng.gen_range(1..=max_versions) {
                if i > 0 {
                    g = evolve(rng, &g, max_triples);
                }
                versions.push((ex(&format!("d{d}/v{i}")), g.clone()));
            }
            DatasetTruth { iri, versions }
        })
        .collect();
    Truth { datasets }
}

pub fn build_archive(truth: &Truth, policy: impl Fn(usize, usize) -> StoragePolicy) -> Archive {
    let mut a = Archive::new();
    for (d, ds) in truth.datasets.iter().enumerate() {
        for (i, (v, g)) in ds.versions.iter().enumerate() {
            a.ingest_version(
                &ds.iri,
                g,
                IngestOptions {
                    version: Some(v.clone()),
                    date: NaiveDate::from_ymd_opt(2020, 1, 1 + i as u32),
                    policy: policy(d, i),
                },
            )
            .unwrap();
        }
    }
    a
}

// ---- queries

#[derive(Debug, Clone)]
pub enum Tp {
    Var(&'static str),
    Const(Term),
}

impl Tp {
    fn text(&self) -> String {
        match self {
            Tp::Var(v) => format!("?{v}"),
            Tp::Const(t) => t.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Filter {
    NotIri(&'static str, Term),
    IsIri(&'static str, Term),
    Contains(&'static str, &'static str),
    Bound(&'static str),
    Unbound(&'static str),
}

impl Filter {
    fn text(&self) -> String {
        match self {
            Filter::NotIri(v, t) => format!("FILTER (?{v} != {t})"),
            Filter::IsIri(v, t) => format!("FILTER (?{v} = {t})"),
            Filter::Contains(v, s) => format!("FILTER (regex(str(?{v}), \"{s}\"))"),
            Filter::Bound(v) => format!("FILTER (bound(?{v}))"),
            Filter::Unbound(v) => format!("FILTER (!bound(?{v}))"),
        }
    }

    fn holds(&self, m: &Row) -> bool {
        let get = |v: &str| m.get(v);
        match self {
            Filter::NotIri(v, t) => get(v).is_some_and(|x| x != t),
            Filter::IsIri(v, t) => get(v) == Some(t),
            Filter::Contains(v, s) => get(v).is_some_and(|x| {
                let text = match x {
                    Term::Iri(i) => i.to_string(),
                    Term::Literal(l) => l.lexical().to_owned(),
                    Term::Blank(_) => return false,
                };
                text.contains(s)
            }),
            Filter::Bound(v) => get(v).is_some(),
            Filter::Unbound(v) => get(v).is_none(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Item {
    Triple(Tp, Tp, Tp),
    Record { subject: Tp, attrs: Vec<(Tp, Tp)> },
    Recatt { subject: Tp, p: Tp, o: Tp },
    Optional(Vec<(Tp, Tp, Tp)>),
    Change(Vec<(Tp, Tp)>),
}

#[derive(Debug, Clone)]
pub struct Body {
    pub items: Vec<Item>,
    pub filter: Option<Filter>,
}

#[derive(Debug, Clone)]
pub enum VRef {
    Iri(Term),
    Var(&'static str),
}

impl VRef {
    fn text(&self) -> String {
        match self {
            VRef::Iri(t) => t.to_string(),
            VRef::Var(v) => format!("?{v}"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Sel {
    Any,
    At(VRef),
    Before(Term),
    After(Term),
    Between(VRef, VRef),
}

impl Sel {
    fn text(&self) -> String {
        match self {
            Sel::Any => String::new(),
            Sel::At(v) => format!(" AT VERSION {}", v.text()),
            Sel::Before(t) => format!(" BEFORE VERSION {t}"),
            Sel::After(t) => format!(" AFTER VERSION {t}"),
            Sel::Between(a, b) => format!(" BETWEEN VERSIONS {}, {}", a.text(), b.text()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Block {
    Data { dataset: Option<VRef>, sel: Sel, body: Body },
    Changes { dataset: Option<VRef>, sel: Sel, body: Body },
}

#[derive(Debug, Clone)]
pub enum Shape {
    /// Body directly under WHERE, over every version.
    Plain(Body),
    From { dataset: Term, at: Option<Term>, body: Body },
    Blocks(Vec<Block>),
    /// A CHANGE element with no enclosing change scope.
    RootChange(Body),
}

#[derive(Debug, Clone)]
pub struct RandomQuery {
    pub shape: Shape,
    pub vars: Vec<&'static str>,
}

const BODY_VARS: &[&str] = &["s", "p", "o", "x"];

fn pick_var(rng: &mut impl Rng) -> &'static str {
    BODY_VARS.choose(rng).unwrap()
}

fn subject_tp(rng: &mut impl Rng) -> Tp {
    if rng.gen_bool(0.8) {
        Tp::Var("s")
    } else {
        Tp::Const(ex(&format!("s{}", rng.gen_range(0..6))))
    }
}

fn predicate_tp(rng: &mut impl Rng) -> Tp {
    match rng.gen_range(0..6) {
        0 | 1 => Tp::Var(if rng.gen_bool(0.5) { "p" } else { "x" }),
        2 => Tp::Const(ex("p0")),
        3 => Tp::Const(ex("p1")),
        4 => Tp::Const(Term::iri_unchecked(rdfs::LABEL)),
        _ => Tp::Const(Term::iri_unchecked(rdf::TYPE)),
    }
}

fn object_tp(rng: &mut impl Rng) -> Tp {
    match rng.gen_range(0..6) {
        0..=3 => Tp::Var(pick_var(rng)),
        4 => Tp::Const(ex(&format!("s{}", rng.gen_range(0..6)))),
        _ => Tp::Const(Term::string("a")),
    }
}

fn triple_tp(rng: &mut impl Rng) -> (Tp, Tp, Tp) {
    (subject_tp(rng), predicate_tp(rng), object_tp(rng))
}

fn random_filter(rng: &mut impl Rng, vars: &[&'static str]) -> Option<Filter> {
    if vars.is_empty() || rng.gen_bool(0.5) {
        return None;
    }
    let v = vars.choose(rng).unwrap();
    Some(match rng.gen_range(0..5) {
        0 => Filter::NotIri(v, ex("p0")),
        1 => Filter::IsIri(v, ex(&format!("s{}", rng.gen_range(0..3)))),
        2 => Filter::Contains(v, ["1", "a", "s2"].choose(rng).unwrap()),
        3 => Filter::Bound(v),
        _ => Filter::Unbound(v),
    })
}

fn data_body(rng: &mut impl Rng) -> Body {
    // between one and four triple patterns in total
    let target = rng.gen_range(1..=4);
    let mut used = 0;
    let mut items = Vec::new();
    while used < target {
        let room = target - used;
        let item = match rng.gen_range(0..7) {
            0..=2 => {
                let (s, p, o) = triple_tp(rng);
                Item::Triple(s, p, o)
            }
            3 | 4 => Item::Record {
                subject: subject_tp(rng),
                attrs: (0..rng.gen_range(1..=room.min(2))).map(|_| (predicate_tp(rng), object_tp(rng))).collect(),
            },
            5 => Item::Recatt {
                subject: subject_tp(rng),
                p: predicate_tp(rng),
                o: object_tp(rng),
            },
            _ if !items.is_empty() => Item::Optional(vec![(Tp::Var("s"), predicate_tp(rng), Tp::Var("x"))]),
            _ => continue,
        };
        used += match &item {
            Item::Record { attrs, .. } => attrs.len(),
            _ => 1,
        };
        items.push(item);
    }
    let mut body = Body { items, filter: None };
    body.filter = random_filter(rng, &body_vars(&body));
    body
}

fn change_body(rng: &mut impl Rng) -> Body {
    let param = |rng: &mut dyn rand::RngCore| -> (Tp, Tp) {
        match rng.gen_range(0..4) {
            0 => (Tp::Const(Term::iri_unchecked(rdf::TYPE)), Tp::Var("x")),
            1 => (
                Tp::Const(Term::iri_unchecked(rdf::TYPE)),
                Tp::Const(Term::iri_unchecked(
                    [dia::ADD_ATTRIBUTE, dia::DELETE_ATTRIBUTE, dia::LABEL_MODIFICATION][rng.gen_range(0..3)],
                )),
            ),
            2 => (Tp::Const(Term::iri_unchecked(dia::PARAMETER1)), Tp::Var("o")),
            _ => (Tp::Var("p"), Tp::Var("o")),
        }
    };
    let params = (0..rng.gen_range(1..=2)).map(|_| param(rng)).collect();
    let mut body = Body {
        items: vec![Item::Change(params)],
        filter: None,
    };
    body.filter = random_filter(rng, &body_vars(&body));
    body
}

fn body_vars(b: &Body) -> Vec<&'static str> {
    let mut out = Vec::new();
    let mut add = |t: &Tp| {
        if let Tp::Var(v) = t {
            if !out.contains(v) {
                out.push(*v);
            }
        }
    };
    for item in &b.items {
        match item {
            Item::Triple(s, p, o) => [s, p, o].into_iter().for_each(&mut add),
            Item::Record { subject, attrs } => {
                add(&Tp::Var("r"));
                add(subject);
                for (p, o) in attrs {
                    add(p);
                    add(o);
                }
            }
            Item::Recatt { subject, p, o } => {
                add(&Tp::Var("r"));
                add(subject);
                add(&Tp::Var("ra"));
                add(p);
                add(o);
            }
            Item::Optional(ts) => ts.iter().for_each(|(s, p, o)| [s, p, o].into_iter().for_each(&mut add)),
            Item::Change(ps) => {
                add(&Tp::Var("c"));
                for (p, o) in ps {
                    add(p);
                    add(o);
                }
            }
        }
    }
    out
}

fn random_vref(rng: &mut impl Rng, truth: &Truth, var: &'static str) -> VRef {
    if rng.gen_bool(0.5) {
        VRef::Var(var)
    } else {
        VRef::Iri(random_version(rng, truth, None))
    }
}

/// A version IRI, from `dataset` when given, else from any dataset.
fn random_version(rng: &mut impl Rng, truth: &Truth, dataset: Option<usize>) -> Term {
    let d = dataset.unwrap_or_else(|| rng.gen_range(0..truth.datasets.len()));
    truth.datasets[d].versions.choose(rng).unwrap().0.clone()
}

fn position(truth: &Truth, v: &Term) -> Option<(usize, usize)> {
    truth.datasets.iter().enumerate().find_map(|(d, ds)| {
        ds.versions.iter().position(|(w, _)| w == v).map(|i| (d, i))
    })
}

fn ordered_pair(truth: &Truth, a: VRef, b: VRef) -> (VRef, VRef) {
    if let (VRef::Iri(x), VRef::Iri(y)) = (&a, &b) {
        let (dx, ix) = position(truth, x).unwrap();
        let (dy, iy) = position(truth, y).unwrap();
        if dx == dy && ix > iy {
            return (b, a);
        }
    }
    (a, b)
}

fn random_block(rng: &mut impl Rng, truth: &Truth) -> Block {
    let dataset_index = rng.gen_range(0..truth.datasets.len());
    let dataset = match rng.gen_range(0..3) {
        0 => Some(VRef::Var("d")),
        _ => Some(VRef::Iri(truth.datasets[dataset_index].iri.clone())),
    };
    let home = match &dataset {
        Some(VRef::Iri(_)) if rng.gen_bool(0.8) => Some(dataset_index),
        _ => None,
    };
    let changes = rng.gen_bool(0.3);
    let sel = match rng.gen_range(0..5) {
        0 => Sel::Any,
        1 if !changes => Sel::At(if rng.gen_bool(0.5) {
            VRef::Var("v")
        } else {
            VRef::Iri(random_version(rng, truth, home))
        }),
        1 => Sel::Any,
        2 => Sel::Before(random_version(rng, truth, home)),
        3 => Sel::After(random_version(rng, truth, home)),
        _ => {
            let a = random_vref(rng, truth, "v1");
            let b = random_vref(rng, truth, "v2");
            let (a, b) = ordered_pair(truth, a, b);
            Sel::Between(a, b)
        }
    };
    if changes {
        Block::Changes {
            dataset,
            sel,
            body: change_body(rng),
        }
    } else {
        Block::Data {
            dataset,
            sel,
            body: data_body(rng),
        }
    }
}

pub fn random_query(rng: &mut impl Rng, truth: &Truth) -> RandomQuery {
    let shape = match rng.gen_range(0..6) {
        0 => Shape::Plain(data_body(rng)),
        1 => {
            let d = rng.gen_range(0..truth.datasets.len());
            let at = rng.gen_bool(0.5).then(|| random_version(rng, truth, Some(d)));
            Shape::From {
                dataset: truth.datasets[d].iri.clone(),
                at,
                body: data_body(rng),
            }
        }
        2 => Shape::RootChange(change_body(rng)),
        _ => Shape::Blocks((0..rng.gen_range(1..=2)).map(|_| random_block(rng, truth)).collect()),
    };
    let mut q = RandomQuery { shape, vars: Vec::new() };
    q.vars = q.all_vars();
    q
}

fn body_text(b: &Body) -> String {
    let mut parts = Vec::new();
    for item in &b.items {
        parts.push(match item {
            Item::Triple(s, p, o) => format!("{} {} {} .", s.text(), p.text(), o.text()),
            Item::Record { subject, attrs } => {
                let attrs: Vec<String> = attrs.iter().map(|(p, o)| format!("{} {}", p.text(), o.text())).collect();
                format!("RECORD ?r {{ {} {} }}", subject.text(), attrs.join(" ; "))
            }
            Item::Recatt { subject, p, o } => {
                format!("RECORD ?r {{ {} RECATT ?ra {{ {} {} }} }}", subject.text(), p.text(), o.text())
            }
            Item::Optional(ts) => {
                let ts: Vec<String> = ts.iter().map(|(s, p, o)| format!("{} {} {} .", s.text(), p.text(), o.text())).collect();
                format!("OPTIONAL {{ {} }}", ts.join(" "))
            }
            Item::Change(ps) => {
                let ps: Vec<String> = ps.iter().map(|(p, o)| format!("{} {}", p.text(), o.text())).collect();
                format!("CHANGE ?c {{ {} }}", ps.join(" ; "))
            }
        });
    }
    if let Some(f) = &b.filter {
        parts.push(f.text());
    }
    parts.join(" ")
}

impl RandomQuery {
    fn all_vars(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        let mut add = |vs: Vec<&'static str>| {
            for v in vs {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        };
        let sel_vars = |dataset: &Option<VRef>, sel: &Sel| {
            let mut vs = Vec::new();
            if let Some(VRef::Var(v)) = dataset {
                vs.push(*v);
            }
            match sel {
                Sel::At(VRef::Var(v)) => vs.push(*v),
                Sel::Between(a, b) => {
                    for r in [a, b] {
                        if let VRef::Var(v) = r {
                            vs.push(*v);
                        }
                    }
                }
                _ => {}
            }
            vs
        };
        match &self.shape {
            Shape::Plain(b) | Shape::From { body: b, .. } | Shape::RootChange(b) => add(body_vars(b)),
            Shape::Blocks(blocks) => {
                for block in blocks {
                    let (Block::Data { dataset, sel, body } | Block::Changes { dataset, sel, body }) = block;
                    add(sel_vars(dataset, sel));
                    add(body_vars(body));
                }
            }
        }
        out
    }

    pub fn text(&self) -> String {
        let head = if self.vars.is_empty() {
            "SELECT *".to_owned()
        } else {
            format!("SELECT {}", self.vars.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join(" "))
        };
        match &self.shape {
            Shape::Plain(b) | Shape::RootChange(b) => format!("{head} WHERE {{ {} }}", body_text(b)),
            Shape::From { dataset, at, body } => {
                let at = at.as_ref().map(|v| format!(" AT VERSION {v}")).unwrap_or_default();
                format!("{head} FROM DATASET {dataset}{at} WHERE {{ {} }}", body_text(body))
            }
            Shape::Blocks(blocks) => {
                let inner: Vec<String> = blocks
                    .iter()
                    .map(|block| {
                        let (kw, dataset, sel, body) = match block {
                            Block::Data { dataset, sel, body } => ("DATASET", dataset, sel, body),
                            Block::Changes { dataset, sel, body } => ("CHANGES", dataset, sel, body),
                        };
                        let d = dataset.as_ref().map(|d| format!(" {}", d.text())).unwrap_or_default();
                        format!("{kw}{d}{} {{ {} }}", sel.text(), body_text(body))
                    })
                    .collect();
                format!("{head} WHERE {{ {} }}", inner.join(" "))
            }
        }
    }
}

// ---- the oracle

pub type Row = BTreeMap<&'static str, Term>;

fn bind(m: &mut Row, tp: &Tp, value: &Term) -> bool {
    match tp {
        Tp::Const(t) => t == value,
        Tp::Var(v) => match m.get(v) {
            Some(bound) => bound == value,
            None => {
                m.insert(v, value.clone());
                true
            }
        },
    }
}

fn match_triple(g: &Graph, rows: Vec<Row>, (s, p, o): (&Tp, &Tp, &Tp)) -> Vec<Row> {
    let mut out = Vec::new();
    for m in rows {
        for t in g {
            let mut n = m.clone();
            if bind(&mut n, s, &t.subject) && bind(&mut n, p, &t.predicate) && bind(&mut n, o, &t.object) {
                out.push(n);
            }
        }
    }
    out
}

fn compatible(a: &Row, b: &Row) -> bool {
    a.iter().all(|(k, v)| b.get(k).is_none_or(|w| w == v))
}

fn merge(a: &Row, b: &Row) -> Row {
    let mut m = a.clone();
    m.extend(b.iter().map(|(k, v)| (*k, v.clone())));
    m
}

fn join(a: &[Row], b: &[Row]) -> Vec<Row> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            if compatible(x, y) {
                out.push(merge(x, y));
            }
        }
    }
    out
}

/// A data version as the oracle sees it: its IRI and its triples.
struct VersionView<'a> {
    iri: &'a Term,
    graph: &'a Graph,
}

fn eval_data_body(b: &Body, v: &VersionView) -> Vec<Row> {
    let mut rows = vec![Row::new()];
    for item in &b.items {
        rows = match item {
            Item::Triple(s, p, o) => match_triple(v.graph, rows, (s, p, o)),
            Item::Record { subject, attrs } => {
                let mut out = Vec::new();
                for m in rows {
                    for subj in v.graph.iter().map(|t| &t.subject).collect::<BTreeSet<_>>() {
                        let mut n = m.clone();
                        if !bind(&mut n, subject, subj) || !bind(&mut n, &Tp::Var("r"), &mint::record_iri(v.iri, subj)) {
                            continue;
                        }
                        let own: Graph = v.graph.iter().filter(|t| &t.subject == subj).cloned().collect();
                        let mut partial = vec![n];
                        for (p, o) in attrs {
                            partial = match_triple(&own, partial, (&Tp::Const(subj.clone()), p, o));
                        }
                        out.extend(partial);
                    }
                }
                out
            }
            Item::Recatt { subject, p, o } => {
                let mut out = Vec::new();
                for m in rows {
                    for t in v.graph {
                        let mut n = m.clone();
                        if bind(&mut n, subject, &t.subject)
                            && bind(&mut n, p, &t.predicate)
                            && bind(&mut n, o, &t.object)
                            && bind(&mut n, &Tp::Var("r"), &mint::record_iri(v.iri, &t.subject))
                            && bind(
                                &mut n,
                                &Tp::Var("ra"),
                                &mint::attribute_iri(v.iri, &t.subject, &t.predicate, &t.object),
                            )
                        {
                            out.push(n);
                        }
                    }
                }
                out
            }
            Item::Optional(ts) => {
                let mut out = Vec::new();
                for m in rows {
                    let mut ext = vec![m.clone()];
                    for (s, p, o) in ts {
                        ext = match_triple(v.graph, ext, (s, p, o));
                    }
                    if ext.is_empty() {
                        out.push(m);
                    } else {
                        out.extend(ext);
                    }
                }
                out
            }
            Item::Change(_) => unreachable!("CHANGE in a data body"),
        };
    }
    apply_filter(b, rows)
}

fn apply_filter(b: &Body, rows: Vec<Row>) -> Vec<Row> {
    match &b.filter {
        Some(f) => rows.into_iter().filter(|m| f.holds(m)).collect(),
        None => rows,
    }
}

fn eval_change_body(b: &Body, cs: &Term, g: &Graph) -> Vec<Row> {
    let mut rows = vec![Row::new()];
    for item in &b.items {
        let Item::Change(params) = item else {
            unreachable!("only CHANGE blocks in change bodies")
        };
        rows = match_triple(
            g,
            rows,
            (&Tp::Const(cs.clone()), &Tp::Const(Term::iri_unchecked(dia::HAS_CHANGE)), &Tp::Var("c")),
        );
        for (p, o) in params {
            rows = match_triple(g, rows, (&Tp::Var("c"), p, o));
        }
    }
    apply_filter(b, rows)
}

/// Candidate version indices of one dataset with the bindings they imply.
fn data_candidates(ds: &DatasetTruth, sel: &Sel, base: &Row) -> Vec<(usize, Row)> {
    let index = |t: &Term| ds.versions.iter().position(|(w, _)| w == t);
    let anchors = |r: &VRef, base: &Row| -> Vec<(usize, Row)> {
        match r {
            VRef::Iri(t) => index(t).map(|i| (i, base.clone())).into_iter().collect(),
            VRef::Var(v) => (0..ds.versions.len())
                .filter_map(|i| {
                    let mut m = base.clone();
                    bind(&mut m, &Tp::Var(v), &ds.versions[i].0).then_some((i, m))
                })
                .collect(),
        }
    };
    let all = 0..ds.versions.len();
    match sel {
        Sel::Any => all.map(|i| (i, base.clone())).collect(),
        Sel::At(r) => anchors(r, base),
        Sel::Before(t) => match index(t) {
            Some(k) => (0..k).map(|i| (i, base.clone())).collect(),
            None => vec![],
        },
        Sel::After(t) => match index(t) {
            Some(k) => (k + 1..ds.versions.len()).map(|i| (i, base.clone())).collect(),
            None => vec![],
        },
        Sel::Between(a, b) => {
            let mut out = Vec::new();
            for (lo, ma) in anchors(a, base) {
                for (hi, mb) in anchors(b, &ma) {
                    out.extend((lo..=hi).map(|i| (i, mb.clone())));
                }
            }
            out
        }
    }
}

/// Candidate change sets (index of the newer version) of one dataset.
fn change_candidates(ds: &DatasetTruth, sel: &Sel, base: &Row) -> Vec<(usize, Row)> {
    let index = |t: &Term| ds.versions.iter().position(|(w, _)| w == t);
    let mut out = Vec::new();
    for new in 1..ds.versions.len() {
        let old = new - 1;
        let ok = match sel {
            Sel::Any => Some(base.clone()),
            Sel::At(_) => unreachable!("AT is not generated for change scopes"),
            Sel::Before(t) => index(t).filter(|&k| new <= k).map(|_| base.clone()),
            Sel::After(t) => index(t).filter(|&k| old >= k).map(|_| base.clone()),
            Sel::Between(a, b) => {
                let mut m = base.clone();
                let lower = match a {
                    VRef::Var(v) => bind(&mut m, &Tp::Var(v), &ds.versions[old].0),
                    VRef::Iri(t) => index(t).is_some_and(|k| old >= k),
                };
                let upper = match b {
                    VRef::Var(v) => bind(&mut m, &Tp::Var(v), &ds.versions[new].0),
                    VRef::Iri(t) => index(t).is_some_and(|k| new <= k),
                };
                (lower && upper).then_some(m)
            }
        };
        out.extend(ok.map(|m| (new, m)));
    }
    out
}

fn dataset_bases<'t>(truth: &'t Truth, dataset: &Option<VRef>) -> Vec<(&'t DatasetTruth, Row)> {
    truth
        .datasets
        .iter()
        .filter_map(|ds| match dataset {
            None => Some((ds, Row::new())),
            Some(VRef::Iri(t)) => (t == &ds.iri).then(|| (ds, Row::new())),
            Some(VRef::Var(v)) => Some((ds, Row::from([(*v, ds.iri.clone())]))),
        })
        .collect()
}

pub struct Oracle<'t> {
    truth: &'t Truth,
    change_graphs: BTreeMap<(usize, usize), (Term, Graph)>,
}

impl<'t> Oracle<'t> {
    pub fn new(truth: &'t Truth) -> Self {
        let mut change_graphs = BTreeMap::new();
        for (d, ds) in truth.datasets.iter().enumerate() {
            for new in 1..ds.versions.len() {
                let (vo, go) = &ds.versions[new - 1];
                let (vn, gn) = &ds.versions[new];
                let cs = build_change_set(&reify(go, vo), &reify(gn, vn)).unwrap();
                change_graphs.insert((d, new), (cs.iri.clone(), change_set_graph(&cs)));
            }
        }
        Self { truth, change_graphs }
    }

    fn data_scope(&self, dataset: &Option<VRef>, sel: &Sel, body: &Body) -> Vec<Row> {
        let mut out = Vec::new();
        for (ds, base) in dataset_bases(self.truth, dataset) {
            for (i, m) in data_candidates(ds, sel, &base) {
                let (iri, graph) = &ds.versions[i];
                out.extend(join(&eval_data_body(body, &VersionView { iri, graph }), &[m]));
            }
        }
        out
    }

    fn change_scope(&self, dataset: &Option<VRef>, sel: &Sel, body: &Body) -> Vec<Row> {
        let mut out = Vec::new();
        for (ds, base) in dataset_bases(self.truth, dataset) {
            let d = self.truth.datasets.iter().position(|x| x.iri == ds.iri).unwrap();
            for (new, m) in change_candidates(ds, sel, &base) {
                let (cs, g) = &self.change_graphs[&(d, new)];
                out.extend(join(&eval_change_body(body, cs, g), &[m]));
            }
        }
        out
    }

    /// Projected rows, sorted and deduplicated.
    pub fn answer(&self, q: &RandomQuery) -> Vec<Vec<Option<Term>>> {
        let rows = match &q.shape {
            Shape::Plain(b) => self.data_scope(&None, &Sel::Any, b),
            Shape::From { dataset, at, body } => {
                let sel = at.clone().map(|v| Sel::At(VRef::Iri(v))).unwrap_or(Sel::Any);
                self.data_scope(&Some(VRef::Iri(dataset.clone())), &sel, body)
            }
            Shape::RootChange(b) => self.change_scope(&None, &Sel::Any, b),
            Shape::Blocks(blocks) => {
                let mut acc = vec![Row::new()];
                for block in blocks {
                    let rows = match block {
                        Block::Data { dataset, sel, body } => self.data_scope(dataset, sel, body),
                        Block::Changes { dataset, sel, body } => self.change_scope(dataset, sel, body),
                    };
                    acc = join(&acc, &rows);
                }
                acc
            }
        };
        let mut out: Vec<Vec<Option<Term>>> = rows
            .iter()
            .map(|m| q.vars.iter().map(|v| m.get(v).cloned()).collect())
            .collect();
        out.sort();
        out.dedup();
        out
    }
}
