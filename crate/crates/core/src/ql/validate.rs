//! Static checks on a parsed query.

use super::ast::*;
use super::diagnostic::Diagnostic;
use crate::model::Archive;
use crate::rdf::{TermPattern, Variable};

/// Returns every problem found; no errors means the query can be evaluated.
/// With an archive, unknown dataset and version IRIs produce warnings.
pub fn validate(query: &Query, archive: Option<&Archive>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for s in &query.sources {
        let name = match s.kind {
            SourceKind::Dataset => "FROM DATASET",
            SourceKind::Changes => "FROM CHANGES",
        };
        if let Some(TermPattern::Var(v)) = &s.dataset {
            out.push(Diagnostic::error(format!("variable {v} in {name}; only IRIs are allowed")));
        }
        for t in s.versions.terms() {
            if let TermPattern::Var(v) = t {
                out.push(Diagnostic::error(format!("variable {v} in {name} version; only IRIs are allowed")));
            }
        }
        if s.kind == SourceKind::Dataset
            && matches!(
                s.versions,
                VersionSelector::Before(_) | VersionSelector::After(_) | VersionSelector::Between(_)
            )
        {
            out.push(Diagnostic::error("FROM DATASET only accepts AT VERSION"));
        }
        check_selector(s.kind, &s.versions, &mut out);
        if let Some(a) = archive {
            check_known(a, s.dataset.as_ref(), &s.versions, &mut out);
        }
    }
    check_group(&query.pattern, archive, &mut out);

    let mut bound = Vec::new();
    for s in &query.sources {
        for t in s.dataset.iter().chain(s.versions.terms()) {
            if let Some(v) = t.var() {
                bound.push(v.clone());
            }
        }
    }
    query.pattern.collect_vars(&mut bound);
    let unbound = |v: &Variable| !bound.contains(v);

    match &query.projection {
        Projection::All => {
            if query.has_aggregates() {
                out.push(Diagnostic::error("SELECT * cannot be combined with GROUP BY"));
            }
        }
        Projection::Items(items) => {
            let mut seen: Vec<&Variable> = Vec::new();
            for item in items {
                let name = item.output_var();
                if seen.contains(&name) {
                    out.push(Diagnostic::error(format!("{name} is projected twice")));
                }
                seen.push(name);
                match item {
                    SelectItem::Var(v) => {
                        if unbound(v) {
                            out.push(Diagnostic::error(format!("projected variable {v} is not bound in the query")));
                        } else if query.has_aggregates() && !query.group_by.contains(v) {
                            out.push(Diagnostic::error(format!("{v} is projected but neither grouped nor aggregated")));
                        }
                    }
                    SelectItem::Count { arg, alias, .. } => {
                        if let Some(a) = arg {
                            if unbound(a) {
                                out.push(Diagnostic::error(format!("COUNT argument {a} is not bound in the query")));
                            }
                        }
                        if bound.contains(alias) {
                            out.push(Diagnostic::error(format!("alias {alias} is already used in the pattern")));
                        }
                    }
                }
            }
        }
    }
    for v in &query.group_by {
        if unbound(v) {
            out.push(Diagnostic::error(format!("GROUP BY variable {v} is not bound in the query")));
        }
    }
    let outputs = query.output_vars();
    for k in &query.order_by {
        if unbound(&k.var) && !outputs.contains(&k.var) {
            out.push(Diagnostic::warning(format!("ORDER BY variable {} is never bound", k.var)));
        }
    }
    out
}

fn check_selector(kind: SourceKind, sel: &VersionSelector, out: &mut Vec<Diagnostic>) {
    match sel {
        VersionSelector::At(_) if kind == SourceKind::Changes => {
            out.push(Diagnostic::error(
                "AT VERSION does not apply to CHANGES; use BEFORE, AFTER or BETWEEN",
            ));
        }
        VersionSelector::Between(ts) if ts.len() != 2 => {
            out.push(Diagnostic::error(format!(
                "BETWEEN VERSIONS takes exactly 2 versions, got {}",
                ts.len()
            )));
        }
        _ => {}
    }
}

fn check_known(archive: &Archive, dataset: Option<&TermPattern>, sel: &VersionSelector, out: &mut Vec<Diagnostic>) {
    let catalog = archive.catalog();
    if let Some(TermPattern::Term(d)) = dataset {
        if catalog.dataset(d).is_err() {
            out.push(Diagnostic::warning(format!("unknown dataset {d}")));
        }
    }
    for t in sel.terms() {
        if let TermPattern::Term(v) = t {
            if catalog.version(v).is_err() {
                out.push(Diagnostic::warning(format!("unknown version {v}")));
            }
        }
    }
}

fn check_group(g: &GroupPattern, archive: Option<&Archive>, out: &mut Vec<Diagnostic>) {
    for e in &g.elements {
        match e {
            Element::Group(g) | Element::Optional(g) => check_group(g, archive, out),
            Element::Graph { pattern, .. } => check_group(pattern, archive, out),
            Element::Union(gs) => gs.iter().for_each(|g| check_group(g, archive, out)),
            Element::Dataset(s) | Element::Changes(s) => {
                let kind = if matches!(e, Element::Dataset(_)) {
                    SourceKind::Dataset
                } else {
                    SourceKind::Changes
                };
                check_selector(kind, &s.versions, out);
                if let Some(a) = archive {
                    check_known(a, s.dataset.as_ref(), &s.versions, out);
                }
                check_group(&s.pattern, archive, out);
            }
            Element::Triples(_) | Element::Filter(_) | Element::Record(_) | Element::Change(_) => {}
        }
    }
}
