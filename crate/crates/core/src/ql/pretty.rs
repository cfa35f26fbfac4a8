//! Canonical query text. Parsing the output yields an equal [`Query`].

use std::fmt::{self, Write};

use super::ast::*;

pub fn pretty_print(query: &Query) -> String {
    query.to_string()
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        match &self.projection {
            Projection::All => f.write_str("*")?,
            Projection::Items(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    match item {
                        SelectItem::Var(v) => write!(f, "{v}")?,
                        SelectItem::Count { distinct, arg, alias } => {
                            f.write_str("(COUNT(")?;
                            if *distinct {
                                f.write_str("DISTINCT ")?;
                            }
                            match arg {
                                Some(v) => write!(f, "{v}")?,
                                None => f.write_str("*")?,
                            }
                            write!(f, ") AS {alias})")?;
                        }
                    }
                }
            }
        }
        f.write_str("\n")?;
        for s in &self.sources {
            f.write_str("FROM ")?;
            f.write_str(match s.kind {
                SourceKind::Dataset => "DATASET",
                SourceKind::Changes => "CHANGES",
            })?;
            if let Some(d) = &s.dataset {
                write!(f, " {d}")?;
            }
            write_selector(f, &s.versions)?;
            f.write_str("\n")?;
        }
        f.write_str("WHERE ")?;
        let mut body = String::new();
        write_group(&mut body, &self.pattern, 0)?;
        f.write_str(&body)?;
        f.write_str("\n")?;
        if !self.group_by.is_empty() {
            f.write_str("GROUP BY")?;
            for v in &self.group_by {
                write!(f, " {v}")?;
            }
            f.write_str("\n")?;
        }
        if !self.order_by.is_empty() {
            f.write_str("ORDER BY")?;
            for k in &self.order_by {
                let dir = if k.descending { "DESC" } else { "ASC" };
                write!(f, " {dir}({})", k.var)?;
            }
            f.write_str("\n")?;
        }
        if let Some(n) = self.limit {
            writeln!(f, "LIMIT {n}")?;
        }
        if let Some(n) = self.offset {
            writeln!(f, "OFFSET {n}")?;
        }
        Ok(())
    }
}

fn write_selector(f: &mut impl Write, sel: &VersionSelector) -> fmt::Result {
    match sel {
        VersionSelector::Any => Ok(()),
        VersionSelector::At(t) => write!(f, " AT VERSION {t}"),
        VersionSelector::Before(t) => write!(f, " BEFORE VERSION {t}"),
        VersionSelector::After(t) => write!(f, " AFTER VERSION {t}"),
        VersionSelector::Between(ts) => {
            f.write_str(" BETWEEN VERSIONS")?;
            for t in ts {
                write!(f, " {t}")?;
            }
            Ok(())
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_group(out: &mut String, g: &GroupPattern, depth: usize) -> fmt::Result {
    if g.elements.is_empty() {
        out.push_str("{ }");
        return Ok(());
    }
    out.push_str("{\n");
    for e in &g.elements {
        write_element(out, e, depth + 1)?;
    }
    indent(out, depth);
    out.push('}');
    Ok(())
}

fn write_element(out: &mut String, e: &Element, depth: usize) -> fmt::Result {
    if let Element::Triples(ts) = e {
        for t in ts {
            indent(out, depth);
            writeln!(out, "{t}")?;
        }
        return Ok(());
    }
    indent(out, depth);
    match e {
        Element::Triples(_) => unreachable!(),
        Element::Filter(expr) => write!(out, "FILTER ({expr})")?,
        Element::Group(g) => write_group(out, g, depth)?,
        Element::Union(gs) => {
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" UNION ");
                }
                write_group(out, g, depth)?;
            }
        }
        Element::Optional(g) => {
            out.push_str("OPTIONAL ");
            write_group(out, g, depth)?;
        }
        Element::Graph { name, pattern } => {
            write!(out, "GRAPH {name} ")?;
            write_group(out, pattern, depth)?;
        }
        Element::Record(r) => {
            write!(out, "RECORD {} {{ {}", r.record, r.subject)?;
            for m in &r.members {
                match m {
                    RecordMember::Attribute { predicate, object } => write!(out, " {predicate} {object} .")?,
                    RecordMember::Recatt {
                        attribute,
                        predicate,
                        object,
                    } => write!(out, " RECATT {attribute} {{ {predicate} {object} }}")?,
                }
            }
            out.push_str(" }");
        }
        Element::Change(c) => {
            write!(out, "CHANGE {} {{", c.change)?;
            for (p, o) in &c.parameters {
                write!(out, " {p} {o} .")?;
            }
            out.push_str(" }");
        }
        Element::Dataset(s) => {
            out.push_str("DATASET");
            if let Some(d) = &s.dataset {
                write!(out, " {d}")?;
            }
            write_selector(out, &s.versions)?;
            out.push(' ');
            write_group(out, &s.pattern, depth)?;
        }
        Element::Changes(s) => {
            out.push_str("CHANGES");
            if let Some(d) = &s.dataset {
                write!(out, " {d}")?;
            }
            write_selector(out, &s.versions)?;
            out.push(' ');
            write_group(out, &s.pattern, depth)?;
        }
    }
    out.push('\n');
    Ok(())
}
