//! Solution modifiers and result serialization.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::ql::{Projection, Query, SelectItem};
use crate::rdf::{parse_term, Literal, Mapping, MappingSet, Term, Variable};
use crate::vocab::xsd;

/// A projected result: column names and one cell per column per row;
/// `None` is an unbound cell.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResultTable {
    pub header: Vec<Variable>,
    pub rows: Vec<Vec<Option<Term>>>,
}

/// Orders terms: unbound first, numbers numerically, everything else by
/// N-Triples text.
pub fn compare_terms(a: Option<&Term>, b: Option<&Term>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => {
            let num = |t: &Term| t.as_literal().and_then(Literal::numeric_value);
            if let (Some(nx), Some(ny)) = (num(x), num(y)) {
                if let Some(o) = nx.partial_cmp(&ny).filter(|o| o.is_ne()) {
                    return o;
                }
            }
            x.to_string().cmp(&y.to_string())
        }
    }
}

fn row_text(row: &[Option<Term>]) -> String {
    row.iter()
        .map(|c| c.as_ref().map(Term::to_string).unwrap_or_default())
        .collect::<Vec<_>>()
        .join("\t")
}

fn count_term(n: usize) -> Term {
    Term::literal(Literal::typed(n.to_string(), xsd::INTEGER))
}

/// Applies grouping and aggregates, projection, ORDER BY, DISTINCT, OFFSET
/// and LIMIT. Helper variables are dropped first. Without ORDER BY (and to
/// break ties) rows are ordered by their serialization.
pub fn apply_modifiers(ms: MappingSet, query: &Query) -> Result<ResultTable> {
    let solutions: MappingSet = ms
        .into_iter()
        .map(|mut m| {
            m.retain(|v| !v.is_reserved());
            m
        })
        .collect();
    let header = query.output_vars();

    // each entry: the mapping ORDER BY reads, and the projected row
    let mut entries: Vec<(Mapping, Vec<Option<Term>>)> = Vec::new();
    if query.has_aggregates() {
        let Projection::Items(items) = &query.projection else {
            return Err(Error::Query("SELECT * cannot be combined with aggregates".into()));
        };
        for item in items {
            if let SelectItem::Var(v) = item {
                if !query.group_by.contains(v) {
                    return Err(Error::Query(format!("{v} is neither grouped nor aggregated")));
                }
            }
        }
        let mut groups: BTreeMap<Vec<Option<Term>>, Vec<&Mapping>> = BTreeMap::new();
        for m in &solutions {
            let key = query.group_by.iter().map(|v| m.get(v).cloned()).collect();
            groups.entry(key).or_default().push(m);
        }
        if groups.is_empty() && query.group_by.is_empty() {
            groups.insert(Vec::new(), Vec::new());
        }
        for (key, members) in groups {
            let mut out = Mapping::new();
            for (v, t) in query.group_by.iter().zip(&key) {
                if let Some(t) = t {
                    out.bind(v.clone(), t.clone());
                }
            }
            for item in items {
                if let SelectItem::Count { distinct, arg, alias } = item {
                    let n = match arg {
                        None => members.len(),
                        Some(a) => {
                            let mut vals: Vec<&Term> = members.iter().filter_map(|m| m.get(a)).collect();
                            if *distinct {
                                vals.sort();
                                vals.dedup();
                            }
                            vals.len()
                        }
                    };
                    out.bind(alias.clone(), count_term(n));
                }
            }
            let row = header.iter().map(|v| out.get(v).cloned()).collect();
            entries.push((out, row));
        }
    } else {
        for m in solutions {
            let row = header.iter().map(|v| m.get(v).cloned()).collect();
            entries.push((m, row));
        }
    }

    let keyed: Vec<(Vec<Option<Term>>, String, Vec<Option<Term>>)> = entries
        .into_iter()
        .map(|(m, row)| {
            let keys = query.order_by.iter().map(|k| m.get(&k.var).cloned()).collect();
            let text = row_text(&row);
            (keys, text, row)
        })
        .collect();
    let mut keyed = keyed;
    keyed.sort_by(|a, b| {
        for (i, k) in query.order_by.iter().enumerate() {
            let o = compare_terms(a.0[i].as_ref(), b.0[i].as_ref());
            let o = if k.descending { o.reverse() } else { o };
            if o.is_ne() {
                return o;
            }
        }
        a.1.cmp(&b.1)
    });
    let mut rows: Vec<Vec<Option<Term>>> = keyed.into_iter().map(|(_, _, r)| r).collect();
    if query.distinct {
        let mut seen = std::collections::HashSet::new();
        rows.retain(|r| seen.insert(r.clone()));
    }
    let offset = query.offset.unwrap_or(0) as usize;
    let rows: Vec<_> = rows
        .into_iter()
        .skip(offset)
        .take(query.limit.map_or(usize::MAX, |l| l as usize))
        .collect();
    Ok(ResultTable { header, rows })
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|v| v.name() == name)
    }

    /// Rows sorted and deduplicated, for set comparison.
    pub fn row_set(&self) -> Vec<Vec<Option<Term>>> {
        let mut rows = self.rows.clone();
        rows.sort();
        rows.dedup();
        rows
    }

    /// Header line of `?`-prefixed names, then one line per row with cells
    /// in N-Triples syntax; unbound cells are empty.
    pub fn to_tsv(&self) -> String {
        let mut out = self.header.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\t");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&row_text(r));
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let head = lines.next().ok_or_else(|| Error::Query("empty TSV".into()))?;
        let header = head
            .split('\t')
            .filter(|s| !s.is_empty())
            .map(|s| Variable::new(s.trim_start_matches('?')))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for line in lines {
            let cells: Vec<&str> = if header.len() <= 1 && line.is_empty() {
                vec![""; header.len()]
            } else {
                line.split('\t').collect()
            };
            if cells.len() != header.len() {
                return Err(Error::Query(format!("TSV row has {} cells, expected {}", cells.len(), header.len())));
            }
            rows.push(
                cells
                    .into_iter()
                    .map(|c| if c.is_empty() { Ok(None) } else { parse_term(c).map(Some) })
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Self { header, rows })
    }

    /// SPARQL 1.1 query results JSON.
    pub fn to_json(&self) -> Value {
        let bindings: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut obj = Map::new();
                for (v, cell) in self.header.iter().zip(r) {
                    if let Some(t) = cell {
                        obj.insert(v.name().to_owned(), term_json(t));
                    }
                }
                Value::Object(obj)
            })
            .collect();
        json!({
            "head": { "vars": self.header.iter().map(|v| v.name()).collect::<Vec<_>>() },
            "results": { "bindings": bindings },
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = || Error::Query("malformed SPARQL results JSON".into());
        let header = value["head"]["vars"]
            .as_array()
            .ok_or_else(bad)?
            .iter()
            .map(|v| v.as_str().ok_or_else(bad).and_then(Variable::new))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for b in value["results"]["bindings"].as_array().ok_or_else(bad)? {
            let mut row = Vec::new();
            for v in &header {
                row.push(match b.get(v.name()) {
                    None => None,
                    Some(cell) => Some(json_term(cell)?),
                });
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }
}

fn term_json(t: &Term) -> Value {
    match t {
        Term::Iri(i) => json!({ "type": "uri", "value": &**i }),
        Term::Blank(b) => json!({ "type": "bnode", "value": &**b }),
        Term::Literal(l) => {
            let mut obj = json!({ "type": "literal", "value": l.lexical() });
            if let Some(lang) = l.language() {
                obj["xml:lang"] = json!(lang);
            } else if l.datatype() != xsd::STRING {
                obj["datatype"] = json!(l.datatype());
            }
            obj
        }
    }
}

fn json_term(v: &Value) -> Result<Term> {
    let bad = || Error::Query("malformed SPARQL results JSON term".into());
    let value = v["value"].as_str().ok_or_else(bad)?;
    match v["type"].as_str().ok_or_else(bad)? {
        "uri" => Term::iri(value),
        "bnode" => Ok(Term::blank(value)),
        "literal" | "typed-literal" => Ok(Term::literal(if let Some(lang) = v["xml:lang"].as_str() {
            Literal::lang(value, lang)
        } else if let Some(dt) = v["datatype"].as_str() {
            Literal::typed(value, dt)
        } else {
            Literal::string(value)
        })),
        _ => Err(bad()),
    }
}
