//! Recursive-descent parser producing [`Query`] values.

use std::collections::HashMap;

use super::ast::*;
use super::diagnostic::{Diagnostic, Position};
use super::lexer::{tokenize, Tok, Token};
use crate::error::{Error, Result};
use crate::rdf::term::is_absolute_iri;
use crate::rdf::{CmpOp, FilterExpr, Literal, Term, TermPattern, TriplePattern, Variable};
use crate::vocab::{rdf, xsd, BUILTIN_PREFIXES, DEFAULT_BASE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dialect {
    /// The full query language.
    #[default]
    Diachron,
    /// The plain SPARQL subset: no archive keywords, but helper variables
    /// in the reserved namespace are accepted.
    Sparql,
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub dialect: Dialect,
    /// Extra prefixes; these shadow the built-in ones.
    pub prefixes: Vec<(String, String)>,
    pub base: String,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            dialect: Dialect::Diachron,
            prefixes: Vec::new(),
            base: DEFAULT_BASE.to_owned(),
        }
    }
}

impl ParseOptions {
    pub fn with_prefix(mut self, prefix: impl Into<String>, iri: impl Into<String>) -> Self {
        self.prefixes.push((prefix.into(), iri.into()));
        self
    }
}

pub fn parse(text: &str) -> Result<Query> {
    parse_with(text, &ParseOptions::default())
}

pub fn parse_with(text: &str, options: &ParseOptions) -> Result<Query> {
    parse_diagnostic(text, options).map_err(|d| Error::InvalidQuery(vec![d]))
}

/// Like [`parse_with`] but returns the raw diagnostic.
pub fn parse_diagnostic(text: &str, options: &ParseOptions) -> Result<Query, Diagnostic> {
    let toks = tokenize(text)?;
    let mut prefixes: HashMap<String, String> = BUILTIN_PREFIXES
        .iter()
        .map(|(p, i)| (p.to_string(), i.to_string()))
        .collect();
    prefixes.extend(options.prefixes.iter().cloned());
    let mut p = Parser {
        toks,
        i: 0,
        prefixes,
        base: options.base.clone(),
        dialect: options.dialect,
        fresh: 0,
    };
    p.query()
}

const KEYWORDS: &[&str] = &[
    "SELECT", "DISTINCT", "FROM", "DATASET", "CHANGES", "AT", "VERSION", "BEFORE", "AFTER", "BETWEEN", "VERSIONS",
    "WHERE", "RECORD", "RECATT", "CHANGE", "UNION", "OPTIONAL", "FILTER", "ORDER", "BY", "GROUP", "LIMIT", "OFFSET",
    "AS", "COUNT", "BOUND", "REGEX", "STR", "PREFIX", "BASE", "ASC", "DESC", "GRAPH", "DIACHRON",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ctx {
    /// Query root without FROM CHANGES: data patterns, RECORD and CHANGE.
    Root,
    /// Inside a DATASET block.
    Dataset,
    /// Inside CHANGES, or the root of a FROM CHANGES query.
    Changes,
    /// Inside GRAPH: raw patterns only, plus RECORD.
    Graph,
}

type PResult<T> = std::result::Result<T, Diagnostic>;

struct Parser {
    toks: Vec<Token>,
    i: usize,
    prefixes: HashMap<String, String>,
    base: String,
    dialect: Dialect,
    fresh: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn pos(&self) -> Position {
        self.toks[self.i].pos
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(Diagnostic::error(format!("unexpected {}", self.peek().describe()))
            .at(self.pos())
            .expecting(expected.iter().copied()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, name: &str) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.unexpected(&[name])
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        self.peek().is_word(kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.unexpected(&[kw])
        }
    }

    fn archive_keyword(&mut self, kw: &str) -> PResult<bool> {
        if !self.is_kw(kw) {
            return Ok(false);
        }
        if self.dialect == Dialect::Sparql {
            return Err(Diagnostic::error(format!("{kw} is not available in plain SPARQL")).at(self.pos()));
        }
        self.advance();
        Ok(true)
    }

    fn fresh_var(&mut self) -> Variable {
        self.fresh += 1;
        Variable::internal(format!("_b_{}", self.fresh))
    }

    // ---- query level ----

    fn query(&mut self) -> PResult<Query> {
        loop {
            if self.eat_kw("PREFIX") {
                let pos = self.pos();
                let Tok::PName { prefix, local } = self.advance() else {
                    return Err(Diagnostic::error("expected prefix name").at(pos).expecting(["pfx:"]));
                };
                if !local.is_empty() {
                    return Err(Diagnostic::error("prefix declaration must end with ':'").at(pos));
                }
                let iri = self.iri_ref()?;
                self.prefixes.insert(prefix, iri);
            } else if self.eat_kw("BASE") {
                self.base = self.iri_ref()?;
            } else {
                break;
            }
        }
        self.archive_keyword("DIACHRON")?;
        self.expect_kw("SELECT")?;
        let distinct = self.eat_kw("DISTINCT");
        let projection = self.projection()?;
        let mut sources: Vec<SourceClause> = Vec::new();
        while self.is_kw("FROM") {
            let pos = self.pos();
            self.advance();
            let kind = if self.archive_keyword("DATASET")? {
                SourceKind::Dataset
            } else if self.archive_keyword("CHANGES")? {
                SourceKind::Changes
            } else {
                return self.unexpected(&["DATASET", "CHANGES"]);
            };
            if sources.iter().any(|s| s.kind == kind) {
                let name = match kind {
                    SourceKind::Dataset => "FROM DATASET",
                    SourceKind::Changes => "FROM CHANGES",
                };
                return Err(Diagnostic::error(format!("duplicate {name} clause")).at(pos));
            }
            let dataset = match kind {
                SourceKind::Dataset => Some(self.var_or_iri()?),
                SourceKind::Changes => self.optional_var_or_iri()?,
            };
            let versions = self.version_selector()?;
            sources.push(SourceClause { kind, dataset, versions });
        }
        let ctx = if sources.iter().any(|s| s.kind == SourceKind::Changes) {
            Ctx::Changes
        } else {
            Ctx::Root
        };
        let pattern = if self.eat_kw("WHERE") || *self.peek() == Tok::LBrace {
            self.group(ctx)?
        } else {
            GroupPattern::default()
        };
        let mut group_by = Vec::new();
        if self.eat_kw("GROUP") {
            self.expect_kw("BY")?;
            while let Tok::Var(_) = self.peek() {
                group_by.push(self.var()?);
            }
            if group_by.is_empty() {
                return self.unexpected(&["variable"]);
            }
        }
        let mut order_by = Vec::new();
        if self.eat_kw("ORDER") {
            self.expect_kw("BY")?;
            loop {
                let descending = if self.eat_kw("ASC") {
                    false
                } else if self.eat_kw("DESC") {
                    true
                } else if let Tok::Var(_) = self.peek() {
                    order_by.push(OrderKey {
                        var: self.var()?,
                        descending: false,
                    });
                    continue;
                } else {
                    break;
                };
                self.expect(Tok::LParen, "(")?;
                let var = self.var()?;
                self.expect(Tok::RParen, ")")?;
                order_by.push(OrderKey { var, descending });
            }
            if order_by.is_empty() {
                return self.unexpected(&["variable", "ASC", "DESC"]);
            }
        }
        let (mut limit, mut offset) = (None, None);
        loop {
            if limit.is_none() && self.eat_kw("LIMIT") {
                limit = Some(self.count()?);
            } else if offset.is_none() && self.eat_kw("OFFSET") {
                offset = Some(self.count()?);
            } else {
                break;
            }
        }
        if *self.peek() != Tok::Eof {
            return self.unexpected(&["end of input"]);
        }
        Ok(Query {
            distinct,
            projection,
            sources,
            pattern,
            group_by,
            order_by,
            limit,
            offset,
        })
    }

    fn count(&mut self) -> PResult<u64> {
        let pos = self.pos();
        match self.advance() {
            Tok::Integer(n) => n
                .parse()
                .map_err(|_| Diagnostic::error(format!("invalid count {n}")).at(pos)),
            _ => Err(Diagnostic::error("expected a non-negative integer").at(pos)),
        }
    }

    fn projection(&mut self) -> PResult<Projection> {
        if self.eat(&Tok::Star) {
            return Ok(Projection::All);
        }
        let mut items = Vec::new();
        loop {
            match self.peek() {
                Tok::Var(_) => items.push(SelectItem::Var(self.var()?)),
                Tok::LParen => {
                    self.advance();
                    self.expect_kw("COUNT")?;
                    self.expect(Tok::LParen, "(")?;
                    let distinct = self.eat_kw("DISTINCT");
                    let arg = if self.eat(&Tok::Star) { None } else { Some(self.var()?) };
                    self.expect(Tok::RParen, ")")?;
                    self.expect_kw("AS")?;
                    let alias = self.var()?;
                    self.expect(Tok::RParen, ")")?;
                    items.push(SelectItem::Count { distinct, arg, alias });
                }
                Tok::Comma if !items.is_empty() => {
                    self.advance();
                    continue;
                }
                _ => break,
            }
        }
        if items.is_empty() {
            return self.unexpected(&["*", "variable", "(COUNT"]);
        }
        Ok(Projection::Items(items))
    }

    fn version_selector(&mut self) -> PResult<VersionSelector> {
        if self.eat_kw("AT") {
            self.expect_kw("VERSION")?;
            Ok(VersionSelector::At(self.var_or_iri()?))
        } else if self.eat_kw("BEFORE") {
            self.expect_kw("VERSION")?;
            Ok(VersionSelector::Before(self.var_or_iri()?))
        } else if self.eat_kw("AFTER") {
            if self.eat_kw("VERSIONS") {
                return Ok(VersionSelector::Between(self.version_list()?));
            }
            self.expect_kw("VERSION")?;
            Ok(VersionSelector::After(self.var_or_iri()?))
        } else if self.eat_kw("BETWEEN") {
            self.expect_kw("VERSIONS")?;
            Ok(VersionSelector::Between(self.version_list()?))
        } else {
            Ok(VersionSelector::Any)
        }
    }

    fn version_list(&mut self) -> PResult<Vec<TermPattern>> {
        let mut out = vec![self.var_or_iri()?];
        loop {
            let comma = self.eat(&Tok::Comma);
            match self.optional_var_or_iri()? {
                Some(t) => out.push(t),
                None if comma => return self.unexpected(&["IRI", "variable"]),
                None => return Ok(out),
            }
        }
    }

    // ---- group patterns ----

    fn group(&mut self, ctx: Ctx) -> PResult<GroupPattern> {
        self.expect(Tok::LBrace, "{")?;
        let mut elements: Vec<Element> = Vec::new();
        loop {
            let pos = self.pos();
            match self.peek().clone() {
                Tok::RBrace => {
                    self.advance();
                    return Ok(GroupPattern { elements });
                }
                Tok::Dot => {
                    self.advance();
                }
                Tok::Eof => return self.unexpected(&["}"]),
                Tok::LBrace => {
                    let mut branches = vec![self.group(ctx)?];
                    while self.eat_kw("UNION") {
                        branches.push(self.group(ctx)?);
                    }
                    elements.push(if branches.len() == 1 {
                        Element::Group(branches.pop().expect("one branch"))
                    } else {
                        Element::Union(branches)
                    });
                }
                _ if self.eat_kw("OPTIONAL") => elements.push(Element::Optional(self.group(ctx)?)),
                _ if self.eat_kw("FILTER") => elements.push(Element::Filter(self.filter()?)),
                _ if self.eat_kw("GRAPH") => {
                    let name = self.var_or_iri()?;
                    let pattern = self.group(Ctx::Graph)?;
                    elements.push(Element::Graph { name, pattern });
                }
                _ if self.archive_keyword("RECATT")? => {
                    return Err(Diagnostic::error("RECATT outside RECORD").at(pos));
                }
                _ if self.archive_keyword("RECORD")? => {
                    if ctx == Ctx::Changes {
                        return Err(Diagnostic::error("RECORD inside CHANGES").at(pos));
                    }
                    elements.push(Element::Record(self.record_block()?));
                }
                _ if self.archive_keyword("CHANGE")? => {
                    match ctx {
                        Ctx::Dataset => return Err(Diagnostic::error("CHANGE inside DATASET").at(pos)),
                        Ctx::Graph => return Err(Diagnostic::error("CHANGE inside GRAPH").at(pos)),
                        Ctx::Root | Ctx::Changes => {}
                    }
                    let (block, extra) = self.change_block()?;
                    elements.push(Element::Change(block));
                    if !extra.is_empty() {
                        push_triples(&mut elements, extra);
                    }
                }
                _ if self.archive_keyword("DATASET")? => {
                    let dataset = Some(self.var_or_iri()?);
                    let versions = self.version_selector()?;
                    let pattern = self.group(Ctx::Dataset)?;
                    elements.push(Element::Dataset(ScopeBlock {
                        dataset,
                        versions,
                        pattern,
                    }));
                }
                _ if self.archive_keyword("CHANGES")? => {
                    let dataset = self.optional_var_or_iri()?;
                    let versions = self.version_selector()?;
                    let pattern = self.group(Ctx::Changes)?;
                    elements.push(Element::Changes(ScopeBlock {
                        dataset,
                        versions,
                        pattern,
                    }));
                }
                _ => {
                    let mut triples = Vec::new();
                    self.triples_same_subject(&mut triples)?;
                    push_triples(&mut elements, triples);
                    if !matches!(self.peek(), Tok::Dot | Tok::RBrace) && !self.at_element_keyword() {
                        return self.unexpected(&[".", "}"]);
                    }
                }
            }
        }
    }

    fn at_element_keyword(&self) -> bool {
        matches!(self.peek(), Tok::LBrace)
            || ["OPTIONAL", "FILTER", "GRAPH", "RECORD", "RECATT", "CHANGE", "DATASET", "CHANGES"]
                .iter()
                .any(|k| self.is_kw(k))
    }

    fn record_block(&mut self) -> PResult<RecordBlock> {
        let record = self.var_or_iri()?;
        self.expect(Tok::LBrace, "{")?;
        let subject = self.var_or_term()?;
        let mut members = Vec::new();
        loop {
            let pos = self.pos();
            match self.peek().clone() {
                Tok::RBrace => {
                    self.advance();
                    break;
                }
                Tok::Dot | Tok::Semicolon => {
                    self.advance();
                }
                _ if self.archive_keyword("RECATT")? => {
                    let attribute = self.var_or_iri()?;
                    self.expect(Tok::LBrace, "{")?;
                    let predicate = self.verb()?;
                    let object = self.var_or_term()?;
                    self.eat(&Tok::Dot);
                    self.expect(Tok::RBrace, "}")?;
                    members.push(RecordMember::Recatt {
                        attribute,
                        predicate,
                        object,
                    });
                }
                _ if self.is_kw("CHANGE") => {
                    return Err(Diagnostic::error("CHANGE inside RECORD").at(pos));
                }
                _ if self.is_kw("RECORD") => {
                    return Err(Diagnostic::error("RECORD inside RECORD").at(pos));
                }
                _ => {
                    let predicate = self.verb()?;
                    loop {
                        let object = self.var_or_term()?;
                        members.push(RecordMember::Attribute {
                            predicate: predicate.clone(),
                            object,
                        });
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
            }
        }
        if let TermPattern::Term(t) = &subject {
            if t.is_literal() {
                return Err(Diagnostic::error(format!("literal {t} cannot be a record subject")));
            }
        }
        Ok(RecordBlock {
            record,
            subject,
            members,
        })
    }

    /// Returns the block plus triples produced by bracket sugar in
    /// parameter values.
    fn change_block(&mut self) -> PResult<(ChangeBlock, Vec<TriplePattern>)> {
        let change = self.var_or_iri()?;
        self.expect(Tok::LBrace, "{")?;
        let mut parameters = Vec::new();
        let mut extra = Vec::new();
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.advance();
                    break;
                }
                Tok::Dot | Tok::Semicolon => {
                    self.advance();
                }
                _ => {
                    let p = self.verb()?;
                    loop {
                        let o = self.object(&mut extra)?;
                        parameters.push((p.clone(), o));
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
            }
        }
        Ok((ChangeBlock { change, parameters }, extra))
    }

    // ---- triples ----

    fn triples_same_subject(&mut self, out: &mut Vec<TriplePattern>) -> PResult<()> {
        if *self.peek() == Tok::LBracket {
            let subject = self.bracket(out)?;
            if self.verb_ahead() {
                self.property_list(&subject, out, false)?;
            }
            return Ok(());
        }
        let pos = self.pos();
        let subject = self.var_or_term()?;
        if matches!(&subject, TermPattern::Term(t) if t.is_literal()) {
            return Err(Diagnostic::error(format!("literal {subject} in subject position")).at(pos));
        }
        self.property_list(&subject, out, false)
    }

    /// `[ ... ]` as a node: a fresh variable plus the inner triples.
    fn bracket(&mut self, out: &mut Vec<TriplePattern>) -> PResult<TermPattern> {
        self.expect(Tok::LBracket, "[")?;
        let node = TermPattern::Var(self.fresh_var());
        if !self.eat(&Tok::RBracket) {
            self.property_list(&node, out, true)?;
            self.expect(Tok::RBracket, "]")?;
        }
        Ok(node)
    }

    fn verb_ahead(&self) -> bool {
        matches!(self.peek(), Tok::Var(_) | Tok::Iri(_) | Tok::PName { .. }) || self.is_kw("a")
    }

    fn property_list(&mut self, subject: &TermPattern, out: &mut Vec<TriplePattern>, in_bracket: bool) -> PResult<()> {
        loop {
            let predicate = self.verb()?;
            loop {
                let object = self.object(out)?;
                out.push(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            let mut separated = false;
            while *self.peek() == Tok::Semicolon || (in_bracket && *self.peek() == Tok::Dot) {
                self.advance();
                separated = true;
            }
            if !separated || !self.verb_ahead() {
                return Ok(());
            }
        }
    }

    fn object(&mut self, out: &mut Vec<TriplePattern>) -> PResult<TermPattern> {
        if *self.peek() == Tok::LBracket {
            self.bracket(out)
        } else {
            self.var_or_term()
        }
    }

    fn verb(&mut self) -> PResult<TermPattern> {
        if self.eat_kw("a") {
            return Ok(TermPattern::Term(Term::iri_unchecked(rdf::TYPE)));
        }
        match self.peek() {
            Tok::Var(_) | Tok::Iri(_) | Tok::PName { .. } => self.var_or_iri(),
            _ => self.unexpected(&["predicate"]),
        }
    }

    // ---- terms ----

    fn var(&mut self) -> PResult<Variable> {
        let pos = self.pos();
        if let Tok::Var(name) = self.peek().clone() {
            self.advance();
            self.make_var(&name, pos)
        } else {
            self.unexpected(&["variable"])
        }
    }

    fn make_var(&self, name: &str, pos: Position) -> PResult<Variable> {
        if self.dialect == Dialect::Diachron && name.starts_with("_d_") {
            return Err(Diagnostic::error(format!("variable ?{name} uses a reserved prefix")).at(pos));
        }
        Variable::new(name).map_err(|e| Diagnostic::error(e.to_string()).at(pos))
    }

    fn iri_ref(&mut self) -> PResult<String> {
        if let Tok::Iri(raw) = self.peek().clone() {
            self.advance();
            Ok(self.resolve(&raw))
        } else {
            self.unexpected(&["IRI"])
        }
    }

    fn resolve(&self, raw: &str) -> String {
        if is_absolute_iri(raw) {
            raw.to_owned()
        } else {
            format!("{}{}", self.base, raw)
        }
    }

    fn make_iri(&self, value: &str, pos: Position) -> PResult<Term> {
        Term::iri(value).map_err(|e| Diagnostic::error(e.to_string()).at(pos))
    }

    fn optional_var_or_iri(&mut self) -> PResult<Option<TermPattern>> {
        match self.peek() {
            Tok::Var(_) | Tok::Iri(_) | Tok::PName { .. } => self.var_or_iri().map(Some),
            _ => Ok(None),
        }
    }

    fn var_or_iri(&mut self) -> PResult<TermPattern> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Var(name) => {
                self.advance();
                Ok(TermPattern::Var(self.make_var(&name, pos)?))
            }
            Tok::Iri(raw) => {
                self.advance();
                Ok(TermPattern::Term(self.make_iri(&self.resolve(&raw), pos)?))
            }
            Tok::PName { prefix, local } => {
                self.advance();
                Ok(TermPattern::Term(self.pname(&prefix, &local, pos)?))
            }
            _ => self.unexpected(&["IRI", "variable"]),
        }
    }

    fn pname(&self, prefix: &str, local: &str, pos: Position) -> PResult<Term> {
        let ns = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| Diagnostic::error(format!("unknown prefix '{prefix}:'")).at(pos))?;
        self.make_iri(&format!("{ns}{local}"), pos)
    }

    fn var_or_term(&mut self) -> PResult<TermPattern> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Var(_) | Tok::Iri(_) | Tok::PName { .. } => self.var_or_iri(),
            Tok::Blank(label) => {
                self.advance();
                let name = format!("_b__{}", label.replace('-', "_"));
                Ok(TermPattern::Var(self.make_var(&name, pos)?))
            }
            _ => Ok(TermPattern::Term(self.literal()?)),
        }
    }

    fn literal(&mut self) -> PResult<Term> {
        let pos = self.pos();
        let lit = match self.peek().clone() {
            Tok::Str(s) => {
                self.advance();
                match self.peek().clone() {
                    Tok::LangTag(tag) => {
                        self.advance();
                        Literal::lang(s, tag)
                    }
                    Tok::Caret2 => {
                        self.advance();
                        let dpos = self.pos();
                        match self.var_or_iri()? {
                            TermPattern::Term(Term::Iri(dt)) => Literal::typed(s, &*dt),
                            _ => return Err(Diagnostic::error("datatype must be an IRI").at(dpos)),
                        }
                    }
                    _ => Literal::string(s),
                }
            }
            Tok::Integer(n) => {
                self.advance();
                Literal::typed(n, xsd::INTEGER)
            }
            Tok::Decimal(n) => {
                self.advance();
                Literal::typed(n, xsd::DECIMAL)
            }
            Tok::Double(n) => {
                self.advance();
                Literal::typed(n, xsd::DOUBLE)
            }
            Tok::Word(w) if w == "true" || w == "false" => {
                self.advance();
                Literal::typed(w, xsd::BOOLEAN)
            }
            Tok::Word(w) if KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(&w)) => {
                return Err(Diagnostic::error(format!("unexpected keyword {}", w.to_uppercase()))
                    .at(pos)
                    .expecting(["term"]));
            }
            _ => return self.unexpected(&["IRI", "variable", "literal"]),
        };
        Ok(Term::literal(lit))
    }

    // ---- filters ----

    fn filter(&mut self) -> PResult<FilterExpr> {
        if *self.peek() == Tok::LParen {
            self.advance();
            let e = self.or_expr()?;
            self.expect(Tok::RParen, ")")?;
            Ok(e)
        } else if self.is_kw("BOUND") || self.is_kw("REGEX") || self.is_kw("STR") {
            self.primary()
        } else {
            self.unexpected(&["(", "BOUND", "REGEX"])
        }
    }

    fn or_expr(&mut self) -> PResult<FilterExpr> {
        let mut e = self.and_expr()?;
        while self.eat(&Tok::Or) {
            e = FilterExpr::Or(Box::new(e), Box::new(self.and_expr()?));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> PResult<FilterExpr> {
        let mut e = self.rel_expr()?;
        while self.eat(&Tok::And) {
            e = FilterExpr::And(Box::new(e), Box::new(self.rel_expr()?));
        }
        Ok(e)
    }

    fn rel_expr(&mut self) -> PResult<FilterExpr> {
        let lhs = self.unary()?;
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return Ok(lhs),
        };
        self.advance();
        let rhs = self.unary()?;
        Ok(FilterExpr::compare(op, lhs, rhs))
    }

    fn unary(&mut self) -> PResult<FilterExpr> {
        if self.eat(&Tok::Bang) {
            return Ok(FilterExpr::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<FilterExpr> {
        if self.eat(&Tok::LParen) {
            let e = self.or_expr()?;
            self.expect(Tok::RParen, ")")?;
            return Ok(e);
        }
        if self.eat_kw("BOUND") {
            self.expect(Tok::LParen, "(")?;
            let v = self.var()?;
            self.expect(Tok::RParen, ")")?;
            return Ok(FilterExpr::Bound(v));
        }
        if self.eat_kw("STR") {
            self.expect(Tok::LParen, "(")?;
            let e = self.or_expr()?;
            self.expect(Tok::RParen, ")")?;
            return Ok(FilterExpr::Str(Box::new(e)));
        }
        if self.eat_kw("REGEX") {
            self.expect(Tok::LParen, "(")?;
            let text = self.or_expr()?;
            self.expect(Tok::Comma, ",")?;
            let pattern = self.or_expr()?;
            let flags = if self.eat(&Tok::Comma) {
                Some(Box::new(self.or_expr()?))
            } else {
                None
            };
            self.expect(Tok::RParen, ")")?;
            return Ok(FilterExpr::Regex(Box::new(text), Box::new(pattern), flags));
        }
        if let Tok::Var(_) = self.peek() {
            return Ok(FilterExpr::Var(self.var()?));
        }
        match self.var_or_term()? {
            TermPattern::Term(t) => Ok(FilterExpr::Term(t)),
            TermPattern::Var(v) => Ok(FilterExpr::Var(v)),
        }
    }
}

fn push_triples(elements: &mut Vec<Element>, triples: Vec<TriplePattern>) {
    if let Some(Element::Triples(last)) = elements.last_mut() {
        last.extend(triples);
    } else {
        elements.push(Element::Triples(triples));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ql::pretty_print;

    fn q(text: &str) -> Query {
        parse(text).unwrap_or_else(|e| panic!("{text}: {e}"))
    }

    fn err(text: &str) -> Diagnostic {
        parse_diagnostic(text, &ParseOptions::default()).unwrap_err()
    }

    #[test]
    fn dataset_at_version_variable() {
        let query = q("SELECT ?version ?p ?o WHERE { DATASET <EFO> AT VERSION ?version { efo:EFO_0004626 ?p ?o } }");
        let [Element::Dataset(block)] = &query.pattern.elements[..] else {
            panic!("{query:?}")
        };
        assert_eq!(block.dataset, Some(TermPattern::Term(Term::iri("http://example.org/EFO").unwrap())));
        assert_eq!(block.versions, VersionSelector::At(TermPattern::Var(Variable::new("version").unwrap())));
        let [Element::Triples(ts)] = &block.pattern.elements[..] else {
            panic!()
        };
        assert_eq!(ts.len(), 1);
    }

    #[test]
    fn plain_sparql_select() {
        let query = q("SELECT ?s WHERE { ?s ?p ?o }");
        assert!(query.sources.is_empty());
        assert!(matches!(&query.pattern.elements[..], [Element::Triples(ts)] if ts.len() == 1));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(err("SELECT ?ra WHERE { RECATT ?ra {?p ?o} }").message, "RECATT outside RECORD");
        assert_eq!(err("SELECT ?r WHERE { RECORD ?r { ?s CHANGE ?c { ?p ?o } } }").message, "CHANGE inside RECORD");
        assert_eq!(err("SELECT ?r WHERE { DATASET <X> { CHANGE ?c { ?p ?o } } }").message, "CHANGE inside DATASET");
        assert_eq!(err("SELECT ?r WHERE { CHANGES <X> { RECORD ?r { ?s ?p ?o } } }").message, "RECORD inside CHANGES");
        assert!(err("SELECT ?s FROM DATASET <a> FROM DATASET <b> WHERE { ?s ?p ?o }").message.contains("duplicate"));
    }

    #[test]
    fn syntax_error_has_position_and_hint() {
        let d = err("SELECT ?s WHERE { ?s ?p }");
        assert_eq!(d.position.unwrap().column, 25);
        assert!(!d.expected.is_empty());
    }

    #[test]
    fn keywords_are_case_insensitive() {
        assert_eq!(
            q("select ?s where { dataset <EFO> at version <v1> { ?s ?p ?o } }"),
            q("SELECT ?s WHERE { DATASET <EFO> AT VERSION <v1> { ?s ?p ?o } }")
        );
        assert_eq!(q("DIACHRON SELECT ?s WHERE { ?s ?p ?o }"), q("SELECT ?s WHERE { ?s ?p ?o }"));
    }

    #[test]
    fn bracket_sugar_desugars_to_fresh_variables() {
        let query = q("SELECT ?c WHERE { CHANGES <EFO> BETWEEN VERSIONS ?v1, ?v2 { ?c rdf:type co:Add_Definition ; ?p1 [co:param_value ?o3 . rdf:type co:ad_n1] } }");
        let [Element::Changes(block)] = &query.pattern.elements[..] else {
            panic!()
        };
        assert_eq!(block.versions.terms().len(), 2);
        let [Element::Triples(ts)] = &block.pattern.elements[..] else {
            panic!()
        };
        assert_eq!(ts.len(), 4);
        assert!(ts.iter().any(|t| matches!(&t.object, TermPattern::Var(v) if v.is_reserved())));
    }

    #[test]
    fn reserved_helper_variables_only_in_sparql_dialect() {
        assert!(parse("SELECT ?_d_1 WHERE { ?_d_1 ?p ?o }").is_err());
        let opts = ParseOptions {
            dialect: Dialect::Sparql,
            ..Default::default()
        };
        assert!(parse_with("SELECT ?_d_1 WHERE { ?_d_1 ?p ?o }", &opts).is_ok());
        assert!(parse_with("SELECT ?r WHERE { RECORD ?r { ?s ?p ?o } }", &opts).is_err());
    }

    #[test]
    fn modifiers_and_aggregates() {
        let query = q("SELECT DISTINCT ?v (COUNT(DISTINCT ?r) AS ?n) WHERE { ?r ?p ?v } GROUP BY ?v ORDER BY DESC(?n) ?v LIMIT 5 OFFSET 2");
        assert!(query.distinct);
        assert_eq!(query.group_by.len(), 1);
        assert_eq!(query.order_by.len(), 2);
        assert!(query.order_by[0].descending);
        assert_eq!((query.limit, query.offset), (Some(5), Some(2)));
    }

    #[test]
    fn filters() {
        let query = q(r#"SELECT ?s WHERE { ?s ?p ?o FILTER (?o != "x" && !bound(?q) || regex(str(?o), "^a", "i")) OPTIONAL { ?s ?q ?w } }"#);
        assert!(matches!(query.pattern.elements[1], Element::Filter(FilterExpr::Or(..))));
        assert!(matches!(query.pattern.elements[2], Element::Optional(_)));
    }

    #[test]
    fn pretty_print_fixpoint() {
        for text in [
            "SELECT * WHERE { { ?s ?p ?o } UNION { ?s a efo:Protein } OPTIONAL { ?s rdfs:label \"x\"@en } FILTER (?o > 3) }",
            "SELECT ?rec ?ra ?p ?o FROM DATASET <EFO> WHERE { RECORD ?rec {efo:EFO_0004626 RECATT ?ra {?p ?o} } }",
            "SELECT ?x FROM CHANGES <EFO> BETWEEN VERSIONS <a> <b> WHERE { CHANGE ?c { ?p [ co:x ?o ] } ?x ?y 1.5 }",
            "SELECT ?g WHERE { GRAPH ?g { ?s ?p \"q\\\"t\\n\" } CHANGES { ?s ?p ?o } }",
        ] {
            let a = q(text);
            let printed = pretty_print(&a);
            assert_eq!(q(&printed), a, "{printed}");
        }
    }

    #[test]
    fn relative_iris_use_base() {
        let query = parse_with(
            "SELECT ?s FROM DATASET <EFO> WHERE { ?s ?p ?o }",
            &ParseOptions {
                base: "http://b/".into(),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(query.sources[0].dataset, Some(TermPattern::Term(Term::iri("http://b/EFO").unwrap())));
    }
}
