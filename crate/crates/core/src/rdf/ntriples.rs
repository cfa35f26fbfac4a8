//! Line-based N-Triples and N-Quads reading and canonical writing.
//!
//! Canonical output is one statement per line with the lines sorted
//! bytewise, so equal graphs always serialize to identical text.

use super::graph::Graph;
use super::term::{Literal, Term, Triple};
use crate::error::{Error, Result};
use crate::vocab::xsd;

/// Parses an N-Triples document. Duplicate lines collapse.
pub fn parse_ntriples(text: &str) -> Result<Graph> {
    let mut graph = Graph::new();
    for (idx, line) in text.lines().enumerate() {
        let mut cursor = LineCursor::new(line, idx + 1);
        cursor.skip_ws();
        if cursor.at_end_or_comment() {
            continue;
        }
        let triple = cursor.statement_triple()?;
        cursor.finish_statement()?;
        graph.insert(triple);
    }
    Ok(graph)
}

/// Parses an N-Quads document into `(graph name, triple)` pairs. Quads
/// without a graph label are rejected; the archive only stores named graphs.
pub fn parse_nquads(text: &str) -> Result<Vec<(Term, Triple)>> {
    let mut quads = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let mut cursor = LineCursor::new(line, idx + 1);
        cursor.skip_ws();
        if cursor.at_end_or_comment() {
            continue;
        }
        let triple = cursor.statement_triple()?;
        cursor.skip_ws();
        let graph = cursor.term()?;
        if !graph.is_iri() {
            return Err(cursor.error("graph label must be an IRI"));
        }
        cursor.finish_statement()?;
        quads.push((graph, triple));
    }
    Ok(quads)
}

/// Parses a single N-Triples term such as `<http://a>` or `"x"@en`.
pub fn parse_term(text: &str) -> Result<Term> {
    let mut cursor = LineCursor::new(text, 1);
    cursor.skip_ws();
    let term = cursor.term()?;
    cursor.skip_ws();
    if !cursor.at_end() {
        return Err(cursor.error("trailing characters after term"));
    }
    Ok(term)
}

/// Canonical N-Triples: one line per triple, lines sorted bytewise.
pub fn serialize_ntriples(graph: &Graph) -> String {
    let mut lines: Vec<String> = graph.iter().map(|t| t.to_string()).collect();
    lines.sort_unstable();
    join_lines(lines)
}

/// Canonical N-Quads over `(graph, triple)` pairs.
pub fn serialize_nquads<'a>(quads: impl IntoIterator<Item = (&'a Term, &'a Triple)>) -> String {
    let mut lines: Vec<String> = quads
        .into_iter()
        .map(|(g, t)| format!("{} {} {} {} .", t.subject, t.predicate, t.object, g))
        .collect();
    lines.sort_unstable();
    lines.dedup();
    join_lines(lines)
}

fn join_lines(lines: Vec<String>) -> String {
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

struct LineCursor<'a> {
    line: &'a str,
    pos: usize,
    line_no: usize,
}

impl<'a> LineCursor<'a> {
    fn new(line: &'a str, line_no: usize) -> Self {
        Self {
            line,
            pos: 0,
            line_no,
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line_no,
            column: self.line[..self.pos.min(self.line.len())].chars().count() + 1,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.line[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
            self.pos += 1;
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.line.len()
    }

    fn at_end_or_comment(&self) -> bool {
        self.at_end() || self.peek() == Some('#')
    }

    fn statement_triple(&mut self) -> Result<Triple> {
        let subject = self.term()?;
        if subject.is_literal() {
            return Err(self.error("literal in subject position"));
        }
        self.skip_ws();
        let predicate = self.term()?;
        if !predicate.is_iri() {
            return Err(self.error("predicate must be an IRI"));
        }
        self.skip_ws();
        let object = self.term()?;
        Ok(Triple::new_unchecked(subject, predicate, object))
    }

    fn finish_statement(&mut self) -> Result<()> {
        self.skip_ws();
        if self.bump() != Some('.') {
            return Err(self.error("expected '.' at end of statement"));
        }
        self.skip_ws();
        if !self.at_end_or_comment() {
            return Err(self.error("unexpected characters after '.'"));
        }
        Ok(())
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek() {
            Some('<') => {
                let iri = self.iri_ref()?;
                Term::iri(&iri).map_err(|_| self.error(format!("relative IRI <{iri}>")))
            }
            Some('_') => self.blank(),
            Some('"') => self.literal(),
            Some(c) => Err(self.error(format!("unexpected character {c:?}"))),
            None => Err(self.error("unexpected end of line")),
        }
    }

    fn iri_ref(&mut self) -> Result<String> {
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated IRI")),
                Some('>') => return Ok(out),
                Some('\\') => out.push(self.unicode_escape()?),
                Some(c) if c == ' ' || c == '<' || c == '"' => {
                    return Err(self.error(format!("invalid character {c:?} in IRI")))
                }
                Some(c) => out.push(c),
            }
        }
    }

    fn unicode_escape(&mut self) -> Result<char> {
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error("invalid escape in IRI")),
        };
        self.hex_char(len)
    }

    fn hex_char(&mut self, len: usize) -> Result<char> {
        let rest = self.rest();
        if rest.len() < len {
            return Err(self.error("truncated unicode escape"));
        }
        let code = u32::from_str_radix(&rest[..len], 16)
            .map_err(|_| self.error("invalid unicode escape"))?;
        self.pos += len;
        char::from_u32(code).ok_or_else(|| self.error("invalid code point"))
    }

    fn blank(&mut self) -> Result<Term> {
        if !self.rest().starts_with("_:") {
            return Err(self.error("expected blank node label"));
        }
        self.pos += 2;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' || c == '.' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        // a trailing '.' terminates the statement, not the label
        while self.pos > start && self.line.as_bytes()[self.pos - 1] == b'.' {
            self.pos -= 1;
        }
        if self.pos == start {
            return Err(self.error("empty blank node label"));
        }
        Ok(Term::blank(&self.line[start..self.pos]))
    }

    fn literal(&mut self) -> Result<Term> {
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated string literal")),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{08}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{0C}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_char(4)?,
                        Some('U') => self.hex_char(8)?,
                        _ => return Err(self.error("invalid string escape")),
                    };
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
            }
        }
        if self.peek() == Some('@') {
            self.bump();
            let start = self.pos;
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == '-' {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.pos == start {
                return Err(self.error("empty language tag"));
            }
            let tag = &self.line[start..self.pos];
            return Ok(Term::Literal(Literal::lang(lexical, tag)));
        }
        if self.rest().starts_with("^^") {
            self.pos += 2;
            if self.peek() != Some('<') {
                return Err(self.error("expected datatype IRI"));
            }
            let datatype = self.iri_ref()?;
            if !super::term::is_absolute_iri(&datatype) {
                return Err(self.error("relative datatype IRI"));
            }
            return Ok(Term::Literal(Literal::typed(lexical, datatype)));
        }
        Ok(Term::Literal(Literal::typed(lexical, xsd::STRING)))
    }
}
