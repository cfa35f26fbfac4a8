use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vocab::{rdf, xsd};

/// An RDF literal: lexical form plus datatype, with an optional language tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: Arc<str>,
    datatype: Arc<str>,
    language: Option<Arc<str>>,
}

impl Literal {
    /// A plain `xsd:string` literal.
    pub fn string(lexical: impl AsRef<str>) -> Self {
        Self {
            lexical: Arc::from(lexical.as_ref()),
            datatype: Arc::from(xsd::STRING),
            language: None,
        }
    }

    pub fn typed(lexical: impl AsRef<str>, datatype: impl AsRef<str>) -> Self {
        Self {
            lexical: Arc::from(lexical.as_ref()),
            datatype: Arc::from(datatype.as_ref()),
            language: None,
        }
    }

    /// A language-tagged string; the tag is normalized to lowercase.
    pub fn lang(lexical: impl AsRef<str>, tag: impl AsRef<str>) -> Self {
        Self {
            lexical: Arc::from(lexical.as_ref()),
            datatype: Arc::from(rdf::LANG_STRING),
            language: Some(Arc::from(tag.as_ref().to_ascii_lowercase().as_str())),
        }
    }

    pub fn integer(value: i64) -> Self {
        Self::typed(value.to_string(), xsd::INTEGER)
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &str {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    /// Numeric value for the XSD numeric datatypes, `None` otherwise or when
    /// the lexical form does not parse.
    pub fn numeric_value(&self) -> Option<f64> {
        if !xsd::is_numeric(&self.datatype) {
            return None;
        }
        let lex = self.lexical.trim();
        match lex {
            "INF" | "+INF" => Some(f64::INFINITY),
            "-INF" => Some(f64::NEG_INFINITY),
            "NaN" => Some(f64::NAN),
            _ => lex.parse::<f64>().ok(),
        }
    }
}

/// An RDF term. Exactly one of the three kinds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Arc<str>),
    Blank(Arc<str>),
    Literal(Literal),
}

impl Term {
    /// Builds an IRI term, rejecting relative references.
    pub fn iri(value: impl AsRef<str>) -> Result<Self> {
        let value = value.as_ref();
        if !is_absolute_iri(value) {
            return Err(Error::InvalidTerm(format!(
                "IRI <{value}> is not absolute"
            )));
        }
        Ok(Term::Iri(Arc::from(value)))
    }

    /// Builds an IRI term without checking that it is absolute. Intended for
    /// compile-time vocabulary constants.
    pub fn iri_unchecked(value: impl AsRef<str>) -> Self {
        Term::Iri(Arc::from(value.as_ref()))
    }

    pub fn blank(label: impl AsRef<str>) -> Self {
        Term::Blank(Arc::from(label.as_ref()))
    }

    pub fn literal(lit: Literal) -> Self {
        Term::Literal(lit)
    }

    pub fn string(lexical: impl AsRef<str>) -> Self {
        Term::Literal(Literal::string(lexical))
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    /// N-Triples syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => {
                f.write_str("<")?;
                write_escaped_iri(f, iri)?;
                f.write_str(">")
            }
            Term::Blank(label) => write!(f, "_:{label}"),
            Term::Literal(lit) => {
                f.write_str("\"")?;
                write_escaped_string(f, lit.lexical())?;
                f.write_str("\"")?;
                if let Some(lang) = lit.language() {
                    write!(f, "@{lang}")
                } else if lit.datatype() != xsd::STRING {
                    f.write_str("^^<")?;
                    write_escaped_iri(f, lit.datatype())?;
                    f.write_str(">")
                } else {
                    Ok(())
                }
            }
        }
    }
}

fn write_escaped_string(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\r' => f.write_str("\\r")?,
            '\t' => f.write_str("\\t")?,
            '\u{08}' => f.write_str("\\b")?,
            '\u{0C}' => f.write_str("\\f")?,
            c if (c as u32) < 0x20 || c as u32 == 0x7F => write!(f, "\\u{:04X}", c as u32)?,
            c => write!(f, "{c}")?,
        }
    }
    Ok(())
}

fn write_escaped_iri(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    for c in s.chars() {
        match c {
            '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => {
                write!(f, "\\u{:04X}", c as u32)?
            }
            c if (c as u32) <= 0x20 => write!(f, "\\u{:04X}", c as u32)?,
            c => write!(f, "{c}")?,
        }
    }
    Ok(())
}

/// True when `value` starts with a URI scheme (`alpha *( alpha / digit / "+" / "-" / "." ) ":"`).
pub fn is_absolute_iri(value: &str) -> bool {
    let mut chars = value.char_indices();
    match chars.next() {
        Some((_, c)) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    for (_, c) in chars {
        if c == ':' {
            return true;
        }
        if !(c.is_ascii_alphanumeric() || c == '+' || c == '-' || c == '.') {
            return false;
        }
    }
    false
}

/// A query variable, stored without the leading `?`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(Arc<str>);

impl Variable {
    pub fn new(name: impl AsRef<str>) -> Result<Self> {
        let name = name.as_ref();
        if !is_valid_var_name(name) {
            return Err(Error::InvalidTerm(format!("invalid variable name {name:?}")));
        }
        Ok(Variable(Arc::from(name)))
    }

    /// Hidden variables used internally by the evaluator and translator.
    pub(crate) fn internal(name: impl AsRef<str>) -> Self {
        Variable(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Variables in the reserved `_b_` / `_d_` namespaces are helper
    /// variables introduced by desugaring or translation.
    pub fn is_reserved(&self) -> bool {
        self.0.starts_with("_b_") || self.0.starts_with("_d_")
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

pub(crate) fn is_valid_var_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c == '_' || c.is_alphanumeric() => {}
        _ => return false,
    }
    chars.all(|c| c == '_' || c.is_alphanumeric() || c == '\u{B7}')
}

/// An RDF triple. Subjects are IRIs or blank nodes, predicates are IRIs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self> {
        if subject.is_literal() {
            return Err(Error::InvalidTerm(format!(
                "literal {subject} cannot be a triple subject"
            )));
        }
        if !predicate.is_iri() {
            return Err(Error::InvalidTerm(format!(
                "{predicate} cannot be a triple predicate"
            )));
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    /// For callers that construct triples from terms already known to be valid.
    pub(crate) fn new_unchecked(subject: Term, predicate: Term, object: Term) -> Self {
        debug_assert!(!subject.is_literal() && predicate.is_iri());
        Triple {
            subject,
            predicate,
            object,
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
