//! Filter expressions: comparisons, boolean connectives, `bound`, `regex`
//! and `str`. Evaluation errors make the whole filter false.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{LazyLock, Mutex};

use regex::{Regex, RegexBuilder};

use super::algebra::Mapping;
use super::term::{Literal, Term, Variable};
use crate::vocab::xsd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FilterExpr {
    Or(Box<FilterExpr>, Box<FilterExpr>),
    And(Box<FilterExpr>, Box<FilterExpr>),
    Not(Box<FilterExpr>),
    Compare(CmpOp, Box<FilterExpr>, Box<FilterExpr>),
    Bound(Variable),
    Regex(Box<FilterExpr>, Box<FilterExpr>, Option<Box<FilterExpr>>),
    Str(Box<FilterExpr>),
    Term(Term),
    Var(Variable),
}

impl FilterExpr {
    pub fn compare(op: CmpOp, a: FilterExpr, b: FilterExpr) -> Self {
        FilterExpr::Compare(op, Box::new(a), Box::new(b))
    }

    pub fn vars(&self, out: &mut Vec<Variable>) {
        match self {
            FilterExpr::Or(a, b) | FilterExpr::And(a, b) | FilterExpr::Compare(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
            FilterExpr::Not(a) | FilterExpr::Str(a) => a.vars(out),
            FilterExpr::Regex(a, b, c) => {
                a.vars(out);
                b.vars(out);
                if let Some(c) = c {
                    c.vars(out);
                }
            }
            FilterExpr::Bound(v) | FilterExpr::Var(v) => out.push(v.clone()),
            FilterExpr::Term(_) => {}
        }
    }
}

impl fmt::Display for FilterExpr {
    /// Fully parenthesized SPARQL syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterExpr::Or(a, b) => write!(f, "({a} || {b})"),
            FilterExpr::And(a, b) => write!(f, "({a} && {b})"),
            FilterExpr::Not(a) => write!(f, "!({a})"),
            FilterExpr::Compare(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            FilterExpr::Bound(v) => write!(f, "bound({v})"),
            FilterExpr::Regex(a, b, None) => write!(f, "regex({a}, {b})"),
            FilterExpr::Regex(a, b, Some(c)) => write!(f, "regex({a}, {b}, {c})"),
            FilterExpr::Str(a) => write!(f, "str({a})"),
            FilterExpr::Term(t) => t.fmt(f),
            FilterExpr::Var(v) => v.fmt(f),
        }
    }
}

#[derive(Debug, Clone)]
enum Value {
    Bool(bool),
    Term(Term),
}

struct EvalError;

type EvalResult = Result<Value, EvalError>;

/// True iff `expr` evaluates to true under `m`; errors count as false.
pub fn eval_filter(expr: &FilterExpr, m: &Mapping) -> bool {
    matches!(eval(expr, m).and_then(|v| ebv(&v)), Ok(true))
}

fn eval(expr: &FilterExpr, m: &Mapping) -> EvalResult {
    match expr {
        FilterExpr::Term(t) => Ok(Value::Term(t.clone())),
        FilterExpr::Var(v) => m.get(v).cloned().map(Value::Term).ok_or(EvalError),
        FilterExpr::Bound(v) => Ok(Value::Bool(m.contains(v))),
        FilterExpr::Not(a) => Ok(Value::Bool(!ebv(&eval(a, m)?)?)),
        FilterExpr::Or(a, b) => {
            let l = eval(a, m).and_then(|v| ebv(&v));
            let r = eval(b, m).and_then(|v| ebv(&v));
            match (l, r) {
                (Ok(true), _) | (_, Ok(true)) => Ok(Value::Bool(true)),
                (Ok(false), Ok(false)) => Ok(Value::Bool(false)),
                _ => Err(EvalError),
            }
        }
        FilterExpr::And(a, b) => {
            let l = eval(a, m).and_then(|v| ebv(&v));
            let r = eval(b, m).and_then(|v| ebv(&v));
            match (l, r) {
                (Ok(false), _) | (_, Ok(false)) => Ok(Value::Bool(false)),
                (Ok(true), Ok(true)) => Ok(Value::Bool(true)),
                _ => Err(EvalError),
            }
        }
        FilterExpr::Compare(op, a, b) => {
            let l = as_term(eval(a, m)?);
            let r = as_term(eval(b, m)?);
            compare(*op, &l, &r).map(Value::Bool)
        }
        FilterExpr::Str(a) => match as_term(eval(a, m)?) {
            Term::Iri(iri) => Ok(Value::Term(Term::string(&*iri))),
            Term::Literal(l) => Ok(Value::Term(Term::string(l.lexical()))),
            Term::Blank(_) => Err(EvalError),
        },
        FilterExpr::Regex(text, pattern, flags) => {
            let text = string_value(&as_term(eval(text, m)?))?;
            let pattern = string_value(&as_term(eval(pattern, m)?))?;
            let flags = match flags {
                Some(f) => string_value(&as_term(eval(f, m)?))?,
                None => String::new(),
            };
            let re = compiled_regex(&pattern, &flags)?;
            Ok(Value::Bool(re.is_match(&text)))
        }
    }
}

fn as_term(v: Value) -> Term {
    match v {
        Value::Term(t) => t,
        Value::Bool(b) => Term::Literal(Literal::typed(b.to_string(), xsd::BOOLEAN)),
    }
}

fn string_value(t: &Term) -> Result<String, EvalError> {
    match t {
        Term::Literal(l) if l.datatype() == xsd::STRING || l.language().is_some() => {
            Ok(l.lexical().to_owned())
        }
        _ => Err(EvalError),
    }
}

/// Effective boolean value.
fn ebv(v: &Value) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(*b),
        Value::Term(Term::Literal(l)) => {
            if l.datatype() == xsd::BOOLEAN {
                match l.lexical() {
                    "true" | "1" => Ok(true),
                    "false" | "0" => Ok(false),
                    _ => Err(EvalError),
                }
            } else if let Some(n) = l.numeric_value() {
                Ok(n != 0.0 && !n.is_nan())
            } else if xsd::is_numeric(l.datatype()) {
                Err(EvalError)
            } else if l.datatype() == xsd::STRING || l.language().is_some() {
                Ok(!l.lexical().is_empty())
            } else {
                Err(EvalError)
            }
        }
        Value::Term(_) => Err(EvalError),
    }
}

fn compare(op: CmpOp, l: &Term, r: &Term) -> Result<bool, EvalError> {
    let ln = l.as_literal().and_then(Literal::numeric_value);
    let rn = r.as_literal().and_then(Literal::numeric_value);
    if let (Some(a), Some(b)) = (ln, rn) {
        return Ok(match a.partial_cmp(&b) {
            Some(ord) => op.holds(ord),
            None => op == CmpOp::Ne,
        });
    }
    match op {
        CmpOp::Eq => Ok(l == r),
        CmpOp::Ne => Ok(l != r),
        _ => match (l, r) {
            (Term::Literal(a), Term::Literal(b)) if ln.is_none() && rn.is_none() => {
                Ok(op.holds(a.lexical().as_bytes().cmp(b.lexical().as_bytes())))
            }
            _ => Err(EvalError),
        },
    }
}

static REGEX_CACHE: LazyLock<Mutex<HashMap<(String, String), Option<Regex>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn compiled_regex(pattern: &str, flags: &str) -> Result<Regex, EvalError> {
    let key = (pattern.to_owned(), flags.to_owned());
    let mut cache = REGEX_CACHE.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(entry) = cache.get(&key) {
        return entry.clone().ok_or(EvalError);
    }
    let mut builder = RegexBuilder::new(pattern);
    let mut valid_flags = true;
    for c in flags.chars() {
        match c {
            'i' => {
                builder.case_insensitive(true);
            }
            'm' => {
                builder.multi_line(true);
            }
            's' => {
                builder.dot_matches_new_line(true);
            }
            'x' => {
                builder.ignore_whitespace(true);
            }
            _ => valid_flags = false,
        }
    }
    let compiled = if valid_flags { builder.build().ok() } else { None };
    if cache.len() > 1024 {
        cache.clear();
    }
    cache.insert(key, compiled.clone());
    compiled.ok_or(EvalError)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(n: &str) -> Variable {
        Variable::new(n).unwrap()
    }

    fn o_is(t: Term) -> Mapping {
        Mapping::new().with(var("o"), t)
    }

    fn lit_int(n: i64) -> FilterExpr {
        FilterExpr::Term(Term::Literal(Literal::integer(n)))
    }

    #[test]
    fn string_equality() {
        let e = FilterExpr::compare(CmpOp::Eq, FilterExpr::Var(var("o")), FilterExpr::Term(Term::string("liver")));
        assert!(eval_filter(&e, &o_is(Term::string("liver"))));
        assert!(!eval_filter(&e, &o_is(Term::string("LIVER"))));
    }

    #[test]
    fn type_error_is_false() {
        let e = FilterExpr::compare(CmpOp::Lt, FilterExpr::Var(var("o")), lit_int(5));
        assert!(!eval_filter(&e, &o_is(Term::string("liver"))));
        // negation of an error is still an error
        let n = FilterExpr::Not(Box::new(e));
        assert!(!eval_filter(&n, &o_is(Term::string("liver"))));
    }

    #[test]
    fn unbound_variable_is_false() {
        let e = FilterExpr::compare(CmpOp::Eq, FilterExpr::Var(var("z")), lit_int(1));
        assert!(!eval_filter(&e, &Mapping::new()));
        assert!(!eval_filter(&FilterExpr::Bound(var("z")), &Mapping::new()));
        assert!(eval_filter(&FilterExpr::Bound(var("o")), &o_is(lit_term(1))));
    }

    fn lit_term(n: i64) -> Term {
        Term::Literal(Literal::integer(n))
    }

    #[test]
    fn regex_anchor() {
        let e = FilterExpr::Regex(
            Box::new(FilterExpr::Var(var("o"))),
            Box::new(FilterExpr::Term(Term::string("^LIV"))),
            None,
        );
        assert!(eval_filter(&e, &o_is(Term::string("LIVER"))));
        assert!(!eval_filter(&e, &o_is(Term::string("liver"))));
        let ci = FilterExpr::Regex(
            Box::new(FilterExpr::Var(var("o"))),
            Box::new(FilterExpr::Term(Term::string("^LIV"))),
            Some(Box::new(FilterExpr::Term(Term::string("i")))),
        );
        assert!(eval_filter(&ci, &o_is(Term::string("liver"))));
        // IRIs are not strings
        assert!(!eval_filter(&e, &o_is(Term::iri("http://LIV").unwrap())));
    }

    #[test]
    fn numeric_comparison_across_datatypes() {
        let dec = Term::Literal(Literal::typed("5.0", xsd::DECIMAL));
        let e = FilterExpr::compare(CmpOp::Eq, FilterExpr::Var(var("o")), lit_int(5));
        assert!(eval_filter(&e, &o_is(dec.clone())));
        let lt = FilterExpr::compare(CmpOp::Lt, FilterExpr::Var(var("o")), lit_int(10));
        assert!(eval_filter(&lt, &o_is(dec)));
    }

    #[test]
    fn bytewise_string_ordering() {
        let e = FilterExpr::compare(
            CmpOp::Lt,
            FilterExpr::Term(Term::string("LIVER")),
            FilterExpr::Term(Term::string("liver")),
        );
        assert!(eval_filter(&e, &Mapping::new()));
    }

    #[test]
    fn logical_connectives_absorb_errors() {
        let err = FilterExpr::compare(CmpOp::Lt, FilterExpr::Var(var("z")), lit_int(1));
        let t = FilterExpr::Bound(var("o"));
        let m = o_is(lit_term(1));
        assert!(eval_filter(&FilterExpr::Or(Box::new(err.clone()), Box::new(t.clone())), &m));
        assert!(!eval_filter(&FilterExpr::And(Box::new(err), Box::new(t)), &m));
    }

    #[test]
    fn display_is_parenthesized() {
        let e = FilterExpr::And(
            Box::new(FilterExpr::compare(CmpOp::Ne, FilterExpr::Var(var("a")), lit_int(1))),
            Box::new(FilterExpr::Not(Box::new(FilterExpr::Bound(var("b"))))),
        );
        assert_eq!(
            e.to_string(),
            "((?a != \"1\"^^<http://www.w3.org/2001/XMLSchema#integer>) && !(bound(?b)))"
        );
    }
}
