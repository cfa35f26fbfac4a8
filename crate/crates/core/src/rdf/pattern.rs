use std::collections::BTreeSet;
use std::fmt;

use super::algebra::{Mapping, MappingSet};
use super::graph::Graph;
use super::term::{Term, Triple, Variable};
use crate::error::{Error, Result};

/// A term or a variable in a pattern position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermPattern {
    Term(Term),
    Var(Variable),
}

impl TermPattern {
    pub fn var(&self) -> Option<&Variable> {
        match self {
            TermPattern::Var(v) => Some(v),
            TermPattern::Term(_) => None,
        }
    }

    pub fn term(&self) -> Option<&Term> {
        match self {
            TermPattern::Term(t) => Some(t),
            TermPattern::Var(_) => None,
        }
    }

    /// The bound value under `m`, if any.
    pub fn resolve<'a>(&'a self, m: &'a Mapping) -> Option<&'a Term> {
        match self {
            TermPattern::Term(t) => Some(t),
            TermPattern::Var(v) => m.get(v),
        }
    }
}

impl From<Term> for TermPattern {
    fn from(t: Term) -> Self {
        TermPattern::Term(t)
    }
}

impl From<Variable> for TermPattern {
    fn from(v: Variable) -> Self {
        TermPattern::Var(v)
    }
}

impl fmt::Display for TermPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermPattern::Term(t) => t.fmt(f),
            TermPattern::Var(v) => v.fmt(f),
        }
    }
}

/// Whether literals may appear in subject position of a pattern. RDF does
/// not allow it, so the default rejects them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PatternConfig {
    pub allow_literal_subjects: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

impl TriplePattern {
    pub fn new(subject: TermPattern, predicate: TermPattern, object: TermPattern) -> Result<Self> {
        Self::with_config(subject, predicate, object, PatternConfig::default())
    }

    pub fn with_config(
        subject: TermPattern,
        predicate: TermPattern,
        object: TermPattern,
        config: PatternConfig,
    ) -> Result<Self> {
        if let TermPattern::Term(t) = &predicate {
            if !t.is_iri() {
                return Err(Error::InvalidTerm(format!("{t} cannot be a predicate")));
            }
        }
        if let TermPattern::Term(t) = &subject {
            if t.is_literal() && !config.allow_literal_subjects {
                return Err(Error::InvalidTerm(format!(
                    "literal {t} in subject position"
                )));
            }
        }
        Ok(Self {
            subject,
            predicate,
            object,
        })
    }

    pub fn vars(&self) -> impl Iterator<Item = &Variable> {
        [&self.subject, &self.predicate, &self.object]
            .into_iter()
            .filter_map(|p| p.var())
    }

    /// Extends `m` so that this pattern maps onto `t`, or `None` when the
    /// triple does not fit.
    fn extend(&self, m: &Mapping, t: &Triple) -> Option<Mapping> {
        let mut out = m.clone();
        for (pat, term) in [
            (&self.subject, &t.subject),
            (&self.predicate, &t.predicate),
            (&self.object, &t.object),
        ] {
            match pat {
                TermPattern::Term(c) => {
                    if c != term {
                        return None;
                    }
                }
                TermPattern::Var(v) => {
                    if !out.bind(v.clone(), term.clone()) {
                        return None;
                    }
                }
            }
        }
        Some(out)
    }

    /// Heuristic cost: fewer unbound positions first, bound subjects preferred.
    fn selectivity(&self, m: &Mapping) -> u8 {
        let s = self.subject.resolve(m).is_some();
        let p = self.predicate.resolve(m).is_some();
        let o = self.object.resolve(m).is_some();
        match (s, p, o) {
            (true, true, true) => 0,
            (true, true, false) => 1,
            (true, false, _) => 2,
            (false, true, true) => 3,
            (false, false, true) => 4,
            (false, true, false) => 5,
            (false, false, false) => 6,
        }
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// Variables of a pattern list.
pub fn pattern_vars(patterns: &[TriplePattern]) -> BTreeSet<Variable> {
    patterns.iter().flat_map(|p| p.vars().cloned()).collect()
}

/// All mappings extending `seed` under which every pattern maps onto a
/// triple of `graph`.
pub fn match_bgp(graph: &Graph, patterns: &[TriplePattern], seed: &Mapping) -> MappingSet {
    let mut out = MappingSet::new();
    let mut remaining: Vec<&TriplePattern> = patterns.iter().collect();
    search(graph, &mut remaining, seed.clone(), &mut out);
    out
}

fn search(
    graph: &Graph,
    remaining: &mut Vec<&TriplePattern>,
    current: Mapping,
    out: &mut MappingSet,
) {
    if remaining.is_empty() {
        out.insert(current);
        return;
    }
    let (idx, _) = remaining
        .iter()
        .enumerate()
        .min_by_key(|(_, p)| p.selectivity(&current))
        .expect("non-empty");
    let pattern = remaining.swap_remove(idx);
    let s = pattern.subject.resolve(&current).cloned();
    let p = pattern.predicate.resolve(&current).cloned();
    let o = pattern.object.resolve(&current).cloned();
    let extensions: Vec<Mapping> = graph
        .matching(s.as_ref(), p.as_ref(), o.as_ref())
        .filter_map(|t| pattern.extend(&current, t))
        .collect();
    for next in extensions {
        search(graph, remaining, next, out);
    }
    remaining.push(pattern);
    let last = remaining.len() - 1;
    remaining.swap(idx, last);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::algebra::join;
    use crate::rdf::ntriples::parse_ntriples;
    use proptest::prelude::*;

    fn var(n: &str) -> TermPattern {
        TermPattern::Var(Variable::new(n).unwrap())
    }

    fn iri(n: &str) -> TermPattern {
        TermPattern::Term(Term::iri(n).unwrap())
    }

    #[test]
    fn fixture_subject_lookup() {
        let g = parse_ntriples(
            "<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> \"liver\" .\n",
        )
        .unwrap();
        let tp = TriplePattern::new(iri("http://www.ebi.ac.uk/efo/EFO_0000887"), var("p"), var("o")).unwrap();
        let res = match_bgp(&g, &[tp], &Mapping::new());
        assert_eq!(res.len(), 1);
        let m = res.iter().next().unwrap();
        assert_eq!(
            m.get(&Variable::new("p").unwrap()),
            Some(&Term::iri("http://www.w3.org/2000/01/rdf-schema#label").unwrap())
        );
        assert_eq!(m.get(&Variable::new("o").unwrap()), Some(&Term::string("liver")));
    }

    #[test]
    fn empty_pattern_list_yields_seed() {
        let g = Graph::new();
        let seed = Mapping::new().with(Variable::new("x").unwrap(), Term::string("a"));
        assert_eq!(match_bgp(&g, &[], &seed), MappingSet::single(seed));
    }

    #[test]
    fn three_subjects_two_attributes() {
        let mut text = String::new();
        for s in 0..3 {
            for p in 0..2 {
                text.push_str(&format!("<http://s/{s}> <http://p/{p}> \"{s}-{p}\" .\n"));
            }
        }
        let g = parse_ntriples(&text).unwrap();
        // nested-loop oracle: one mapping per triple
        let oracle = g.iter().count();
        let tp = TriplePattern::new(var("s"), var("p"), var("o")).unwrap();
        assert_eq!(match_bgp(&g, &[tp], &Mapping::new()).len(), oracle);
        assert_eq!(oracle, 6);
    }

    #[test]
    fn repeated_variable_must_match_same_term() {
        let g = parse_ntriples("<http://a> <http://p> <http://a> .\n<http://a> <http://p> <http://b> .\n").unwrap();
        let tp = TriplePattern::new(var("x"), var("p"), var("x")).unwrap();
        assert_eq!(match_bgp(&g, &[tp], &Mapping::new()).len(), 1);
    }

    #[test]
    fn literal_subject_rejected_by_default() {
        let lit = TermPattern::Term(Term::string("x"));
        assert!(TriplePattern::new(lit.clone(), var("p"), var("o")).is_err());
        let cfg = PatternConfig {
            allow_literal_subjects: true,
        };
        assert!(TriplePattern::with_config(lit, var("p"), var("o"), cfg).is_ok());
    }

    fn small_graph() -> impl Strategy<Value = Graph> {
        prop::collection::vec((0..4u8, 0..3u8, 0..5u8), 0..30).prop_map(|ts| {
            ts.into_iter()
                .map(|(s, p, o)| {
                    Triple::new(
                        Term::iri(format!("http://n/{s}")).unwrap(),
                        Term::iri(format!("http://p/{p}")).unwrap(),
                        Term::iri(format!("http://n/{o}")).unwrap(),
                    )
                    .unwrap()
                })
                .collect()
        })
    }

    fn small_pattern() -> impl Strategy<Value = TriplePattern> {
        let pos = |prefix: &'static str, n: u8| {
            prop_oneof![
                (0..n).prop_map(move |i| TermPattern::Term(Term::iri(format!("http://{prefix}/{i}")).unwrap())),
                prop::sample::select(vec!["a", "b", "c"]).prop_map(|v| TermPattern::Var(Variable::new(v).unwrap())),
            ]
        };
        (pos("n", 4), pos("p", 3), pos("n", 5))
            .prop_map(|(s, p, o)| TriplePattern::new(s, p, o).unwrap())
    }

    proptest! {
        #[test]
        fn bgp_is_compositional(
            g in small_graph(),
            p1 in prop::collection::vec(small_pattern(), 0..3),
            p2 in prop::collection::vec(small_pattern(), 0..3),
        ) {
            let mut all = p1.clone();
            all.extend(p2.iter().cloned());
            let whole = match_bgp(&g, &all, &Mapping::new());
            let parts = join(&match_bgp(&g, &p1, &Mapping::new()), &match_bgp(&g, &p2, &Mapping::new()));
            prop_assert_eq!(whole, parts);
        }
    }
}
