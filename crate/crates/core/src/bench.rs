//! Synthetic version series and timing of load, retrieve and query
//! operations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::eval::{eval, resolve_scopes};
use crate::model::{Archive, IngestOptions, StoragePolicy};
use crate::ql::{self, Query};
use crate::rdf::{serialize_ntriples, Graph, Literal, Term, Triple};
use crate::vocab::{owl, rdf, rdfs, DEFAULT_BASE};

/// Size series of a generated dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Profile {
    pub versions: usize,
    /// Record attributes in the first and last version.
    pub start: usize,
    pub end: usize,
}

impl Profile {
    pub const SMALL: Profile = Profile {
        versions: 5,
        start: 100,
        end: 1000,
    };
    pub const LARGE: Profile = Profile {
        versions: 10,
        start: 1000,
        end: 10000,
    };

    /// Attribute count of each version, growing linearly.
    pub fn sizes(&self) -> Vec<usize> {
        if self.versions == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) as f64 / (self.versions - 1) as f64;
        (0..self.versions)
            .map(|i| self.start + (step * i as f64).round() as usize)
            .collect()
    }
}

impl FromStr for Profile {
    type Err = Error;

    /// `small`, `large`, or `VERSIONS:START:END`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small" => return Ok(Profile::SMALL),
            "large" => return Ok(Profile::LARGE),
            _ => {}
        }
        let bad = || Error::Archive(format!("invalid profile {s:?}; use small, large or VERSIONS:START:END"));
        let parts: Vec<usize> = s
            .split(':')
            .map(|p| p.parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let [versions, start, end] = parts[..] else {
            return Err(bad());
        };
        if versions == 0 || start == 0 || end < start || (versions > 1 && end == start) {
            return Err(bad());
        }
        Ok(Profile { versions, start, end })
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.versions, self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operation {
    Load,
    Retrieve,
    Query,
}

impl Operation {
    pub const ALL: [Operation; 3] = [Operation::Load, Operation::Retrieve, Operation::Query];

    pub fn name(self) -> &'static str {
        match self {
            Operation::Load => "load",
            Operation::Retrieve => "retrieve",
            Operation::Query => "query",
        }
    }
}

impl FromStr for Operation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "load" => Ok(Operation::Load),
            "retrieve" => Ok(Operation::Retrieve),
            "query" => Ok(Operation::Query),
            _ => Err(Error::Archive(format!("unknown bench operation {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub profile: Profile,
    pub reps: usize,
    pub operations: Vec<Operation>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            profile: Profile::SMALL,
            reps: 10,
            operations: Operation::ALL.to_vec(),
        }
    }
}

/// One measured point: the median over the repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub operation: String,
    /// Version or query the point belongs to.
    pub label: String,
    /// Record attributes involved.
    pub size: usize,
    pub millis: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub runs: Vec<Measurement>,
    /// Regression of time on size for the load and retrieve series; `None`
    /// with fewer than two points.
    pub fits: BTreeMap<String, Option<Fit>>,
}

impl BenchReport {
    pub fn series(&self, operation: &str) -> Vec<&Measurement> {
        self.runs.iter().filter(|m| m.operation == operation).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("operation,label,size,millis\n");
        for m in &self.runs {
            out.push_str(&format!("{},{},{},{:.4}\n", m.operation, m.label, m.size, m.millis));
        }
        for (op, fit) in &self.fits {
            if let Some(f) = fit {
                out.push_str(&format!("# fit {op}: slope={:.6e} intercept={:.4} r2={:.4}\n", f.slope, f.intercept, f.r2));
            } else {
                out.push_str(&format!("# fit {op}: not enough points\n"));
            }
        }
        out
    }
}

/// Least-squares line through the points.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<Fit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sst: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sse: f64 = points.iter().map(|p| (p.1 - (intercept + slope * p.0)).powi(2)).sum();
    let r2 = if sst == 0.0 { 1.0 } else { (1.0 - sse / sst).clamp(0.0, 1.0) };
    Some(Fit { slope, intercept, r2 })
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

pub fn dataset_iri(name: &str) -> Term {
    Term::iri_unchecked(format!("{DEFAULT_BASE}bench/{name}"))
}

pub fn version_iri(name: &str, i: usize) -> Term {
    Term::iri_unchecked(format!("{DEFAULT_BASE}bench/{name}/v{i}"))
}

fn ex(local: &str) -> Term {
    Term::iri_unchecked(format!("{DEFAULT_BASE}bench/{local}"))
}

/// Version `index` of a generated series with `size` record attributes.
/// Subjects carry five attributes each, the first being a label; a rotating
/// two percent of labels change case from one version to the next.
pub fn generate_version(index: usize, size: usize) -> Graph {
    let mut g = Graph::new();
    let class = ex("Entity");
    g.insert(Triple::new_unchecked(class.clone(), Term::iri_unchecked(rdf::TYPE), Term::iri_unchecked(owl::CLASS)));
    g.insert(Triple::new_unchecked(ex("p1"), Term::iri_unchecked(rdfs::DOMAIN), class));
    let label = Term::iri_unchecked(rdfs::LABEL);
    let preds: Vec<Term> = (0..5).map(|j| if j == 0 { label.clone() } else { ex(&format!("p{j}")) }).collect();
    for k in 0..size {
        let s = ex(&format!("s{}", k / 5));
        let p = preds[k % 5].clone();
        let text = if (k + index).is_multiple_of(50) { format!("V{k}") } else { format!("v{k}") };
        let o = if k % 5 == 4 {
            Term::literal(Literal::integer(k as i64))
        } else {
            Term::string(text)
        };
        g.insert(Triple::new_unchecked(s, p, o));
    }
    g
}

pub fn generate_series(profile: &Profile) -> Vec<Graph> {
    profile
        .sizes()
        .into_iter()
        .enumerate()
        .map(|(i, n)| generate_version(i, n))
        .collect()
}

fn options(name: &str, i: usize, policy: StoragePolicy) -> IngestOptions {
    IngestOptions {
        version: Some(version_iri(name, i)),
        date: NaiveDate::from_ymd_opt(2015, 1, 1).map(|d| d + chrono::Days::new(i as u64)),
        policy,
    }
}

/// Loads a series as one dataset. `delta` selects which versions are stored
/// as deltas.
pub fn load_series(archive: &mut Archive, name: &str, series: &[Graph], delta: impl Fn(usize) -> bool) -> Result<()> {
    let d = dataset_iri(name);
    for (i, g) in series.iter().enumerate() {
        let policy = if i > 0 && delta(i) { StoragePolicy::Delta } else { StoragePolicy::Full };
        archive.ingest_version(&d, g, options(name, i, policy))?;
    }
    Ok(())
}

/// The archive the query suite runs on: the series fully materialized under
/// `main`, and again under `mixed` with every other version stored as a
/// delta.
pub fn suite_archive(series: &[Graph]) -> Result<Archive> {
    let mut a = Archive::new();
    load_series(&mut a, "main", series, |_| false)?;
    load_series(&mut a, "mixed", series, |i| i % 2 == 1)?;
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteQuery {
    pub name: &'static str,
    pub text: String,
    /// Queries over non-materialized versions of variable datasets, whose
    /// pre-processing is expected to be expensive.
    pub exempt: bool,
}

/// Fourteen queries covering reified and de-reified patterns, filters,
/// aggregates, ORDER BY, OPTIONAL, unbound predicates, variable datasets
/// and non-materialized versions. `last` is the index of the latest version.
pub fn query_suite(last: usize) -> Vec<SuiteQuery> {
    let d = dataset_iri("main");
    let v = version_iri("main", last);
    let v0 = version_iri("main", 0);
    let mixed = dataset_iri("mixed");
    let s1 = ex("s1");
    let p = |j: usize| ex(&format!("p{j}"));
    let label = Term::iri_unchecked(rdfs::LABEL);
    let q = |name, text: String, exempt| SuiteQuery { name, text, exempt };
    vec![
        q("Q1", format!("SELECT DISTINCT ?r WHERE {{ DATASET {d} AT VERSION {v} {{ RECORD ?r {{ ?s {label} ?o }} }} }}"), false),
        q("Q2", format!("SELECT DISTINCT ?r ?o WHERE {{ DATASET {d} AT VERSION {v} {{ RECORD ?r {{ {s1} {} ?o }} }} }}", p(1)), false),
        q("Q3", format!("SELECT DISTINCT ?s ?ra WHERE {{ DATASET {d} AT VERSION {v} {{ RECORD ?r {{ ?s RECATT ?ra {{ {} ?o }} }} }} }}", p(2)), false),
        q("Q4", format!("SELECT DISTINCT ?r ?s WHERE {{ DATASET {d} AT VERSION {v} {{ RECORD ?r {{ ?s {label} ?o . {} ?o2 }} }} }}", p(1)), false),
        q("Q5", format!("SELECT DISTINCT ?v ?r WHERE {{ DATASET {d} AT VERSION ?v {{ RECORD ?r {{ {s1} {label} ?o }} }} }}"), false),
        q("Q6", format!("SELECT DISTINCT ?v ?o WHERE {{ DATASET {d} AT VERSION ?v {{ {s1} {label} ?o }} }}"), false),
        q("Q7", format!("SELECT DISTINCT ?o (COUNT(?s) AS ?n) WHERE {{ DATASET {d} AT VERSION {v} {{ ?s {} ?o }} }} GROUP BY ?o ORDER BY DESC(?n) ?o", p(3)), false),
        q("Q8", format!("SELECT DISTINCT ?p (COUNT(?o) AS ?n) WHERE {{ DATASET {d} AT VERSION {v} {{ ?s ?p ?o }} }} GROUP BY ?p ORDER BY ?p"), false),
        q("Q9", format!("SELECT DISTINCT ?v (COUNT(?p) AS ?n) WHERE {{ DATASET {d} AT VERSION ?v {{ {s1} ?p ?o }} }} GROUP BY ?v ORDER BY ?v"), false),
        q("Q10", format!("SELECT DISTINCT ?t (COUNT(?c) AS ?n) WHERE {{ CHANGES {d} AFTER VERSION {v0} {{ CHANGE ?c {{ a ?t }} }} }} GROUP BY ?t ORDER BY ?t"), false),
        q("Q11", "SELECT DISTINCT ?d (COUNT(?s) AS ?n) WHERE { DATASET ?d AT VERSION ?v { ?s ?p ?o FILTER (regex(str(?o), \"^V\")) } } GROUP BY ?d ORDER BY ?d".to_owned(), false),
        q("Q12", format!("SELECT DISTINCT ?v (COUNT(?x) AS ?n) WHERE {{ DATASET ?d AT VERSION ?v {{ ?s {label} ?o OPTIONAL {{ ?s {} ?x FILTER (?x > 100) }} }} }} GROUP BY ?v ORDER BY ?v", p(4)), false),
        q("Q13", format!("SELECT DISTINCT ?v (COUNT(?r) AS ?n) WHERE {{ DATASET {mixed} AT VERSION ?v {{ RECORD ?r {{ ?s ?p ?o }} FILTER (?p != {label}) }} }} GROUP BY ?v ORDER BY ?v"), true),
        q("Q14", format!("SELECT DISTINCT ?d ?v (COUNT(?ra) AS ?n) WHERE {{ DATASET ?d AT VERSION ?v {{ RECORD ?r {{ {s1} RECATT ?ra {{ ?p ?o }} }} FILTER (?p != {label}) }} }} GROUP BY ?d ?v ORDER BY ?d ?v"), true),
    ]
}

/// Parse, validate and scope resolution: everything before evaluation.
pub fn preprocess(text: &str, archive: &Archive) -> Result<Query> {
    let query = ql::parse(text)?;
    let errors: Vec<_> = ql::validate(&query, Some(archive))
        .into_iter()
        .filter(|d| d.is_error())
        .collect();
    if !errors.is_empty() {
        return Err(Error::InvalidQuery(errors));
    }
    resolve_scopes(&query, archive)?;
    Ok(query)
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

/// Times each operation `reps` times and reports medians.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    if config.reps == 0 {
        return Err(Error::Archive("bench needs at least one repetition".into()));
    }
    let series = generate_series(&config.profile);
    let sizes = config.profile.sizes();
    let mut report = BenchReport::default();

    let wants = |op| config.operations.contains(&op);
    if wants(Operation::Load) || wants(Operation::Retrieve) {
        let mut load: Vec<Vec<f64>> = vec![Vec::new(); sizes.len()];
        let mut retrieve: Vec<Vec<f64>> = vec![Vec::new(); sizes.len()];
        for _ in 0..config.reps {
            let mut a = Archive::new();
            let d = dataset_iri("main");
            for (i, g) in series.iter().enumerate() {
                let t = Instant::now();
                a.ingest_version(&d, g, options("main", i, StoragePolicy::Full))?;
                load[i].push(millis(t));
            }
            if wants(Operation::Retrieve) {
                for (i, times) in retrieve.iter_mut().enumerate() {
                    let t = Instant::now();
                    let text = serialize_ntriples(&a.version_graph(&version_iri("main", i))?);
                    times.push(millis(t));
                    std::hint::black_box(text);
                }
            }
        }
        for (op, samples) in [(Operation::Load, load), (Operation::Retrieve, retrieve)] {
            if !wants(op) {
                continue;
            }
            let mut points = Vec::new();
            for (i, mut xs) in samples.into_iter().enumerate() {
                let m = median(&mut xs);
                points.push((sizes[i] as f64, m));
                report.runs.push(Measurement {
                    operation: op.name().to_owned(),
                    label: format!("v{i}"),
                    size: sizes[i],
                    millis: m,
                });
            }
            report.fits.insert(op.name().to_owned(), linear_fit(&points));
        }
    }

    if wants(Operation::Query) {
        let a = suite_archive(&series)?;
        let total: usize = sizes.iter().sum::<usize>() * 2;
        for sq in query_suite(sizes.len() - 1) {
            let mut pre = Vec::new();
            let mut run = Vec::new();
            for _ in 0..config.reps {
                let t = Instant::now();
                let query = preprocess(&sq.text, &a)?;
                pre.push(millis(t));
                let t = Instant::now();
                std::hint::black_box(eval(&query, &a)?);
                run.push(millis(t));
            }
            for (op, xs) in [("preprocess", &mut pre), ("query", &mut run)] {
                report.runs.push(Measurement {
                    operation: op.to_owned(),
                    label: sq.name.to_owned(),
                    size: total,
                    millis: median(xs),
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles() {
        assert_eq!(Profile::LARGE.sizes(), (1..=10).map(|i| i * 1000).collect::<Vec<_>>());
        assert_eq!("3:10:30".parse::<Profile>().unwrap().sizes(), vec![10, 20, 30]);
        assert_eq!("1:50:50".parse::<Profile>().unwrap().sizes(), vec![50]);
        assert!("0:1:2".parse::<Profile>().is_err());
        assert!("fast".parse::<Profile>().is_err());
        assert!("3:30:10".parse::<Profile>().is_err());
    }

    #[test]
    fn generated_sizes_are_exact() {
        for (i, n) in [(0, 100), (3, 257)] {
            let g = generate_version(i, n);
            let (data, _) = crate::model::partition(&g);
            assert_eq!(data.len(), n);
        }
    }

    #[test]
    fn fit_of_a_line() {
        let f = linear_fit(&[(1.0, 3.0), (2.0, 5.0), (3.0, 7.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-9);
        assert!((f.intercept - 1.0).abs() < 1e-9);
        assert!((f.r2 - 1.0).abs() < 1e-9);
        assert!(linear_fit(&[(1.0, 1.0)]).is_none());
    }

    #[test]
    fn suite_queries_run() {
        let series = generate_series(&"3:20:60".parse().unwrap());
        let a = suite_archive(&series).unwrap();
        let suite = query_suite(2);
        assert_eq!(suite.len(), 14);
        for sq in &suite {
            let q = preprocess(&sq.text, &a).unwrap_or_else(|e| panic!("{}: {e}", sq.name));
            let t = eval(&q, &a).unwrap();
            assert!(!t.is_empty(), "{} returned nothing", sq.name);
        }
    }

    #[test]
    fn single_version_has_no_fit() {
        let r = run_bench(&BenchConfig {
            profile: "1:50:50".parse().unwrap(),
            reps: 1,
            operations: vec![Operation::Load],
        })
        .unwrap();
        assert_eq!(r.series("load").len(), 1);
        assert_eq!(r.fits["load"], None);
    }
}
