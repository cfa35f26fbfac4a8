//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{run_bench, BenchConfig, Operation, Profile};
use crate::changes::change_set_graph;
use crate::error::{Error, Result};
use crate::eval::{eval, materialize_resource, ResultTable};
use crate::model::{Archive, IngestOptions, StoragePolicy};
use crate::ql::{self, ParseOptions};
use crate::rdf::{parse_ntriples, serialize_ntriples, Literal, Term, Variable};
use crate::translate::translate;
use crate::vocab::{BUILTIN_PREFIXES, DEFAULT_BASE};

#[derive(Debug, Parser)]
#[command(name = "diachron", version, about = "Multi-version RDF archive with a version-aware query language")]
struct Cli {
    /// Archive file (canonical N-Quads).
    #[arg(long, global = true, default_value = "archive.nq")]
    archive: PathBuf,

    /// Extra prefix as NAME=IRI; may be repeated.
    #[arg(long = "prefix", global = true, value_name = "NAME=IRI")]
    prefixes: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create an empty archive.
    Init {
        /// Replace an existing archive.
        #[arg(long)]
        force: bool,
    },
    /// Ingest an N-Triples file as a new version of a dataset.
    Load {
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        version: Option<String>,
        /// YYYY-MM-DD
        #[arg(long)]
        date: Option<NaiveDate>,
        #[arg(long, value_enum, default_value_t = PolicyArg::Full)]
        policy: PolicyArg,
        file: PathBuf,
    },
    /// List datasets or versions as TSV.
    List {
        #[arg(value_enum, default_value_t = ListWhat::Versions)]
        what: ListWhat,
        #[arg(long)]
        dataset: Option<String>,
    },
    /// Print a version in its original form as canonical N-Triples.
    Export {
        #[arg(long)]
        version: String,
    },
    /// Print the change set between two versions as canonical N-Triples.
    Diff {
        #[arg(long)]
        old: String,
        #[arg(long)]
        new: String,
    },
    /// Evaluate a query.
    Query {
        #[command(flatten)]
        source: QuerySource,
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
    },
    /// Print the SPARQL translation of a query.
    Translate {
        #[command(flatten)]
        source: QuerySource,
    },
    /// Define or materialize diachronic resources.
    Resource {
        #[command(subcommand)]
        action: ResourceAction,
    },
    /// Time load, retrieve and query operations on a synthetic series.
    Bench {
        /// small, large, or VERSIONS:START:END
        #[arg(long, default_value = "small")]
        profile: String,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        /// Comma-separated subset of load,retrieve,query.
        #[arg(long, value_delimiter = ',')]
        operations: Vec<String>,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum ResourceAction {
    /// Store the description query of a resource.
    Define {
        #[arg(long)]
        resource: String,
        #[command(flatten)]
        source: QuerySource,
    },
    /// Run the stored description query.
    Materialize {
        #[arg(long)]
        resource: String,
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct QuerySource {
    /// Query text.
    #[arg(short = 'e', long = "expr")]
    expr: Option<String>,
    /// File holding the query.
    #[arg(short = 'f', long = "file")]
    file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Full,
    Delta,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ListWhat {
    Datasets,
    Versions,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

/// Runs the command line and returns the exit code: 0 on success, 1 for
/// usage and user errors, 2 for internal errors.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Integrity(_) | Error::Structure { .. } => 2,
                _ => 1,
            }
        }
    }
}

struct Context {
    archive_path: PathBuf,
    prefixes: BTreeMap<String, String>,
}

impl Context {
    fn open(&self) -> Result<Archive> {
        Archive::open(&self.archive_path)
    }

    fn open_or_new(&self) -> Result<Archive> {
        if self.archive_path.exists() {
            self.open()
        } else {
            Ok(Archive::new())
        }
    }

    fn parse_options(&self) -> ParseOptions {
        let mut o = ParseOptions::default();
        for (p, iri) in &self.prefixes {
            o = o.with_prefix(p.clone(), iri.clone());
        }
        o
    }

    /// Reads `<iri>`, `prefix:local`, an absolute IRI, or a name relative
    /// to the default base.
    fn iri(&self, arg: &str) -> Result<Term> {
        let raw = arg.trim();
        let inner = raw.strip_prefix('<').and_then(|r| r.strip_suffix('>'));
        let value = match inner {
            Some(i) if has_scheme(i) => i.to_owned(),
            Some(i) => format!("{DEFAULT_BASE}{i}"),
            None => match raw.split_once(':') {
                Some((p, local)) if self.prefixes.contains_key(p) => format!("{}{local}", self.prefixes[p]),
                _ if has_scheme(raw) => raw.to_owned(),
                _ => format!("{DEFAULT_BASE}{raw}"),
            },
        };
        Term::iri(value)
    }

    fn query_text(&self, source: &QuerySource) -> Result<String> {
        match (&source.expr, &source.file) {
            (Some(t), _) => Ok(t.clone()),
            (None, Some(f)) => fs::read_to_string(f).map_err(|e| Error::io(f, e)),
            (None, None) => Err(Error::Query("no query given; use -e or -f".into())),
        }
    }
}

fn has_scheme(s: &str) -> bool {
    match s.split_once(':') {
        Some((scheme, rest)) => {
            !scheme.is_empty()
                && scheme.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && scheme.chars().all(|c| c.is_ascii_alphanumeric() || "+-.".contains(c))
                && (rest.starts_with("//") || scheme == "urn")
        }
        None => false,
    }
}

fn prefix_map(extra: &[String]) -> Result<BTreeMap<String, String>> {
    let mut out: BTreeMap<String, String> =
        BUILTIN_PREFIXES.iter().map(|(p, i)| (p.to_string(), i.to_string())).collect();
    for e in extra {
        let (p, iri) = e
            .split_once('=')
            .ok_or_else(|| Error::Query(format!("--prefix expects NAME=IRI, got {e:?}")))?;
        let iri = iri.trim().trim_start_matches('<').trim_end_matches('>');
        out.insert(p.trim().to_owned(), iri.to_owned());
    }
    Ok(out)
}

fn write_out(stdout: &mut dyn Write, text: &str) -> Result<()> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn write_table(stdout: &mut dyn Write, t: &ResultTable, format: Format) -> Result<()> {
    match format {
        Format::Tsv => write_out(stdout, &t.to_tsv()),
        Format::Json => {
            let text = serde_json::to_string_pretty(&t.to_json()).expect("JSON values serialize");
            write_out(stdout, &format!("{text}\n"))
        }
    }
}

fn var(name: &str) -> Variable {
    Variable::new(name).expect("static variable names are valid")
}

fn list(archive: &Archive, what: ListWhat, dataset: Option<&Term>) -> Result<ResultTable> {
    let catalog = archive.catalog();
    let datasets: Vec<_> = match dataset {
        Some(d) => vec![catalog.dataset(d)?],
        None => archive.list_datasets(),
    };
    let count = |n: usize| Some(Term::literal(Literal::integer(n as i64)));
    Ok(match what {
        ListWhat::Datasets => ResultTable {
            header: vec![var("dataset"), var("versions"), var("changeSets")],
            rows: datasets
                .iter()
                .map(|d| vec![Some(d.iri.clone()), count(d.versions.len()), count(d.change_sets.len())])
                .collect(),
        },
        ListWhat::Versions => {
            let mut rows = Vec::new();
            for d in datasets {
                for v in archive.list_versions(&d.iri)? {
                    rows.push(vec![
                        Some(d.iri.clone()),
                        Some(v.iri.clone()),
                        count(v.ordinal as usize),
                        v.date.map(|x| {
                            Term::literal(Literal::typed(x.format("%Y-%m-%d").to_string(), crate::vocab::xsd::DATE))
                        }),
                        Some(Term::string(v.policy.to_string())),
                        count(v.attribute_count as usize),
                    ]);
                }
            }
            ResultTable {
                header: vec![
                    var("dataset"),
                    var("version"),
                    var("ordinal"),
                    var("date"),
                    var("policy"),
                    var("attributes"),
                ],
                rows,
            }
        }
    })
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let ctx = Context {
        archive_path: cli.archive,
        prefixes: prefix_map(&cli.prefixes)?,
    };
    let path: &Path = &ctx.archive_path;
    match cli.command {
        Command::Init { force } => {
            if path.exists() && !force {
                return Err(Error::Archive(format!(
                    "{} already exists; use --force to replace it",
                    path.display()
                )));
            }
            Archive::new().save(path)
        }
        Command::Load {
            dataset,
            version,
            date,
            policy,
            file,
        } => {
            let mut archive = ctx.open_or_new()?;
            let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
            let graph = parse_ntriples(&text)?;
            let info = archive.ingest_version(
                &ctx.iri(&dataset)?,
                &graph,
                IngestOptions {
                    version: version.as_deref().map(|v| ctx.iri(v)).transpose()?,
                    date,
                    policy: match policy {
                        PolicyArg::Full => StoragePolicy::Full,
                        PolicyArg::Delta => StoragePolicy::Delta,
                    },
                },
            )?;
            archive.save(path)?;
            write_out(stdout, &format!("{}\n", info.iri))
        }
        Command::List { what, dataset } => {
            let archive = ctx.open()?;
            let d = dataset.as_deref().map(|d| ctx.iri(d)).transpose()?;
            write_table(stdout, &list(&archive, what, d.as_ref())?, Format::Tsv)
        }
        Command::Export { version } => {
            let archive = ctx.open()?;
            write_out(stdout, &serialize_ntriples(&archive.version_graph(&ctx.iri(&version)?)?))
        }
        Command::Diff { old, new } => {
            let archive = ctx.open()?;
            let cs = archive.change_set_between(&ctx.iri(&old)?, &ctx.iri(&new)?)?;
            write_out(stdout, &serialize_ntriples(&change_set_graph(&cs)))
        }
        Command::Query { source, format } => {
            let archive = ctx.open()?;
            let query = ql::parse_with(&ctx.query_text(&source)?, &ctx.parse_options())?;
            write_table(stdout, &eval(&query, &archive)?, format)
        }
        Command::Translate { source } => {
            let archive = ctx.open()?;
            let query = ql::parse_with(&ctx.query_text(&source)?, &ctx.parse_options())?;
            write_out(stdout, &translate(&query, &archive)?.query)
        }
        Command::Resource { action } => match action {
            ResourceAction::Define { resource, source } => {
                let mut archive = ctx.open()?;
                let text = ctx.query_text(&source)?;
                // expand CLI prefixes now; the stored text is parsed with built-ins only
                let canonical = ql::parse_with(&text, &ctx.parse_options())?.to_string();
                archive.define_resource(&ctx.iri(&resource)?, &canonical)?;
                archive.save(path)
            }
            ResourceAction::Materialize { resource, format } => {
                let archive = ctx.open()?;
                write_table(stdout, &materialize_resource(&archive, &ctx.iri(&resource)?)?, format)
            }
        },
        Command::Bench {
            profile,
            reps,
            operations,
            out,
        } => {
            let operations = if operations.is_empty() {
                Operation::ALL.to_vec()
            } else {
                operations.iter().map(|o| o.parse()).collect::<Result<_>>()?
            };
            let report = run_bench(&BenchConfig {
                profile: profile.parse::<Profile>()?,
                reps,
                operations,
            })?;
            let csv = report.to_csv();
            match out {
                Some(p) => fs::write(&p, csv).map_err(|e| Error::io(&p, e)),
                None => write_out(stdout, &csv),
            }
        }
    }
}
