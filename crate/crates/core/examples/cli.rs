//! Drive the command-line interface in-process: create an archive in a
//! temporary directory, load two versions, diff and query them.

use diachron::cli;

fn run(args: &[&str]) -> String {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("diachron").chain(args.iter().copied()), &mut out, &mut err);
    if code != 0 {
        panic!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err));
    }
    String::from_utf8(out).expect("utf-8 output")
}

fn main() -> std::io::Result<()> {
    let dir = std::env::temp_dir().join("diachron-cli-example");
    std::fs::create_dir_all(&dir)?;
    let archive = dir.join("archive.nq").to_string_lossy().into_owned();
    let v1 = dir.join("v1.nt");
    let v2 = dir.join("v2.nt");
    std::fs::write(&v1, "<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> \"liver\" .\n")?;
    std::fs::write(&v2, "<http://www.ebi.ac.uk/efo/EFO_0000887> <http://www.w3.org/2000/01/rdf-schema#label> \"LIVER\" .\n")?;
    let (v1, v2) = (v1.to_string_lossy().into_owned(), v2.to_string_lossy().into_owned());

    run(&["--archive", &archive, "init", "--force"]);
    run(&["--archive", &archive, "load", "--dataset", "<EFO>", "--version", "<EFO/v1>", "--date", "2015-01-01", &v1]);
    run(&["--archive", &archive, "load", "--dataset", "<EFO>", "--version", "<EFO/v2>", "--policy", "delta", &v2]);
    print!("{}", run(&["--archive", &archive, "list", "versions"]));
    print!("{}", run(&["--archive", &archive, "diff", "--old", "<EFO/v1>", "--new", "<EFO/v2>"]));
    print!(
        "{}",
        run(&[
            "--archive",
            &archive,
            "query",
            "-e",
            "SELECT ?v ?o WHERE { DATASET <EFO> AT VERSION ?v { ?s rdfs:label ?o } }",
        ])
    );
    Ok(())
}
