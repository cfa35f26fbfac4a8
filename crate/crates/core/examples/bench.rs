//! Run the load, retrieve and query benchmark on the small profile and
//! print the CSV report. Pass a profile (`small`, `large` or
//! `VERSIONS:START:END`) as the first argument to change it.

use diachron::bench::{run_bench, BenchConfig, Profile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile: Profile = match std::env::args().nth(1) {
        Some(arg) => arg.parse()?,
        None => Profile::SMALL,
    };
    let report = run_bench(&BenchConfig {
        profile,
        reps: 3,
        ..BenchConfig::default()
    })?;
    print!("{}", report.to_csv());
    Ok(())
}
