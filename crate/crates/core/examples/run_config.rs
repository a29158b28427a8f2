//! Runs a subcommand from a TOML configuration, as the command-line tool does.
//!
//! `cargo run --example run_config -- <config.toml> [task]`, with task one of
//! potential, check, evolve, verify-morawetz, verify-phase, verify-estimates.

use std::path::Path;

use rwlab::cli::{dispatch, exit_code, load, Task};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args.first().map_or("crates/core/examples/configs/schwarzschild_pulse.toml", String::as_str);
    let task = match args.get(1).map_or("evolve", String::as_str) {
        "potential" => Task::Potential,
        "check" => Task::Check,
        "evolve" => Task::Evolve,
        "verify-morawetz" => Task::VerifyMorawetz,
        "verify-phase" => Task::VerifyPhase,
        "verify-estimates" => Task::VerifyEstimates,
        other => {
            eprintln!("unknown task {other}");
            std::process::exit(2);
        }
    };
    let out = std::env::temp_dir().join("rwlab-example");
    let result = load(Path::new(path)).and_then(|cfg| dispatch(task, &cfg, Some(&out)));
    match &result {
        Ok(o) => {
            println!("{}", o.summary);
            o.files.iter().for_each(|f| println!("wrote {}", f.display()));
        }
        Err(e) => eprintln!("error: {e}"),
    }
    std::process::exit(exit_code(&result));
}
