//! Command-line front end for the `mtcircle` library.
//!
//! Exit codes: 0 when everything requested succeeded and every verification
//! passed, 1 on a failed verification or runtime error, 2 on invalid
//! configuration. Errors are reported as JSON on standard error.

pub mod args;
pub mod cache;
pub mod commands;
pub mod output;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;
use mtcircle::Error;
use serde_json::json;

use args::{Cli, RunConfig, Task};
use cache::Cache;
use commands::Outcome;
use output::{diagnostic, emit};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidContext(_)
            | Error::InvalidModulus(_)
            | Error::PrimeIsLevel(_)
            | Error::UnsupportedLevel(_)
            | Error::Precondition(_)
            | Error::TreeBudget { .. }
    )
}

fn fail(kind: &str, message: &str) -> i32 {
    diagnostic(json!({ "error": { "kind": kind, "message": message } }));
    if kind == "invalid_config" {
        EXIT_CONFIG
    } else {
        EXIT_FAILED
    }
}

fn fail_core(e: &Error) -> i32 {
    let kind = if is_config_error(e) { "invalid_config" } else { "computation" };
    fail(kind, &e.to_string())
}

fn execute(cfg: &RunConfig) -> mtcircle::Result<Outcome> {
    let cache = Cache::new(cfg.cache_dir.clone());
    let opts = &cfg.opts;
    match &cfg.task {
        Task::Supersingular(ctx) => commands::supersingular(ctx, &cache),
        Task::Lmatrix(ctx) => commands::lmatrix(ctx, &cache),
        Task::Brandt(ctx, q) => commands::brandt(ctx, *q, &cache),
        Task::Homology(ctx) => commands::homology(ctx, &cache),
        Task::Alpha(ctx) => commands::alpha(ctx, &cache, opts),
        Task::Merel(ctx) => commands::merel(ctx, &cache, opts),
        Task::Verify(ctx, theorem) => commands::verify(ctx, *theorem, &cache, opts),
        Task::Battery => commands::battery(&cache, opts),
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => return fail("invalid_config", e.render().to_string().trim_end()),
    };
    let cfg = match cli.into_config() {
        Ok(cfg) => cfg,
        Err(e) => return fail_core(&e),
    };
    let outcome = match execute(&cfg) {
        Ok(o) => o,
        Err(e) => return fail_core(&e),
    };
    let text = match outcome.rendered.render(cfg.format) {
        Ok(t) => t,
        Err(e) => return fail("io", &e.to_string()),
    };
    if let Err(e) = emit(&text, cfg.output.as_deref()) {
        return fail("io", &e.to_string());
    }
    if outcome.passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}
