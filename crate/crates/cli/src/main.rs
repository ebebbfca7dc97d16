use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use statespace_core::models::{self, ModelParams};
use statespace_core::{run, Checks, RunConfig};

/// Explicit-state model checker for the bundled models.
///
/// Exit status: 0 pass, 1 property error found, 2 state limit exceeded,
/// 3 configuration or model error.
#[derive(Debug, Parser)]
#[command(name = "statespace", version)]
struct Cli {
    /// Model to check (available: tokenring)
    model: String,

    /// Number of customers and servers
    #[arg(long)]
    n: Option<usize>,

    /// Model variant: correct, faulty-guard, modified-progress
    #[arg(long)]
    variant: Option<String>,

    /// Use stubborn sets
    #[arg(long)]
    stubborn: bool,

    /// Use the symmetry representative
    #[arg(long)]
    symmetry: bool,

    /// Track the original customer 0 across symmetry rotations
    #[arg(long)]
    symm_must: bool,

    /// Stop once more than this many states have been found
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    stop_cnt: Option<u64>,

    #[arg(long, overrides_with = "no_chk_state")]
    chk_state: bool,
    #[arg(long)]
    no_chk_state: bool,

    #[arg(long, overrides_with = "no_chk_deadlock")]
    chk_deadlock: bool,
    #[arg(long)]
    no_chk_deadlock: bool,

    #[arg(long, overrides_with = "no_chk_may_progress")]
    chk_may_progress: bool,
    #[arg(long)]
    no_chk_may_progress: bool,

    #[arg(long, overrides_with = "no_chk_must_progress")]
    chk_must_progress: bool,
    #[arg(long)]
    no_chk_must_progress: bool,

    /// Verify the model's contract obligations while exploring
    #[arg(long)]
    debug_checks: bool,

    /// Print only error lines, warnings and the statistics line
    #[arg(long)]
    quiet: bool,

    /// Bits per state word (32 or 64)
    #[arg(long, default_value_t = 64)]
    word_width: u32,
}

fn toggle(on: bool, off: bool, default: bool) -> bool {
    if on {
        true
    } else if off {
        false
    } else {
        default
    }
}

const EXIT_SETUP: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_SETUP),
            };
        }
    };

    let params = ModelParams {
        n: cli.n,
        variant: cli.variant.clone(),
        symm_must: cli.symm_must,
    };
    let model = match models::build(&cli.model, &params) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_SETUP);
        }
    };

    let defaults = model.default_checks();
    let cfg = RunConfig {
        checks: Checks {
            state: toggle(cli.chk_state, cli.no_chk_state, defaults.state),
            deadlock: toggle(cli.chk_deadlock, cli.no_chk_deadlock, defaults.deadlock),
            may_progress: toggle(
                cli.chk_may_progress,
                cli.no_chk_may_progress,
                defaults.may_progress,
            ),
            must_progress: toggle(
                cli.chk_must_progress,
                cli.no_chk_must_progress,
                defaults.must_progress,
            ),
        },
        stubborn: cli.stubborn,
        symmetry: cli.symmetry,
        stop_cnt: cli.stop_cnt,
        debug_checks: cli.debug_checks,
        word_width: cli.word_width,
    };

    let outcome = match run(&*model, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_SETUP);
        }
    };

    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(outcome.transcript(cli.quiet).as_bytes());
    let _ = stdout.flush();
    ExitCode::from(outcome.exit_code() as u8)
}
