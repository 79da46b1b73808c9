use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hauteur_cli::config::{Command, Format, RunConfig, Settings};
use hauteur_cli::harness::{self, Skipped};
use hauteur_cli::output::{Checks, Render};
use hauteur_core::Error;

/// Canonical heights of polynomial families f_t(z) with a marked point P(t).
#[derive(Parser)]
#[command(name = "hauteur", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// The divisor D(f,P), its degree and the function g.
    Divisor(Flags),
    /// ĥ, h_D and their difference at each --t.
    Height(Flags),
    /// Correction series F and constants c at each support point.
    Series(Flags),
    /// Heights at every reduced a/b with |a|, b <= --bound.
    Sweep(Flags),
    /// Number of t with ĥ_{f_t}(P_t) <= --B.
    Count(Flags),
    /// Internal consistency checks for the pair.
    Verify(Flags),
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// Polynomial in z over Q(t), e.g. "z^2 + t".
    #[arg(long)]
    f: Option<String>,
    /// Point in Q(t), e.g. "7*t + 1/t".
    #[arg(long = "P")]
    p: Option<String>,
    /// Parameter value (repeatable), e.g. 7^5 or 10^4/7^4.
    #[arg(long = "t", allow_hyphen_values = true)]
    t: Vec<String>,
    /// Series order.
    #[arg(long)]
    order: Option<usize>,
    /// Tolerance for archimedean heights.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap for specialized heights.
    #[arg(long)]
    cap: Option<usize>,
    /// Iteration cap for function-field heights.
    #[arg(long = "ff-cap")]
    ff_cap: Option<usize>,
    /// Sweep bound H.
    #[arg(long)]
    bound: Option<u64>,
    /// Height bound for count.
    #[arg(long = "B")]
    b: Option<f64>,
    /// table, json or csv.
    #[arg(long)]
    format: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 when a result is not certified.
    #[arg(long)]
    strict: bool,
    /// Flat key = value file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

const EXIT_OTHER: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_UNCERTIFIED: u8 = 3;

fn settings(flags: &Flags) -> Result<Settings, Error> {
    let from_flags = Settings {
        f: flags.f.clone(),
        p: flags.p.clone(),
        t: flags.t.clone(),
        order: flags.order,
        tol: flags.tol,
        cap: flags.cap,
        ff_cap: flags.ff_cap,
        bound: flags.bound,
        count_b: flags.b,
        format: flags
            .format
            .as_deref()
            .map(str::parse::<Format>)
            .transpose()?,
        out: flags.out.clone(),
        strict: flags.strict.then_some(true),
    };
    let file = match &flags.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    Ok(from_flags.over(file))
}

fn report_skipped(skipped: &[Skipped]) {
    for s in skipped {
        eprintln!("skipped t = {}: [{}] {}", s.t, s.error.module(), s.error);
    }
}

/// Runs the command; returns the rendered report and whether every result is certified.
fn run(cfg: &RunConfig) -> Result<(String, bool, bool), Error> {
    let f = cfg.format;
    Ok(match cfg.command {
        Command::Divisor => {
            let r = harness::cmd_divisor(cfg)?;
            (r.render(f), r.certified, true)
        }
        Command::Height => {
            let r = harness::cmd_height(cfg)?;
            report_skipped(&r.skipped);
            (r.render(f), r.certified(), true)
        }
        Command::Series => {
            let r = harness::cmd_series(cfg)?;
            (r.render(f), true, true)
        }
        Command::Sweep => {
            let r = harness::cmd_sweep(cfg)?;
            report_skipped(&r.heights.skipped);
            if f == Format::Csv {
                eprintln!(
                    "max |diff| = {} at t = {}",
                    r.summary.max_abs_diff,
                    r.summary.argmax.as_deref().unwrap_or("-")
                );
            }
            (r.render(f), r.summary.uncertified == 0, true)
        }
        Command::Count => {
            let r = harness::cmd_count(cfg)?;
            (r.render(f), !r.partial, true)
        }
        Command::Verify => {
            let r = Checks(harness::cmd_verify(cfg)?);
            (r.render(f), true, !r.failed())
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Cmd::Divisor(a) => (Command::Divisor, a),
        Cmd::Height(a) => (Command::Height, a),
        Cmd::Series(a) => (Command::Series, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Count(a) => (Command::Count, a),
        Cmd::Verify(a) => (Command::Verify, a),
    };
    let result = settings(&flags)
        .and_then(|s| s.into_config(command))
        .and_then(|cfg| run(&cfg).map(|r| (cfg, r)));
    let (cfg, (text, certified, passed)) = match result {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: [{}] {e}", e.module());
            return ExitCode::from(if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_OTHER
            });
        }
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_OTHER);
    }
    if !passed {
        return ExitCode::from(EXIT_OTHER);
    }
    if cfg.strict && !certified {
        eprintln!("error: result is not certified (--strict)");
        return ExitCode::from(EXIT_UNCERTIFIED);
    }
    ExitCode::SUCCESS
}
