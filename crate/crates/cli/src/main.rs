use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use specpos::{commands, corpus, CliError, Outcome};
use specpos_core::limits;

#[derive(Parser)]
#[command(name = "specpos", version, about = "Exact checks for presheaves of modules on prime spectra")]
struct Cli {
    /// Largest module carrier that may be materialized.
    #[arg(long, global = true, default_value_t = limits::DEFAULT_MAX_CARRIER as u64, value_parser = clap::value_parser!(u64).range(1..))]
    max_carrier: u64,

    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Points of Spec R and the Hasse diagram of the specialization order.
    Spec {
        ring: PathBuf,
        #[arg(long)]
        dot: bool,
    },
    /// Associated primes with witnesses, and the support.
    Ass { ring: PathBuf, module: PathBuf },
    /// The inverse limit of a presheaf over the whole spectrum.
    Limit { ring: PathBuf, presheaf: PathBuf },
    /// Evaluate a germ literal in a localized module.
    Germ {
        ring: PathBuf,
        module: PathBuf,
        germ: PathBuf,
    },
    #[command(subcommand)]
    Verify(Verify),
    #[command(subcommand)]
    Check(Check),
    /// Run a fixture manifest and compare verdicts.
    Corpus {
        manifest: PathBuf,
        /// Append per-check wall time (makes the report nondeterministic).
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Subcommand)]
enum Verify {
    /// M is isomorphic to the limit of its stalks.
    KeyLemma { ring: PathBuf, module: PathBuf },
    /// Hom_R(M, N) matches presheaf morphisms S(M) -> S(N).
    FullFaithful { ring: PathBuf, m: PathBuf, n: PathBuf },
    /// The limit of the structure presheaf recovers R and its spectrum.
    AffineNoetherian { ring: PathBuf },
}

#[derive(Subcommand)]
enum Check {
    /// Admissibility of a presheaf with respect to an open cover.
    Admissible {
        ring: PathBuf,
        presheaf: PathBuf,
        #[arg(long)]
        cover: Option<PathBuf>,
    },
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Spec { ring, dot } => commands::spec(ring, *dot),
        Command::Ass { ring, module } => commands::ass(ring, module),
        Command::Limit { ring, presheaf } => commands::limit(ring, presheaf),
        Command::Germ { ring, module, germ } => commands::germ(ring, module, germ),
        Command::Verify(Verify::KeyLemma { ring, module }) => commands::key_lemma(ring, module),
        Command::Verify(Verify::FullFaithful { ring, m, n }) => commands::full_faithful(ring, m, n),
        Command::Verify(Verify::AffineNoetherian { ring }) => commands::affine(ring),
        Command::Check(Check::Admissible { ring, presheaf, cover }) => {
            commands::admissible(ring, presheaf, cover.as_deref())
        }
        Command::Corpus { manifest, timing } => {
            let report = corpus::run_corpus(manifest, *timing)?;
            if report.results.is_empty() {
                eprintln!("warning: manifest has no checks");
            }
            Ok(report.to_outcome())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    limits::set_max_carrier(usize::try_from(cli.max_carrier).unwrap_or(usize::MAX));
    let code = match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.render(cli.json).as_bytes());
            out.code
        }
        Err(e) => {
            let code = e.exit_code();
            if code == specpos::EXIT_INVARIANT {
                eprintln!("invariant violation (this is a bug): {e}");
            } else {
                eprintln!("error: {e}");
            }
            code
        }
    };
    ExitCode::from(code as u8)
}
