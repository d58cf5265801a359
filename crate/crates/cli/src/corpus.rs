//! Fixture corpus runner. The manifest lists checks with expected verdicts;
//! paths are relative to the manifest's directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::input::read_json;
use crate::{commands, CliError, Outcome, EXIT_INPUT, EXIT_PASS, EXIT_REJECTED};

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Spec,
    Ass,
    Limit,
    KeyLemma,
    FullFaithful,
    Admissible,
    AffineNoetherian,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub command: CheckKind,
    pub ring: String,
    #[serde(default)]
    pub module: Option<String>,
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub presheaf: Option<String>,
    #[serde(default)]
    pub cover: Option<String>,
    pub expect: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub verdict: String,
    pub expect: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub micros: Option<u128>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusReport {
    pub results: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
}

impl CorpusReport {
    pub fn exit_code(&self) -> i32 {
        if self.failed == 0 {
            EXIT_PASS
        } else {
            EXIT_REJECTED
        }
    }

    pub fn to_outcome(&self) -> Outcome {
        let mut out = Outcome::new(
            format!("{} checks, {} passed, {} failed", self.results.len(), self.passed, self.failed),
            self.exit_code(),
        );
        for r in &self.results {
            let mut l = if r.pass {
                format!("PASS {}: {}", r.name, r.verdict)
            } else {
                format!("FAIL {}: got `{}`, expected `{}`", r.name, r.verdict, r.expect)
            };
            if let Some(us) = r.micros {
                l.push_str(&format!(" ({us} us)"));
            }
            out = out.line(l);
        }
        let summary = out.verdict.clone();
        out.line(format!("corpus: {summary}"))
            .data(serde_json::to_value(self).expect("report serializes"))
    }
}

fn field<'a>(c: &'a Check, v: &'a Option<String>, what: &str) -> Result<&'a str, CliError> {
    v.as_deref().ok_or_else(|| CliError::Parse {
        path: c.name.clone(),
        msg: format!("check `{}` needs a `{what}` field", c.name),
    })
}

fn paths(c: &Check) -> Vec<&str> {
    [Some(&c.ring), c.module.as_ref(), c.target.as_ref(), c.presheaf.as_ref(), c.cover.as_ref()]
        .into_iter()
        .flatten()
        .map(String::as_str)
        .collect()
}

fn run_check(base: &Path, c: &Check) -> Result<Outcome, CliError> {
    let p = |s: &str| base.join(s);
    let ring = p(&c.ring);
    match c.command {
        CheckKind::Spec => commands::spec(&ring, false),
        CheckKind::Ass => commands::ass(&ring, &p(field(c, &c.module, "module")?)),
        CheckKind::Limit => commands::limit(&ring, &p(field(c, &c.presheaf, "presheaf")?)),
        CheckKind::KeyLemma => commands::key_lemma(&ring, &p(field(c, &c.module, "module")?)),
        CheckKind::FullFaithful => commands::full_faithful(
            &ring,
            &p(field(c, &c.module, "module")?),
            &p(field(c, &c.target, "target")?),
        ),
        CheckKind::Admissible => {
            let cover = c.cover.as_deref().map(p);
            commands::admissible(&ring, &p(field(c, &c.presheaf, "presheaf")?), cover.as_deref())
        }
        CheckKind::AffineNoetherian => commands::affine(&ring),
    }
}

fn verdict_of(r: Result<Outcome, CliError>) -> String {
    match r {
        Ok(o) => o.verdict,
        Err(e) if e.exit_code() == EXIT_INPUT => format!("ERROR {e}"),
        Err(e) => format!("INVARIANT {e}"),
    }
}

/// Runs every check; results keep manifest order. Fails with an input error
/// when a fixture file is missing.
pub fn run_corpus(manifest: &Path, timing: bool) -> Result<CorpusReport, CliError> {
    let m: Manifest = read_json(manifest)?;
    let base: PathBuf = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    for c in &m.checks {
        for f in paths(c) {
            if !base.join(f).is_file() {
                return Err(CliError::parse(manifest, format!("check `{}`: missing fixture {f}", c.name)));
            }
        }
    }
    let run = |c: &Check| {
        let start = Instant::now();
        let verdict = verdict_of(run_check(&base, c));
        let micros = timing.then(|| start.elapsed().as_micros());
        CheckResult {
            name: c.name.clone(),
            pass: verdict == c.expect,
            verdict,
            expect: c.expect.clone(),
            micros,
        }
    };
    #[cfg(feature = "parallel")]
    let results: Vec<CheckResult> = {
        use rayon::prelude::*;
        m.checks.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<CheckResult> = m.checks.iter().map(run).collect();
    let passed = results.iter().filter(|r| r.pass).count();
    Ok(CorpusReport {
        failed: results.len() - passed,
        passed,
        results,
    })
}
