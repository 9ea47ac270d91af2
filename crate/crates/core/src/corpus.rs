//! Regression corpus of process pairs with expected verdicts, and a plain
//! text narrative for attacker strategies.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equivalence::{
    check_with, prepare, witness_replay, CheckOptions, GameConfig, RelationKind, Side, Verdict, Witness,
};
use crate::error::Error;
use crate::lts::ExplorationBounds;
use crate::parse::parse_process_with;
use crate::syntax::{ActionLabel, Process};
use crate::term::{Symbol, Theory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Expected {
    RelatedExact,
    RelatedBounded,
    Distinguished,
}

impl Expected {
    pub fn of(v: &Verdict) -> Expected {
        match v {
            Verdict::Related { exact: true, .. } => Expected::RelatedExact,
            Verdict::Related { exact: false, .. } => Expected::RelatedBounded,
            Verdict::Distinguished { .. } => Expected::Distinguished,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Expected::RelatedExact => "RELATED_EXACT",
            Expected::RelatedBounded => "RELATED_BOUNDED",
            Expected::Distinguished => "DISTINGUISHED",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoryPreset {
    /// No rewrite rules; symbols are free.
    #[default]
    None,
    /// Symmetric encryption and pairing.
    DolevYao,
}

impl TheoryPreset {
    pub fn theory(self) -> Theory {
        match self {
            TheoryPreset::None => Theory::empty(),
            TheoryPreset::DolevYao => Theory::dolev_yao(),
        }
    }
}

/// One fixture.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusCase {
    pub name: String,
    pub left: String,
    pub right: String,
    pub relation: String,
    pub expected: Expected,
    /// Overrides in the `key=value,...` form accepted on the command line.
    #[serde(default)]
    pub bounds: String,
    #[serde(default)]
    pub theory: TheoryPreset,
    /// Where the example comes from.
    #[serde(default)]
    pub anchor: String,
}

#[derive(Deserialize)]
struct CorpusFile {
    #[serde(default)]
    case: Vec<CorpusCase>,
}

/// A case ready to be checked.
#[derive(Clone, Debug)]
pub struct PreparedCase {
    pub kind: RelationKind,
    pub left: Process,
    pub right: Process,
    pub theory: Theory,
    pub bounds: ExplorationBounds,
}

impl CorpusCase {
    pub fn prepare(&self) -> Result<PreparedCase, Error> {
        let kind = RelationKind::parse(&self.relation)
            .ok_or_else(|| Error::Invalid(format!("unknown relation `{}`", self.relation)))?;
        let base = self.theory.theory();
        let sig: Vec<Symbol> = base.signature.iter().cloned().collect();
        let left = parse_process_with(&self.left, &sig)?;
        let right = parse_process_with(&self.right, &sig)?;
        let mut bounds = ExplorationBounds::default();
        bounds.apply_overrides(&self.bounds).map_err(Error::Invalid)?;
        if self.expected == Expected::RelatedBounded && !(left.has_bang() || right.has_bang()) {
            return Err(Error::Invalid(format!(
                "case `{}` expects a bounded verdict but has no replication",
                self.name
            )));
        }
        let (theory, bounds) = prepare(&left, &right, &base, &bounds);
        Ok(PreparedCase {
            kind,
            left,
            right,
            theory,
            bounds,
        })
    }
}

impl PreparedCase {
    pub fn check(&self, opts: CheckOptions) -> Result<Verdict, Error> {
        check_with(self.kind, &self.left, &self.right, &self.theory, &self.bounds, opts)
    }

    pub fn replay(&self, v: &Verdict, opts: CheckOptions) -> Result<(), Error> {
        let cfg = GameConfig::initial(self.kind, &self.left, &self.right);
        witness_replay(v, &cfg, &self.theory, &self.bounds, opts)
    }
}

/// Reads every `*.toml` file under `path` (or `path` itself), in file name
/// order.
pub fn load_corpus(path: &Path) -> Result<Vec<CorpusCase>, Error> {
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut v: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        v.sort();
        v
    } else {
        vec![path.to_path_buf()]
    };
    let mut cases = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(&f).map_err(|e| Error::Invalid(format!("{}: {e}", f.display())))?;
        let parsed: CorpusFile = toml::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", f.display())))?;
        cases.extend(parsed.case);
    }
    Ok(cases)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    pub name: String,
    pub relation: String,
    pub expected: Expected,
    pub got: Option<Expected>,
    pub pass: bool,
    /// Set when the case could not be run or its strategy failed to replay.
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CorpusReport {
    pub cases: Vec<CaseReport>,
}

impl CorpusReport {
    pub fn passed(&self) -> usize {
        self.cases.iter().filter(|c| c.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.cases.len() - self.passed()
    }

    /// Drops timings so the report depends only on the verdicts.
    pub fn without_timings(&self) -> CorpusReport {
        CorpusReport {
            cases: self
                .cases
                .iter()
                .map(|c| CaseReport {
                    elapsed_ms: None,
                    ..c.clone()
                })
                .collect(),
        }
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        for c in &self.cases {
            let status = if c.pass { "PASS" } else { "FAIL" };
            let got = c.got.map_or("-", Expected::as_str);
            let _ = write!(
                s,
                "{status} {} [{}] expected {} got {got}",
                c.name,
                c.relation,
                c.expected.as_str()
            );
            if let Some(ms) = c.elapsed_ms {
                let _ = write!(s, " ({ms} ms)");
            }
            if let Some(e) = &c.error {
                let _ = write!(s, ": {e}");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "{} passed, {} failed", self.passed(), self.failed());
        s
    }
}

pub fn run_case(case: &CorpusCase, opts: CheckOptions) -> CaseReport {
    let start = Instant::now();
    let outcome = case.prepare().and_then(|p| {
        let v = p.check(opts)?;
        if !v.is_related() {
            p.replay(&v, opts)?;
        }
        Ok(v)
    });
    let elapsed_ms = Some(start.elapsed().as_millis() as u64);
    match outcome {
        Ok(v) => {
            let got = Expected::of(&v);
            CaseReport {
                name: case.name.clone(),
                relation: case.relation.clone(),
                expected: case.expected,
                got: Some(got),
                pass: got == case.expected,
                error: None,
                elapsed_ms,
            }
        }
        Err(e) => CaseReport {
            name: case.name.clone(),
            relation: case.relation.clone(),
            expected: case.expected,
            got: None,
            pass: false,
            error: Some(e.to_string()),
            elapsed_ms,
        },
    }
}

/// Runs the cases in parallel; the report keeps the input order.
pub fn run_cases(cases: &[CorpusCase], opts: CheckOptions) -> CorpusReport {
    CorpusReport {
        cases: cases.par_iter().map(|c| run_case(c, opts)).collect(),
    }
}

pub fn run_corpus(path: &Path) -> Result<CorpusReport, Error> {
    Ok(run_cases(&load_corpus(path)?, CheckOptions::default()))
}

// ---------------------------------------------------------------------------
// Narratives.

fn action_text(a: &ActionLabel) -> String {
    match a {
        ActionLabel::Output { chan, alias } => format!("output {chan}({alias})"),
        ActionLabel::FreeInput { chan, payload } => format!("input {chan} {payload}"),
        ActionLabel::Tau => "tau".to_string(),
    }
}

fn event_text(e: &crate::lts::Event) -> String {
    format!("{} at {}", action_text(&e.action), e.loc)
}

/// Human-readable account of a strategy, one line per step.
pub fn explain(w: &Witness) -> String {
    let mut out = String::new();
    explain_into(w, 0, &mut out);
    out
}

fn explain_into(w: &Witness, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match w {
        Witness::Static { test } => {
            let _ = writeln!(out, "{pad}static test {test}");
        }
        Witness::Failure { side, event } => {
            let _ = writeln!(
                out,
                "{pad}{side} can perform {}, which {} cannot mirror",
                event_text(event),
                side.other()
            );
        }
        Witness::Move {
            side,
            event,
            retained,
            responses,
        } => {
            let keep = if retained.is_empty() {
                String::new()
            } else {
                let pairs: Vec<String> = retained
                    .iter()
                    .map(|(l, r)| format!("{} ~ {}", event_text(l), event_text(r)))
                    .collect();
                format!(" keeping running pairs [{}]", pairs.join("; "))
            };
            let other = side.other();
            let _ = writeln!(out, "{pad}{side} plays {}{keep}", event_text(event));
            if responses.is_empty() {
                let _ = writeln!(out, "{pad}{other} has no matching answer");
            }
            for r in responses {
                match &r.next {
                    Witness::Static { test } => {
                        let _ = writeln!(
                            out,
                            "{pad}after {} on the {other}, static test {test}",
                            event_text(&r.event)
                        );
                    }
                    next => {
                        let _ = writeln!(out, "{pad}if {other} answers {}:", event_text(&r.event));
                        explain_into(next, indent + 1, out);
                    }
                }
            }
        }
    }
}

/// Which side leads the first round, if any.
pub fn first_leader(w: &Witness) -> Option<Side> {
    match w {
        Witness::Move { side, .. } | Witness::Failure { side, .. } => Some(*side),
        Witness::Static { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_corpus_gives_empty_report() {
        let r = run_cases(&[], CheckOptions::default());
        assert!(r.cases.is_empty());
        assert_eq!(r.render_text(), "0 passed, 0 failed\n");
    }

    #[test]
    fn bad_case_is_a_failure_not_a_crash() {
        let case = CorpusCase {
            name: "broken".into(),
            left: "out(a".into(),
            right: "0".into(),
            relation: "sim-i".into(),
            expected: Expected::RelatedExact,
            bounds: String::new(),
            theory: TheoryPreset::None,
            anchor: String::new(),
        };
        let r = run_case(&case, CheckOptions::default());
        assert!(!r.pass);
        assert!(r.error.is_some());
    }

    #[test]
    fn parses_fixture_text() {
        let text = r#"
[[case]]
name = "tiny"
left = "out(a,a)"
right = "out(a,a)"
relation = "bisim-i"
expected = "RELATED_EXACT"
"#;
        let f: CorpusFile = toml::from_str(text).unwrap();
        assert_eq!(f.case.len(), 1);
        let r = run_case(&f.case[0], CheckOptions::default());
        assert!(r.pass, "{r:?}");
    }
}
