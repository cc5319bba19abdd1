//! Line-oriented wizard scripts.
//!
//! One command per line; `#` starts a comment line. JSON arguments use the
//! same bodies as the HTTP API.
//!
//! ```text
//! contributor alice
//! begin lexical                    # or non_lexical
//! lemma {"lemma": "jeitinho", "pos": "n", "language": "pt-BR"}
//! expect-hits 0
//! review {"decision": "create_new_frame"}
//! step {"step": "TypeSelection", "payload": {"frame_type": "event"}}
//! back {"to_step": "TypeSelection"}
//! expect-step TypeSelection
//! finalize {"sentence": "..."}
//! ```

use std::io::Write;

use framemaker_core::wizard::{CommitOutcome, ExampleInput, LemmaInput, ReviewDecision};
use framemaker_core::{ContributorId, FlowKind, SessionId, StepPayload, Wizard, WizardError, WizardStep};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ScriptError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {error}{}", report_suffix(.error))]
    Wizard { line: usize, error: WizardError },
    #[error("line {line}: expected {expected}, found {found}")]
    Expectation { line: usize, expected: String, found: String },
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

fn report_suffix(e: &WizardError) -> String {
    match e.report() {
        Some(r) => r.findings().iter().map(|f| format!("\n  {} {}: {}", f.code, f.subject, f.message)).collect(),
        None => String::new(),
    }
}

/// What a successful `finalize` prints (one JSON object per line).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Committed {
    pub name: String,
    #[serde(flatten)]
    pub outcome: CommitOutcome,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Back {
    to_step: WizardStep,
}

struct Runner {
    contributor: ContributorId,
    session: Option<SessionId>,
    line: usize,
}

impl Runner {
    fn syntax(&self, message: impl Into<String>) -> ScriptError {
        ScriptError::Syntax { line: self.line, message: message.into() }
    }

    fn wiz<T>(&self, r: Result<T, WizardError>) -> Result<T, ScriptError> {
        r.map_err(|error| ScriptError::Wizard { line: self.line, error })
    }

    fn json<T: DeserializeOwned>(&self, arg: &str) -> Result<T, ScriptError> {
        serde_json::from_str(arg).map_err(|e| self.syntax(format!("bad JSON argument: {e}")))
    }

    fn session(&self) -> Result<SessionId, ScriptError> {
        self.session.clone().ok_or_else(|| self.syntax("no session; use `begin` first"))
    }
}

/// Runs `text` against `wizard`, writing a [`Committed`] line to `out` for
/// every frame or LU committed. Stops at the first failing line.
pub fn run_script(wizard: &Wizard, text: &str, out: &mut impl Write) -> Result<Vec<Committed>, ScriptError> {
    let mut r = Runner { contributor: ContributorId::new("script"), session: None, line: 0 };
    let mut committed = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        r.line = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (cmd, arg) = match line.split_once(char::is_whitespace) {
            Some((c, a)) => (c, a.trim()),
            None => (line, ""),
        };
        match cmd {
            "contributor" => {
                if arg.is_empty() || arg.contains(char::is_whitespace) {
                    return Err(r.syntax("contributor takes one id"));
                }
                r.contributor = ContributorId::new(arg);
            }
            "begin" => {
                let flow: FlowKind = serde_json::from_value(serde_json::Value::String(arg.to_string()))
                    .map_err(|_| r.syntax(format!("unknown flow {arg:?} (lexical or non_lexical)")))?;
                let s = r.wiz(wizard.start_session(r.contributor.clone(), flow))?;
                r.session = Some(s.id);
            }
            "lemma" => {
                let input: LemmaInput = r.json(arg)?;
                let id = r.session()?;
                r.wiz(wizard.submit_lemma(&id, &input))?;
            }
            "review" => {
                let d: ReviewDecision = r.json(arg)?;
                let id = r.session()?;
                r.wiz(wizard.resolve_review(&id, &d))?;
            }
            "step" => {
                let p: StepPayload = r.json(arg)?;
                let id = r.session()?;
                r.wiz(wizard.submit_step(&id, &p))?;
            }
            "back" => {
                let b: Back = r.json(arg)?;
                let id = r.session()?;
                r.wiz(wizard.go_back(&id, b.to_step))?;
            }
            "finalize" => {
                let input: ExampleInput = if arg.is_empty() { ExampleInput::default() } else { r.json(arg)? };
                let id = r.session()?;
                let (s, outcome) = r.wiz(wizard.finalize(&id, &input))?;
                let name = match &s.attach_to {
                    Some(f) => f.name.clone(),
                    None => s.draft.name.clone(),
                };
                let c = Committed { name, outcome };
                serde_json::to_writer(&mut *out, &c).map_err(std::io::Error::from)?;
                writeln!(out)?;
                committed.push(c);
            }
            "expect-step" => {
                let expected: WizardStep = serde_json::from_value(serde_json::Value::String(arg.to_string()))
                    .map_err(|_| r.syntax(format!("unknown step {arg:?}")))?;
                let s = r.wiz(wizard.get_session(&r.session()?))?;
                if s.step != expected {
                    return Err(ScriptError::Expectation {
                        line: r.line,
                        expected: format!("{expected:?}"),
                        found: format!("{:?}", s.step),
                    });
                }
            }
            "expect-hits" => {
                let expected: usize = arg.parse().map_err(|_| r.syntax("expect-hits takes a count"))?;
                let s = r.wiz(wizard.get_session(&r.session()?))?;
                let found = s.search_result.as_ref().map_or(0, |res| res.frame_ids().len());
                if found != expected {
                    return Err(ScriptError::Expectation {
                        line: r.line,
                        expected: format!("{expected} frame hit(s)"),
                        found: found.to_string(),
                    });
                }
            }
            other => return Err(r.syntax(format!("unknown command {other:?}"))),
        }
    }
    Ok(committed)
}
