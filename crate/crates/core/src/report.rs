//! Validation reports shared by every check in the crate.

use serde::{Deserialize, Serialize};

/// Finding codes emitted by the validators.
pub mod codes {
    pub const NAME_CHARSET: &str = "NAME_CHARSET";
    pub const SCENARIO_SUFFIX: &str = "SCENARIO_SUFFIX";
    pub const SCENARIO_SUFFIX_UNEXPECTED: &str = "SCENARIO_SUFFIX_UNEXPECTED";
    pub const STATE_PATTERN: &str = "STATE_PATTERN";
    pub const SCENARIO_NOT_EVENT: &str = "SCENARIO_NOT_EVENT";
    pub const DUPLICATE_NAME: &str = "DUPLICATE_NAME";

    pub const FE_REL_DANGLING: &str = "FE_REL_DANGLING";
    pub const FE_REL_SELF: &str = "FE_REL_SELF";
    pub const FE_REL_CONTRADICTION: &str = "FE_REL_CONTRADICTION";
    pub const FE_REL_ARITY: &str = "FE_REL_ARITY";
    pub const CORESET_NONCORE: &str = "CORESET_NONCORE";

    pub const NO_FES: &str = "NO_FES";
    pub const NONLEXICAL_NO_LANGUAGE: &str = "NONLEXICAL_NO_LANGUAGE";
    pub const NONLEXICAL_HAS_LU: &str = "NONLEXICAL_HAS_LU";
    pub const LEXICAL_NO_LU: &str = "LEXICAL_NO_LU";
    pub const LU_NO_EXAMPLE: &str = "LU_NO_EXAMPLE";
    pub const LU_EMPTY_LEMMA: &str = "LU_EMPTY_LEMMA";
    pub const LU_DUPLICATE: &str = "LU_DUPLICATE";
    pub const LU_WRONG_FRAME: &str = "LU_WRONG_FRAME";
    pub const LU_BAD_INCORPORATED_FE: &str = "LU_BAD_INCORPORATED_FE";
    pub const EMPTY_DEFINITION: &str = "EMPTY_DEFINITION";
    pub const FE_NAME_CHARSET: &str = "FE_NAME_CHARSET";
    pub const FE_DUPLICATE_NAME: &str = "FE_DUPLICATE_NAME";
    pub const FE_DUPLICATE_ID: &str = "FE_DUPLICATE_ID";
    pub const FE_ORIGIN_DANGLING: &str = "FE_ORIGIN_DANGLING";
    pub const RELATION_SELF: &str = "RELATION_SELF";
    pub const RELATION_DAUGHTER: &str = "RELATION_DAUGHTER";
    pub const RELATION_DUPLICATE_ID: &str = "RELATION_DUPLICATE_ID";
    pub const RELATION_DUPLICATE: &str = "RELATION_DUPLICATE";
    pub const MAPPING_TARGET_MISSING: &str = "MAPPING_TARGET_MISSING";
    pub const UNKNOWN_LANGUAGE: &str = "UNKNOWN_LANGUAGE";

    pub const INCOMPLETE_MAPPING: &str = "INCOMPLETE_MAPPING";
    pub const NAME_COLLISION: &str = "NAME_COLLISION";
    pub const UNKNOWN_FRAME: &str = "UNKNOWN_FRAME";
    pub const UNKNOWN_FE: &str = "UNKNOWN_FE";
    pub const UNKNOWN_SUGGESTION: &str = "UNKNOWN_SUGGESTION";
    pub const FE_MAPPED_LOCKED: &str = "FE_MAPPED_LOCKED";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    PassWithWarnings,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub code: String,
    pub severity: Severity,
    pub message: String,
    /// Path of the offending item, e.g. `fes[2].name`.
    pub subject: String,
}

/// Ordered findings with a verdict derived from them.
///
/// The verdict is never stored independently: it is `Fail` iff some finding
/// is an error, and `Pass` iff there are no findings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "ReportRepr", into = "ReportRepr")]
pub struct ValidationReport {
    findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn verdict(&self) -> Verdict {
        if self.findings.is_empty() {
            Verdict::Pass
        } else if self.findings.iter().any(|f| f.severity == Severity::Error) {
            Verdict::Fail
        } else {
            Verdict::PassWithWarnings
        }
    }

    pub fn is_fail(&self) -> bool {
        self.verdict() == Verdict::Fail
    }

    pub fn findings(&self) -> &[Finding] {
        &self.findings
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }

    pub fn codes(&self) -> Vec<&str> {
        self.findings.iter().map(|f| f.code.as_str()).collect()
    }

    pub fn error(&mut self, code: &str, subject: impl Into<String>, message: impl Into<String>) {
        self.push(code, Severity::Error, subject, message);
    }

    pub fn warning(&mut self, code: &str, subject: impl Into<String>, message: impl Into<String>) {
        self.push(code, Severity::Warning, subject, message);
    }

    fn push(&mut self, code: &str, severity: Severity, subject: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding {
            code: code.to_string(),
            severity,
            message: message.into(),
            subject: subject.into(),
        });
    }

    /// Appends another report's findings, prefixing their subjects.
    pub fn merge(&mut self, other: ValidationReport, prefix: &str) {
        for mut f in other.findings {
            if !prefix.is_empty() {
                f.subject = if f.subject.is_empty() {
                    prefix.to_string()
                } else {
                    format!("{prefix}.{}", f.subject)
                };
            }
            self.findings.push(f);
        }
    }

    /// Keeps only findings the predicate accepts.
    pub fn retain(&mut self, keep: impl FnMut(&Finding) -> bool) {
        self.findings.retain(keep);
    }
}

#[derive(Serialize, Deserialize)]
struct ReportRepr {
    verdict: Verdict,
    findings: Vec<Finding>,
}

impl From<ReportRepr> for ValidationReport {
    fn from(repr: ReportRepr) -> Self {
        Self { findings: repr.findings }
    }
}

impl From<ValidationReport> for ReportRepr {
    fn from(report: ValidationReport) -> Self {
        Self { verdict: report.verdict(), findings: report.findings }
    }
}
