//! Certificate files.
//!
//! ```json
//! {
//!   "final_post": "stack = x :: rest => x > 0",
//!   "max_height": 6,
//!   "steps": [
//!     { "pre": "...", "script": "OP_DUP", "post": "...", "evidence": "enumerated" }
//!   ]
//! }
//! ```
//!
//! Formulas use the formula text format (clauses separated by newlines),
//! scripts the script text format. `max_height` is optional.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wpscript_core::{
    parse_formula, parse_script, render_formula, render_script, CertStep, Certificate,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepFile {
    pub pre: String,
    pub script: String,
    pub post: String,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub final_post: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_height: Option<usize>,
    pub steps: Vec<StepFile>,
}

impl CertificateFile {
    pub fn from_certificate(cert: &Certificate, max_height: Option<usize>) -> Self {
        CertificateFile {
            final_post: render_formula(&cert.final_post),
            max_height,
            steps: cert
                .steps
                .iter()
                .map(|s| StepFile {
                    pre: render_formula(&s.pre),
                    script: render_script(&s.segment),
                    post: render_formula(&s.post),
                    evidence: s.evidence.name().into(),
                })
                .collect(),
        }
    }

    pub fn to_certificate(&self, path: &Path) -> Result<Certificate, CliError> {
        let bad = |message: String| CliError::Certificate {
            path: path.into(),
            message,
        };
        let formula = |what: &str, text: &str| {
            parse_formula(text).map_err(|e| bad(format!("{what}: line {}: {}", e.line, e.message)))
        };
        if self.steps.is_empty() {
            return Err(bad("no steps".into()));
        }
        let mut steps = Vec::with_capacity(self.steps.len());
        for (i, s) in self.steps.iter().enumerate() {
            steps.push(CertStep {
                pre: formula(&format!("step {i} pre"), &s.pre)?,
                segment: parse_script(&s.script)
                    .map_err(|e| bad(format!("step {i} script: {e}")))?,
                post: formula(&format!("step {i} post"), &s.post)?,
                evidence: s
                    .evidence
                    .parse()
                    .map_err(|e| bad(format!("step {i}: {e}")))?,
            });
        }
        Ok(Certificate {
            steps,
            final_post: formula("final_post", &self.final_post)?,
        })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.into(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Certificate {
            path: path.into(),
            message: e.to_string(),
        })
    }
}
