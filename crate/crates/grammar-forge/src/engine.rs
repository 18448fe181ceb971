//! Ordered application of configured rules. Application `i + 1` sees the
//! grammar produced by application `i`; nothing is reordered, deduplicated
//! or parallelized, because the configured order is meaningful (successive
//! brace substitutions are last-write-wins).

use serde::Serialize;

use crate::catalog::Catalog;
use crate::model::Grammar;
use crate::scope::ScopeSpec;

/// One configured invocation of a catalog rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleApplication {
    pub catalog_rule: String,
    pub scope: ScopeSpec,
    pub args: Vec<String>,
}

impl RuleApplication {
    pub fn new(catalog_rule: impl Into<String>, scope: ScopeSpec, args: Vec<String>) -> Self {
        RuleApplication { catalog_rule: catalog_rule.into(), scope, args }
    }
}

impl std::fmt::Display for RuleApplication {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.catalog_rule)?;
        if let Some(rule) = &self.scope.rule_name {
            write!(f, " rule={rule}")?;
        }
        if let Some(attr) = &self.scope.attr_name {
            write!(f, " attr={attr}")?;
        }
        for arg in &self.args {
            write!(f, " arg={arg}")?;
        }
        if !self.scope.exclusions.is_empty() {
            write!(f, " except={}", self.scope.exclusions.join(","))?;
        }
        Ok(())
    }
}

/// How a single application went.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeStatus {
    Applied,
    NoMatch,
    Error,
}

/// What one application did: how many rules and lines it touched, and why
/// it did nothing, when it did nothing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApplicationOutcome {
    pub application: RuleApplication,
    pub matched_rules: usize,
    pub matched_lines: usize,
    pub status: OutcomeStatus,
    pub message: Option<String>,
}

/// Outcomes for a whole run, in configuration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EngineReport {
    pub outcomes: Vec<ApplicationOutcome>,
}

impl EngineReport {
    /// Number of rule applications executed.
    pub fn gora_count(&self) -> usize {
        self.outcomes.len()
    }

    pub fn has_errors(&self) -> bool {
        self.outcomes.iter().any(|o| o.status == OutcomeStatus::Error)
    }

    /// Applications that matched nothing, with their position: the worklist
    /// after an evolution step.
    pub fn stale(&self) -> impl Iterator<Item = (usize, &ApplicationOutcome)> {
        self.outcomes
            .iter()
            .enumerate()
            .filter(|(_, o)| o.status == OutcomeStatus::NoMatch)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("unknown optimization rule '{0}'")]
    UnknownRule(String),
    #[error("application {} ({}) {}: {}", index + 1, outcome.application, match outcome.status {
        OutcomeStatus::NoMatch => "matched nothing",
        _ => "failed",
    }, outcome.message.as_deref().unwrap_or("no detail"))]
    StrictAbort { index: usize, outcome: Box<ApplicationOutcome> },
}

/// Run the applications in order. In strict mode the first application that
/// errors or matches nothing aborts the run; in lenient mode everything
/// runs and the report carries one outcome per application.
///
/// An application either commits in full or not at all: failed applications
/// leave the grammar exactly as the previous one left it.
pub fn apply_all(
    grammar: &Grammar,
    applications: &[RuleApplication],
    catalog: &Catalog,
    strict: bool,
) -> Result<(Grammar, EngineReport), EngineError> {
    let mut current = grammar.clone();
    let mut report = EngineReport::default();
    for (index, app) in applications.iter().enumerate() {
        let transform = catalog
            .transform(&app.catalog_rule)
            .ok_or_else(|| EngineError::UnknownRule(app.catalog_rule.clone()))?;
        let outcome = if let Err(reason) =
            catalog.validate(&app.catalog_rule, &app.scope, &app.args)
        {
            ApplicationOutcome {
                application: app.clone(),
                matched_rules: 0,
                matched_lines: 0,
                status: OutcomeStatus::Error,
                message: Some(reason),
            }
        } else {
            let mut trial = current.clone();
            match transform(&mut trial, &app.scope, &app.args) {
                Ok(stats) if !stats.is_no_match() => {
                    current = trial;
                    ApplicationOutcome {
                        application: app.clone(),
                        matched_rules: stats.rules_touched,
                        matched_lines: stats.lines_touched,
                        status: OutcomeStatus::Applied,
                        message: stats.note,
                    }
                }
                Ok(stats) => ApplicationOutcome {
                    application: app.clone(),
                    matched_rules: 0,
                    matched_lines: 0,
                    status: OutcomeStatus::NoMatch,
                    message: stats.note,
                },
                Err(e) => ApplicationOutcome {
                    application: app.clone(),
                    matched_rules: 0,
                    matched_lines: 0,
                    status: OutcomeStatus::Error,
                    message: Some(e.to_string()),
                },
            }
        };
        if strict && outcome.status != OutcomeStatus::Applied {
            return Err(EngineError::StrictAbort { index, outcome: Box::new(outcome) });
        }
        report.outcomes.push(outcome);
    }
    Ok((current, report))
}
