//! grammar-forge: post-processing for generated Xtext-style grammars.
//!
//! Grammar generators produce working but verbose grammars: brace-heavy,
//! keyword-heavy, one attribute per line. This crate parses such a grammar
//! into a line-oriented document model, applies an ordered list of scoped,
//! declaratively configured optimization rules, and serializes the result,
//! along with diff and metrics reports. Because the configuration is data,
//! the same file can be re-applied after the grammar is regenerated from an
//! evolved meta-model; applications that no longer match surface in the
//! report instead of failing the run.
//!
//! The pieces:
//!
//! - [`model`]: parse / serialize and size metrics ([`Grammar`]).
//! - [`scope`]: where a rule applies — global, one rule, one attribute,
//!   minus exclusions ([`ScopeSpec`]).
//! - [`catalog`]: the optimization rules themselves ([`Catalog`]), plus the
//!   registration extension point.
//! - [`engine`]: ordered application with per-application outcomes
//!   ([`apply_all`]).
//! - [`config`]: the line-oriented configuration format and config diffing
//!   ([`ConfigFile`]).
//! - [`diff`]: structural grammar diffing and the token-level imitation
//!   check against a reference grammar.
//!
//! ```
//! use grammar_forge::{apply_all, Catalog, ConfigFile, Grammar};
//!
//! let grammar = Grammar::parse("NodeStmt returns NodeStmt:\n\t{NodeStmt}\n\t'{' ('node' node=NodeId)? '}';\n").unwrap();
//! let catalog = Catalog::builtin();
//! let config = ConfigFile::parse("removeBraces rule=NodeStmt\n", "inline.gro", &catalog).unwrap();
//! let (optimized, report) = apply_all(&grammar, &config.applications, &catalog, true).unwrap();
//! assert_eq!(report.gora_count(), 1);
//! assert!(!optimized.to_text().contains("'{'"));
//! ```

pub mod catalog;
pub mod config;
pub mod diff;
pub mod engine;
mod lcs;
pub mod model;
pub mod scope;
pub mod tokens;

pub use catalog::{Arity, Catalog, CatalogEntry, CatalogError, ChangeStats, RuleError, ScopeKinds, Subject};
pub use config::{diff_configs, ConfigDiff, ConfigError, ConfigFile};
pub use diff::{diff_grammars, diff_grammars_with_renames, match_against_reference, DiffReport, ImitationReport};
pub use engine::{apply_all, ApplicationOutcome, EngineError, EngineReport, OutcomeStatus, RuleApplication};
pub use model::{Grammar, GrammarMetrics, GrammarRule, ImportDecl, LineEntry, ParseError};
pub use scope::{resolve_scope, ScopeError, ScopeKind, ScopeSpec};
