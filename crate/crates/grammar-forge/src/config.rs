//! The declarative configuration format, one rule application per line:
//!
//! ```text
//! # optimize the DOT grammar
//! removeBraces rule=NodeStmt
//! removeKeyword rule=NodeStmt
//! renameKeyword arg=graph arg=digraph except=Subgraph
//! ```
//!
//! `<ruleKey> [rule=<name>] [attr=<name>] [arg=<value>]* [except=<a,b,..>]`,
//! `#` starts a comment, values with spaces go in double quotes with
//! backslash escapes. Configs are data: diffable and version-controllable,
//! which is the point of re-applying them across language versions.

use serde::Serialize;

use crate::catalog::Catalog;
use crate::engine::RuleApplication;
use crate::lcs::lcs_mask;
use crate::scope::ScopeSpec;

/// A parsed configuration: ordered applications plus the source line each
/// one came from (1-based), for diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    pub applications: Vec<RuleApplication>,
    pub source_path: String,
    pub line_map: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {reason}")]
    Syntax { path: String, line: usize, reason: String },
    #[error("{path}:{line}: unknown rule '{key}'")]
    UnknownRule { path: String, line: usize, key: String },
    #[error("{path}:{line}: {reason}")]
    BadArity { path: String, line: usize, key: String, reason: String },
}

impl ConfigFile {
    /// Parse and validate configuration text against a catalog.
    pub fn parse(source: &str, path: &str, catalog: &Catalog) -> Result<ConfigFile, ConfigError> {
        let mut config = ConfigFile { source_path: path.to_string(), ..ConfigFile::default() };
        let syntax = |line: usize, reason: String| ConfigError::Syntax {
            path: path.to_string(),
            line,
            reason,
        };
        for (i, raw) in source.replace("\r\n", "\n").split('\n').enumerate() {
            let line_no = i + 1;
            let tokens = split_config_line(raw).map_err(|reason| syntax(line_no, reason))?;
            let Some((key, rest)) = tokens.split_first() else { continue };
            if key.contains('=') {
                return Err(syntax(line_no, format!("expected a rule key first, found '{key}'")));
            }
            if !catalog.contains(key) {
                return Err(ConfigError::UnknownRule {
                    path: path.to_string(),
                    line: line_no,
                    key: key.clone(),
                });
            }
            let mut scope = ScopeSpec::default();
            let mut args = Vec::new();
            for token in rest {
                let Some((field, value)) = token.split_once('=') else {
                    return Err(syntax(
                        line_no,
                        format!("expected key=value, found '{token}'"),
                    ));
                };
                match field {
                    "rule" => {
                        if scope.rule_name.replace(value.to_string()).is_some() {
                            return Err(syntax(line_no, "duplicate rule= selector".into()));
                        }
                    }
                    "attr" => {
                        if scope.attr_name.replace(value.to_string()).is_some() {
                            return Err(syntax(line_no, "duplicate attr= selector".into()));
                        }
                    }
                    "arg" => args.push(value.to_string()),
                    "except" => {
                        scope
                            .exclusions
                            .extend(value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from));
                    }
                    other => {
                        return Err(syntax(
                            line_no,
                            format!("unknown field '{other}=' (expected rule=, attr=, arg= or except=)"),
                        ))
                    }
                }
            }
            if let Err(reason) = catalog.validate(key, &scope, &args) {
                if reason.contains("argument") {
                    return Err(ConfigError::BadArity {
                        path: path.to_string(),
                        line: line_no,
                        key: key.clone(),
                        reason,
                    });
                }
                return Err(syntax(line_no, reason));
            }
            config.applications.push(RuleApplication::new(key.clone(), scope, args));
            config.line_map.push(line_no);
        }
        Ok(config)
    }

    /// Source line (1-based) of application `index`.
    pub fn line_of(&self, index: usize) -> usize {
        self.line_map.get(index).copied().unwrap_or(0)
    }

    /// Serialize back to configuration text (comments are not preserved).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for app in &self.applications {
            out.push_str(&render_application(app));
            out.push('\n');
        }
        out
    }
}

fn render_application(app: &RuleApplication) -> String {
    let mut parts = vec![app.catalog_rule.clone()];
    if let Some(rule) = &app.scope.rule_name {
        parts.push(format!("rule={}", quote_value(rule)));
    }
    if let Some(attr) = &app.scope.attr_name {
        parts.push(format!("attr={}", quote_value(attr)));
    }
    for arg in &app.args {
        parts.push(format!("arg={}", quote_value(arg)));
    }
    if !app.scope.exclusions.is_empty() {
        parts.push(format!("except={}", app.scope.exclusions.join(",")));
    }
    parts.join(" ")
}

fn quote_value(value: &str) -> String {
    if value.is_empty()
        || value
            .chars()
            .any(|c| c.is_whitespace() || c == '"' || c == '#')
    {
        let escaped = value.replace('\\', "\\\\").replace('"', "\\\"");
        format!("\"{escaped}\"")
    } else {
        value.to_string()
    }
}

/// Split one config line into whitespace-separated tokens. Double quotes
/// group; backslash escapes the next character inside quotes. `#` outside
/// quotes starts a comment.
fn split_config_line(line: &str) -> Result<Vec<String>, String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut has_token = false;
    let mut chars = line.chars();
    'outer: while let Some(c) = chars.next() {
        match c {
            '#' => break 'outer,
            c if c.is_whitespace() => {
                if has_token {
                    tokens.push(std::mem::take(&mut current));
                    has_token = false;
                }
            }
            '"' => {
                has_token = true;
                loop {
                    match chars.next() {
                        Some('\\') => match chars.next() {
                            Some(e) => current.push(e),
                            None => return Err("dangling escape in quoted value".into()),
                        },
                        Some('"') => break,
                        Some(c) => current.push(c),
                        None => return Err("unterminated quoted value".into()),
                    }
                }
            }
            c => {
                has_token = true;
                current.push(c);
            }
        }
    }
    if has_token {
        tokens.push(current);
    }
    Ok(tokens)
}

/// One entry of a configuration diff.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ConfigChange {
    Added { application: RuleApplication },
    Deleted { application: RuleApplication },
    Changed { before: RuleApplication, after: RuleApplication },
}

/// Result of diffing two configurations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConfigDiff {
    pub changes: Vec<ConfigChange>,
    pub added: usize,
    pub deleted: usize,
    pub changed: usize,
}

impl ConfigDiff {
    /// Changed + added + deleted rule applications: the effort number for
    /// one evolution step.
    pub fn cora_count(&self) -> usize {
        self.added + self.deleted + self.changed
    }
}

/// Diff two configurations by longest common subsequence over application
/// tuples. A deletion paired with an addition of the same catalog rule and
/// rule selector counts as one change.
pub fn diff_configs(before: &ConfigFile, after: &ConfigFile) -> ConfigDiff {
    let a = &before.applications;
    let b = &after.applications;
    let common = lcs_mask(a, b);
    let mut deleted: Vec<&RuleApplication> =
        a.iter().enumerate().filter(|(i, _)| !common.0[*i]).map(|(_, x)| x).collect();
    let added: Vec<&RuleApplication> =
        b.iter().enumerate().filter(|(i, _)| !common.1[*i]).map(|(_, x)| x).collect();

    let mut diff = ConfigDiff::default();
    for add in added {
        let slot = deleted.iter().position(|del| {
            del.catalog_rule == add.catalog_rule && del.scope.rule_name == add.scope.rule_name
        });
        match slot {
            Some(i) => {
                let del = deleted.remove(i);
                diff.changes.push(ConfigChange::Changed {
                    before: del.clone(),
                    after: add.clone(),
                });
                diff.changed += 1;
            }
            None => {
                diff.changes.push(ConfigChange::Added { application: add.clone() });
                diff.added += 1;
            }
        }
    }
    for del in deleted {
        diff.changes.push(ConfigChange::Deleted { application: del.clone() });
        diff.deleted += 1;
    }
    diff
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Catalog {
        Catalog::builtin()
    }

    #[test]
    fn parses_scoped_applications() {
        let src = "\
# DOT optimization
removeBraces rule=NodeStmt
convert1toStarToStar rule=NodeStmt attr=attrLists

renameKeyword arg=graph arg=digraph except=Subgraph,EdgeStmt
";
        let cfg = ConfigFile::parse(src, "dot.gro", &catalog()).unwrap();
        assert_eq!(cfg.applications.len(), 3);
        assert_eq!(cfg.line_map, vec![2, 3, 5]);
        let app = &cfg.applications[0];
        assert_eq!(app.catalog_rule, "removeBraces");
        assert_eq!(app.scope.rule_name.as_deref(), Some("NodeStmt"));
        assert_eq!(app.scope.attr_name, None);
        let app = &cfg.applications[1];
        assert_eq!(app.scope.attr_name.as_deref(), Some("attrLists"));
        let app = &cfg.applications[2];
        assert_eq!(app.args, vec!["graph", "digraph"]);
        assert_eq!(app.scope.exclusions, vec!["Subgraph", "EdgeStmt"]);
    }

    #[test]
    fn empty_file_is_zero_applications() {
        let cfg = ConfigFile::parse("", "empty.gro", &catalog()).unwrap();
        assert!(cfg.applications.is_empty());
    }

    #[test]
    fn quoted_values_with_escapes() {
        let src = "renameKeyword rule=A arg=\"two words\" arg=\"say \\\"hi\\\"\"\n";
        let cfg = ConfigFile::parse(src, "q.gro", &catalog()).unwrap();
        assert_eq!(cfg.applications[0].args, vec!["two words", "say \"hi\""]);
    }

    #[test]
    fn unknown_rule_names_the_line() {
        let err = ConfigFile::parse("removeBraces\nfixAll rule=X\n", "c.gro", &catalog())
            .unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownRule { path: "c.gro".into(), line: 2, key: "fixAll".into() }
        );
    }

    #[test]
    fn bad_arity_is_its_own_error() {
        let err = ConfigFile::parse("renameKeyword arg=old\n", "c.gro", &catalog()).unwrap_err();
        match err {
            ConfigError::BadArity { line: 1, key, .. } => assert_eq!(key, "renameKeyword"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scope_violations_are_syntax_errors() {
        let err = ConfigFile::parse("removeBraces attr=x\n", "c.gro", &catalog()).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));
        let err = ConfigFile::parse("renameRule arg=New\n", "c.gro", &catalog()).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));
    }

    #[test]
    fn parse_then_serialize_preserves_applications() {
        let src = "\
removeBraces rule=NodeStmt
removeKeyword rule=NodeStmt arg=node
renameKeyword arg=graph arg=digraph except=Subgraph
addKeywordToAttr rule=A attr=b arg=with arg=before
";
        let cat = catalog();
        let cfg = ConfigFile::parse(src, "a.gro", &cat).unwrap();
        let cfg2 = ConfigFile::parse(&cfg.to_text(), "b.gro", &cat).unwrap();
        assert_eq!(cfg.applications, cfg2.applications);
    }

    #[test]
    fn diff_identical_configs_is_zero() {
        let src = "removeBraces rule=NodeStmt\nremoveKeyword rule=NodeStmt\n";
        let cat = catalog();
        let a = ConfigFile::parse(src, "a.gro", &cat).unwrap();
        let b = ConfigFile::parse(src, "b.gro", &cat).unwrap();
        assert_eq!(diff_configs(&a, &b).cora_count(), 0);
    }

    #[test]
    fn renamed_attr_counts_as_one_change() {
        let cat = catalog();
        let v10 = ConfigFile::parse(
            "removeBraces\nremoveAttribute rule=VarParameter attr=bindParameter\nremoveKeyword\n",
            "v10.gro",
            &cat,
        )
        .unwrap();
        let v11 = ConfigFile::parse(
            "removeBraces\nremoveAttribute rule=VarParameter attr=representedParameter\nremoveKeyword\n",
            "v11.gro",
            &cat,
        )
        .unwrap();
        let diff = diff_configs(&v10, &v11);
        assert_eq!(diff.cora_count(), 1);
        assert_eq!(diff.changed, 1);
        assert_eq!(diff_configs(&v11, &v10).cora_count(), 1);
    }

    #[test]
    fn deleted_application_counts_one() {
        let cat = catalog();
        let v12 = ConfigFile::parse(
            "removeBraces\naddSquareBracketsToAttr rule=TypeDef attr=typedef_condition\n",
            "v12.gro",
            &cat,
        )
        .unwrap();
        let v13 = ConfigFile::parse("removeBraces\n", "v13.gro", &cat).unwrap();
        let diff = diff_configs(&v12, &v13);
        assert_eq!(diff.cora_count(), 1);
        assert_eq!(diff.deleted, 1);
    }

    #[test]
    fn comments_and_whitespace_do_not_matter_for_diffs() {
        let cat = catalog();
        let a = ConfigFile::parse("removeBraces rule=X\n", "a.gro", &cat).unwrap();
        let b = ConfigFile::parse("# hello\n\n   removeBraces   rule=X\n", "b.gro", &cat).unwrap();
        assert_eq!(diff_configs(&a, &b).cora_count(), 0);
    }
}
