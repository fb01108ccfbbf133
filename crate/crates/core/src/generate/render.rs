//! Template-driven rendering of rules into natural-language requirements.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::rule::{Language, Level, Position, Predicate, PredicateKind, ProcedureStep, Relation, Rule, Value};

use super::GenError;

const BUILTIN: &str = include_str!("templates.toml");

#[derive(Debug, Clone, Deserialize)]
pub struct Templates {
    #[serde(flatten)]
    languages: BTreeMap<Language, LanguageTemplates>,
}

#[derive(Debug, Clone, Deserialize)]
struct LanguageTemplates {
    header: String,
    scope: ScopeTemplates,
    levels: BTreeMap<Level, LevelNames>,
    rules: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Deserialize)]
struct ScopeTemplates {
    response: String,
    index: String,
    index_last: Option<String>,
    all: String,
    before: String,
    after: String,
    between: String,
    nested: String,
}

#[derive(Debug, Clone, Deserialize)]
struct LevelNames {
    one: String,
    many: String,
    #[serde(default)]
    note: String,
}

impl Default for Templates {
    fn default() -> Self {
        Templates::from_toml(BUILTIN).expect("built-in templates parse")
    }
}

/// Template key for a terminal predicate and relation.
pub fn template_key(kind: PredicateKind, relation: Relation) -> String {
    format!("{}.{}", kind.name(), relation.name())
}

impl Templates {
    pub fn from_toml(src: &str) -> Result<Templates, GenError> {
        toml::from_str(src).map_err(|e| GenError::Templates(e.to_string()))
    }

    /// Keys of every valid (predicate, relation, language) combination that
    /// has no template.
    pub fn missing(&self) -> Vec<String> {
        let mut out = Vec::new();
        for lang in Language::ALL {
            for kind in PredicateKind::ALL {
                for &rel in kind.allowed_relations() {
                    let key = template_key(kind, rel);
                    let present = self.languages.get(&lang).is_some_and(|t| t.rules.contains_key(&key));
                    if !present {
                        out.push(format!("{lang}:{key}"));
                    }
                }
            }
        }
        out
    }

    fn lang(&self, language: Language) -> Result<&LanguageTemplates, GenError> {
        self.languages.get(&language).ok_or_else(|| GenError::MissingTemplate(format!("{language}")))
    }

    /// Renders one rule as a single requirement sentence.
    pub fn render_rule(&self, rule: &Rule, language: Language) -> Result<String, GenError> {
        let t = self.lang(language)?;
        let terminal = rule.terminal().ok_or_else(|| GenError::MissingTemplate("empty procedure".into()))?;
        let kind = terminal.predicate.kind();
        let key = template_key(kind, rule.relation);
        let template =
            t.rules.get(&key).ok_or_else(|| GenError::MissingTemplate(format!("{language}:{key}")))?;

        let steps = rule.effective_steps();
        let (scope_steps, n) = match (&rule.value, kind) {
            (Value::Int(n), PredicateKind::Count) => (&steps[..steps.len() - 1], Some(*n)),
            _ => (steps, None),
        };
        let scope = t.scope_phrase(scope_steps, language)?;
        let names = t.level(terminal)?;
        let level = if n == Some(1) { &names.one } else { &names.many };
        let position = match terminal.predicate {
            Predicate::Index(p) => position_word(p, language),
            Predicate::Before(k) | Predicate::After(k) => position_word(Position::Nth(k), language),
            _ => String::new(),
        };
        let value = match &rule.value {
            Value::Text(s) => s.replace('\n', "\\n"),
            Value::Int(_) => String::new(),
        };
        let out = template
            .replace("{scope}", &scope)
            .replace("{level}", level)
            .replace("{position}", &position)
            .replace("{n}", &n.map(|n| n.to_string()).unwrap_or_default())
            .replace("{note}", &names.note)
            .replace("{value}", &value);
        Ok(capitalize(&out))
    }

    /// Seed task followed by a numbered requirement list. An empty seed task
    /// leaves just the list.
    pub fn render_prompt(&self, rules: &[Rule], language: Language, seed_task: &str) -> Result<String, GenError> {
        let t = self.lang(language)?;
        let mut out = match seed_task.trim() {
            "" => t.header.clone(),
            task => format!("{task}\n\n{}", t.header),
        };
        for (i, rule) in rules.iter().enumerate() {
            out.push_str(&format!("\n{}. {}", i + 1, self.render_rule(rule, language)?));
        }
        Ok(out)
    }
}

impl LanguageTemplates {
    fn level(&self, step: &ProcedureStep) -> Result<LevelNames, GenError> {
        let names = self
            .levels
            .get(&step.level)
            .ok_or_else(|| GenError::MissingTemplate(format!("level {}", step.level)))?;
        let pattern = step.pattern.as_ref().map(|p| p.as_str()).unwrap_or_default();
        Ok(LevelNames {
            one: names.one.replace("{pattern}", pattern),
            many: names.many.replace("{pattern}", pattern),
            note: names.note.clone(),
        })
    }

    fn step_phrase(&self, step: &ProcedureStep, language: Language) -> Result<String, GenError> {
        if step.level == Level::Answer {
            return Ok(self.scope.response.clone());
        }
        let names = self.level(step)?;
        let (template, position) = match step.predicate {
            Predicate::Index(Position::Last) => match &self.scope.index_last {
                Some(t) => (t, String::new()),
                None => (&self.scope.index, position_word(Position::Last, language)),
            },
            Predicate::Index(p) => (&self.scope.index, position_word(p, language)),
            Predicate::All | Predicate::Count => (&self.scope.all, String::new()),
            Predicate::Before(k) => (&self.scope.before, position_word(Position::Nth(k), language)),
            Predicate::After(k) => (&self.scope.after, position_word(Position::Nth(k), language)),
            Predicate::Between => (&self.scope.between, String::new()),
        };
        Ok(template
            .replace("{levels}", &names.many)
            .replace("{level}", &names.one)
            .replace("{position}", &position))
    }

    fn scope_phrase(&self, steps: &[ProcedureStep], language: Language) -> Result<String, GenError> {
        let mut phrase: Option<String> = None;
        for step in steps {
            let inner = self.step_phrase(step, language)?;
            phrase = Some(match phrase {
                None => inner,
                Some(outer) => self.scope.nested.replace("{inner}", &inner).replace("{outer}", &outer),
            });
        }
        Ok(phrase.unwrap_or_else(|| self.scope.response.clone()))
    }
}

fn position_word(p: Position, language: Language) -> String {
    match (p, language) {
        (Position::Last, Language::En) => "last".into(),
        (Position::Last, Language::Zh) => "最后".into(),
        (Position::Nth(n), Language::En) => ordinal(n.get()),
        (Position::Nth(n), Language::Zh) => n.to_string(),
    }
}

fn ordinal(n: usize) -> String {
    let suffix = match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}
