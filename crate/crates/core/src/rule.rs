//! Canonical representation of a lexical constraint.
//!
//! A [`Rule`] is a `(procedure, relation, value)` triple. The procedure is a
//! path of [`ProcedureStep`]s that narrows a response down to the text (or
//! element count) being checked; the relation and value say what that target
//! must satisfy. [`check_validity`] enforces the structural and type-safety
//! rules every other module relies on.

use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Response language. Determines sentence splitting and which levels the
/// generator may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Zh,
}

impl Language {
    pub const ALL: [Language; 2] = [Language::En, Language::Zh];

    pub fn as_str(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Zh => "zh",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "en" => Ok(Language::En),
            "zh" => Ok(Language::Zh),
            other => Err(format!("unknown language `{other}` (expected en or zh)")),
        }
    }
}

/// Granularity tier of text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Answer,
    Paragraph,
    Line,
    Bullet,
    Sentence,
    Word,
    Character,
    Letter,
    Punc,
    Pattern,
}

impl Level {
    pub const ALL: [Level; 10] = [
        Level::Answer,
        Level::Paragraph,
        Level::Line,
        Level::Bullet,
        Level::Sentence,
        Level::Word,
        Level::Character,
        Level::Letter,
        Level::Punc,
        Level::Pattern,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Level::Answer => "answer",
            Level::Paragraph => "paragraph",
            Level::Line => "line",
            Level::Bullet => "bullet",
            Level::Sentence => "sentence",
            Level::Word => "word",
            Level::Character => "character",
            Level::Letter => "letter",
            Level::Punc => "punc",
            Level::Pattern => "pattern",
        }
    }

    pub fn from_name(name: &str) -> Option<Level> {
        Level::ALL.into_iter().find(|l| l.name() == name)
    }

    /// Granularity tier; larger is finer. `pattern` has no tier of its own.
    fn tier(self) -> Option<u8> {
        match self {
            Level::Answer => Some(0),
            Level::Paragraph => Some(1),
            Level::Line | Level::Bullet => Some(2),
            Level::Sentence => Some(3),
            Level::Word => Some(4),
            Level::Character | Level::Letter | Level::Punc => Some(5),
            Level::Pattern => None,
        }
    }

    /// Whether `next` may directly follow `self` in a procedure.
    ///
    /// Levels must strictly descend in granularity. `pattern` may follow any
    /// level and nothing may follow it.
    pub fn admits_child(self, next: Level) -> bool {
        match (self.tier(), next.tier()) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(a), Some(b)) => b > a,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A 1-based element position, or the last element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Position {
    Nth(NonZeroUsize),
    Last,
}

impl Position {
    pub fn nth(n: usize) -> Option<Position> {
        NonZeroUsize::new(n).map(Position::Nth)
    }

    /// Zero-based index into a list of `len` elements, if in range.
    pub fn resolve(self, len: usize) -> Option<usize> {
        match self {
            Position::Nth(n) if n.get() <= len => Some(n.get() - 1),
            Position::Last if len > 0 => Some(len - 1),
            _ => None,
        }
    }
}

impl TryFrom<i64> for Position {
    type Error = String;

    fn try_from(v: i64) -> Result<Self, Self::Error> {
        match v {
            -1 => Ok(Position::Last),
            n if n >= 1 => Ok(Position::Nth(NonZeroUsize::new(n as usize).unwrap())),
            n => Err(format!("index must be >= 1 or -1, got {n}")),
        }
    }
}

impl From<Position> for i64 {
    fn from(p: Position) -> i64 {
        match p {
            Position::Nth(n) => n.get() as i64,
            Position::Last => -1,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", i64::from(*self))
    }
}

/// Selection or aggregation applied to the elements of a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predicate {
    Index(Position),
    All,
    Before(NonZeroUsize),
    After(NonZeroUsize),
    Between,
    Count,
}

/// Predicate discriminant, used for template lookup and relation tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateKind {
    Index,
    All,
    Before,
    After,
    Between,
    Count,
}

impl PredicateKind {
    pub const ALL: [PredicateKind; 6] = [
        PredicateKind::Index,
        PredicateKind::All,
        PredicateKind::Before,
        PredicateKind::After,
        PredicateKind::Between,
        PredicateKind::Count,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PredicateKind::Index => "index",
            PredicateKind::All => "all",
            PredicateKind::Before => "before",
            PredicateKind::After => "after",
            PredicateKind::Between => "between",
            PredicateKind::Count => "count",
        }
    }

    /// Relations this predicate may be paired with when it terminates a
    /// procedure.
    pub fn allowed_relations(self) -> &'static [Relation] {
        use Relation::*;
        match self {
            PredicateKind::Index | PredicateKind::All => &Relation::TEXTUAL,
            PredicateKind::Before => &[Contain, NotContain],
            PredicateKind::After => &[Contain, NotContain, Equal],
            PredicateKind::Between => &[Equal],
            PredicateKind::Count => &Relation::NUMERICAL,
        }
    }
}

impl Predicate {
    pub fn kind(&self) -> PredicateKind {
        match self {
            Predicate::Index(_) => PredicateKind::Index,
            Predicate::All => PredicateKind::All,
            Predicate::Before(_) => PredicateKind::Before,
            Predicate::After(_) => PredicateKind::After,
            Predicate::Between => PredicateKind::Between,
            Predicate::Count => PredicateKind::Count,
        }
    }
}

/// Comparison operator of a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Eq,
    Neq,
    Gt,
    Gte,
    Lt,
    Lte,
    StartsWith,
    EndsWith,
    Equal,
    Contain,
    NotStartsWith,
    NotEndsWith,
    NotContain,
}

impl Relation {
    pub const NUMERICAL: [Relation; 6] = [
        Relation::Eq,
        Relation::Neq,
        Relation::Gt,
        Relation::Gte,
        Relation::Lt,
        Relation::Lte,
    ];

    pub const TEXTUAL: [Relation; 7] = [
        Relation::StartsWith,
        Relation::EndsWith,
        Relation::Equal,
        Relation::Contain,
        Relation::NotStartsWith,
        Relation::NotEndsWith,
        Relation::NotContain,
    ];

    pub fn is_numerical(self) -> bool {
        Relation::NUMERICAL.contains(&self)
    }

    /// Surface token: a symbol for numerical relations, a keyword otherwise.
    pub fn token(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Neq => "!=",
            Relation::Gt => ">",
            Relation::Gte => ">=",
            Relation::Lt => "<",
            Relation::Lte => "<=",
            Relation::StartsWith => "startswith",
            Relation::EndsWith => "endswith",
            Relation::Equal => "equal",
            Relation::Contain => "contain",
            Relation::NotStartsWith => "notstartswith",
            Relation::NotEndsWith => "notendswith",
            Relation::NotContain => "notcontain",
        }
    }

    /// Stable lowercase name, also the serde representation.
    pub fn name(self) -> &'static str {
        match self {
            Relation::Eq => "eq",
            Relation::Neq => "neq",
            Relation::Gt => "gt",
            Relation::Gte => "gte",
            Relation::Lt => "lt",
            Relation::Lte => "lte",
            other => other.token(),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Target literal of a comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(u64),
    Text(String),
}

/// A compiled regular expression that compares by its source text.
#[derive(Clone)]
pub struct Pattern {
    regex: Regex,
}

impl Pattern {
    /// Compiles `source`. Sources containing an unescaped `/)` are rejected
    /// because they cannot be written in the one-line rule syntax.
    pub fn new(source: &str) -> Result<Pattern, PatternError> {
        if source.is_empty() {
            return Err(PatternError::Empty);
        }
        if find_unescaped_close(source).is_some() {
            return Err(PatternError::Delimiter);
        }
        let regex = Regex::new(source).map_err(|e| PatternError::Regex(e.to_string()))?;
        Ok(Pattern { regex })
    }

    pub fn as_str(&self) -> &str {
        self.regex.as_str()
    }

    pub fn regex(&self) -> &Regex {
        &self.regex
    }
}

/// Byte offset of the first `/)` in `s` not preceded by an escaping backslash.
pub(crate) fn find_unescaped_close(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'/' if bytes.get(i + 1) == Some(&b')') => return Some(i),
            _ => i += 1,
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("pattern is empty")]
    Empty,
    #[error("pattern contains an unescaped `/)`")]
    Delimiter,
    #[error("invalid regular expression: {0}")]
    Regex(String),
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Self) -> bool {
        self.as_str() == other.as_str()
    }
}

impl Eq for Pattern {}

impl std::hash::Hash for Pattern {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.as_str().hash(state)
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "/{}/", self.as_str())
    }
}

impl Serialize for Pattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let source = String::deserialize(d)?;
        Pattern::new(&source).map_err(serde::de::Error::custom)
    }
}

/// One `(level, predicate)` pair of a procedure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProcedureStep {
    pub level: Level,
    pub predicate: Predicate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<Pattern>,
}

impl ProcedureStep {
    pub fn new(level: Level, predicate: Predicate) -> ProcedureStep {
        ProcedureStep { level, predicate, pattern: None }
    }

    pub fn pattern(pattern: Pattern, predicate: Predicate) -> ProcedureStep {
        ProcedureStep { level: Level::Pattern, predicate, pattern: Some(pattern) }
    }
}

/// A `(procedure, relation, value)` constraint.
///
/// The serde representation is the one-line rule syntax (see [`crate::dsl`]);
/// deserialization also accepts the structured object form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub procedure: Vec<ProcedureStep>,
    pub relation: Relation,
    pub value: Value,
}

impl Rule {
    pub fn new(procedure: Vec<ProcedureStep>, relation: Relation, value: Value) -> Rule {
        Rule { procedure, relation, value }
    }

    pub fn terminal(&self) -> Option<&ProcedureStep> {
        self.procedure.last()
    }

    /// Steps below the implicit answer root.
    pub fn effective_steps(&self) -> &[ProcedureStep] {
        match self.procedure.first() {
            Some(s) if s.level == Level::Answer && self.procedure.len() > 1 => &self.procedure[1..],
            _ => &self.procedure,
        }
    }

    /// Procedure depth, not counting a leading `answer` step.
    pub fn depth(&self) -> usize {
        self.effective_steps().len()
    }

    pub fn is_counting(&self) -> bool {
        matches!(self.terminal().map(|s| s.predicate), Some(Predicate::Count))
    }
}

/// Stable enumeration of reasons a rule is invalid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum Violation {
    /// The procedure has no steps.
    EmptyProcedure,
    /// A numerical relation on a procedure that does not end in `count`.
    NumericalWithoutCount,
    /// A textual relation on a procedure that ends in `count`.
    TextualWithCount,
    /// `before` admits only `contain` and `notcontain`.
    BeforeRelation,
    /// `after` admits only `contain`, `notcontain` and `equal`.
    AfterRelation,
    /// `between` admits only `equal`.
    BetweenRelation,
    /// Integer value with a textual relation or text value with a numerical one.
    ValueType,
    /// Text values must be nonempty.
    EmptyText,
    /// `answer` appears somewhere other than the first step.
    AnswerNotFirst { step: usize },
    /// `answer` carries a predicate other than `all`.
    AnswerPredicate,
    /// The step does not descend in granularity from the previous one.
    LevelOrder { step: usize },
    /// `count` appears before the final step.
    CountNotTerminal { step: usize },
    /// A `pattern` step without a regular expression.
    PatternMissing { step: usize },
    /// A regular expression on a step whose level is not `pattern`.
    PatternUnexpected { step: usize },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::EmptyProcedure => "empty_procedure",
            Violation::NumericalWithoutCount => "numerical_without_count",
            Violation::TextualWithCount => "textual_with_count",
            Violation::BeforeRelation => "before_relation",
            Violation::AfterRelation => "after_relation",
            Violation::BetweenRelation => "between_relation",
            Violation::ValueType => "value_type",
            Violation::EmptyText => "empty_text",
            Violation::AnswerNotFirst { .. } => "answer_not_first",
            Violation::AnswerPredicate => "answer_predicate",
            Violation::LevelOrder { .. } => "level_order",
            Violation::CountNotTerminal { .. } => "count_not_terminal",
            Violation::PatternMissing { .. } => "pattern_missing",
            Violation::PatternUnexpected { .. } => "pattern_unexpected",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AnswerNotFirst { step }
            | Violation::LevelOrder { step }
            | Violation::CountNotTerminal { step }
            | Violation::PatternMissing { step }
            | Violation::PatternUnexpected { step } => write!(f, "{} (step {})", self.code(), step + 1),
            _ => f.write_str(self.code()),
        }
    }
}

/// Checks every structural and type-safety rule, returning all violations.
pub fn check_validity(rule: &Rule) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let steps = &rule.procedure;

    if steps.is_empty() {
        out.push(Violation::EmptyProcedure);
    }

    for (i, step) in steps.iter().enumerate() {
        if step.level == Level::Answer {
            if i > 0 {
                out.push(Violation::AnswerNotFirst { step: i });
            }
            if step.predicate != Predicate::All {
                out.push(Violation::AnswerPredicate);
            }
        }
        if i > 0 && step.level != Level::Answer && !steps[i - 1].level.admits_child(step.level) {
            out.push(Violation::LevelOrder { step: i });
        }
        if step.predicate == Predicate::Count && i + 1 < steps.len() {
            out.push(Violation::CountNotTerminal { step: i });
        }
        match (step.level == Level::Pattern, step.pattern.is_some()) {
            (true, false) => out.push(Violation::PatternMissing { step: i }),
            (false, true) => out.push(Violation::PatternUnexpected { step: i }),
            _ => {}
        }
    }

    if let Some(last) = steps.last() {
        let kind = last.predicate.kind();
        let numerical = rule.relation.is_numerical();
        match (kind == PredicateKind::Count, numerical) {
            (false, true) => out.push(Violation::NumericalWithoutCount),
            (true, false) => out.push(Violation::TextualWithCount),
            _ => {}
        }
        if !kind.allowed_relations().contains(&rule.relation) && !numerical {
            match kind {
                PredicateKind::Before => out.push(Violation::BeforeRelation),
                PredicateKind::After => out.push(Violation::AfterRelation),
                PredicateKind::Between => out.push(Violation::BetweenRelation),
                _ => {}
            }
        }
    }

    match (&rule.value, rule.relation.is_numerical()) {
        (Value::Int(_), false) | (Value::Text(_), true) => out.push(Violation::ValueType),
        (Value::Text(t), false) if t.is_empty() => out.push(Violation::EmptyText),
        _ => {}
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::dsl::format_rule(self))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RuleRepr {
    Source(String),
    Structured { procedure: Vec<ProcedureStep>, relation: Relation, value: Value },
}

impl<'de> Deserialize<'de> for Rule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match RuleRepr::deserialize(d)? {
            RuleRepr::Source(src) => crate::dsl::parse_rule(&src).map_err(serde::de::Error::custom),
            RuleRepr::Structured { procedure, relation, value } => {
                let rule = Rule { procedure, relation, value };
                check_validity(&rule).map_err(|v| {
                    let codes: Vec<String> = v.iter().map(ToString::to_string).collect();
                    serde::de::Error::custom(format!("invalid rule: {}", codes.join(", ")))
                })?;
                Ok(rule)
            }
        }
    }
}

/// Structured (object) form of a rule, for consumers that prefer it over the
/// one-line syntax.
#[derive(Serialize)]
pub struct StructuredRule<'a> {
    pub procedure: &'a [ProcedureStep],
    pub relation: Relation,
    pub value: &'a Value,
}

impl<'a> From<&'a Rule> for StructuredRule<'a> {
    fn from(r: &'a Rule) -> Self {
        StructuredRule { procedure: &r.procedure, relation: r.relation, value: &r.value }
    }
}
