//! One-line rule syntax.
//!
//! ```text
//! rule      := procedure relation value
//! procedure := step ("." step)*
//! step      := level-name [pred] | "pattern(/" regex-body "/)" [pred]
//! pred      := "@" int | "@" | "!" int | "$" int | "%" | "#"
//! relation  := "=" | "!=" | ">" | ">=" | "<" | "<=" | startswith | endswith
//!            | equal | contain | notstartswith | notendswith | notcontain
//! value     := integer | '"' escaped-string '"'
//! ```
//!
//! Whitespace between tokens is ignored. A bare `@` selects all elements.
//! The predicate may be omitted only on `answer`. String values escape `"`,
//! `\` and newline with a backslash.

use std::fmt::{self, Write as _};
use std::num::NonZeroUsize;

use crate::rule::{
    check_validity, Level, Pattern, PatternError, Position, Predicate, ProcedureStep, Relation, Rule, Value,
    Violation,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DslError {
    #[error("syntax error at offset {offset}: expected {}", expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<&'static str> },
    #[error("invalid pattern at offset {offset}: {source}")]
    Pattern { offset: usize, source: PatternError },
    #[error("invalid rule: {}", display_violations(.0))]
    Invalid(Vec<Violation>),
}

fn display_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// Parses one rule and checks it for validity.
pub fn parse_rule(source: &str) -> Result<Rule, DslError> {
    let mut p = Parser { src: source, pos: 0 };
    let rule = p.rule()?;
    check_validity(&rule).map_err(DslError::Invalid)?;
    Ok(rule)
}

/// Canonical one-line form of a rule.
pub fn format_rule(rule: &Rule) -> String {
    rule.to_string()
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.procedure.iter().enumerate() {
            if i > 0 {
                f.write_char('.')?;
            }
            write_step(f, step)?;
        }
        write!(f, " {} ", self.relation.token())?;
        match &self.value {
            Value::Int(n) => write!(f, "{n}"),
            Value::Text(t) => write_quoted(f, t),
        }
    }
}

fn write_step(f: &mut fmt::Formatter<'_>, step: &ProcedureStep) -> fmt::Result {
    match (&step.level, &step.pattern) {
        (Level::Pattern, Some(p)) => write!(f, "pattern(/{}/)", p.as_str())?,
        (level, _) => f.write_str(level.name())?,
    }
    if step.level == Level::Answer && step.predicate == Predicate::All {
        return Ok(());
    }
    match step.predicate {
        Predicate::Index(pos) => write!(f, "@{pos}"),
        Predicate::All => f.write_char('@'),
        Predicate::Before(n) => write!(f, "!{n}"),
        Predicate::After(n) => write!(f, "${n}"),
        Predicate::Between => f.write_char('%'),
        Predicate::Count => f.write_char('#'),
    }
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

const LEVEL_NAMES: &str = "level name";
const RELATIONS: [Relation; 13] = [
    // two-character symbols first so ">=" wins over ">"
    Relation::Neq,
    Relation::Gte,
    Relation::Lte,
    Relation::Eq,
    Relation::Gt,
    Relation::Lt,
    Relation::NotStartsWith,
    Relation::NotEndsWith,
    Relation::NotContain,
    Relation::StartsWith,
    Relation::EndsWith,
    Relation::Equal,
    Relation::Contain,
];

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, expected: &[&'static str]) -> Result<T, DslError> {
        Err(DslError::Syntax { offset: self.pos, expected: expected.to_vec() })
    }

    fn rule(&mut self) -> Result<Rule, DslError> {
        let mut procedure = Vec::new();
        loop {
            self.skip_ws();
            procedure.push(self.step()?);
            self.skip_ws();
            if !self.eat(".") {
                break;
            }
        }
        self.skip_ws();
        let relation = self.relation()?;
        self.skip_ws();
        let value = self.value()?;
        self.skip_ws();
        if !self.rest().is_empty() {
            return self.fail(&["end of input"]);
        }
        Ok(Rule { procedure, relation, value })
    }

    fn step(&mut self) -> Result<ProcedureStep, DslError> {
        let ident_len = self.rest().bytes().take_while(|b| b.is_ascii_lowercase()).count();
        let ident = &self.rest()[..ident_len];
        let Some(level) = Level::from_name(ident) else {
            return self.fail(&[LEVEL_NAMES]);
        };
        self.pos += ident_len;

        let pattern = if level == Level::Pattern {
            if !self.eat("(/") {
                return self.fail(&["\"(/\""]);
            }
            let body_start = self.pos;
            let Some(end) = crate::rule::find_unescaped_close(self.rest()) else {
                self.pos = self.src.len();
                return self.fail(&["\"/)\""]);
            };
            let body = &self.rest()[..end];
            let pattern = Pattern::new(body).map_err(|source| DslError::Pattern { offset: body_start, source })?;
            self.pos += end + 2;
            Some(pattern)
        } else {
            None
        };

        self.skip_ws();
        let predicate = match self.predicate()? {
            Some(p) => p,
            None if level == Level::Answer => Predicate::All,
            None => return self.fail(&["\"@\"", "\"!\"", "\"$\"", "\"%\"", "\"#\""]),
        };
        Ok(ProcedureStep { level, predicate, pattern })
    }

    fn predicate(&mut self) -> Result<Option<Predicate>, DslError> {
        match self.peek() {
            Some('@') => {
                self.pos += 1;
                self.skip_ws();
                if self.peek() == Some('-') {
                    let at = self.pos;
                    self.pos += 1;
                    if !self.eat("1") || self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.pos = at;
                        return self.fail(&["\"-1\" or a positive index"]);
                    }
                    return Ok(Some(Predicate::Index(Position::Last)));
                }
                if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    let n = self.positive()?;
                    return Ok(Some(Predicate::Index(Position::Nth(n))));
                }
                Ok(Some(Predicate::All))
            }
            // "!=" is a relation, not a before-predicate
            Some('!') if !self.rest().starts_with("!=") => {
                self.pos += 1;
                self.skip_ws();
                Ok(Some(Predicate::Before(self.positive()?)))
            }
            Some('$') => {
                self.pos += 1;
                self.skip_ws();
                Ok(Some(Predicate::After(self.positive()?)))
            }
            Some('%') => {
                self.pos += 1;
                Ok(Some(Predicate::Between))
            }
            Some('#') => {
                self.pos += 1;
                Ok(Some(Predicate::Count))
            }
            _ => Ok(None),
        }
    }

    fn digits(&mut self) -> Option<(usize, &'a str)> {
        let start = self.pos;
        let len = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if len == 0 {
            return None;
        }
        self.pos += len;
        Some((start, &self.src[start..start + len]))
    }

    fn positive(&mut self) -> Result<NonZeroUsize, DslError> {
        let Some((start, digits)) = self.digits() else {
            return self.fail(&["positive integer"]);
        };
        match digits.parse::<usize>().ok().and_then(NonZeroUsize::new) {
            Some(n) => Ok(n),
            None => {
                self.pos = start;
                self.fail(&["positive integer"])
            }
        }
    }

    fn relation(&mut self) -> Result<Relation, DslError> {
        for rel in RELATIONS {
            let tok = rel.token();
            if self.rest().starts_with(tok) {
                // keywords must not run into further letters ("containx")
                let next = self.rest()[tok.len()..].chars().next();
                if rel.is_numerical() || !next.is_some_and(|c| c.is_ascii_alphanumeric()) {
                    self.pos += tok.len();
                    return Ok(rel);
                }
            }
        }
        self.fail(&["relation"])
    }

    fn value(&mut self) -> Result<Value, DslError> {
        match self.peek() {
            Some('"') => {
                self.pos += 1;
                self.string().map(Value::Text)
            }
            Some(c) if c.is_ascii_digit() => {
                let (start, digits) = self.digits().unwrap();
                digits.parse::<u64>().map(Value::Int).or_else(|_| {
                    self.pos = start;
                    self.fail(&["integer that fits in 64 bits"])
                })
            }
            _ => self.fail(&["integer", "quoted string"]),
        }
    }

    fn string(&mut self) -> Result<String, DslError> {
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, '"')) => out.push('"'),
                    Some((_, '\\')) => out.push('\\'),
                    Some((_, 'n')) => out.push('\n'),
                    _ => {
                        self.pos += i;
                        return self.fail(&["escape \\\" \\\\ or \\n"]);
                    }
                },
                c => out.push(c),
            }
        }
        self.pos = self.src.len();
        self.fail(&["closing quote"])
    }
}
