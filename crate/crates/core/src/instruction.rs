use serde::{Deserialize, Serialize};

use crate::grade::{grade_difficulty, Difficulty};
use crate::rule::{check_validity, Language, Rule, Violation};

/// A prompt together with the rules a response to it must satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub id: String,
    pub language: Language,
    pub prompt: String,
    pub rules: Vec<Rule>,
    pub difficulty: Difficulty,
    pub depth: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InstructionError {
    #[error("instruction has no rules")]
    NoRules,
    #[error("rule {index} is invalid: {}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))]
    InvalidRule { index: usize, violations: Vec<Violation> },
    #[error("stored {field} is {stored} but the rules give {derived}")]
    Mismatch { field: &'static str, stored: String, derived: String },
}

impl Instruction {
    /// Builds an instruction, deriving difficulty, depth and count from
    /// `rules`.
    pub fn new(id: impl Into<String>, language: Language, prompt: impl Into<String>, rules: Vec<Rule>) -> Instruction {
        let difficulty = grade_difficulty(&rules).grade;
        Instruction {
            id: id.into(),
            language,
            prompt: prompt.into(),
            depth: max_depth(&rules),
            count: rules.len(),
            rules,
            difficulty,
        }
    }

    /// Checks that the rules are valid and the derived fields agree with them.
    pub fn check(&self) -> Result<(), InstructionError> {
        if self.rules.is_empty() {
            return Err(InstructionError::NoRules);
        }
        for (index, rule) in self.rules.iter().enumerate() {
            check_validity(rule).map_err(|violations| InstructionError::InvalidRule { index, violations })?;
        }
        let depth = max_depth(&self.rules);
        if depth != self.depth {
            return Err(mismatch("depth", self.depth, depth));
        }
        if self.rules.len() != self.count {
            return Err(mismatch("count", self.count, self.rules.len()));
        }
        let difficulty = grade_difficulty(&self.rules).grade;
        if difficulty != self.difficulty {
            return Err(mismatch("difficulty", self.difficulty, difficulty));
        }
        Ok(())
    }
}

fn max_depth(rules: &[Rule]) -> usize {
    rules.iter().map(Rule::depth).max().unwrap_or(0)
}

fn mismatch(field: &'static str, stored: impl ToString, derived: impl ToString) -> InstructionError {
    InstructionError::Mismatch { field, stored: stored.to_string(), derived: derived.to_string() }
}
