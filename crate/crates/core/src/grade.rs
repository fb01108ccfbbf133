//! Rule-based difficulty grading.
//!
//! Each constraint scores `depth + predicate load + relation strictness +
//! value complexity`; an instruction's total is the sum scaled by
//! `1 + 0.25 * (constraints - 1)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rule::{Level, Position, Predicate, Relation, Rule, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }

    /// easy ≤ 2 < medium ≤ 5 < hard
    pub fn from_total(total: f64) -> Difficulty {
        if total <= 2.0 {
            Difficulty::Easy
        } else if total <= 5.0 {
            Difficulty::Medium
        } else {
            Difficulty::Hard
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Score components of a single constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintScore {
    pub depth: u32,
    pub predicate: u32,
    pub relation: u32,
    pub value: u32,
}

impl ConstraintScore {
    pub fn total(&self) -> u32 {
        self.depth + self.predicate + self.relation + self.value
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyScore {
    pub per_constraint: Vec<f64>,
    pub multiplier: f64,
    pub total: f64,
    pub grade: Difficulty,
}

fn predicate_weight(p: Predicate) -> u32 {
    match p {
        Predicate::Index(Position::Nth(_)) => 0,
        Predicate::Index(Position::Last) => 1,
        Predicate::All | Predicate::Before(_) | Predicate::After(_) | Predicate::Count => 1,
        Predicate::Between => 2,
    }
}

fn relation_weight(r: Relation) -> u32 {
    match r {
        Relation::Contain | Relation::NotContain => 0,
        Relation::StartsWith | Relation::EndsWith | Relation::NotStartsWith | Relation::NotEndsWith => 1,
        Relation::Equal => 2,
        Relation::Eq | Relation::Neq => 1,
        Relation::Gt | Relation::Gte | Relation::Lt | Relation::Lte => 0,
    }
}

pub fn score_constraint(rule: &Rule) -> ConstraintScore {
    let steps = rule.effective_steps();
    let value = match &rule.value {
        Value::Int(_) => 0,
        Value::Text(t) => match t.chars().count() {
            0 | 1 => 0,
            2..=5 => 1,
            _ => 2,
        },
    };
    let regex_bonus = u32::from(steps.iter().any(|s| s.level == Level::Pattern));
    ConstraintScore {
        depth: steps.len().saturating_sub(1) as u32,
        predicate: steps.iter().map(|s| predicate_weight(s.predicate)).sum(),
        relation: relation_weight(rule.relation),
        value: value + regex_bonus,
    }
}

/// Grades a nonempty list of valid rules.
pub fn grade_difficulty(rules: &[Rule]) -> DifficultyScore {
    let per_constraint: Vec<f64> = rules.iter().map(|r| score_constraint(r).total() as f64).collect();
    let multiplier = 1.0 + 0.25 * (rules.len().max(1) - 1) as f64;
    let total = per_constraint.iter().sum::<f64>() * multiplier;
    DifficultyScore { per_constraint, multiplier, total, grade: Difficulty::from_total(total) }
}
