//! Fine-grained lexical instruction following: a rule grammar over text
//! granularity levels, a segmenting verification engine, difficulty grading
//! and a template-driven instruction generator.
//!
//! ```
//! use lexinstruct_core::{parse_rule, verify_rule, Language};
//!
//! let rule = parse_rule("paragraph@1.sentence# = 2").unwrap();
//! assert!(verify_rule(&rule, "One. Two.\n\nThree.", Language::En));
//! ```

pub mod dsl;
pub mod engine;
pub mod generate;
pub mod grade;
pub mod instruction;
pub mod rule;
pub mod segment;

pub use dsl::{format_rule, parse_rule, DslError};
pub use engine::{verify_instruction, verify_instruction_with, verify_rule, LooseVariant, Verdict};
pub use grade::{grade_difficulty, Difficulty, DifficultyScore};
pub use instruction::{Instruction, InstructionError};
pub use rule::{check_validity, Language, Level, Position, Predicate, ProcedureStep, Relation, Rule, Value, Violation};
