use std::collections::HashMap;

use lexinstruct_core::{verify_instruction_with, Instruction};
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::records::ResponseRecord;
use crate::report::{EvalReport, InstructionVerdict};

#[derive(Debug, Clone, Copy)]
pub struct ScoreOptions {
    /// Worker threads; 0 uses one per core.
    pub jobs: usize,
    /// Skip loose evaluation; loose results then equal strict ones.
    pub strict_only: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions { jobs: 0, strict_only: false }
    }
}

fn judge(instr: &Instruction, response: &str, strict_only: bool) -> InstructionVerdict {
    let v = verify_instruction_with(instr, response, !strict_only);
    InstructionVerdict {
        id: instr.id.clone(),
        language: instr.language,
        difficulty: instr.difficulty,
        depth: instr.depth,
        count: instr.count,
        strict: v.strict_pass,
        loose: v.loose_pass,
        loose_variant: v.loose_variant,
        rules: v.rule_results.into_iter().map(|(_, ok)| ok).collect(),
    }
}

/// Scores every instruction that has a response. Verdicts follow instruction
/// order regardless of the number of workers.
pub fn score(
    instructions: &[Instruction],
    responses: &[ResponseRecord],
    options: ScoreOptions,
) -> Result<EvalReport> {
    let by_id: HashMap<&str, &str> = responses.iter().map(|r| (r.id.as_str(), r.response.as_str())).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {} workers: {e}", options.jobs)))?;
    let verdicts: Vec<InstructionVerdict> = pool.install(|| {
        instructions
            .par_iter()
            .filter_map(|i| by_id.get(i.id.as_str()).map(|r| judge(i, r, options.strict_only)))
            .collect()
    });
    let unscored =
        instructions.iter().filter(|i| !by_id.contains_key(i.id.as_str())).map(|i| i.id.clone()).collect();
    Ok(EvalReport::from_verdicts(verdicts, unscored))
}

#[cfg(test)]
mod tests {
    use super::*;
    use lexinstruct_core::{parse_rule, Language};

    fn instr(id: &str, rules: &[&str]) -> Instruction {
        Instruction::new(id, Language::En, "p", rules.iter().map(|r| parse_rule(r).unwrap()).collect())
    }

    fn resp(id: &str, text: &str) -> ResponseRecord {
        ResponseRecord { id: id.into(), response: text.into(), latency_ms: None }
    }

    #[test]
    fn missing_responses_are_unscored() {
        let instrs = [instr("a", &["word# = 2"]), instr("b", &["word# = 2"])];
        let r = score(&instrs, &[resp("a", "hello world")], ScoreOptions::default()).unwrap();
        assert_eq!(r.overall.n, 1);
        assert_eq!(r.overall.strict, 1.0);
        assert_eq!(r.unscored, ["b"]);
    }

    #[test]
    fn empty_responses_fail_text_rules() {
        let instrs = [instr("a", &["word@1 contain \"x\""]), instr("b", &["sentence@ endswith \".\"", "word# = 0"])];
        let r = score(&instrs, &[resp("a", ""), resp("b", "")], ScoreOptions::default()).unwrap();
        assert_eq!((r.overall.strict, r.overall.loose), (0.0, 0.0));
    }

    #[test]
    fn strict_only_mirrors_strict() {
        let instrs = [instr("a", &["line@1 equal \"B\""])];
        let full = score(&instrs, &[resp("a", "Sure:\nB")], ScoreOptions::default()).unwrap();
        assert_eq!((full.overall.strict, full.overall.loose), (0.0, 1.0));
        let strict = score(&instrs, &[resp("a", "Sure:\nB")], ScoreOptions { jobs: 1, strict_only: true }).unwrap();
        assert_eq!((strict.overall.strict, strict.overall.loose), (0.0, 0.0));
    }
}
