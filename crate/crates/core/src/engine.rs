//! Rule verification: element isolation, target identification and
//! adjudication, plus strict/loose evaluation of whole instructions.

use serde::{Deserialize, Serialize};

use crate::instruction::Instruction;
use crate::rule::{Language, Level, Predicate, ProcedureStep, Relation, Rule, Value};
use crate::segment::{gaps, segment, Element};

/// A piece of the response under consideration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment<'a> {
    pub text: &'a str,
    /// Byte offset of `text` within the full response.
    pub offset: usize,
    /// Ordinal of the element selected at each step so far.
    pub path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scope<'a> {
    pub segments: Vec<Segment<'a>>,
    pub language: Language,
}

impl<'a> Scope<'a> {
    /// The whole response as a single segment.
    pub fn new(full_text: &'a str, language: Language) -> Scope<'a> {
        Scope { segments: vec![Segment { text: full_text, offset: 0, path: Vec::new() }], language }
    }

    pub fn texts(&self) -> Vec<&'a str> {
        self.segments.iter().map(|s| s.text).collect()
    }

    /// Total bytes covered by all segments.
    pub fn covered(&self) -> usize {
        self.segments.iter().map(|s| s.text.len()).sum()
    }
}

/// What adjudication compares against the rule's value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target<'a> {
    Counts(Vec<u64>),
    Texts(Vec<&'a str>),
}

impl Target<'_> {
    pub fn is_empty(&self) -> bool {
        match self {
            Target::Counts(c) => c.is_empty(),
            Target::Texts(t) => t.is_empty(),
        }
    }
}

fn elements<'a>(text: &'a str, step: &ProcedureStep, language: Language) -> Vec<Element<'a>> {
    segment(text, step.level, language, step.pattern.as_ref()).expect("pattern steps carry a pattern in valid rules")
}

/// Applies one non-counting step to every segment of `scope`.
///
/// Out-of-range selections contribute nothing.
pub fn refine_scope<'a>(scope: &Scope<'a>, step: &ProcedureStep) -> Scope<'a> {
    debug_assert!(step.predicate != Predicate::Count, "count is handled by identify_target");
    let mut out = Vec::new();
    for seg in &scope.segments {
        if step.level == Level::Answer {
            // The whole response, even when empty; rules are implicitly rooted here.
            out.push(seg.clone());
            continue;
        }
        let els = elements(seg.text, step, scope.language);
        let child = |ordinal: usize, text: &'a str, start: usize| {
            let mut path = seg.path.clone();
            path.push(ordinal);
            Segment { text, offset: seg.offset + start, path }
        };
        match step.predicate {
            Predicate::Index(pos) => {
                if let Some(i) = pos.resolve(els.len()) {
                    out.push(child(i, els[i].text, content_start(seg.text, els[i].text)));
                }
            }
            Predicate::All | Predicate::Count => {
                for (i, e) in els.iter().enumerate() {
                    out.push(child(i, e.text, content_start(seg.text, e.text)));
                }
            }
            Predicate::Before(n) => {
                if let Some(e) = els.get(n.get() - 1) {
                    out.push(child(n.get() - 1, &seg.text[..e.span.start], 0));
                }
            }
            Predicate::After(n) => {
                if let Some(e) = els.get(n.get() - 1) {
                    out.push(child(n.get() - 1, &seg.text[e.span.end..], e.span.end));
                }
            }
            Predicate::Between => {
                for (i, g) in gaps(&els, seg.text).into_iter().enumerate() {
                    out.push(child(i, g.text, g.span.start));
                }
            }
        }
    }
    Scope { segments: out, language: scope.language }
}

/// Byte offset of `sub` within `parent`; `sub` must be a sub-slice of it.
fn content_start(parent: &str, sub: &str) -> usize {
    sub.as_ptr() as usize - parent.as_ptr() as usize
}

/// Turns the isolated scope into the value adjudication works on.
///
/// For counting rules `scope` must already be refined through every step
/// but the final one; otherwise through every step.
pub fn identify_target<'a>(scope: &Scope<'a>, rule: &Rule) -> Target<'a> {
    let Some(terminal) = rule.terminal().filter(|s| s.predicate == Predicate::Count) else {
        return Target::Texts(scope.texts());
    };
    if scope.segments.is_empty() && rule.depth() == 1 {
        return Target::Counts(vec![0]);
    }
    Target::Counts(
        scope.segments.iter().map(|s| elements(s.text, terminal, scope.language).len() as u64).collect(),
    )
}

/// Compares every entry of `target` against `value`. An empty target fails.
pub fn adjudicate(target: &Target<'_>, relation: Relation, value: &Value) -> bool {
    if target.is_empty() {
        return false;
    }
    match (target, value) {
        (Target::Counts(counts), Value::Int(v)) => counts.iter().all(|&c| compare_count(c, relation, *v)),
        (Target::Texts(texts), Value::Text(v)) => texts.iter().all(|t| compare_text(t, relation, v)),
        _ => false,
    }
}

fn compare_count(count: u64, relation: Relation, value: u64) -> bool {
    match relation {
        Relation::Eq => count == value,
        Relation::Neq => count != value,
        Relation::Gt => count > value,
        Relation::Gte => count >= value,
        Relation::Lt => count < value,
        Relation::Lte => count <= value,
        _ => false,
    }
}

fn compare_text(text: &str, relation: Relation, value: &str) -> bool {
    match relation {
        Relation::StartsWith => text.starts_with(value),
        Relation::EndsWith => text.ends_with(value),
        Relation::Equal => text == value,
        Relation::Contain => text.contains(value),
        Relation::NotStartsWith => !text.starts_with(value),
        Relation::NotEndsWith => !text.ends_with(value),
        Relation::NotContain => !text.contains(value),
        _ => false,
    }
}

/// Verifies one valid rule against a response.
///
/// Every segment must yield at least one child at every isolating step: a
/// rule over "every paragraph's 3rd sentence" fails when some paragraph has
/// no 3rd sentence, rather than skipping that paragraph.
pub fn verify_rule(rule: &Rule, full_text: &str, language: Language) -> bool {
    let isolating = match rule.terminal() {
        Some(t) if t.predicate == Predicate::Count => &rule.procedure[..rule.procedure.len() - 1],
        _ => &rule.procedure[..],
    };
    let mut scope = Scope::new(full_text, language);
    for step in isolating {
        let next = refine_scope(&scope, step);
        let parents: std::collections::HashSet<&[usize]> =
            next.segments.iter().map(|s| &s.path[..s.path.len() - usize::from(step.level != Level::Answer)]).collect();
        if parents.len() != scope.segments.len() {
            return false;
        }
        scope = next;
    }
    adjudicate(&identify_target(&scope, rule), rule.relation, &rule.value)
}

/// A non-semantic rewrite of a response tried under loose evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LooseVariant {
    #[serde(rename = "identity")]
    Identity,
    #[serde(rename = "strip-asterisks")]
    StripAsterisks,
    #[serde(rename = "drop-first-line")]
    DropFirstLine,
    #[serde(rename = "drop-last-line")]
    DropLastLine,
    #[serde(rename = "drop-first-last-lines")]
    DropFirstLastLines,
    #[serde(rename = "strip-asterisks+drop-first-line")]
    StripAsterisksDropFirstLine,
    #[serde(rename = "strip-asterisks+drop-last-line")]
    StripAsterisksDropLastLine,
    #[serde(rename = "strip-asterisks+drop-first-last-lines")]
    StripAsterisksDropFirstLastLines,
}

impl LooseVariant {
    /// Evaluation order.
    pub const ALL: [LooseVariant; 8] = [
        LooseVariant::Identity,
        LooseVariant::StripAsterisks,
        LooseVariant::DropFirstLine,
        LooseVariant::DropLastLine,
        LooseVariant::DropFirstLastLines,
        LooseVariant::StripAsterisksDropFirstLine,
        LooseVariant::StripAsterisksDropLastLine,
        LooseVariant::StripAsterisksDropFirstLastLines,
    ];

    pub fn id(self) -> &'static str {
        match self {
            LooseVariant::Identity => "identity",
            LooseVariant::StripAsterisks => "strip-asterisks",
            LooseVariant::DropFirstLine => "drop-first-line",
            LooseVariant::DropLastLine => "drop-last-line",
            LooseVariant::DropFirstLastLines => "drop-first-last-lines",
            LooseVariant::StripAsterisksDropFirstLine => "strip-asterisks+drop-first-line",
            LooseVariant::StripAsterisksDropLastLine => "strip-asterisks+drop-last-line",
            LooseVariant::StripAsterisksDropFirstLastLines => "strip-asterisks+drop-first-last-lines",
        }
    }

    pub fn apply(self, text: &str) -> String {
        use LooseVariant::*;
        let (strip, drop_first, drop_last) = match self {
            Identity => (false, false, false),
            StripAsterisks => (true, false, false),
            DropFirstLine => (false, true, false),
            DropLastLine => (false, false, true),
            DropFirstLastLines => (false, true, true),
            StripAsterisksDropFirstLine => (true, true, false),
            StripAsterisksDropLastLine => (true, false, true),
            StripAsterisksDropFirstLastLines => (true, true, true),
        };
        let dropped = if drop_first || drop_last { drop_lines(text, drop_first, drop_last) } else { text.to_string() };
        if strip {
            dropped.replace('*', "")
        } else {
            dropped
        }
    }
}

fn drop_lines(text: &str, first: bool, last: bool) -> String {
    let lines: Vec<&str> = text.split('\n').collect();
    if lines.len() <= 1 {
        return String::new();
    }
    let lo = usize::from(first);
    let hi = lines.len() - usize::from(last);
    if lo >= hi {
        return String::new();
    }
    lines[lo..hi].join("\n")
}

/// All eight loose-evaluation rewrites of `full_text`, in evaluation order.
pub fn loose_variants(full_text: &str) -> Vec<(LooseVariant, String)> {
    LooseVariant::ALL.into_iter().map(|v| (v, v.apply(full_text))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    /// Per-rule results on the unmodified response.
    pub rule_results: Vec<(Rule, bool)>,
    pub strict_pass: bool,
    pub loose_pass: bool,
    /// First variant on which every rule held.
    pub loose_variant: Option<LooseVariant>,
}

fn all_hold(instr: &Instruction, text: &str) -> bool {
    instr.rules.iter().all(|r| verify_rule(r, text, instr.language))
}

/// Strict and loose evaluation of a response.
pub fn verify_instruction(instr: &Instruction, response: &str) -> Verdict {
    verify_instruction_with(instr, response, true)
}

/// As [`verify_instruction`]; with `loose == false` the loose result mirrors
/// the strict one.
pub fn verify_instruction_with(instr: &Instruction, response: &str, loose: bool) -> Verdict {
    let rule_results: Vec<(Rule, bool)> =
        instr.rules.iter().map(|r| (r.clone(), verify_rule(r, response, instr.language))).collect();
    let strict_pass = rule_results.iter().all(|(_, ok)| *ok);
    let loose_variant = if strict_pass {
        Some(LooseVariant::Identity)
    } else if loose {
        LooseVariant::ALL[1..].iter().copied().find(|v| all_hold(instr, &v.apply(response)))
    } else {
        None
    };
    Verdict { rule_results, strict_pass, loose_pass: loose_variant.is_some(), loose_variant }
}
