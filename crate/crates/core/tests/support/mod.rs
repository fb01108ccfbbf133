//! Shared fixtures for integration tests: the reference oracle plus random
//! texts and rules biased toward segmentation edge cases.
#![allow(dead_code)]

pub mod oracle;

use lexinstruct_core::generate::{sample_rule, GenConfig};
use lexinstruct_core::{check_validity, Language, Rule, Value};
use rand::Rng;

const EN_TOKENS: &[&str] = &[
    "The", "the", "cat", "ab", "end", "word", "x", "Mr.", "Dr.", "e.g.", "etc.", "3.5", "42", "7", ".", "!", "?",
    "...", "?!", ",", ";", " ", " ", " ", " ", "  ", "\t", "\n", "\n", "\n\n", "\n\n\n", "- ", "* ", "+ ", "1. ",
    "2) ", "*", "**bold**", "\"", "(", ")", "'s", "#tag", "éa", "run-on",
];

const ZH_TOKENS: &[&str] = &[
    "春天", "的", "我", "你", "山水", "。", "！", "？", "…", "……", "，", "、", "“", "”", "《书》", "ab", "12",
    "A", "\n", "\n\n", "- ", "1. ", " ", "*", "（注）",
];

/// Random text of at most `max_chars` characters.
pub fn random_text<R: Rng>(rng: &mut R, lang: Language, max_chars: usize) -> String {
    let tokens = match lang {
        Language::En => EN_TOKENS,
        Language::Zh => ZH_TOKENS,
    };
    let target = rng.random_range(0..=max_chars);
    let mut s = String::new();
    let mut n = 0;
    loop {
        let t = tokens[rng.random_range(0..tokens.len())];
        let len = t.chars().count();
        if n + len > target {
            break;
        }
        s.push_str(t);
        n += len;
    }
    s
}

pub fn oracle_config(lang: Language) -> GenConfig {
    let mut cfg = GenConfig::new(0, lang);
    cfg.max_depth = 4;
    cfg.lexicon.patterns = vec![r"\d+".into(), "ab".into(), "the".into(), "春天".into()];
    cfg
}

/// A valid rule whose value is often drawn from `text`, so that both
/// verdicts occur frequently.
pub fn random_rule_for<R: Rng>(rng: &mut R, cfg: &GenConfig, text: &str) -> Rule {
    loop {
        let mut rule = sample_rule(cfg, rng).expect("default lexicon");
        match &mut rule.value {
            Value::Int(v) => {
                if rng.random_bool(0.7) {
                    *v = rng.random_range(0..6);
                }
            }
            Value::Text(v) => {
                let chars: Vec<char> = text.chars().collect();
                if !chars.is_empty() && rng.random_bool(0.6) {
                    let a = rng.random_range(0..chars.len());
                    let b = rng.random_range(a + 1..=chars.len().min(a + 6));
                    *v = chars[a..b].iter().collect();
                }
            }
        }
        if check_validity(&rule).is_ok() {
            return rule;
        }
    }
}
