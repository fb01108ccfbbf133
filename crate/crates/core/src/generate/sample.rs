//! Valid-by-construction rule sampling.
//!
//! The terminal predicate is drawn first, then the terminal level, then a
//! chain of strictly coarser ancestors, then a relation from the terminal's
//! allowed set and finally a value of the matching type.

use std::num::NonZeroUsize;

use rand::Rng;

use crate::rule::{
    check_validity, Language, Level, Pattern, Position, Predicate, PredicateKind, ProcedureStep, Relation, Rule,
    Value,
};

use super::{GenConfig, GenError};

const TERMINAL_WEIGHTS: [(PredicateKind, u32); 6] = [
    (PredicateKind::Count, 35),
    (PredicateKind::Index, 30),
    (PredicateKind::All, 10),
    (PredicateKind::Before, 8),
    (PredicateKind::After, 8),
    (PredicateKind::Between, 9),
];

/// Returns a uniformly drawn index below `n`. Draws a `u32` so sequences
/// agree across platforms.
fn below<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    rng.random_range(0..n as u32) as usize
}

fn pick<'a, T, R: Rng + ?Sized>(rng: &mut R, items: &'a [T]) -> Option<&'a T> {
    if items.is_empty() {
        None
    } else {
        Some(&items[below(rng, items.len())])
    }
}

fn weighted<T: Copy, R: Rng + ?Sized>(rng: &mut R, items: &[(T, u32)]) -> T {
    let total: u32 = items.iter().map(|(_, w)| w).sum();
    let mut roll = rng.random_range(0..total);
    for &(item, w) in items {
        if roll < w {
            return item;
        }
        roll -= w;
    }
    unreachable!("roll is below the total weight")
}

fn nz(n: usize) -> NonZeroUsize {
    NonZeroUsize::new(n).expect("positions start at 1")
}

fn excluded(level: Level, language: Language) -> bool {
    matches!(
        (language, level),
        (Language::Zh, Level::Word) | (Language::Zh, Level::Letter) | (Language::En, Level::Character)
    )
}

/// Levels a terminal predicate may select, before language filtering.
fn terminal_levels(kind: PredicateKind, language: Language) -> Vec<Level> {
    use Level::*;
    let base: &[Level] = match kind {
        PredicateKind::Count => &[Paragraph, Line, Bullet, Sentence, Word, Character, Letter, Punc, Pattern],
        PredicateKind::Index => &[Paragraph, Line, Bullet, Sentence, Word, Character, Letter, Punc],
        PredicateKind::All => &[Answer, Paragraph, Line, Bullet, Sentence, Word],
        PredicateKind::Before | PredicateKind::After => &[Paragraph, Line, Bullet, Sentence, Word],
        PredicateKind::Between => match language {
            Language::En => &[Paragraph, Line, Bullet, Sentence, Word],
            Language::Zh => &[Paragraph, Line, Bullet],
        },
    };
    base.iter().copied().filter(|&l| !excluded(l, language)).collect()
}

/// Levels usable as intermediate steps, coarsest first.
fn ancestor_levels(language: Language) -> Vec<Level> {
    [Level::Paragraph, Level::Line, Level::Bullet, Level::Sentence, Level::Word]
        .into_iter()
        .filter(|&l| !excluded(l, language))
        .collect()
}

fn ancestors_of(terminal: Level, language: Language) -> Vec<Level> {
    if terminal == Level::Answer {
        return Vec::new();
    }
    ancestor_levels(language).into_iter().filter(|a| a.admits_child(terminal)).collect()
}

/// Draws a descending chain of `len` ancestors for `terminal`. Line and
/// bullet share a tier, so at most one of them is used.
fn ancestor_chain<R: Rng + ?Sized>(rng: &mut R, terminal: Level, language: Language, len: usize) -> Vec<Level> {
    let mut pool = ancestors_of(terminal, language);
    if pool.contains(&Level::Line) && pool.contains(&Level::Bullet) {
        let drop = if below(rng, 2) == 0 { Level::Line } else { Level::Bullet };
        pool.retain(|&l| l != drop);
    }
    // Choose `len` of the pool preserving order.
    let mut chosen = Vec::with_capacity(len);
    let mut needed = len;
    for (i, &level) in pool.iter().enumerate() {
        let remaining = pool.len() - i;
        if needed > 0 && below(rng, remaining) < needed {
            chosen.push(level);
            needed -= 1;
        }
    }
    chosen
}

fn max_chain(terminal: Level, language: Language) -> usize {
    let pool = ancestors_of(terminal, language);
    let both = pool.contains(&Level::Line) && pool.contains(&Level::Bullet);
    pool.len() - usize::from(both)
}

fn intermediate_predicate<R: Rng + ?Sized>(rng: &mut R) -> Predicate {
    #[derive(Clone, Copy)]
    enum P {
        Nth,
        Last,
        All,
        Before,
        After,
    }
    match weighted(rng, &[(P::Nth, 5), (P::Last, 2), (P::All, 3), (P::Before, 1), (P::After, 1)]) {
        P::Nth => Predicate::Index(Position::Nth(nz(1 + below(rng, 3)))),
        P::Last => Predicate::Index(Position::Last),
        P::All => Predicate::All,
        P::Before => Predicate::Before(nz(1 + below(rng, 3))),
        P::After => Predicate::After(nz(1 + below(rng, 3))),
    }
}

fn terminal_predicate<R: Rng + ?Sized>(rng: &mut R, kind: PredicateKind) -> Predicate {
    match kind {
        PredicateKind::Index => {
            if below(rng, 4) == 0 {
                Predicate::Index(Position::Last)
            } else {
                Predicate::Index(Position::Nth(nz(1 + below(rng, 3))))
            }
        }
        PredicateKind::All => Predicate::All,
        PredicateKind::Before => Predicate::Before(nz(1 + below(rng, 3))),
        PredicateKind::After => Predicate::After(nz(1 + below(rng, 3))),
        PredicateKind::Between => Predicate::Between,
        PredicateKind::Count => Predicate::Count,
    }
}

fn count_value<R: Rng + ?Sized>(rng: &mut R, level: Level, nested: bool) -> u64 {
    let (lo, hi) = match level {
        Level::Paragraph => (1, 5),
        Level::Line | Level::Bullet => (1, 8),
        Level::Sentence => (1, if nested { 5 } else { 12 }),
        Level::Word => (if nested { 3 } else { 20 }, if nested { 30 } else { 300 }),
        Level::Character => (if nested { 5 } else { 50 }, if nested { 60 } else { 500 }),
        Level::Letter => (if nested { 10 } else { 100 }, if nested { 150 } else { 1500 }),
        Level::Punc | Level::Pattern => (1, 10),
        Level::Answer => (1, 1),
    };
    rng.random_range(lo..=hi)
}

fn gap_value(level: Level) -> &'static str {
    match level {
        Level::Paragraph => "\n\n",
        Level::Line | Level::Bullet => "\n",
        _ => " ",
    }
}

fn text_value<R: Rng + ?Sized>(
    rng: &mut R,
    config: &GenConfig,
    kind: PredicateKind,
    level: Level,
    relation: Relation,
) -> Result<String, GenError> {
    let lex = &config.lexicon;
    if kind == PredicateKind::Between {
        return Ok(gap_value(level).to_string());
    }
    let (name, pool): (&'static str, &[String]) = match level {
        Level::Character => ("characters", &lex.characters),
        Level::Letter => ("letters", &lex.letters),
        Level::Punc => ("punctuation", &lex.punctuation),
        Level::Word => ("words", &lex.words),
        _ => match relation {
            Relation::EndsWith | Relation::NotEndsWith if below(rng, 2) == 0 => ("punctuation", &lex.punctuation),
            Relation::Equal => ("phrases", &lex.phrases),
            _ if below(rng, 2) == 0 => ("phrases", &lex.phrases),
            _ => ("words", &lex.words),
        },
    };
    pick(rng, pool).cloned().ok_or(GenError::LexiconExhausted(name))
}

fn pattern_step<R: Rng + ?Sized>(rng: &mut R, config: &GenConfig) -> Result<ProcedureStep, GenError> {
    let src = pick(rng, &config.lexicon.patterns).ok_or(GenError::LexiconExhausted("patterns"))?;
    let pattern = Pattern::new(src).map_err(|e| GenError::Config(format!("lexicon pattern `{src}`: {e}")))?;
    Ok(ProcedureStep::pattern(pattern, Predicate::Count))
}

/// Samples one valid rule whose depth is at most `config.max_depth`.
pub fn sample_rule<R: Rng + ?Sized>(config: &GenConfig, rng: &mut R) -> Result<Rule, GenError> {
    sample_rule_within(config, rng, config.max_depth)
}

/// Samples one valid rule of depth at most `max_depth`.
pub fn sample_rule_within<R: Rng + ?Sized>(
    config: &GenConfig,
    rng: &mut R,
    max_depth: usize,
) -> Result<Rule, GenError> {
    let language = config.language;
    let max_depth = max_depth.clamp(1, config.max_depth);
    loop {
        let kind = weighted(rng, &TERMINAL_WEIGHTS);
        let depth = 1 + below(rng, max_depth);
        let candidates: Vec<Level> = terminal_levels(kind, language)
            .into_iter()
            .filter(|&l| max_chain(l, language) + 1 >= depth)
            .filter(|&l| l != Level::Answer || depth == 1)
            .collect();
        let Some(&level) = pick(rng, &candidates) else { continue };

        let chain = ancestor_chain(rng, level, language, depth - 1);
        let mut procedure: Vec<ProcedureStep> =
            chain.into_iter().map(|l| ProcedureStep::new(l, intermediate_predicate(rng))).collect();
        let nested = !procedure.is_empty();
        if level == Level::Pattern {
            procedure.push(pattern_step(rng, config)?);
        } else {
            procedure.push(ProcedureStep::new(level, terminal_predicate(rng, kind)));
        }

        let relation = *pick(rng, kind.allowed_relations()).expect("every predicate admits a relation");
        let value = if relation.is_numerical() {
            Value::Int(count_value(rng, level, nested))
        } else {
            Value::Text(text_value(rng, config, kind, level, relation)?)
        };
        let rule = Rule::new(procedure, relation, value);
        if check_validity(&rule).is_ok() {
            return Ok(rule);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn config(language: Language) -> GenConfig {
        GenConfig::new(42, language)
    }

    #[test]
    fn samples_are_valid_and_respect_language() {
        for lang in Language::ALL {
            let cfg = config(lang);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for _ in 0..3000 {
                let r = sample_rule(&cfg, &mut rng).unwrap();
                assert_eq!(check_validity(&r), Ok(()), "{r}");
                assert!(r.depth() <= cfg.max_depth);
                assert!(r.procedure.iter().all(|s| !excluded(s.level, lang)), "{r}");
                if r.terminal().unwrap().predicate == Predicate::Count {
                    assert!(r.relation.is_numerical());
                }
            }
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let cfg = config(Language::En);
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            (0..200).map(|_| sample_rule(&cfg, &mut rng).unwrap().to_string()).collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn reaches_maximum_depth() {
        for lang in Language::ALL {
            let cfg = config(lang);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let deepest = (0..2000).map(|_| sample_rule(&cfg, &mut rng).unwrap().depth()).max();
            assert_eq!(deepest, Some(cfg.max_depth));
        }
    }

    #[test]
    fn empty_lexicon_is_reported() {
        let mut cfg = config(Language::En);
        cfg.lexicon.words.clear();
        cfg.lexicon.phrases.clear();
        cfg.lexicon.punctuation.clear();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = (0..500).find_map(|_| sample_rule(&cfg, &mut rng).err());
        assert!(matches!(err, Some(GenError::LexiconExhausted(_))));
    }
}
