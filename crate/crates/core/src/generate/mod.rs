//! Dataset generation: rule sampling, difficulty-bucketed rejection
//! sampling and prompt rendering.

mod lexicon;
mod render;
mod sample;

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::grade::{grade_difficulty, Difficulty};
use crate::instruction::Instruction;
use crate::rule::{Language, Rule};

pub use lexicon::{default_seed_tasks, Lexicon};
pub use render::{template_key, Templates};
pub use sample::{sample_rule, sample_rule_within};

/// Rejection-sampling budget for each requested instruction.
pub const ATTEMPTS_PER_SLOT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("invalid template file: {0}")]
    Templates(String),
    #[error("no template for {0}")]
    MissingTemplate(String),
    #[error("lexicon has no {0} to draw a value from")]
    LexiconExhausted(&'static str),
    #[error("could not fill the {bucket} bucket: produced {produced} of {requested}")]
    BucketUnfillable { bucket: Difficulty, requested: usize, produced: usize },
    #[error("screen failed: {0}")]
    Screen(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Buckets {
    #[serde(default)]
    pub easy: usize,
    #[serde(default)]
    pub medium: usize,
    #[serde(default)]
    pub hard: usize,
}

impl Buckets {
    pub fn get(&self, d: Difficulty) -> usize {
        match d {
            Difficulty::Easy => self.easy,
            Difficulty::Medium => self.medium,
            Difficulty::Hard => self.hard,
        }
    }

    pub fn total(&self) -> usize {
        self.easy + self.medium + self.hard
    }
}

fn default_max_depth() -> usize {
    3
}

fn default_max_constraints() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: u64,
    language: Language,
    #[serde(default)]
    buckets: Buckets,
    #[serde(default = "default_max_depth")]
    max_depth: usize,
    #[serde(default = "default_max_constraints")]
    max_constraints: usize,
    lexicon: Option<Lexicon>,
    seed_tasks: Option<Vec<String>>,
}

/// Generator settings. Missing lexicon and seed tasks fall back to the
/// built-in defaults for the language.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenConfig {
    pub seed: u64,
    pub language: Language,
    pub buckets: Buckets,
    pub max_depth: usize,
    pub max_constraints: usize,
    pub lexicon: Lexicon,
    pub seed_tasks: Vec<String>,
}

impl GenConfig {
    pub fn new(seed: u64, language: Language) -> GenConfig {
        GenConfig {
            seed,
            language,
            buckets: Buckets::default(),
            max_depth: default_max_depth(),
            max_constraints: default_max_constraints(),
            lexicon: Lexicon::default_for(language),
            seed_tasks: default_seed_tasks(language),
        }
    }

    pub fn from_toml(src: &str) -> Result<GenConfig, GenError> {
        let raw: RawConfig = toml::from_str(src).map_err(|e| GenError::Config(e.to_string()))?;
        let config = GenConfig {
            seed: raw.seed,
            language: raw.language,
            buckets: raw.buckets,
            max_depth: raw.max_depth,
            max_constraints: raw.max_constraints,
            lexicon: raw.lexicon.unwrap_or_else(|| Lexicon::default_for(raw.language)),
            seed_tasks: raw.seed_tasks.unwrap_or_else(|| default_seed_tasks(raw.language)),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if !(1..=4).contains(&self.max_depth) {
            return Err(GenError::Config(format!("max_depth must be in 1..=4, got {}", self.max_depth)));
        }
        if !(1..=5).contains(&self.max_constraints) {
            return Err(GenError::Config(format!(
                "max_constraints must be in 1..=5, got {}",
                self.max_constraints
            )));
        }
        if self.seed_tasks.iter().all(|t| t.trim().is_empty()) {
            return Err(GenError::Config("seed_tasks is empty".into()));
        }
        for p in &self.lexicon.patterns {
            crate::rule::Pattern::new(p).map_err(|e| GenError::Config(format!("lexicon pattern `{p}`: {e}")))?;
        }
        if let Some(v) = [&self.lexicon.words, &self.lexicon.phrases, &self.lexicon.characters, &self.lexicon.letters, &self.lexicon.punctuation]
            .into_iter()
            .flatten()
            .find(|v| v.is_empty())
        {
            return Err(GenError::Config(format!("lexicon contains an empty value {v:?}")));
        }
        Ok(())
    }
}

/// External veto over generated instructions.
pub trait Screen {
    /// Returns whether `instruction` may be kept.
    fn accept(&mut self, instruction: &Instruction) -> Result<bool, GenError>;
}

/// Screen that keeps everything.
pub struct AcceptAll;

impl Screen for AcceptAll {
    fn accept(&mut self, _: &Instruction) -> Result<bool, GenError> {
        Ok(true)
    }
}

/// Stable instruction id derived from the seed, language and output index.
pub fn instruction_id(seed: u64, language: Language, index: usize) -> String {
    let digest = Sha256::digest(format!("{seed}:{language}:{index}").as_bytes());
    let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    format!("{language}-{hex}")
}

/// Order-insensitive identity of a rule list.
pub fn multiset_key(rules: &[Rule]) -> String {
    let mut parts: Vec<String> = rules.iter().map(ToString::to_string).collect();
    parts.sort();
    parts.join("\n")
}

/// Random generator for a config. Languages use separate streams so the same
/// seed gives unrelated English and Chinese datasets.
pub fn rng_for(seed: u64, language: Language) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(match language {
        Language::En => 0,
        Language::Zh => 1,
    });
    rng
}

/// Constraint count and depth caps that make each bucket likely.
fn bucket_shape(config: &GenConfig, bucket: Difficulty) -> (std::ops::RangeInclusive<usize>, usize) {
    let c = config.max_constraints;
    let d = config.max_depth;
    match bucket {
        Difficulty::Easy => (1..=c.min(2), 1),
        Difficulty::Medium => (1..=c.min(3), d.min(2)),
        Difficulty::Hard => (c.min(2)..=c, d),
    }
}

fn sample_rules<R: Rng + ?Sized>(
    config: &GenConfig,
    rng: &mut R,
    count: usize,
    depth: usize,
) -> Result<Vec<Rule>, GenError> {
    let mut rules: Vec<Rule> = Vec::with_capacity(count);
    while rules.len() < count {
        let rule = sample_rule_within(config, rng, depth)?;
        if rules.iter().all(|r| r.procedure != rule.procedure) {
            rules.push(rule);
        }
    }
    Ok(rules)
}

/// Generates the requested number of instructions per difficulty bucket,
/// easy first. Output is a pure function of `config`, `templates` and the
/// screen's decisions.
pub fn generate_dataset(
    config: &GenConfig,
    templates: &Templates,
    screen: &mut dyn Screen,
) -> Result<Vec<Instruction>, GenError> {
    config.validate()?;
    let missing = templates.missing();
    if let Some(key) = missing.into_iter().next() {
        return Err(GenError::MissingTemplate(key));
    }
    let tasks: Vec<&str> = config.seed_tasks.iter().map(|t| t.trim()).filter(|t| !t.is_empty()).collect();
    let mut rng = rng_for(config.seed, config.language);
    let mut seen: HashSet<String> = HashSet::new();
    let mut out = Vec::with_capacity(config.buckets.total());

    for bucket in Difficulty::ALL {
        let requested = config.buckets.get(bucket);
        let (counts, depth) = bucket_shape(config, bucket);
        for produced in 0..requested {
            let mut accepted = None;
            for _ in 0..ATTEMPTS_PER_SLOT {
                let n = rng.random_range(*counts.start() as u32..=*counts.end() as u32) as usize;
                let rules = sample_rules(config, &mut rng, n, depth)?;
                if grade_difficulty(&rules).grade != bucket {
                    continue;
                }
                let key = multiset_key(&rules);
                if seen.contains(&key) {
                    continue;
                }
                let task = tasks[rng.random_range(0..tasks.len() as u32) as usize];
                let prompt = templates.render_prompt(&rules, config.language, task)?;
                let id = instruction_id(config.seed, config.language, out.len());
                let instruction = Instruction::new(id, config.language, prompt, rules);
                if !screen.accept(&instruction)? {
                    continue;
                }
                seen.insert(key);
                accepted = Some(instruction);
                break;
            }
            match accepted {
                Some(i) => out.push(i),
                None => return Err(GenError::BucketUnfillable { bucket, requested, produced }),
            }
        }
    }
    Ok(out)
}
