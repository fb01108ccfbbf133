//! Aggregated evaluation results and their renderings.
//!
//! Accuracies are fractions in `[0, 1]` at full precision; renderings show
//! percentages with one decimal. Gain is always computed from unrounded
//! accuracies and then rounded, so 22.747% / 24.970% renders as
//! 22.7 / 25.0 / 2.2.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use lexinstruct_core::{Difficulty, Language, LooseVariant};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Accuracy {
    pub n: usize,
    pub strict: f64,
    pub loose: f64,
}

impl Accuracy {
    fn from_counts(n: usize, strict: usize, loose: usize) -> Accuracy {
        if n == 0 {
            return Accuracy::default();
        }
        Accuracy { n, strict: strict as f64 / n as f64, loose: loose as f64 / n as f64 }
    }

    pub fn gain(&self) -> f64 {
        self.loose - self.strict
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatCell {
    pub depth: usize,
    pub count: usize,
    pub n: usize,
    pub strict: f64,
    pub loose: f64,
}

/// Outcome for one scored instruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionVerdict {
    pub id: String,
    pub language: Language,
    pub difficulty: Difficulty,
    pub depth: usize,
    pub count: usize,
    pub strict: bool,
    pub loose: bool,
    pub loose_variant: Option<LooseVariant>,
    /// Per-rule results on the unmodified response.
    pub rules: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall: Accuracy,
    pub gain: f64,
    pub by_language: BTreeMap<Language, Accuracy>,
    pub by_difficulty: BTreeMap<Difficulty, Accuracy>,
    /// Non-empty (depth, count) cells, sorted.
    pub heatmap: Vec<HeatCell>,
    pub verdicts: Vec<InstructionVerdict>,
    /// Instructions without a response; excluded from every denominator.
    pub unscored: Vec<String>,
}

#[derive(Default)]
struct Tally {
    n: usize,
    strict: usize,
    loose: usize,
}

impl Tally {
    fn add(&mut self, v: &InstructionVerdict) {
        self.n += 1;
        self.strict += usize::from(v.strict);
        self.loose += usize::from(v.loose);
    }

    fn accuracy(&self) -> Accuracy {
        Accuracy::from_counts(self.n, self.strict, self.loose)
    }
}

impl EvalReport {
    pub fn from_verdicts(verdicts: Vec<InstructionVerdict>, mut unscored: Vec<String>) -> EvalReport {
        let mut overall = Tally::default();
        let mut by_language: BTreeMap<Language, Tally> = BTreeMap::new();
        let mut by_difficulty: BTreeMap<Difficulty, Tally> = BTreeMap::new();
        let mut cells: BTreeMap<(usize, usize), Tally> = BTreeMap::new();
        for v in &verdicts {
            overall.add(v);
            by_language.entry(v.language).or_default().add(v);
            by_difficulty.entry(v.difficulty).or_default().add(v);
            cells.entry((v.depth, v.count)).or_default().add(v);
        }
        unscored.sort();
        let overall = overall.accuracy();
        EvalReport {
            overall,
            gain: overall.gain(),
            by_language: by_language.into_iter().map(|(k, t)| (k, t.accuracy())).collect(),
            by_difficulty: by_difficulty.into_iter().map(|(k, t)| (k, t.accuracy())).collect(),
            heatmap: cells
                .into_iter()
                .map(|((depth, count), t)| {
                    let a = t.accuracy();
                    HeatCell { depth, count, n: a.n, strict: a.strict, loose: a.loose }
                })
                .collect(),
            verdicts,
            unscored,
        }
    }

    /// Averages runs with equal weight per slice. Verdicts survive only if
    /// every run agrees on them; unscored ids are unioned.
    pub fn merge(reports: &[EvalReport]) -> Option<EvalReport> {
        let first = reports.first()?;
        let overall = mean_accuracy(reports.iter().map(|r| r.overall));
        let by_language = merge_maps(reports.iter().map(|r| &r.by_language));
        let by_difficulty = merge_maps(reports.iter().map(|r| &r.by_difficulty));
        let mut cells: BTreeMap<(usize, usize), Vec<Accuracy>> = BTreeMap::new();
        for r in reports {
            for c in &r.heatmap {
                cells.entry((c.depth, c.count)).or_default().push(Accuracy { n: c.n, strict: c.strict, loose: c.loose });
            }
        }
        let heatmap = cells
            .into_iter()
            .map(|((depth, count), accs)| {
                let a = mean_accuracy(accs.into_iter());
                HeatCell { depth, count, n: a.n, strict: a.strict, loose: a.loose }
            })
            .collect();
        let verdicts =
            if reports.iter().all(|r| r.verdicts == first.verdicts) { first.verdicts.clone() } else { Vec::new() };
        let unscored: BTreeSet<String> = reports.iter().flat_map(|r| r.unscored.iter().cloned()).collect();
        Some(EvalReport {
            overall,
            gain: overall.gain(),
            by_language,
            by_difficulty,
            heatmap,
            verdicts,
            unscored: unscored.into_iter().collect(),
        })
    }
}

fn mean(values: &[f64]) -> f64 {
    match values {
        [] => 0.0,
        [first, rest @ ..] if rest.iter().all(|v| v == first) => *first,
        _ => values.iter().sum::<f64>() / values.len() as f64,
    }
}

fn mean_accuracy(accs: impl Iterator<Item = Accuracy>) -> Accuracy {
    let accs: Vec<Accuracy> = accs.collect();
    let ns: Vec<f64> = accs.iter().map(|a| a.n as f64).collect();
    Accuracy {
        n: mean(&ns).round() as usize,
        strict: mean(&accs.iter().map(|a| a.strict).collect::<Vec<_>>()),
        loose: mean(&accs.iter().map(|a| a.loose).collect::<Vec<_>>()),
    }
}

fn merge_maps<'a, K: Ord + Copy + 'a>(
    maps: impl Iterator<Item = &'a BTreeMap<K, Accuracy>>,
) -> BTreeMap<K, Accuracy> {
    let mut grouped: BTreeMap<K, Vec<Accuracy>> = BTreeMap::new();
    for m in maps {
        for (k, a) in m {
            grouped.entry(*k).or_default().push(*a);
        }
    }
    grouped.into_iter().map(|(k, v)| (k, mean_accuracy(v.into_iter()))).collect()
}

fn pct(x: f64) -> String {
    format!("{:.1}", 100.0 * x)
}

/// Table with strict and loose accuracy for CN, EN and overall, plus gain
/// in percentage points, followed by difficulty and heatmap breakdowns.
pub fn render_table(label: &str, report: &EvalReport) -> String {
    let lang = |l: Language, f: fn(&Accuracy) -> f64| report.by_language.get(&l).map_or("-".into(), |a| pct(f(a)));
    let strict = |a: &Accuracy| a.strict;
    let loose = |a: &Accuracy| a.loose;
    let mut out = String::new();
    out.push_str("| Model | Strict CN | Strict EN | Strict Overall | Loose CN | Loose EN | Loose Overall | Gain |\n");
    out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|\n");
    let _ = writeln!(
        out,
        "| {label} | {} | {} | {} | {} | {} | {} | {} |",
        lang(Language::Zh, strict),
        lang(Language::En, strict),
        pct(report.overall.strict),
        lang(Language::Zh, loose),
        lang(Language::En, loose),
        pct(report.overall.loose),
        pct(report.gain),
    );
    out.push_str("\n| Difficulty | n | Strict | Loose |\n|---|---:|---:|---:|\n");
    for (d, a) in &report.by_difficulty {
        let _ = writeln!(out, "| {d} | {} | {} | {} |", a.n, pct(a.strict), pct(a.loose));
    }
    out.push_str("\n| Depth | Count | n | Strict | Loose |\n|---:|---:|---:|---:|---:|\n");
    for c in &report.heatmap {
        let _ = writeln!(out, "| {} | {} | {} | {} | {} |", c.depth, c.count, c.n, pct(c.strict), pct(c.loose));
    }
    if !report.unscored.is_empty() {
        let _ = writeln!(out, "\nUnscored: {}", report.unscored.join(", "));
    }
    out
}

pub fn render_json(report: &EvalReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CsvRow {
    section: String,
    key: String,
    field: String,
    value: String,
}

fn row(section: &str, key: impl ToString, field: &str, value: impl ToString) -> CsvRow {
    CsvRow { section: section.into(), key: key.to_string(), field: field.into(), value: value.to_string() }
}

fn accuracy_rows(section: &str, key: impl ToString, a: &Accuracy) -> [CsvRow; 3] {
    let key = key.to_string();
    [row(section, &key, "n", a.n), row(section, &key, "strict", a.strict), row(section, &key, "loose", a.loose)]
}

/// Long-format CSV (`section,key,field,value`) that reloads to an equal
/// report. Floats use the shortest representation that round-trips.
pub fn render_csv(report: &EvalReport) -> String {
    let mut rows: Vec<CsvRow> = Vec::new();
    rows.extend(accuracy_rows("overall", "", &report.overall));
    rows.push(row("overall", "", "gain", report.gain));
    for (k, a) in &report.by_language {
        rows.extend(accuracy_rows("language", k, a));
    }
    for (k, a) in &report.by_difficulty {
        rows.extend(accuracy_rows("difficulty", k, a));
    }
    for c in &report.heatmap {
        let a = Accuracy { n: c.n, strict: c.strict, loose: c.loose };
        rows.extend(accuracy_rows("heatmap", format!("{}x{}", c.depth, c.count), &a));
    }
    for v in &report.verdicts {
        rows.push(row("verdict", &v.id, "language", v.language));
        rows.push(row("verdict", &v.id, "difficulty", v.difficulty));
        rows.push(row("verdict", &v.id, "depth", v.depth));
        rows.push(row("verdict", &v.id, "count", v.count));
        rows.push(row("verdict", &v.id, "strict", v.strict));
        rows.push(row("verdict", &v.id, "loose", v.loose));
        rows.push(row("verdict", &v.id, "loose_variant", v.loose_variant.map_or("", |x| x.id())));
        let rules: String = v.rules.iter().map(|&b| if b { '1' } else { '0' }).collect();
        rows.push(row("verdict", &v.id, "rules", rules));
    }
    for id in &report.unscored {
        rows.push(row("unscored", id, "", ""));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

fn parse<T: std::str::FromStr>(r: &CsvRow) -> Result<T, String> {
    r.value.parse().map_err(|_| format!("bad {} value `{}` for {} {}", r.field, r.value, r.section, r.key))
}

fn from_name<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown value `{s}`"))
}

fn set_accuracy(a: &mut Accuracy, r: &CsvRow) -> Result<(), String> {
    match r.field.as_str() {
        "n" => a.n = parse(r)?,
        "strict" => a.strict = parse(r)?,
        "loose" => a.loose = parse(r)?,
        other => return Err(format!("unknown field `{other}` in {}", r.section)),
    }
    Ok(())
}

/// Inverse of [`render_csv`].
pub fn parse_csv(text: &str) -> Result<EvalReport, String> {
    let mut overall = Accuracy::default();
    let mut gain = 0.0;
    let mut by_language = BTreeMap::new();
    let mut by_difficulty = BTreeMap::new();
    let mut cells: BTreeMap<(usize, usize), Accuracy> = BTreeMap::new();
    let mut verdicts: Vec<InstructionVerdict> = Vec::new();
    let mut unscored = Vec::new();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    for (i, rec) in reader.deserialize::<CsvRow>().enumerate() {
        let r = rec.map_err(|e| format!("row {}: {e}", i + 2))?;
        match r.section.as_str() {
            "overall" if r.field == "gain" => gain = parse(&r)?,
            "overall" => set_accuracy(&mut overall, &r)?,
            "language" => set_accuracy(by_language.entry(from_name::<Language>(&r.key)?).or_default(), &r)?,
            "difficulty" => set_accuracy(by_difficulty.entry(from_name::<Difficulty>(&r.key)?).or_default(), &r)?,
            "heatmap" => {
                let (d, c) = r.key.split_once('x').ok_or_else(|| format!("bad heatmap key `{}`", r.key))?;
                let key = (d.parse().map_err(|_| "bad depth")?, c.parse().map_err(|_| "bad count")?);
                set_accuracy(cells.entry(key).or_default(), &r)?;
            }
            "verdict" => {
                if verdicts.last().is_none_or(|v| v.id != r.key) {
                    verdicts.push(InstructionVerdict {
                        id: r.key.clone(),
                        language: Language::En,
                        difficulty: Difficulty::Easy,
                        depth: 0,
                        count: 0,
                        strict: false,
                        loose: false,
                        loose_variant: None,
                        rules: Vec::new(),
                    });
                }
                let v = verdicts.last_mut().expect("just pushed");
                match r.field.as_str() {
                    "language" => v.language = from_name(&r.value)?,
                    "difficulty" => v.difficulty = from_name(&r.value)?,
                    "depth" => v.depth = parse(&r)?,
                    "count" => v.count = parse(&r)?,
                    "strict" => v.strict = parse(&r)?,
                    "loose" => v.loose = parse(&r)?,
                    "loose_variant" if r.value.is_empty() => v.loose_variant = None,
                    "loose_variant" => v.loose_variant = Some(from_name(&r.value)?),
                    "rules" => v.rules = r.value.chars().map(|c| c == '1').collect(),
                    other => return Err(format!("unknown verdict field `{other}`")),
                }
            }
            "unscored" => unscored.push(r.key),
            other => return Err(format!("unknown section `{other}`")),
        }
    }
    Ok(EvalReport {
        overall,
        gain,
        by_language,
        by_difficulty,
        heatmap: cells
            .into_iter()
            .map(|((depth, count), a)| HeatCell { depth, count, n: a.n, strict: a.strict, loose: a.loose })
            .collect(),
        verdicts,
        unscored,
    })
}
