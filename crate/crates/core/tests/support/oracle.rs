//! Naive reference verifier.
//!
//! Works on `Vec<char>` with character indices and shares no code with the
//! library beyond the rule data types. Patterns are limited to `\d+` and
//! plain literals so matching can be done by hand.

use lexinstruct_core::{Language, Level, Position, Predicate, ProcedureStep, Relation, Rule, Value};

const ABBREVIATIONS: &[&str] = &["Mr.", "Mrs.", "Dr.", "Prof.", "St.", "e.g.", "i.e.", "etc.", "vs.", "Fig.", "Eq."];

/// Punctuation appearing in generated test texts.
const PUNCTUATION: &str = "!\"#%&'()*,-./:;?@[\\]_{}。，！？；：、“”《》…（）";

fn is_punc(c: char) -> bool {
    PUNCTUATION.contains(c)
}

fn is_cjk(c: char) -> bool {
    ('\u{4E00}'..='\u{9FFF}').contains(&c) || ('\u{3400}'..='\u{4DBF}').contains(&c)
}

fn is_ws(c: char) -> bool {
    c.is_whitespace()
}

/// An element: content plus the raw character range it occupies.
#[derive(Debug, Clone)]
struct El {
    content: Vec<char>,
    start: usize,
    end: usize,
}

fn trim(chars: &[char], mut a: usize, mut b: usize) -> (usize, usize) {
    while a < b && is_ws(chars[a]) {
        a += 1;
    }
    while b > a && is_ws(chars[b - 1]) {
        b -= 1;
    }
    (a, b)
}

fn line_ranges(t: &[char]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 0..=t.len() {
        if i == t.len() || t[i] == '\n' {
            out.push((start, i));
            start = i + 1;
        }
    }
    out
}

fn paragraphs(t: &[char]) -> Vec<El> {
    let mut cuts = Vec::new(); // (run start, run end)
    let mut i = 0;
    while i < t.len() {
        if t[i] == '\n' {
            let mut j = i;
            while j < t.len() && t[j] == '\n' {
                j += 1;
            }
            if j - i >= 2 {
                cuts.push((i, j));
            }
            i = j;
        } else {
            i += 1;
        }
    }
    let mut regions = Vec::new();
    let mut start = 0;
    for (a, b) in cuts {
        regions.push((start, a));
        start = b;
    }
    regions.push((start, t.len()));
    regions
        .into_iter()
        .filter_map(|(a, b)| {
            let (x, y) = trim(t, a, b);
            (x < y).then(|| El { content: t[x..y].to_vec(), start: a, end: b })
        })
        .collect()
}

fn lines(t: &[char]) -> Vec<El> {
    line_ranges(t)
        .into_iter()
        .filter_map(|(a, b)| {
            let (x, y) = trim(t, a, b);
            (x < y).then(|| El { content: t[x..y].to_vec(), start: a, end: b })
        })
        .collect()
}

fn bullets(t: &[char]) -> Vec<El> {
    let mut out = Vec::new();
    for (a, b) in line_ranges(t) {
        let mut i = a;
        while i < b && (t[i] == ' ' || t[i] == '\t') {
            i += 1;
        }
        if i == b {
            continue;
        }
        if matches!(t[i], '*' | '+' | '-') {
            i += 1;
        } else if t[i].is_ascii_digit() {
            while i < b && t[i].is_ascii_digit() {
                i += 1;
            }
            if i < b && (t[i] == '.' || t[i] == ')') {
                i += 1;
            } else {
                continue;
            }
        } else {
            continue;
        }
        if i >= b || t[i] != ' ' {
            continue;
        }
        let (x, y) = trim(t, i, b);
        out.push(El { content: t[x..y].to_vec(), start: a, end: b });
    }
    out
}

fn pieces_to_sentences(t: &[char], cuts: Vec<usize>) -> Vec<El> {
    let mut out = Vec::new();
    let mut start = 0;
    for c in cuts.into_iter().chain(std::iter::once(t.len())) {
        let (x, y) = trim(t, start, c);
        if x < y {
            out.push(El { content: t[x..y].to_vec(), start: x, end: y });
        }
        start = c;
    }
    out
}

fn sentences_en(t: &[char]) -> Vec<El> {
    let term = |c: char| c == '.' || c == '!' || c == '?';
    let mut cuts = Vec::new();
    for i in 0..t.len() {
        let run_end = i + 1;
        if !term(t[i]) || (run_end < t.len() && term(t[run_end])) {
            continue;
        }
        if run_end < t.len() && !is_ws(t[run_end]) {
            continue;
        }
        let mut tok_start = run_end;
        while tok_start > 0 && !is_ws(t[tok_start - 1]) {
            tok_start -= 1;
        }
        while tok_start < run_end && !t[tok_start].is_alphanumeric() {
            tok_start += 1;
        }
        let token: String = t[tok_start..run_end].iter().collect();
        if !ABBREVIATIONS.contains(&token.as_str()) {
            cuts.push(run_end);
        }
    }
    pieces_to_sentences(t, cuts)
}

fn sentences_zh(t: &[char]) -> Vec<El> {
    let term = |c: char| "。！？…".contains(c);
    let cuts =
        (0..t.len()).filter(|&i| term(t[i]) && (i + 1 == t.len() || !term(t[i + 1]))).map(|i| i + 1).collect();
    pieces_to_sentences(t, cuts)
}

fn words(t: &[char]) -> Vec<El> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < t.len() {
        if is_ws(t[i]) {
            i += 1;
            continue;
        }
        let a = i;
        while i < t.len() && !is_ws(t[i]) {
            i += 1;
        }
        let (mut x, mut y) = (a, i);
        while x < y && is_punc(t[x]) {
            x += 1;
        }
        while y > x && is_punc(t[y - 1]) {
            y -= 1;
        }
        if x < y {
            out.push(El { content: t[x..y].to_vec(), start: a, end: i });
        }
    }
    out
}

fn single_chars(t: &[char], keep: impl Fn(char) -> bool) -> Vec<El> {
    (0..t.len()).filter(|&i| keep(t[i])).map(|i| El { content: vec![t[i]], start: i, end: i + 1 }).collect()
}

fn pattern_matches(t: &[char], source: &str) -> Vec<El> {
    let mut out = Vec::new();
    if source == r"\d+" {
        let mut i = 0;
        while i < t.len() {
            if t[i].is_ascii_digit() {
                let a = i;
                while i < t.len() && t[i].is_ascii_digit() {
                    i += 1;
                }
                out.push(El { content: t[a..i].to_vec(), start: a, end: i });
            } else {
                i += 1;
            }
        }
        return out;
    }
    assert!(source.chars().all(|c| c.is_alphanumeric() || c == ' '), "oracle cannot match pattern {source:?}");
    let lit: Vec<char> = source.chars().collect();
    let mut i = 0;
    while i + lit.len() <= t.len() {
        if t[i..i + lit.len()] == lit[..] {
            out.push(El { content: lit.clone(), start: i, end: i + lit.len() });
            i += lit.len();
        } else {
            i += 1;
        }
    }
    out
}

fn elements(t: &[char], step: &ProcedureStep, lang: Language) -> Vec<El> {
    match step.level {
        Level::Answer => {
            if t.is_empty() {
                vec![]
            } else {
                vec![El { content: t.to_vec(), start: 0, end: t.len() }]
            }
        }
        Level::Paragraph => paragraphs(t),
        Level::Line => lines(t),
        Level::Bullet => bullets(t),
        Level::Sentence => match lang {
            Language::En => sentences_en(t),
            Language::Zh => sentences_zh(t),
        },
        Level::Word => words(t),
        Level::Character => single_chars(t, is_cjk),
        Level::Letter => single_chars(t, |c| c.is_ascii_alphabetic()),
        Level::Punc => single_chars(t, is_punc),
        Level::Pattern => pattern_matches(t, step.pattern.as_ref().expect("pattern step").as_str()),
    }
}

fn select(t: &[char], step: &ProcedureStep, lang: Language) -> Vec<Vec<char>> {
    let els = elements(t, step, lang);
    match step.predicate {
        Predicate::Index(Position::Last) => els.last().map(|e| e.content.clone()).into_iter().collect(),
        Predicate::Index(Position::Nth(n)) => els.get(n.get() - 1).map(|e| e.content.clone()).into_iter().collect(),
        Predicate::All | Predicate::Count => els.into_iter().map(|e| e.content).collect(),
        Predicate::Before(n) => els.get(n.get() - 1).map(|e| t[..e.start].to_vec()).into_iter().collect(),
        Predicate::After(n) => els.get(n.get() - 1).map(|e| t[e.end..].to_vec()).into_iter().collect(),
        Predicate::Between => els.windows(2).map(|w| t[w[0].end..w[1].start].to_vec()).collect(),
    }
}

fn holds_text(target: &[char], relation: Relation, value: &str) -> bool {
    let v: Vec<char> = value.chars().collect();
    let starts = target.len() >= v.len() && target[..v.len()] == v[..];
    let ends = target.len() >= v.len() && target[target.len() - v.len()..] == v[..];
    let contains = v.is_empty() || target.windows(v.len()).any(|w| w == &v[..]);
    match relation {
        Relation::StartsWith => starts,
        Relation::EndsWith => ends,
        Relation::Equal => target == &v[..],
        Relation::Contain => contains,
        Relation::NotStartsWith => !starts,
        Relation::NotEndsWith => !ends,
        Relation::NotContain => !contains,
        _ => panic!("numerical relation on text"),
    }
}

fn holds_count(count: u64, relation: Relation, value: u64) -> bool {
    match relation {
        Relation::Eq => count == value,
        Relation::Neq => count != value,
        Relation::Gt => count > value,
        Relation::Gte => count >= value,
        Relation::Lt => count < value,
        Relation::Lte => count <= value,
        _ => panic!("textual relation on count"),
    }
}

/// Reference verdict for a valid rule.
pub fn oracle_verify(rule: &Rule, text: &str, lang: Language) -> bool {
    let steps = &rule.procedure;
    let counting = steps.last().map(|s| s.predicate) == Some(Predicate::Count);
    let isolate = if counting { &steps[..steps.len() - 1] } else { &steps[..] };
    let mut contexts: Vec<Vec<char>> = vec![text.chars().collect()];
    for step in isolate {
        if step.level == Level::Answer {
            continue;
        }
        let mut next = Vec::new();
        for c in &contexts {
            let picked = select(c, step, lang);
            if picked.is_empty() {
                return false;
            }
            next.extend(picked);
        }
        contexts = next;
    }
    match &rule.value {
        Value::Int(v) => {
            let terminal = steps.last().unwrap();
            let mut counts: Vec<u64> = contexts.iter().map(|c| elements(c, terminal, lang).len() as u64).collect();
            let non_answer_steps = steps.iter().filter(|s| s.level != Level::Answer).count();
            if counts.is_empty() && non_answer_steps == 1 {
                counts.push(0);
            }
            !counts.is_empty() && counts.iter().all(|&c| holds_count(c, rule.relation, *v))
        }
        Value::Text(v) => {
            !contexts.is_empty() && contexts.iter().all(|c| holds_text(c, rule.relation, v))
        }
    }
}
