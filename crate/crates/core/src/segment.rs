//! Splits text into the elements of one level.
//!
//! Every [`Element`] carries its raw `span` (byte offsets into the text that
//! was segmented) and its content `text`, which is always a sub-slice of the
//! span. Content differs from the raw span where the level strips something:
//!
//! | level     | raw span                         | content                         |
//! |-----------|----------------------------------|---------------------------------|
//! | paragraph | region between `\n\n+` runs      | region, trimmed                 |
//! | line      | line without its `\n`            | line, trimmed                   |
//! | bullet    | whole list-item line             | item text after the marker      |
//! | sentence  | trimmed sentence                 | same                            |
//! | word      | whitespace-delimited token       | token minus edge punctuation    |
//!
//! Elements whose content would be empty are dropped, except bullets.

use std::ops::Range;
use std::sync::LazyLock;

use regex::Regex;

use crate::rule::{Language, Level, Pattern};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element<'a> {
    pub text: &'a str,
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SegmentError {
    #[error("the pattern level requires a regular expression")]
    MissingPattern,
}

/// Abbreviations whose trailing period never ends an English sentence.
pub const ABBREVIATIONS: [&str; 11] =
    ["Mr.", "Mrs.", "Dr.", "Prof.", "St.", "e.g.", "i.e.", "etc.", "vs.", "Fig.", "Eq."];

const ZH_TERMINATORS: [char; 4] = ['。', '！', '？', '…'];

/// Returns the elements of `level` in `text`, ordered by position.
///
/// `pattern` is consulted only for [`Level::Pattern`].
pub fn segment<'a>(
    text: &'a str,
    level: Level,
    language: Language,
    pattern: Option<&Pattern>,
) -> Result<Vec<Element<'a>>, SegmentError> {
    Ok(match level {
        Level::Answer => answer(text),
        Level::Paragraph => paragraphs(text),
        Level::Line => lines(text),
        Level::Bullet => bullets(text),
        Level::Sentence => match language {
            Language::En => sentences_en(text),
            Language::Zh => sentences_zh(text),
        },
        Level::Word => words(text),
        Level::Character => chars_where(text, is_cjk),
        Level::Letter => chars_where(text, |c| c.is_ascii_alphabetic()),
        Level::Punc => chars_where(text, is_punc),
        Level::Pattern => matches(text, pattern.ok_or(SegmentError::MissingPattern)?),
    })
}

/// Raw text strictly between consecutive elements.
pub fn gaps<'a>(elements: &[Element<'_>], parent: &'a str) -> Vec<Element<'a>> {
    elements
        .windows(2)
        .map(|w| {
            let span = w[0].span.end..w[1].span.start;
            Element { text: &parent[span.clone()], span }
        })
        .collect()
}

/// CJK Unified Ideographs, including Extension A.
pub fn is_cjk(c: char) -> bool {
    matches!(c, '\u{4E00}'..='\u{9FFF}' | '\u{3400}'..='\u{4DBF}')
}

static UNICODE_PUNC: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^[\p{P}\u{3001}-\u{303F}\u{FF01}-\u{FF0F}\u{FF1A}-\u{FF20}\u{FF3B}-\u{FF40}\u{FF5B}-\u{FF65}]$")
        .unwrap()
});

/// Unicode punctuation (general category P) plus full-width CJK punctuation.
pub fn is_punc(c: char) -> bool {
    if c.is_ascii() {
        // ASCII punctuation minus the symbol category ($ + < = > ^ ` | ~)
        return c.is_ascii_punctuation() && !matches!(c, '$' | '+' | '<' | '=' | '>' | '^' | '`' | '|' | '~');
    }
    let mut buf = [0u8; 4];
    UNICODE_PUNC.is_match(c.encode_utf8(&mut buf))
}

fn element(text: &str, span: Range<usize>) -> Element<'_> {
    Element { text: &text[span.clone()], span }
}

/// Narrows `span` to its non-whitespace core; `None` if nothing remains.
fn trimmed(text: &str, span: Range<usize>) -> Option<Range<usize>> {
    let s = &text[span.clone()];
    let t = s.trim_start();
    let start = span.start + (s.len() - t.len());
    let t = t.trim_end();
    (!t.is_empty()).then(|| start..start + t.len())
}

fn with_content<'a>(text: &'a str, span: Range<usize>, content: Range<usize>) -> Element<'a> {
    Element { text: &text[content], span }
}

fn answer(text: &str) -> Vec<Element<'_>> {
    if text.is_empty() {
        Vec::new()
    } else {
        vec![element(text, 0..text.len())]
    }
}

fn paragraphs(text: &str) -> Vec<Element<'_>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\n' {
            let run_end = i + bytes[i..].iter().take_while(|&&b| b == b'\n').count();
            if run_end - i >= 2 {
                push_paragraph(text, start..i, &mut out);
                start = run_end;
            }
            i = run_end;
        } else {
            i += 1;
        }
    }
    push_paragraph(text, start..text.len(), &mut out);
    out
}

fn push_paragraph<'a>(text: &'a str, span: Range<usize>, out: &mut Vec<Element<'a>>) {
    if let Some(content) = trimmed(text, span.clone()) {
        out.push(with_content(text, span, content));
    }
}

/// Raw line spans, without their terminating newline.
fn line_spans(text: &str) -> impl Iterator<Item = Range<usize>> + '_ {
    let mut start = 0;
    text.split('\n').map(move |line| {
        let span = start..start + line.len();
        start = span.end + 1;
        span
    })
}

fn lines(text: &str) -> Vec<Element<'_>> {
    line_spans(text)
        .filter_map(|span| trimmed(text, span.clone()).map(|c| with_content(text, span, c)))
        .collect()
}

/// Byte length of a list marker and its trailing spaces at the start of
/// `line`, if the line is a list item.
fn bullet_marker_len(line: &str) -> Option<usize> {
    let b = line.as_bytes();
    let mut i = b.iter().take_while(|&&c| c == b' ' || c == b'\t').count();
    match b.get(i)? {
        b'*' | b'+' | b'-' => i += 1,
        b'0'..=b'9' => {
            i += b[i..].iter().take_while(|c| c.is_ascii_digit()).count();
            match b.get(i)? {
                b'.' | b')' => i += 1,
                _ => return None,
            }
        }
        _ => return None,
    }
    let spaces = b[i..].iter().take_while(|&&c| c == b' ').count();
    (spaces > 0).then_some(i + spaces)
}

fn bullets(text: &str) -> Vec<Element<'_>> {
    line_spans(text)
        .filter_map(|span| {
            let marker = bullet_marker_len(&text[span.clone()])?;
            let body = span.start + marker..span.end;
            let content = trimmed(text, body.clone()).unwrap_or(body.end..body.end);
            Some(with_content(text, span, content))
        })
        .collect()
}

fn push_trimmed<'a>(text: &'a str, span: Range<usize>, out: &mut Vec<Element<'a>>) {
    if let Some(t) = trimmed(text, span) {
        out.push(element(text, t));
    }
}

fn is_abbreviation(text: &str, end: usize) -> bool {
    let head = &text[..end];
    let token_start = head.rfind(char::is_whitespace).map_or(0, |i| i + head[i..].chars().next().unwrap().len_utf8());
    let token = head[token_start..].trim_start_matches(|c: char| !c.is_alphanumeric());
    ABBREVIATIONS.contains(&token)
}

fn sentences_en(text: &str) -> Vec<Element<'_>> {
    let is_term = |c: char| matches!(c, '.' | '!' | '?');
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((_, c)) = iter.next() {
        if !is_term(c) {
            continue;
        }
        while iter.next_if(|&(_, c)| is_term(c)).is_some() {}
        let run_end = iter.peek().map_or(text.len(), |&(i, _)| i);
        let at_boundary = iter.peek().is_none_or(|&(_, c)| c.is_whitespace());
        if at_boundary && !is_abbreviation(text, run_end) {
            push_trimmed(text, start..run_end, &mut out);
            start = run_end;
        }
    }
    push_trimmed(text, start..text.len(), &mut out);
    out
}

fn sentences_zh(text: &str) -> Vec<Element<'_>> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((_, c)) = iter.next() {
        if !ZH_TERMINATORS.contains(&c) {
            continue;
        }
        while iter.next_if(|(_, c)| ZH_TERMINATORS.contains(c)).is_some() {}
        let run_end = iter.peek().map_or(text.len(), |&(i, _)| i);
        push_trimmed(text, start..run_end, &mut out);
        start = run_end;
    }
    push_trimmed(text, start..text.len(), &mut out);
    out
}

fn words(text: &str) -> Vec<Element<'_>> {
    let mut out = Vec::new();
    let mut token_start = None;
    for (i, c) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
        match (c.is_whitespace(), token_start) {
            (false, None) => token_start = Some(i),
            (true, Some(s)) => {
                token_start = None;
                let raw = &text[s..i];
                let core = raw.trim_start_matches(is_punc);
                let lead = raw.len() - core.len();
                let core = core.trim_end_matches(is_punc);
                if !core.is_empty() {
                    out.push(with_content(text, s..i, s + lead..s + lead + core.len()));
                }
            }
            _ => {}
        }
    }
    out
}

fn chars_where(text: &str, keep: impl Fn(char) -> bool) -> Vec<Element<'_>> {
    text.char_indices()
        .filter(|&(_, c)| keep(c))
        .map(|(i, c)| element(text, i..i + c.len_utf8()))
        .collect()
}

fn matches<'a>(text: &'a str, pattern: &Pattern) -> Vec<Element<'a>> {
    pattern
        .regex()
        .find_iter(text)
        .filter(|m| !m.is_empty())
        .map(|m| element(text, m.range()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(text: &str, level: Level, lang: Language) -> Vec<&str> {
        segment(text, level, lang, None).unwrap().into_iter().map(|e| e.text).collect()
    }

    #[test]
    fn paragraphs_split_on_blank_lines() {
        assert_eq!(texts("A\n\nB", Level::Paragraph, Language::En), ["A", "B"]);
        assert_eq!(texts("A\nB\n\n\n C \n", Level::Paragraph, Language::En), ["A\nB", "C"]);
        assert_eq!(texts("\n\nA\n\n  \n\nB\n\n", Level::Paragraph, Language::En), ["A", "B"]);
        let els = segment(" A \n\nB", Level::Paragraph, Language::En, None).unwrap();
        assert_eq!(els[0].span, 0..3);
        assert_eq!(els[0].text, "A");
    }

    #[test]
    fn lines_drop_blanks() {
        assert_eq!(texts("a\n\n  \nb \nc", Level::Line, Language::En), ["a", "b", "c"]);
    }

    #[test]
    fn bullets_strip_markers() {
        assert_eq!(texts("- a\n- b\ntext", Level::Bullet, Language::En), ["a", "b"]);
        assert_eq!(
            texts("  * x\n+ y\n1. one\n12) twelve\n-no\n**bold**\n3.5 no", Level::Bullet, Language::En),
            ["x", "y", "one", "twelve"]
        );
        let els = segment("- a\n- b\n- c", Level::Bullet, Language::En, None).unwrap();
        assert_eq!(els[1].span, 4..7);
        let g: Vec<_> = gaps(&els, "- a\n- b\n- c").into_iter().map(|e| e.text).collect();
        assert_eq!(g, ["\n", "\n"]);
    }

    #[test]
    fn english_sentences() {
        assert_eq!(texts("He ran! She stayed.", Level::Sentence, Language::En), ["He ran!", "She stayed."]);
        assert_eq!(texts("Wait... what?! Ok", Level::Sentence, Language::En), ["Wait...", "what?!", "Ok"]);
        assert_eq!(
            texts("Mr. Smith met Dr. Who, e.g. at 3.5 pm. Bye.", Level::Sentence, Language::En),
            ["Mr. Smith met Dr. Who, e.g. at 3.5 pm.", "Bye."]
        );
        assert_eq!(texts("See (e.g. this). Yes", Level::Sentence, Language::En), ["See (e.g. this).", "Yes"]);
        assert_eq!(texts("x. y. z.", Level::Sentence, Language::En), ["x.", "y.", "z."]);
        assert!(texts("   ", Level::Sentence, Language::En).is_empty());
    }

    #[test]
    fn chinese_sentences() {
        assert_eq!(texts("你好。再见！", Level::Sentence, Language::Zh), ["你好。", "再见！"]);
        assert_eq!(texts("真的吗？！是的……好", Level::Sentence, Language::Zh), ["真的吗？！", "是的……", "好"]);
        assert_eq!(texts("一；二。", Level::Sentence, Language::Zh), ["一；二。"]);
    }

    #[test]
    fn words_strip_edge_punctuation() {
        assert_eq!(texts("The end. (really) -- ok!", Level::Word, Language::En), ["The", "end", "really", "ok"]);
        let els = segment("say \"hi\"", Level::Word, Language::En, None).unwrap();
        assert_eq!(els[1].span, 4..8);
        assert_eq!(els[1].text, "hi");
        assert_eq!(texts("don't stop", Level::Word, Language::En), ["don't", "stop"]);
    }

    #[test]
    fn character_letter_punc() {
        assert_eq!(texts("中文abc，好。", Level::Character, Language::Zh), ["中", "文", "好"]);
        assert_eq!(texts("a1 Bé", Level::Letter, Language::En), ["a", "B"]);
        assert_eq!(texts("Hi, you! $5 + 「引号」。", Level::Punc, Language::En), [",", "!", "「", "」", "。"]);
    }

    #[test]
    fn pattern_matches() {
        let p = Pattern::new("[a-z]+").unwrap();
        let els = segment("cat dog", Level::Pattern, Language::En, Some(&p)).unwrap();
        assert_eq!(els.iter().map(|e| e.text).collect::<Vec<_>>(), ["cat", "dog"]);
        let p = Pattern::new("a*").unwrap();
        assert_eq!(segment("baab", Level::Pattern, Language::En, Some(&p)).unwrap().len(), 1);
        assert_eq!(segment("x", Level::Pattern, Language::En, None), Err(SegmentError::MissingPattern));
    }

    #[test]
    fn answer_and_empty() {
        assert!(texts("", Level::Answer, Language::En).is_empty());
        assert_eq!(texts(" a ", Level::Answer, Language::En), [" a "]);
        for level in Level::ALL.into_iter().filter(|l| *l != Level::Pattern) {
            assert!(texts("", level, Language::En).is_empty(), "{level}");
        }
    }

    #[test]
    fn gaps_between_paragraphs() {
        let text = "A\n\nB";
        let els = segment(text, Level::Paragraph, Language::En, None).unwrap();
        let g = gaps(&els, text);
        assert_eq!(g, vec![Element { text: "\n\n", span: 1..3 }]);
        assert!(gaps(&els[..1], text).is_empty());
    }
}
