//! GIFT text format: writer and a small parser used to check exported files.
//!
//! Only the multiple-choice subset is handled:
//!
//! ```text
//! // comment
//! ::title::Stem text {
//! =correct answer
//! ~wrong answer
//! }
//! ```
//!
//! Questions are separated by blank lines. `~ = # { } :` and `\` are escaped
//! with a backslash inside titles, stems and answers.

use thiserror::Error;

use crate::mcq::BankEntry;

const SPECIAL: &[char] = &['~', '=', '#', '{', '}', ':', '\\'];

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if SPECIAL.contains(&c) {
            out.push('\\');
        }
        // a newline would end the block early
        if c == '\n' {
            out.push(' ');
            continue;
        }
        out.push(c);
    }
    out
}

/// One GIFT question block with options in display order.
pub fn write_question(entry: &BankEntry) -> String {
    let mcq = &entry.mcq;
    let mut out = format!(
        "// {} | bloom: {} | grades: {}\n::{}::{} {{\n",
        escape(&mcq.id),
        mcq.bloom_level.name(),
        mcq.grade_band,
        escape(&mcq.id),
        escape(mcq.stem.trim())
    );
    for &i in entry.display_order.as_slice() {
        let marker = if i == 0 { '=' } else { '~' };
        let text = if i == 0 { &mcq.key } else { &mcq.distractors[i - 1] };
        out.push_str(&format!("{marker}{}\n", escape(text.trim())));
    }
    out.push_str("}\n");
    out
}

pub fn write_gift(bank: &[BankEntry]) -> String {
    bank.iter().map(write_question).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GiftAnswer {
    pub correct: bool,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GiftQuestion {
    pub title: Option<String>,
    pub stem: String,
    pub answers: Vec<GiftAnswer>,
}

impl GiftQuestion {
    pub fn correct(&self) -> Vec<&str> {
        self.answers.iter().filter(|a| a.correct).map(|a| a.text.as_str()).collect()
    }

    pub fn wrong(&self) -> Vec<&str> {
        self.answers.iter().filter(|a| !a.correct).map(|a| a.text.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct GiftError {
    pub line: usize,
    pub message: String,
}

/// A character with whether it was backslash-escaped.
type Token = (char, bool);

fn tokenize(text: &str) -> Result<Vec<Token>, String> {
    let mut out = Vec::new();
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some(next) => out.push((next, true)),
                None => return Err("dangling escape at end of question".into()),
            }
        } else {
            out.push((c, false));
        }
    }
    Ok(out)
}

fn text_of(tokens: &[Token]) -> String {
    tokens.iter().map(|(c, _)| *c).collect::<String>().trim().to_string()
}

fn unescaped_special(tokens: &[Token]) -> Option<char> {
    tokens.iter().find(|(c, esc)| !esc && SPECIAL.contains(c)).map(|(c, _)| *c)
}

fn parse_block(block: &str) -> Result<GiftQuestion, String> {
    let tokens = tokenize(block)?;
    let mut rest: &[Token] = &tokens;
    let mut title = None;
    let is_colon = |t: Option<&Token>| t == Some(&(':', false));
    if is_colon(rest.first()) && is_colon(rest.get(1)) {
        let body = &rest[2..];
        let end = (0..body.len())
            .find(|&i| is_colon(body.get(i)) && is_colon(body.get(i + 1)))
            .ok_or("unterminated title")?;
        title = Some(text_of(&body[..end]));
        rest = &body[end + 2..];
    }
    let open = rest
        .iter()
        .position(|t| *t == ('{', false))
        .ok_or("missing answer block")?;
    let stem_tokens = &rest[..open];
    if let Some(c) = unescaped_special(stem_tokens) {
        return Err(format!("unescaped {c:?} in question text"));
    }
    let stem = text_of(stem_tokens);
    if stem.is_empty() {
        return Err("empty question text".into());
    }
    let body = &rest[open + 1..];
    let close = body
        .iter()
        .position(|t| *t == ('}', false))
        .ok_or("unclosed answer block")?;
    if !text_of(&body[close + 1..]).is_empty() {
        return Err("text after answer block".into());
    }
    let body = &body[..close];
    let lead = body.iter().take_while(|(c, _)| c.is_whitespace()).count();
    let mut answers = Vec::new();
    let mut current: Option<(bool, Vec<Token>)> = None;
    for &(c, esc) in &body[lead..] {
        match (c, esc) {
            ('=' | '~', false) => {
                if let Some((correct, toks)) = current.take() {
                    answers.push((correct, toks));
                }
                current = Some((c == '=', Vec::new()));
            }
            ('#', false) => return Err("answer feedback is not supported".into()),
            ('{' | ':', false) => return Err(format!("unescaped {c:?} in answer")),
            _ => match current.as_mut() {
                Some((_, toks)) => toks.push((c, esc)),
                None => return Err("answer text without = or ~".into()),
            },
        }
    }
    answers.extend(current);
    let answers: Vec<GiftAnswer> = answers
        .into_iter()
        .map(|(correct, toks)| GiftAnswer { correct, text: text_of(&toks) })
        .collect();
    if answers.iter().any(|a| a.text.is_empty()) {
        return Err("empty answer".into());
    }
    match answers.iter().filter(|a| a.correct).count() {
        1 => {}
        0 => return Err("no correct answer".into()),
        n => return Err(format!("{n} answers marked correct")),
    }
    if answers.len() < 2 {
        return Err("a multiple-choice question needs at least one wrong answer".into());
    }
    Ok(GiftQuestion { title, stem, answers })
}

/// Parses and checks a GIFT file of multiple-choice questions.
pub fn parse_gift(text: &str) -> Result<Vec<GiftQuestion>, GiftError> {
    let mut questions = Vec::new();
    let mut block = String::new();
    let mut start = 0;
    let mut flush = |block: &mut String, start: usize| -> Result<(), GiftError> {
        if !block.trim().is_empty() {
            let q = parse_block(block).map_err(|message| GiftError { line: start, message })?;
            questions.push(q);
        }
        block.clear();
        Ok(())
    };
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            flush(&mut block, start)?;
            continue;
        }
        if trimmed.starts_with("//") {
            continue;
        }
        if block.is_empty() {
            start = i + 1;
        }
        block.push_str(line);
        block.push('\n');
    }
    flush(&mut block, start)?;
    Ok(questions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcq::fixtures::sample_question;
    use crate::mcq::DisplayOrder;

    #[test]
    fn escapes_every_special_character() {
        assert_eq!(escape("a~b=c#d{e}f:g\\h"), "a\\~b\\=c\\#d\\{e\\}f\\:g\\\\h");
        assert_eq!(escape("line\nbreak"), "line break");
    }

    #[test]
    fn sample_question_block() {
        let entry = BankEntry { mcq: sample_question(), display_order: DisplayOrder::identity(4) };
        let text = write_question(&entry);
        assert!(text.contains("\n=It may produce a story that lacks originality"), "{text}");
        assert_eq!(text.matches("\n~").count(), 3);
        let parsed = parse_gift(&text).unwrap();
        assert_eq!(parsed[0].title.as_deref(), Some("sample"));
        assert_eq!(parsed[0].correct(), vec![entry.mcq.key.as_str()]);
    }

    #[test]
    fn checker_rejects_malformed_blocks() {
        for (text, fragment) in [
            ("Stem {\n~a\n~b\n}", "no correct answer"),
            ("Stem {\n=a\n=b\n}", "2 answers marked correct"),
            ("Stem\n=a\n~b", "missing answer block"),
            ("Stem {\n=a\n~b\n", "unclosed answer block"),
            ("Stem = bad {\n=a\n~b\n}", "unescaped '='"),
            ("Stem {\n=a#feedback\n~b\n}", "feedback"),
            ("Stem {\n=a\n}", "wrong answer"),
            ("::t:: {\n=a\n~b\n}", "empty question text"),
        ] {
            let err = parse_gift(text).unwrap_err();
            assert!(err.message.contains(fragment), "{text}: {err}");
        }
    }

    #[test]
    fn blocks_are_split_on_blank_lines_with_line_numbers() {
        let text = "// header\n\nQ1 {\n=a\n~b\n}\n\n\nQ2 {\n~a\n~b\n}\n";
        let err = parse_gift(text).unwrap_err();
        assert_eq!(err.line, 9);
        assert_eq!(parse_gift("Q1 {=a ~b}\n\nQ2 {\n=c\n~d\n}\n").unwrap().len(), 2);
    }
}
