//! Raw-line scanning and expression lexing.
//!
//! Two independent text views feed the metric layer: physical-line
//! classification (blank / comment / source, with comment capture) and a
//! small token lexer for `when` clauses and `{{ ... }}` template
//! expressions. Neither view depends on YAML parsing, so both survive
//! malformed files.

use crate::Diagnostic;
use std::collections::HashMap;

/// Classification of one physical line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineClass {
    Blank,
    Comment,
    Source,
}

/// Per-file line statistics; the three counts partition the physical lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LineStats {
    pub source_lines: usize,
    pub comment_lines: usize,
    pub blank_lines: usize,
    /// Captured comment text (without the `#`), both full-line comments and
    /// trailing comments on source lines, with their 1-based line numbers.
    pub comments: Vec<(usize, String)>,
}

impl LineStats {
    pub fn total_lines(&self) -> usize {
        self.source_lines + self.comment_lines + self.blank_lines
    }
}

/// Classify every physical line: blank when whitespace-only, comment when
/// the first non-whitespace character is `#`, source otherwise.
pub fn classify_lines(text: &str) -> Vec<LineClass> {
    text.lines()
        .map(|line| {
            let trimmed = line.trim_start();
            if trimmed.is_empty() {
                LineClass::Blank
            } else if trimmed.starts_with('#') {
                LineClass::Comment
            } else {
                LineClass::Source
            }
        })
        .collect()
}

/// Count line classes and capture comment text.
///
/// A trailing `#` comment on a source line is captured but the line still
/// counts as source. A `#` inside a quoted scalar or glued to non-blank text
/// does not start a comment.
pub fn scan_lines(text: &str) -> LineStats {
    let mut stats = LineStats::default();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() {
            stats.blank_lines += 1;
        } else if let Some(rest) = trimmed.strip_prefix('#') {
            stats.comment_lines += 1;
            stats.comments.push((line_no, rest.to_string()));
        } else {
            stats.source_lines += 1;
            if let Some(comment) = trailing_comment(line) {
                stats.comments.push((line_no, comment));
            }
        }
    }
    stats
}

/// Text after a trailing `#` that starts a comment on a source line:
/// outside quotes and preceded by whitespace.
fn trailing_comment(line: &str) -> Option<String> {
    let mut in_single = false;
    let mut in_double = false;
    let mut prev_is_space = true;
    for (i, c) in line.char_indices() {
        match c {
            '\'' if !in_double => in_single = !in_single,
            '"' if !in_single => in_double = !in_double,
            '#' if !in_single && !in_double && prev_is_space => {
                return Some(line[i + 1..].to_string());
            }
            _ => {}
        }
        prev_is_space = c.is_whitespace();
    }
    None
}

/// Split the whole text on whitespace runs; empty strings excluded.
pub fn tokenize_text(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Shannon entropy in bits of the token distribution; 0 for empty input.
///
/// The summation runs over the sorted count vector, so the result is exactly
/// permutation-invariant and bit-for-bit reproducible.
pub fn text_entropy<S: AsRef<str>>(tokens: &[S]) -> f64 {
    if tokens.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for token in tokens {
        *counts.entry(token.as_ref()).or_insert(0) += 1;
    }
    let mut frequencies: Vec<usize> = counts.into_values().collect();
    frequencies.sort_unstable();
    let total = tokens.len() as f64;
    let mut entropy = 0.0;
    for count in frequencies {
        let p = count as f64 / total;
        entropy -= p * p.log2();
    }
    entropy.max(0.0)
}

/// Interior of one `{{ ... }}` occurrence with the position of its `{{`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateExpression {
    pub text: String,
    /// 1-based line of the opening braces.
    pub line: usize,
    /// 1-based column of the opening braces.
    pub column: usize,
}

/// Extract every `{{ ... }}` interior from the raw text (non-nested; the
/// first `}}` closes). Expressions inside strings and comments are included.
/// An opening `{{` without a closing `}}` yields a diagnostic and scanning
/// resumes right after the opening braces.
pub fn extract_template_expressions(text: &str) -> (Vec<TemplateExpression>, Vec<Diagnostic>) {
    let chars: Vec<char> = text.chars().collect();
    let mut expressions = Vec::new();
    let mut diagnostics = Vec::new();
    let mut line = 1usize;
    let mut column = 1usize;
    let mut i = 0usize;

    let advance = |line: &mut usize, column: &mut usize, c: char| {
        if c == '\n' {
            *line += 1;
            *column = 1;
        } else {
            *column += 1;
        }
    };

    while i < chars.len() {
        if chars[i] == '{' && i + 1 < chars.len() && chars[i + 1] == '{' {
            let open_line = line;
            let open_column = column;
            let mut j = i + 2;
            let mut close = None;
            while j < chars.len() {
                if chars[j] == '}' && j + 1 < chars.len() && chars[j + 1] == '}' {
                    close = Some(j);
                    break;
                }
                j += 1;
            }
            match close {
                Some(end) => {
                    expressions.push(TemplateExpression {
                        text: chars[i + 2..end].iter().collect(),
                        line: open_line,
                        column: open_column,
                    });
                    while i < end + 2 {
                        advance(&mut line, &mut column, chars[i]);
                        i += 1;
                    }
                }
                None => {
                    diagnostics.push(Diagnostic::warning(
                        open_line,
                        "unterminated template expression: missing '}}'",
                    ));
                    advance(&mut line, &mut column, chars[i]);
                    advance(&mut line, &mut column, chars[i + 1]);
                    i += 2;
                }
            }
        } else {
            advance(&mut line, &mut column, chars[i]);
            i += 1;
        }
    }
    (expressions, diagnostics)
}

/// Kinds of expression tokens relevant to the metric catalogue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    /// `==`, `!=`, `>=`, `<=`, `>`, `<`, and the whole words `is` and `in`.
    ComparisonOp,
    /// The whole words `and`, `or`, `not`.
    BooleanOp,
    /// `+`, `-`, `/`, `//`, `%`, `*`, `**` (longest match wins).
    MathOp,
    /// `|`.
    FilterPipe,
    /// The identifier `lookup` immediately followed by `(`.
    LookupCall,
    Identifier,
    /// Quoted strings (opaque interiors) and numbers.
    Literal,
    Other,
}

/// One lexed token; positions are 1-based within the lexed text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpressionToken {
    pub kind: TokenKind,
    pub text: String,
    pub line: usize,
    pub column: usize,
}

/// Lex a `when` clause or template-expression interior.
///
/// Lexing is total: unknown characters become `Other` tokens. Quoted-string
/// interiors are emitted as a single `Literal` and are never scanned for
/// operators; an unterminated quote consumes the rest of the text.
pub fn lex_expression(expr: &str) -> Vec<ExpressionToken> {
    let chars: Vec<char> = expr.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    let mut line = 1usize;
    let mut column = 1usize;

    let advance_over = |line: &mut usize, column: &mut usize, slice: &[char]| {
        for &c in slice {
            if c == '\n' {
                *line += 1;
                *column = 1;
            } else {
                *column += 1;
            }
        }
    };

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance_over(&mut line, &mut column, &chars[i..=i]);
            i += 1;
            continue;
        }
        let tok_line = line;
        let tok_column = column;

        // Quoted string: one opaque literal.
        if c == '\'' || c == '"' {
            let mut j = i + 1;
            while j < chars.len() && chars[j] != c {
                j += 1;
            }
            let end = if j < chars.len() { j + 1 } else { chars.len() };
            push_token(&mut tokens, TokenKind::Literal, &chars[i..end], tok_line, tok_column);
            advance_over(&mut line, &mut column, &chars[i..end]);
            i = end;
            continue;
        }

        // Two-character operators take precedence over their prefixes.
        if i + 1 < chars.len() {
            let pair = [c, chars[i + 1]];
            let kind = match pair {
                ['*', '*'] | ['/', '/'] => Some(TokenKind::MathOp),
                ['>', '='] | ['<', '='] | ['=', '='] | ['!', '='] => Some(TokenKind::ComparisonOp),
                _ => None,
            };
            if let Some(kind) = kind {
                push_token(&mut tokens, kind, &pair, tok_line, tok_column);
                advance_over(&mut line, &mut column, &pair);
                i += 2;
                continue;
            }
        }

        let single_kind = match c {
            '>' | '<' => Some(TokenKind::ComparisonOp),
            '+' | '-' | '/' | '%' | '*' => Some(TokenKind::MathOp),
            '|' => Some(TokenKind::FilterPipe),
            _ => None,
        };
        if let Some(kind) = single_kind {
            push_token(&mut tokens, kind, &chars[i..=i], tok_line, tok_column);
            advance_over(&mut line, &mut column, &chars[i..=i]);
            i += 1;
            continue;
        }

        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i + 1;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let kind = match word.as_str() {
                "and" | "or" | "not" => TokenKind::BooleanOp,
                "is" | "in" => TokenKind::ComparisonOp,
                "lookup" if next_nonspace(&chars, j) == Some('(') => TokenKind::LookupCall,
                _ => TokenKind::Identifier,
            };
            tokens.push(ExpressionToken { kind, text: word, line: tok_line, column: tok_column });
            advance_over(&mut line, &mut column, &chars[i..j]);
            i = j;
            continue;
        }

        if c.is_ascii_digit() {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                j += 2;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            push_token(&mut tokens, TokenKind::Literal, &chars[i..j], tok_line, tok_column);
            advance_over(&mut line, &mut column, &chars[i..j]);
            i = j;
            continue;
        }

        push_token(&mut tokens, TokenKind::Other, &chars[i..=i], tok_line, tok_column);
        advance_over(&mut line, &mut column, &chars[i..=i]);
        i += 1;
    }
    tokens
}

fn push_token(tokens: &mut Vec<ExpressionToken>, kind: TokenKind, text: &[char], line: usize, column: usize) {
    tokens.push(ExpressionToken { kind, text: text.iter().collect(), line, column });
}

fn next_nonspace(chars: &[char], from: usize) -> Option<char> {
    chars[from..].iter().copied().find(|c| !c.is_whitespace())
}
