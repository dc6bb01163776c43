//! Wildcard matcher for rule bodies.
//!
//! A body is a sequence of literal bytes, `*` (any span) and `^` (one
//! separator byte, or the end of the URL). Anchoring decides where a match may
//! begin and whether it must reach the end of the URL.

use super::rule::{AnchorKind, FilterRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token {
    Lit(u8),
    Sep,
    Star,
}

/// Separator bytes for `^`: anything except ASCII letters, digits, `_ - . %`.
pub(crate) fn is_separator(b: u8) -> bool {
    !(b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.' | b'%'))
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledPattern {
    tokens: Vec<Token>,
    domain_anchor: bool,
    case_sensitive: bool,
}

impl CompiledPattern {
    pub(crate) fn compile(rule: &FilterRule) -> Self {
        let body = if rule.case_sensitive { rule.pattern.clone() } else { rule.pattern.to_ascii_lowercase() };
        let mut tokens = Vec::with_capacity(body.len() + 2);
        let free_start = matches!(rule.anchor_kind, AnchorKind::None | AnchorKind::End);
        if free_start {
            tokens.push(Token::Star);
        }
        for b in body.bytes() {
            let t = match b {
                b'*' => Token::Star,
                b'^' => Token::Sep,
                other => Token::Lit(other),
            };
            if t == Token::Star && tokens.last() == Some(&Token::Star) {
                continue;
            }
            tokens.push(t);
        }
        if !rule.end_anchored && tokens.last() != Some(&Token::Star) {
            tokens.push(Token::Star);
        }
        CompiledPattern {
            tokens,
            domain_anchor: rule.anchor_kind == AnchorKind::Domain,
            case_sensitive: rule.case_sensitive,
        }
    }

    /// `url` and `url_lower` are the canonical URL and its ASCII-lowercased copy;
    /// `host` is the byte range of the hostname inside both.
    pub(crate) fn matches(&self, url: &str, url_lower: &str, host: std::ops::Range<usize>) -> bool {
        let text = if self.case_sensitive { url.as_bytes() } else { url_lower.as_bytes() };
        if !self.domain_anchor {
            return glob(&self.tokens, text);
        }
        // `||`: start at the host or just after any `.` inside it
        let bytes = text;
        let mut start = host.start;
        loop {
            if glob(&self.tokens, &bytes[start..]) {
                return true;
            }
            match bytes[start..host.end].iter().position(|&b| b == b'.') {
                Some(dot) => start += dot + 1,
                None => return false,
            }
            if start >= host.end {
                return false;
            }
        }
    }
}

/// Matches `tokens` against the whole of `text` (leading/trailing `*` are
/// already part of `tokens` where the anchoring allows free ends).
fn glob(tokens: &[Token], text: &[u8]) -> bool {
    let (mut t, mut s) = (0usize, 0usize);
    let mut resume: Option<(usize, usize)> = None;
    while s < text.len() {
        if let Some(&tok) = tokens.get(t) {
            match tok {
                Token::Star => {
                    resume = Some((t + 1, s));
                    t += 1;
                    continue;
                }
                Token::Lit(c) if text[s] == c => {
                    t += 1;
                    s += 1;
                    continue;
                }
                Token::Sep if is_separator(text[s]) => {
                    t += 1;
                    s += 1;
                    continue;
                }
                _ => {}
            }
        }
        match resume {
            Some((rt, rs)) => {
                t = rt;
                s = rs + 1;
                resume = Some((rt, rs + 1));
            }
            None => return false,
        }
    }
    // `^` may also match the end of the URL
    tokens[t..].iter().all(|tok| matches!(tok, Token::Star | Token::Sep))
}

/// Alphanumeric runs of a rule body that are guaranteed to appear as whole
/// alphanumeric runs in any URL the rule matches. Used as index keys.
pub(crate) fn index_tokens(rule: &FilterRule) -> Vec<String> {
    let body = rule.pattern.to_ascii_lowercase();
    let bytes = body.as_bytes();
    let left_anchored = matches!(rule.anchor_kind, AnchorKind::Start | AnchorKind::Domain);
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if !bytes[i].is_ascii_alphanumeric() {
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
            i += 1;
        }
        let left_ok = if start == 0 { left_anchored } else { bytes[start - 1] != b'*' };
        let right_ok = if i == bytes.len() { rule.end_anchored } else { bytes[i] != b'*' };
        if left_ok && right_ok {
            out.push(body[start..i].to_string());
        }
    }
    out
}

/// Alphanumeric runs of a (lowercased) URL.
pub(crate) fn url_tokens(url_lower: &str) -> impl Iterator<Item = &str> {
    url_lower.split(|c: char| !c.is_ascii_alphanumeric()).filter(|t| !t.is_empty())
}
