use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Left-side anchoring of a network rule. `End` is used only when the rule
/// carries a trailing `|` and nothing on the left; right-side anchoring is
/// tracked separately in [`FilterRule::end_anchored`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorKind {
    None,
    Start,
    End,
    Domain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThirdPartyOption {
    Required,
    Forbidden,
    Unspecified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceType {
    Script,
    Image,
    Stylesheet,
    XmlHttpRequest,
    Subdocument,
    Other,
}

impl ResourceType {
    pub const ALL: [ResourceType; 6] = [
        ResourceType::Script,
        ResourceType::Image,
        ResourceType::Stylesheet,
        ResourceType::XmlHttpRequest,
        ResourceType::Subdocument,
        ResourceType::Other,
    ];

    pub fn from_option_name(name: &str) -> Option<Self> {
        Some(match name {
            "script" => ResourceType::Script,
            "image" => ResourceType::Image,
            "stylesheet" => ResourceType::Stylesheet,
            "xmlhttprequest" => ResourceType::XmlHttpRequest,
            "subdocument" => ResourceType::Subdocument,
            "other" => ResourceType::Other,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ResourceType::Script => "script",
            ResourceType::Image => "image",
            ResourceType::Stylesheet => "stylesheet",
            ResourceType::XmlHttpRequest => "xmlhttprequest",
            ResourceType::Subdocument => "subdocument",
            ResourceType::Other => "other",
        }
    }
}

impl fmt::Display for ResourceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ResourceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_option_name(&s.to_ascii_lowercase()).ok_or_else(|| format!("unknown resource type `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DomainOption {
    pub domain: String,
    pub negated: bool,
}

/// Stable identity of a rule inside a list: its 1-based source line and text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RuleId {
    pub line_number: usize,
    pub raw_text: String,
}

/// A parsed network rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterRule {
    pub line_number: usize,
    pub raw_text: String,
    /// Body with `@@`, anchors and `$options` removed.
    pub pattern: String,
    pub anchor_kind: AnchorKind,
    pub end_anchored: bool,
    pub is_exception: bool,
    pub option_third_party: ThirdPartyOption,
    pub option_domains: Vec<DomainOption>,
    pub option_types: BTreeSet<ResourceType>,
    pub case_sensitive: bool,
}

impl FilterRule {
    pub fn id(&self) -> RuleId {
        RuleId { line_number: self.line_number, raw_text: self.raw_text.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    Blank,
    Comment,
    Header,
    ElementHiding,
    UnsupportedOption,
    RegexLiteral,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::Blank => "blank",
            SkipReason::Comment => "comment",
            SkipReason::Header => "header",
            SkipReason::ElementHiding => "element_hiding",
            SkipReason::UnsupportedOption => "unsupported_option",
            SkipReason::RegexLiteral => "regex_literal",
        }
    }
}

/// Result of parsing one list line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineOutcome {
    Rule(FilterRule),
    Skipped(SkipReason),
    ParseError(String),
}

const COSMETIC_SEPARATORS: [&str; 6] = ["##", "#@#", "#?#", "#@?#", "#$#", "#@$#"];

pub fn parse_filter_line(line: &str, line_number: usize) -> LineOutcome {
    let text = line.trim();
    if text.is_empty() {
        return LineOutcome::Skipped(SkipReason::Blank);
    }
    if text.starts_with('!') {
        return LineOutcome::Skipped(SkipReason::Comment);
    }
    if text.starts_with('[') && text.ends_with(']') && text.to_ascii_lowercase().contains("adblock") {
        return LineOutcome::Skipped(SkipReason::Header);
    }
    if COSMETIC_SEPARATORS.iter().any(|sep| text.contains(sep)) {
        return LineOutcome::Skipped(SkipReason::ElementHiding);
    }

    let (is_exception, body) = match text.strip_prefix("@@") {
        Some(rest) => (true, rest),
        None => (false, text),
    };

    let (mut pattern, options) = match body.split_once('$') {
        Some((p, o)) => (p, Some(o)),
        None => (body, None),
    };

    let mut parsed = ParsedOptions::default();
    if let Some(options) = options {
        match parse_options(options) {
            Ok(o) => parsed = o,
            Err(OptionFailure::Broken(detail)) => return LineOutcome::ParseError(detail),
            Err(OptionFailure::Unsupported) => return LineOutcome::Skipped(SkipReason::UnsupportedOption),
        }
    }

    if pattern.len() > 1 && pattern.starts_with('/') && pattern.ends_with('/') {
        return LineOutcome::Skipped(SkipReason::RegexLiteral);
    }
    if pattern.starts_with('/') && pattern.contains('\\') {
        return LineOutcome::ParseError("regex literal without closing `/`".into());
    }

    let mut anchor_kind = AnchorKind::None;
    if let Some(rest) = pattern.strip_prefix("||") {
        anchor_kind = AnchorKind::Domain;
        pattern = rest;
    } else if let Some(rest) = pattern.strip_prefix('|') {
        anchor_kind = AnchorKind::Start;
        pattern = rest;
    }
    let mut end_anchored = false;
    if let Some(rest) = pattern.strip_suffix('|') {
        end_anchored = true;
        pattern = rest;
        if anchor_kind == AnchorKind::None {
            anchor_kind = AnchorKind::End;
        }
    }

    LineOutcome::Rule(FilterRule {
        line_number,
        raw_text: text.to_string(),
        pattern: pattern.to_string(),
        anchor_kind,
        end_anchored,
        is_exception,
        option_third_party: parsed.third_party,
        option_domains: parsed.domains,
        option_types: parsed.types,
        case_sensitive: parsed.match_case,
    })
}

struct ParsedOptions {
    third_party: ThirdPartyOption,
    domains: Vec<DomainOption>,
    types: BTreeSet<ResourceType>,
    match_case: bool,
}

impl Default for ParsedOptions {
    fn default() -> Self {
        ParsedOptions {
            third_party: ThirdPartyOption::Unspecified,
            domains: Vec::new(),
            types: BTreeSet::new(),
            match_case: false,
        }
    }
}

enum OptionFailure {
    Broken(String),
    Unsupported,
}

fn parse_options(text: &str) -> Result<ParsedOptions, OptionFailure> {
    if text.trim().is_empty() {
        return Err(OptionFailure::Broken("`$` with empty option list".into()));
    }
    let mut out = ParsedOptions::default();
    let mut unsupported = false;
    for raw in text.split(',') {
        let option = raw.trim();
        if option.is_empty() {
            return Err(OptionFailure::Broken("empty entry in option list".into()));
        }
        let lower = option.to_ascii_lowercase();
        if let Some(value) = lower.strip_prefix("domain=") {
            match parse_domain_list(value) {
                Ok(domains) => out.domains.extend(domains),
                Err(OptionFailure::Unsupported) => unsupported = true,
                Err(broken) => return Err(broken),
            }
            continue;
        }
        match lower.as_str() {
            "third-party" => out.third_party = ThirdPartyOption::Required,
            "~third-party" => out.third_party = ThirdPartyOption::Forbidden,
            "match-case" => out.match_case = true,
            name => match ResourceType::from_option_name(name) {
                Some(kind) => {
                    out.types.insert(kind);
                }
                None => unsupported = true,
            },
        }
    }
    if unsupported {
        Err(OptionFailure::Unsupported)
    } else {
        Ok(out)
    }
}

fn parse_domain_list(value: &str) -> Result<Vec<DomainOption>, OptionFailure> {
    if value.is_empty() {
        return Err(OptionFailure::Broken("`domain=` without domains".into()));
    }
    let mut out = Vec::new();
    for entry in value.split('|') {
        let entry = entry.trim();
        let (negated, name) = match entry.strip_prefix('~') {
            Some(rest) => (true, rest),
            None => (false, entry),
        };
        if name.is_empty() {
            return Err(OptionFailure::Broken("empty entry in `domain=` list".into()));
        }
        if name.contains(['*', '/', ':']) {
            return Err(OptionFailure::Unsupported);
        }
        out.push(DomainOption { domain: name.to_string(), negated });
    }
    Ok(out)
}
