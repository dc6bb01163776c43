use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pattern::{index_tokens, url_tokens, CompiledPattern};
use super::query::MatchQuery;
use super::rule::{parse_filter_line, FilterRule, LineOutcome, RuleId, ThirdPartyOption};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ListKind {
    Ads,
    Trackers,
}

/// Per-list parse accounting. `rules + Σ skipped + errors.len()` equals the
/// number of input lines.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub rules: usize,
    pub skipped: BTreeMap<String, usize>,
    pub errors: Vec<(usize, String)>,
}

impl ParseReport {
    pub fn skipped_total(&self) -> usize {
        self.skipped.values().sum()
    }

    pub fn lines(&self) -> usize {
        self.rules + self.skipped_total() + self.errors.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchOutcome {
    Hit,
    ExceptionSuppressed,
    NoMatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub outcome: MatchOutcome,
    pub matched_rule: Option<RuleId>,
    pub exception_rule: Option<RuleId>,
}

impl MatchResult {
    pub fn is_hit(&self) -> bool {
        self.outcome == MatchOutcome::Hit
    }

    fn no_match() -> Self {
        MatchResult { outcome: MatchOutcome::NoMatch, matched_rule: None, exception_rule: None }
    }
}

/// Token → rule positions, plus the rules that yield no usable token.
#[derive(Debug, Clone, Default)]
struct TokenIndex {
    by_token: HashMap<String, Vec<u32>>,
    untokened: Vec<u32>,
}

impl TokenIndex {
    fn build(rules: &[FilterRule], members: &[u32]) -> Self {
        let candidates: Vec<Vec<String>> = members.iter().map(|&i| index_tokens(&rules[i as usize])).collect();
        let mut frequency: HashMap<&str, usize> = HashMap::new();
        for tokens in &candidates {
            for t in tokens {
                *frequency.entry(t.as_str()).or_default() += 1;
            }
        }
        let mut index = TokenIndex::default();
        for (&rule_idx, tokens) in members.iter().zip(&candidates) {
            // rarest token, longer wins ties, first occurrence after that
            let best = tokens
                .iter()
                .enumerate()
                .min_by_key(|(pos, t)| (frequency[t.as_str()], std::cmp::Reverse(t.len()), *pos))
                .map(|(_, t)| t.clone());
            match best {
                Some(token) => index.by_token.entry(token).or_default().push(rule_idx),
                None => index.untokened.push(rule_idx),
            }
        }
        index
    }

    /// Sorted, de-duplicated rule positions that could match `url_lower`.
    fn candidates(&self, url_lower: &str) -> Vec<u32> {
        let mut out = self.untokened.clone();
        for token in url_tokens(url_lower) {
            if let Some(bucket) = self.by_token.get(token) {
                out.extend_from_slice(bucket);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// A compiled, immutable rule list. Rules keep their source order; when
/// several match, the lowest line number is reported.
#[derive(Debug, Clone)]
pub struct FilterSet {
    list_kind: ListKind,
    rules: Vec<FilterRule>,
    patterns: Vec<CompiledPattern>,
    blocking: TokenIndex,
    exceptions: TokenIndex,
}

pub fn compile_filter_set<I, S>(lines: I, list_kind: ListKind) -> (FilterSet, ParseReport)
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut rules = Vec::new();
    let mut report = ParseReport::default();
    for (i, line) in lines.into_iter().enumerate() {
        let line_number = i + 1;
        match parse_filter_line(line.as_ref(), line_number) {
            LineOutcome::Rule(rule) => rules.push(rule),
            LineOutcome::Skipped(reason) => *report.skipped.entry(reason.as_str().to_string()).or_default() += 1,
            LineOutcome::ParseError(detail) => report.errors.push((line_number, detail)),
        }
    }
    report.rules = rules.len();
    (FilterSet::from_rules(rules, list_kind), report)
}

impl FilterSet {
    pub fn from_rules(rules: Vec<FilterRule>, list_kind: ListKind) -> Self {
        let patterns = rules.iter().map(CompiledPattern::compile).collect();
        let (exc, blk): (Vec<u32>, Vec<u32>) = (0..rules.len() as u32).partition(|&i| rules[i as usize].is_exception);
        let blocking = TokenIndex::build(&rules, &blk);
        let exceptions = TokenIndex::build(&rules, &exc);
        FilterSet { list_kind, rules, patterns, blocking, exceptions }
    }

    pub fn empty(list_kind: ListKind) -> Self {
        Self::from_rules(Vec::new(), list_kind)
    }

    pub fn from_file(path: impl AsRef<Path>, list_kind: ListKind) -> std::io::Result<(Self, ParseReport)> {
        let text = std::fs::read_to_string(path)?;
        Ok(compile_filter_set(text.lines(), list_kind))
    }

    pub fn list_kind(&self) -> ListKind {
        self.list_kind
    }

    pub fn rules(&self) -> &[FilterRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn match_url(&self, query: &MatchQuery) -> MatchResult {
        let url_lower = query.url_lower();
        let first =
            |index: &TokenIndex| index.candidates(url_lower).into_iter().find(|&i| self.applies(i as usize, query));
        self.resolve(first(&self.blocking), || first(&self.exceptions))
    }

    /// Same decision as [`match_url`](Self::match_url) by scanning every rule.
    pub fn match_url_unindexed(&self, query: &MatchQuery) -> MatchResult {
        let first = |exception: bool| {
            (0..self.rules.len()).find(|&i| self.rules[i].is_exception == exception && self.applies(i, query))
        };
        self.resolve(first(false).map(|i| i as u32), || first(true).map(|i| i as u32))
    }

    fn resolve(&self, blocking: Option<u32>, exception: impl FnOnce() -> Option<u32>) -> MatchResult {
        let Some(hit) = blocking else {
            return MatchResult::no_match();
        };
        let matched_rule = Some(self.rules[hit as usize].id());
        match exception() {
            Some(exc) => MatchResult {
                outcome: MatchOutcome::ExceptionSuppressed,
                matched_rule,
                exception_rule: Some(self.rules[exc as usize].id()),
            },
            None => MatchResult { outcome: MatchOutcome::Hit, matched_rule, exception_rule: None },
        }
    }

    fn applies(&self, idx: usize, query: &MatchQuery) -> bool {
        let rule = &self.rules[idx];
        options_admit(rule, query)
            && self.patterns[idx].matches(query.url().as_str(), query.url_lower(), query.url().host_range())
    }

    pub fn count_hits<'a>(&self, queries: impl IntoIterator<Item = &'a MatchQuery>) -> usize {
        queries.into_iter().filter(|q| self.match_url(q).is_hit()).count()
    }
}

fn options_admit(rule: &FilterRule, query: &MatchQuery) -> bool {
    match rule.option_third_party {
        ThirdPartyOption::Required if !query.is_third_party() => return false,
        ThirdPartyOption::Forbidden if query.is_third_party() => return false,
        _ => {}
    }
    if let Some(kind) = query.resource_type() {
        if !rule.option_types.is_empty() && !rule.option_types.contains(&kind) {
            return false;
        }
    }
    domains_admit(rule, query.source_hostname())
}

/// The most specific listed domain that covers the source host decides; with
/// no covering entry the rule applies only if it lists no positive domains.
fn domains_admit(rule: &FilterRule, source: &str) -> bool {
    if rule.option_domains.is_empty() {
        return true;
    }
    let covering = rule
        .option_domains
        .iter()
        .filter(|d| label_suffix(source, &d.domain))
        .max_by_key(|d| (d.domain.len(), d.negated));
    match covering {
        Some(d) => !d.negated,
        None => rule.option_domains.iter().all(|d| d.negated),
    }
}

fn label_suffix(host: &str, domain: &str) -> bool {
    host == domain
        || (host.len() > domain.len()
            && host.ends_with(domain)
            && host.as_bytes()[host.len() - domain.len() - 1] == b'.')
}
