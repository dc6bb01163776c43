//! Adblock-style network filter lists: parsing, compilation into an indexed
//! [`FilterSet`], and URL matching.
//!
//! Supported syntax is the network-rule subset: `|`, `||`, `^`, `*`, `@@`
//! and the options `domain=`, `third-party`, `~third-party`, `match-case` and
//! the resource types `script`, `image`, `stylesheet`, `xmlhttprequest`,
//! `subdocument`, `other`. Cosmetic rules, regex literals and any other option
//! are skipped with a reason and counted in the [`ParseReport`].

mod pattern;
mod query;
mod rule;
mod set;

pub use query::{CanonicalUrl, MatchQuery, UrlError};
pub use rule::{
    parse_filter_line, AnchorKind, DomainOption, FilterRule, LineOutcome, ResourceType, RuleId, SkipReason,
    ThirdPartyOption,
};
pub use set::{compile_filter_set, FilterSet, ListKind, MatchOutcome, MatchResult, ParseReport};
