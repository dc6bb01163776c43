//! First-/third-party classification of cookie and request hosts relative to
//! the visited site, and eTLD+1 extraction from a public-suffix list.

mod party;
mod psl;

use thiserror::Error;

pub use party::{classify_party, record_host, ClassificationMode, Party, PartyLabel, SiteContext};
pub use psl::{registrable_domain, PublicSuffixTable, RegistrableDomain, PINNED_LIST_DATE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("malformed hostname `{0}`")]
    MalformedHostname(String),
}
