use std::ops::Range;

use thiserror::Error;

use super::rule::ResourceType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UrlError {
    #[error("empty URL")]
    Empty,
    #[error("URL has no scheme: `{0}`")]
    MissingScheme(String),
    #[error("URL is not absolute (`scheme://host...`): `{0}`")]
    NotHierarchical(String),
    #[error("URL has an empty host: `{0}`")]
    EmptyHost(String),
    #[error("invalid host `{0}`")]
    InvalidHost(String),
    #[error("invalid port in `{0}`")]
    InvalidPort(String),
}

/// An absolute URL reduced to the form filter rules are matched against:
/// scheme and host lowercased, userinfo and fragment dropped, query kept,
/// percent-encoding untouched.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalUrl {
    text: String,
    scheme_len: usize,
    host: Range<usize>,
    path: Range<usize>,
    query: Option<Range<usize>>,
}

impl CanonicalUrl {
    pub fn parse(input: &str) -> Result<Self, UrlError> {
        let input = input.trim();
        if input.is_empty() {
            return Err(UrlError::Empty);
        }
        let colon = input.find(':').ok_or_else(|| UrlError::MissingScheme(input.into()))?;
        let scheme = &input[..colon];
        let mut chars = scheme.chars();
        let scheme_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
        if !scheme_ok {
            return Err(UrlError::MissingScheme(input.into()));
        }
        let after = input[colon + 1..].strip_prefix("//").ok_or_else(|| UrlError::NotHierarchical(input.into()))?;

        let authority_end = after.find(['/', '?', '#']).unwrap_or(after.len());
        let authority = &after[..authority_end];
        let rest = &after[authority_end..];
        let host_port = authority.rsplit_once('@').map_or(authority, |(_, hp)| hp);

        let (host, port) = split_host_port(host_port).ok_or_else(|| UrlError::InvalidPort(input.into()))?;
        if host.is_empty() {
            return Err(UrlError::EmptyHost(input.into()));
        }
        let host = host.to_ascii_lowercase();
        if !valid_host(&host) {
            return Err(UrlError::InvalidHost(host));
        }

        let rest = rest.split_once('#').map_or(rest, |(before, _)| before);
        let (path, query) = match rest.split_once('?') {
            Some((p, q)) => (p, Some(q)),
            None => (rest, None),
        };

        let mut text = String::with_capacity(input.len());
        text.push_str(&scheme.to_ascii_lowercase());
        text.push_str("://");
        let host_start = text.len();
        text.push_str(&host);
        let host_range = host_start..text.len();
        if let Some(port) = port {
            text.push(':');
            text.push_str(port);
        }
        let path_start = text.len();
        text.push_str(path);
        let path_range = path_start..text.len();
        let query_range = query.map(|q| {
            text.push('?');
            let start = text.len();
            text.push_str(q);
            start..text.len()
        });

        Ok(CanonicalUrl { text, scheme_len: colon, host: host_range, path: path_range, query: query_range })
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn scheme(&self) -> &str {
        &self.text[..self.scheme_len]
    }

    pub fn host(&self) -> &str {
        &self.text[self.host.clone()]
    }

    pub(crate) fn host_range(&self) -> Range<usize> {
        self.host.clone()
    }

    pub fn path(&self) -> &str {
        &self.text[self.path.clone()]
    }

    pub fn query(&self) -> Option<&str> {
        self.query.clone().map(|r| &self.text[r])
    }
}

fn split_host_port(host_port: &str) -> Option<(&str, Option<&str>)> {
    if host_port.starts_with('[') {
        let close = host_port.find(']')?;
        let host = &host_port[..=close];
        let tail = &host_port[close + 1..];
        return match tail.strip_prefix(':') {
            Some(port) if valid_port(port) => Some((host, Some(port))),
            Some(_) => None,
            None if tail.is_empty() => Some((host, None)),
            None => None,
        };
    }
    match host_port.split_once(':') {
        Some((host, port)) if valid_port(port) => Some((host, Some(port))),
        Some(_) => None,
        None => Some((host_port, None)),
    }
}

fn valid_port(port: &str) -> bool {
    port.is_empty() || (port.len() <= 5 && port.bytes().all(|b| b.is_ascii_digit()))
}

fn valid_host(host: &str) -> bool {
    if let Some(inner) = host.strip_prefix('[') {
        return inner
            .strip_suffix(']')
            .is_some_and(|v6| !v6.is_empty() && v6.chars().all(|c| c.is_ascii_hexdigit() || c == ':' || c == '.'));
    }
    host.chars().all(|c| c.is_alphanumeric() || matches!(c, '-' | '.' | '_'))
}

/// Everything a rule needs to decide whether it applies to one request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchQuery {
    url: CanonicalUrl,
    url_lower: String,
    source_hostname: String,
    is_third_party: bool,
    resource_type: Option<ResourceType>,
}

impl MatchQuery {
    pub fn new(url: &str, source_hostname: &str, is_third_party: bool) -> Result<Self, UrlError> {
        let url = CanonicalUrl::parse(url)?;
        let url_lower = url.as_str().to_ascii_lowercase();
        let source_hostname = source_hostname.trim().trim_start_matches('.').to_ascii_lowercase();
        Ok(MatchQuery { url, url_lower, source_hostname, is_third_party, resource_type: None })
    }

    pub fn with_resource_type(mut self, kind: Option<ResourceType>) -> Self {
        self.resource_type = kind;
        self
    }

    pub fn url(&self) -> &CanonicalUrl {
        &self.url
    }

    pub(crate) fn url_lower(&self) -> &str {
        &self.url_lower
    }

    pub fn hostname(&self) -> &str {
        self.url.host()
    }

    pub fn source_hostname(&self) -> &str {
        &self.source_hostname
    }

    pub fn is_third_party(&self) -> bool {
        self.is_third_party
    }

    pub fn resource_type(&self) -> Option<ResourceType> {
        self.resource_type
    }
}
