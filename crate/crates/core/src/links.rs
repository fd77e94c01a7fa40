//! Rule-based classification of homepage links into news articles and
//! everything else (navigation, account pages, tag listings, ...).
//!
//! Rules are read from a plain-text file, one rule per line:
//!
//! ```text
//! # comment
//! deny-segment login        # any path segment equal to "login" => other
//! deny-pattern ^/live/      # regex over the URL path => other
//! news-pattern /story/\d+   # regex over the URL path => news
//! date-path on              # /2023/05/... or /2023-05-04 in the path => news
//! slug-min-hyphens 3        # last segment has >= 3 hyphens ...
//! min-depth 2               # ... and the path has >= 2 segments => news
//! ```
//!
//! Evaluation order: non-HTTP schemes, deny rules, news patterns, the date
//! rule, the slug rule; anything left over is `other`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

pub const DEFAULT_RULES: &str = "\
# default link rules
deny-segment login
deny-segment about
deny-segment subscribe
deny-segment contact
deny-segment privacy
deny-segment tag
deny-segment author
deny-segment search
date-path on
slug-min-hyphens 3
min-depth 2
";

static DATE_IN_PATH: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"/(?:19|20)\d{2}/(?:0?[1-9]|1[0-2])(?:/|$)|/(?:19|20)\d{2}-(?:0[1-9]|1[0-2])-\d{2}(?:/|$|[^0-9])").unwrap()
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    NewsArticle,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkClass {
    pub kind: LinkKind,
    pub confidence: f64,
}

impl LinkClass {
    fn new(kind: LinkKind, confidence: f64) -> Self {
        LinkClass {
            kind,
            confidence: confidence.clamp(0.0, 1.0),
        }
    }

    pub fn is_news(&self) -> bool {
        self.kind == LinkKind::NewsArticle
    }
}

/// Anything that can label a link. The rule set is the default; a trained
/// model can be dropped in through this trait.
pub trait LinkClassifier: Send + Sync {
    fn classify(&self, url: &str, anchor_text: &str) -> LinkClass;
}

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("line {line}: unknown rule `{rule}`")]
    UnknownRule { line: usize, rule: String },
    #[error("line {line}: bad argument for `{rule}`: {reason}")]
    BadArgument {
        line: usize,
        rule: String,
        reason: String,
    },
    #[error("reading rule file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct LinkRules {
    deny_segments: Vec<String>,
    deny_patterns: Vec<Regex>,
    news_patterns: Vec<Regex>,
    date_path: bool,
    slug_min_hyphens: usize,
    min_depth: usize,
}

impl Default for LinkRules {
    fn default() -> Self {
        DEFAULT_RULES.parse().expect("default rules parse")
    }
}

impl LinkRules {
    pub fn from_file(path: &Path) -> Result<Self, RuleError> {
        std::fs::read_to_string(path)?.parse()
    }

    fn classify_url(&self, url: &Url) -> LinkClass {
        if !matches!(url.scheme(), "http" | "https") {
            return LinkClass::new(LinkKind::Other, 1.0);
        }
        let path = url.path();
        let segments: Vec<String> = path
            .split('/')
            .filter(|s| !s.is_empty())
            .map(|s| s.to_ascii_lowercase())
            .collect();
        let denied = segments.iter().any(|seg| {
            let stem = seg.rsplit_once('.').map(|(stem, _)| stem).unwrap_or(seg);
            self.deny_segments.iter().any(|d| d == seg || d == stem)
        }) || self.deny_patterns.iter().any(|re| re.is_match(path));
        if denied {
            return LinkClass::new(LinkKind::Other, 0.95);
        }
        if self.news_patterns.iter().any(|re| re.is_match(path)) {
            return LinkClass::new(LinkKind::NewsArticle, 0.9);
        }
        if self.date_path && DATE_IN_PATH.is_match(path) {
            return LinkClass::new(LinkKind::NewsArticle, 0.95);
        }
        let hyphens = segments.last().map(|s| s.matches('-').count()).unwrap_or(0);
        if hyphens >= self.slug_min_hyphens && segments.len() >= self.min_depth {
            return LinkClass::new(LinkKind::NewsArticle, 0.85);
        }
        LinkClass::new(LinkKind::Other, 0.6)
    }
}

impl LinkClassifier for LinkRules {
    fn classify(&self, url: &str, _anchor_text: &str) -> LinkClass {
        match Url::parse(url) {
            Ok(url) => self.classify_url(&url),
            Err(_) => LinkClass::new(LinkKind::Other, 1.0),
        }
    }
}

impl FromStr for LinkRules {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut rules = LinkRules {
            deny_segments: Vec::new(),
            deny_patterns: Vec::new(),
            news_patterns: Vec::new(),
            date_path: false,
            slug_min_hyphens: usize::MAX,
            min_depth: 0,
        };
        for (n, raw) in s.lines().enumerate() {
            let line = n + 1;
            let content = raw.split_once(" #").map(|(c, _)| c).unwrap_or(raw).trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (rule, arg) = content
                .split_once(char::is_whitespace)
                .map(|(r, a)| (r, a.trim()))
                .unwrap_or((content, ""));
            let bad = |reason: &str| RuleError::BadArgument {
                line,
                rule: rule.to_string(),
                reason: reason.to_string(),
            };
            let regex = |arg: &str| Regex::new(arg).map_err(|e| bad(&e.to_string()));
            let number = |arg: &str| arg.parse::<usize>().map_err(|e| bad(&e.to_string()));
            match rule {
                "deny-segment" if !arg.is_empty() => rules.deny_segments.push(arg.to_ascii_lowercase()),
                "deny-pattern" => rules.deny_patterns.push(regex(arg)?),
                "news-pattern" => rules.news_patterns.push(regex(arg)?),
                "date-path" => {
                    rules.date_path = match arg {
                        "on" | "true" | "" => true,
                        "off" | "false" => false,
                        _ => return Err(bad("expected on/off")),
                    }
                }
                "slug-min-hyphens" => rules.slug_min_hyphens = number(arg)?,
                "min-depth" => rules.min_depth = number(arg)?,
                "deny-segment" => return Err(bad("missing segment")),
                _ => {
                    return Err(RuleError::UnknownRule {
                        line,
                        rule: rule.to_string(),
                    })
                }
            }
        }
        Ok(rules)
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkKind::NewsArticle => "news_article",
            LinkKind::Other => "other",
        })
    }
}

/// Classifies with the default rule set.
pub fn classify_link(url: &str, anchor_text: &str) -> LinkClass {
    static RULES: Lazy<LinkRules> = Lazy::new(LinkRules::default);
    RULES.classify(url, anchor_text)
}
