//! Article-card extraction.
//!
//! Every qualifying anchor is grown upwards to the largest enclosing subtree
//! that still contains exactly one counted anchor. In the default
//! [`AnchorMode::Qualifying`] mode only news-classified anchors count, so an
//! author or section link inside a card does not cut the card short. The
//! [`AnchorMode::AllAnchors`] mode counts every `<a>` element and reproduces
//! the plain algorithm together with its partial-card failures.
//!
//! Cards never include the page containers (`#document`, `html`, `body`).

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use crate::dom::{DomNode, NodePath, BLOCK_ELEMENTS};
use crate::links::{LinkClassifier, LinkRules};
use crate::store::LinkRecord;
use crate::text::token_set;

pub const DEFAULT_TEXT_MATCH_MIN: f64 = 0.8;
pub const DEFAULT_COUNT_RATIO_MIN: f64 = 0.8;

const PAGE_CONTAINERS: &[&str] = &[crate::dom::ROOT_TAG, "html", "body"];
const HIDDEN_TEXT: &[&str] = &["script", "style", "noscript", "template"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleCard {
    pub card_path: NodePath,
    pub anchor_url: String,
    pub headline_text: String,
    pub full_text: String,
    pub image_count: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CardError {
    #[error("page contains no qualifying anchors")]
    NoAnchors,
    #[error("path {0} does not resolve in the document")]
    InvalidPath(NodePath),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorMode {
    /// Only news-classified anchors with non-empty text block subtree growth.
    #[default]
    Qualifying,
    /// Every `<a>` element blocks subtree growth.
    AllAnchors,
}

#[derive(Debug, Clone, Default)]
pub struct ExtractOptions {
    pub mode: AnchorMode,
    /// Base for resolving relative `href`s.
    pub base_url: Option<Url>,
}

/// Drops the fragment so `#comments` links match their article.
pub fn normalize_url(url: &Url) -> String {
    let mut url = url.clone();
    url.set_fragment(None);
    url.to_string()
}

fn resolve_href(href: &str, base: Option<&Url>) -> Option<Url> {
    let href = href.trim();
    match base {
        Some(base) => base.join(href).ok(),
        None => Url::parse(href).ok(),
    }
}

/// Extracts cards with the default rule set and options.
pub fn extract_cards(dom: &DomNode, links: &[LinkRecord]) -> Result<Vec<ArticleCard>, CardError> {
    extract_cards_with(dom, links, &LinkRules::default(), &ExtractOptions::default())
}

pub fn extract_cards_with(
    dom: &DomNode,
    links: &[LinkRecord],
    classifier: &dyn LinkClassifier,
    opts: &ExtractOptions,
) -> Result<Vec<ArticleCard>, CardError> {
    let news_urls: HashSet<String> = links
        .iter()
        .filter(|l| classifier.classify(&l.url, &l.text).is_news())
        .filter_map(|l| Url::parse(&l.url).ok())
        .map(|u| normalize_url(&u))
        .collect();

    let mut scan = AnchorScan {
        news_urls: &news_urls,
        base: opts.base_url.as_ref(),
        mode: opts.mode,
        counts: HashMap::new(),
        qualifying: Vec::new(),
    };
    scan.visit(dom, &NodePath::root());
    let AnchorScan {
        counts, qualifying, ..
    } = scan;
    if qualifying.is_empty() {
        return Err(CardError::NoAnchors);
    }

    let mut cards = Vec::with_capacity(qualifying.len());
    for anchor in qualifying {
        let mut top = anchor.path.clone();
        while let Some(parent) = top.parent() {
            let node = dom.get(&parent).expect("parent of a valid path");
            if PAGE_CONTAINERS.contains(&node.tag.as_str()) || counts[&parent] != 1 {
                break;
            }
            top = parent;
        }
        let root = dom.get(&top).expect("valid card path");
        cards.push(ArticleCard {
            full_text: flatten_text(root),
            image_count: count_images(root),
            card_path: top,
            anchor_url: anchor.url,
            headline_text: anchor.text,
        });
    }
    cards.sort_by(|a, b| a.card_path.cmp(&b.card_path));
    Ok(cards)
}

struct QualifyingAnchor {
    path: NodePath,
    url: String,
    text: String,
}

struct AnchorScan<'a> {
    news_urls: &'a HashSet<String>,
    base: Option<&'a Url>,
    mode: AnchorMode,
    /// Counted anchors per subtree; only element nodes are recorded.
    counts: HashMap<NodePath, usize>,
    qualifying: Vec<QualifyingAnchor>,
}

impl AnchorScan<'_> {
    fn visit(&mut self, node: &DomNode, path: &NodePath) -> usize {
        if node.is_text() {
            return 0;
        }
        let mut count = 0;
        if node.tag == "a" {
            let qualifying = self.qualify(node);
            if let Some((url, text)) = qualifying {
                self.qualifying.push(QualifyingAnchor {
                    path: path.clone(),
                    url,
                    text,
                });
                count += 1;
            } else if self.mode == AnchorMode::AllAnchors {
                count += 1;
            }
        }
        for (i, child) in node.children.iter().enumerate() {
            count += self.visit(child, &path.child(i));
        }
        self.counts.insert(path.clone(), count);
        count
    }

    fn qualify(&self, anchor: &DomNode) -> Option<(String, String)> {
        let url = resolve_href(anchor.attr("href")?, self.base)?;
        let url = normalize_url(&url);
        if !self.news_urls.contains(&url) {
            return None;
        }
        let text = flatten_text(anchor);
        if text.is_empty() {
            return None;
        }
        Some((url, text))
    }
}

fn count_images(node: &DomNode) -> usize {
    let mut n = 0;
    node.walk(|_, d| {
        if d.tag == "img" {
            n += 1
        }
    });
    n
}

/// Visible text of a subtree: text nodes in document order, hidden
/// elements skipped, block boundaries treated as spaces, whitespace runs
/// collapsed.
pub fn flatten_text(node: &DomNode) -> String {
    fn go(node: &DomNode, out: &mut String) {
        if node.is_text() {
            out.push_str(&node.text);
            return;
        }
        if HIDDEN_TEXT.contains(&node.tag.as_str()) {
            return;
        }
        let block = BLOCK_ELEMENTS.contains(&node.tag.as_str());
        if block {
            out.push(' ');
        }
        for child in &node.children {
            go(child, out);
        }
        if block {
            out.push(' ');
        }
    }
    let mut raw = String::new();
    go(node, &mut raw);
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn card_text(dom: &DomNode, card: &ArticleCard) -> Result<String, CardError> {
    dom.get(&card.card_path)
        .map(flatten_text)
        .ok_or_else(|| CardError::InvalidPath(card.card_path.clone()))
}

/// Share of the link text's distinct tokens that also occur in the card
/// text. Empty link text scores 0.
pub fn text_match_score(card_text: &str, link_text: &str) -> f64 {
    let link = token_set(link_text);
    if link.is_empty() {
        return 0.0;
    }
    let card = token_set(card_text);
    link.intersection(&card).count() as f64 / link.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DropReason {
    LowTextMatch,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub kept: Vec<ArticleCard>,
    pub dropped: Vec<(ArticleCard, DropReason)>,
}

/// Drops cards whose text does not cover the captured link text.
///
/// `texts[i]` is the text of `cards[i]`. The link text is looked up in
/// `links` by URL and falls back to the card's headline.
pub fn filter_cards(
    cards: Vec<ArticleCard>,
    texts: &[String],
    links: &[LinkRecord],
    min_match: f64,
) -> FilterOutcome {
    assert_eq!(cards.len(), texts.len(), "one text per card");
    let mut link_text: HashMap<String, &str> = HashMap::new();
    for link in links {
        if link.text.trim().is_empty() {
            continue;
        }
        if let Ok(url) = Url::parse(&link.url) {
            link_text.entry(normalize_url(&url)).or_insert(&link.text);
        }
    }
    let mut out = FilterOutcome::default();
    for (card, text) in cards.into_iter().zip(texts) {
        let reference = link_text
            .get(&card.anchor_url)
            .copied()
            .unwrap_or(&card.headline_text);
        if text_match_score(text, reference) >= min_match {
            out.kept.push(card);
        } else {
            out.dropped.push((card, DropReason::LowTextMatch));
        }
    }
    out
}

/// Snapshot-level sanity check: enough cards survived relative to the
/// number of news links on the page.
pub fn count_ratio_check(n_cards: usize, n_qualifying_links: usize, min_ratio: f64) -> bool {
    n_qualifying_links > 0 && n_cards as f64 / n_qualifying_links as f64 >= min_ratio
}
