//! Card geometry: a sidecar loader for boxes exported by an external
//! renderer, a deterministic flow-layout estimator for when no renderer
//! output exists, and the prominence features derived from either.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::ArticleCard;
use crate::dom::{DomNode, NodePath};

pub const DEFAULT_VIEWPORT_W: u32 = 1280;
pub const DEFAULT_BAND_HEIGHT: f64 = 100.0;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn is_valid(&self) -> bool {
        [self.x, self.y, self.w, self.h]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
    }

    pub fn intersection_area(&self, other: &Rect) -> f64 {
        let w = self.right().min(other.right()) - self.x.max(other.x);
        let h = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection_area(other);
        if inter == 0.0 {
            return 0.0;
        }
        inter / (self.area() + other.area() - inter)
    }

    /// Grows the rect by `by` on every side (no clamping).
    pub fn expand(&self, by: f64) -> Rect {
        Rect::new(self.x - by, self.y - by, self.w + 2.0 * by, self.h + 2.0 * by)
    }

    /// Closed-interval intersection: touching edges count.
    pub fn touches(&self, other: &Rect) -> bool {
        self.x <= other.right()
            && other.x <= self.right()
            && self.y <= other.bottom()
            && other.y <= self.bottom()
    }
}

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("malformed geometry: {0}")]
    MalformedGeometry(String),
    #[error("box at {path} lies outside the {viewport_w}x{page_h} page")]
    OutOfBounds {
        path: NodePath,
        viewport_w: u32,
        page_h: u32,
    },
    #[error("no geometry for card at {0}")]
    MissingGeometry(NodePath),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeometryMap {
    pub entries: BTreeMap<NodePath, Rect>,
    pub viewport_w: u32,
    pub page_h: u32,
}

#[derive(Serialize, Deserialize)]
struct SidecarBox {
    path: NodePath,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    viewport_w: u32,
    page_h: u32,
    boxes: Vec<SidecarBox>,
}

impl GeometryMap {
    pub fn get(&self, path: &NodePath) -> Option<&Rect> {
        self.entries.get(path)
    }

    pub fn fits(&self, rect: &Rect) -> bool {
        rect.is_valid()
            && rect.right() <= self.viewport_w as f64 + EPS
            && rect.bottom() <= self.page_h as f64 + EPS
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        for (path, rect) in &self.entries {
            if !rect.is_valid() {
                return Err(LayoutError::MalformedGeometry(format!(
                    "box at {path} has negative or non-finite fields"
                )));
            }
            if !self.fits(rect) {
                return Err(LayoutError::OutOfBounds {
                    path: path.clone(),
                    viewport_w: self.viewport_w,
                    page_h: self.page_h,
                });
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, LayoutError> {
        let sidecar: Sidecar =
            serde_json::from_str(text).map_err(|e| LayoutError::MalformedGeometry(e.to_string()))?;
        let mut entries = BTreeMap::new();
        for b in sidecar.boxes {
            let rect = Rect::new(b.x, b.y, b.w, b.h);
            if entries.insert(b.path.clone(), rect).is_some() {
                return Err(LayoutError::MalformedGeometry(format!("duplicate box for {}", b.path)));
            }
        }
        let map = GeometryMap {
            entries,
            viewport_w: sidecar.viewport_w,
            page_h: sidecar.page_h,
        };
        map.validate()?;
        Ok(map)
    }

    /// Serializes to the sidecar format, boxes in path order.
    pub fn to_json(&self) -> String {
        let sidecar = Sidecar {
            viewport_w: self.viewport_w,
            page_h: self.page_h,
            boxes: self
                .entries
                .iter()
                .map(|(path, r)| SidecarBox {
                    path: path.clone(),
                    x: r.x,
                    y: r.y,
                    w: r.w,
                    h: r.h,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&sidecar).expect("sidecar serializes")
    }
}

pub fn load_geometry_sidecar(file: &Path) -> Result<GeometryMap, LayoutError> {
    GeometryMap::from_json(&std::fs::read_to_string(file)?)
}

/// Estimated card height: 40 px base, 20 px per full 80 characters of
/// text, 180 px when the card carries an image.
pub fn estimated_height(card: &ArticleCard) -> f64 {
    let chars = card.full_text.chars().count();
    let mut h = 40 + 20 * (chars / 80);
    if card.image_count > 0 {
        h += 180;
    }
    h as f64
}

fn is_column_container(node: &DomNode) -> bool {
    node.attr("class").is_some_and(|class| {
        let class = class.to_ascii_lowercase();
        ["col", "grid", "row"].iter().any(|p| class.contains(p))
    })
}

/// Naive flow layout. Cards are placed in document order. A run of
/// consecutive cards whose shared parent has a column-like class is laid out
/// as one row of equal-width columns; every other card takes a full-width
/// row of its own.
pub fn estimate_layout(dom: &DomNode, cards: &[ArticleCard], viewport_w: u32) -> GeometryMap {
    let mut ordered: Vec<&ArticleCard> = cards.iter().collect();
    ordered.sort_by(|a, b| a.card_path.cmp(&b.card_path));

    let column_parent = |card: &ArticleCard| -> Option<NodePath> {
        let parent = card.card_path.parent()?;
        let node = dom.get(&parent)?;
        is_column_container(node).then_some(parent)
    };

    let width = viewport_w as f64;
    let mut entries = BTreeMap::new();
    let mut y = 0.0;
    let mut i = 0;
    while i < ordered.len() {
        let group = column_parent(ordered[i]);
        let mut j = i + 1;
        if group.is_some() {
            while j < ordered.len() && column_parent(ordered[j]) == group {
                j += 1;
            }
        }
        let row = &ordered[i..j];
        let col_w = width / row.len() as f64;
        let mut row_h: f64 = 0.0;
        for (k, card) in row.iter().enumerate() {
            let h = estimated_height(card);
            row_h = row_h.max(h);
            entries.insert(card.card_path.clone(), Rect::new(col_w * k as f64, y, col_w, h));
        }
        y += row_h;
        i = j;
    }
    GeometryMap {
        entries,
        viewport_w,
        page_h: y as u32,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProminenceFeatures {
    pub area: f64,
    pub center_x: f64,
    pub top_y: f64,
    pub reading_rank: usize,
    pub top_decile: bool,
    pub image_count: usize,
}

/// Features for every card of one snapshot, in the order of `cards`.
///
/// Reading rank sorts cards by `(band, x, card_path)` where
/// `band = floor(y / band_height)`.
pub fn prominence_features(
    cards: &[ArticleCard],
    geo: &GeometryMap,
    band_height: f64,
) -> Result<Vec<ProminenceFeatures>, LayoutError> {
    let rects = cards
        .iter()
        .map(|c| {
            geo.get(&c.card_path)
                .copied()
                .ok_or_else(|| LayoutError::MissingGeometry(c.card_path.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut order: Vec<usize> = (0..cards.len()).collect();
    order.sort_by(|&a, &b| {
        let band_a = (rects[a].y / band_height).floor();
        let band_b = (rects[b].y / band_height).floor();
        band_a
            .total_cmp(&band_b)
            .then(rects[a].x.total_cmp(&rects[b].x))
            .then_with(|| cards[a].card_path.cmp(&cards[b].card_path))
    });
    let mut rank = vec![0; cards.len()];
    for (r, &idx) in order.iter().enumerate() {
        rank[idx] = r + 1;
    }

    let decile = 0.10 * geo.page_h as f64;
    Ok(cards
        .iter()
        .zip(&rects)
        .zip(rank)
        .map(|((card, rect), reading_rank)| ProminenceFeatures {
            area: rect.area(),
            center_x: rect.x + rect.w / 2.0,
            top_y: rect.y,
            reading_rank,
            top_decile: rect.y < decile,
            image_count: card.image_count,
        })
        .collect())
}

/// Looks up rects for a set of cards, keyed by path.
pub fn rects_for<'a>(
    cards: &'a [ArticleCard],
    geo: &GeometryMap,
) -> Result<HashMap<&'a NodePath, Rect>, LayoutError> {
    cards
        .iter()
        .map(|c| {
            geo.get(&c.card_path)
                .map(|r| (&c.card_path, *r))
                .ok_or_else(|| LayoutError::MissingGeometry(c.card_path.clone()))
        })
        .collect()
}
