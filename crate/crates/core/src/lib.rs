//! Article cards from archived news homepages, layout-derived preference
//! pairs, pairwise comparators, and rank-agreement analysis.
//!
//! The pipeline, stage by stage:
//!
//! 1. [`store`]: ingest homepage bundles (HTML, link list, metadata).
//! 2. [`dom`] + [`cards`]: parse the page and grow every news link into the
//!    largest DOM subtree that holds no other news link.
//! 3. [`layout`]: attach geometry (renderer sidecar or a flow-layout
//!    estimate) and derive size/position prominence features.
//! 4. [`pairs`]: label adjacent card pairs by prominence.
//! 5. [`comparator`]: train a pairwise model on those pairs.
//! 6. [`ranker`]: rank article lists with each model and measure how much
//!    outlets agree.

pub mod cards;
pub mod clean;
pub mod comparator;
pub mod dom;
pub mod eval;
pub mod layout;
pub mod links;
pub mod pairs;
pub mod ranker;
pub mod store;
pub mod text;

pub use cards::{extract_cards, ArticleCard};
pub use comparator::{Comparator, ComparatorModel};
pub use dom::{parse_html, DomNode, NodePath};
pub use layout::{GeometryMap, Rect};
pub use pairs::{Criterion, PreferencePair};
pub use store::{LinkRecord, Snapshot, SnapshotStore};
