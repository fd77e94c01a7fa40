//! On-disk snapshot store.
//!
//! A bundle is one directory per homepage capture:
//!
//! ```text
//! page.html       raw HTML, decoded as lossy UTF-8
//! links.json      [{"url": ..., "text": ...}, ...]
//! meta.json       {"outlet_id": ..., "captured_at": "2023-05-04T12:00:00Z"}
//! geometry.json   optional renderer boxes
//! ```
//!
//! Ingestion copies the bundle to `<store>/snapshots/<snapshot_id>/` and
//! appends one tab-separated line to `<store>/manifest.tsv`:
//! `snapshot_id, outlet_id, captured_at, relative bundle path`.

use std::collections::BTreeSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use crate::dom::parse_html;
use crate::layout::GeometryMap;

pub const PAGE_FILE: &str = "page.html";
pub const LINKS_FILE: &str = "links.json";
pub const META_FILE: &str = "meta.json";
pub const GEOMETRY_FILE: &str = "geometry.json";
pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const SNAPSHOT_DIR: &str = "snapshots";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRecord {
    pub url: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub outlet_id: String,
    pub captured_at: DateTime<Utc>,
    /// Base for relative link URLs; falls back to the page's `<base href>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub snapshot_id: String,
    pub outlet_id: String,
    pub captured_at: DateTime<Utc>,
    pub html: Vec<u8>,
    pub links: Vec<LinkRecord>,
    pub geometry: Option<GeometryMap>,
    pub base_url: Option<Url>,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("missing required file {0}")]
    MissingFile(PathBuf),
    #[error("malformed meta.json: {0}")]
    MalformedMeta(String),
    #[error("malformed links.json: {0}")]
    MalformedLinks(String),
    #[error("malformed geometry.json: {0}")]
    MalformedGeometry(String),
    #[error("corrupt manifest line {line}: {reason}")]
    CorruptManifest { line: usize, reason: String },
    #[error("unknown snapshot {0}")]
    UnknownSnapshot(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// `outlet_id + "_" + captured_at` in basic ISO-8601 (`20230504T120000Z`).
pub fn snapshot_id(outlet_id: &str, captured_at: &DateTime<Utc>) -> String {
    format!("{outlet_id}_{}", captured_at.format("%Y%m%dT%H%M%SZ"))
}

/// Links sorted by `(url, text)`, serialized compactly.
pub fn canonical_links_json(links: &[LinkRecord]) -> String {
    let mut sorted = links.to_vec();
    sorted.sort();
    serde_json::to_string(&sorted).expect("links serialize")
}

fn read_required(dir: &Path, name: &str) -> Result<Vec<u8>, StoreError> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(StoreError::MissingFile(path));
    }
    fs::read(&path).map_err(io_err(&path))
}

fn parse_meta(bytes: &[u8]) -> Result<SnapshotMeta, String> {
    let meta: SnapshotMeta = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
    if meta.outlet_id.trim().is_empty() {
        return Err("outlet_id is empty".into());
    }
    if meta.outlet_id.contains(['\t', '\n', '/', '\\']) {
        return Err("outlet_id contains tab, newline or path separators".into());
    }
    Ok(meta)
}

fn parse_links(bytes: &[u8]) -> Result<Vec<LinkRecord>, String> {
    serde_json::from_slice(bytes).map_err(|e| e.to_string())
}

/// `<base href>` of the page, if any.
fn html_base(html: &[u8]) -> Option<String> {
    let dom = parse_html(html);
    let mut base = None;
    dom.walk(|_, node| {
        if base.is_none() && node.tag == "base" {
            base = node.attr("href").map(str::to_string);
        }
    });
    base
}

fn resolve_base(meta: &SnapshotMeta, html: &[u8]) -> Result<Option<Url>, String> {
    let meta_base = match &meta.base_url {
        Some(b) => Some(Url::parse(b).map_err(|e| format!("base_url {b:?}: {e}"))?),
        None => None,
    };
    match html_base(html) {
        Some(href) => match &meta_base {
            Some(b) => Ok(b.join(&href).ok().or(meta_base)),
            None => Ok(Url::parse(&href).ok()),
        },
        None => Ok(meta_base),
    }
}

fn resolve_links(links: Vec<LinkRecord>, base: Option<&Url>) -> Result<Vec<LinkRecord>, String> {
    links
        .into_iter()
        .map(|l| {
            let resolved = match base {
                Some(base) => base.join(l.url.trim()),
                None => Url::parse(l.url.trim()),
            };
            match resolved {
                Ok(url) => Ok(LinkRecord {
                    url: url.to_string(),
                    text: l.text,
                }),
                Err(e) => Err(format!("link {:?} does not resolve to an absolute URL: {e}", l.url)),
            }
        })
        .collect()
}

/// Reads a bundle without touching any store.
pub fn read_bundle(bundle_dir: &Path) -> Result<Snapshot, StoreError> {
    let html = read_required(bundle_dir, PAGE_FILE)?;
    let links_raw = read_required(bundle_dir, LINKS_FILE)?;
    let meta_raw = read_required(bundle_dir, META_FILE)?;
    let meta = parse_meta(&meta_raw).map_err(StoreError::MalformedMeta)?;
    let links = parse_links(&links_raw).map_err(StoreError::MalformedLinks)?;
    if links.is_empty() {
        return Err(StoreError::MalformedLinks("links list is empty".into()));
    }
    let base = resolve_base(&meta, &html).map_err(StoreError::MalformedMeta)?;
    let links = resolve_links(links, base.as_ref()).map_err(StoreError::MalformedLinks)?;
    let geo_path = bundle_dir.join(GEOMETRY_FILE);
    let geometry = if geo_path.is_file() {
        let text = fs::read_to_string(&geo_path).map_err(io_err(&geo_path))?;
        Some(GeometryMap::from_json(&text).map_err(|e| StoreError::MalformedGeometry(e.to_string()))?)
    } else {
        None
    };
    Ok(Snapshot {
        snapshot_id: snapshot_id(&meta.outlet_id, &meta.captured_at),
        outlet_id: meta.outlet_id,
        captured_at: meta.captured_at,
        html,
        links,
        geometry,
        base_url: base,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Fatal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    fn push(&mut self, severity: Severity, code: &str, message: impl Into<String>) {
        self.issues.push(Issue {
            severity,
            code: code.to_string(),
            message: message.into(),
        });
    }

    pub fn has(&self, code: &str) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }
}

/// Lists every structural defect of a bundle. Never fails.
pub fn validate_bundle(bundle_dir: &Path) -> ValidationReport {
    use Severity::*;
    let mut report = ValidationReport::default();
    if !bundle_dir.is_dir() {
        report.push(Fatal, "MISSING_DIR", format!("{} is not a directory", bundle_dir.display()));
        return report;
    }
    let read = |name: &str| fs::read(bundle_dir.join(name)).ok();

    let html = read(PAGE_FILE);
    match &html {
        None => report.push(Fatal, "MISSING_PAGE", "page.html is missing"),
        Some(bytes) => {
            if parse_html(bytes).element_count() == 0 {
                report.push(Fatal, "UNPARSEABLE_HTML", "page.html contains no HTML elements");
            }
        }
    }

    let meta = match read(META_FILE) {
        None => {
            report.push(Fatal, "MISSING_META", "meta.json is missing");
            None
        }
        Some(bytes) => match parse_meta(&bytes) {
            Ok(m) => Some(m),
            Err(e) => {
                report.push(Fatal, "MALFORMED_META", e);
                None
            }
        },
    };

    match read(LINKS_FILE) {
        None => report.push(Fatal, "MISSING_LINKS", "links.json is missing"),
        Some(bytes) => match parse_links(&bytes) {
            Err(e) => report.push(Fatal, "MALFORMED_LINKS", e),
            Ok(links) if links.is_empty() => report.push(Fatal, "EMPTY_LINKS", "links.json is empty"),
            Ok(links) => {
                if let Some(meta) = &meta {
                    let html = html.as_deref().unwrap_or_default();
                    match resolve_base(meta, html) {
                        Err(e) => report.push(Fatal, "MALFORMED_META", e),
                        Ok(base) => {
                            if let Err(e) = resolve_links(links, base.as_ref()) {
                                report.push(Fatal, "UNRESOLVABLE_LINK", e);
                            }
                        }
                    }
                }
            }
        },
    }

    if let Some(bytes) = read(GEOMETRY_FILE) {
        let parsed = std::str::from_utf8(&bytes)
            .map_err(|e| e.to_string())
            .and_then(|t| GeometryMap::from_json(t).map_err(|e| e.to_string()));
        if let Err(e) = parsed {
            report.push(Warning, "MALFORMED_GEOMETRY", e);
        }
    }

    report.ok = !report.issues.iter().any(|i| i.severity == Fatal);
    report
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub snapshot_id: String,
    pub outlet_id: String,
    pub captured_at: DateTime<Utc>,
    pub rel_path: PathBuf,
}

impl ManifestEntry {
    fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\n",
            self.snapshot_id,
            self.outlet_id,
            self.captured_at.to_rfc3339_opts(SecondsFormat::AutoSi, true),
            self.rel_path.display()
        )
    }

    fn from_line(line: &str, n: usize) -> Result<Self, StoreError> {
        let corrupt = |reason: &str| StoreError::CorruptManifest {
            line: n,
            reason: reason.to_string(),
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, outlet, at, path] = fields[..] else {
            return Err(corrupt("expected 4 tab-separated fields"));
        };
        let captured_at = DateTime::parse_from_rfc3339(at)
            .map_err(|e| corrupt(&e.to_string()))?
            .with_timezone(&Utc);
        Ok(ManifestEntry {
            snapshot_id: id.to_string(),
            outlet_id: outlet.to_string(),
            captured_at,
            rel_path: PathBuf::from(path),
        })
    }
}

/// Half-open UTC interval `[start, end)`; either side may be unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TimeRange {
    pub start: Option<DateTime<Utc>>,
    pub end: Option<DateTime<Utc>>,
}

impl TimeRange {
    pub fn contains(&self, t: &DateTime<Utc>) -> bool {
        self.start.is_none_or(|s| *t >= s) && self.end.is_none_or(|e| *t < e)
    }

    pub fn intersect(&self, other: &TimeRange) -> TimeRange {
        let start = match (self.start, other.start) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let end = match (self.end, other.end) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        TimeRange { start, end }
    }
}

/// A directory holding ingested bundles and the manifest index.
#[derive(Debug)]
pub struct SnapshotStore {
    root: PathBuf,
    entries: Mutex<Vec<ManifestEntry>>,
}

impl SnapshotStore {
    /// Opens (creating if needed) the store at `root` and loads its manifest.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        let manifest = root.join(MANIFEST_FILE);
        let mut entries = Vec::new();
        if manifest.is_file() {
            let text = fs::read_to_string(&manifest).map_err(io_err(&manifest))?;
            let mut seen = BTreeSet::new();
            for (i, line) in text.lines().enumerate() {
                if line.is_empty() {
                    continue;
                }
                let entry = ManifestEntry::from_line(line, i + 1)?;
                if seen.insert(entry.snapshot_id.clone()) {
                    entries.push(entry);
                }
            }
        }
        Ok(SnapshotStore {
            root,
            entries: Mutex::new(entries),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn snapshot_dir(&self, snapshot_id: &str) -> PathBuf {
        self.root.join(SNAPSHOT_DIR).join(snapshot_id)
    }

    /// Validates, copies and indexes a bundle. Re-ingesting an identical
    /// bundle is a no-op that returns the same snapshot.
    pub fn ingest_snapshot(&self, bundle_dir: &Path) -> Result<Snapshot, StoreError> {
        let snapshot = read_bundle(bundle_dir)?;
        let rel_path = Path::new(SNAPSHOT_DIR).join(&snapshot.snapshot_id);
        let dest = self.root.join(&rel_path);
        let same_dir = fs::canonicalize(bundle_dir).ok() == fs::canonicalize(&dest).ok();
        if !same_dir {
            fs::create_dir_all(&dest).map_err(io_err(&dest))?;
            for name in [PAGE_FILE, LINKS_FILE, META_FILE, GEOMETRY_FILE] {
                let src = bundle_dir.join(name);
                if src.is_file() {
                    let to = dest.join(name);
                    fs::copy(&src, &to).map_err(io_err(&to))?;
                }
            }
        }

        let entry = ManifestEntry {
            snapshot_id: snapshot.snapshot_id.clone(),
            outlet_id: snapshot.outlet_id.clone(),
            captured_at: snapshot.captured_at,
            rel_path,
        };
        let mut entries = self.entries.lock().expect("manifest lock");
        if !entries.iter().any(|e| e.snapshot_id == entry.snapshot_id) {
            let manifest = self.root.join(MANIFEST_FILE);
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&manifest)
                .map_err(io_err(&manifest))?;
            file.write_all(entry.to_line().as_bytes()).map_err(io_err(&manifest))?;
            entries.push(entry);
        }
        Ok(snapshot)
    }

    /// Snapshot ids sorted by `(outlet_id, captured_at)`; filters are
    /// conjunctive.
    pub fn list_snapshots(&self, outlet_filter: Option<&str>, time_range: Option<&TimeRange>) -> Vec<String> {
        let entries = self.entries.lock().expect("manifest lock");
        let mut hits: Vec<&ManifestEntry> = entries
            .iter()
            .filter(|e| outlet_filter.is_none_or(|o| e.outlet_id == o))
            .filter(|e| time_range.is_none_or(|r| r.contains(&e.captured_at)))
            .collect();
        hits.sort_by(|a, b| {
            (&a.outlet_id, a.captured_at, &a.snapshot_id).cmp(&(&b.outlet_id, b.captured_at, &b.snapshot_id))
        });
        hits.into_iter().map(|e| e.snapshot_id.clone()).collect()
    }

    pub fn entry(&self, snapshot_id: &str) -> Option<ManifestEntry> {
        let entries = self.entries.lock().expect("manifest lock");
        entries.iter().find(|e| e.snapshot_id == snapshot_id).cloned()
    }

    pub fn load(&self, snapshot_id: &str) -> Result<Snapshot, StoreError> {
        let entry = self
            .entry(snapshot_id)
            .ok_or_else(|| StoreError::UnknownSnapshot(snapshot_id.to_string()))?;
        read_bundle(&self.root.join(entry.rel_path))
    }
}
