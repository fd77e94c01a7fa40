//! One function per pipeline stage. Stage inputs and outputs live at fixed
//! locations under the store directory:
//!
//! ```text
//! <store>/manifest.tsv
//! <store>/snapshots/<id>/{page.html,links.json,meta.json,cards.json,layout.json}
//! <store>/pairs/{train,test}.jsonl
//! <store>/models/<outlet>.mhcmp
//! <store>/rankings/<outlet>/<set>.json
//! <store>/reports/{metrics,agreement,similarity}.json
//! <store>/reports/out/...            (rendered by `report`)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use newsprom::cards::{
    count_ratio_check, extract_cards_with, filter_cards, normalize_url, ArticleCard, CardError, DropReason,
    ExtractOptions,
};
use newsprom::clean::clean_text;
use newsprom::comparator::{self, load_model, save_model, ComparatorModel, Metrics};
use newsprom::dom::parse_html;
use newsprom::layout::{estimate_layout, prominence_features, ProminenceFeatures, Rect};
use newsprom::links::{LinkClassifier, LinkRules};
use newsprom::pairs::{
    build_pairs, dedup_by_url, read_pairs_jsonl, split_dataset, write_pairs_jsonl, PreferencePair, SnapshotCards,
};
use newsprom::ranker::{
    agreement_matrix, centroid_similarity, emit_report, read_items_jsonl, sort_items, top_k, AgreementMatrix, Item,
    RankedList, Report, ReportFormat,
};
use newsprom::store::{validate_bundle, Severity, SnapshotStore, SNAPSHOT_DIR};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use url::Url;

use crate::config::PipelineConfig;
use crate::error::{CliError, Coded};

pub const CARDS_FILE: &str = "cards.json";
pub const LAYOUT_FILE: &str = "layout.json";
pub const MODEL_EXT: &str = "mhcmp";

/// Stage file locations under one store directory.
#[derive(Debug, Clone)]
pub struct StorePaths {
    root: PathBuf,
}

impl StorePaths {
    pub fn new(root: &Path) -> Self {
        StorePaths {
            root: root.to_path_buf(),
        }
    }

    pub fn snapshot(&self, id: &str) -> PathBuf {
        self.root.join(SNAPSHOT_DIR).join(id)
    }

    pub fn cards(&self, id: &str) -> PathBuf {
        self.snapshot(id).join(CARDS_FILE)
    }

    pub fn layout(&self, id: &str) -> PathBuf {
        self.snapshot(id).join(LAYOUT_FILE)
    }

    pub fn pairs(&self, split: &str) -> PathBuf {
        self.root.join("pairs").join(format!("{split}.jsonl"))
    }

    pub fn models(&self) -> PathBuf {
        self.root.join("models")
    }

    pub fn model(&self, outlet: &str) -> PathBuf {
        self.models().join(format!("{}.{MODEL_EXT}", file_safe(outlet)))
    }

    pub fn rankings(&self) -> PathBuf {
        self.root.join("rankings")
    }

    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardRecord {
    pub card: ArticleCard,
    pub rect: Rect,
    pub features: ProminenceFeatures,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedCard {
    pub anchor_url: String,
    pub headline_text: String,
    pub reason: DropReason,
}

/// Contents of `cards.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardsFile {
    pub snapshot_id: String,
    pub outlet_id: String,
    pub news_links: usize,
    pub count_check_passed: bool,
    pub cards: Vec<CardRecord>,
    pub dropped: Vec<DroppedCard>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutletMetrics {
    pub outlet_id: String,
    #[serde(flatten)]
    pub metrics: Metrics,
}

fn thread_pool(cfg: &PipelineConfig) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .expect("thread pool")
}

fn write_file(stage: &'static str, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(stage, dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(stage, path, e))
}

fn write_json<T: Serialize>(stage: &'static str, path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("stage outputs serialize");
    text.push('\n');
    write_file(stage, path, text.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(stage: &'static str, path: &Path, hint: &str) -> Result<T, CliError> {
    if !path.is_file() {
        return Err(CliError::missing_input(stage, path, hint));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::io(stage, path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::new(stage, "MALFORMED_STAGE_FILE", format!("{}: {e}", path.display())))
}

fn open_store(stage: &'static str, cfg: &PipelineConfig) -> Result<SnapshotStore, CliError> {
    SnapshotStore::open(&cfg.store_dir).map_err(|e| e.at(stage))
}

fn snapshot_ids(stage: &'static str, store: &SnapshotStore) -> Result<Vec<String>, CliError> {
    let ids = store.list_snapshots(None, None);
    if ids.is_empty() {
        return Err(CliError::new(
            stage,
            "NO_SNAPSHOTS",
            format!("store {} holds no snapshots; run `newsprom ingest` first", store.root().display()),
        ));
    }
    Ok(ids)
}

fn link_rules(stage: &'static str, cfg: &PipelineConfig) -> Result<LinkRules, CliError> {
    match &cfg.link_rules {
        Some(path) => LinkRules::from_file(path).map_err(|e| e.at(stage)),
        None => Ok(LinkRules::default()),
    }
}

/// Bundles named on the command line, or every subdirectory of
/// `bundles_dir` in name order.
fn bundle_dirs(cfg: &PipelineConfig, explicit: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    if !explicit.is_empty() {
        return Ok(explicit.to_vec());
    }
    let Some(dir) = &cfg.bundles_dir else {
        return Err(CliError::new(
            "ingest",
            "NO_BUNDLES",
            "no bundle directories given and bundles_dir is not configured",
        ));
    };
    let entries = fs::read_dir(dir).map_err(|e| CliError::io("ingest", dir, e))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(CliError::new(
            "ingest",
            "NO_BUNDLES",
            format!("{} contains no bundle directories", dir.display()),
        ));
    }
    Ok(dirs)
}

pub fn ingest(cfg: &PipelineConfig, explicit: &[PathBuf]) -> Result<String, CliError> {
    let bundles = bundle_dirs(cfg, explicit)?;
    let store = open_store("ingest", cfg)?;
    let before: BTreeSet<String> = store.list_snapshots(None, None).into_iter().collect();
    let reports: Vec<_> = thread_pool(cfg).install(|| bundles.par_iter().map(|b| validate_bundle(b)).collect());
    for (bundle, report) in bundles.iter().zip(&reports) {
        if let Some(issue) = report.issues.iter().find(|i| i.severity == Severity::Fatal) {
            return Err(CliError::new(
                "ingest",
                &issue.code,
                format!("{}: {}", bundle.display(), issue.message),
            ));
        }
    }
    // sequential so the manifest order does not depend on scheduling
    let mut ids = BTreeSet::new();
    for bundle in &bundles {
        ids.insert(store.ingest_snapshot(bundle).map_err(|e| e.at("ingest"))?.snapshot_id);
    }
    let new = ids.difference(&before).count();
    Ok(format!(
        "ingested {} snapshots ({new} new) into {}",
        ids.len(),
        cfg.store_dir.display()
    ))
}

struct Extracted {
    cards: usize,
    dropped: usize,
    passed: bool,
}

fn extract_one(
    store: &SnapshotStore,
    paths: &StorePaths,
    id: &str,
    rules: &LinkRules,
    cfg: &PipelineConfig,
) -> Result<Extracted, CliError> {
    let stage = "extract";
    let snap = store.load(id).map_err(|e| e.at(stage))?;
    let dom = parse_html(&snap.html);
    let opts = ExtractOptions {
        mode: cfg.anchor_mode().map_err(|e| e.at("config"))?,
        base_url: snap.base_url.clone(),
    };
    let cards = match extract_cards_with(&dom, &snap.links, rules, &opts) {
        Ok(cards) => cards,
        Err(CardError::NoAnchors) => Vec::new(),
        Err(e) => return Err(CliError::new(stage, "INVALID_PATH", format!("{id}: {e}"))),
    };
    let texts: Vec<String> = cards.iter().map(|c| c.full_text.clone()).collect();
    let outcome = filter_cards(cards, &texts, &snap.links, cfg.text_match_min);
    let news_links: BTreeSet<String> = snap
        .links
        .iter()
        .filter(|l| rules.classify(&l.url, &l.text).is_news())
        .filter_map(|l| Url::parse(&l.url).ok())
        .map(|u| normalize_url(&u))
        .collect();
    let passed = count_ratio_check(outcome.kept.len(), news_links.len(), cfg.count_ratio_min);

    let geo = match &snap.geometry {
        Some(geo) => geo.clone(),
        None => estimate_layout(&dom, &outcome.kept, cfg.viewport_w),
    };
    let at = |e: newsprom::layout::LayoutError| CliError::new(stage, e.code(), format!("{id}: {e}"));
    geo.validate().map_err(at)?;
    let features = prominence_features(&outcome.kept, &geo, cfg.band_height).map_err(at)?;
    let records: Vec<CardRecord> = outcome
        .kept
        .iter()
        .zip(features)
        .map(|(card, features)| CardRecord {
            rect: geo.entries[&card.card_path],
            card: card.clone(),
            features,
        })
        .collect();
    let file = CardsFile {
        snapshot_id: snap.snapshot_id.clone(),
        outlet_id: snap.outlet_id.clone(),
        news_links: news_links.len(),
        count_check_passed: passed,
        dropped: outcome
            .dropped
            .iter()
            .map(|(c, reason)| DroppedCard {
                anchor_url: c.anchor_url.clone(),
                headline_text: c.headline_text.clone(),
                reason: *reason,
            })
            .collect(),
        cards: records,
    };
    write_json(stage, &paths.cards(id), &file)?;
    write_file(stage, &paths.layout(id), format!("{}\n", geo.to_json()).as_bytes())?;
    Ok(Extracted {
        cards: file.cards.len(),
        dropped: file.dropped.len(),
        passed,
    })
}

pub fn extract(cfg: &PipelineConfig) -> Result<String, CliError> {
    let store = open_store("extract", cfg)?;
    let ids = snapshot_ids("extract", &store)?;
    let rules = link_rules("extract", cfg)?;
    let paths = StorePaths::new(&cfg.store_dir);
    let results: Vec<Result<Extracted, CliError>> = thread_pool(cfg).install(|| {
        ids.par_iter()
            .map(|id| extract_one(&store, &paths, id, &rules, cfg))
            .collect()
    });
    let (mut cards, mut dropped, mut failed) = (0, 0, 0);
    for r in results {
        let r = r?;
        cards += r.cards;
        dropped += r.dropped;
        failed += usize::from(!r.passed);
    }
    let mut line = format!("{} snapshots, {cards} cards, {dropped} dropped", ids.len());
    if failed > 0 {
        line.push_str(&format!(" ({failed} below count ratio, excluded from pairs)"));
    }
    Ok(line)
}

fn load_cards(paths: &StorePaths, id: &str, stage: &'static str) -> Result<CardsFile, CliError> {
    read_json(stage, &paths.cards(id), "newsprom extract")
}

fn snapshot_pairs(file: &CardsFile, cfg: &PipelineConfig) -> Result<Vec<PreferencePair>, CliError> {
    if !file.count_check_passed {
        return Ok(Vec::new());
    }
    let cards: Vec<ArticleCard> = file.cards.iter().map(|r| r.card.clone()).collect();
    let rects: Vec<Rect> = file.cards.iter().map(|r| r.rect).collect();
    let keep = dedup_by_url(&cards, &rects);
    let pick = |v: &[_]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let kept_cards: Vec<ArticleCard> = keep.iter().map(|&i| cards[i].clone()).collect();
    let kept_features: Vec<ProminenceFeatures> = keep.iter().map(|&i| file.cards[i].features.clone()).collect();
    let snap = SnapshotCards::new(&file.snapshot_id, &file.outlet_id, &kept_cards, &pick(&rects), &kept_features);
    let criterion = cfg.criterion().map_err(|e| e.at("config"))?;
    Ok(build_pairs(&snap, criterion, cfg.adjacency_gap))
}

pub fn pairs(cfg: &PipelineConfig) -> Result<String, CliError> {
    let stage = "pairs";
    let store = open_store(stage, cfg)?;
    let ids = snapshot_ids(stage, &store)?;
    let paths = StorePaths::new(&cfg.store_dir);
    let per_snapshot: Vec<Result<Vec<PreferencePair>, CliError>> = thread_pool(cfg).install(|| {
        ids.par_iter()
            .map(|id| snapshot_pairs(&load_cards(&paths, id, stage)?, cfg))
            .collect()
    });
    let mut all = Vec::new();
    for r in per_snapshot {
        all.extend(r?);
    }
    let total = all.len();
    let (train, test) = split_dataset(all, cfg.split_ratio, cfg.seed).map_err(|e| e.at(stage))?;
    for (name, set) in [("train", &train), ("test", &test)] {
        let mut buf = Vec::new();
        write_pairs_jsonl(&mut buf, &set.pairs).map_err(|e| e.at(stage))?;
        write_file(stage, &paths.pairs(name), &buf)?;
    }
    Ok(format!(
        "{total} pairs from {} snapshots: {} train, {} test",
        ids.len(),
        train.pairs.len(),
        test.pairs.len()
    ))
}

fn read_pairs(stage: &'static str, path: &Path) -> Result<Vec<PreferencePair>, CliError> {
    if !path.is_file() {
        return Err(CliError::missing_input(stage, path, "newsprom pairs"));
    }
    let file = fs::File::open(path).map_err(|e| CliError::io(stage, path, e))?;
    read_pairs_jsonl(std::io::BufReader::new(file)).map_err(|e| e.at(stage))
}

fn by_outlet(pairs: Vec<PreferencePair>) -> BTreeMap<String, Vec<PreferencePair>> {
    let mut groups: BTreeMap<String, Vec<PreferencePair>> = BTreeMap::new();
    for p in pairs {
        groups.entry(p.outlet_id.clone()).or_default().push(p);
    }
    groups
}

/// One model per outlet in the training split.
pub fn train(cfg: &PipelineConfig) -> Result<String, CliError> {
    let stage = "train";
    let paths = StorePaths::new(&cfg.store_dir);
    let pairs = read_pairs(stage, &paths.pairs("train"))?;
    let n = pairs.len();
    let groups: Vec<(String, Vec<PreferencePair>)> = by_outlet(pairs).into_iter().collect();
    if groups.is_empty() {
        return Err(comparator::ComparatorError::EmptyTrainingSet.at(stage));
    }
    let hyper = cfg.hyper();
    let models: Vec<Result<ComparatorModel, CliError>> = thread_pool(cfg).install(|| {
        groups
            .par_iter()
            .map(|(_, pairs)| comparator::train(pairs, &hyper).map_err(|e| e.at(stage)))
            .collect()
    });
    let dir = paths.models();
    if dir.is_dir() {
        for old in list_models(stage, &dir)? {
            fs::remove_file(&old).map_err(|e| CliError::io(stage, &old, e))?;
        }
    }
    fs::create_dir_all(&dir).map_err(|e| CliError::io(stage, &dir, e))?;
    let mut k = 0;
    for ((outlet, _), model) in groups.iter().zip(models) {
        let path = paths.model(outlet);
        save_model(&model?, &path).map_err(|e| e.at(stage))?;
        k += 1;
    }
    Ok(format!("trained {k} model(s) on {n} pairs -> {}", dir.display()))
}

fn list_models(stage: &'static str, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(stage, dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == MODEL_EXT))
        .collect();
    files.sort();
    Ok(files)
}

fn load_models(stage: &'static str, paths: &StorePaths) -> Result<Vec<ComparatorModel>, CliError> {
    let dir = paths.models();
    let files = if dir.is_dir() { list_models(stage, &dir)? } else { Vec::new() };
    if files.is_empty() {
        return Err(CliError::missing_input(stage, &dir.join(format!("*.{MODEL_EXT}")), "newsprom train"));
    }
    files
        .iter()
        .map(|f| load_model(f).map_err(|e| CliError::new(stage, e.code(), format!("{}: {e}", f.display()))))
        .collect()
}

pub fn eval(cfg: &PipelineConfig) -> Result<String, CliError> {
    let stage = "eval";
    let paths = StorePaths::new(&cfg.store_dir);
    let models = load_models(stage, &paths)?;
    let mut test = by_outlet(read_pairs(stage, &paths.pairs("test"))?);
    let mut results = Vec::new();
    for model in &models {
        let Some(pairs) = test.remove(&model.outlet_id) else { continue };
        let metrics = comparator::evaluate(model, &pairs).map_err(|e| e.at(stage))?;
        results.push(OutletMetrics {
            outlet_id: model.outlet_id.clone(),
            metrics,
        });
    }
    if results.is_empty() {
        return Err(comparator::ComparatorError::EmptyTestSet.at(stage));
    }
    write_json(stage, &paths.reports().join("metrics.json"), &results)?;
    let parts: Vec<String> = results
        .iter()
        .map(|r| {
            let m = &r.metrics;
            format!(
                "{}: accuracy={:.4} f1={:.4} precision={:.4} recall={:.4} n={}",
                r.outlet_id, m.accuracy, m.f1, m.precision, m.recall, m.n
            )
        })
        .collect();
    Ok(parts.join("; "))
}

fn article_sets(stage: &'static str, cfg: &PipelineConfig) -> Result<Vec<(String, Vec<Item>)>, CliError> {
    if cfg.article_sets.is_empty() {
        return Err(CliError::new(
            stage,
            "NO_ARTICLE_SETS",
            "no article sets configured (article_sets or --article-set)",
        ));
    }
    let mut names = BTreeSet::new();
    let mut sets = Vec::new();
    for path in &cfg.article_sets {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if !names.insert(name.clone()) {
            return Err(CliError::new(
                stage,
                "DUPLICATE_ARTICLE_SET",
                format!("two article sets are named `{name}`"),
            ));
        }
        let file = fs::File::open(path).map_err(|e| CliError::io(stage, path, e))?;
        let items = read_items_jsonl(std::io::BufReader::new(file))
            .map_err(|e| CliError::new(stage, e.code(), format!("{}: {e}", path.display())))?;
        sets.push((name, items));
    }
    Ok(sets)
}

pub fn rank(cfg: &PipelineConfig) -> Result<String, CliError> {
    let stage = "rank";
    let paths = StorePaths::new(&cfg.store_dir);
    let models = load_models(stage, &paths)?;
    let sets = article_sets(stage, cfg)?;
    let jobs: Vec<(&ComparatorModel, &(String, Vec<Item>))> =
        models.iter().flat_map(|m| sets.iter().map(move |s| (m, s))).collect();
    let ranked: Vec<RankedList> =
        thread_pool(cfg).install(|| jobs.par_iter().map(|(m, (_, items))| sort_items(*m, items)).collect());
    let dir = paths.rankings();
    for ((model, (name, _)), list) in jobs.iter().zip(&ranked) {
        let path = dir.join(file_safe(&model.outlet_id)).join(format!("{}.json", file_safe(name)));
        emit_report(Report::Ranking(list), &path, ReportFormat::Json).map_err(|e| e.at(stage))?;
    }
    let (model, (name, _)) = jobs[0];
    let head = top_k(&ranked[0], cfg.top_k);
    Ok(format!(
        "{} ranking(s) -> {}; top {} for {}/{}: {}",
        ranked.len(),
        dir.display(),
        head.len(),
        model.outlet_id,
        name,
        head.join(", ")
    ))
}

/// Cleaned card texts per outlet, the corpus for the similarity baseline.
fn outlet_corpora(
    stage: &'static str,
    store: &SnapshotStore,
    paths: &StorePaths,
) -> Result<BTreeMap<String, Vec<String>>, CliError> {
    let mut corpora: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for id in store.list_snapshots(None, None) {
        let file = load_cards(paths, &id, stage)?;
        let texts = corpora.entry(file.outlet_id.clone()).or_default();
        texts.extend(file.cards.iter().map(|r| clean_text(&r.card.full_text)));
    }
    corpora.retain(|_, texts| !texts.is_empty());
    Ok(corpora)
}

pub fn agree(cfg: &PipelineConfig) -> Result<String, CliError> {
    let stage = "agree";
    let paths = StorePaths::new(&cfg.store_dir);
    let models = load_models(stage, &paths)?;
    let sets: Vec<Vec<Item>> = article_sets(stage, cfg)?.into_iter().map(|(_, items)| items).collect();
    let matrix = thread_pool(cfg).install(|| agreement_matrix(&models, &sets)).map_err(|e| e.at(stage))?;
    let out = paths.reports().join("agreement.json");
    emit_report(Report::Matrix(&matrix), &out, ReportFormat::Json).map_err(|e| e.at(stage))?;

    let store = open_store(stage, cfg)?;
    let corpora = outlet_corpora(stage, &store, &paths)?;
    let mut baseline = String::new();
    if !corpora.is_empty() {
        let sim = centroid_similarity(&corpora).map_err(|e| e.at(stage))?;
        let sim_out = paths.reports().join("similarity.json");
        emit_report(Report::Matrix(&sim), &sim_out, ReportFormat::Json).map_err(|e| e.at(stage))?;
        baseline = format!(", similarity baseline -> {}", sim_out.display());
    }
    let k = matrix.outlets.len();
    let diag = if k == 1 {
        format!(" (self-agreement {:.4})", matrix.values[0][0])
    } else {
        String::new()
    };
    Ok(format!("{k}x{k} agreement matrix{diag} -> {}{baseline}", out.display()))
}

/// Renders the agreement, similarity and ranking outputs in the configured
/// format under `reports/out`.
pub fn report(cfg: &PipelineConfig) -> Result<String, CliError> {
    let stage = "report";
    let paths = StorePaths::new(&cfg.store_dir);
    let format = cfg.report_format().map_err(|e| e.at("config"))?;
    let ext = match format {
        ReportFormat::Csv => "csv",
        ReportFormat::Json => "json",
    };
    let out = paths.reports().join("out");
    let mut written = 0;

    let agreement: AgreementMatrix = read_json(stage, &paths.reports().join("agreement.json"), "newsprom agree")?;
    emit_report(Report::Matrix(&agreement), &out.join(format!("agreement.{ext}")), format).map_err(|e| e.at(stage))?;
    written += 1;

    let sim_path = paths.reports().join("similarity.json");
    if sim_path.is_file() {
        let sim: AgreementMatrix = read_json(stage, &sim_path, "newsprom agree")?;
        emit_report(Report::Matrix(&sim), &out.join(format!("similarity.{ext}")), format).map_err(|e| e.at(stage))?;
        written += 1;
    }

    let rankings = paths.rankings();
    let mut files = Vec::new();
    if rankings.is_dir() {
        for outlet in sorted_entries(stage, &rankings)? {
            if outlet.is_dir() {
                files.extend(sorted_entries(stage, &outlet)?.into_iter().filter(|p| p.extension().is_some_and(|x| x == "json")));
            }
        }
    }
    for file in files {
        let list: RankedList = read_json(stage, &file, "newsprom rank")?;
        let rel = file.strip_prefix(&rankings).expect("listed under rankings").with_extension(ext);
        emit_report(Report::Ranking(&list), &out.join("rankings").join(rel), format).map_err(|e| e.at(stage))?;
        written += 1;
    }
    Ok(format!("{written} report file(s) -> {}", out.display()))
}

fn sorted_entries(stage: &'static str, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(stage, dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    v.sort();
    Ok(v)
}
