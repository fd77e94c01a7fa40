//! Acceptance suite. Runs every criterion at its stated tolerance, prints
//! one PASS/FAIL line each and exits nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use newsprom::cards::{extract_cards_with, AnchorMode, ExtractOptions};
use newsprom::comparator::{self, model_to_bytes, symmetrize, Comparator, Hyper};
use newsprom::dom::{parse_html, DomNode, NodePath};
use newsprom::eval::{evaluate_extraction, ErrorReport, DEFAULT_IOU_MATCH};
use newsprom::layout::{prominence_features, GeometryMap, ProminenceFeatures, Rect};
use newsprom::links::{classify_link, LinkRules};
use newsprom::pairs::{
    adjacency_graph, build_pairs_indexed, label_pair, split_dataset, Criterion, PreferencePair, SnapshotCards,
};
use newsprom::ranker::{kendall_tau, round_robin_scores, sort_items, Item, Outlet};
use newsprom::store::LinkRecord;
use newsprom::ArticleCard;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64())
    })
}

fn main() {
    let criteria: [(&str, Check); 7] = [
        ("1 extraction invariants vs brute-force oracle", c1_extraction_oracle),
        ("2 failure-mode reproduction and error buckets", c2_failure_modes),
        ("3 kendall tau vs O(n^2) brute force", c3_kendall_tau),
        ("4 pair-builder antisymmetry, relabeling, no leakage", c4_pairs),
        ("5 comparator F1, antisymmetry, determinism", c5_comparator),
        ("6 Borda ranking order and round-robin runtime", c6_ranker),
        ("7 end-to-end pipeline from one config file", c7_pipeline),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS [{name}] {detail} ({secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{name}] {detail} ({secs:.2}s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- 1

struct PageGen {
    rng: ChaCha8Rng,
    budget: usize,
    story: usize,
}

impl PageGen {
    fn node(&mut self, depth: usize, out: &mut String) {
        if self.budget == 0 {
            return;
        }
        self.budget -= 1;
        self.story += 1;
        let roll = self.rng.gen_range(0..10);
        if depth >= 5 || roll < 3 {
            let href = match self.rng.gen_range(0..6) {
                0 => format!("https://news.test/author/writer-{}", self.story),
                1 => "https://news.test/subscribe".to_string(),
                _ => format!("https://news.test/2024/04/{:02}/story-{}", self.rng.gen_range(1..29), self.story),
            };
            let text = if self.rng.gen_bool(0.1) { String::new() } else { format!("Headline {}", self.story) };
            out.push_str(&format!("<a href=\"{href}\">{text}</a>"));
        } else if roll < 5 {
            out.push_str(&format!("<p>words {}</p>", self.rng.gen::<u16>()));
        } else if roll < 6 {
            out.push_str("<img src=\"i.jpg\">");
        } else {
            let tag = ["div", "section", "article", "ul", "li"][self.rng.gen_range(0..5)];
            out.push_str(&format!("<{tag}>"));
            for _ in 0..self.rng.gen_range(1..5) {
                self.node(depth + 1, out);
            }
            out.push_str(&format!("</{tag}>"));
        }
    }
}

fn synthetic_page(seed: u64) -> (DomNode, Vec<LinkRecord>) {
    let mut g = PageGen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        budget: 55,
        story: 0,
    };
    let mut body = String::new();
    while g.budget > 0 {
        g.node(0, &mut body);
    }
    let dom = parse_html(format!("<html><body>{body}</body></html>").as_bytes());
    let mut links = Vec::new();
    dom.walk(|_, n| {
        if n.tag == "a" {
            links.push(LinkRecord {
                url: n.attr("href").unwrap().to_string(),
                text: "link".into(),
            });
        }
    });
    (dom, links)
}

fn has_text(node: &DomNode) -> bool {
    if node.is_text() {
        return !node.text.trim().is_empty();
    }
    node.children.iter().any(has_text)
}

fn is_qualifying(n: &DomNode) -> bool {
    n.tag == "a" && classify_link(n.attr("href").unwrap_or(""), "").is_news() && has_text(n)
}

fn subtree_count(dom: &DomNode, path: &NodePath) -> usize {
    let mut k = 0;
    dom.get(path).unwrap().walk(|_, d| k += usize::from(is_qualifying(d)));
    k
}

/// Every element subtree enumerated and its qualifying anchors counted
/// from scratch; cards are the subtrees with exactly one whose parent has
/// two or more (or is a page container).
fn oracle(dom: &DomNode) -> BTreeSet<NodePath> {
    let page = |t: &str| matches!(t, "#document" | "html" | "body");
    let mut elements = Vec::new();
    dom.walk(|p, n| {
        if !n.is_text() {
            elements.push((p.clone(), n.tag.clone()));
        }
    });
    elements
        .into_iter()
        .filter(|(p, tag)| {
            if page(tag) || subtree_count(dom, p) != 1 {
                return false;
            }
            let parent = p.parent().unwrap();
            page(&dom.get(&parent).unwrap().tag) || subtree_count(dom, &parent) >= 2
        })
        .map(|(p, _)| p)
        .collect()
}

fn c1_extraction_oracle() -> Result<String, String> {
    let start = Instant::now();
    let (mut pages, mut seed, mut cards_total) = (0, 0u64, 0);
    while pages < 50 {
        seed += 1;
        let (dom, links) = synthetic_page(seed);
        if dom.node_count() > 200 {
            continue;
        }
        pages += 1;
        let expected = oracle(&dom);
        let cards = extract_cards_with(&dom, &links, &LinkRules::default(), &ExtractOptions::default())
            .unwrap_or_default();
        let got: BTreeSet<NodePath> = cards.iter().map(|c| c.card_path.clone()).collect();
        ensure(got == expected, || format!("seed {seed}: cards {got:?} != oracle {expected:?}"))?;
        for (i, a) in cards.iter().enumerate() {
            ensure(subtree_count(&dom, &a.card_path) == 1, || format!("seed {seed}: {} not unique", a.card_path))?;
            for b in &cards[i + 1..] {
                ensure(
                    !a.card_path.is_prefix_of(&b.card_path) && !b.card_path.is_prefix_of(&a.card_path),
                    || format!("seed {seed}: {} and {} overlap", a.card_path, b.card_path),
                )?;
            }
        }
        let mut anchors = Vec::new();
        dom.walk(|p, n| {
            if is_qualifying(n) {
                anchors.push(p.clone())
            }
        });
        for anchor in anchors {
            let holders = cards.iter().filter(|c| c.card_path.is_prefix_of(&anchor)).count();
            ensure(holders == 1, || format!("seed {seed}: anchor {anchor} in {holders} cards"))?;
        }
        cards_total += cards.len();
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("{pages} pages, {cards_total} cards, 100% oracle agreement"))
}

// ---------------------------------------------------------------- 2

/// A page of article blocks stacked 300 px apart, with a sidecar-style
/// geometry for every element; `authors[k]` puts an author link inside
/// article k.
fn author_page(authors: &[bool]) -> (DomNode, Vec<LinkRecord>, GeometryMap, Vec<Rect>) {
    let mut html = String::from("<html><body><main>");
    let mut links = Vec::new();
    for (k, &author) in authors.iter().enumerate() {
        let url = format!("https://daily.test/2024/05/0{}/story-number-{k}", k % 9 + 1);
        html.push_str(&format!(
            "<article><img src=\"p{k}.jpg\"><h2><a href=\"{url}\">Story {k} headline</a></h2><p class=\"summary\">Summary of story {k}.</p>"
        ));
        links.push(LinkRecord {
            url,
            text: format!("Story {k} headline"),
        });
        if author {
            let a = format!("https://daily.test/author/writer-{k}");
            html.push_str(&format!("<p class=\"byline\">By <a href=\"{a}\">Writer {k}</a></p>"));
            links.push(LinkRecord {
                url: a,
                text: format!("Writer {k}"),
            });
        }
        html.push_str("</article>");
    }
    html.push_str("</main></body></html>");
    let dom = parse_html(html.as_bytes());
    let n = authors.len() as f64;
    let mut entries = BTreeMap::new();
    let mut gold = Vec::new();
    dom.walk(|path, node| {
        if node.is_text() {
            return;
        }
        // the article index is the child position under <main> at /0/0/0
        let rect = if path.0.len() <= 3 {
            Rect::new(0.0, 0.0, 1280.0, 300.0 * n)
        } else {
            let y = 300.0 * path.0[3] as f64;
            match path.0.len() {
                4 => Rect::new(0.0, y, 1280.0, 300.0),
                _ => match dom.get(&NodePath(path.0[..5].to_vec())).unwrap().tag.as_str() {
                    "img" => Rect::new(0.0, y, 1280.0, 180.0),
                    "h2" => Rect::new(0.0, y + 180.0, 1280.0, 40.0),
                    "p" if path.0[4] == 2 => Rect::new(0.0, y + 220.0, 1280.0, 60.0),
                    _ => Rect::new(0.0, y + 280.0, 1280.0, 20.0),
                },
            }
        };
        if path.0.len() == 4 {
            gold.push(rect);
        }
        entries.insert(path.clone(), rect);
    });
    let geo = GeometryMap {
        entries,
        viewport_w: 1280,
        page_h: (300.0 * n) as u32,
    };
    (dom, links, geo, gold)
}

fn page_report(dom: &DomNode, links: &[LinkRecord], geo: &GeometryMap, gold: &[Rect], mode: AnchorMode) -> ErrorReport {
    let opts = ExtractOptions {
        mode,
        base_url: None,
    };
    let cards = extract_cards_with(dom, links, &LinkRules::default(), &opts).unwrap();
    let pred: Vec<Rect> = cards.iter().map(|c| geo.entries[&c.card_path]).collect();
    evaluate_extraction(&pred, gold, DEFAULT_IOU_MATCH).unwrap()
}

fn sq(x: f64, y: f64) -> Rect {
    Rect::new(x, y, 100.0, 100.0)
}

fn r(x: f64, y: f64, w: f64, h: f64) -> Rect {
    Rect::new(x, y, w, h)
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Bucket {
    Fp1,
    Fp2,
    Fn1,
    Fn2,
}

/// Hand-labeled cases: (predicted, gold, intended bucket, expected
/// (fp_multi, fp_empty, fn_partial, fn_missed)). Gold boxes are 100x100.
type Case = (Vec<Rect>, Vec<Rect>, Bucket, (usize, usize, usize, usize));

fn error_cases() -> Vec<Case> {
    use Bucket::*;
    vec![
        // one box over two side-by-side articles; IoU 1/3 with each
        (vec![r(0., 0., 300., 100.)], vec![sq(0., 0.), sq(200., 0.)], Fp1, (1, 0, 2, 0)),
        // same, stacked vertically
        (vec![r(0., 0., 100., 300.)], vec![sq(0., 0.), sq(0., 200.)], Fp1, (1, 0, 2, 0)),
        // one box over three articles; IoU 1/9 with each
        (vec![r(0., 0., 300., 300.)], vec![sq(0., 0.), sq(200., 0.), sq(0., 200.)], Fp1, (1, 0, 3, 0)),
        // one exact box plus one spanning the other two
        (
            vec![sq(0., 0.), r(200., 0., 100., 300.)],
            vec![sq(0., 0.), sq(200., 0.), sq(200., 200.)],
            Fp1,
            (1, 0, 2, 0),
        ),
        // box matches the first article (IoU 2/3) and clips 10 px of the next
        (vec![r(0., 0., 150., 100.)], vec![sq(0., 0.), sq(140., 0.)], Fp1, (1, 0, 1, 0)),
        // stray box far from every article
        (vec![sq(0., 0.), sq(500., 500.)], vec![sq(0., 0.)], Fp2, (0, 1, 0, 0)),
        // thin banner in the gutter below an article
        (vec![sq(0., 0.), r(0., 150., 300., 20.)], vec![sq(0., 0.)], Fp2, (0, 1, 0, 0)),
        // two stray boxes
        (
            vec![sq(0., 0.), sq(200., 0.), sq(400., 400.), sq(600., 600.)],
            vec![sq(0., 0.), sq(200., 0.)],
            Fp2,
            (0, 2, 0, 0),
        ),
        // box in the gap, touching both articles' edges only
        (vec![sq(100., 0.)], vec![sq(0., 0.), sq(200., 0.)], Fp2, (0, 1, 0, 2)),
        // box sharing only an edge with the matched article
        (vec![sq(0., 0.), r(0., 100., 100., 50.)], vec![sq(0., 0.)], Fp2, (0, 1, 0, 0)),
        // headline strip only: IoU 0.4
        (vec![r(0., 0., 100., 40.)], vec![sq(0., 0.)], Fn1, (0, 0, 1, 0)),
        // just under the threshold: IoU 0.49
        (vec![r(0., 0., 100., 49.)], vec![sq(0., 0.)], Fn1, (0, 0, 1, 0)),
        // article split into two boxes of IoU 0.4 each
        (vec![r(0., 0., 100., 40.), r(0., 60., 100., 40.)], vec![sq(0., 0.)], Fn1, (0, 0, 1, 0)),
        // shifted box: IoU 2500/17500
        (vec![r(50., 50., 100., 100.)], vec![sq(0., 0.)], Fn1, (0, 0, 1, 0)),
        // second article captured as a 30 px sliver: IoU 0.3
        (vec![sq(0., 0.), r(200., 0., 30., 100.)], vec![sq(0., 0.), sq(200., 0.)], Fn1, (0, 0, 1, 0)),
        // nothing predicted
        (vec![], vec![sq(0., 0.)], Fn2, (0, 0, 0, 1)),
        (vec![sq(0., 0.)], vec![sq(0., 0.), sq(200., 0.)], Fn2, (0, 0, 0, 1)),
        (vec![sq(0., 0.)], vec![sq(0., 0.), sq(200., 0.), sq(0., 200.)], Fn2, (0, 0, 0, 2)),
        (
            vec![sq(0., 0.), sq(200., 0.)],
            vec![sq(0., 0.), sq(200., 0.), sq(400., 0.)],
            Fn2,
            (0, 0, 0, 1),
        ),
        (vec![sq(200., 0.)], vec![sq(0., 0.), sq(200., 0.)], Fn2, (0, 0, 0, 1)),
    ]
}

fn c2_failure_modes() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut affected = 0;
    for page in 0..20 {
        let n = rng.gen_range(2..7);
        let mut authors: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        if page % 4 == 0 {
            authors.iter_mut().for_each(|a| *a = false);
        }
        let (dom, links, geo, gold) = author_page(&authors);
        let plain = page_report(&dom, &links, &geo, &gold, AnchorMode::AllAnchors);
        let qual = page_report(&dom, &links, &geo, &gold, AnchorMode::Qualifying);
        ensure(qual.fn_partial == 0 && qual.total_errors() == 0, || {
            format!("page {page}: qualifying mode errors {qual:?}")
        })?;
        let n_authors = authors.iter().filter(|a| **a).count();
        if n_authors > 0 {
            affected += 1;
            ensure(plain.fn_partial >= 1, || format!("page {page}: plain mode has no FN-partial: {plain:?}"))?;
        }
        ensure(plain.fn_partial == n_authors, || {
            format!("page {page}: {n_authors} author links but {} FN-partial", plain.fn_partial)
        })?;
    }

    let cases = error_cases();
    ensure(cases.len() == 20, || format!("{} cases", cases.len()))?;
    for (i, (pred, gold, bucket, want)) in cases.iter().enumerate() {
        let rep = evaluate_extraction(pred, gold, DEFAULT_IOU_MATCH).unwrap();
        let got = (rep.fp_multi, rep.fp_empty, rep.fn_partial, rep.fn_missed);
        ensure(got == *want, || format!("case {}: got {got:?}, hand label {want:?}", i + 1))?;
        let hit = match bucket {
            Bucket::Fp1 => rep.fp_multi,
            Bucket::Fp2 => rep.fp_empty,
            Bucket::Fn1 => rep.fn_partial,
            Bucket::Fn2 => rep.fn_missed,
        };
        ensure(hit > 0, || format!("case {}: intended bucket {bucket:?} is empty", i + 1))?;
    }
    Ok(format!(
        "{affected} author-link pages: plain mode FN-partial on each, qualifying mode 0 errors; 20/20 error cases bucketed as labeled"
    ))
}

// ---------------------------------------------------------------- 3

fn brute_tau(a: &[u32], b: &[u32]) -> f64 {
    let mut pos_b = vec![0usize; a.len()];
    for (i, &x) in b.iter().enumerate() {
        pos_b[x as usize] = i;
    }
    let (mut c, mut d) = (0i64, 0i64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if pos_b[a[i] as usize] < pos_b[a[j] as usize] {
                c += 1
            } else {
                d += 1
            }
        }
    }
    let n = a.len() as i64;
    (c - d) as f64 / (n * (n - 1) / 2) as f64
}

fn c3_kendall_tau() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..1000 {
        let n = rng.gen_range(2..=200u32);
        let mut a: Vec<u32> = (0..n).collect();
        let mut b = a.clone();
        a.shuffle(&mut rng);
        b.shuffle(&mut rng);
        let fast = kendall_tau(&a, &b).unwrap();
        let slow = brute_tau(&a, &b);
        ensure(fast == slow, || format!("trial {trial} (n={n}): {fast} != {slow}"))?;
        let rev: Vec<u32> = a.iter().rev().copied().collect();
        ensure(kendall_tau(&a, &a).unwrap() == 1.0, || format!("trial {trial}: tau(x,x) != 1"))?;
        ensure(kendall_tau(&a, &rev).unwrap() == -1.0, || format!("trial {trial}: tau(x,rev x) != -1"))?;
    }
    within(start.elapsed(), 5.0)?;
    Ok("1000/1000 permutation pairs exact; tau(x,x)=1 and tau(x,rev x)=-1 throughout".into())
}

// ---------------------------------------------------------------- 4

/// A random grid page: cards on a 6-column lattice with varied spans.
fn random_snapshot(rng: &mut ChaCha8Rng, id: usize) -> SnapshotCards {
    let n = rng.gen_range(4..16);
    let mut cards = Vec::new();
    let mut rects = Vec::new();
    let mut y = 0.0;
    while cards.len() < n {
        let cols = rng.gen_range(1..=4);
        let h = [120.0, 200.0, 320.0][rng.gen_range(0..3)];
        for c in 0..cols {
            if cards.len() == n {
                break;
            }
            let w = 1200.0 / cols as f64;
            let k = cards.len();
            rects.push(Rect::new(c as f64 * w, y, w - 10.0, h - rng.gen_range(0..3) as f64 * 20.0));
            cards.push(ArticleCard {
                card_path: NodePath(vec![0, k]),
                anchor_url: format!("https://x.test/{id}/{k}"),
                headline_text: format!("story {k}"),
                full_text: format!("story {k} of snapshot {id} words {}", rng.gen::<u16>()),
                image_count: rng.gen_range(0..2),
            });
        }
        y += h + rng.gen_range(0..3) as f64 * 30.0;
    }
    let geo = GeometryMap {
        entries: cards.iter().zip(&rects).map(|(c, r)| (c.card_path.clone(), *r)).collect(),
        viewport_w: 1200,
        page_h: y as u32,
    };
    let features = prominence_features(&cards, &geo, 100.0).unwrap();
    SnapshotCards::new(&format!("snap{id:04}"), "outlet", &cards, &rects, &features)
}

fn c4_pairs() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let criteria = [Criterion::Size, Criterion::Position, Criterion::Combined];
    let mut all: Vec<PreferencePair> = Vec::new();
    let mut relabeled = 0;
    let mut id = 0;
    while all.len() < 10_000 {
        let snap = random_snapshot(&mut rng, id);
        let criterion = criteria[id % 3];
        id += 1;
        let rects: Vec<Rect> = snap.cards.iter().map(|c| c.rect).collect();
        let edges: BTreeSet<(usize, usize)> = adjacency_graph(&rects, 50.0).into_iter().collect();
        let out = build_pairs_indexed(&snap, criterion, 50.0);
        let mut seen: HashMap<(usize, usize), u8> = HashMap::new();
        for (i, j, p) in &out {
            ensure(i != j, || format!("{}: self pair on card {i}", p.snapshot_id))?;
            ensure(edges.contains(&(*i.min(j), *i.max(j))), || {
                format!("{}: pair ({i},{j}) is not adjacent", p.snapshot_id)
            })?;
            ensure(seen.insert((*i, *j), p.label).is_none(), || format!("{}: duplicate ({i},{j})", p.snapshot_id))?;
        }
        for (&(i, j), &l) in &seen {
            ensure(seen.get(&(j, i)) == Some(&(1 - l)), || format!("snap {id}: ({i},{j}) has no mirror"))?;
        }
        // features as persisted and read back
        let stored: Vec<ProminenceFeatures> = snap
            .cards
            .iter()
            .map(|c| serde_json::from_str(&serde_json::to_string(&c.features).unwrap()).unwrap())
            .collect();
        for (i, j, p) in &out {
            ensure(label_pair(&stored[*i], &stored[*j], criterion) == Some(p.label), || {
                format!("{}: relabel mismatch on ({i},{j})", p.snapshot_id)
            })?;
            relabeled += 1;
        }
        all.extend(out.into_iter().map(|(_, _, p)| p));
    }
    let n = all.len();
    let (train, test) = split_dataset(all, 0.8, 4).unwrap();
    let train_ids: BTreeSet<&str> = train.pairs.iter().map(|p| p.snapshot_id.as_str()).collect();
    let leaked = test.pairs.iter().filter(|p| train_ids.contains(p.snapshot_id.as_str())).count();
    ensure(leaked == 0, || format!("{leaked} test pairs share a snapshot with train"))?;
    Ok(format!(
        "{n} pairs from {id} snapshots: every pair mirrored once, {relabeled} relabeled with 0 mismatches, 0 shared snapshot ids"
    ))
}

// ---------------------------------------------------------------- 5

const VOCAB: &[&str] = &[
    "council", "budget", "river", "bridge", "school", "court", "storm", "harbor", "museum", "transit", "clinic",
    "market", "farm", "union", "library", "airport", "festival", "approves", "delays", "opens", "closes", "funds",
    "local", "state", "new", "long", "quiet", "regional",
];

fn filler(rng: &mut ChaCha8Rng) -> Vec<String> {
    (0..rng.gen_range(3..9)).map(|_| VOCAB[rng.gen_range(0..VOCAB.len())].to_string()).collect()
}

/// Preferred texts carry the token `exclusive`; the others never do.
fn separable_pairs(n: usize, seed: u64) -> Vec<PreferencePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let mut win = filler(&mut rng);
            let at = rng.gen_range(0..=win.len());
            win.insert(at, "exclusive".into());
            let lose = filler(&mut rng);
            let (a, b, label) = if rng.gen_bool(0.5) { (win, lose, 1) } else { (lose, win, 0) };
            PreferencePair {
                text_a: a.join(" "),
                text_b: b.join(" "),
                label,
                criterion: Criterion::Size,
                outlet_id: "synthetic".into(),
                snapshot_id: format!("s{:03}", k / 25),
            }
        })
        .collect()
}

fn c5_comparator() -> Result<String, String> {
    let pairs = separable_pairs(5000, 5);
    let (train, test) = split_dataset(pairs, 0.8, 5).unwrap();
    let hyper = Hyper::default();
    let model = comparator::train(&train.pairs, &hyper).unwrap();
    let metrics = comparator::evaluate(&model, &test.pairs).unwrap();
    ensure(metrics.f1 >= 0.95, || format!("held-out F1 {:.4} < 0.95", metrics.f1))?;
    let f1 = 2.0 * metrics.precision * metrics.recall / (metrics.precision + metrics.recall);
    ensure((f1 - metrics.f1).abs() < 1e-12, || "f1 inconsistent with precision/recall".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for i in 0..10_000 {
        let a = filler(&mut rng).join(" ");
        let mut b = filler(&mut rng);
        if i % 3 == 0 {
            b.push("exclusive".into());
        }
        let b = b.join(" ");
        let (p, q) = (model.predict(&a, &b), model.predict(&b, &a));
        ensure(p + q == 1.0, || format!("p({a:?},{b:?}) + p(b,a) = {}", p + q))?;
    }

    let mut flips = 0;
    for k in 0..100 {
        let a = filler(&mut rng).join(" ");
        let b = filler(&mut rng).join(" ");
        let before = model.predict(&a, &b) >= 0.5;
        let boosted = if before { format!("{b} exclusive") } else { format!("{a} exclusive") };
        let after = if before { model.predict(&a, &boosted) >= 0.5 } else { model.predict(&boosted, &b) >= 0.5 };
        ensure(before != after, || format!("monotone case {k}: adding the decisive token did not flip"))?;
        flips += 1;
    }

    let again = comparator::train(&train.pairs, &hyper).unwrap();
    ensure(model_to_bytes(&model) == model_to_bytes(&again), || "retraining changed model bytes".into())?;
    let bits = |m: &comparator::ComparatorModel| m.weights.iter().map(|w| w.to_bits()).collect::<Vec<_>>();
    ensure(bits(&model) == bits(&again) && model.bias.to_bits() == again.bias.to_bits(), || {
        "retraining changed weights".into()
    })?;
    Ok(format!(
        "held-out F1 {:.4} on {} pairs; 10000/10000 exact antisymmetry; {flips}/100 monotone flips; bitwise-identical retrain",
        metrics.f1, metrics.n
    ))
}

// ---------------------------------------------------------------- 6

/// Texts are numbers; larger numbers are preferred.
struct ByValue;

impl Comparator for ByValue {
    type Prepared = f64;

    fn prepare(&self, text: &str) -> f64 {
        text.parse().unwrap()
    }

    fn predict_prepared(&self, a: &f64, b: &f64) -> f64 {
        let s = |d: f64| 1.0 / (1.0 + (-d).exp());
        symmetrize(s(a - b), s(b - a))
    }
}

impl Outlet for ByValue {
    fn outlet_id(&self) -> &str {
        "by-value"
    }
}

fn c6_ranker() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 1..=50 {
        let mut values: Vec<u32> = (0..1000).collect();
        values.shuffle(&mut rng);
        let items: Vec<Item> = values[..n]
            .iter()
            .enumerate()
            .map(|(i, v)| Item {
                id: format!("item{i:02}"),
                text: v.to_string(),
            })
            .collect();
        let mut induced = items.clone();
        induced.sort_by_key(|i| std::cmp::Reverse(i.text.parse::<u32>().unwrap()));
        let induced: Vec<String> = induced.into_iter().map(|i| i.id).collect();
        let ranked = sort_items(&ByValue, &items);
        ensure(ranked.item_ids == induced, || format!("n={n}: Borda order differs from induced order"))?;
    }

    let pairs = separable_pairs(2000, 66);
    let model = comparator::train(&pairs, &Hyper::default()).unwrap();
    let items: Vec<Item> = (0..1000)
        .map(|i| Item {
            id: format!("a{i:04}"),
            text: filler(&mut rng).join(" "),
        })
        .collect();
    let start = Instant::now();
    let scores = round_robin_scores(&model, &items);
    let elapsed = start.elapsed();
    within(elapsed, 60.0)?;
    let total: f64 = scores.iter().sum();
    ensure(total == 1000.0 * 999.0 / 2.0, || format!("Borda points sum to {total}"))?;
    Ok(format!(
        "Borda = induced order for n = 1..50; 1000-item round robin in {:.2}s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 7

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn run_stage(config: &Path, store: &Path, jobs: usize, stage: &str) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_newsprom"))
        .arg("--config")
        .arg(config)
        .arg("--store-dir")
        .arg(store)
        .arg("--jobs")
        .arg(jobs.to_string())
        .arg(stage)
        .output()
        .map_err(|e| format!("spawn: {e}"))?;
    if !out.status.success() {
        return Err(format!("{stage} failed: {}", String::from_utf8_lossy(&out.stderr).trim()));
    }
    Ok(String::from_utf8_lossy(&out.stdout).trim().to_string())
}

fn tree_bytes(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn c7_pipeline() -> Result<String, String> {
    let start = Instant::now();
    let config = fixture_dir().join("pipeline.toml");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let stages = ["ingest", "extract", "pairs", "train", "eval", "rank", "agree", "report"];
    let mut summaries = Vec::new();
    for (run, jobs) in [(0, 1), (1, 4)] {
        let store = tmp.path().join(format!("run{run}"));
        for stage in stages {
            let line = run_stage(&config, &store, jobs, stage)?;
            if run == 0 {
                summaries.push(line);
            }
        }
    }
    let a = tree_bytes(&tmp.path().join("run0"));
    let b = tree_bytes(&tmp.path().join("run1"));
    ensure(a.keys().eq(b.keys()), || "runs wrote different file sets".into())?;
    for (path, bytes) in &a {
        ensure(b[path] == *bytes, || format!("{} differs between runs", path.display()))?;
    }
    ensure(summaries[1].starts_with("10 snapshots, "), || format!("extract summary: {}", summaries[1]))?;
    let agreement: serde_json::Value =
        serde_json::from_slice(&a[Path::new("reports/agreement.json")]).map_err(|e| e.to_string())?;
    let values = agreement["values"].as_array().unwrap();
    ensure(values.len() == 1 && values[0].as_array().unwrap().len() == 1, || "matrix is not 1x1".into())?;
    ensure(values[0][0].as_f64() == Some(1.0), || format!("self-agreement {}", values[0][0]))?;
    let f1: f64 = summaries[4]
        .split_whitespace()
        .find_map(|t| t.strip_prefix("f1="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| format!("no f1 in eval summary: {}", summaries[4]))?;
    ensure(f1 >= 0.95, || format!("fixture F1 {f1} < 0.95"))?;
    within(start.elapsed(), 120.0)?;
    Ok(format!(
        "{} stage files byte-identical across --jobs 1 and 4; extract: {}; eval f1 {f1:.4}; self-agreement 1.0",
        a.len(),
        summaries[1]
    ))
}
