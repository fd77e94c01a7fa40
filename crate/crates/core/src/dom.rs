//! Minimal DOM tree and a tolerant HTML parser.
//!
//! The parser never fails. It auto-closes the usual implied end tags
//! (`<p>a<p>b` yields two sibling paragraphs), keeps unknown tags, and
//! stores `script`/`style` bodies as opaque text children. Whitespace-only
//! text runs, comments and doctypes are dropped, so node paths are stable
//! under reformatting of the source.

use std::fmt;

use serde::{Deserialize, Serialize};

pub const TEXT_TAG: &str = "#text";
pub const ROOT_TAG: &str = "#document";

/// Elements beyond this depth are attached as leaves.
const MAX_DEPTH: usize = 512;

const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param",
    "source", "track", "wbr",
];

const RAW_TEXT_ELEMENTS: &[&str] = &["script", "style", "textarea", "title", "xmp", "noscript"];

/// Start tags that implicitly close an open `<p>`.
const CLOSES_P: &[&str] = &[
    "address", "article", "aside", "blockquote", "details", "div", "dl", "fieldset",
    "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header",
    "hr", "main", "menu", "nav", "ol", "p", "pre", "section", "table", "ul",
];

const SCOPE_BOUNDARY: &[&str] = &[
    "applet", "button", "caption", "html", "marquee", "object", "table", "td", "template", "th",
];

const HEADINGS: &[&str] = &["h1", "h2", "h3", "h4", "h5", "h6"];

/// Block-level elements; text on either side of one is separated by a space
/// when a subtree is flattened.
pub(crate) const BLOCK_ELEMENTS: &[&str] = &[
    "address", "article", "aside", "blockquote", "br", "dd", "details", "div", "dl", "dt",
    "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6",
    "header", "hr", "li", "main", "nav", "ol", "p", "pre", "section", "table", "tbody", "td",
    "tfoot", "th", "thead", "tr", "ul",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomNode {
    pub tag: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<DomNode>,
    pub text: String,
}

impl DomNode {
    pub fn element(tag: impl Into<String>) -> Self {
        DomNode {
            tag: tag.into(),
            attrs: Vec::new(),
            children: Vec::new(),
            text: String::new(),
        }
    }

    pub fn text_node(text: impl Into<String>) -> Self {
        DomNode {
            tag: TEXT_TAG.to_string(),
            attrs: Vec::new(),
            children: Vec::new(),
            text: text.into(),
        }
    }

    pub fn root() -> Self {
        DomNode::element(ROOT_TAG)
    }

    pub fn with_attr(mut self, name: &str, value: &str) -> Self {
        self.attrs.push((name.to_string(), value.to_string()));
        self
    }

    pub fn with_child(mut self, child: DomNode) -> Self {
        self.children.push(child);
        self
    }

    pub fn is_text(&self) -> bool {
        self.tag == TEXT_TAG
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn get(&self, path: &NodePath) -> Option<&DomNode> {
        let mut node = self;
        for &i in &path.0 {
            node = node.children.get(i)?;
        }
        Some(node)
    }

    /// Number of nodes in the subtree, including `self`.
    pub fn node_count(&self) -> usize {
        let mut count = 0;
        self.walk(|_, _| count += 1);
        count
    }

    /// Number of element (non-text) nodes below `self`.
    pub fn element_count(&self) -> usize {
        let mut count = 0;
        self.walk(|path, node| {
            if !path.is_empty() && !node.is_text() {
                count += 1
            }
        });
        count
    }

    /// Pre-order traversal with the path of each node relative to `self`.
    pub fn walk<'a, F: FnMut(&NodePath, &'a DomNode)>(&'a self, mut f: F) {
        let mut stack: Vec<(NodePath, &'a DomNode)> = vec![(NodePath::root(), self)];
        while let Some((path, node)) = stack.pop() {
            f(&path, node);
            for (i, child) in node.children.iter().enumerate().rev() {
                stack.push((path.child(i), child));
            }
        }
    }
}

/// Child indices from the root. The derived ordering is lexicographic,
/// which coincides with document order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn child(&self, index: usize) -> Self {
        let mut v = self.0.clone();
        v.push(index);
        NodePath(v)
    }

    pub fn parent(&self) -> Option<NodePath> {
        if self.0.is_empty() {
            None
        } else {
            Some(NodePath(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    /// True if `self` is an ancestor-or-self of `other`.
    pub fn is_prefix_of(&self, other: &NodePath) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "/")?;
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("/"))
    }
}

/// Parses arbitrary bytes (decoded as lossy UTF-8) into a tree rooted at a
/// `#document` node. Input that looks binary (more than a tenth of its
/// characters are replacement or control characters) yields an empty root.
pub fn parse_html(bytes: &[u8]) -> DomNode {
    let source = String::from_utf8_lossy(bytes);
    if looks_binary(&source) {
        return DomNode::root();
    }
    let mut builder = TreeBuilder::new();
    Tokenizer::new(&source).run(&mut builder);
    builder.finish()
}

enum Token {
    Start {
        name: String,
        attrs: Vec<(String, String)>,
        self_closing: bool,
    },
    End(String),
    Text(String),
}

struct Tokenizer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Tokenizer<'a> {
    fn new(src: &'a str) -> Self {
        Tokenizer { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn run(mut self, sink: &mut TreeBuilder) {
        let mut text = String::new();
        while self.pos < self.src.len() {
            let rest = self.rest();
            if rest.starts_with('<') {
                if let Some((token, len)) = self.markup(rest) {
                    if !text.is_empty() {
                        sink.push(Token::Text(decode_entities(&text)));
                        text.clear();
                    }
                    self.pos += len;
                    if let Some(token) = token {
                        let raw_name = match &token {
                            Token::Start {
                                name,
                                self_closing: false,
                                ..
                            } if RAW_TEXT_ELEMENTS.contains(&name.as_str()) => Some(name.clone()),
                            _ => None,
                        };
                        sink.push(token);
                        if let Some(name) = raw_name {
                            self.raw_text(&name, sink);
                        }
                    }
                    continue;
                }
            }
            let ch = rest.chars().next().unwrap();
            text.push(ch);
            self.pos += ch.len_utf8();
        }
        if !text.is_empty() {
            sink.push(Token::Text(decode_entities(&text)));
        }
    }

    /// Consumes the body of a raw-text element up to its end tag.
    fn raw_text(&mut self, name: &str, sink: &mut TreeBuilder) {
        let rest = self.rest();
        let lower = rest.to_ascii_lowercase();
        let needle = format!("</{name}");
        let end = lower.find(&needle).unwrap_or(rest.len());
        let body = &rest[..end];
        if !body.is_empty() {
            let body = if name == "textarea" || name == "title" {
                decode_entities(body)
            } else {
                body.to_string()
            };
            sink.push(Token::Text(body));
        }
        self.pos += end;
        if self.pos < self.src.len() {
            let close = self.rest().find('>').map(|i| i + 1).unwrap_or(self.rest().len());
            self.pos += close;
            sink.push(Token::End(name.to_string()));
        }
    }

    /// Recognizes markup at the start of `rest`. Returns the token (None for
    /// comments and declarations) and its byte length, or None when the `<`
    /// does not open well-formed markup and must be read as text.
    fn markup(&self, rest: &str) -> Option<(Option<Token>, usize)> {
        if let Some(body) = rest.strip_prefix("<!--") {
            let len = body.find("-->").map(|i| i + 3).unwrap_or(body.len());
            return Some((None, 4 + len));
        }
        if rest.starts_with("<!") || rest.starts_with("<?") {
            let end = rest.find('>')?;
            if !clean_markup(&rest[..end]) {
                return None;
            }
            return Some((None, end + 1));
        }
        let (is_end, name_start) = if rest.starts_with("</") { (true, 2) } else { (false, 1) };
        let bytes = rest.as_bytes();
        if !bytes.get(name_start)?.is_ascii_alphabetic() {
            return None;
        }
        let mut i = name_start;
        while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'-' || bytes[i] == b':') {
            i += 1;
        }
        let name = rest[name_start..i].to_ascii_lowercase();
        match bytes.get(i) {
            Some(b) if b.is_ascii_whitespace() || *b == b'/' || *b == b'>' => {}
            _ => return None,
        }
        let (attrs, self_closing, consumed) = parse_attrs(&rest[i..])?;
        let len = i + consumed;
        if !clean_markup(&rest[..len]) {
            return None;
        }
        let token = if is_end {
            Token::End(name)
        } else {
            Token::Start {
                name,
                attrs,
                self_closing,
            }
        };
        Some((Some(token), len))
    }
}

/// Markup containing decoding replacement characters or control bytes is
/// treated as text; this is what keeps binary garbage from yielding elements.
fn clean_markup(s: &str) -> bool {
    !s.chars()
        .any(|c| c == char::REPLACEMENT_CHARACTER || (c.is_control() && !c.is_whitespace()))
}

fn looks_binary(s: &str) -> bool {
    let (mut total, mut bad) = (0usize, 0usize);
    for c in s.chars() {
        total += 1;
        if c == char::REPLACEMENT_CHARACTER || (c.is_control() && !c.is_whitespace()) {
            bad += 1;
        }
    }
    bad * 10 > total
}

type Attrs = Vec<(String, String)>;

/// Parses attributes up to and including the closing `>`.
fn parse_attrs(s: &str) -> Option<(Attrs, bool, usize)> {
    let bytes = s.as_bytes();
    let mut attrs: Vec<(String, String)> = Vec::new();
    let mut i = 0;
    let mut self_closing = false;
    loop {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        match bytes.get(i)? {
            b'>' => return Some((attrs, self_closing, i + 1)),
            b'/' => {
                self_closing = true;
                i += 1;
                continue;
            }
            _ => {}
        }
        self_closing = false;
        let start = i;
        while i < bytes.len()
            && !bytes[i].is_ascii_whitespace()
            && !matches!(bytes[i], b'=' | b'>' | b'/')
        {
            i += 1;
        }
        if i == start {
            // stray '=' or similar
            i += 1;
            continue;
        }
        let name = s[start..i].to_ascii_lowercase();
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let mut value = String::new();
        if bytes.get(i) == Some(&b'=') {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            match bytes.get(i)? {
                q @ (b'"' | b'\'') => {
                    let close = s[i + 1..].find(*q as char)?;
                    value = decode_entities(&s[i + 1..i + 1 + close]);
                    i += close + 2;
                }
                _ => {
                    let start = i;
                    while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'>' {
                        i += 1;
                    }
                    value = decode_entities(&s[start..i]);
                }
            }
        }
        if !attrs.iter().any(|(k, _)| *k == name) {
            attrs.push((name, value));
        }
    }
}

fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let semi = rest[1..].find(';').map(|i| i + 1).filter(|&i| i <= 10);
        let decoded = semi.and_then(|semi| decode_entity(&rest[1..semi]).map(|c| (c, semi)));
        match decoded {
            Some((c, semi)) => {
                out.push(c);
                rest = &rest[semi + 1..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn decode_entity(name: &str) -> Option<char> {
    if let Some(num) = name.strip_prefix('#') {
        let code = match num.strip_prefix(['x', 'X']) {
            Some(hex) => u32::from_str_radix(hex, 16).ok()?,
            None => num.parse().ok()?,
        };
        return char::from_u32(code);
    }
    Some(match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => '\u{a0}',
        "copy" => '\u{a9}',
        "reg" => '\u{ae}',
        "mdash" => '\u{2014}',
        "ndash" => '\u{2013}',
        "hellip" => '\u{2026}',
        "lsquo" => '\u{2018}',
        "rsquo" => '\u{2019}',
        "ldquo" => '\u{201c}',
        "rdquo" => '\u{201d}',
        "bull" => '\u{2022}',
        "middot" => '\u{b7}',
        _ => return None,
    })
}

struct TreeBuilder {
    /// Open elements; index 0 is the document root.
    stack: Vec<DomNode>,
}

impl TreeBuilder {
    fn new() -> Self {
        TreeBuilder {
            stack: vec![DomNode::root()],
        }
    }

    fn current(&mut self) -> &mut DomNode {
        self.stack.last_mut().expect("root is never popped")
    }

    fn pop(&mut self) {
        if self.stack.len() > 1 {
            let node = self.stack.pop().unwrap();
            self.current().children.push(node);
        }
    }

    fn pop_through(&mut self, index: usize) {
        while self.stack.len() > index {
            self.pop();
        }
    }

    /// Finds an open element named `name` without crossing a boundary tag.
    fn in_scope(&self, name: &str, boundary: &[&str]) -> Option<usize> {
        for (i, node) in self.stack.iter().enumerate().skip(1).rev() {
            if node.tag == name {
                return Some(i);
            }
            if boundary.contains(&node.tag.as_str()) {
                return None;
            }
        }
        None
    }

    fn close_if_open(&mut self, name: &str, boundary: &[&str]) {
        if let Some(i) = self.in_scope(name, boundary) {
            self.pop_through(i);
        }
    }

    fn push(&mut self, token: Token) {
        match token {
            Token::Text(text) => {
                if text.chars().all(char::is_whitespace) {
                    return;
                }
                let current = self.current();
                match current.children.last_mut() {
                    Some(last) if last.is_text() => last.text.push_str(&text),
                    _ => current.children.push(DomNode::text_node(text)),
                }
            }
            Token::Start {
                name,
                attrs,
                self_closing,
            } => {
                self.implied_end_tags(&name);
                let node = DomNode {
                    tag: name,
                    attrs,
                    children: Vec::new(),
                    text: String::new(),
                };
                let leaf = self_closing
                    || VOID_ELEMENTS.contains(&node.tag.as_str())
                    || self.stack.len() > MAX_DEPTH;
                if leaf {
                    self.current().children.push(node);
                } else {
                    self.stack.push(node);
                }
            }
            Token::End(name) => {
                if let Some(i) = self.stack.iter().skip(1).rposition(|n| n.tag == name) {
                    self.pop_through(i + 1);
                }
            }
        }
    }

    fn implied_end_tags(&mut self, name: &str) {
        if CLOSES_P.contains(&name) {
            self.close_if_open("p", SCOPE_BOUNDARY);
        }
        match name {
            "li" => self.close_if_open("li", &["ol", "ul", "table", "td", "th"]),
            "dt" | "dd" => {
                self.close_if_open("dt", &["dl", "table"]);
                self.close_if_open("dd", &["dl", "table"]);
            }
            "option" => self.close_if_open("option", &["select", "datalist"]),
            "tr" => {
                self.close_if_open("td", &["table", "tr"]);
                self.close_if_open("th", &["table", "tr"]);
                self.close_if_open("tr", &["table"]);
            }
            "td" | "th" => {
                self.close_if_open("td", &["table", "tr"]);
                self.close_if_open("th", &["table", "tr"]);
            }
            "a" => self.close_if_open("a", SCOPE_BOUNDARY),
            _ => {}
        }
        if HEADINGS.contains(&name) {
            if let Some(tag) = self.stack.last().map(|n| n.tag.clone()) {
                if HEADINGS.contains(&tag.as_str()) {
                    self.pop();
                }
            }
        }
    }

    fn finish(mut self) -> DomNode {
        self.pop_through(1);
        self.stack.pop().unwrap()
    }
}
