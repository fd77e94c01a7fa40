//! Headline text cleaning: bylines, times, dates and separator glyphs are
//! removed so a comparator cannot key on them.
//!
//! Rules, applied in order:
//! 1. byline: `By <Capitalized name ...>` at the start of the text, after a
//!    separator or after a sentence end, up to the next separator or
//!    sentence end;
//! 2. relative times (`3 hours ago`);
//! 3. clock times (`12:34`, `5 PM`, `9:30 a.m. ET`);
//! 4. dates: ISO (`2023-05-04`), numeric (`5/4/2023`), month-name forms
//!    (`May 4, 2023`, `4 May 2023`, `Sept. 12`, `May 2023`), with an optional
//!    leading weekday;
//! 5. separators `|`, `•`, `·`, `▪`;
//! 6. tokens made only of leftover punctuation; whitespace collapse.

use once_cell::sync::Lazy;
use regex::Regex;

const MONTH: &str = r"(?:Jan(?:uary)?|Feb(?:ruary)?|Mar(?:ch)?|Apr(?:il)?|May|June?|July?|Aug(?:ust)?|Sep(?:t(?:ember)?)?|Oct(?:ober)?|Nov(?:ember)?|Dec(?:ember)?)\.?";
const WEEKDAY: &str = r"(?:(?:Mon|Tues?|Wed(?:nes)?|Thu(?:rs)?|Fri|Sat(?:ur)?|Sun)(?:day)?\.?,?\s+)?";

static BYLINE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(^|[|•·▪]\s*|[.!?]\s+)By\s+(?:[A-Z]\.\s*|[A-Z])(?:[A-Z]\.\s*|[^|•·▪.!?])*[.!?]?").unwrap()
});

static RELATIVE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)\b(?:\d+|an?|one)\s+(?:sec(?:ond)?|min(?:ute)?|h(?:ou)?r|day|week|month|year)s?\s+ago\b").unwrap()
});

static CLOCK: Lazy<Regex> = Lazy::new(|| {
    Regex::new(
        r"(?i)\b(?:\d{1,2}:\d{2}(?::\d{2})?(?:\s*[ap]\.?m\b\.?)?|\d{1,2}\s*[ap]\.?m\b\.?)(?:\s+(?:ET|EST|EDT|CT|CST|CDT|MT|PT|PST|PDT|GMT|UTC|BST)\b)?",
    )
    .unwrap()
});

static DATES: Lazy<Vec<Regex>> = Lazy::new(|| {
    vec![
        Regex::new(r"\b\d{4}-\d{2}-\d{2}(?:T\d{2}:\d{2}(?::\d{2})?Z?)?\b").unwrap(),
        Regex::new(r"\b\d{1,2}/\d{1,2}/\d{2,4}\b").unwrap(),
        Regex::new(&format!(r"\b{WEEKDAY}{MONTH}\s+\d{{1,2}}(?:st|nd|rd|th)?\b(?:,?\s+\d{{4}}\b)?")).unwrap(),
        Regex::new(&format!(r"\b{WEEKDAY}\d{{1,2}}(?:st|nd|rd|th)?\s+{MONTH}(?:,?\s+\d{{4}}\b)?")).unwrap(),
        Regex::new(&format!(r"\b{MONTH}\s+\d{{4}}\b")).unwrap(),
    ]
});

static SEPARATORS: Lazy<Regex> = Lazy::new(|| Regex::new(r"[|•·▪]").unwrap());

fn is_stray_punct(token: &str) -> bool {
    token
        .chars()
        .all(|c| matches!(c, ',' | ';' | ':' | '-' | '–' | '—' | '/' | '.'))
}

pub fn clean_text(raw: &str) -> String {
    let mut s = BYLINE.replace_all(raw, "$1").into_owned();
    s = RELATIVE.replace_all(&s, " ").into_owned();
    s = CLOCK.replace_all(&s, " ").into_owned();
    for re in DATES.iter() {
        s = re.replace_all(&s, " ").into_owned();
    }
    s = SEPARATORS.replace_all(&s, " ").into_owned();
    s.split_whitespace()
        .filter(|t| !is_stray_punct(t))
        .collect::<Vec<_>>()
        .join(" ")
}
