//! Snyk-style markdown advisories: the first-order body and its reference links.
//!
//! Heading lines (first non-blank character `#`) and reference lines (first
//! non-blank character `-`) are not part of the body. A reference line whose
//! link target wraps onto following lines owns those lines too, up to the
//! closing parenthesis.

use std::sync::LazyLock;

use regex::Regex;

static INLINE_LINK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\[([^\[\]]*)\]\(([^()\s]*)\)").unwrap());

static BARE_URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"https?://[^\s()<>\[\]]+").unwrap());

#[derive(Debug, PartialEq)]
enum LineKind {
    Body,
    Heading,
    Reference,
}

/// Logical lines of a report: physical lines, except that a reference line with
/// an unterminated `](` is joined (without separator) with its continuation lines.
fn logical_lines(report: &str) -> Vec<(LineKind, String)> {
    let mut out = Vec::new();
    let mut lines = report.lines();
    while let Some(line) = lines.next() {
        let kind = match line.trim_start().chars().next() {
            Some('#') => LineKind::Heading,
            Some('-') => LineKind::Reference,
            _ => LineKind::Body,
        };
        let mut joined = line.to_string();
        if kind == LineKind::Reference {
            while has_open_target(&joined) {
                match lines.next() {
                    Some(next) => joined.push_str(next.trim()),
                    None => break,
                }
            }
        }
        out.push((kind, joined));
    }
    out
}

fn has_open_target(line: &str) -> bool {
    match line.rfind("](") {
        Some(pos) => !line[pos + 2..].contains(')'),
        None => false,
    }
}

/// Replace `[text](url)` with `text`.
pub fn reduce_links(line: &str) -> String {
    INLINE_LINK.replace_all(line, "$1").into_owned()
}

/// The advisory's own prose with headings, reference lines and link targets removed.
pub fn extract_first_order(report: &str) -> String {
    let body: Vec<String> = logical_lines(report)
        .into_iter()
        .filter(|(kind, _)| *kind == LineKind::Body)
        .map(|(_, line)| reduce_links(&line))
        // link reduction can expose a leading '#' or '-' ("[- x](y)")
        .filter(|line| !matches!(line.trim_start().chars().next(), Some('#' | '-')))
        .collect();
    body.join("\n").trim().to_string()
}

/// URLs on reference lines, both `[text](url)` targets and bare URLs, in
/// document order. Links inside body prose are not references.
pub fn extract_links(report: &str) -> Vec<String> {
    let mut urls = Vec::new();
    for (kind, line) in logical_lines(report) {
        if kind != LineKind::Reference {
            continue;
        }
        let mut covered = Vec::new();
        let mut found: Vec<(usize, String)> = Vec::new();
        for caps in INLINE_LINK.captures_iter(&line) {
            let target = caps.get(2).unwrap();
            covered.push(caps.get(0).unwrap().range());
            if !target.as_str().is_empty() {
                found.push((target.start(), target.as_str().to_string()));
            }
        }
        for m in BARE_URL.find_iter(&line) {
            if !covered.iter().any(|r| r.contains(&m.start())) {
                found.push((m.start(), m.as_str().to_string()));
            }
        }
        found.sort_by_key(|(pos, _)| *pos);
        urls.extend(found.into_iter().map(|(_, url)| url));
    }
    urls
}
