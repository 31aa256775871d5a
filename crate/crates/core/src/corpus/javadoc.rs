//! Extraction of method-summary rows from javadoc class pages.
//!
//! Handles the JDK 8 layout (`table.memberSummary`, `td.colLast`) and the
//! later `th.colSecond` variant. The package comes from the page header when
//! present and otherwise from the file's path below the documentation root.

use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;

use super::html::{Dom, NodeId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPage {
    pub class_fqn: String,
    pub methods: Vec<MethodRow>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodRow {
    pub name: String,
    /// Full block text with whitespace collapsed; empty when the row has no description.
    pub block: String,
    pub deprecated: bool,
}

fn package_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[a-z][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$").unwrap())
}

pub(crate) fn collapse_ws(text: &str) -> String {
    text.replace('\u{a0}', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

fn text_of(dom: &Dom, id: NodeId) -> String {
    collapse_ws(&dom.raw_text(id))
}

fn in_header(dom: &Dom, id: NodeId) -> bool {
    dom.has_ancestor(id, dom.root(), |a| dom.has_class(a, "header"))
}

/// Parses one class page. `rel_path` is the page path relative to the doc root.
///
/// Returns `None` when no class name can be determined.
pub fn parse_class_page(html: &str, rel_path: &Path) -> Option<ClassPage> {
    let dom = Dom::parse(html);
    let root = dom.root();

    let title_class = dom
        .elements_within(root)
        .find(|&n| {
            dom.has_class(n, "title")
                && (in_header(&dom, n) || dom.is(n, "h1") || dom.is(n, "h2"))
        })
        .map(|n| text_of(&dom, n))
        .and_then(|t| class_name_from_title(&t));
    let header_package = dom
        .elements_within(root)
        .filter(|&n| {
            (dom.has_class(n, "subTitle") || dom.has_class(n, "sub-title")) && in_header(&dom, n)
        })
        .map(|n| text_of(&dom, n))
        .filter(|t| package_re().is_match(t))
        .last();

    let (path_package, path_class) = split_rel_path(rel_path);
    let class_name = title_class.or(path_class)?;
    let package = header_package.or(path_package);
    let class_fqn = match package {
        Some(p) if !p.is_empty() => format!("{p}.{class_name}"),
        _ => class_name,
    };

    let mut methods = Vec::new();
    let tables = dom
        .elements_within(root)
        .filter(|&n| dom.is(n, "table") && is_method_table(&dom, n));
    for table in tables {
        for row in dom.elements_within(table).filter(|&n| dom.is(n, "tr")) {
            let Some(name) = method_name(&dom, row).filter(|n| !n.is_empty()) else {
                continue;
            };
            let block = dom
                .elements_within(row)
                .find(|&n| dom.is(n, "div") && dom.has_class(n, "block"))
                .map(|n| text_of(&dom, n))
                .unwrap_or_default();
            let deprecated = dom.elements_within(row).any(|n| {
                dom.has_class(n, "deprecatedLabel") || dom.has_class(n, "deprecated-label")
            }) || block.starts_with("Deprecated.");
            methods.push(MethodRow {
                name,
                block,
                deprecated,
            });
        }
    }
    Some(ClassPage { class_fqn, methods })
}

// `.memberNameLink a`, else a link inside the code of the last column.
fn method_name(dom: &Dom, row: NodeId) -> Option<String> {
    let links: Vec<NodeId> = dom.elements_within(row).filter(|&n| dom.is(n, "a")).collect();
    let styled = links.iter().find(|&&a| {
        dom.has_ancestor(a, row, |p| {
            dom.has_class(p, "memberNameLink") || dom.has_class(p, "member-name-link")
        })
    });
    let fallback = || {
        links.iter().find(|&&a| {
            dom.has_ancestor(a, row, |p| dom.is(p, "code"))
                && dom.has_ancestor(a, row, |p| {
                    (dom.is(p, "td") && dom.has_class(p, "colLast"))
                        || (dom.is(p, "th") && dom.has_class(p, "colSecond"))
                })
        })
    };
    styled.or_else(fallback).map(|&a| text_of(dom, a))
}

fn is_method_table(dom: &Dom, table: NodeId) -> bool {
    if let Some(summary) = dom.attr(table, "summary") {
        return summary.contains("Method Summary");
    }
    dom.elements_within(table)
        .find(|&n| dom.is(n, "caption"))
        .map(|c| text_of(dom, c).contains("Method"))
        .unwrap_or(false)
}

// "Class Integer" -> "Integer", "Interface Map.Entry<K,V>" -> "Map.Entry"
fn class_name_from_title(title: &str) -> Option<String> {
    let mut rest = title.trim();
    for prefix in ["Annotation Type ", "Interface ", "Class ", "Enum ", "Record "] {
        if let Some(r) = rest.strip_prefix(prefix) {
            rest = r;
            break;
        }
    }
    let name = rest.split('<').next().unwrap_or("").trim();
    let valid = !name.is_empty()
        && name
            .split('.')
            .all(|seg| !seg.is_empty() && seg.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '$'));
    valid.then(|| name.to_string())
}

fn split_rel_path(rel_path: &Path) -> (Option<String>, Option<String>) {
    let class = rel_path
        .file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string);
    let package = rel_path.parent().map(|p| {
        p.components()
            .filter_map(|c| c.as_os_str().to_str())
            .collect::<Vec<_>>()
            .join(".")
    });
    (package.filter(|p| !p.is_empty()), class)
}
