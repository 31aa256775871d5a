//! A lenient element tree built from the html5ever tokenizer.
//!
//! Only what javadoc pages need: void elements, implied closes for table
//! rows and cells, and raw-text handling for script and style.

use std::cell::RefCell;

use html5ever::tendril::StrTendril;
use html5ever::tokenizer::states::RawKind;
use html5ever::tokenizer::{
    BufferQueue, Tag, TagKind, Token, TokenSink, TokenSinkResult, Tokenizer,
};

pub(crate) type NodeId = usize;

#[derive(Debug)]
enum Kind {
    Document,
    Element { name: String, attrs: Vec<(String, String)> },
    Text(String),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
}

#[derive(Debug)]
pub(crate) struct Dom {
    nodes: Vec<Node>,
}

const VOID: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track",
    "wbr",
];

struct Builder {
    nodes: Vec<Node>,
    stack: Vec<NodeId>,
}

impl Builder {
    fn current(&self) -> NodeId {
        *self.stack.last().unwrap_or(&0)
    }

    fn push(&mut self, kind: Kind) -> NodeId {
        let id = self.nodes.len();
        let parent = self.current();
        self.nodes.push(Node {
            kind,
            parent: Some(parent),
            children: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        id
    }

    fn name_of(&self, id: NodeId) -> &str {
        match &self.nodes[id].kind {
            Kind::Element { name, .. } => name,
            _ => "",
        }
    }

    /// Pops back to (and including) the nearest open element named in `close`,
    /// unless an element named in `boundary` comes first.
    fn close_implied(&mut self, close: &[&str], boundary: &[&str]) {
        for i in (0..self.stack.len()).rev() {
            let name = self.name_of(self.stack[i]);
            if boundary.contains(&name) {
                return;
            }
            if close.contains(&name) {
                self.stack.truncate(i);
                return;
            }
        }
    }

    fn start(&mut self, tag: Tag) {
        let name = tag.name.to_string();
        match name.as_str() {
            "tr" => self.close_implied(&["tr"], &["table", "tbody", "thead", "tfoot"]),
            "td" | "th" => self.close_implied(&["td", "th"], &["tr", "table"]),
            "tbody" | "thead" | "tfoot" => {
                self.close_implied(&["tbody", "thead", "tfoot"], &["table"])
            }
            "li" => self.close_implied(&["li"], &["ul", "ol"]),
            "dt" | "dd" => self.close_implied(&["dt", "dd"], &["dl"]),
            "p" => self.close_implied(&["p"], &["div", "td", "th", "li", "body"]),
            _ => {}
        }
        let attrs = tag
            .attrs
            .iter()
            .map(|a| (a.name.local.to_string(), a.value.to_string()))
            .collect();
        let id = self.push(Kind::Element {
            name: name.clone(),
            attrs,
        });
        if !tag.self_closing && !VOID.contains(&name.as_str()) {
            self.stack.push(id);
        }
    }

    fn end(&mut self, name: &str) {
        if let Some(i) = self.stack.iter().rposition(|&id| self.name_of(id) == name) {
            self.stack.truncate(i);
        }
    }

    fn text(&mut self, text: &str) {
        let parent = self.current();
        if let Some(&last) = self.nodes[parent].children.last() {
            if let Kind::Text(t) = &mut self.nodes[last].kind {
                t.push_str(text);
                return;
            }
        }
        self.push(Kind::Text(text.to_string()));
    }
}

struct Sink(RefCell<Builder>);

impl TokenSink for Sink {
    type Handle = ();

    fn process_token(&self, token: Token, _line: u64) -> TokenSinkResult<()> {
        let mut b = self.0.borrow_mut();
        match token {
            Token::TagToken(tag) => match tag.kind {
                TagKind::StartTag => {
                    let raw = match &*tag.name {
                        "script" => Some(RawKind::ScriptData),
                        "style" => Some(RawKind::Rawtext),
                        "textarea" | "title" => Some(RawKind::Rcdata),
                        _ => None,
                    };
                    b.start(tag);
                    if let Some(kind) = raw {
                        return TokenSinkResult::RawData(kind);
                    }
                }
                TagKind::EndTag => b.end(&tag.name),
            },
            Token::CharacterTokens(t) => b.text(&t),
            _ => {}
        }
        TokenSinkResult::Continue
    }
}

impl Dom {
    pub(crate) fn parse(html: &str) -> Dom {
        let sink = Sink(RefCell::new(Builder {
            nodes: vec![Node {
                kind: Kind::Document,
                parent: None,
                children: Vec::new(),
            }],
            stack: Vec::new(),
        }));
        let input = BufferQueue::default();
        input.push_back(StrTendril::from_slice(html));
        let tok = Tokenizer::new(sink, Default::default());
        let _ = tok.feed(&input);
        tok.end();
        Dom {
            nodes: tok.sink.0.into_inner().nodes,
        }
    }

    pub(crate) fn root(&self) -> NodeId {
        0
    }

    pub(crate) fn name(&self, id: NodeId) -> Option<&str> {
        match &self.nodes[id].kind {
            Kind::Element { name, .. } => Some(name),
            _ => None,
        }
    }

    pub(crate) fn is(&self, id: NodeId, name: &str) -> bool {
        self.name(id) == Some(name)
    }

    pub(crate) fn attr(&self, id: NodeId, key: &str) -> Option<&str> {
        match &self.nodes[id].kind {
            Kind::Element { attrs, .. } => {
                attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
            }
            _ => None,
        }
    }

    pub(crate) fn has_class(&self, id: NodeId, class: &str) -> bool {
        self.attr(id, "class")
            .is_some_and(|c| c.split_whitespace().any(|c| c == class))
    }

    /// Strict descendants of `id` in document order.
    pub(crate) fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.nodes[id].children.iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.nodes[n].children.iter().rev());
        }
        out
    }

    pub(crate) fn elements_within(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.descendants(id)
            .into_iter()
            .filter(|&n| self.name(n).is_some())
    }

    /// Whether some ancestor strictly between `id` and `stop` satisfies `pred`.
    pub(crate) fn has_ancestor(
        &self,
        id: NodeId,
        stop: NodeId,
        pred: impl Fn(NodeId) -> bool,
    ) -> bool {
        let mut cur = self.nodes[id].parent;
        while let Some(p) = cur {
            if p == stop {
                return false;
            }
            if pred(p) {
                return true;
            }
            cur = self.nodes[p].parent;
        }
        false
    }

    pub(crate) fn raw_text(&self, id: NodeId) -> String {
        let mut out = String::new();
        if let Kind::Text(t) = &self.nodes[id].kind {
            out.push_str(t);
        }
        for n in self.descendants(id) {
            if let Kind::Text(t) = &self.nodes[n].kind {
                out.push_str(t);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implied_cell_and_row_closes() {
        let dom = Dom::parse("<table><tr><td>a<td>b<tr><td>c</table><p>after");
        let root = dom.root();
        let rows: Vec<_> = dom.elements_within(root).filter(|&n| dom.is(n, "tr")).collect();
        assert_eq!(rows.len(), 2);
        let cells: Vec<_> = dom.elements_within(rows[0]).filter(|&n| dom.is(n, "td")).collect();
        assert_eq!(cells.len(), 2);
        assert_eq!(dom.raw_text(cells[1]), "b");
        let p = dom.elements_within(root).find(|&n| dom.is(n, "p")).unwrap();
        assert!(!dom.has_ancestor(p, root, |a| dom.is(a, "table")));
    }

    #[test]
    fn entities_and_void_elements() {
        let dom = Dom::parse(r#"<div class="block x">a&nbsp;b<br>c&lt;d</div>"#);
        let div = dom.elements_within(dom.root()).next().unwrap();
        assert!(dom.has_class(div, "block"));
        assert_eq!(dom.raw_text(div), "a\u{a0}bc<d");
    }

    #[test]
    fn script_contents_are_text() {
        let dom = Dom::parse("<script>if (a<b) { x = '<table>'; }</script><table></table>");
        let tables = dom.elements_within(dom.root()).filter(|&n| dom.is(n, "table")).count();
        assert_eq!(tables, 1);
    }
}
