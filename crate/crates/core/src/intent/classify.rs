//! Shallow chunking of an imperative question into verb, noun phrase,
//! prepositional phrases and clauses.

use serde::{Deserialize, Serialize};

use crate::lexicon::VerbLexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConstituencyForm {
    /// VB+NP+(PP/S)
    VbNpX,
    /// VB+NP+PP+(PP/S)
    VbNpPpX,
    /// VB+S
    VbS,
    Unparsed,
}

/// Byte range into the refined question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    fn cover(a: Span, b: Span) -> Span {
        Span {
            start: a.start.min(b.start),
            end: a.end.max(b.end),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntacticRoles {
    /// The refined question all spans index into.
    pub source: String,
    pub verb: Option<Span>,
    pub dobj: Option<Span>,
    pub dmod: Option<Span>,
    pub pobj: Option<Span>,
    pub pmod: Option<Span>,
    /// Remaining prepositional phrase(s) or clause.
    pub trailing: Option<Span>,
}

impl SyntacticRoles {
    fn empty(source: &str) -> Self {
        SyntacticRoles {
            source: source.to_string(),
            verb: None,
            dobj: None,
            dmod: None,
            pobj: None,
            pmod: None,
            trailing: None,
        }
    }

    pub fn text(&self, span: Option<Span>) -> Option<&str> {
        span.map(|s| &self.source[s.start..s.end])
    }

    /// Modifier and head as one contiguous span ("a String").
    pub fn direct_phrase(&self) -> Option<Span> {
        phrase(self.dmod, self.dobj)
    }

    pub fn prepositional_phrase(&self) -> Option<Span> {
        phrase(self.pmod, self.pobj)
    }
}

fn phrase(modifier: Option<Span>, head: Option<Span>) -> Option<Span> {
    let head = head?;
    Some(modifier.map_or(head, |m| Span::cover(m, head)))
}

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "these", "those", "my", "your", "its", "our", "their", "some", "any",
    "each", "every", "all", "another", "no",
];

const PREPOSITIONS: &[&str] = &[
    "to", "in", "into", "from", "of", "with", "for", "on", "onto", "at", "by", "as", "using",
    "via", "without", "within", "over", "under", "between", "through", "after", "before",
    "across", "about", "per", "than", "like", "inside", "outside", "against", "among", "toward",
    "towards", "upon", "except", "including",
];

const CLAUSE_MARKERS: &[&str] = &[
    "if", "whether", "when", "whenever", "while", "where", "which", "that", "how", "what", "why",
    "until", "unless", "because", "so", "who",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WordClass {
    Preposition,
    ClauseMarker,
    Other,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    span: Span,
    norm: &'a str,
}

fn tokens(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                let raw = &text[s..i];
                let trimmed_end = raw.trim_end_matches(|c: char| ",;:?!.\"')".contains(c));
                let lead = raw.len() - raw.trim_start_matches(|c: char| "\"'(".contains(c)).len();
                if trimmed_end.len() > lead {
                    out.push(Token {
                        span: Span {
                            start: s + lead,
                            end: s + trimmed_end.len(),
                        },
                        norm: &text[s + lead..s + trimmed_end.len()],
                    });
                }
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn class_of(word: &str) -> WordClass {
    let lower = word.to_lowercase();
    if CLAUSE_MARKERS.contains(&lower.as_str()) {
        WordClass::ClauseMarker
    } else if PREPOSITIONS.contains(&lower.as_str()) {
        WordClass::Preposition
    } else {
        WordClass::Other
    }
}

pub fn is_determiner(word: &str) -> bool {
    DETERMINERS.contains(&word.to_lowercase().as_str())
}

#[derive(Debug)]
struct Chunk {
    kind: WordClass,
    start: usize,
    end: usize,
}

/// Assigns a constituency form and syntactic roles to a refined question.
///
/// The first verb-lexicon word is the verb. A clause marker right after it gives
/// VB+S. Otherwise the words up to the next preposition or clause marker form
/// the noun phrase (last word = head, the rest = modifier). What follows is cut
/// into prepositional phrases and at most one clause. One trailing chunk maps
/// to VB+NP+(PP/S); two or more, led by a PP with an object, map to
/// VB+NP+PP+(PP/S). Anything else is unparsed.
pub fn classify(refined: &str, verbs: &VerbLexicon) -> (ConstituencyForm, SyntacticRoles) {
    let toks = tokens(refined);
    let mut roles = SyntacticRoles::empty(refined);
    let unparsed = |roles: SyntacticRoles| (ConstituencyForm::Unparsed, roles);

    let Some(v) = toks.iter().position(|t| verbs.verb_lemma(t.norm).is_some()) else {
        return unparsed(roles);
    };
    roles.verb = Some(toks[v].span);
    let rest = &toks[v + 1..];
    let Some(first) = rest.first() else {
        return unparsed(roles);
    };
    let end_of_text = rest.last().map(|t| t.span.end).unwrap_or(first.span.end);

    if class_of(first.norm) == WordClass::ClauseMarker {
        roles.trailing = Some(Span {
            start: first.span.start,
            end: end_of_text,
        });
        return (ConstituencyForm::VbS, roles);
    }

    let np_len = rest
        .iter()
        .position(|t| class_of(t.norm) != WordClass::Other)
        .unwrap_or(rest.len());
    if np_len == 0 {
        return unparsed(roles);
    }
    let np = &rest[..np_len];
    roles.dobj = Some(np[np_len - 1].span);
    if np_len > 1 {
        roles.dmod = Some(Span {
            start: np[0].span.start,
            end: np[np_len - 2].span.end,
        });
    }

    let after = &rest[np_len..];
    let mut chunks: Vec<Chunk> = Vec::new();
    for (i, t) in after.iter().enumerate() {
        let kind = class_of(t.norm);
        match (kind, chunks.last()) {
            (_, Some(c)) if c.kind == WordClass::ClauseMarker => {}
            (WordClass::Preposition | WordClass::ClauseMarker, _) | (_, None) => chunks.push(Chunk {
                kind,
                start: i,
                end: i + 1,
            }),
            _ => {}
        }
        if let Some(c) = chunks.last_mut() {
            c.end = i + 1;
        }
    }

    let span_of = |c: &Chunk| Span {
        start: after[c.start].span.start,
        end: after[c.end - 1].span.end,
    };
    match chunks.as_slice() {
        [] => unparsed(roles),
        [only] => {
            roles.trailing = Some(span_of(only));
            (ConstituencyForm::VbNpX, roles)
        }
        [pp, second, ..] if pp.kind == WordClass::Preposition && pp.end - pp.start > 1 => {
            let obj = &after[pp.start + 1..pp.end];
            roles.pobj = Some(obj[obj.len() - 1].span);
            if obj.len() > 1 {
                roles.pmod = Some(Span {
                    start: obj[0].span.start,
                    end: obj[obj.len() - 2].span.end,
                });
            }
            roles.trailing = Some(Span {
                start: span_of(second).start,
                end: end_of_text,
            });
            (ConstituencyForm::VbNpPpX, roles)
        }
        [first_chunk, ..] => {
            roles.trailing = Some(Span {
                start: span_of(first_chunk).start,
                end: end_of_text,
            });
            (ConstituencyForm::VbNpX, roles)
        }
    }
}
