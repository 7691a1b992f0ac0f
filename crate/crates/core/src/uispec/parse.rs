//! `.uispec` reader.
//!
//! ```text
//! uispec 1
//! // comment
//! application "Word" {
//!   menu "File" { menu-item "Save" }
//!   dialog #save-as "Save As" {
//!     text-field "Name" content=document-name
//!   }
//! }
//! ```
//!
//! An element is `kind [#id] "label" [attr=value ...] [{ element* }]`. Ids
//! default to the label slug plus a kind suffix (`save-button`, `file-menu`);
//! generated ids that collide are all qualified with their parent's id.

use std::collections::BTreeMap;

use super::{UispecError, WidgetKind, WidgetSpec};
use crate::ids::{is_slug, slugify};

pub const UISPEC_HEADER: &str = "uispec";

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Id(String),
    Str(String),
    Eq,
    Open,
    Close,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, UispecError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let n = idx + 1;
        let err = |message: String| UispecError::Parse { line: n, message };
        let mut chars = line.chars().peekable();
        while let Some(&c) = chars.peek() {
            match c {
                c if c.is_whitespace() => {
                    chars.next();
                }
                '/' => {
                    chars.next();
                    if chars.next() != Some('/') {
                        return Err(err("stray `/`".into()));
                    }
                    break;
                }
                '{' => {
                    chars.next();
                    out.push((n, Tok::Open));
                }
                '}' => {
                    chars.next();
                    out.push((n, Tok::Close));
                }
                '=' => {
                    chars.next();
                    out.push((n, Tok::Eq));
                }
                '"' => {
                    chars.next();
                    let mut s = String::new();
                    loop {
                        match chars.next() {
                            None => return Err(err("unterminated string".into())),
                            Some('"') => break,
                            Some('\\') => match chars.next() {
                                Some(c @ ('"' | '\\')) => s.push(c),
                                _ => return Err(err("bad escape".into())),
                            },
                            Some(c) => s.push(c),
                        }
                    }
                    out.push((n, Tok::Str(s)));
                }
                '#' => {
                    chars.next();
                    let word = take_word(&mut chars);
                    if !is_slug(&word) {
                        return Err(err(format!("bad id `#{word}`: ids are lowercase hyphenated slugs")));
                    }
                    out.push((n, Tok::Id(word)));
                }
                c if c.is_alphanumeric() => out.push((n, Tok::Ident(take_word(&mut chars)))),
                other => return Err(err(format!("unexpected `{other}`"))),
            }
        }
    }
    Ok(out)
}

fn take_word(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) -> String {
    let mut w = String::new();
    while let Some(&c) = chars.peek() {
        if c.is_alphanumeric() || c == '-' || c == '_' {
            w.push(c);
            chars.next();
        } else {
            break;
        }
    }
    w
}

struct RawWidget {
    explicit_id: Option<String>,
    kind: WidgetKind,
    label: String,
    content: Option<String>,
    children: Vec<RawWidget>,
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(1, |(l, _)| *l)
    }

    fn err(&self, message: impl Into<String>) -> UispecError {
        UispecError::Parse {
            line: self.line(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn element(&mut self, parent: Option<WidgetKind>) -> Result<RawWidget, UispecError> {
        let line = self.line();
        let kind = match self.next() {
            Some(Tok::Ident(k)) => WidgetKind::parse(&k).ok_or_else(|| {
                self.pos -= 1;
                self.err(format!("unknown widget kind `{k}`"))
            })?,
            _ => {
                self.pos -= 1;
                return Err(self.err("expected a widget kind"));
            }
        };
        let legal = match parent {
            None => kind == WidgetKind::Application,
            Some(p) => p.may_contain(kind),
        };
        if !legal {
            return Err(UispecError::IllegalNesting {
                parent,
                child: kind,
                line,
            });
        }
        let explicit_id = match self.peek() {
            Some(Tok::Id(_)) => match self.next() {
                Some(Tok::Id(id)) => Some(id),
                _ => unreachable!(),
            },
            _ => None,
        };
        let label = match self.next() {
            Some(Tok::Str(s)) => s,
            _ => {
                self.pos -= 1;
                return Err(self.err(format!("expected a quoted label after `{kind}`")));
            }
        };
        let mut content = None;
        while let Some(Tok::Ident(_)) = self.peek() {
            // An identifier is either an attribute or the next sibling element.
            if self.toks.get(self.pos + 1).map(|(_, t)| t) != Some(&Tok::Eq) {
                break;
            }
            let attr_line = self.line();
            let Some(Tok::Ident(key)) = self.next() else {
                unreachable!()
            };
            self.next();
            let value = match self.next() {
                Some(Tok::Ident(v)) | Some(Tok::Str(v)) => v,
                _ => {
                    self.pos -= 1;
                    return Err(self.err(format!("missing value for `{key}`")));
                }
            };
            let attr_err = |message: String| UispecError::Parse {
                line: attr_line,
                message,
            };
            match key.as_str() {
                "content" if content.is_none() => content = Some(value),
                "content" => return Err(attr_err("duplicate attribute `content`".into())),
                other => return Err(attr_err(format!("unknown attribute `{other}`"))),
            }
        }
        let mut children = Vec::new();
        if self.peek() == Some(&Tok::Open) {
            self.next();
            loop {
                match self.peek() {
                    Some(Tok::Close) => {
                        self.next();
                        break;
                    }
                    None => return Err(self.err(format!("unclosed `{{` of {kind} \"{label}\""))),
                    _ => children.push(self.element(Some(kind))?),
                }
            }
        }
        Ok(RawWidget {
            explicit_id,
            kind,
            label,
            content,
            children,
        })
    }
}

fn auto_id(w: &RawWidget) -> String {
    let mut id = slugify(&w.label);
    if let Some(suffix) = w.kind.id_suffix() {
        if !id.is_empty() {
            id.push('-');
        }
        id.push_str(suffix);
    }
    if id.is_empty() {
        id = w.kind.as_str().to_string();
    }
    id
}

fn count_auto_ids(w: &RawWidget, counts: &mut BTreeMap<String, usize>) {
    if w.explicit_id.is_none() {
        *counts.entry(auto_id(w)).or_default() += 1;
    }
    for c in &w.children {
        count_auto_ids(c, counts);
    }
}

fn assign_ids(w: RawWidget, parent_id: Option<&str>, counts: &BTreeMap<String, usize>) -> WidgetSpec {
    let id = match w.explicit_id {
        Some(id) => id,
        None => {
            let base = auto_id(&w);
            match parent_id {
                Some(p) if counts[&base] > 1 => format!("{p}-{base}"),
                _ => base,
            }
        }
    };
    let children = w
        .children
        .into_iter()
        .map(|c| assign_ids(c, Some(&id), counts))
        .collect();
    WidgetSpec {
        id,
        kind: w.kind,
        label: w.label,
        content: w.content,
        children,
    }
}

pub fn parse_uispec(text: &str) -> Result<WidgetSpec, UispecError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    match (p.next(), p.next()) {
        (Some(Tok::Ident(h)), Some(Tok::Ident(v))) if h == UISPEC_HEADER => {
            if v != "1" {
                p.pos -= 1;
                return Err(p.err(format!("unsupported version {v}")));
            }
        }
        _ => {
            p.pos = 0;
            return Err(p.err(format!("expected `{UISPEC_HEADER} 1` header")));
        }
    }
    if p.peek().is_none() {
        return Err(p.err("missing application element"));
    }
    let raw = p.element(None)?;
    if p.peek().is_some() {
        return Err(p.err("only one top-level application element is allowed"));
    }
    let mut counts = BTreeMap::new();
    count_auto_ids(&raw, &mut counts);
    let tree = assign_ids(raw, None, &counts);
    tree.check()?;
    Ok(tree)
}
