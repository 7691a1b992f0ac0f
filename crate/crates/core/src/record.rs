//! Line tokenizer shared by the textual file formats (`.kb`, `.rules`,
//! `.lex`, `.author`, grammar files).
//!
//! A line is a sequence of whitespace separated tokens. A token is a bare
//! word, a double-quoted string (escapes `\"` and `\\`), or `key=value` where
//! the value is itself bare or quoted. `#` starts a comment outside quotes.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    Word(String),
    Quoted(String),
    Pair(String, String),
}

impl Token {
    pub(crate) fn text(&self) -> Option<&str> {
        match self {
            Token::Word(w) | Token::Quoted(w) => Some(w),
            Token::Pair(..) => None,
        }
    }
}

/// Splits a line into tokens. Returns `Ok(vec![])` for blank and comment lines.
pub(crate) fn tokenize(line: &str) -> Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        match chars.peek() {
            None | Some('#') => break,
            Some('"') => {
                chars.next();
                tokens.push(Token::Quoted(read_quoted(&mut chars)?));
            }
            Some(_) => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '=' || c == '"' {
                        break;
                    }
                    word.push(c);
                    chars.next();
                }
                if chars.peek() == Some(&'=') {
                    chars.next();
                    if word.is_empty() {
                        return Err("`=` without a key".into());
                    }
                    let value = match chars.peek() {
                        Some('"') => {
                            chars.next();
                            read_quoted(&mut chars)?
                        }
                        _ => {
                            let mut v = String::new();
                            while let Some(&c) = chars.peek() {
                                if c.is_whitespace() {
                                    break;
                                }
                                v.push(c);
                                chars.next();
                            }
                            if v.is_empty() {
                                return Err(format!("missing value for `{word}`"));
                            }
                            v
                        }
                    };
                    tokens.push(Token::Pair(word, value));
                } else if word.is_empty() {
                    return Err("unexpected `\"`".into());
                } else {
                    tokens.push(Token::Word(word));
                }
            }
        }
    }
    Ok(tokens)
}

fn read_quoted(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) -> Result<String, String> {
    let mut out = String::new();
    loop {
        match chars.next() {
            None => return Err("unterminated string".into()),
            Some('"') => return Ok(out),
            Some('\\') => match chars.next() {
                Some(c @ ('"' | '\\')) => out.push(c),
                Some('n') => out.push('\n'),
                other => return Err(format!("bad escape `\\{}`", other.unwrap_or(' '))),
            },
            Some(c) => out.push(c),
        }
    }
}

/// Quotes a string value for writing.
pub(crate) fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Writes ` key=value`, quoting the value when it is not a plain word.
pub(crate) fn push_pair(out: &mut String, key: &str, value: &str) {
    let bare = !value.is_empty()
        && value
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '-' | '_' | '.' | ':'));
    if bare {
        let _ = write!(out, " {key}={value}");
    } else {
        let _ = write!(out, " {key}={}", quote(value));
    }
}

/// Key/value pairs of a record, consumed as they are read so leftovers can be
/// reported.
#[derive(Debug, Default)]
pub(crate) struct Pairs(Vec<(String, String)>);

impl Pairs {
    pub(crate) fn from_tokens(tokens: impl IntoIterator<Item = Token>) -> Result<(Vec<Token>, Self), String> {
        let mut positional = Vec::new();
        let mut pairs = Vec::new();
        for t in tokens {
            match t {
                Token::Pair(k, v) => {
                    if pairs.iter().any(|(key, _)| key == &k) {
                        return Err(format!("duplicate field `{k}`"));
                    }
                    pairs.push((k, v))
                }
                other if pairs.is_empty() => positional.push(other),
                other => return Err(format!("unexpected token {other:?} after fields")),
            }
        }
        Ok((positional, Pairs(pairs)))
    }

    pub(crate) fn take(&mut self, key: &str) -> Option<String> {
        let idx = self.0.iter().position(|(k, _)| k == key)?;
        Some(self.0.remove(idx).1)
    }

    pub(crate) fn require(&mut self, key: &str) -> Result<String, String> {
        self.take(key).ok_or_else(|| format!("missing field `{key}`"))
    }

    pub(crate) fn finish(self) -> Result<(), String> {
        match self.0.first() {
            None => Ok(()),
            Some((k, _)) => Err(format!("unknown field `{k}`")),
        }
    }

    pub(crate) fn into_vec(self) -> Vec<(String, String)> {
        self.0
    }
}
