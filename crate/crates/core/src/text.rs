//! Small cursor used by the hand-written parsers for rule and constraint text.

use crate::error::{Error, Location};

pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    source: &'a str,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str, source: &'a str) -> Self {
        Cursor { src, pos: 0, source }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    /// Consumes and returns the rest of the current line, without the newline.
    pub fn take_line(&mut self) -> &'a str {
        let rest = self.rest();
        let len = rest.find('\n').unwrap_or(rest.len());
        self.pos += len;
        rest[..len].trim_end_matches('\r')
    }

    pub fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    pub fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    pub fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    /// Skips whitespace, then consumes `c` if it is next.
    pub fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, c: char) -> Result<(), Error> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    /// Consumes `word` (case-insensitively) if it is next.
    pub fn eat_word(&mut self, word: &str) -> bool {
        self.skip_ws();
        let rest = self.rest();
        if rest.len() >= word.len() && rest[..word.len()].eq_ignore_ascii_case(word) {
            let after = rest[word.len()..].chars().next();
            if !after.is_some_and(|c| c.is_alphanumeric() || c == '_') {
                self.pos += word.len();
                return true;
            }
        }
        false
    }

    /// An identifier made of letters, digits and underscores.
    pub fn ident(&mut self) -> Result<&'a str, Error> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|&(_, c)| !(c.is_alphanumeric() || c == '_'))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            return Err(self.error("expected a name"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    /// A bare value: anything up to whitespace or one of `[],:'`.
    pub fn bare(&mut self) -> Result<&'a str, Error> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|&(_, c)| c.is_whitespace() || is_delimiter(c))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            return Err(self.error("expected a value"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    /// A single-quoted value; `\'` and `\\` escape.
    pub fn quoted(&mut self) -> Result<String, Error> {
        self.expect('\'')?;
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '\'' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, e)) => out.push(e),
                    None => break,
                },
                _ => out.push(c),
            }
        }
        Err(self.error("unterminated quoted value"))
    }

    pub fn error(&self, message: impl Into<String>) -> Error {
        self.error_at(self.pos, message)
    }

    pub fn error_at(&self, pos: usize, message: impl Into<String>) -> Error {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before
            .rfind('\n')
            .map_or(before.chars().count(), |nl| before[nl + 1..].chars().count())
            + 1;
        Error::syntax(Location::new(self.source, line).with_column(column), message)
    }
}

pub(crate) fn is_delimiter(c: char) -> bool {
    matches!(c, '[' | ']' | ',' | ':' | '\'')
}
