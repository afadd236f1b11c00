//! Minimal s-expression reader with source positions.
//!
//! Identifiers are lower-cased on the way in; PDDL is case-insensitive.

use std::fmt;

use super::error::{ParseError, ParseErrorKind};

/// 1-based line and column in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Symbol(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Symbol(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Symbol(..) => None,
        }
    }

    /// The leading symbol of a list, e.g. `and` in `(and ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list()
            .and_then(|items| items.first())
            .and_then(SExpr::as_symbol)
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<SExpr, ParseError> {
        self.skip_trivia();
        let start = self.pos();
        match self.chars.peek() {
            None => Err(ParseError::new(
                start,
                ParseErrorKind::Syntax("unexpected end of input".into()),
            )),
            Some(')') => Err(ParseError::new(
                start,
                ParseErrorKind::Syntax("unexpected `)`".into()),
            )),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => {
                            return Err(ParseError::new(
                                start,
                                ParseErrorKind::Syntax("unclosed `(`".into()),
                            ))
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(SExpr::List(items, start));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(_) => {
                let mut sym = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    sym.extend(c.to_lowercase());
                    self.bump();
                }
                Ok(SExpr::Symbol(sym, start))
            }
        }
    }
}

/// Reads exactly one top-level expression; trailing non-comment text is an error.
pub fn read_one(text: &str) -> Result<SExpr, ParseError> {
    let mut reader = Reader {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let expr = reader.read()?;
    reader.skip_trivia();
    if reader.chars.peek().is_some() {
        return Err(ParseError::new(
            reader.pos(),
            ParseErrorKind::Syntax("trailing input after top-level expression".into()),
        ));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let e = read_one("(Define\n  (domain X) ; comment\n)").unwrap();
        let items = e.as_list().unwrap();
        assert_eq!(items[0].as_symbol(), Some("define"));
        assert_eq!(items[1].pos(), Pos { line: 2, col: 3 });
        assert_eq!(items[1].as_list().unwrap()[1].as_symbol(), Some("x"));
    }

    #[test]
    fn unclosed_paren_reports_opening_position() {
        let err = read_one("\n  (a (b)").unwrap_err();
        assert_eq!(err.pos, Pos { line: 2, col: 3 });
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        let err = read_one("(a) b").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 5 });
    }
}
