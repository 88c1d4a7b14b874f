//! A small S-expression reader with source positions.
//!
//! Atoms are bare tokens or double-quoted strings; `;` starts a comment that
//! runs to the end of the line.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// 1-based line and column of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{position}: {message}")]
pub struct SexpError {
    pub position: Position,
    pub message: String,
}

impl SexpError {
    pub fn new(position: Position, message: impl Into<String>) -> Self {
        SexpError {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sexp {
    Atom { text: String, quoted: bool, pos: Position },
    List { items: Vec<Sexp>, pos: Position },
}

impl Sexp {
    pub fn pos(&self) -> Position {
        match self {
            Sexp::Atom { pos, .. } | Sexp::List { pos, .. } => *pos,
        }
    }

    /// The text of an unquoted atom.
    pub fn symbol(&self) -> Option<&str> {
        match self {
            Sexp::Atom {
                text,
                quoted: false,
                ..
            } => Some(text),
            _ => None,
        }
    }

    /// The text of any atom, quoted or not.
    pub fn text(&self) -> Option<&str> {
        match self {
            Sexp::Atom { text, .. } => Some(text),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List { items, .. } => Some(items),
            _ => None,
        }
    }

    /// Head symbol and arguments of a list `(head args...)`.
    pub fn call(&self) -> Option<(&str, &[Sexp])> {
        let items = self.list()?;
        let (head, rest) = items.split_first()?;
        Some((head.symbol()?, rest))
    }

    pub fn number(&self) -> Result<f64, SexpError> {
        self.symbol()
            .and_then(parse_number)
            .ok_or_else(|| SexpError::new(self.pos(), "expected a number"))
    }
}

/// Parses a decimal literal, accepting `inf`/`-inf`.
pub fn parse_number(text: &str) -> Option<f64> {
    let first = text.chars().next()?;
    if !(first.is_ascii_digit() || matches!(first, '-' | '+' | '.' | 'i')) {
        return None;
    }
    text.parse::<f64>().ok().filter(|x| !x.is_nan())
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom {
                text, quoted: true, ..
            } => {
                f.write_str("\"")?;
                for c in text.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Sexp::Atom { text, .. } => f.write_str(text),
            Sexp::List { items, .. } => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Reader<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    pos: Position,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<Sexp>, SexpError> {
        self.skip_trivia();
        let pos = self.pos;
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return Err(SexpError::new(pos, "unclosed '('")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexp::List { items, pos }));
                        }
                        Some(_) => {
                            // read() only returns None at end of input, handled above
                            if let Some(item) = self.read()? {
                                items.push(item);
                            }
                        }
                    }
                }
            }
            ')' => Err(SexpError::new(pos, "unexpected ')'")),
            '"' => {
                self.bump();
                let mut text = String::new();
                loop {
                    match self.bump() {
                        None => return Err(SexpError::new(pos, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some('n') => text.push('\n'),
                            Some(c) => text.push(c),
                            None => return Err(SexpError::new(pos, "unterminated string")),
                        },
                        Some(c) => text.push(c),
                    }
                }
                Ok(Some(Sexp::Atom {
                    text,
                    quoted: true,
                    pos,
                }))
            }
            _ => {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | ';' | '"') {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                Ok(Some(Sexp::Atom {
                    text,
                    quoted: false,
                    pos,
                }))
            }
        }
    }
}

/// Reads every top-level expression in `input`.
pub fn parse_all(input: &str) -> Result<Vec<Sexp>, SexpError> {
    let mut reader = Reader {
        chars: input.chars().peekable(),
        pos: Position { line: 1, column: 1 },
    };
    let mut out = Vec::new();
    while let Some(expr) = reader.read()? {
        out.push(expr);
    }
    Ok(out)
}

/// Reads exactly one expression.
pub fn parse_one(input: &str) -> Result<Sexp, SexpError> {
    let mut all = parse_all(input)?;
    match all.len() {
        1 => Ok(all.remove(0)),
        0 => Err(SexpError::new(
            Position { line: 1, column: 1 },
            "empty input",
        )),
        _ => Err(SexpError::new(
            all[1].pos(),
            "trailing input after expression",
        )),
    }
}

/// Unquoted atom helper for building expressions programmatically.
pub fn sym(text: impl ToString) -> Sexp {
    Sexp::Atom {
        text: text.to_string(),
        quoted: false,
        pos: Position::default(),
    }
}

pub fn list(items: Vec<Sexp>) -> Sexp {
    Sexp::List {
        items,
        pos: Position::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    #[test]
    fn nested_lists_and_positions() {
        let e = parse_one("(always (0 30)\n  (< v 120)) ; trailing comment").unwrap();
        let (head, args) = e.call().unwrap();
        assert_eq!(head, "always");
        assert_eq!(args.len(), 2);
        assert_eq!(args[1].pos(), Position { line: 2, column: 3 });
        assert_eq!(format!("{e}"), "(always (0 30) (< v 120))");
    }

    #[test]
    fn strings_and_escapes() {
        let e = parse_one(r#"(cmd "a b" "q\"x")"#).unwrap();
        let items = e.list().unwrap();
        assert_eq!(items[1].text(), Some("a b"));
        assert_eq!(items[1].symbol(), None);
        assert_eq!(items[2].text(), Some("q\"x"));
        assert_eq!(parse_one(&format!("{e}")).unwrap(), e);
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_one("(a (b c)").unwrap_err();
        assert_eq!(err.position, Position { line: 1, column: 1 });
        let err = parse_one("a)").unwrap_err();
        assert_eq!(err.position, Position { line: 1, column: 2 });
        assert!(parse_one("").is_err());
        assert!(parse_one("a b").is_err());
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_number("1e3"), Some(1000.0));
        assert_eq!(parse_number("-0.5"), Some(-0.5));
        assert_eq!(parse_number("inf"), Some(f64::INFINITY));
        assert_eq!(parse_number("v"), None);
        assert_eq!(parse_number("nan"), None);
    }
}
