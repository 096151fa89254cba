//! S-expression reader with line tracking.

use super::HddlError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String, usize),
    List(Vec<SExpr>, usize),
}

impl SExpr {
    pub fn line(&self) -> usize {
        match self {
            SExpr::Atom(_, l) | SExpr::List(_, l) => *l,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(a, _) => Some(a),
            SExpr::List(..) => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Atom(..) => None,
        }
    }

    /// First element of a list when it is an atom, e.g. `and` in `(and ...)`.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(|h| h.atom())
    }
}

/// Reads exactly one top-level expression. Input is lower-cased; HDDL
/// identifiers are case-insensitive.
pub fn parse(file: &str, text: &str) -> Result<SExpr, HddlError> {
    let mut stack: Vec<(Vec<SExpr>, usize)> = Vec::new();
    let mut result: Option<SExpr> = None;
    let mut line = 1usize;
    let mut chars = text.char_indices().peekable();
    let lex = |line: usize, msg: String| HddlError::Lex {
        file: file.to_string(),
        line,
        msg,
    };
    while let Some(&(_, c)) = chars.peek() {
        match c {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            ';' => {
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                if result.is_some() {
                    return Err(lex(line, "trailing input after the top-level expression".into()));
                }
                stack.push((Vec::new(), line));
                chars.next();
            }
            ')' => {
                chars.next();
                let (items, start) = stack.pop().ok_or_else(|| lex(line, "unbalanced `)`".into()))?;
                let e = SExpr::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(e),
                    None => result = Some(e),
                }
            }
            _ => {
                let mut tok = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    tok.extend(c.to_lowercase());
                    chars.next();
                }
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(SExpr::Atom(tok, line)),
                    None => return Err(lex(line, format!("atom `{tok}` outside any list"))),
                }
            }
        }
    }
    if let Some((_, start)) = stack.last() {
        return Err(lex(*start, "unclosed `(`".into()));
    }
    result.ok_or_else(|| lex(line, "empty input".into()))
}
