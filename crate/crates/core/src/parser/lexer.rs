use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    /// Punctuation, including the composites `:=`, `<=`, `>=`, `<>`, `!=`.
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

const COMPOSITES: [&str; 5] = [":=", "<=", ">=", "<>", "!="];
const SINGLES: [&str; 23] = [
    "(", ")", "[", "]", "{", "}", ",", ".", ":", ";", "|", "@", "-", "<", ">", "/", "*", "+", "=",
    "~", "^", "%", "⁻",
];

/// Length of the numeric literal at the start of `s` and whether it is real.
fn number_len(s: &str) -> (usize, bool) {
    let b = s.as_bytes();
    let digits = |from: usize| from + b[from..].iter().take_while(|c| c.is_ascii_digit()).count();
    let mut end = digits(0);
    let mut real = false;
    if b.get(end) == Some(&b'.') && b.get(end + 1).is_some_and(u8::is_ascii_digit) {
        end = digits(end + 1);
        real = true;
    }
    if matches!(b.get(end), Some(b'e') | Some(b'E')) {
        let mut k = end + 1;
        if matches!(b.get(k), Some(b'+') | Some(b'-')) {
            k += 1;
        }
        if b.get(k).is_some_and(u8::is_ascii_digit) {
            end = digits(k);
            real = true;
        }
    }
    (end, real)
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    let (mut line, mut line_start) = (1usize, 0usize);
    while let Some(&(i, c)) = it.peek() {
        let col = src[line_start..i].chars().count() + 1;
        let tok_line = line;
        let err = move |message: String| ParseError::Syntax { line: tok_line, col, message };
        if c == '\n' {
            it.next();
            line += 1;
            line_start = i + 1;
            continue;
        }
        if c.is_whitespace() {
            it.next();
            continue;
        }
        if src[i..].starts_with("--") {
            while it.peek().is_some_and(|&(_, c)| c != '\n') {
                it.next();
            }
            continue;
        }
        let tok = if c.is_alphabetic() || c == '_' {
            let mut end = i;
            while let Some(&(j, d)) = it.peek() {
                if d.is_alphanumeric() || d == '_' {
                    end = j + d.len_utf8();
                    it.next();
                } else {
                    break;
                }
            }
            Tok::Ident(src[i..end].to_string())
        } else if c.is_ascii_digit() {
            let (len, real) = number_len(&src[i..]);
            let text = &src[i..i + len];
            while it.peek().is_some_and(|&(j, _)| j < i + len) {
                it.next();
            }
            if real {
                Tok::Real(text.parse().map_err(|_| err(format!("bad number {text}")))?)
            } else {
                Tok::Int(text.parse().map_err(|_| err(format!("integer {text} out of range")))?)
            }
        } else if c == '\'' || c == '"' {
            it.next();
            let mut s = String::new();
            let mut closed = false;
            while let Some((j, d)) = it.next() {
                if d == c {
                    if it.peek().is_some_and(|&(_, n)| n == c) {
                        it.next();
                        s.push(c);
                        continue;
                    }
                    closed = true;
                    break;
                }
                if d == '\\' {
                    match it.next() {
                        Some((_, 'n')) => s.push('\n'),
                        Some((_, 't')) => s.push('\t'),
                        Some((_, e)) => s.push(e),
                        None => break,
                    }
                    continue;
                }
                if d == '\n' {
                    line += 1;
                    line_start = j + 1;
                }
                s.push(d);
            }
            if !closed {
                return Err(err("unterminated string literal".into()));
            }
            Tok::Str(s)
        } else if let Some(sym) = COMPOSITES.iter().find(|s| src[i..].starts_with(**s)) {
            it.next();
            it.next();
            Tok::Sym(sym)
        } else if let Some(sym) = SINGLES.iter().find(|s| src[i..].starts_with(**s)) {
            it.next();
            Tok::Sym(sym)
        } else {
            return Err(err(format!("unexpected character '{c}'")));
        };
        let end = it.peek().map_or(src.len(), |&(j, _)| j);
        out.push(Token { tok, start: i, end, line: tok_line, col });
    }
    let col = src[line_start..].chars().count() + 1;
    out.push(Token { tok: Tok::Eof, start: src.len(), end: src.len(), line, col });
    Ok(out)
}
