//! Tokenizer for query text.

use super::diagnostic::{Diagnostic, Position};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// A bare word: keyword, `a`, `true`, function name.
    Word(String),
    /// `<...>`, unresolved.
    Iri(String),
    PName { prefix: String, local: String },
    /// `?x` or `$x`, without the sigil.
    Var(String),
    /// `_:label`
    Blank(String),
    Str(String),
    LangTag(String),
    Integer(String),
    Decimal(String),
    Double(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Dot,
    Semicolon,
    Comma,
    Star,
    Caret2,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Bang,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("'{w}'"),
            Tok::Iri(i) => format!("<{i}>"),
            Tok::PName { prefix, local } => format!("{prefix}:{local}"),
            Tok::Var(v) => format!("?{v}"),
            Tok::Blank(b) => format!("_:{b}"),
            Tok::Str(s) => format!("{s:?}"),
            Tok::LangTag(l) => format!("@{l}"),
            Tok::Integer(n) | Tok::Decimal(n) | Tok::Double(n) => n.clone(),
            Tok::Eof => "end of input".into(),
            other => format!("'{}'", punct(other)),
        }
    }

    /// Case-insensitive keyword test.
    pub fn is_word(&self, kw: &str) -> bool {
        matches!(self, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }
}

fn punct(t: &Tok) -> &'static str {
    match t {
        Tok::LBrace => "{",
        Tok::RBrace => "}",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBracket => "[",
        Tok::RBracket => "]",
        Tok::Dot => ".",
        Tok::Semicolon => ";",
        Tok::Comma => ",",
        Tok::Star => "*",
        Tok::Caret2 => "^^",
        Tok::Eq => "=",
        Tok::Ne => "!=",
        Tok::Lt => "<",
        Tok::Le => "<=",
        Tok::Gt => ">",
        Tok::Ge => ">=",
        Tok::And => "&&",
        Tok::Or => "||",
        Tok::Bang => "!",
        _ => "?",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Position,
}

struct Lexer<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.offset..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            column: self.col,
            offset: self.offset,
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
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

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let start = self.offset;
        while self.peek().is_some_and(&f) {
            self.bump();
        }
        self.src[start..self.offset].to_owned()
    }

    /// Decides whether `<` opens an IRI. Returns the IRI length in bytes
    /// (excluding brackets) when it does.
    fn iri_ahead(&self) -> Result<Option<usize>, ()> {
        let rest = &self.src[self.offset + 1..];
        for (i, c) in rest.char_indices() {
            match c {
                '>' => return Ok(Some(i)),
                c if c.is_whitespace() || "<\"{}|^`\\".contains(c) => return Ok(None),
                _ => {}
            }
        }
        // Ran off the end: an IRI that was never closed, unless the `<`
        // stands alone as an operator.
        if rest.is_empty() || rest.starts_with('=') {
            Ok(None)
        } else {
            Err(())
        }
    }

    fn string(&mut self, quote: char, start: Position) -> Result<String, Diagnostic> {
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        }
        let mut out = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(Diagnostic::error("unterminated string").at(start));
            };
            match c {
                c if c == quote => {
                    if !long {
                        return Ok(out);
                    }
                    if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                        self.bump();
                        self.bump();
                        return Ok(out);
                    }
                    out.push(c);
                }
                '\n' | '\r' if !long => {
                    return Err(Diagnostic::error("unterminated string").at(start));
                }
                '\\' => {
                    let esc = self.pos();
                    let e = self
                        .bump()
                        .ok_or_else(|| Diagnostic::error("unterminated string").at(start))?;
                    match e {
                        't' => out.push('\t'),
                        'n' => out.push('\n'),
                        'r' => out.push('\r'),
                        'b' => out.push('\u{8}'),
                        'f' => out.push('\u{c}'),
                        '"' => out.push('"'),
                        '\'' => out.push('\''),
                        '\\' => out.push('\\'),
                        'u' | 'U' => {
                            let n = if e == 'u' { 4 } else { 8 };
                            let hex: String = (0..n).filter_map(|_| self.bump()).collect();
                            let ch = u32::from_str_radix(&hex, 16)
                                .ok()
                                .filter(|_| hex.len() == n)
                                .and_then(char::from_u32)
                                .ok_or_else(|| Diagnostic::error("bad unicode escape").at(esc))?;
                            out.push(ch);
                        }
                        other => {
                            return Err(Diagnostic::error(format!("unknown escape \\{other}")).at(esc));
                        }
                    }
                }
                c => out.push(c),
            }
        }
    }

    fn number(&mut self) -> Tok {
        let start = self.offset;
        if matches!(self.peek(), Some('+' | '-')) {
            self.bump();
        }
        self.take_while(|c| c.is_ascii_digit());
        let mut kind = 0;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            self.take_while(|c| c.is_ascii_digit());
            kind = 1;
        }
        if matches!(self.peek(), Some('e' | 'E'))
            && (self.peek_at(1).is_some_and(|c| c.is_ascii_digit())
                || (matches!(self.peek_at(1), Some('+' | '-')) && self.peek_at(2).is_some_and(|c| c.is_ascii_digit())))
        {
            self.bump();
            if matches!(self.peek(), Some('+' | '-')) {
                self.bump();
            }
            self.take_while(|c| c.is_ascii_digit());
            kind = 2;
        }
        let text = self.src[start..self.offset].to_owned();
        match kind {
            0 => Tok::Integer(text),
            1 => Tok::Decimal(text),
            _ => Tok::Double(text),
        }
    }

    fn next(&mut self) -> Result<Token, Diagnostic> {
        self.skip_trivia();
        let pos = self.pos();
        let Some(c) = self.peek() else {
            return Ok(Token { tok: Tok::Eof, pos });
        };
        let single = |t: Tok| Some(t);
        let tok = match c {
            '{' => single(Tok::LBrace),
            '}' => single(Tok::RBrace),
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            '[' => single(Tok::LBracket),
            ']' => single(Tok::RBracket),
            ';' => single(Tok::Semicolon),
            ',' => single(Tok::Comma),
            '*' => single(Tok::Star),
            '=' => single(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = tok {
            self.bump();
            return Ok(Token { tok, pos });
        }
        let is_name_start = |c: char| c.is_alphabetic() || c == '_';
        let is_name_char = |c: char| c.is_alphanumeric() || c == '_' || c == '-';
        let tok = match c {
            '<' => match self.iri_ahead() {
                Ok(Some(len)) => {
                    let iri = self.src[self.offset + 1..self.offset + 1 + len].to_owned();
                    for _ in 0..iri.chars().count() + 2 {
                        self.bump();
                    }
                    Tok::Iri(iri)
                }
                Ok(None) => {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                        Tok::Le
                    } else {
                        Tok::Lt
                    }
                }
                Err(()) => return Err(Diagnostic::error("unterminated IRI").at(pos)),
            },
            '>' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            '!' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    Tok::Ne
                } else {
                    Tok::Bang
                }
            }
            '&' | '|' => {
                self.bump();
                if self.peek() != Some(c) {
                    return Err(Diagnostic::error(format!("expected '{c}{c}'")).at(pos));
                }
                self.bump();
                if c == '&' {
                    Tok::And
                } else {
                    Tok::Or
                }
            }
            '^' => {
                self.bump();
                if self.peek() != Some('^') {
                    return Err(Diagnostic::error("expected '^^'").at(pos));
                }
                self.bump();
                Tok::Caret2
            }
            '?' | '$' => {
                self.bump();
                let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
                if name.is_empty() {
                    return Err(Diagnostic::error("empty variable name").at(pos));
                }
                Tok::Var(name)
            }
            '"' | '\'' => {
                self.bump();
                Tok::Str(self.string(c, pos)?)
            }
            '@' => {
                self.bump();
                let tag = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                if tag.is_empty() {
                    return Err(Diagnostic::error("empty language tag").at(pos));
                }
                Tok::LangTag(tag)
            }
            '.' if !self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => {
                self.bump();
                Tok::Dot
            }
            c if c.is_ascii_digit() || c == '.' || ((c == '+' || c == '-') && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())) => {
                self.number()
            }
            '_' if self.peek_at(1) == Some(':') => {
                self.bump();
                self.bump();
                let label = self.take_while(is_name_char);
                if label.is_empty() {
                    return Err(Diagnostic::error("empty blank node label").at(pos));
                }
                Tok::Blank(label)
            }
            ':' => {
                self.bump();
                Tok::PName {
                    prefix: String::new(),
                    local: self.local_name(),
                }
            }
            c if is_name_start(c) => {
                let word = self.take_while(is_name_char);
                if self.peek() == Some(':') {
                    self.bump();
                    Tok::PName {
                        prefix: word,
                        local: self.local_name(),
                    }
                } else {
                    Tok::Word(word)
                }
            }
            other => {
                return Err(Diagnostic::error(format!("unexpected character {other:?}")).at(pos));
            }
        };
        Ok(Token { tok, pos })
    }

    fn local_name(&mut self) -> String {
        let mut out = String::new();
        loop {
            match self.peek() {
                Some(c) if c.is_alphanumeric() || c == '_' || c == '-' || c == ':' => {
                    out.push(c);
                    self.bump();
                }
                // a dot inside a local name, never at its end
                Some('.') if self.peek_at(1).is_some_and(|c| c.is_alphanumeric() || c == '_') && !out.is_empty() => {
                    out.push('.');
                    self.bump();
                }
                _ => return out,
            }
        }
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut lx = Lexer {
        src: text,
        offset: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        let t = lx.next()?;
        let done = t.tok == Tok::Eof;
        out.push(t);
        if done {
            return Ok(out);
        }
    }
}
