use super::{Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(String),
    Semi,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Assign,
    EqEq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Int(s) => format!("integer `{s}`"),
            TokenKind::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            TokenKind::Semi => ";",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::Comma => ",",
            TokenKind::Assign => "=",
            TokenKind::EqEq => "==",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::Caret => "^",
            TokenKind::Ident(_) | TokenKind::Int(_) | TokenKind::Eof => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

/// Splits source into tokens. `#` and `//` start line comments.
pub fn tokenize(source: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut tokens = Vec::new();
    let mut chars = source.char_indices().peekable();
    let (mut line, mut column) = (1u32, 1u32);

    while let Some(&(offset, ch)) = chars.peek() {
        let start = Span { line, column, offset };
        let advance = |chars: &mut std::iter::Peekable<std::str::CharIndices>, line: &mut u32, column: &mut u32| {
            if let Some((_, c)) = chars.next() {
                if c == '\n' {
                    *line += 1;
                    *column = 1;
                } else {
                    *column += 1;
                }
            }
        };

        if ch.is_whitespace() {
            advance(&mut chars, &mut line, &mut column);
            continue;
        }
        if ch == '#' || (ch == '/' && source[offset..].starts_with("//")) {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                advance(&mut chars, &mut line, &mut column);
            }
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            let mut s = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    advance(&mut chars, &mut line, &mut column);
                } else {
                    break;
                }
            }
            tokens.push(Token { kind: TokenKind::Ident(s), span: start });
            continue;
        }
        if ch.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    advance(&mut chars, &mut line, &mut column);
                } else {
                    break;
                }
            }
            tokens.push(Token { kind: TokenKind::Int(s), span: start });
            continue;
        }
        let kind = match ch {
            ';' => TokenKind::Semi,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '[' => TokenKind::LBracket,
            ']' => TokenKind::RBracket,
            ',' => TokenKind::Comma,
            '+' => TokenKind::Plus,
            '-' => TokenKind::Minus,
            '*' => TokenKind::Star,
            '/' => TokenKind::Slash,
            '^' => TokenKind::Caret,
            '=' if source[offset..].starts_with("==") => {
                advance(&mut chars, &mut line, &mut column);
                TokenKind::EqEq
            }
            '=' => TokenKind::Assign,
            other => return Err(Diagnostic::error(format!("unexpected character `{other}`"), start)),
        };
        advance(&mut chars, &mut line, &mut column);
        tokens.push(Token { kind, span: start });
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        span: Span { line, column, offset: source.len() },
    });
    Ok(tokens)
}
