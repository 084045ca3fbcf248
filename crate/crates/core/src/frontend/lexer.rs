use super::diagnostics::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Let,
    In,
    Fun,
    TFun,
    Box,
    Unbox,
    Top,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Star,
    Colon,
    Eq,
    Arrow,
    FatArrow,
    Sub,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Ident(_) => "identifier",
            Tok::Let => "let",
            Tok::In => "in",
            Tok::Fun => "fun",
            Tok::TFun => "tfun",
            Tok::Box => "box",
            Tok::Unbox => "unbox",
            Tok::Top => "Top",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Star => "*",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::Arrow => "->",
            Tok::FatArrow => "=>",
            Tok::Sub => "<:",
            Tok::Eof => "<eof>",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "let" => Tok::Let,
        "in" => Tok::In,
        "fun" => Tok::Fun,
        "tfun" => Tok::TFun,
        "box" => Tok::Box,
        "unbox" => Tok::Unbox,
        "Top" => Tok::Top,
        _ => return None,
    })
}

pub fn is_keyword(word: &str) -> bool {
    keyword(word).is_some()
}

/// Split `src` into tokens. `--` starts a line comment. The glyphs `□ ∘ ⊤ ⋆
/// → ⇒ λ Λ` are accepted as aliases for `box unbox Top * -> => fun tfun`.
pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '-' && src[start..].starts_with("--") {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        if is_ident_start(c) {
            let mut end = start;
            while let Some(&(i, c)) = chars.peek() {
                if !is_ident_continue(c) {
                    break;
                }
                end = i + c.len_utf8();
                chars.next();
            }
            let word = &src[start..end];
            let tok = keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string()));
            out.push(Token {
                tok,
                span: Span::new(start, end),
            });
            continue;
        }
        chars.next();
        let two = |next: char| src[start + c.len_utf8()..].starts_with(next);
        let (tok, len) = match c {
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ',' => (Tok::Comma, 1),
            '*' | '⋆' => (Tok::Star, c.len_utf8()),
            ':' => (Tok::Colon, 1),
            '-' if two('>') => (Tok::Arrow, 2),
            '=' if two('>') => (Tok::FatArrow, 2),
            '=' => (Tok::Eq, 1),
            '<' if two(':') => (Tok::Sub, 2),
            '□' => (Tok::Box, c.len_utf8()),
            '∘' => (Tok::Unbox, c.len_utf8()),
            '⊤' => (Tok::Top, c.len_utf8()),
            '→' => (Tok::Arrow, c.len_utf8()),
            '⇒' => (Tok::FatArrow, c.len_utf8()),
            'λ' => (Tok::Fun, c.len_utf8()),
            'Λ' => (Tok::TFun, c.len_utf8()),
            _ => {
                return Err(Diagnostic::error(
                    "E_SYNTAX",
                    Some(Span::new(start, start + c.len_utf8())),
                    format!("unexpected character `{c}`"),
                ))
            }
        };
        if len > c.len_utf8() {
            chars.next();
        }
        out.push(Token {
            tok,
            span: Span::new(start, start + len),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(src.len(), src.len()),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn ascii_and_glyphs_agree() {
        assert_eq!(toks("box {*} Top -> =>"), toks("□ {⋆} ⊤ → ⇒"));
        assert_eq!(toks("fun tfun unbox"), toks("λ Λ ∘"));
    }

    #[test]
    fn comments_and_spans() {
        let ts = lex("-- hello\nlet x' = y in x'").unwrap();
        assert_eq!(ts[0].tok, Tok::Let);
        assert_eq!(ts[0].span, Span::new(9, 12));
        assert_eq!(ts[1].tok, Tok::Ident("x'".into()));
    }

    #[test]
    fn rejects_stray_characters() {
        let d = lex("let x = ? in x").unwrap_err();
        assert_eq!(d.code, "E_SYNTAX");
        assert_eq!(d.span, Some(Span::new(8, 9)));
    }
}
