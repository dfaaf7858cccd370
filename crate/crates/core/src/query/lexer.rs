use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    /// Quoted node name, without the quotes.
    Str(String),
    Pos { index: usize, next: bool },
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    Comma,
    Dot,
    Plus,
    Minus,
    Star,
    Arrow,
    Assign,
    Semi,
    Colon,
    Implies,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Pos { index, next } => format!("`@{index}{}`", if *next { "'" } else { "" }),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Arrow => "->",
            Tok::Assign => ":=",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Implies => "=>",
            _ => "?",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let (tl, tc) = (line, col);
        let err = |msg: String| SyntaxError::new(tl, tc, msg);
        let peek = chars.get(i + 1).copied();

        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            while i < chars.len() && chars[i] == '\'' {
                s.push('\'');
                bump!();
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                bump!();
            }
            Tok::Int(s.parse().map_err(|_| err(format!("integer literal {s} out of range")))?)
        } else if c == '@' {
            bump!();
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                bump!();
            }
            let index: usize = s
                .parse()
                .map_err(|_| err("expected a position index after `@`".to_string()))?;
            if index == 0 {
                return Err(err("position variables start at @1".to_string()));
            }
            let next = i < chars.len() && chars[i] == '\'';
            if next {
                bump!();
            }
            Tok::Pos { index, next }
        } else if c == '"' {
            bump!();
            let mut s = String::new();
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\n' {
                    return Err(err("unterminated node name".to_string()));
                }
                s.push(chars[i]);
                bump!();
            }
            if i >= chars.len() {
                return Err(err("unterminated node name".to_string()));
            }
            bump!();
            Tok::Str(s)
        } else {
            let two = |a: char, b: char| c == a && peek == Some(b);
            let (tok, len) = if two('<', '=') {
                (Tok::Le, 2)
            } else if two('>', '=') {
                (Tok::Ge, 2)
            } else if two('!', '=') {
                (Tok::Ne, 2)
            } else if two('-', '>') {
                (Tok::Arrow, 2)
            } else if two(':', '=') {
                (Tok::Assign, 2)
            } else if two('=', '>') {
                (Tok::Implies, 2)
            } else {
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '<' => Tok::Lt,
                    '>' => Tok::Gt,
                    '=' => Tok::Eq,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    ';' => Tok::Semi,
                    ':' => Tok::Colon,
                    other => return Err(err(format!("unexpected character {other:?}"))),
                };
                (t, 1)
            };
            for _ in 0..len {
                bump!();
            }
            tok
        };
        out.push(Token {
            tok,
            line: tl,
            col: tc,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn path_constraint_arrow() {
        assert_eq!(
            toks("s -p-> t"),
            vec![
                Tok::Ident("s".into()),
                Tok::Minus,
                Tok::Ident("p".into()),
                Tok::Arrow,
                Tok::Ident("t".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_and_primes() {
        assert_eq!(
            toks("@1' @12 y'"),
            vec![
                Tok::Pos { index: 1, next: true },
                Tok::Pos { index: 12, next: false },
                Tok::Ident("y'".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_locations() {
        let t = tokenize("# hi\n  MATCH").unwrap();
        assert_eq!((t[0].line, t[0].col), (2, 3));
        let e = tokenize("MATCH $").unwrap_err();
        assert_eq!((e.line, e.col), (1, 7));
    }
}
