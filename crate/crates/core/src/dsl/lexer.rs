use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Wedge,
    DotDot,
    Arrow,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Int(n) => n.to_string(),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Eof => "end of input".into(),
            other => other.symbol().into(),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::Wedge => "/\\",
            Tok::DotDot => "..",
            Tok::Arrow => "->",
            _ => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
    /// Source text of the token, for error messages.
    pub text: String,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col, start) = (line, col, i);
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        let peek = chars.get(i + 1).copied();
        let tok = match c {
            '(' => {
                adv(1, &mut i, &mut col);
                Tok::LParen
            }
            ')' => {
                adv(1, &mut i, &mut col);
                Tok::RParen
            }
            '[' => {
                adv(1, &mut i, &mut col);
                Tok::LBracket
            }
            ']' => {
                adv(1, &mut i, &mut col);
                Tok::RBracket
            }
            '{' => {
                adv(1, &mut i, &mut col);
                Tok::LBrace
            }
            '}' => {
                adv(1, &mut i, &mut col);
                Tok::RBrace
            }
            ',' => {
                adv(1, &mut i, &mut col);
                Tok::Comma
            }
            ':' => {
                adv(1, &mut i, &mut col);
                Tok::Colon
            }
            '=' => {
                adv(1, &mut i, &mut col);
                Tok::Eq
            }
            '+' => {
                adv(1, &mut i, &mut col);
                Tok::Plus
            }
            '-' | '−' if peek == Some('>') => {
                adv(2, &mut i, &mut col);
                Tok::Arrow
            }
            '→' => {
                adv(1, &mut i, &mut col);
                Tok::Arrow
            }
            '-' | '−' => {
                adv(1, &mut i, &mut col);
                Tok::Minus
            }
            '*' | '·' => {
                adv(1, &mut i, &mut col);
                Tok::Star
            }
            '/' if peek == Some('\\') => {
                adv(2, &mut i, &mut col);
                Tok::Wedge
            }
            '/' => {
                adv(1, &mut i, &mut col);
                Tok::Slash
            }
            '∧' => {
                adv(1, &mut i, &mut col);
                Tok::Wedge
            }
            '^' => {
                adv(1, &mut i, &mut col);
                Tok::Caret
            }
            '.' if peek == Some('.') => {
                adv(2, &mut i, &mut col);
                Tok::DotDot
            }
            '"' => {
                adv(1, &mut i, &mut col);
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None | Some('\n') => {
                            return Err(ParseError {
                                line: start_line,
                                column: start_col,
                                message: "unterminated string literal".into(),
                                token: "\"".into(),
                            })
                        }
                        Some('"') => {
                            adv(1, &mut i, &mut col);
                            break;
                        }
                        Some(ch) => {
                            s.push(*ch);
                            adv(1, &mut i, &mut col);
                        }
                    }
                }
                Tok::Str(s)
            }
            '∗' => {
                adv(1, &mut i, &mut col);
                Tok::Ident("star".into())
            }
            'π' if !peek.is_some_and(is_ident_char) => {
                adv(1, &mut i, &mut col);
                Tok::Ident("pi".into())
            }
            d if d.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let n = text.parse::<u64>().map_err(|_| ParseError {
                    line: start_line,
                    column: start_col,
                    message: "integer literal too large".into(),
                    token: text.clone(),
                })?;
                adv(j - i, &mut i, &mut col);
                Tok::Int(n)
            }
            a if is_ident_start(a) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                let mut text: String = chars[i..j].iter().collect();
                adv(j - i, &mut i, &mut col);
                // `ι_X` is the Unicode spelling of `i_X`.
                if let Some(rest) = text.strip_prefix("ι_") {
                    text = format!("i_{rest}");
                }
                if text == "wedge" {
                    Tok::Wedge
                } else {
                    Tok::Ident(text)
                }
            }
            other => {
                return Err(ParseError {
                    line: start_line,
                    column: start_col,
                    message: "unexpected character".into(),
                    token: other.to_string(),
                })
            }
        };
        let text: String = chars[start..i].iter().collect();
        out.push(Token { tok, line: start_line, column: start_col, text });
    }
    // End of input is reported at the last character so positions stay
    // inside the text.
    let (eline, ecol) = if chars.is_empty() {
        (1, 1)
    } else if chars[chars.len() - 1] == '\n' {
        let prev = chars[..chars.len() - 1].iter().rev().take_while(|&&c| c != '\n').count();
        (line - 1, prev + 1)
    } else {
        (line, col - 1)
    };
    out.push(Token { tok: Tok::Eof, line: eline, column: ecol, text: String::new() });
    Ok(out)
}
