use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Int(u64),
    Ident(String),
    Kw(Kw),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    NotEq,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kw {
    Set,
    To,
    For,
    From,
    Do,
    End,
    While,
    If,
    Then,
    Else,
    Return,
    And,
    Or,
    Not,
    Mod,
    Length,
    Append,
    Swap,
    True,
    False,
}

const KEYWORDS: &[(&str, Kw)] = &[
    ("set", Kw::Set),
    ("to", Kw::To),
    ("for", Kw::For),
    ("from", Kw::From),
    ("do", Kw::Do),
    ("end", Kw::End),
    ("while", Kw::While),
    ("if", Kw::If),
    ("then", Kw::Then),
    ("else", Kw::Else),
    ("return", Kw::Return),
    ("and", Kw::And),
    ("or", Kw::Or),
    ("not", Kw::Not),
    ("mod", Kw::Mod),
    ("length", Kw::Length),
    ("append", Kw::Append),
    ("swap", Kw::Swap),
    ("true", Kw::True),
    ("false", Kw::False),
];

impl Kw {
    pub(crate) fn text(self) -> &'static str {
        KEYWORDS
            .iter()
            .find(|(_, kw)| *kw == self)
            .map(|(s, _)| *s)
            .unwrap_or("?")
    }
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Kw(kw) => format!("`{}`", kw.text()),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::NotEq => "`!=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = source.chars().collect();
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
        let (start_line, start_col) = (line, col);
        let push = |tokens: &mut Vec<Token>, tok| {
            tokens.push(Token {
                tok,
                line: start_line,
                column: start_col,
            })
        };

        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let value = text.parse::<u64>().map_err(|_| ParseError::Syntax {
                line: start_line,
                column: start_col,
                message: format!("integer literal `{text}` is too large"),
            })?;
            push(&mut tokens, Tok::Int(value));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = KEYWORDS
                .iter()
                .find(|(s, _)| *s == word)
                .map(|(_, kw)| Tok::Kw(*kw))
                .unwrap_or(Tok::Ident(word));
            push(&mut tokens, tok);
            continue;
        }

        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('!', Some('=')) => (Tok::NotEq, 2),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (',', _) => (Tok::Comma, 1),
            _ => {
                return Err(ParseError::Syntax {
                    line,
                    column: col,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        push(&mut tokens, tok);
        i += width;
        col += width;
    }

    tokens.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(tokens)
}
