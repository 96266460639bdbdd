use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Atom { name: String, quoted: bool },
    Var(String),
    Int(String),
    /// `(` directly after a name, opening an argument list.
    OpenArgs,
    Open,
    Close,
    OpenList,
    CloseList,
    Bar,
    Comma,
    Neck,
    QueryOp,
    End,
    Reserved(String),
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let (mut line, mut col) = (1usize, 1usize);
    // Whether the previous token was a name that may take an argument list.
    let mut after_name = false;

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
            after_name = false;
            bump!();
            continue;
        }
        if c == '%' {
            after_name = false;
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            after_name = false;
            let (l0, c0) = (line, col);
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(ParseError::syntax(l0, c0, "unterminated block comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok| out.push(Token { tok, line: tl, col: tc });
        if c.is_ascii_lowercase() || c.is_ascii_uppercase() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            if c.is_ascii_lowercase() {
                push(Tok::Atom {
                    name: word,
                    quoted: false,
                });
                after_name = true;
            } else {
                push(Tok::Var(word));
                after_name = false;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            push(Tok::Int(chars[start..i].iter().collect()));
            after_name = false;
            continue;
        }
        if c == '\'' {
            bump!();
            let mut name = String::new();
            loop {
                if i >= chars.len() {
                    return Err(ParseError::syntax(tl, tc, "unterminated quoted atom"));
                }
                let d = chars[i];
                if d == '\'' {
                    if chars.get(i + 1) == Some(&'\'') {
                        name.push('\'');
                        bump!();
                        bump!();
                        continue;
                    }
                    bump!();
                    break;
                }
                if d == '\\' {
                    let e = chars.get(i + 1).copied();
                    let decoded = match e {
                        Some('n') => '\n',
                        Some('t') => '\t',
                        Some('\\') => '\\',
                        Some('\'') => '\'',
                        _ => return Err(ParseError::syntax(line, col, "unknown escape in quoted atom")),
                    };
                    name.push(decoded);
                    bump!();
                    bump!();
                    continue;
                }
                if d == '\n' {
                    return Err(ParseError::syntax(line, col, "newline in quoted atom"));
                }
                name.push(d);
                bump!();
            }
            push(Tok::Atom { name, quoted: true });
            after_name = true;
            continue;
        }
        match c {
            '(' => {
                push(if after_name { Tok::OpenArgs } else { Tok::Open });
                bump!();
                after_name = false;
            }
            ')' => {
                push(Tok::Close);
                bump!();
                after_name = false;
            }
            '[' => {
                if chars.get(i + 1) == Some(&']') {
                    push(Tok::Atom {
                        name: "[]".into(),
                        quoted: false,
                    });
                    bump!();
                    bump!();
                    after_name = true;
                } else {
                    push(Tok::OpenList);
                    bump!();
                    after_name = false;
                }
            }
            ']' => {
                push(Tok::CloseList);
                bump!();
                after_name = false;
            }
            '|' => {
                push(Tok::Bar);
                bump!();
                after_name = false;
            }
            ',' => {
                push(Tok::Comma);
                bump!();
                after_name = false;
            }
            '!' | ';' => {
                push(Tok::Reserved(c.to_string()));
                bump!();
                after_name = false;
            }
            _ if SYMBOL_CHARS.contains(c) => {
                // A lone `.` followed by layout or end of input ends a clause.
                if c == '.' {
                    let next = chars.get(i + 1).copied();
                    if next.is_none_or(|n| n.is_whitespace() || n == '%') {
                        push(Tok::End);
                        bump!();
                        after_name = false;
                        continue;
                    }
                }
                let start = i;
                while i < chars.len() && SYMBOL_CHARS.contains(chars[i]) {
                    bump!();
                }
                let sym: String = chars[start..i].iter().collect();
                push(match sym.as_str() {
                    ":-" => Tok::Neck,
                    "?-" => Tok::QueryOp,
                    _ => Tok::Reserved(sym),
                });
                after_name = false;
            }
            _ => {
                return Err(ParseError::syntax(tl, tc, format!("unexpected character {c:?}")));
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}
