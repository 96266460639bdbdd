use std::collections::HashMap;
use std::sync::Arc;

use super::lexer::{tokenize, Tok, Token};
use super::{ParseError, SourceUnit};
use crate::term::{Clause, Program, Query, Term, Var};

/// Names that introduce constructs outside the definite-clause subset when
/// they appear in operator position.
const RESERVED_WORDS: &[&str] = &["is", "mod", "rem", "xor", "rdiv"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Named variables of the clause being read.
    vars: HashMap<String, Var>,
    anon: u32,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            vars: HashMap::new(),
            anon: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn new_scope(&mut self) {
        self.vars.clear();
        self.anon = 0;
    }

    fn unexpected(&self, tok: &Token, wanted: &str) -> ParseError {
        match &tok.tok {
            Tok::Reserved(s) => ParseError::reserved(tok.line, tok.col, s),
            Tok::Atom { name, quoted: false } if RESERVED_WORDS.contains(&name.as_str()) => {
                ParseError::reserved(tok.line, tok.col, name)
            }
            Tok::Eof => ParseError::syntax(tok.line, tok.col, format!("unexpected end of input, expected {wanted}")),
            other => ParseError::syntax(tok.line, tok.col, format!("unexpected {}, expected {wanted}", describe(other))),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            Err(self.unexpected(&t, what))
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Var(name) => {
                if name == "_" {
                    self.anon += 1;
                    return Ok(Term::Var(Var::with_index(Arc::from("_"), self.anon)));
                }
                let v = self
                    .vars
                    .entry(name.clone())
                    .or_insert_with(|| Var::named(&name))
                    .clone();
                Ok(Term::Var(v))
            }
            Tok::Int(digits) => Ok(Term::atom(&digits)),
            Tok::Atom { name, .. } => {
                if self.peek().tok == Tok::OpenArgs {
                    self.next();
                    let mut args = vec![self.term()?];
                    loop {
                        let t = self.next();
                        match t.tok {
                            Tok::Comma => args.push(self.term()?),
                            Tok::Close => break,
                            _ => return Err(self.unexpected(&t, "`,` or `)`")),
                        }
                    }
                    Ok(Term::app(&name, args))
                } else {
                    Ok(Term::atom(&name))
                }
            }
            Tok::OpenList => {
                let mut items = vec![self.term()?];
                loop {
                    let t = self.next();
                    match t.tok {
                        Tok::Comma => items.push(self.term()?),
                        Tok::Bar => {
                            let tail = self.term()?;
                            self.expect(Tok::CloseList, "`]`")?;
                            return Ok(Term::list_with_tail(items, tail));
                        }
                        Tok::CloseList => return Ok(Term::list(items)),
                        _ => return Err(self.unexpected(&t, "`,`, `|` or `]`")),
                    }
                }
            }
            Tok::Open => {
                let inner = self.term()?;
                self.expect(Tok::Close, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.unexpected(&t, "a term")),
        }
    }

    fn goal(&mut self) -> Result<Term, ParseError> {
        let Token { line, col, .. } = self.peek().clone();
        if let Tok::Atom { name, quoted: false } = &self.peek().tok {
            if name == "not" || name == "call" {
                return Err(ParseError::reserved(line, col, name));
            }
        }
        let g = self.term()?;
        let after = self.peek().clone();
        match &after.tok {
            Tok::Reserved(_) => return Err(self.unexpected(&after, "")),
            Tok::Atom { name, quoted: false } if RESERVED_WORDS.contains(&name.as_str()) => {
                return Err(self.unexpected(&after, ""))
            }
            _ => {}
        }
        match &g {
            Term::Var(_) => Err(ParseError::syntax(line, col, "a variable is not a callable goal")),
            Term::App { functor, .. } if functor.bytes().all(|b| b.is_ascii_digit()) => {
                Err(ParseError::syntax(line, col, "a number is not a callable goal"))
            }
            _ => Ok(g),
        }
    }

    fn body(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut goals = vec![self.goal()?];
        while self.peek().tok == Tok::Comma {
            self.next();
            goals.push(self.goal()?);
        }
        Ok(goals)
    }

    fn end(&mut self) -> Result<(), ParseError> {
        self.expect(Tok::End, "`.`")
    }

    fn unit(&mut self) -> Result<SourceUnit, ParseError> {
        let mut clauses = Vec::new();
        let mut queries = Vec::new();
        loop {
            self.new_scope();
            match self.peek().tok {
                Tok::Eof => break,
                Tok::QueryOp | Tok::Neck => {
                    self.next();
                    if self.peek().tok == Tok::End {
                        queries.push(Query::empty());
                    } else {
                        queries.push(Query::new(self.body()?));
                    }
                    self.end()?;
                }
                _ => {
                    let head = self.goal()?;
                    let body = if self.peek().tok == Tok::Neck {
                        self.next();
                        self.body()?
                    } else {
                        Vec::new()
                    };
                    self.end()?;
                    clauses.push(Clause::new(head, body));
                }
            }
        }
        Ok(SourceUnit {
            program: Program::new(clauses),
            queries,
        })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Atom { name, .. } => format!("atom `{name}`"),
        Tok::Var(v) => format!("variable `{v}`"),
        Tok::Int(i) => format!("integer `{i}`"),
        Tok::OpenArgs | Tok::Open => "`(`".into(),
        Tok::Close => "`)`".into(),
        Tok::OpenList => "`[`".into(),
        Tok::CloseList => "`]`".into(),
        Tok::Bar => "`|`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Neck => "`:-`".into(),
        Tok::QueryOp => "`?-`".into(),
        Tok::End => "`.`".into(),
        Tok::Reserved(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses a `.pl` source: clauses plus optional `?- ...` queries.
pub fn parse_program(text: &str) -> Result<SourceUnit, ParseError> {
    Parser::new(text)?.unit()
}

/// Parses a conjunction of atoms. A leading `?-` and a trailing `.` are
/// both optional; an empty or blank string is the empty query.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let mut p = Parser::new(text)?;
    if p.peek().tok == Tok::QueryOp {
        p.next();
    }
    if matches!(p.peek().tok, Tok::Eof | Tok::End) {
        return Ok(Query::empty());
    }
    let atoms = p.body()?;
    if p.peek().tok == Tok::End {
        p.next();
    }
    let t = p.next();
    if t.tok != Tok::Eof {
        return Err(p.unexpected(&t, "end of query"));
    }
    Ok(Query::new(atoms))
}

/// Parses a single term (no trailing `.`).
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    let rest = p.next();
    if rest.tok != Tok::Eof {
        return Err(p.unexpected(&rest, "end of term"));
    }
    Ok(t)
}
