//! Reader and writer for the definite-clause subset: facts, rules with `:-`
//! and `,`, list sugar, quoted atoms and `%` comments. Cut, negation,
//! disjunction and arithmetic are rejected with a dedicated error.

mod lexer;
mod parser;
mod printer;

pub use parser::{parse_program, parse_query, parse_term};
pub use printer::{
    print_clause, print_program, print_query, print_unit, term_to_string, write_atom, write_term,
};

use crate::term::{Program, Query};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: `{construct}` is outside the supported definite-clause subset")]
    Reserved {
        line: usize,
        col: usize,
        construct: String,
    },
}

impl ParseError {
    pub(crate) fn syntax(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    pub(crate) fn reserved(line: usize, col: usize, construct: &str) -> Self {
        ParseError::Reserved {
            line,
            col,
            construct: construct.to_string(),
        }
    }

    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, col, .. } | ParseError::Reserved { line, col, .. } => (*line, *col),
        }
    }
}

/// A parsed source file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceUnit {
    pub program: Program,
    pub queries: Vec<Query>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{PredSym, Term};

    const EX22: &str = "a :- b,c.\nb :- d.\nc.\nd.\n";

    #[test]
    fn example_program_parses() {
        let u = parse_program(EX22).unwrap();
        assert_eq!(u.program.len(), 4);
        let preds = u.program.predicates();
        for p in ["a", "b", "c", "d"] {
            assert!(preds.contains(&PredSym::new(p, 0)));
        }
        assert_eq!(u.program.clauses[0].body.len(), 2);
    }

    #[test]
    fn body_order_kept() {
        let u = parse_program("p(X) :- q(X), r.").unwrap();
        assert_eq!(u.program.len(), 1);
        let c = &u.program.clauses[0];
        assert_eq!(c.body.len(), 2);
        assert_eq!(c.body[1], Term::atom("r"));
    }

    #[test]
    fn reserved_constructs() {
        for src in ["p :- q ; r.", "p :- !, q.", "p :- \\+ q.", "p(X) :- X is 1.", "p(X) :- q(X+1).", "p :- not(q)."] {
            match parse_program(src) {
                Err(ParseError::Reserved { .. }) => {}
                other => panic!("{src}: expected reserved-construct error, got {other:?}"),
            }
        }
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_program("p(a).\nq(b.\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
        assert_eq!(err.position().0, 2);
    }

    #[test]
    fn list_sugar() {
        let t = parse_term("[a,b|T]").unwrap();
        assert_eq!(
            t,
            Term::cons(Term::atom("a"), Term::cons(Term::atom("b"), Term::var("T")))
        );
        assert_eq!(term_to_string(&t), "[a,b|T]");
        assert_eq!(parse_term("'.'(a,'.'(b,[]))").unwrap(), parse_term("[a,b]").unwrap());
        let printed = print_program(&parse_program("p([a,b]).").unwrap().program);
        assert_eq!(printed, "p([a,b]).\n");
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let u = parse_program("p(_, _).").unwrap();
        let args = u.program.clauses[0].head.args();
        assert_ne!(args[0], args[1]);
    }

    #[test]
    fn quoted_atoms_round_trip() {
        let u = parse_program("'q_a/2'(X, 'it''s') :- 'Foo'.").unwrap();
        let text = print_program(&u.program);
        assert_eq!(text, "'q_a/2'(X1,'it''s') :- 'Foo'.\n");
        assert_eq!(parse_program(&text).unwrap().program, u.program.canonical());
    }

    #[test]
    fn empty_program_prints_empty() {
        assert_eq!(print_program(&Program::default()), "");
    }

    #[test]
    fn queries_in_source() {
        let u = parse_program("p(a).\n?- p(X).\n?- p(a), p(b).").unwrap();
        assert_eq!(u.queries.len(), 2);
        assert_eq!(u.queries[1].len(), 2);
        let q = parse_query("sameleaves(T1,T2)").unwrap();
        assert_eq!(q.len(), 1);
        assert!(parse_query("  ").unwrap().is_empty());
        assert_eq!(parse_query("?- a, b.").unwrap().len(), 2);
    }

    #[test]
    fn integers_are_constants() {
        assert_eq!(parse_term("f(12)").unwrap(), Term::app("f", vec![Term::atom("12")]));
        assert!(parse_program("p :- 1.").is_err());
    }

    #[test]
    fn comments_skipped() {
        let u = parse_program("% header\np. % trailing\n/* block */ q.").unwrap();
        assert_eq!(u.program.len(), 2);
    }
}
