use std::fmt;

use crate::term::{canonical_names, Clause, Program, Query, Term, Var, CONS, NIL};

fn is_plain_atom(name: &str) -> bool {
    let mut cs = name.chars();
    match cs.next() {
        Some(c) if c.is_ascii_lowercase() => cs.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => name == NIL || (!name.is_empty() && name.bytes().all(|b| b.is_ascii_digit())),
    }
}

pub fn write_atom(f: &mut impl fmt::Write, name: &str) -> fmt::Result {
    if is_plain_atom(name) {
        return f.write_str(name);
    }
    f.write_char('\'')?;
    for c in name.chars() {
        match c {
            '\'' => f.write_str("''")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('\'')
}

pub fn write_term(f: &mut impl fmt::Write, t: &Term, var_name: &dyn Fn(&Var) -> String) -> fmt::Result {
    match t {
        Term::Var(v) => f.write_str(&var_name(v)),
        Term::App { functor, args } if &**functor == CONS && args.len() == 2 => {
            f.write_char('[')?;
            write_term(f, &args[0], var_name)?;
            let mut tail = &args[1];
            loop {
                match tail {
                    Term::App { functor, args } if &**functor == CONS && args.len() == 2 => {
                        f.write_char(',')?;
                        write_term(f, &args[0], var_name)?;
                        tail = &args[1];
                    }
                    t if t.is_nil() => break,
                    t => {
                        f.write_char('|')?;
                        write_term(f, t, var_name)?;
                        break;
                    }
                }
            }
            f.write_char(']')
        }
        Term::App { functor, args } => {
            write_atom(f, functor)?;
            if args.is_empty() {
                return Ok(());
            }
            f.write_char('(')?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_char(',')?;
                }
                write_term(f, a, var_name)?;
            }
            f.write_char(')')
        }
    }
}

/// Renders a term, naming variables with their display form.
pub fn term_to_string(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t, &|v: &Var| v.to_string()).expect("writing to a String");
    s
}

/// Prints a clause with variables renamed `X1, X2, ...` in order of first
/// occurrence.
pub fn print_clause(c: &Clause) -> String {
    let names = canonical_names(&c.vars());
    let name_of = |v: &Var| names[v].name.to_string();
    let mut s = String::new();
    write_term(&mut s, &c.head, &name_of).expect("writing to a String");
    for (i, b) in c.body.iter().enumerate() {
        s.push_str(if i == 0 { " :- " } else { ", " });
        write_term(&mut s, b, &name_of).expect("writing to a String");
    }
    s.push('.');
    s
}

/// Canonical program text: one clause per line.
pub fn print_program(p: &Program) -> String {
    p.clauses.iter().map(|c| print_clause(c) + "\n").collect()
}

/// Prints a query keeping the user's variable names.
pub fn print_query(q: &Query) -> String {
    q.to_string()
}

pub fn print_unit(u: &super::SourceUnit) -> String {
    let mut out = print_program(&u.program);
    for q in &u.queries {
        let names = canonical_names(&q.vars());
        let name_of = |v: &Var| names[v].name.to_string();
        out.push_str("?- ");
        for (i, a) in q.atoms.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write_term(&mut out, a, &name_of).expect("writing to a String");
        }
        out.push_str(".\n");
    }
    out
}
