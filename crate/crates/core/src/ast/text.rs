use std::fmt;

use super::Term;
use crate::algebra::AlgebraSet;

/// Canonical text of a de Bruijn term:
/// `end`, `new[h]{annot}. P`, `P | Q`, `n?(h). P`, `n!m. P`.
pub struct TermDisplay<'a> {
    term: &'a Term,
    algs: &'a AlgebraSet,
}

impl Term {
    pub fn display<'a>(&'a self, algs: &'a AlgebraSet) -> TermDisplay<'a> {
        TermDisplay { term: self, algs }
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, algs: &AlgebraSet) -> fmt::Result {
    match t {
        Term::End => f.write_str("end"),
        Term::Res { hint, annot, body } => {
            write!(f, "new[{hint}]{{{}}}. ", annot.display(algs))?;
            write_prefix_body(f, body, algs)
        }
        Term::Par(l, r) => {
            if matches!(**l, Term::Par(..)) {
                f.write_str("(")?;
                write_term(f, l, algs)?;
                f.write_str(")")?;
            } else {
                write_term(f, l, algs)?;
            }
            f.write_str(" | ")?;
            write_term(f, r, algs)
        }
        Term::Recv { chan, hint, body } => {
            write!(f, "{chan}?({hint}). ")?;
            write_prefix_body(f, body, algs)
        }
        Term::Send {
            chan,
            payload,
            body,
        } => {
            write!(f, "{chan}!{payload}. ")?;
            write_prefix_body(f, body, algs)
        }
    }
}

fn write_prefix_body(f: &mut fmt::Formatter<'_>, body: &Term, algs: &AlgebraSet) -> fmt::Result {
    if matches!(body, Term::Par(..)) {
        f.write_str("(")?;
        write_term(f, body, algs)?;
        f.write_str(")")
    } else {
        write_term(f, body, algs)
    }
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.term, self.algs)
    }
}
