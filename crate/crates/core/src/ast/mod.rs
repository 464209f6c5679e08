//! Process syntax: named surface terms ([`Raw`]) and de Bruijn terms
//! ([`Term`], wrapped with their scope depth in [`Process`]).

mod ops;
mod raw;
mod text;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::checker::NuAnnot;
pub use raw::{alpha_eq, barendregt, from_raw, to_raw, well_scoped, Raw, ScopeWitness};
pub use text::TermDisplay;

/// Words of the surface grammar that cannot be used as names.
pub const KEYWORDS: [&str; 5] = ["end", "new", "free", "unit", "chan"];

/// A channel name or binder hint.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Name(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{0}` is not a valid name")]
pub struct NameError(pub String);

impl Name {
    pub fn new(text: impl Into<String>) -> Result<Name, NameError> {
        let text = text.into();
        if Name::is_valid(&text) {
            Ok(Name(text))
        } else {
            Err(NameError(text))
        }
    }

    pub fn is_valid(text: &str) -> bool {
        let mut chars = text.chars();
        let Some(first) = chars.next() else {
            return false;
        };
        (first.is_ascii_alphabetic() || first == '_')
            && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '\'' | '^'))
            && !KEYWORDS.contains(&text)
    }

    /// Hint used for binders that were never given a name.
    pub fn anonymous() -> Name {
        Name("_".to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The name with any trailing `^n` suffix removed.
    pub fn base(&self) -> &str {
        match self.0.rsplit_once('^') {
            Some((b, n))
                if !b.is_empty() && !n.is_empty() && n.bytes().all(|c| c.is_ascii_digit()) =>
            {
                b
            }
            _ => &self.0,
        }
    }

    /// The numeric `^n` suffix, if present.
    pub fn suffix(&self) -> Option<usize> {
        let b = self.base();
        (b.len() < self.0.len())
            .then(|| self.0[b.len() + 1..].parse().ok())
            .flatten()
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Selects a child of a process node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Child {
    ResBody,
    ParLeft,
    ParRight,
    RecvBody,
    SendBody,
}

impl fmt::Display for Child {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Child::ResBody => "new",
            Child::ParLeft => "left",
            Child::ParRight => "right",
            Child::RecvBody => "recv",
            Child::SendBody => "send",
        })
    }
}

/// A route from the root of a term to a subterm.
pub type Path = Vec<Child>;

pub fn fmt_path(path: &[Child]) -> String {
    if path.is_empty() {
        return "root".to_string();
    }
    path.iter()
        .map(Child::to_string)
        .collect::<Vec<_>>()
        .join("/")
}

/// A de Bruijn process term. Variables are indices; `0` is the innermost binder.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    End,
    Res {
        hint: Name,
        annot: NuAnnot,
        body: Box<Term>,
    },
    Par(Box<Term>, Box<Term>),
    Recv {
        chan: usize,
        hint: Name,
        body: Box<Term>,
    },
    Send {
        chan: usize,
        payload: usize,
        body: Box<Term>,
    },
}

impl Term {
    pub fn res(hint: Name, annot: NuAnnot, body: Term) -> Term {
        Term::Res {
            hint,
            annot,
            body: Box::new(body),
        }
    }

    pub fn par(left: Term, right: Term) -> Term {
        Term::Par(Box::new(left), Box::new(right))
    }

    pub fn recv(chan: usize, hint: Name, body: Term) -> Term {
        Term::Recv {
            chan,
            hint,
            body: Box::new(body),
        }
    }

    pub fn send(chan: usize, payload: usize, body: Term) -> Term {
        Term::Send {
            chan,
            payload,
            body: Box::new(body),
        }
    }

    pub fn child(&self, c: Child) -> Option<&Term> {
        match (c, self) {
            (Child::ResBody, Term::Res { body, .. })
            | (Child::RecvBody, Term::Recv { body, .. })
            | (Child::SendBody, Term::Send { body, .. }) => Some(body),
            (Child::ParLeft, Term::Par(l, _)) => Some(l),
            (Child::ParRight, Term::Par(_, r)) => Some(r),
            _ => None,
        }
    }

    pub fn child_mut(&mut self, c: Child) -> Option<&mut Term> {
        match (c, self) {
            (Child::ResBody, Term::Res { body, .. })
            | (Child::RecvBody, Term::Recv { body, .. })
            | (Child::SendBody, Term::Send { body, .. }) => Some(body),
            (Child::ParLeft, Term::Par(l, _)) => Some(l),
            (Child::ParRight, Term::Par(_, r)) => Some(r),
            _ => None,
        }
    }

    pub fn at(&self, path: &[Child]) -> Option<&Term> {
        path.iter().try_fold(self, |t, &c| t.child(c))
    }

    pub fn at_mut(&mut self, path: &[Child]) -> Option<&mut Term> {
        path.iter().try_fold(self, |t, &c| t.child_mut(c))
    }

    /// Binders crossed when following `path`.
    pub fn binders_on(path: &[Child]) -> usize {
        path.iter()
            .filter(|c| matches!(c, Child::ResBody | Child::RecvBody))
            .count()
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + match self {
            Term::End => 0,
            Term::Res { body, .. } | Term::Recv { body, .. } | Term::Send { body, .. } => {
                body.size()
            }
            Term::Par(l, r) => l.size() + r.size(),
        }
    }

    /// Equality on indices and annotations, ignoring binder hints.
    pub fn eq_modulo_hints(&self, other: &Term) -> bool {
        match (self, other) {
            (Term::End, Term::End) => true,
            (
                Term::Res {
                    annot: a, body: b, ..
                },
                Term::Res {
                    annot: a2,
                    body: b2,
                    ..
                },
            ) => a == a2 && b.eq_modulo_hints(b2),
            (Term::Par(l, r), Term::Par(l2, r2)) => l.eq_modulo_hints(l2) && r.eq_modulo_hints(r2),
            (
                Term::Recv {
                    chan: c, body: b, ..
                },
                Term::Recv {
                    chan: c2, body: b2, ..
                },
            ) => c == c2 && b.eq_modulo_hints(b2),
            (
                Term::Send {
                    chan: c,
                    payload: p,
                    body: b,
                },
                Term::Send {
                    chan: c2,
                    payload: p2,
                    body: b2,
                },
            ) => c == c2 && p == p2 && b.eq_modulo_hints(b2),
            _ => false,
        }
    }

    /// Checks that every variable is below `depth` plus the binders above it.
    pub fn check_scope(&self, depth: usize) -> Result<(), ScopeError> {
        fn go(t: &Term, depth: usize, path: &mut Path) -> Result<(), ScopeError> {
            let bad = |index: usize, path: &Path| ScopeError::OutOfScope {
                index,
                depth,
                path: path.clone(),
            };
            match t {
                Term::End => Ok(()),
                Term::Res { body, .. } => {
                    path.push(Child::ResBody);
                    go(body, depth + 1, path)?;
                    path.pop();
                    Ok(())
                }
                Term::Par(l, r) => {
                    path.push(Child::ParLeft);
                    go(l, depth, path)?;
                    path.pop();
                    path.push(Child::ParRight);
                    go(r, depth, path)?;
                    path.pop();
                    Ok(())
                }
                Term::Recv { chan, body, .. } => {
                    if *chan >= depth {
                        return Err(bad(*chan, path));
                    }
                    path.push(Child::RecvBody);
                    go(body, depth + 1, path)?;
                    path.pop();
                    Ok(())
                }
                Term::Send {
                    chan,
                    payload,
                    body,
                } => {
                    for &v in [chan, payload] {
                        if v >= depth {
                            return Err(bad(v, path));
                        }
                    }
                    path.push(Child::SendBody);
                    go(body, depth, path)?;
                    path.pop();
                    Ok(())
                }
            }
        }
        go(self, depth, &mut Vec::new())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScopeError {
    #[error("name `{name}` is not bound (at {})", fmt_path(.path))]
    Unbound { name: Name, path: Path },
    #[error("index {index} escapes a scope of depth {depth} (at {})", fmt_path(.path))]
    OutOfScope {
        index: usize,
        depth: usize,
        path: Path,
    },
    #[error("variable {0} is used")]
    Used(usize),
    #[error("index {index} is not valid at depth {depth}")]
    BadIndex { index: usize, depth: usize },
    #[error("context has {names} names for a process of depth {depth}")]
    ContextLength { names: usize, depth: usize },
}

/// A term together with the number of variables in scope around it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Process {
    depth: usize,
    term: Term,
}

impl Process {
    pub fn new(depth: usize, term: Term) -> Result<Process, ScopeError> {
        term.check_scope(depth)?;
        Ok(Process { depth, term })
    }

    pub fn end(depth: usize) -> Process {
        Process {
            depth,
            term: Term::End,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn term(&self) -> &Term {
        &self.term
    }

    pub fn into_term(self) -> Term {
        self.term
    }

    /// Structural equality ignoring binder hints.
    pub fn process_eq(&self, other: &Process) -> bool {
        self.depth == other.depth && self.term.eq_modulo_hints(&other.term)
    }

    pub fn display<'a>(&'a self, algs: &'a crate::algebra::AlgebraSet) -> TermDisplay<'a> {
        self.term.display(algs)
    }
}

/// See [`Process::process_eq`].
pub fn process_eq(p: &Process, q: &Process) -> bool {
    p.process_eq(q)
}

pub use ops::{exchange, lift, lower, subst, unused};
