//! Structural congruence as explicit rewrites, and channel-tagged reduction.

mod normal;
mod reduce;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{fmt_path, Child, Name, NuAnnot, Path, Process, Term};

pub use normal::{flatten_direct, flatten_normalize, flatten_rewrites, garbage_collect, prenex};
pub use reduce::{reductions, run, Reduction, TraceStep};

/// The channel a reduction communicates on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    /// Bound inside the reducing process.
    Internal,
    /// Free variable `i` of the reducing process.
    External(usize),
}

impl Channel {
    /// The tag seen from outside one more restriction.
    pub fn dec(self) -> Channel {
        match self {
            Channel::Internal | Channel::External(0) => Channel::Internal,
            Channel::External(n) => Channel::External(n - 1),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Internal => f.write_str("internal"),
            Channel::External(n) => write!(f, "ext {n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CongRule {
    /// `P | (Q | R) ≅ (P | Q) | R`
    CompAssoc,
    /// `P | Q ≅ Q | P`
    CompSym,
    /// `P | end ≅ P`
    CompId,
    /// `ν end ≅ end`
    ScopeEnd,
    /// `ν (P | Q) ≅ (ν P) | lower₀ Q`, if `Q` does not use `0`
    ScopeExt,
    /// `ν ν P ≅ ν ν exchange₀ P`
    ScopeComm,
}

impl CongRule {
    pub const ALL: [CongRule; 6] = [
        CongRule::CompAssoc,
        CongRule::CompSym,
        CongRule::CompId,
        CongRule::ScopeEnd,
        CongRule::ScopeExt,
        CongRule::ScopeComm,
    ];
}

impl fmt::Display for CongRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CongRule::CompAssoc => "comp-assoc",
            CongRule::CompSym => "comp-sym",
            CongRule::CompId => "comp-id",
            CongRule::ScopeEnd => "scope-end",
            CongRule::ScopeExt => "scope-ext",
            CongRule::ScopeComm => "scope-comm",
        })
    }
}

/// Forward rewrites left to right as the rules are written above.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// One congruence step at a position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rewrite {
    pub rule: CongRule,
    pub dir: Direction,
    pub path: Path,
}

impl Rewrite {
    pub fn new(rule: CongRule, dir: Direction, path: Path) -> Rewrite {
        Rewrite { rule, dir, path }
    }

    pub fn inverse(&self) -> Rewrite {
        Rewrite::new(self.rule, self.dir.flip(), self.path.clone())
    }
}

impl fmt::Display for Rewrite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = match self.dir {
            Direction::Forward => "->",
            Direction::Backward => "<-",
        };
        write!(f, "{} {arrow} at {}", self.rule, fmt_path(&self.path))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("path {} does not exist", fmt_path(.0))]
    BadPath(Path),
    #[error("{rule} ({dir:?}) does not match the term at {}", fmt_path(.path))]
    ShapeMismatch {
        rule: CongRule,
        dir: Direction,
        path: Path,
    },
    #[error("scope extrusion needs variable 0 unused in the right component (at {})", fmt_path(.0))]
    UnusedViolation(Path),
}

/// Rewrites the subterm at `path` by one congruence rule.
pub fn apply_cong(
    rule: CongRule,
    dir: Direction,
    path: &[Child],
    p: &Process,
) -> Result<Process, RewriteError> {
    let mut term = p.term().clone();
    let slot = term
        .at_mut(path)
        .ok_or_else(|| RewriteError::BadPath(path.to_vec()))?;
    let mismatch = || RewriteError::ShapeMismatch {
        rule,
        dir,
        path: path.to_vec(),
    };
    let old = std::mem::replace(slot, Term::End);
    *slot = rewrite_node(rule, dir, old).map_err(|e| match e {
        NodeError::Shape => mismatch(),
        NodeError::Unused => RewriteError::UnusedViolation(path.to_vec()),
    })?;
    Ok(Process::new(p.depth(), term).expect("congruence preserves scope"))
}

/// Applies a sequence of rewrites in order.
pub fn apply_all(rewrites: &[Rewrite], p: &Process) -> Result<Process, RewriteError> {
    rewrites
        .iter()
        .try_fold(p.clone(), |q, r| apply_cong(r.rule, r.dir, &r.path, &q))
}

enum NodeError {
    Shape,
    Unused,
}

fn rewrite_node(rule: CongRule, dir: Direction, t: Term) -> Result<Term, NodeError> {
    use CongRule::*;
    use Direction::*;
    match (rule, dir, t) {
        (CompAssoc, Forward, Term::Par(p, qr)) => match *qr {
            Term::Par(q, r) => Ok(Term::Par(Box::new(Term::Par(p, q)), r)),
            _ => Err(NodeError::Shape),
        },
        (CompAssoc, Backward, Term::Par(pq, r)) => match *pq {
            Term::Par(p, q) => Ok(Term::Par(p, Box::new(Term::Par(q, r)))),
            _ => Err(NodeError::Shape),
        },
        (CompSym, _, Term::Par(p, q)) => Ok(Term::Par(q, p)),
        (CompId, Forward, Term::Par(p, e)) if *e == Term::End => Ok(*p),
        (CompId, Backward, p) => Ok(Term::par(p, Term::End)),
        (ScopeEnd, Forward, Term::Res { body, .. }) if *body == Term::End => Ok(Term::End),
        (ScopeEnd, Backward, Term::End) => Ok(Term::res(
            Name::anonymous(),
            NuAnnot::placeholder(),
            Term::End,
        )),
        (ScopeExt, Forward, Term::Res { hint, annot, body }) => match *body {
            Term::Par(p, q) => {
                if !q.unused(0) {
                    return Err(NodeError::Unused);
                }
                Ok(Term::par(
                    Term::Res {
                        hint,
                        annot,
                        body: p,
                    },
                    q.lower(0),
                ))
            }
            _ => Err(NodeError::Shape),
        },
        (ScopeExt, Backward, Term::Par(res, q)) => match *res {
            Term::Res { hint, annot, body } => {
                Ok(Term::res(hint, annot, Term::Par(body, Box::new(q.lift(0)))))
            }
            _ => Err(NodeError::Shape),
        },
        (ScopeComm, _, Term::Res { hint, annot, body }) => match *body {
            Term::Res {
                hint: h2,
                annot: a2,
                body: p,
            } => Ok(Term::res(h2, a2, Term::res(hint, annot, p.exchange(0)))),
            _ => Err(NodeError::Shape),
        },
        _ => Err(NodeError::Shape),
    }
}
