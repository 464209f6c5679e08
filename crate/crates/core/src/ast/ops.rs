use super::{Process, ScopeError, Term};

/// Applies `f(v, cutoff)` to every variable occurrence, where `cutoff` counts
/// the binders crossed so far.
fn rename(t: &Term, cutoff: usize, f: &impl Fn(usize, usize) -> usize) -> Term {
    match t {
        Term::End => Term::End,
        Term::Res { hint, annot, body } => Term::Res {
            hint: hint.clone(),
            annot: annot.clone(),
            body: Box::new(rename(body, cutoff + 1, f)),
        },
        Term::Par(l, r) => Term::par(rename(l, cutoff, f), rename(r, cutoff, f)),
        Term::Recv { chan, hint, body } => Term::Recv {
            chan: f(*chan, cutoff),
            hint: hint.clone(),
            body: Box::new(rename(body, cutoff + 1, f)),
        },
        Term::Send {
            chan,
            payload,
            body,
        } => Term::Send {
            chan: f(*chan, cutoff),
            payload: f(*payload, cutoff),
            body: Box::new(rename(body, cutoff, f)),
        },
    }
}

fn occurs(t: &Term, i: usize) -> bool {
    match t {
        Term::End => false,
        Term::Res { body, .. } => occurs(body, i + 1),
        Term::Par(l, r) => occurs(l, i) || occurs(r, i),
        Term::Recv { chan, body, .. } => *chan == i || occurs(body, i + 1),
        Term::Send {
            chan,
            payload,
            body,
        } => *chan == i || *payload == i || occurs(body, i),
    }
}

impl Term {
    pub fn lift(&self, i: usize) -> Term {
        rename(self, 0, &|v, c| if v >= i + c { v + 1 } else { v })
    }

    /// Caller guarantees `unused(i)`.
    pub fn lower(&self, i: usize) -> Term {
        rename(self, 0, &|v, c| if v > i + c { v - 1 } else { v })
    }

    pub fn exchange(&self, i: usize) -> Term {
        rename(self, 0, &|v, c| {
            if v == i + c {
                v + 1
            } else if v == i + c + 1 {
                v - 1
            } else {
                v
            }
        })
    }

    /// Replaces `i` by `j`.
    pub fn subst(&self, j: usize, i: usize) -> Term {
        rename(self, 0, &|v, c| if v == i + c { j + c } else { v })
    }

    pub fn unused(&self, i: usize) -> bool {
        !occurs(self, i)
    }
}

fn check_index(index: usize, bound: usize, depth: usize) -> Result<(), ScopeError> {
    if index < bound {
        Ok(())
    } else {
        Err(ScopeError::BadIndex { index, depth })
    }
}

/// Increments every variable `≥ i`. Requires `i ≤ depth`.
pub fn lift(i: usize, p: &Process) -> Result<Process, ScopeError> {
    check_index(i, p.depth + 1, p.depth)?;
    Ok(Process {
        depth: p.depth + 1,
        term: p.term.lift(i),
    })
}

pub fn unused(i: usize, p: &Process) -> Result<bool, ScopeError> {
    check_index(i, p.depth, p.depth)?;
    Ok(p.term.unused(i))
}

/// Removes the unused variable `i`, decrementing every variable above it.
pub fn lower(i: usize, p: &Process) -> Result<Process, ScopeError> {
    if !unused(i, p)? {
        return Err(ScopeError::Used(i));
    }
    Ok(Process {
        depth: p.depth - 1,
        term: p.term.lower(i),
    })
}

/// Swaps `i` and `i + 1`.
pub fn exchange(i: usize, p: &Process) -> Result<Process, ScopeError> {
    check_index(i + 1, p.depth, p.depth)?;
    Ok(Process {
        depth: p.depth,
        term: p.term.exchange(i),
    })
}

/// Replaces every occurrence of `i` by `j`.
pub fn subst(p: &Process, j: usize, i: usize) -> Result<Process, ScopeError> {
    check_index(i, p.depth, p.depth)?;
    check_index(j, p.depth, p.depth)?;
    Ok(Process {
        depth: p.depth,
        term: p.term.subst(j, i),
    })
}
