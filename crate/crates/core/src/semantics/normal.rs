//! Normal forms reached by recorded congruence rewrites.

use super::{apply_cong, CongRule, Direction, Rewrite};
use crate::ast::{Child, Path, Process, Term};

/// A process together with the rewrites that produced it.
pub(crate) struct Recorder {
    pub p: Process,
    pub log: Vec<Rewrite>,
}

impl Recorder {
    pub fn new(p: &Process) -> Recorder {
        Recorder {
            p: p.clone(),
            log: Vec::new(),
        }
    }

    pub fn apply(&mut self, rule: CongRule, dir: Direction, path: &[Child]) {
        self.p = apply_cong(rule, dir, path, &self.p)
            .unwrap_or_else(|e| panic!("normalization produced a bad rewrite: {e}"));
        self.log.push(Rewrite::new(rule, dir, path.to_vec()));
    }

    pub fn at(&self, path: &[Child]) -> &Term {
        self.p.term().at(path).expect("normalization path exists")
    }
}

fn extend(path: &[Child], c: Child) -> Path {
    let mut p = path.to_vec();
    p.push(c);
    p
}

/// Joins two normalized spines at `path` into one.
fn merge(rec: &mut Recorder, path: &[Child]) {
    let Term::Par(l, r) = rec.at(path) else {
        return;
    };
    match (&**l, &**r) {
        (_, Term::End) => rec.apply(CongRule::CompId, Direction::Forward, path),
        (Term::End, _) => {
            rec.apply(CongRule::CompSym, Direction::Forward, path);
            rec.apply(CongRule::CompId, Direction::Forward, path);
        }
        (Term::Par(..), _) => {
            rec.apply(CongRule::CompAssoc, Direction::Backward, path);
            merge(rec, &extend(path, Child::ParRight));
        }
        _ => {}
    }
}

fn flatten_at(rec: &mut Recorder, path: &[Child]) {
    let child = match rec.at(path) {
        Term::End => return,
        Term::Res { .. } => Child::ResBody,
        Term::Recv { .. } => Child::RecvBody,
        Term::Send { .. } => Child::SendBody,
        Term::Par(..) => {
            flatten_at(rec, &extend(path, Child::ParLeft));
            flatten_at(rec, &extend(path, Child::ParRight));
            merge(rec, path);
            return;
        }
    };
    flatten_at(rec, &extend(path, child));
}

/// The rewrites (assoc, sym and id only) that turn every parallel
/// composition, under every binder, into a right-nested spine without `end`
/// components.
pub fn flatten_rewrites(p: &Process) -> (Vec<Rewrite>, Process) {
    let mut rec = Recorder::new(p);
    flatten_at(&mut rec, &[]);
    (rec.log, rec.p)
}

pub fn flatten_normalize(p: &Process) -> Process {
    flatten_rewrites(p).1
}

/// Computes the same normal form as [`flatten_normalize`] directly.
pub fn flatten_direct(p: &Process) -> Process {
    fn comps(t: &Term, out: &mut Vec<Term>) {
        match t {
            Term::End => {}
            Term::Par(l, r) => {
                comps(l, out);
                comps(r, out);
            }
            other => out.push(inner(other)),
        }
    }
    fn inner(t: &Term) -> Term {
        match t {
            Term::Res { hint, annot, body } => Term::res(hint.clone(), annot.clone(), flat(body)),
            Term::Recv { chan, hint, body } => Term::recv(*chan, hint.clone(), flat(body)),
            Term::Send {
                chan,
                payload,
                body,
            } => Term::send(*chan, *payload, flat(body)),
            other => other.clone(),
        }
    }
    fn flat(t: &Term) -> Term {
        let mut out = Vec::new();
        comps(t, &mut out);
        let mut it = out.into_iter().rev();
        match it.next() {
            None => Term::End,
            Some(last) => it.fold(last, |acc, c| Term::par(c, acc)),
        }
    }
    Process::new(p.depth(), flat(p.term())).expect("flattening preserves scope")
}

fn prenex_at(rec: &mut Recorder, path: &[Child]) {
    match rec.at(path) {
        Term::Res { .. } => prenex_at(rec, &extend(path, Child::ResBody)),
        Term::Par(..) => {
            prenex_at(rec, &extend(path, Child::ParLeft));
            prenex_at(rec, &extend(path, Child::ParRight));
            let mut here = path.to_vec();
            loop {
                let Term::Par(l, r) = rec.at(&here) else {
                    unreachable!("pulling restrictions keeps a composition in place")
                };
                if matches!(**l, Term::Res { .. }) {
                    rec.apply(CongRule::ScopeExt, Direction::Backward, &here);
                    here.push(Child::ResBody);
                } else if matches!(**r, Term::Res { .. }) {
                    rec.apply(CongRule::CompSym, Direction::Forward, &here);
                    rec.apply(CongRule::ScopeExt, Direction::Backward, &here);
                    here.push(Child::ResBody);
                    rec.apply(CongRule::CompSym, Direction::Forward, &here);
                } else {
                    break;
                }
            }
            merge(rec, &here);
        }
        _ => {}
    }
}

/// Pulls every top-level restriction to the front and flattens what is left:
/// `ν … ν (C₁ | … | Cₘ)` where each `Cᵢ` is an input or output prefix.
/// Prefix bodies are left untouched.
pub fn prenex(p: &Process) -> (Vec<Rewrite>, Process) {
    let mut rec = Recorder::new(p);
    prenex_at(&mut rec, &[]);
    (rec.log, rec.p)
}

/// Flattens and then removes empty top-level restrictions.
pub fn garbage_collect(p: &Process) -> (Vec<Rewrite>, Process) {
    let (mut log, q) = flatten_rewrites(p);
    let mut rec = Recorder::new(&q);
    let mut path = Vec::new();
    while let Term::Res { .. } = rec.at(&path) {
        path.push(Child::ResBody);
    }
    while path.pop().is_some() {
        if let Term::Res { body, .. } = rec.at(&path) {
            if **body == Term::End {
                rec.apply(CongRule::ScopeEnd, Direction::Forward, &path);
                continue;
            }
        }
        break;
    }
    log.extend(rec.log);
    (log, rec.p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Name, NuAnnot};
    use crate::semantics::apply_all;

    fn send(c: usize, m: usize) -> Term {
        Term::send(c, m, Term::End)
    }

    fn nu(body: Term) -> Term {
        Term::res(Name::anonymous(), NuAnnot::placeholder(), body)
    }

    fn proc(depth: usize, t: Term) -> Process {
        Process::new(depth, t).unwrap()
    }

    #[test]
    fn flatten_examples() {
        let a = send(0, 0);
        let b = send(0, 1);
        let p = proc(2, Term::par(Term::par(a.clone(), Term::End), b.clone()));
        assert_eq!(
            flatten_normalize(&p),
            proc(2, Term::par(a.clone(), b.clone()))
        );
        let e = proc(0, Term::par(Term::End, Term::End));
        assert_eq!(flatten_normalize(&e), Process::end(0));
        let c = send(1, 1);
        let n = proc(1, nu(Term::par(Term::par(a.clone(), b.clone()), c.clone())));
        assert_eq!(
            flatten_normalize(&n),
            proc(1, nu(Term::par(a, Term::par(b, c))))
        );
    }

    #[test]
    fn rewrites_replay() {
        let p = proc(
            1,
            Term::par(
                Term::par(
                    Term::End,
                    Term::recv(0, Name::anonymous(), Term::par(Term::End, send(0, 1))),
                ),
                Term::par(Term::par(send(0, 0), Term::End), send(0, 0)),
            ),
        );
        let (log, q) = flatten_rewrites(&p);
        assert_eq!(apply_all(&log, &p).unwrap(), q);
        assert_eq!(q, flatten_direct(&p));
        assert!(log.iter().all(|r| matches!(
            r.rule,
            CongRule::CompAssoc | CongRule::CompSym | CongRule::CompId
        )));
    }

    #[test]
    fn prenex_pulls_restrictions() {
        // (ν 0!0) | ν (0!1)  at depth 1
        let p = proc(1, Term::par(nu(send(0, 0)), nu(send(0, 1))));
        let (log, q) = prenex(&p);
        assert_eq!(apply_all(&log, &p).unwrap(), q);
        // ν ν (1!1 | 0!2): the left restriction ends up outermost.
        assert_eq!(q, proc(1, nu(nu(Term::par(send(1, 1), send(0, 2))))));
    }

    #[test]
    fn garbage_collection() {
        let p = proc(0, nu(nu(Term::par(Term::End, Term::End))));
        let (log, q) = garbage_collect(&p);
        assert_eq!(q, Process::end(0));
        assert_eq!(apply_all(&log, &p).unwrap(), q);
    }
}
