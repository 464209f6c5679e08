use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{Child, Name, NuAnnot, Path, Process, ScopeError, Term};

/// Named process syntax.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Raw {
    End,
    Res {
        binder: Name,
        annot: NuAnnot,
        body: Box<Raw>,
    },
    Par(Box<Raw>, Box<Raw>),
    Recv {
        chan: Name,
        binder: Name,
        body: Box<Raw>,
    },
    Send {
        chan: Name,
        payload: Name,
        body: Box<Raw>,
    },
}

impl Raw {
    pub fn res(binder: Name, annot: NuAnnot, body: Raw) -> Raw {
        Raw::Res {
            binder,
            annot,
            body: Box::new(body),
        }
    }

    pub fn par(left: Raw, right: Raw) -> Raw {
        Raw::Par(Box::new(left), Box::new(right))
    }

    pub fn recv(chan: Name, binder: Name, body: Raw) -> Raw {
        Raw::Recv {
            chan,
            binder,
            body: Box::new(body),
        }
    }

    pub fn send(chan: Name, payload: Name, body: Raw) -> Raw {
        Raw::Send {
            chan,
            payload,
            body: Box::new(body),
        }
    }

    /// Resolves names against `ctx` and converts to de Bruijn form.
    pub fn to_process(&self, ctx: &[Name]) -> Result<Process, ScopeError> {
        let w = well_scoped(ctx, self)?;
        from_raw(ctx, self, &w)
    }
}

/// The de Bruijn index of every name occurrence, in pre-order
/// (for a send: channel, then payload).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopeWitness {
    pub resolved: Vec<usize>,
}

fn resolve(scope: &[&Name], name: &Name) -> Option<usize> {
    scope.iter().rev().position(|n| *n == name)
}

/// Checks that every free name of `p` occurs in `ctx`. The last entry of
/// `ctx` is index 0, and inner binders shadow outer ones.
pub fn well_scoped(ctx: &[Name], p: &Raw) -> Result<ScopeWitness, ScopeError> {
    fn go<'a>(
        p: &'a Raw,
        scope: &mut Vec<&'a Name>,
        path: &mut Path,
        out: &mut Vec<usize>,
    ) -> Result<(), ScopeError> {
        let mut look = |name: &Name, scope: &[&Name], path: &Path| {
            resolve(scope, name)
                .map(|i| out.push(i))
                .ok_or_else(|| ScopeError::Unbound {
                    name: name.clone(),
                    path: path.clone(),
                })
        };
        match p {
            Raw::End => Ok(()),
            Raw::Res { binder, body, .. } => {
                scope.push(binder);
                path.push(Child::ResBody);
                go(body, scope, path, out)?;
                path.pop();
                scope.pop();
                Ok(())
            }
            Raw::Par(l, r) => {
                path.push(Child::ParLeft);
                go(l, scope, path, out)?;
                path.pop();
                path.push(Child::ParRight);
                go(r, scope, path, out)?;
                path.pop();
                Ok(())
            }
            Raw::Recv { chan, binder, body } => {
                look(chan, scope, path)?;
                scope.push(binder);
                path.push(Child::RecvBody);
                go(body, scope, path, out)?;
                path.pop();
                scope.pop();
                Ok(())
            }
            Raw::Send {
                chan,
                payload,
                body,
            } => {
                look(chan, scope, path)?;
                look(payload, scope, path)?;
                path.push(Child::SendBody);
                go(body, scope, path, out)?;
                path.pop();
                Ok(())
            }
        }
    }
    let mut scope: Vec<&Name> = ctx.iter().collect();
    let mut out = Vec::new();
    go(p, &mut scope, &mut Vec::new(), &mut out)?;
    Ok(ScopeWitness { resolved: out })
}

/// Converts to de Bruijn form using the indices recorded in `w`. Binder
/// names are kept as hints.
pub fn from_raw(ctx: &[Name], p: &Raw, w: &ScopeWitness) -> Result<Process, ScopeError> {
    fn go(p: &Raw, next: &mut impl Iterator<Item = usize>) -> Option<Term> {
        Some(match p {
            Raw::End => Term::End,
            Raw::Res {
                binder,
                annot,
                body,
            } => Term::res(binder.clone(), annot.clone(), go(body, next)?),
            Raw::Par(l, r) => Term::par(go(l, next)?, go(r, next)?),
            Raw::Recv { binder, body, .. } => {
                let chan = next.next()?;
                Term::recv(chan, binder.clone(), go(body, next)?)
            }
            Raw::Send { body, .. } => {
                let chan = next.next()?;
                let payload = next.next()?;
                Term::send(chan, payload, go(body, next)?)
            }
        })
    }
    let mut next = w.resolved.iter().copied();
    let stale = || ScopeError::BadIndex {
        index: w.resolved.len(),
        depth: ctx.len(),
    };
    let term = go(p, &mut next).ok_or_else(stale)?;
    if next.next().is_some() {
        return Err(stale());
    }
    Process::new(ctx.len(), term)
}

/// Converts back to names. Each binder with hint `h` becomes `h^k` for the
/// next unused `k`; counters start above any suffix already present in `ctx`,
/// so all binders are distinct from each other and from `ctx`.
pub fn to_raw(ctx: &[Name], p: &Process) -> Result<Raw, ScopeError> {
    if ctx.len() != p.depth() {
        return Err(ScopeError::ContextLength {
            names: ctx.len(),
            depth: p.depth(),
        });
    }
    let mut counters: BTreeMap<String, usize> = BTreeMap::new();
    for n in ctx {
        let next = n.suffix().map_or(0, |k| k + 1);
        let slot = counters.entry(n.base().to_string()).or_default();
        *slot = (*slot).max(next);
    }

    fn fresh(counters: &mut BTreeMap<String, usize>, hint: &Name) -> Name {
        let base = hint.base().to_string();
        let k = counters.entry(base.clone()).or_default();
        let name = Name(format!("{base}^{k}"));
        *k += 1;
        name
    }

    fn go(t: &Term, scope: &mut Vec<Name>, counters: &mut BTreeMap<String, usize>) -> Raw {
        let name = |scope: &Vec<Name>, i: usize| scope[scope.len() - 1 - i].clone();
        match t {
            Term::End => Raw::End,
            Term::Res { hint, annot, body } => {
                let b = fresh(counters, hint);
                scope.push(b.clone());
                let body = go(body, scope, counters);
                scope.pop();
                Raw::res(b, annot.clone(), body)
            }
            Term::Par(l, r) => {
                let l = go(l, scope, counters);
                Raw::par(l, go(r, scope, counters))
            }
            Term::Recv { chan, hint, body } => {
                let c = name(scope, *chan);
                let b = fresh(counters, hint);
                scope.push(b.clone());
                let body = go(body, scope, counters);
                scope.pop();
                Raw::recv(c, b, body)
            }
            Term::Send {
                chan,
                payload,
                body,
            } => Raw::send(
                name(scope, *chan),
                name(scope, *payload),
                go(body, scope, counters),
            ),
        }
    }
    let mut scope = ctx.to_vec();
    Ok(go(p.term(), &mut scope, &mut counters))
}

/// Whether all binder names are pairwise distinct and distinct from `ctx`.
pub fn barendregt(ctx: &[Name], p: &Raw) -> bool {
    fn go<'a>(p: &'a Raw, seen: &mut HashSet<&'a Name>) -> bool {
        match p {
            Raw::End => true,
            Raw::Res { binder, body, .. } | Raw::Recv { binder, body, .. } => {
                seen.insert(binder) && go(body, seen)
            }
            Raw::Par(l, r) => go(l, seen) && go(r, seen),
            Raw::Send { body, .. } => go(body, seen),
        }
    }
    let mut seen: HashSet<&Name> = ctx.iter().collect();
    seen.len() == ctx.len() && go(p, &mut seen)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Site {
    /// Bound by the binder at this nesting level (counted from the root).
    Bound(usize),
    /// Free, at this position of the context.
    Free(usize),
    Unbound,
}

fn site(env: &[(&Name, usize)], ctx: &[Name], name: &Name) -> Site {
    if let Some((_, level)) = env.iter().rev().find(|(n, _)| *n == name) {
        return Site::Bound(*level);
    }
    match ctx.iter().rposition(|n| n == name) {
        Some(pos) => Site::Free(pos),
        None => Site::Unbound,
    }
}

/// α-equivalence of two named processes over their own free-name contexts.
/// Free names are matched by context position; annotations must agree.
pub fn alpha_eq(ctx_a: &[Name], a: &Raw, ctx_b: &[Name], b: &Raw) -> bool {
    struct Side<'a> {
        ctx: &'a [Name],
        env: Vec<(&'a Name, usize)>,
    }

    fn same(sa: &Side, x: &Name, sb: &Side, y: &Name) -> bool {
        let (p, q) = (site(&sa.env, sa.ctx, x), site(&sb.env, sb.ctx, y));
        p == q && p != Site::Unbound
    }

    fn go<'a>(a: &'a Raw, sa: &mut Side<'a>, b: &'a Raw, sb: &mut Side<'a>, level: usize) -> bool {
        match (a, b) {
            (Raw::End, Raw::End) => true,
            (
                Raw::Res {
                    binder: x,
                    annot: s,
                    body: p,
                },
                Raw::Res {
                    binder: y,
                    annot: t,
                    body: q,
                },
            ) => {
                if s != t {
                    return false;
                }
                sa.env.push((x, level));
                sb.env.push((y, level));
                let ok = go(p, sa, q, sb, level + 1);
                sa.env.pop();
                sb.env.pop();
                ok
            }
            (Raw::Par(p1, p2), Raw::Par(q1, q2)) => {
                go(p1, sa, q1, sb, level) && go(p2, sa, q2, sb, level)
            }
            (
                Raw::Recv {
                    chan: c,
                    binder: x,
                    body: p,
                },
                Raw::Recv {
                    chan: d,
                    binder: y,
                    body: q,
                },
            ) => {
                if !same(sa, c, sb, d) {
                    return false;
                }
                sa.env.push((x, level));
                sb.env.push((y, level));
                let ok = go(p, sa, q, sb, level + 1);
                sa.env.pop();
                sb.env.pop();
                ok
            }
            (
                Raw::Send {
                    chan: c,
                    payload: m,
                    body: p,
                },
                Raw::Send {
                    chan: d,
                    payload: n,
                    body: q,
                },
            ) => same(sa, c, sb, d) && same(sa, m, sb, n) && go(p, sa, q, sb, level),
            _ => false,
        }
    }

    if ctx_a.len() != ctx_b.len() {
        return false;
    }
    let mut sa = Side {
        ctx: ctx_a,
        env: Vec::new(),
    };
    let mut sb = Side {
        ctx: ctx_b,
        env: Vec::new(),
    };
    go(a, &mut sa, b, &mut sb, 0)
}
