use super::frame::frame_to;
use super::structural::{exchange_deriv, strengthen, weaken};
use super::{checked, end_node, par_node, res_node, MetaError};
use crate::algebra::{AlgebraSet, UsagePair};
use crate::ast::{Name, NuAnnot};
use crate::checker::{Derivation, Rule};
use crate::semantics::{apply_cong, CongRule, Direction, Rewrite, RewriteError};

/// Retypes the rewritten process with the same root contexts.
pub fn subject_cong(
    algs: &AlgebraSet,
    d: &Derivation,
    rw: &Rewrite,
) -> Result<Derivation, MetaError> {
    let target = apply_cong(rw.rule, rw.dir, &rw.path, &d.subject())?;
    let mut out = d.clone();
    let slot = out
        .at_mut(&rw.path)
        .ok_or_else(|| RewriteError::BadPath(rw.path.clone()))?;
    let shape = || {
        MetaError::Rewrite(RewriteError::ShapeMismatch {
            rule: rw.rule,
            dir: rw.dir,
            path: rw.path.clone(),
        })
    };
    *slot = node(algs, rw.rule, rw.dir, slot).ok_or_else(shape)??;
    debug_assert_eq!(out.subject(), target);
    checked(algs, out)
}

fn split_par(d: &Derivation) -> Option<(&Derivation, &Derivation)> {
    match &d.rule {
        Rule::Par { left, right } => Some((left, right)),
        _ => None,
    }
}

fn split_res(d: &Derivation) -> Option<(&Name, &NuAnnot, &Derivation)> {
    match &d.rule {
        Rule::Res { hint, annot, body } => Some((hint, annot, body)),
        _ => None,
    }
}

/// `None` when the node does not have the rule's shape.
fn node(
    algs: &AlgebraSet,
    rule: CongRule,
    dir: Direction,
    n: &Derivation,
) -> Option<Result<Derivation, MetaError>> {
    use CongRule::*;
    use Direction::*;
    Some(match (rule, dir) {
        (CompAssoc, Forward) => {
            let (p, qr) = split_par(n)?;
            let (q, r) = split_par(qr)?;
            Ok(par_node(par_node(p.clone(), q.clone()), r.clone()))
        }
        (CompAssoc, Backward) => {
            let (pq, r) = split_par(n)?;
            let (p, q) = split_par(pq)?;
            Ok(par_node(p.clone(), par_node(q.clone(), r.clone())))
        }
        (CompSym, _) => {
            let (p, q) = split_par(n)?;
            comp_sym(algs, n, p, q)
        }
        (CompId, Forward) => {
            let (p, e) = split_par(n)?;
            if e.rule != Rule::End {
                return None;
            }
            Ok(p.clone())
        }
        (CompId, Backward) => Ok(par_node(n.clone(), end_node(&n.types, &n.idxs, &n.output))),
        (ScopeEnd, Forward) => {
            let (_, _, body) = split_res(n)?;
            if body.rule != Rule::End {
                return None;
            }
            Ok(end_node(&n.types, &n.idxs, &n.input))
        }
        (ScopeEnd, Backward) => {
            if n.rule != Rule::End {
                return None;
            }
            // The fresh channel gets the placeholder type, unit payload, ℓ∅.
            let annot = NuAnnot::placeholder();
            let body = end_node(
                &n.types.with(annot.channel_type()),
                &n.idxs.with(annot.chan_alg),
                &n.input.with(UsagePair::balanced(annot.mult)),
            );
            Ok(res_node(Name::anonymous(), annot, body))
        }
        (ScopeExt, Forward) => {
            let (hint, annot, body) = split_res(n)?;
            let (p, q) = split_par(body)?;
            strengthen(algs, q, 0)
                .map(|q| par_node(res_node(hint.clone(), annot.clone(), p.clone()), q))
        }
        (ScopeExt, Backward) => {
            let (res, q) = split_par(n)?;
            let (hint, annot, p) = split_res(res)?;
            let empty = algs.empty(annot.chan_alg);
            weaken(algs, q, 0, &annot.channel_type(), annot.chan_alg, empty)
                .map(|q| res_node(hint.clone(), annot.clone(), par_node(p.clone(), q)))
        }
        (ScopeComm, _) => {
            let (h1, a1, inner) = split_res(n)?;
            let (h2, a2, p) = split_res(inner)?;
            exchange_deriv(algs, p, 0)
                .map(|p| res_node(h2.clone(), a2.clone(), res_node(h1.clone(), a1.clone(), p)))
        }
    })
}

/// `Q` goes first: it is framed onto the node's input, then `P` onto what
/// `Q` leaves.
fn comp_sym(
    algs: &AlgebraSet,
    n: &Derivation,
    p: &Derivation,
    q: &Derivation,
) -> Result<Derivation, MetaError> {
    let q2 = frame_to(algs, q, &n.input)?;
    let p2 = frame_to(algs, p, &q2.output)?;
    if p2.output != n.output {
        return Err(MetaError::FrameUndefined(
            "swapped components end in a different leftover".into(),
        ));
    }
    Ok(par_node(q2, p2))
}
