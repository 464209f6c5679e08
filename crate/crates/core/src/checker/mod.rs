//! The leftover type checker: `γ ; Γ ⊢ P ▷ Δ`.
//!
//! [`check`] runs the rules syntax-directedly and records a [`Derivation`]
//! holding the contexts at every node. [`recheck`] validates a derivation
//! node by node without re-running the checker, and is the oracle for every
//! derivation transformer in [`crate::metatheory`].

mod derivation;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgId, AlgebraSet, Usage, UsagePair};
use crate::ast::{fmt_path, Child, Path, Process, Term};
use crate::context::{ContextError, Ctx, Idxs, PreCtx, Type, VarRef};

pub use derivation::{recheck, Derivation, DerivationText, RecheckError, Rule};

/// The data the restriction rule needs: the channel's payload type `t`, the
/// usage `x` sent with each payload (in algebra `payload_alg`), and the
/// channel's own multiplicity `y` (in algebra `chan_alg`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NuAnnot {
    pub payload: Type,
    pub payload_alg: AlgId,
    pub payload_usage: UsagePair,
    pub chan_alg: AlgId,
    pub mult: Usage,
}

impl NuAnnot {
    /// Splits a channel type into its annotation parts.
    pub fn new(channel: &Type, chan_alg: AlgId, mult: Usage) -> Option<NuAnnot> {
        let (payload, payload_alg, payload_usage) = channel.as_chan()?;
        Some(NuAnnot {
            payload: payload.clone(),
            payload_alg,
            payload_usage,
            chan_alg,
            mult,
        })
    }

    /// `chan<unit>[lin (0,0)] @ lin 0`, used where no annotation is given.
    pub fn placeholder() -> NuAnnot {
        NuAnnot {
            payload: Type::Unit,
            payload_alg: AlgId::LIN,
            payload_usage: UsagePair::new(Usage(0), Usage(0)),
            chan_alg: AlgId::LIN,
            mult: Usage(0),
        }
    }

    /// The type given to the restricted channel.
    pub fn channel_type(&self) -> Type {
        Type::chan(self.payload.clone(), self.payload_alg, self.payload_usage)
    }

    pub fn is_valid(&self, algs: &AlgebraSet) -> bool {
        self.channel_type().is_valid(algs)
            && algs
                .get(self.chan_alg)
                .is_some_and(|a| a.contains(self.mult))
    }

    pub fn display<'a>(&'a self, algs: &'a AlgebraSet) -> AnnotDisplay<'a> {
        AnnotDisplay { annot: self, algs }
    }
}

pub struct AnnotDisplay<'a> {
    annot: &'a NuAnnot,
    algs: &'a AlgebraSet,
}

impl fmt::Display for AnnotDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.annot;
        match self.algs.get(a.chan_alg) {
            Some(alg) => write!(
                f,
                "{} @ {} {}",
                a.channel_type().display(self.algs),
                alg.name(),
                alg.format(a.mult)
            ),
            None => write!(
                f,
                "{} @ ? {}",
                a.channel_type().display(self.algs),
                a.mult.0
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeErrorKind {
    #[error("variable {index} has type {found:?}, not a channel type")]
    NotAChannel { index: usize, found: Type },
    #[error("payload {index} has type {found:?}, the channel expects {expected:?}")]
    PayloadTypeMismatch {
        index: usize,
        expected: Type,
        found: Type,
    },
    #[error("binder leaves usage {leftover:?} unspent (at {index})")]
    ResidualUsage { index: usize, leftover: UsagePair },
    #[error("ill-formed annotation {0:?}")]
    InvalidAnnotation(NuAnnot),
    #[error("ill-formed context entry at index {0}")]
    InvalidContext(usize),
    #[error("contexts have length {contexts}, the process has depth {depth}")]
    DepthMismatch { contexts: usize, depth: usize },
    #[error(transparent)]
    Context(#[from] ContextError),
}

/// A typing failure and the path to the offending node.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} (at {})", fmt_path(.path))]
pub struct TypeError {
    pub path: Path,
    pub kind: TypeErrorKind,
}

/// Checks that the three context lists agree in length with each other and
/// with `depth`, and that every entry is well formed.
pub fn validate_contexts(
    algs: &AlgebraSet,
    types: &PreCtx,
    idxs: &Idxs,
    usage: &Ctx,
    depth: usize,
) -> Result<(), TypeErrorKind> {
    for len in [types.len(), idxs.len(), usage.len()] {
        if len != depth {
            return Err(TypeErrorKind::DepthMismatch {
                contexts: len,
                depth,
            });
        }
    }
    for i in 0..depth {
        let ok = types.get(i).is_some_and(|t| t.is_valid(algs))
            && algs
                .get(*idxs.get(i).unwrap())
                .is_some_and(|a| usage.get(i).unwrap().belongs_to(a));
        if !ok {
            return Err(TypeErrorKind::InvalidContext(i));
        }
    }
    Ok(())
}

/// Runs the typing rules on `p` from input context `usage`. The leftover is
/// the derivation's `output`.
pub fn check(
    algs: &AlgebraSet,
    types: &PreCtx,
    idxs: &Idxs,
    usage: &Ctx,
    p: &Process,
) -> Result<Derivation, TypeError> {
    validate_contexts(algs, types, idxs, usage, p.depth()).map_err(|kind| TypeError {
        path: Vec::new(),
        kind,
    })?;
    let mut path = Vec::new();
    go(algs, types, idxs, usage, p.term(), &mut path).map_err(|kind| TypeError { path, kind })
}

/// Pops the innermost entry, which must be `ℓ∅`.
fn close_binder(algs: &AlgebraSet, alg: AlgId, out: &Ctx) -> Result<Ctx, TypeErrorKind> {
    let (tail, &head) = out.uncons().expect("binder output is nonempty");
    if head != algs.empty(alg) {
        return Err(TypeErrorKind::ResidualUsage {
            index: 0,
            leftover: head,
        });
    }
    Ok(tail)
}

fn go(
    algs: &AlgebraSet,
    types: &PreCtx,
    idxs: &Idxs,
    input: &Ctx,
    t: &Term,
    path: &mut Path,
) -> Result<Derivation, TypeErrorKind> {
    let node = |output: Ctx, rule: Rule| Derivation {
        types: types.clone(),
        idxs: idxs.clone(),
        input: input.clone(),
        output,
        rule,
    };
    match t {
        Term::End => Ok(node(input.clone(), Rule::End)),
        Term::Res { hint, annot, body } => {
            if !annot.is_valid(algs) {
                return Err(TypeErrorKind::InvalidAnnotation(annot.clone()));
            }
            path.push(Child::ResBody);
            let d = go(
                algs,
                &types.with(annot.channel_type()),
                &idxs.with(annot.chan_alg),
                &input.with(UsagePair::balanced(annot.mult)),
                body,
                path,
            )?;
            path.pop();
            let output = close_binder(algs, annot.chan_alg, &d.output)?;
            Ok(node(
                output,
                Rule::Res {
                    hint: hint.clone(),
                    annot: annot.clone(),
                    body: Box::new(d),
                },
            ))
        }
        Term::Par(l, r) => {
            path.push(Child::ParLeft);
            let dl = go(algs, types, idxs, input, l, path)?;
            path.pop();
            path.push(Child::ParRight);
            let dr = go(algs, types, idxs, &dl.output, r, path)?;
            path.pop();
            Ok(node(
                dr.output.clone(),
                Rule::Par {
                    left: Box::new(dl),
                    right: Box::new(dr),
                },
            ))
        }
        Term::Recv { chan, hint, body } => {
            let c = chan_ref(algs, types, idxs, input, *chan, true)?;
            let (payload, alg, x) = c.ty.as_chan().expect("checked by chan_ref");
            let (payload, alg, x) = (payload.clone(), alg, x);
            path.push(Child::RecvBody);
            let d = go(
                algs,
                &types.with(payload),
                &idxs.with(alg),
                &c.output.with(x),
                body,
                path,
            )?;
            path.pop();
            let output = close_binder(algs, alg, &d.output)?;
            Ok(node(
                output,
                Rule::Recv {
                    chan: c,
                    hint: hint.clone(),
                    body: Box::new(d),
                },
            ))
        }
        Term::Send {
            chan,
            payload,
            body,
        } => {
            let c = chan_ref(algs, types, idxs, input, *chan, false)?;
            let (t, alg, x) = c.ty.as_chan().expect("checked by chan_ref");
            let found = types.get(*payload).ok_or(ContextError::IndexOutOfRange {
                index: *payload,
                len: types.len(),
            })?;
            if found != t {
                return Err(TypeErrorKind::PayloadTypeMismatch {
                    index: *payload,
                    expected: t.clone(),
                    found: found.clone(),
                });
            }
            let m = VarRef::derive(algs, types, idxs, &c.output, *payload, x, alg)?;
            path.push(Child::SendBody);
            let d = go(algs, types, idxs, &m.output, body, path)?;
            path.pop();
            Ok(node(
                d.output.clone(),
                Rule::Send {
                    chan: c,
                    payload: m,
                    body: Box::new(d),
                },
            ))
        }
    }
}

/// Consumes `ℓi` (or `ℓo`) at `index` in the channel's own algebra.
fn chan_ref(
    algs: &AlgebraSet,
    types: &PreCtx,
    idxs: &Idxs,
    input: &Ctx,
    index: usize,
    receive: bool,
) -> Result<VarRef, TypeErrorKind> {
    let len = types.len();
    let ty = types
        .get(index)
        .ok_or(ContextError::IndexOutOfRange { index, len })?;
    if ty.as_chan().is_none() {
        return Err(TypeErrorKind::NotAChannel {
            index,
            found: ty.clone(),
        });
    }
    let alg = *idxs.get(index).expect("aligned contexts");
    let demanded = if receive {
        algs.input_only(alg)
    } else {
        algs.output_only(alg)
    };
    Ok(VarRef::derive(
        algs, types, idxs, input, index, demanded, alg,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Name;
    use crate::context::Scope;

    fn u(x: u32) -> Usage {
        Usage(x)
    }

    fn pair(a: u32, b: u32) -> UsagePair {
        UsagePair::new(u(a), u(b))
    }

    fn anon() -> Name {
        Name::anonymous()
    }

    #[test]
    fn end_returns_input() {
        let algs = AlgebraSet::standard();
        let types = Scope::from_oldest(vec![Type::Unit]);
        let idxs = Scope::from_oldest(vec![AlgId::GRA]);
        let usage = Scope::from_oldest(vec![pair(3, 1)]);
        let d = check(&algs, &types, &idxs, &usage, &Process::end(1)).unwrap();
        assert_eq!(d.output, usage);
        assert!(recheck(&algs, &d).is_ok());
    }

    #[test]
    fn graded_receiver_consumes_two_inputs() {
        // Channel of graded type at (2 + l, r) receives twice.
        let algs = AlgebraSet::standard();
        let payload = Type::chan(Type::Unit, AlgId::SHA, pair(0, 0));
        let t = Type::chan(payload, AlgId::GRA, pair(0, 0));
        let types = Scope::from_oldest(vec![Type::Unit, t]);
        let idxs = Scope::from_oldest(vec![AlgId::LIN, AlgId::GRA]);
        for (l, r) in [(0, 0), (1, 3), (4, 2)] {
            let usage = Scope::from_oldest(vec![pair(1, 1), pair(2 + l, r)]);
            let p =
                Process::new(2, Term::recv(0, anon(), Term::recv(1, anon(), Term::End))).unwrap();
            let d = check(&algs, &types, &idxs, &usage, &p).unwrap();
            assert_eq!(d.output, Scope::from_oldest(vec![pair(1, 1), pair(l, r)]));
            recheck(&algs, &d).unwrap();
        }
    }

    #[test]
    fn linear_double_send_is_rejected() {
        let algs = AlgebraSet::standard();
        let t = Type::chan(Type::Unit, AlgId::LIN, pair(0, 0));
        let types = Scope::from_oldest(vec![t, Type::Unit]);
        let idxs = Scope::from_oldest(vec![AlgId::LIN, AlgId::LIN]);
        let usage = Scope::from_oldest(vec![pair(0, 1), pair(0, 0)]);
        let p = Process::new(2, Term::send(1, 0, Term::send(1, 0, Term::End))).unwrap();
        let err = check(&algs, &types, &idxs, &usage, &p).unwrap_err();
        assert_eq!(err.path, vec![Child::SendBody]);
        assert!(matches!(
            err.kind,
            TypeErrorKind::Context(ContextError::SplitUndefined { index: 1, .. })
        ));
    }

    #[test]
    fn unit_is_not_a_channel() {
        let algs = AlgebraSet::standard();
        let types = Scope::from_oldest(vec![Type::Unit]);
        let idxs = Scope::from_oldest(vec![AlgId::LIN]);
        let usage = Scope::from_oldest(vec![pair(1, 1)]);
        let p = Process::new(1, Term::send(0, 0, Term::End)).unwrap();
        let err = check(&algs, &types, &idxs, &usage, &p).unwrap_err();
        assert!(matches!(
            err.kind,
            TypeErrorKind::NotAChannel { index: 0, .. }
        ));
    }

    #[test]
    fn payload_type_must_match() {
        let algs = AlgebraSet::standard();
        let inner = Type::chan(Type::Unit, AlgId::LIN, pair(0, 0));
        let t = Type::chan(inner, AlgId::LIN, pair(0, 0));
        let types = Scope::from_oldest(vec![t, Type::Unit]);
        let idxs = Scope::from_oldest(vec![AlgId::LIN, AlgId::LIN]);
        let usage = Scope::from_oldest(vec![pair(0, 1), pair(0, 0)]);
        let p = Process::new(2, Term::send(1, 0, Term::End)).unwrap();
        let err = check(&algs, &types, &idxs, &usage, &p).unwrap_err();
        assert!(matches!(
            err.kind,
            TypeErrorKind::PayloadTypeMismatch { index: 0, .. }
        ));
    }

    #[test]
    fn unspent_restriction_is_rejected() {
        let algs = AlgebraSet::standard();
        let annot = NuAnnot {
            chan_alg: AlgId::LIN,
            mult: u(1),
            ..NuAnnot::placeholder()
        };
        let p = Process::new(0, Term::res(anon(), annot, Term::End)).unwrap();
        let e = Scope::new();
        let err = check(&algs, &e, &Scope::new(), &e_ctx(), &p).unwrap_err();
        assert_eq!(err.path, Vec::<Child>::new());
        assert_eq!(
            err.kind,
            TypeErrorKind::ResidualUsage {
                index: 0,
                leftover: pair(1, 1)
            }
        );
    }

    fn e_ctx() -> Ctx {
        Scope::new()
    }

    #[test]
    fn linear_channel_used_once_each_way() {
        let algs = AlgebraSet::standard();
        let annot = NuAnnot {
            chan_alg: AlgId::LIN,
            mult: u(1),
            ..NuAnnot::placeholder()
        };
        // free unit u; new c. (c?(x). end | c!u. end)
        let body = Term::par(
            Term::recv(0, anon(), Term::End),
            Term::send(0, 1, Term::End),
        );
        let p = Process::new(1, Term::res(anon(), annot, body)).unwrap();
        let types = Scope::from_oldest(vec![Type::Unit]);
        let idxs = Scope::from_oldest(vec![AlgId::LIN]);
        let usage = Scope::from_oldest(vec![pair(0, 0)]);
        let d = check(&algs, &types, &idxs, &usage, &p).unwrap();
        assert_eq!(d.output, usage);
        recheck(&algs, &d).unwrap();
        assert_eq!(d.subject(), p);
    }

    #[test]
    fn depth_must_match() {
        let algs = AlgebraSet::standard();
        let err = check(
            &algs,
            &Scope::new(),
            &Scope::new(),
            &Scope::new(),
            &Process::end(1),
        )
        .unwrap_err();
        assert!(matches!(err.kind, TypeErrorKind::DepthMismatch { .. }));
    }

    #[test]
    fn annotation_text() {
        let algs = AlgebraSet::standard();
        let payload = Type::chan(Type::Unit, AlgId::SHA, pair(0, 0));
        let a = NuAnnot::new(
            &Type::chan(payload, AlgId::GRA, pair(0, 0)),
            AlgId::GRA,
            u(2),
        )
        .unwrap();
        assert_eq!(
            a.display(&algs).to_string(),
            "chan<chan<unit>[sha (w,w)]>[gra (0,0)] @ gra 2"
        );
        assert!(NuAnnot::new(&Type::Unit, AlgId::LIN, u(0)).is_none());
    }
}
