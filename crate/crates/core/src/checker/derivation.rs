use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::NuAnnot;
use crate::algebra::AlgebraSet;
use crate::ast::{fmt_path, Child, Name, Path, Process, Term};
use crate::context::{fmt_ctx, Ctx, Idxs, PreCtx, VarRef};

/// A typing derivation. Every node keeps the contexts it was checked under.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub types: PreCtx,
    pub idxs: Idxs,
    pub input: Ctx,
    pub output: Ctx,
    pub rule: Rule,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    End,
    Res {
        hint: Name,
        annot: NuAnnot,
        body: Box<Derivation>,
    },
    Recv {
        chan: VarRef,
        hint: Name,
        body: Box<Derivation>,
    },
    Send {
        chan: VarRef,
        payload: VarRef,
        body: Box<Derivation>,
    },
    Par {
        left: Box<Derivation>,
        right: Box<Derivation>,
    },
}

impl Derivation {
    /// The typed term.
    pub fn term(&self) -> Term {
        match &self.rule {
            Rule::End => Term::End,
            Rule::Res { hint, annot, body } => Term::res(hint.clone(), annot.clone(), body.term()),
            Rule::Recv { chan, hint, body } => Term::recv(chan.index, hint.clone(), body.term()),
            Rule::Send {
                chan,
                payload,
                body,
            } => Term::send(chan.index, payload.index, body.term()),
            Rule::Par { left, right } => Term::par(left.term(), right.term()),
        }
    }

    /// The typed process.
    pub fn subject(&self) -> Process {
        Process::new(self.types.len(), self.term()).expect("derivations are well scoped")
    }

    pub fn depth(&self) -> usize {
        self.types.len()
    }

    pub fn child(&self, c: Child) -> Option<&Derivation> {
        match (c, &self.rule) {
            (Child::ResBody, Rule::Res { body, .. })
            | (Child::RecvBody, Rule::Recv { body, .. })
            | (Child::SendBody, Rule::Send { body, .. }) => Some(body),
            (Child::ParLeft, Rule::Par { left, .. }) => Some(left),
            (Child::ParRight, Rule::Par { right, .. }) => Some(right),
            _ => None,
        }
    }

    pub fn at(&self, path: &[Child]) -> Option<&Derivation> {
        path.iter().try_fold(self, |d, &c| d.child(c))
    }

    pub fn at_mut(&mut self, path: &[Child]) -> Option<&mut Derivation> {
        let mut d = self;
        for &c in path {
            d = match (c, &mut d.rule) {
                (Child::ResBody, Rule::Res { body, .. })
                | (Child::RecvBody, Rule::Recv { body, .. })
                | (Child::SendBody, Rule::Send { body, .. }) => body,
                (Child::ParLeft, Rule::Par { left, .. }) => left,
                (Child::ParRight, Rule::Par { right, .. }) => right,
                _ => return None,
            };
        }
        Some(d)
    }

    /// Tree text: one node per line, `kind  input => output`.
    pub fn text<'a>(&'a self, algs: &'a AlgebraSet) -> DerivationText<'a> {
        DerivationText { d: self, algs }
    }
}

pub struct DerivationText<'a> {
    d: &'a Derivation,
    algs: &'a AlgebraSet,
}

fn write_node(
    f: &mut fmt::Formatter<'_>,
    d: &Derivation,
    algs: &AlgebraSet,
    indent: usize,
) -> fmt::Result {
    let kind = match &d.rule {
        Rule::End => "end".to_string(),
        Rule::Res { hint, annot, .. } => format!("new[{hint}]{{{}}}", annot.display(algs)),
        Rule::Recv { chan, hint, .. } => format!("recv {}?({hint})", chan.index),
        Rule::Send { chan, payload, .. } => format!("send {}!{}", chan.index, payload.index),
        Rule::Par { .. } => "par".to_string(),
    };
    writeln!(
        f,
        "{:indent$}{kind}  {} => {}",
        "",
        fmt_ctx(algs, &d.idxs, &d.input),
        fmt_ctx(algs, &d.idxs, &d.output),
        indent = indent * 2
    )?;
    match &d.rule {
        Rule::End => Ok(()),
        Rule::Res { body, .. } | Rule::Recv { body, .. } | Rule::Send { body, .. } => {
            write_node(f, body, algs, indent + 1)
        }
        Rule::Par { left, right } => {
            write_node(f, left, algs, indent + 1)?;
            write_node(f, right, algs, indent + 1)
        }
    }
}

impl fmt::Display for DerivationText<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, self.d, self.algs, 0)
    }
}

/// The first node that does not follow its rule.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("derivation invalid at {}: {reason}", fmt_path(.path))]
pub struct RecheckError {
    pub path: Path,
    pub reason: String,
}

/// Validates every node of `d` against its rule, using only the stored
/// contexts.
pub fn recheck(algs: &AlgebraSet, d: &Derivation) -> Result<(), RecheckError> {
    let mut path = Vec::new();
    super::validate_contexts(algs, &d.types, &d.idxs, &d.input, d.depth()).map_err(|e| {
        RecheckError {
            path: Vec::new(),
            reason: format!("input context: {e}"),
        }
    })?;
    node(algs, d, &mut path).map_err(|reason| RecheckError { path, reason })
}

fn ensure(cond: bool, reason: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(reason())
    }
}

fn node(algs: &AlgebraSet, d: &Derivation, path: &mut Path) -> Result<(), String> {
    let n = d.types.len();
    ensure(
        d.idxs.len() == n && d.input.len() == n && d.output.len() == n,
        || "context lengths disagree".into(),
    )?;
    let descend = |path: &mut Path, c: Child, body: &Derivation| -> Result<(), String> {
        path.push(c);
        node(algs, body, path)?;
        path.pop();
        Ok(())
    };
    match &d.rule {
        Rule::End => ensure(d.output == d.input, || "end must return its input".into()),
        Rule::Res { annot, body, .. } => {
            ensure(annot.is_valid(algs), || "ill-formed annotation".into())?;
            ensure(body.types == d.types.with(annot.channel_type()), || {
                "body types do not extend the node's".into()
            })?;
            ensure(body.idxs == d.idxs.with(annot.chan_alg), || {
                "body algebras do not extend the node's".into()
            })?;
            ensure(
                body.input
                    == d.input
                        .with(crate::algebra::UsagePair::balanced(annot.mult)),
                || "body input is not (Γ, (y,y))".into(),
            )?;
            ensure(
                body.output == d.output.with(algs.empty(annot.chan_alg)),
                || "body output is not (Δ, ℓ∅)".into(),
            )?;
            descend(path, Child::ResBody, body)
        }
        Rule::Recv { chan, body, .. } => {
            chan_ok(algs, d, chan, true)?;
            let (t, palg, x) = chan.ty.as_chan().ok_or("channel is not a channel")?;
            ensure(body.types == d.types.with(t.clone()), || {
                "body types do not extend with the payload type".into()
            })?;
            ensure(body.idxs == d.idxs.with(palg), || {
                "body algebras do not extend with the payload algebra".into()
            })?;
            ensure(body.input == chan.output.with(x), || {
                "body input is not (Ξ, x)".into()
            })?;
            ensure(body.output == d.output.with(algs.empty(palg)), || {
                "body output is not (Δ, ℓ∅)".into()
            })?;
            descend(path, Child::RecvBody, body)
        }
        Rule::Send {
            chan,
            payload,
            body,
        } => {
            chan_ok(algs, d, chan, false)?;
            let (t, palg, x) = chan.ty.as_chan().ok_or("channel is not a channel")?;
            ensure(payload.is_valid(algs, &d.types, &d.idxs), || {
                "payload reference does not recompute".into()
            })?;
            ensure(payload.input == chan.output, || {
                "payload reference does not start from the channel's leftover".into()
            })?;
            ensure(payload.ty == *t, || "payload type mismatch".into())?;
            ensure(payload.alg == palg && payload.demanded == x, || {
                "payload demand differs from the channel's usage".into()
            })?;
            ensure(body.types == d.types && body.idxs == d.idxs, || {
                "continuation contexts differ".into()
            })?;
            ensure(body.input == payload.output, || {
                "continuation input is not the payload leftover".into()
            })?;
            ensure(body.output == d.output, || {
                "continuation output is not the node's".into()
            })?;
            descend(path, Child::SendBody, body)
        }
        Rule::Par { left, right } => {
            for s in [left, right] {
                ensure(s.types == d.types && s.idxs == d.idxs, || {
                    "parallel components change contexts".into()
                })?;
            }
            ensure(left.input == d.input, || {
                "left input is not the node's".into()
            })?;
            ensure(right.input == left.output, || {
                "right input is not the left leftover".into()
            })?;
            ensure(right.output == d.output, || {
                "right output is not the node's".into()
            })?;
            descend(path, Child::ParLeft, left)?;
            descend(path, Child::ParRight, right)
        }
    }
}

/// Checks a channel reference: recomputable, starting at the node's input,
/// demanding `ℓi`/`ℓo` in the channel's algebra.
fn chan_ok(algs: &AlgebraSet, d: &Derivation, chan: &VarRef, receive: bool) -> Result<(), String> {
    ensure(chan.is_valid(algs, &d.types, &d.idxs), || {
        "channel reference does not recompute".into()
    })?;
    ensure(chan.input == d.input, || {
        "channel reference does not start at the node's input".into()
    })?;
    let want = if receive {
        algs.input_only(chan.alg)
    } else {
        algs.output_only(chan.alg)
    };
    ensure(chan.demanded == want, || "wrong capability demanded".into())
}
