use serde::{Deserialize, Serialize};

use super::{checked, context_error, tail, MetaError};
use crate::algebra::AlgebraSet;
use crate::checker::{Derivation, Rule};
use crate::context::{split_ctx, Ctx, Idxs, VarRef};

/// `Γ_l` splits into the frame `Δ` and the leftover `Ξ_l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitEvidence {
    pub gamma_l: Ctx,
    pub delta: Ctx,
    pub xi_l: Ctx,
}

impl SplitEvidence {
    pub fn new(
        algs: &AlgebraSet,
        idxs: &Idxs,
        gamma_l: Ctx,
        delta: Ctx,
        xi_l: Ctx,
    ) -> Result<SplitEvidence, MetaError> {
        let ev = SplitEvidence {
            gamma_l,
            delta,
            xi_l,
        };
        if ev.is_valid(algs, idxs) {
            Ok(ev)
        } else {
            Err(MetaError::EvidenceMismatch(
                "Γ_l does not split into Δ and Ξ_l".into(),
            ))
        }
    }

    /// What `d` consumes: `Δ` with `split_ctx(input, Δ) = output`.
    pub fn of(algs: &AlgebraSet, d: &Derivation) -> Result<SplitEvidence, MetaError> {
        let delta = split_ctx(algs, &d.idxs, &d.input, &d.output)
            .map_err(|e| MetaError::EvidenceMismatch(context_error(e)))?;
        SplitEvidence::new(algs, &d.idxs, d.input.clone(), delta, d.output.clone())
    }

    pub fn is_valid(&self, algs: &AlgebraSet, idxs: &Idxs) -> bool {
        split_ctx(algs, idxs, &self.gamma_l, &self.delta).is_ok_and(|x| x == self.xi_l)
    }
}

/// Moves `d` from `(Γ_l, Ξ_l)` to `(Γ_r, Ξ_r)` where `Ξ_r` is what is left of
/// `Γ_r` after taking out the same `Δ`.
pub fn frame(
    algs: &AlgebraSet,
    d: &Derivation,
    ev: &SplitEvidence,
    gamma_r: &Ctx,
) -> Result<Derivation, MetaError> {
    if d.input != ev.gamma_l || d.output != ev.xi_l || !ev.is_valid(algs, &d.idxs) {
        return Err(MetaError::EvidenceMismatch(
            "split evidence does not describe the derivation".into(),
        ));
    }
    let xi_r = split_ctx(algs, &d.idxs, gamma_r, &ev.delta)
        .map_err(|e| MetaError::FrameUndefined(context_error(e)))?;
    let out = reframe(algs, d, gamma_r)?;
    if out.output != xi_r {
        return Err(MetaError::FrameUndefined(
            "leftover differs from Γ_r without Δ".into(),
        ));
    }
    checked(algs, out)
}

/// Re-derives every variable reference of `d` starting from `input`.
pub(crate) fn reframe(
    algs: &AlgebraSet,
    d: &Derivation,
    input: &Ctx,
) -> Result<Derivation, MetaError> {
    let var = |r: &VarRef, from: &Ctx| {
        VarRef::derive(algs, &d.types, &d.idxs, from, r.index, r.demanded, r.alg)
            .map_err(|e| MetaError::FrameUndefined(context_error(e)))
    };
    let opened = |body: &Derivation, from: &Ctx| {
        from.with(*body.input.head().expect("binder context is nonempty"))
    };
    let (rule, output) = match &d.rule {
        Rule::End => (Rule::End, input.clone()),
        Rule::Res { hint, annot, body } => {
            let b = reframe(algs, body, &opened(body, input))?;
            let out = tail(&b.output);
            let rule = Rule::Res {
                hint: hint.clone(),
                annot: annot.clone(),
                body: Box::new(b),
            };
            (rule, out)
        }
        Rule::Recv { chan, hint, body } => {
            let c = var(chan, input)?;
            let b = reframe(algs, body, &opened(body, &c.output))?;
            let out = tail(&b.output);
            let rule = Rule::Recv {
                chan: c,
                hint: hint.clone(),
                body: Box::new(b),
            };
            (rule, out)
        }
        Rule::Send {
            chan,
            payload,
            body,
        } => {
            let c = var(chan, input)?;
            let m = var(payload, &c.output)?;
            let b = reframe(algs, body, &m.output)?;
            let out = b.output.clone();
            let rule = Rule::Send {
                chan: c,
                payload: m,
                body: Box::new(b),
            };
            (rule, out)
        }
        Rule::Par { left, right } => {
            let l = reframe(algs, left, input)?;
            let r = reframe(algs, right, &l.output)?;
            let out = r.output.clone();
            let rule = Rule::Par {
                left: Box::new(l),
                right: Box::new(r),
            };
            (rule, out)
        }
    };
    Ok(Derivation {
        types: d.types.clone(),
        idxs: d.idxs.clone(),
        input: input.clone(),
        output,
        rule,
    })
}

/// Frames `d` onto `input` by its own consumption.
pub(crate) fn frame_to(
    algs: &AlgebraSet,
    d: &Derivation,
    input: &Ctx,
) -> Result<Derivation, MetaError> {
    frame(algs, d, &SplitEvidence::of(algs, d)?, input)
}
