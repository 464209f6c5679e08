use super::congruence::subject_cong;
use super::frame::reframe;
use super::structural::strengthen;
use super::subst::subst_top;
use super::{both_at, checked, par_node, res_node, MetaError};
use crate::algebra::{AlgebraSet, UsagePair};
use crate::ast::{Name, NuAnnot, Term};
use crate::checker::{Derivation, Rule};
use crate::context::{consume_var, VarRef};
use crate::semantics::{reductions, Channel, Reduction};

fn stuck(why: impl Into<String>) -> MetaError {
    MetaError::StepNotDerivable(why.into())
}

/// Retypes the result of `step`. An internal step keeps the root contexts
/// `(Γ, Ξ)`; an external step on `i` starts from `Δ` with `Γ ∋i ℓ# ▷ Δ`, which
/// `capability` must witness.
pub fn subject_reduction(
    algs: &AlgebraSet,
    d: &Derivation,
    step: &Reduction,
    capability: Option<&VarRef>,
) -> Result<Derivation, MetaError> {
    let root_input = match step.channel {
        Channel::Internal => d.input.clone(),
        Channel::External(i) => {
            let cap = capability.ok_or(MetaError::MissingCapability(i))?;
            let valid = cap.index == i
                && cap.input == d.input
                && Some(cap.demanded) == both_at(algs, &d.idxs, i)
                && cap.is_valid(algs, &d.types, &d.idxs);
            if !valid {
                return Err(MetaError::EvidenceMismatch(format!(
                    "capability does not take ℓ# from {i}"
                )));
            }
            cap.output.clone()
        }
    };
    let mut cur = d.clone();
    for rw in &step.rewrites {
        cur = subject_cong(algs, &cur, rw).map_err(|e| stuck(format!("rewrite {rw}: {e}")))?;
    }

    // Peel the restrictions the step happens under.
    let mut binders: Vec<(Name, NuAnnot)> = Vec::new();
    let mut targets = Vec::new();
    let mut inner = &cur;
    let mut target_term = step.target.term();
    for _ in 0..step.prefix {
        let (
            Rule::Res { hint, annot, body },
            Term::Res {
                annot: next,
                body: tb,
                ..
            },
        ) = (&inner.rule, target_term)
        else {
            return Err(stuck("restriction prefix is missing"));
        };
        binders.push((hint.clone(), annot.clone()));
        targets.push(next.clone());
        inner = body;
        target_term = &**tb;
    }

    let (pair, rest) = if step.has_rest {
        match &inner.rule {
            Rule::Par { left, right } => (&**left, Some(&**right)),
            _ => return Err(stuck("redex is not composed with a rest")),
        }
    } else {
        (inner, None)
    };
    let new_pair = communicate(algs, pair)?;
    let mut body = match rest {
        Some(r) => par_node(new_pair, r.clone()),
        None => new_pair,
    };

    for ((hint, _), annot) in binders.into_iter().zip(targets).rev() {
        if body.input.head() != Some(&UsagePair::balanced(annot.mult)) {
            return Err(stuck("restriction multiplicity does not match the body"));
        }
        body = res_node(hint, annot, body);
    }
    if body.input != root_input || body.output != d.output {
        return Err(stuck("root contexts differ from the expected ones"));
    }
    if body.subject() != step.target {
        return Err(stuck("retyped process is not the step's target"));
    }
    checked(algs, body)
}

/// `x?(a). P | x!y. Q` to `lower₀ (P[1+y/0]) | Q`, the channel losing `ℓ#`.
fn communicate(algs: &AlgebraSet, pair: &Derivation) -> Result<Derivation, MetaError> {
    let Rule::Par { left, right } = &pair.rule else {
        return Err(stuck("redex is not a composition"));
    };
    let (
        Rule::Recv {
            chan: ci, body: dp, ..
        },
        Rule::Send {
            chan: co,
            payload,
            body: dq,
        },
    ) = (&left.rule, &right.rule)
    else {
        return Err(stuck("redex is not an input next to an output"));
    };
    if ci.index != co.index {
        return Err(stuck("input and output use different channels"));
    }
    let a = ci.index;
    let alg = ci.alg;
    let (_, g2) = consume_var(
        algs,
        &pair.types,
        &pair.idxs,
        &pair.input,
        a,
        algs.both(alg),
        alg,
    )
    .map_err(|e| stuck(format!("channel {a} lacks ℓ#: {e}")))?;
    let x = *dp.input.head().expect("binder context is nonempty");
    let dp2 = reframe(algs, dp, &g2.with(x))?;
    let h1 = dp2.output.uncons().expect("binder context is nonempty").0;
    let (_, h2) = consume_var(
        algs,
        &pair.types,
        &pair.idxs,
        &h1,
        payload.index,
        payload.demanded,
        payload.alg,
    )
    .map_err(|e| stuck(format!("payload: {e}")))?;
    let moved = subst_top(algs, &dp2, payload.index, &h2)?;
    let p = strengthen(algs, &moved, 0)?;
    if p.output != dq.input {
        return Err(stuck("continuations do not line up"));
    }
    Ok(par_node(p, (**dq).clone()))
}

/// `Γ ∋i ℓ# ▷ Δ` for a process that can communicate on the free channel `i`.
pub fn derive_capability(algs: &AlgebraSet, d: &Derivation, i: usize) -> Result<VarRef, MetaError> {
    let reduces = reductions(algs, &d.subject())
        .iter()
        .any(|r| r.channel == Channel::External(i));
    if !reduces {
        return Err(MetaError::NoCapability(i));
    }
    let both = both_at(algs, &d.idxs, i).ok_or(MetaError::NoCapability(i))?;
    VarRef::derive(algs, &d.types, &d.idxs, &d.input, i, both, d.idxs[i])
        .map_err(|_| MetaError::NoCapability(i))
}
